"""Solution evaluation: aggregate SINR arithmetic, reports, input checking."""

import numpy as np
import pytest

from conftest import loose_hardware, make_channels
from softcell.evaluation import evaluate, report_csv
from softcell.exceptions import InvalidInputError


def test_single_user_sinr_and_rate_reference(single_user_unit_channel):
    h = single_user_unit_channel.h[0][0]
    beams = [[np.sqrt(3.0) * h]]   # ||h|| = 1, so 3 mW on the matched filter
    report = evaluate(beams, single_user_unit_channel, loose_hardware(1, rho=2.0), (2.0,))
    assert report.sinr[0] == pytest.approx(3.0, rel=1e-12)
    assert report.rate[0] == pytest.approx(2.0, rel=1e-12)
    assert report.qos_margin[0] == pytest.approx(0.0, abs=1e-12)
    assert report.p_dynamic_mw == pytest.approx(6.0, rel=1e-12)
    assert report.p_total_mw == pytest.approx(6.0, rel=1e-12)
    assert report.p_total_dbm == pytest.approx(10.0 * np.log10(6.0), rel=1e-12)
    assert report.serving == [(0,)]
    assert not report.multiflow[0]
    assert report.crosscheck_residual <= 1e-10


def test_zero_beams_give_zero_sinr_and_static_only_power():
    ch = make_channels([[np.array([1.0, 0.5j])]], [1.0])
    beams = [[np.zeros(2, dtype=complex)]]
    report = evaluate(beams, ch, loose_hardware(1, eta=0.0), (0.0,))
    assert report.sinr[0] == 0.0
    assert report.rate[0] == 0.0
    assert report.p_total_mw == 0.0
    assert report.p_total_dbm == float("-inf")
    assert report.serving == [()]


def test_orthogonal_users_see_no_interference():
    e0 = np.array([1.0 + 0j, 0.0])
    e1 = np.array([0.0, 1.0 + 0j])
    ch = make_channels([[e0], [e1]], [1.0, 1.0])
    beams = [[2.0 * e0], [3.0 * e1]]
    report = evaluate(beams, ch, loose_hardware(1), (1.0, 1.0))
    assert report.sinr[0] == pytest.approx(4.0, rel=1e-12)
    assert report.sinr[1] == pytest.approx(9.0, rel=1e-12)


def test_shared_channel_counts_cross_interference():
    e0 = np.array([1.0 + 0j, 0.0])
    ch = make_channels([[e0], [e0]], [1.0, 1.0])
    beams = [[e0.copy()], [e0.copy()]]
    report = evaluate(beams, ch, loose_hardware(1), (0.5, 0.5))
    # Each user receives 1 mW of signal and 1 mW of interference over 1 mW noise.
    assert report.sinr[0] == pytest.approx(0.5, rel=1e-12)
    assert report.sinr[1] == pytest.approx(0.5, rel=1e-12)


def test_own_signal_adds_across_transmitters():
    h_bs = np.array([1.0 + 0j])
    h_sca = np.array([1.0 + 0j])
    ch = make_channels([[h_bs, h_sca]], [1.0])
    beams = [[np.array([2.0 + 0j]), np.array([1.0 + 0j])]]
    report = evaluate(beams, ch, loose_hardware(2), (1.0,))
    # Non-coherent combining: powers 4 + 1 add, they do not beat as amplitudes.
    assert report.sinr[0] == pytest.approx(5.0, rel=1e-12)
    assert report.multiflow[0]
    assert report.serving == [(0, 1)]


def test_evaluation_is_pure():
    ch = make_channels([[np.array([1.0, 0.5j])]], [1.0])
    beams = [[np.array([0.3 + 0.1j, 0.2j])]]
    snapshot = beams[0][0].copy()
    a = evaluate(beams, ch, loose_hardware(1), (1.0,))
    b = evaluate(beams, ch, loose_hardware(1), (1.0,))
    assert np.array_equal(beams[0][0], snapshot)
    assert a.sinr[0] == b.sinr[0]
    assert a.p_total_mw == b.p_total_mw


def test_report_csv_layout():
    e0 = np.array([1.0 + 0j, 0.0])
    e1 = np.array([0.0, 1.0 + 0j])
    ch = make_channels([[e0], [e1]], [1.0, 1.0])
    report = evaluate([[2.0 * e0], [3.0 * e1]], ch, loose_hardware(1), (1.0, 1.0))
    text = report_csv(report, (1.0, 1.0))
    lines = text.strip().split("\n")
    assert lines[0] == "user,sinr,rate_bits,qos_margin,serving,multiflow"
    assert len(lines) == 4
    assert lines[-1].startswith("summary,p_dynamic_mw=")
    user0 = lines[1].split(",")
    assert user0[0] == "0"
    assert float(user0[1]) == pytest.approx(4.0, rel=1e-12)
    assert user0[4] == "0"
    assert user0[5] == "0"


def test_dimension_mismatches_are_rejected():
    ch = make_channels([[np.array([1.0, 0.5j])]], [1.0])
    hw = loose_hardware(1)
    with pytest.raises(InvalidInputError):
        evaluate([], ch, hw, (1.0,))
    with pytest.raises(InvalidInputError):
        evaluate([[np.zeros(2, dtype=complex)]], ch, hw, (1.0, 1.0))
    with pytest.raises(InvalidInputError):
        evaluate([[np.zeros(3, dtype=complex)]], ch, hw, (1.0,))
    with pytest.raises(InvalidInputError):
        evaluate([[np.zeros(2, dtype=complex), np.zeros(1, dtype=complex)]], ch, hw, (1.0,))
