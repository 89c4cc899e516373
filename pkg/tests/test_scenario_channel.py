"""Scenario generation: geometry, propagation, covariances, reproducibility."""

import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from softcell.exceptions import InvalidInputError
from softcell.power import HardwareProfile
from softcell.scenario import (MACRO, SCA_NEAR, ScenarioConfig,
                               build_correlation, config_from_dict,
                               draw_channels, drop_users, load_config,
                               path_loss_db, realize_scenario, stream,
                               with_axis_value)


def small_config(**overrides):
    base = dict(cell_radius=0.5, num_users_uniform=2,
                sca_positions=((0.3, 0.0), (-0.3, 0.0)), users_per_sca=1,
                n_bs=4, n_sca=2, qos_targets=(2.0,) * 4, seed=123)
    base.update(overrides)
    return ScenarioConfig(**base)


# ---------------------------------------------------------------------------
# Propagation
# ---------------------------------------------------------------------------

def test_path_loss_reference_points():
    assert abs(path_loss_db(0.1, MACRO) - 110.5) < 1e-12
    assert abs(path_loss_db(1.0, MACRO) - 148.1) < 1e-12
    assert abs(path_loss_db(0.04, SCA_NEAR) - 85.06179973983887) < 1e-10
    assert abs(path_loss_db(0.001, SCA_NEAR) - 37.0) < 1e-10


def test_path_loss_clamps_below_one_meter():
    assert path_loss_db(1e-7, MACRO) == path_loss_db(1e-3, MACRO)
    assert path_loss_db(1e-7, SCA_NEAR) == path_loss_db(1e-3, SCA_NEAR)


def test_path_loss_rejects_bad_input():
    with pytest.raises(InvalidInputError):
        path_loss_db(0.0, MACRO)
    with pytest.raises(InvalidInputError):
        path_loss_db(-1.0, MACRO)
    with pytest.raises(InvalidInputError):
        path_loss_db(0.1, "underwater")


@settings(max_examples=25, deadline=None)
@given(st.floats(1e-3, 10.0), st.floats(1.001, 2.0))
def test_path_loss_increases_with_distance(d, factor):
    assert path_loss_db(d * factor, MACRO) > path_loss_db(d, MACRO)
    assert path_loss_db(d * factor, SCA_NEAR) > path_loss_db(d, SCA_NEAR)


def test_noise_power_matches_the_dbm_figure():
    cfg = small_config()
    assert cfg.noise_variance_mw == pytest.approx(1.9952623149688827e-13, rel=1e-15)
    ch = realize_scenario(cfg, trial=0)
    assert np.all(ch.sigma2 == cfg.noise_variance_mw)


# ---------------------------------------------------------------------------
# Geometry
# ---------------------------------------------------------------------------

@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2 ** 32 - 1))
def test_user_drops_respect_the_disc_geometry(seed):
    cfg = small_config(seed=seed)
    pos = drop_users(cfg, stream(cfg.seed, 0, 0))
    assert pos.shape == (cfg.num_users, 2)
    # Uniform users first, anywhere in the cell disc.
    assert np.all(np.hypot(pos[:2, 0], pos[:2, 1]) <= cfg.cell_radius + 1e-12)
    # Then one group per SCA, each inside its hotspot disc.
    for s, site in enumerate(cfg.sca_positions):
        group = pos[2 + s: 3 + s] - np.asarray(site)
        assert np.all(np.hypot(group[:, 0], group[:, 1]) <= cfg.sca_user_radius + 1e-12)


def test_config_counts_and_antenna_lookup():
    cfg = small_config()
    assert cfg.num_users == 4
    assert cfg.num_sca == 2
    assert cfg.antennas(0) == 4
    assert cfg.antennas(1) == cfg.antennas(2) == 2


# ---------------------------------------------------------------------------
# Covariances
# ---------------------------------------------------------------------------

def test_covariances_are_hermitian_psd_with_normalized_trace():
    cfg = small_config(shadowing_stddev=0.0)
    pos = drop_users(cfg, stream(cfg.seed, 0, 0))
    R = build_correlation(cfg, pos, np.zeros((cfg.num_users, 3)))
    for k in range(cfg.num_users):
        d_bs = float(np.hypot(pos[k, 0], pos[k, 1]))
        gain = 10.0 ** (-path_loss_db(d_bs, MACRO) / 10.0)
        Rk0 = R[k][0]
        assert np.abs(Rk0 - Rk0.conj().T).max() < 1e-14
        assert np.linalg.eigvalsh(Rk0)[0] >= -1e-12 * np.real(np.trace(Rk0))
        assert np.real(np.trace(Rk0)) == pytest.approx(cfg.n_bs * gain, rel=1e-12)
        for j in (1, 2):
            # SCA covariances are scaled identities.
            Rkj = R[k][j]
            assert np.abs(Rkj - Rkj[0, 0] * np.eye(cfg.n_sca)).max() < 1e-15
            assert Rkj[0, 0].real > 0


def test_near_rule_switches_the_loss_model_at_the_boundary():
    cfg = small_config(num_users_uniform=2, users_per_sca=0, qos_targets=(2.0, 2.0))
    at = np.array([[0.3 + 0.04, 0.0], [0.3 + 0.0401, 0.0]])
    R = build_correlation(cfg, at, np.zeros((2, 3)))
    near_gain = 10.0 ** (-path_loss_db(0.04, SCA_NEAR) / 10.0)
    far_gain = 10.0 ** (-path_loss_db(0.0401, MACRO) / 10.0)
    assert R[0][1][0, 0].real == pytest.approx(near_gain, rel=1e-12)
    assert R[1][1][0, 0].real == pytest.approx(far_gain, rel=1e-12)


def test_shadowing_shape_is_validated():
    cfg = small_config()
    pos = drop_users(cfg, stream(cfg.seed, 0, 0))
    with pytest.raises(InvalidInputError):
        build_correlation(cfg, pos, np.zeros((cfg.num_users, 2)))


def test_fading_matches_the_covariance_in_sample_moments():
    cfg = small_config(num_users_uniform=1, users_per_sca=0, n_bs=2,
                       qos_targets=(2.0,), shadowing_stddev=0.0)
    pos = np.array([[0.2, 0.1]])
    R = build_correlation(cfg, pos, np.zeros((1, 3)))
    target = R[0][0]
    trials = 4000
    acc = np.zeros((2, 2), dtype=complex)
    norms = 0.0
    for t in range(trials):
        ch = draw_channels(cfg, R, pos, lambda k, j: stream(7, t, 2, k, j))
        v = ch.h[0][0]
        acc += np.outer(v, v.conj())
        norms += float(np.vdot(v, v).real)
    emp = acc / trials
    rel = np.linalg.norm(emp - target) / np.linalg.norm(target)
    assert rel < 0.05
    assert norms / trials == pytest.approx(np.real(np.trace(target)), rel=0.05)


# ---------------------------------------------------------------------------
# Reproducibility
# ---------------------------------------------------------------------------

def test_realizations_are_bitwise_reproducible():
    cfg = small_config()
    a = realize_scenario(cfg, trial=5)
    b = realize_scenario(cfg, trial=5)
    assert np.array_equal(a.user_positions, b.user_positions)
    for k in range(a.num_users):
        for j in range(a.num_transmitters):
            assert np.array_equal(a.h[k][j], b.h[k][j])
    c = realize_scenario(cfg, trial=6)
    assert not np.array_equal(a.h[0][0], c.h[0][0])


def test_antenna_count_changes_leave_other_links_paired():
    # Per-link fading streams: growing the BS array must not disturb the SCA
    # links of the same trial, and vice versa.
    cfg8 = small_config(n_bs=8)
    cfg16 = small_config(n_bs=16)
    a, b = realize_scenario(cfg8, 3), realize_scenario(cfg16, 3)
    assert np.array_equal(a.user_positions, b.user_positions)
    for k in range(a.num_users):
        for j in (1, 2):
            assert np.array_equal(a.h[k][j], b.h[k][j])
    cfg_s1 = small_config(n_sca=1)
    cfg_s4 = small_config(n_sca=4)
    c, d = realize_scenario(cfg_s1, 3), realize_scenario(cfg_s4, 3)
    for k in range(c.num_users):
        assert np.array_equal(c.h[k][0], d.h[k][0])


def test_empty_scenario_realizes_cleanly():
    cfg = small_config(num_users_uniform=0, users_per_sca=0, qos_targets=())
    ch = realize_scenario(cfg)
    assert ch.num_users == 0
    assert ch.sigma2.shape == (0,)


# ---------------------------------------------------------------------------
# Config I/O
# ---------------------------------------------------------------------------

def test_config_json_roundtrip(tmp_path):
    data = {
        "cell_radius": 0.4, "num_users_uniform": 3,
        "sca_positions": [[0.2, 0.0]], "users_per_sca": 2,
        "n_bs": 8, "n_sca": 2, "qos_targets": 1.5, "seed": 9,
        "hardware": {"rho": [2.5, 19.0], "eta": [100.0, 5.0],
                     "per_antenna_limit": [50.0, 0.1]},
    }
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(data))
    cfg = load_config(str(path))
    assert cfg.cell_radius == 0.4
    assert cfg.qos_targets == (1.5,) * 5
    assert cfg.hardware.rho == (2.5, 19.0)
    assert cfg.hardware.subcarriers == 600
    over = load_config(str(path), overrides={"seed": 77})
    assert over.seed == 77


def test_unknown_config_key_is_rejected():
    with pytest.raises(InvalidInputError):
        config_from_dict({"cell_radius": 0.4, "num_users_uniform": 1,
                          "sca_positions": [], "users_per_sca": 0,
                          "n_bs": 4, "n_sca": 0, "qos_targets": [2.0],
                          "seed": 0, "frequency_plan": "A"})


def test_axis_replacement_constructs_the_swept_config():
    cfg = small_config()
    assert with_axis_value(cfg, "n_bs", 24).n_bs == 24
    assert with_axis_value(cfg, "n_sca", 3).n_sca == 3
    swept = with_axis_value(cfg, "qos", 3.0)
    assert swept.qos_targets == (3.0,) * cfg.num_users
    with pytest.raises(InvalidInputError):
        with_axis_value(cfg, "qos_db", 3.0)


def test_config_validation_errors():
    with pytest.raises(InvalidInputError):
        small_config(cell_radius=0.0)
    with pytest.raises(InvalidInputError):
        small_config(sca_positions=((0.6, 0.0),))  # outside the cell disc
    with pytest.raises(InvalidInputError):
        small_config(qos_targets=(2.0,) * 3)       # wrong length
    with pytest.raises(InvalidInputError):
        small_config(qos_targets=(2.0, 2.0, 2.0, -1.0))
    with pytest.raises(InvalidInputError):
        small_config(n_bs=0)
    with pytest.raises(InvalidInputError):
        small_config(seed=-1)
    with pytest.raises(InvalidInputError):
        small_config(num_users_uniform=-1)
