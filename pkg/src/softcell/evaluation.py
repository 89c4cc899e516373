"""Independent verification of beamforming solutions.

Works on any object exposing per-link beamforming vectors `w[k][j]`; nothing
here trusts the producing optimizer.  The aggregate SINR of user k is

    sum_j |h_{k,j}^H w_{k,j}|^2  /  (sum_j sum_{i != k} |h_{k,j}^H w_{i,j}|^2 + sigma_k^2),

i.e. own-signal powers add across transmitters (non-coherent combining) and
every other user's beam contributes interference.  A matrix-form recomputation
through tr(h h^H w w^H) cross-checks the vector arithmetic.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exceptions import InvalidInputError
from .power import (HardwareProfile, check_power_constraints, dynamic_power,
                    mw_to_dbm, static_power)
from .scenario import ChannelSet

SERVING_SHARE = 1e-6


@dataclass
class EvaluationReport:
    sinr: np.ndarray                # per user, dimensionless
    rate: np.ndarray                # log2(1 + sinr), bits/s/Hz
    qos_margin: np.ndarray          # rate - gamma
    power_slacks: list              # ConstraintSlack per (transmitter, antenna)
    p_dynamic_mw: float
    p_static_mw: float
    p_total_mw: float
    p_total_dbm: float
    serving: list                   # tuple of transmitter indices per user
    multiflow: np.ndarray           # bool per user
    crosscheck_residual: float      # max relative vector-vs-matrix SINR deviation


def evaluate(solution, channels: ChannelSet, hw: HardwareProfile,
             gamma) -> EvaluationReport:
    beams = getattr(solution, "w", solution)
    K, T = channels.num_users, channels.num_transmitters
    if len(beams) != K:
        raise InvalidInputError("need one beamformer list per user")
    if len(gamma) != K:
        raise InvalidInputError("need one QoS target per user")
    for k in range(K):
        if len(beams[k]) != T:
            raise InvalidInputError(f"user {k}: expected {T} beamformers")
        for j in range(T):
            if len(beams[k][j]) != channels.antennas(j):
                raise InvalidInputError(f"beamformer ({k}, {j}) has the wrong length")

    # |h^H w|^2 for every (receiving user, beam owner, transmitter).
    gains = np.zeros((K, K, T))
    gains_mat = np.zeros((K, K, T))
    for j in range(T):
        if channels.antennas(j) == 0:
            continue
        for k in range(K):
            h = channels.h[k][j]
            hh = np.outer(h, h.conj())
            for i in range(K):
                amp = np.vdot(channels.h[k][j], beams[i][j])
                gains[k, i, j] = float(np.real(amp * np.conj(amp)))
                Wij = np.outer(beams[i][j], np.conj(beams[i][j]))
                gains_mat[k, i, j] = float(np.real(np.trace(hh @ Wij)))

    crosscheck = float(np.max(np.abs(gains - gains_mat) / (1.0 + np.abs(gains))))
    own = gains[np.arange(K), np.arange(K), :].sum(axis=1)
    total_rx = gains.sum(axis=1).sum(axis=1)
    interference = total_rx - own
    sinr = own / (interference + np.asarray(channels.sigma2))
    rate = np.log2(1.0 + sinr)

    p = np.array([[float(np.real(np.vdot(beams[k][j], beams[k][j]))) for j in range(T)]
                  for k in range(K)])
    serving = []
    for k in range(K):
        tot = p[k].sum()
        serving.append(tuple(int(j) for j in np.nonzero(p[k] > SERVING_SHARE * tot)[0]) if tot > 0 else ())
    multiflow = np.array([len(s) > 1 for s in serving])

    p_dyn = dynamic_power(beams, hw)
    p_stat = static_power(hw, channels.antennas(0), channels.antennas(1) if T > 1 else 0, T - 1)
    total = p_dyn + p_stat
    return EvaluationReport(
        sinr=sinr, rate=rate, qos_margin=rate - np.asarray(gamma, dtype=float),
        power_slacks=check_power_constraints(beams, hw),
        p_dynamic_mw=p_dyn, p_static_mw=p_stat, p_total_mw=total,
        p_total_dbm=mw_to_dbm(total) if total > 0 else float("-inf"),
        serving=serving, multiflow=multiflow, crosscheck_residual=crosscheck)


def report_csv(report: EvaluationReport, gamma) -> str:
    """One row per user plus a trailing summary row."""
    lines = ["user,sinr,rate_bits,qos_margin,serving,multiflow"]
    for k in range(len(report.sinr)):
        serving = "|".join(str(j) for j in report.serving[k])
        lines.append(f"{k},{float(report.sinr[k])!r},{float(report.rate[k])!r},"
                     f"{float(report.qos_margin[k])!r},{serving},{int(report.multiflow[k])}")
    lines.append(f"summary,p_dynamic_mw={report.p_dynamic_mw!r},p_static_mw={report.p_static_mw!r},"
                 f"p_total_mw={report.p_total_mw!r},p_total_dbm={report.p_total_dbm!r},"
                 f"crosscheck={report.crosscheck_residual!r}")
    return "\n".join(lines) + "\n"
