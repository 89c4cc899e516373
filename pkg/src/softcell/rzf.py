"""Low-complexity multiflow beamforming: fixed per-transmitter directions from a
regularized channel-Gram inverse, then a centralized linear power allocation.

Each transmitter j forms, independently and from local channel knowledge only,

    u_{k,j} = normalize( (sum_i h_{i,j} h_{i,j}^H / sigma_i^2 + K/(gt_k q_j) I)^{-1} h_{k,j} ),

with the regularizer depending on the target user's SINR requirement gt_k and
the per-antenna cap q_j.  Only the scalar couplings |h_{i,j}^H u_{k,j}|^2 and
|u_{k,j}[l]|^2 travel over the backhaul; the power split across transmitters
then solves a small LP in the per-link powers p_{k,j}.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import conic_solver as cs
from .conic_problem import NONNEG, Block, ConicProblem
from .coordination import BeamformingSolution, CoordinationProblem, _verify_feasible
from .exceptions import InvalidInputError, NumericalFailureError, RzfInfeasibleError
from .power import dynamic_power, static_power
from .scenario import ChannelSet

# Couplings this far below the strongest gain at a transmitter are treated as
# exactly zero and never exchanged.
GAIN_FLOOR = 1e-12


@dataclass
class RzfIntermediate:
    u: list                 # u[k][j], unit-norm direction or zero vector
    g: np.ndarray           # (K, K, T): g[i, k, j] = |h_{i,j}^H u_{k,j}|^2
    qscal: list             # qscal[j][l, k] = |u_{k,j}[l]|^2
    exchanged: dict         # per-transmitter count of nonzero exchanged scalars


def rzf_directions(channels: ChannelSet, hw, gtilde) -> RzfIntermediate:
    K, T = channels.num_users, channels.num_transmitters
    gtilde = np.asarray(gtilde, dtype=float)
    u = [[np.zeros(channels.antennas(j), dtype=complex) for j in range(T)] for _ in range(K)]
    for j in range(T):
        n = channels.antennas(j)
        if n == 0:
            continue
        q_j = hw.per_antenna_limit[j]
        if q_j <= 0:
            raise InvalidInputError(f"transmitter {j} has antennas but a zero power cap")
        gram = np.zeros((n, n), dtype=complex)
        for i in range(K):
            gram += np.outer(channels.h[i][j], channels.h[i][j].conj()) / float(channels.sigma2[i])
        for k in range(K):
            if gtilde[k] <= 0:
                continue
            reg = K / (gtilde[k] * q_j)
            direction = np.linalg.solve(gram + reg * np.eye(n), channels.h[k][j])
            norm = np.linalg.norm(direction)
            if norm > 0:
                u[k][j] = direction / norm

    g = np.zeros((K, K, T))
    qscal = [np.zeros((channels.antennas(j), K)) for j in range(T)]
    for j in range(T):
        if channels.antennas(j) == 0:
            continue
        for k in range(K):
            qscal[j][:, k] = np.abs(u[k][j]) ** 2
            for i in range(K):
                amp = np.vdot(channels.h[i][j], u[k][j])
                g[i, k, j] = float(np.real(amp * np.conj(amp)))
        peak = g[:, :, j].max()
        if peak > 0:
            g[:, :, j][g[:, :, j] < GAIN_FLOOR * peak] = 0.0

    exchanged = {}
    for j in range(T):
        has_direction = np.array([np.linalg.norm(u[k][j]) > 0 for k in range(K)])
        exchanged[j] = int(np.count_nonzero(g[:, :, j])
                           + np.count_nonzero(qscal[j][:, has_direction]))
    return RzfIntermediate(u, g, qscal, exchanged)


def allocate_power(intermediate: RzfIntermediate, hw, gtilde, sigma2) -> np.ndarray:
    """Minimum-consumption power split over the fixed directions.

    Raises RzfInfeasibleError when no power allocation meets the SINR targets
    along these directions; the full problem may still be feasible.
    """
    gtilde = np.asarray(gtilde, dtype=float)
    K = len(gtilde)
    T = len(intermediate.qscal)
    pairs = [(k, j) for k in range(K) for j in range(T)
             if np.linalg.norm(intermediate.u[k][j]) > 0]
    if not pairs:
        return np.zeros((K, T))
    col = {pair: idx for idx, pair in enumerate(pairs)}

    prob = ConicProblem([Block(NONNEG, len(pairs))])
    prob.set_objective({0: np.array([hw.rho[j] for _, j in pairs])})
    # QoS rows per unit of noise power, matching the relaxation's scaling.
    g = intermediate.g
    for k in range(K):
        if gtilde[k] <= 0:
            continue
        row = np.zeros(len(pairs))
        for (i, j), idx in col.items():
            row[idx] = (g[k, k, j] / gtilde[k] if i == k else -g[k, i, j]) / float(sigma2[k])
        prob.add_constraint({0: row}, ">=", 1.0, name=f"qos_{k}")
    for j in range(T):
        qs = intermediate.qscal[j]
        for l in range(qs.shape[0]):
            row = np.zeros(len(pairs))
            for (i, jj), idx in col.items():
                if jj == j:
                    row[idx] = qs[l, i]
            if np.any(row):
                prob.add_constraint({0: row}, "<=", float(hw.per_antenna_limit[j]),
                                    name=f"cap_{j}_{l}")

    sol = cs.solve(prob)
    if sol.status == cs.INFEASIBLE:
        raise RzfInfeasibleError("fixed directions cannot meet the SINR targets")
    if sol.status != cs.OPTIMAL:
        raise NumericalFailureError(
            f"power allocation ended with status {sol.status}: {sol.message}",
            {"primal": sol.residual_primal, "dual": sol.residual_dual, "gap": sol.residual_gap})
    p = np.zeros((K, T))
    values = sol.block_values[0]
    for (k, j), idx in col.items():
        p[k, j] = max(float(values[idx]), 0.0)
    return p


def exchange_report_csv(solution: BeamformingSolution) -> str:
    """One-row CSV of backhaul-exchanged scalar counts, one column per SCA."""
    if not solution.exchanged_scalars:
        raise InvalidInputError("solution carries no exchanged-scalar counts")
    scas = sorted(j for j in solution.exchanged_scalars if j > 0)
    header = ",".join(f"exchanged_scalars_sca_{j}" for j in scas)
    row = ",".join(str(solution.exchanged_scalars[j]) for j in scas)
    return header + "\n" + row + "\n"


def rzf_solve(problem: CoordinationProblem) -> BeamformingSolution:
    """Full heuristic: directions, power LP, beamformers w = sqrt(p) u."""
    ch, hw = problem.channels, problem.hw
    K, T = ch.num_users, ch.num_transmitters
    gt = problem.gtilde
    inter = rzf_directions(ch, hw, gt)
    p = allocate_power(inter, hw, gt, ch.sigma2)

    w = [[np.sqrt(p[k, j]) * inter.u[k][j] for j in range(T)] for k in range(K)]
    W = [[np.outer(w[k][j], w[k][j].conj()) for j in range(T)] for k in range(K)]
    p_dyn = dynamic_power(w, hw)
    p_stat = static_power(hw, ch.antennas(0), ch.antennas(1) if T > 1 else 0, T - 1)
    serving = []
    for k in range(K):
        tot = p[k].sum()
        serving.append(tuple(int(j) for j in np.nonzero(p[k] > 1e-6 * tot)[0]) if tot > 0 else ())
    solution = BeamformingSolution(W, w, p, p_dyn, p_stat, p_dyn + p_stat, serving,
                                   exchanged_scalars=dict(inter.exchanged))
    _verify_feasible(solution, problem)
    return solution
