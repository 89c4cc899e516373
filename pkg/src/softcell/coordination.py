"""Power-minimal coordinated beamforming via the exact semidefinite relaxation.

Pipeline: build the relaxed program in the per-link matrices W_{k,j} (one PSD
block per served user and transmitter), solve it with the conic engine, repair
any block whose optimal matrix is not numerically rank-one by the trace/
interference-preserving replacement program, extract beamforming vectors and
dual certificates, and add the topology's static power.

The relaxation is exact: a rank-one optimal solution always exists, so an
infeasible relaxation certifies infeasibility of the original problem and the
repaired rank-one objective matches the relaxed optimum to solver accuracy.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import conic_solver as cs
from .conic_problem import PSD, Block, ConicProblem
from .evaluation import evaluate
from .exceptions import InfeasibleProblemError, InvalidInputError, NumericalFailureError
from .power import HardwareProfile, check_power_constraints, dynamic_power, static_power
from .scenario import ChannelSet

# A transmitter serves a user when it carries more than this share of the
# user's total emitted power (interior-point solutions are never exactly zero).
SERVING_SHARE = 1e-6

BS_ONLY = "bs_only"
SINGLE_SCA = "single_sca"
MULTIFLOW = "multiflow"
UNSERVED = "unserved"


@dataclass(frozen=True)
class CoordinationProblem:
    channels: ChannelSet
    hw: HardwareProfile
    gamma: tuple[float, ...]        # per-user QoS in bits/s/Hz

    def __post_init__(self):
        if len(self.gamma) != self.channels.num_users:
            raise InvalidInputError("need one QoS target per user")
        if self.hw.num_transmitters < self.channels.num_transmitters:
            raise InvalidInputError("hardware profile does not cover all transmitters")

    @property
    def gtilde(self) -> np.ndarray:
        """SINR targets 2^gamma - 1."""
        return np.exp2(np.asarray(self.gamma)) - 1.0

    def qos_users(self) -> list[int]:
        return [k for k, g in enumerate(self.gamma) if g > 0]

    def active_transmitters(self) -> list[int]:
        return [j for j in range(self.channels.num_transmitters) if self.channels.antennas(j) > 0]


@dataclass
class BeamformingSolution:
    W: list                         # W[k][j] Hermitian PSD (mW) or None
    w: list                         # w[k][j] complex vector (sqrt mW)
    p: np.ndarray                   # (K, T) emitted power per link, mW
    objective_dynamic: float        # mW
    objective_static: float         # mW
    objective_total: float          # mW
    serving: list                   # tuple of transmitter indices per user
    repair_needed: bool = False
    exchanged_scalars: dict | None = None   # per-SCA backhaul scalar counts
    objective_relaxation: float = float("nan")  # pre-repair relaxed optimum (dynamic, mW)


@dataclass
class DualCertificate:
    """QoS multipliers lambda_k, per-antenna multipliers mu[j][l], and the
    uplink-duality matrices A_k / B_k on the stacked per-user direction space."""

    lam: np.ndarray                 # (K,)
    mu: list                        # mu[j]: array over antennas of transmitter j
    A: list                         # A[k] block-diagonal, or None for excluded users
    B: list


@dataclass
class Relaxation:
    conic: ConicProblem
    block_of: dict                  # (k, j) -> PSD block index
    qos_row: dict                   # k -> constraint index
    power_row: dict                 # (j, l) -> constraint index


@dataclass
class UserAssignment:
    user: int
    case: str
    serving: tuple
    licensed_by: tuple = ()         # active power constraints (j, l) for multiflow


@dataclass
class AssignmentReport:
    assignments: list
    diagnostics: list = field(default_factory=list)

    def count(self, case: str) -> int:
        return sum(1 for a in self.assignments if a.case == case)


def build_relaxation(problem: CoordinationProblem) -> Relaxation:
    """Relaxed program: one PSD block per (QoS user, active transmitter).

    Objective sum_j rho_j sum_k tr W_{k,j}; QoS row of user k reads
    sum_j h_{k,j}^H [(1 + 1/gt_k) W_{k,j} - sum_i W_{i,j}] h_{k,j} >= sigma_k^2,
    whose own-block coefficient collapses to (1/gt_k) h h^H; per-antenna rows
    cap sum_k W_{k,j}[l,l].  Users with gamma = 0 carry no variables (their
    optimal blocks are zero).  Static power is not part of the program.
    """
    ch, gt = problem.channels, problem.gtilde
    users = problem.qos_users()
    txs = problem.active_transmitters()
    if any(gt[k] <= 0 for k in users):
        raise InvalidInputError("QoS row requested with nonpositive SINR target")

    blocks, block_of = [], {}
    for k in users:
        for j in txs:
            block_of[(k, j)] = len(blocks)
            blocks.append(Block(PSD, ch.antennas(j)))
    conic = ConicProblem(blocks)
    conic.set_objective({block_of[(k, j)]: problem.hw.rho[j] * np.eye(ch.antennas(j), dtype=complex)
                         for k in users for j in txs})

    # QoS rows are stated per unit of noise power (both sides divided by
    # sigma_k^2): coefficients land within a few orders of unity and the row
    # multiplier is exactly the lambda_k of the duality certificate.
    qos_row = {}
    for k in users:
        coeffs = {}
        for j in txs:
            h = ch.h[k][j]
            hh = np.outer(h, h.conj()) / float(ch.sigma2[k])
            for i in users:
                coeffs[block_of[(i, j)]] = ((1.0 / gt[k]) * hh if i == k else -hh)
        qos_row[k] = conic.add_constraint(coeffs, ">=", 1.0, name=f"qos_{k}")

    power_row = {}
    for j in txs:
        n = ch.antennas(j)
        q = problem.hw.per_antenna_limit[j]
        for l in range(n):
            Q = np.zeros((n, n), dtype=complex)
            Q[l, l] = 1.0
            power_row[(j, l)] = conic.add_constraint(
                {block_of[(k, j)]: Q for k in users}, "<=", q, name=f"cap_{j}_{l}")
    return Relaxation(conic, block_of, qos_row, power_row)


def _dominant_rank_one(W: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Dominant eigenpair as (rank-one matrix, vector with a fixed phase)."""
    vals, vecs = np.linalg.eigh(W)
    lam1 = max(vals[-1], 0.0)
    v = vecs[:, -1]
    anchor = np.argmax(np.abs(v))
    phase = v[anchor] / abs(v[anchor]) if abs(v[anchor]) > 0 else 1.0
    w = np.sqrt(lam1) * (v / phase)
    return np.outer(w, w.conj()), w


def repair_rank(W: list, problem: CoordinationProblem, tol: float = 1e-6) -> tuple[list, bool]:
    """Force every block rank-one while preserving objective and feasibility.

    Blocks carrying a negligible share of their user's power are zeroed; blocks
    with eigenvalue ratio lam2/lam1 <= tol are truncated to the dominant pair.
    Any remaining block (k, j) is replaced by the optimum of

        max  h_{k,j}^H V h_{k,j}
        s.t. tr V <= tr W,  V[l,l] <= W[l,l] per antenna,  V >= 0,
             h_{i,j}^H V h_{i,j} <= h_{i,j}^H W h_{i,j}  for all other QoS users i,

    which keeps every row of the relaxed program satisfied while not reducing
    the user's own signal; its optimum is rank-one and is truncated as such.
    """
    ch, hw, gt = problem.channels, problem.hw, problem.gtilde
    users = set(problem.qos_users())
    repaired = [list(row) if row is not None else None for row in W]
    obj_scale = 1.0 + sum(hw.rho[j] * np.real(np.trace(Wkj))
                          for row in W if row is not None
                          for j, Wkj in enumerate(row) if Wkj is not None and Wkj.size)
    needed = False
    for k, row in enumerate(repaired):
        if row is None:
            continue
        traces = [np.real(np.trace(Wkj)) if Wkj is not None and Wkj.size else 0.0 for Wkj in row]
        total = sum(traces)
        for j, Wkj in enumerate(row):
            if Wkj is None or Wkj.size == 0:
                continue
            if traces[j] <= SERVING_SHARE * total or total == 0.0:
                repaired[k][j] = np.zeros_like(Wkj)
                continue
            # Interior-point noise: a block whose cost and own QoS-row
            # contribution are both below 1e-8 of their row scales cannot be
            # load-bearing; zeroing it is within every downstream tolerance,
            # while replacing it would solve an arbitrarily ill-conditioned
            # program built from roundoff.
            if hw.rho[j] * traces[j] <= 1e-8 * obj_scale and k in users:
                h = ch.h[k][j]
                own_row = float(np.real(h.conj() @ Wkj @ h)) / (gt[k] * float(ch.sigma2[k]))
                if own_row <= 1e-8:
                    repaired[k][j] = np.zeros_like(Wkj)
                    continue
            vals = np.linalg.eigvalsh(Wkj)
            if vals[-1] <= 0:
                repaired[k][j] = np.zeros_like(Wkj)
                continue
            if len(vals) == 1 or max(vals[-2], 0.0) / vals[-1] <= tol:
                repaired[k][j], _ = _dominant_rank_one(Wkj)
                continue
            needed = True
            repaired[k][j] = _replace_block(Wkj, k, j, users, ch)
    return repaired, needed


def _replace_block(Wkj: np.ndarray, k: int, j: int, users: set, ch: ChannelSet) -> np.ndarray:
    # Stated in units of the incumbent block: V = trace(W) * X with every row
    # normalized to rhs 1 and the objective to optimum -1, so the solver sees
    # a well-scaled program regardless of how small this block's power is.
    n = Wkj.shape[0]
    tr = float(np.real(np.trace(Wkj)))
    h = ch.h[k][j]
    own = float(np.real(h.conj() @ Wkj @ h))
    prob = ConicProblem([Block(PSD, n)])
    prob.set_objective({0: -np.outer(h, h.conj()) * (tr / max(own, 1e-300))})
    prob.add_constraint({0: np.eye(n, dtype=complex)}, "<=", 1.0)
    for l in range(n):
        Q = np.zeros((n, n), dtype=complex)
        wl = float(np.real(Wkj[l, l]))
        Q[l, l] = tr / wl if wl > 0 else 1.0
        prob.add_constraint({0: Q}, "<=", 1.0 if wl > 0 else 0.0)
    for i in sorted(users - {k}):
        hi = ch.h[i][j]
        gain = float(np.real(hi.conj() @ Wkj @ hi))
        if gain > 0:
            prob.add_constraint({0: np.outer(hi, hi.conj()) * (tr / gain)}, "<=", 1.0)
        else:
            prob.add_constraint({0: np.outer(hi, hi.conj())}, "<=", 0.0)
    sol = cs.solve(prob)
    if sol.status != cs.OPTIMAL:
        raise NumericalFailureError(
            f"rank repair of block ({k}, {j}) failed with status {sol.status}",
            {"primal": sol.residual_primal, "dual": sol.residual_dual, "gap": sol.residual_gap})
    rank_one, _ = _dominant_rank_one(tr * sol.block_values[0])
    return rank_one


def solve_optimal(problem: CoordinationProblem,
                  options: cs.SolverOptions | None = None,
                  repair_tol: float = 1e-6) -> tuple[BeamformingSolution, DualCertificate]:
    """Exact minimum-power coordination with dual certificates.

    Raises InfeasibleProblemError when the relaxation (hence the original
    problem) is infeasible and NumericalFailureError when the solve or the
    repaired solution cannot be certified.
    """
    ch, hw = problem.channels, problem.hw
    K, T = ch.num_users, ch.num_transmitters
    p_static = static_power(hw, ch.antennas(0), ch.antennas(1) if T > 1 else 0, T - 1)
    users = problem.qos_users()

    if not users:
        W = [[np.zeros((ch.antennas(j),) * 2, dtype=complex) for j in range(T)] for _ in range(K)]
        w = [[np.zeros(ch.antennas(j), dtype=complex) for j in range(T)] for _ in range(K)]
        sol = BeamformingSolution(W, w, np.zeros((K, T)), 0.0, p_static, p_static,
                                  [() for _ in range(K)])
        cert = DualCertificate(np.zeros(K), [np.zeros(ch.antennas(j)) for j in range(T)],
                               [None] * K, [None] * K)
        return sol, cert

    relax = build_relaxation(problem)
    conic_sol = cs.solve(relax.conic, options)
    if conic_sol.status == cs.INFEASIBLE:
        raise InfeasibleProblemError(
            "QoS targets unattainable under the power constraints (exact relaxation infeasible)",
            certificate=conic_sol.duals)
    if conic_sol.status != cs.OPTIMAL:
        raise NumericalFailureError(
            f"relaxation solve ended with status {conic_sol.status}: {conic_sol.message}",
            {"primal": conic_sol.residual_primal, "dual": conic_sol.residual_dual,
             "gap": conic_sol.residual_gap})

    W = [[None] * T for _ in range(K)]
    for k in range(K):
        for j in range(T):
            n = ch.antennas(j)
            if (k, j) in relax.block_of:
                W[k][j] = conic_sol.block_values[relax.block_of[(k, j)]]
            else:
                W[k][j] = np.zeros((n, n), dtype=complex)

    repaired, needed = repair_rank(W, problem, tol=repair_tol)
    w = [[None] * T for _ in range(K)]
    for k in range(K):
        for j in range(T):
            if repaired[k][j] is None or repaired[k][j].size == 0:
                w[k][j] = np.zeros(ch.antennas(j), dtype=complex)
            else:
                _, w[k][j] = _dominant_rank_one(repaired[k][j])
    p = np.array([[float(np.real(np.vdot(w[k][j], w[k][j]))) for j in range(T)] for k in range(K)])

    p_dyn = dynamic_power(w, hw)
    sdp_dyn = conic_sol.primal_objective
    if abs(p_dyn - sdp_dyn) > 1e-4 * (1.0 + abs(sdp_dyn)):
        raise NumericalFailureError(
            "rank repair moved the objective beyond tolerance",
            {"repaired": p_dyn, "relaxation": sdp_dyn})
    solution = BeamformingSolution(
        repaired, w, p, p_dyn, p_static, p_dyn + p_static,
        [_serving_set(p[k]) for k in range(K)], repair_needed=needed,
        objective_relaxation=sdp_dyn)
    _verify_feasible(solution, problem)

    lam = np.zeros(K)
    for k in users:
        lam[k] = max(cs.extract_duals(conic_sol, relax.qos_row[k]), 0.0)
    mu = [np.zeros(ch.antennas(j)) for j in range(T)]
    for (j, l), row in relax.power_row.items():
        mu[j][l] = max(cs.extract_duals(conic_sol, row), 0.0)
    A = [_duality_A(problem, k) if k in set(users) else None for k in range(K)]
    B = [_duality_B(problem, k, lam, mu, A) if k in set(users) else None for k in range(K)]
    return solution, DualCertificate(lam, mu, A, B)


def _serving_set(p_row: np.ndarray) -> tuple:
    total = p_row.sum()
    if total <= 0:
        return ()
    return tuple(int(j) for j in np.nonzero(p_row > SERVING_SHARE * total)[0])


def _verify_feasible(solution: BeamformingSolution, problem: CoordinationProblem,
                     tol: float = 1e-6) -> None:
    report = evaluate(solution, problem.channels, problem.hw, problem.gamma)
    gt = problem.gtilde
    for k in problem.qos_users():
        if report.sinr[k] < gt[k] * (1.0 - tol):
            raise NumericalFailureError(
                f"repaired solution misses the SINR target of user {k}",
                {"sinr": report.sinr[k], "target": gt[k]})
    for slack in check_power_constraints(solution, problem.hw, tol=tol):
        if slack.violated:
            raise NumericalFailureError(
                f"repaired solution violates the cap of antenna {slack.antenna} "
                f"at transmitter {slack.transmitter}",
                {"used": slack.used_mw, "limit": slack.limit_mw})


def _duality_A(problem: CoordinationProblem, k: int) -> np.ndarray:
    """A_k = (1/sigma_k^2) blockdiag_j (1/rho_j) h_{k,j} h_{k,j}^H."""
    ch, hw = problem.channels, problem.hw
    txs = problem.active_transmitters()
    mats = [np.outer(ch.h[k][j], ch.h[k][j].conj()) / hw.rho[j] for j in txs]
    return _blockdiag(mats) / float(ch.sigma2[k])


def _duality_B(problem: CoordinationProblem, k: int, lam: np.ndarray, mu: list,
               A: list) -> np.ndarray:
    """B_k = sum_{i != k} lambda_i A_i + sum_{j,l} mu_{j,l} Q~_{j,l} + I."""
    ch, hw = problem.channels, problem.hw
    txs = problem.active_transmitters()
    dim = sum(ch.antennas(j) for j in txs)
    B = np.eye(dim, dtype=complex)
    for i in problem.qos_users():
        if i != k:
            B += lam[i] * A[i]
    off = 0
    for j in txs:
        n = ch.antennas(j)
        B[off:off + n, off:off + n] += np.diag(mu[j] / hw.rho[j])
        off += n
    return B


def _blockdiag(mats: list) -> np.ndarray:
    dim = sum(m.shape[0] for m in mats)
    out = np.zeros((dim, dim), dtype=complex)
    off = 0
    for m in mats:
        n = m.shape[0]
        out[off:off + n, off:off + n] = m
        off += n
    return out


@dataclass
class DualityReport:
    residual: np.ndarray            # per-user relative residual (nan if skipped)
    max_residual: float
    skipped: tuple                  # users with no QoS row or no emitted power

    def ok(self, tol: float = 1e-4) -> bool:
        return self.max_residual <= tol


def verify_duality(solution: BeamformingSolution, certificate: DualCertificate,
                   problem: CoordinationProblem, tol: float = 1e-4) -> DualityReport:
    """Check the uplink-downlink duality: for every actively served QoS user,
    lambda_k (u_k^H A_k u_k) / (u_k^H B_k u_k) must equal the SINR target,
    where u_k stacks sqrt(rho_j) w_{k,j} and is normalized."""
    if certificate is None:
        raise InvalidInputError("verify_duality requires a dual certificate")
    ch, hw = problem.channels, problem.hw
    gt = problem.gtilde
    txs = problem.active_transmitters()
    residual = np.full(ch.num_users, np.nan)
    skipped = []
    for k in range(ch.num_users):
        if problem.gamma[k] <= 0 or certificate.A[k] is None:
            skipped.append(k)
            continue
        u = np.concatenate([np.sqrt(hw.rho[j]) * solution.w[k][j] for j in txs])
        norm = np.linalg.norm(u)
        if norm <= 0:
            skipped.append(k)
            continue
        u = u / norm
        up = certificate.lam[k] * np.real(u.conj() @ certificate.A[k] @ u) \
            / np.real(u.conj() @ certificate.B[k] @ u)
        residual[k] = abs(up - gt[k]) / gt[k]
    finite = residual[np.isfinite(residual)]
    return DualityReport(residual, float(finite.max()) if finite.size else 0.0, tuple(skipped))


def classify_assignment(solution: BeamformingSolution, certificate: DualCertificate | None,
                        hw: HardwareProfile, tol: float = 1e-6) -> AssignmentReport:
    """Per-user serving case with the active power constraints licensing multiflow.

    A multiflow user without any active constraint at a serving transmitter is
    reported as a consistency diagnostic (it signals solver inaccuracy or an
    eigenvalue-multiplicity corner), never as an error.
    """
    slacks = check_power_constraints(solution, hw, tol=tol)
    active = {(s.transmitter, s.antenna) for s in slacks if s.active or s.violated}
    assignments, diagnostics = [], []
    for k, serving in enumerate(solution.serving):
        if not serving:
            assignments.append(UserAssignment(k, UNSERVED, ()))
            continue
        if len(serving) == 1:
            case = BS_ONLY if serving[0] == 0 else SINGLE_SCA
            assignments.append(UserAssignment(k, case, serving))
            continue
        licensed = tuple(sorted((j, l) for (j, l) in active if j in serving))
        assignments.append(UserAssignment(k, MULTIFLOW, serving, licensed))
        if not licensed:
            diagnostics.append(
                f"user {k} is multiflow with no active power constraint at a serving transmitter")
    return AssignmentReport(assignments, diagnostics)


def export_user_csv(solution: BeamformingSolution, report, assignments: AssignmentReport) -> str:
    """Per-link rows `user,transmitter,emitted_mw,sinr,case` (aggregate SINR per user)."""
    lines = ["user,transmitter,emitted_mw,sinr,case"]
    for a in assignments.assignments:
        sinr = float(report.sinr[a.user])
        if not a.serving:
            lines.append(f"{a.user},,0.0,{sinr!r},{a.case}")
        for j in a.serving:
            lines.append(f"{a.user},{j},{float(solution.p[a.user, j])!r},{sinr!r},{a.case}")
    return "\n".join(lines) + "\n"
