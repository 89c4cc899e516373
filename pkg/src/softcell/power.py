"""Dynamic and static power accounting and the hardware parameter profile.

All powers are bookkept in mW (the unit of the noise variances); dBm appears
only at I/O boundaries.  Transmitter index 0 is the macro base station,
indices 1..S are the small-cell access points.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exceptions import InvalidInputError

# Default hardware constants: amplifier efficiencies 1/rho, per-antenna circuit
# power eta (mW), per-antenna emission cap q (mW), subcarrier count C.
BS_EFFICIENCY = 0.388
SCA_EFFICIENCY = 0.052
BS_CIRCUIT_MW = 189.0
SCA_CIRCUIT_MW = 5.6
BS_ANTENNA_CAP_MW = 66.0
SCA_ANTENNA_CAP_MW = 0.08
DEFAULT_SUBCARRIERS = 600


@dataclass(frozen=True)
class HardwareProfile:
    """Per-transmitter amplifier, circuit and emission-cap parameters.

    rho[j] >= 1 is the amplifier inefficiency (emitted power is multiplied by
    rho[j] in the consumption model), eta[j] the circuit power per antenna in
    mW, per_antenna_limit[j] the cap q_j in mW applying to every antenna of
    transmitter j, and subcarriers the count C that the static power is
    shared over.
    """

    rho: tuple[float, ...]
    eta: tuple[float, ...]
    per_antenna_limit: tuple[float, ...]
    subcarriers: int = DEFAULT_SUBCARRIERS

    def __post_init__(self):
        if not (len(self.rho) == len(self.eta) == len(self.per_antenna_limit)):
            raise InvalidInputError("rho, eta and per_antenna_limit must have equal length")
        if len(self.rho) < 1:
            raise InvalidInputError("profile must cover at least the base station")
        if any(r < 1.0 for r in self.rho):
            raise InvalidInputError("amplifier inefficiency rho must be >= 1")
        if any(e < 0.0 for e in self.eta):
            raise InvalidInputError("circuit power eta must be >= 0")
        if any(q < 0.0 for q in self.per_antenna_limit):
            raise InvalidInputError("per-antenna limits must be >= 0")
        if self.subcarriers < 1:
            raise InvalidInputError("subcarrier count must be >= 1")

    @property
    def num_transmitters(self) -> int:
        return len(self.rho)

    @classmethod
    def default(cls, num_sca: int, subcarriers: int = DEFAULT_SUBCARRIERS) -> "HardwareProfile":
        return cls(
            rho=(1.0 / BS_EFFICIENCY,) + (1.0 / SCA_EFFICIENCY,) * num_sca,
            eta=(BS_CIRCUIT_MW,) + (SCA_CIRCUIT_MW,) * num_sca,
            per_antenna_limit=(BS_ANTENNA_CAP_MW,) + (SCA_ANTENNA_CAP_MW,) * num_sca,
            subcarriers=subcarriers,
        )


@dataclass(frozen=True)
class ConstraintSlack:
    """Slack report for one per-antenna constraint (transmitter j, antenna l)."""

    transmitter: int
    antenna: int
    used_mw: float
    limit_mw: float
    slack_mw: float
    active: bool
    violated: bool


def _beam_lists(solution_or_beams):
    beams = getattr(solution_or_beams, "w", solution_or_beams)
    if beams is None:
        raise InvalidInputError("no beamforming vectors available")
    return beams


def dynamic_power(solution_or_beams, hw: HardwareProfile) -> float:
    """Amplifier-side consumption sum_j rho_j sum_k ||w_{k,j}||^2 in mW."""
    beams = _beam_lists(solution_or_beams)
    total = 0.0
    for per_user in beams:
        if len(per_user) > hw.num_transmitters:
            raise InvalidInputError("more beamformers than transmitters in the profile")
        for j, w in enumerate(per_user):
            if w is None or len(w) == 0:
                continue
            total += hw.rho[j] * float(np.real(np.vdot(w, w)))
    return total


def static_power(hw: HardwareProfile, n_bs: int, n_sca: int, num_sca_sites: int) -> float:
    """Circuit consumption (eta_0 N_BS + sum_j eta_j N_SCA) / C in mW."""
    if n_bs < 0 or n_sca < 0 or num_sca_sites < 0:
        raise InvalidInputError("antenna and site counts must be >= 0")
    if num_sca_sites >= len(hw.eta):
        raise InvalidInputError("hardware profile does not cover all SCA sites")
    total = hw.eta[0] * n_bs
    for j in range(1, num_sca_sites + 1):
        total += hw.eta[j] * n_sca
    return total / hw.subcarriers


def check_power_constraints(solution_or_beams, hw: HardwareProfile, tol: float = 1e-6) -> list[ConstraintSlack]:
    """Per-antenna usage vs. cap for every transmitter with any beamformer.

    A constraint is active when |slack| <= tol*q and violated when
    slack < -tol*q; with q = 0 the comparisons fall back to absolute tol.
    """
    beams = _beam_lists(solution_or_beams)
    n_tx = max((len(per_user) for per_user in beams), default=0)
    report = []
    for j in range(n_tx):
        vecs = [per_user[j] for per_user in beams
                if j < len(per_user) and per_user[j] is not None and len(per_user[j])]
        if not vecs:
            continue
        dims = {len(v) for v in vecs}
        if len(dims) != 1:
            raise InvalidInputError(f"inconsistent antenna counts on transmitter {j}")
        q = hw.per_antenna_limit[j]
        used = np.zeros(dims.pop())
        for v in vecs:
            used += np.abs(np.asarray(v)) ** 2
        for antenna, u in enumerate(used):
            slack = q - float(u)
            margin = tol * q if q > 0 else tol
            report.append(ConstraintSlack(j, antenna, float(u), q, slack,
                                          active=abs(slack) <= margin,
                                          violated=slack < -margin))
    return report


def mw_to_dbm(p_mw: float) -> float:
    if p_mw <= 0:
        raise InvalidInputError("dBm conversion requires a positive power")
    return float(10.0 * np.log10(p_mw))


def dbm_to_mw(p_dbm: float) -> float:
    return float(10.0 ** (p_dbm / 10.0))
