"""Random scenario generation: user drops, path loss, shadowing, fading.

Geometry lives in km with the macro base station at the origin.  Every random
quantity is drawn from a named substream of the configured seed, so the full
(config, trial) -> ChannelSet map is pure and the simulation stays
reproducible under any execution order:

    substream (trial, 0)        user drops
    substream (trial, 1)        shadowing, one draw per (user, transmitter)
    substream (trial, 2, k, j)  small-scale fading of link (k, j)

Per-link fading streams keep a link's realization unchanged when an antenna
count elsewhere in the network changes, which pairs the Monte Carlo trials
across sweep axis values.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace

import numpy as np

from .exceptions import InvalidInputError
from .power import HardwareProfile

MACRO = "macro"
SCA_NEAR = "sca_near"

# Table geometry/propagation constants: the near-SCA loss rule applies below
# this distance regardless of which SCA the user was dropped around.
NEAR_SCA_KM = 0.04
MIN_DISTANCE_KM = 1e-3
_REJECTION_LIMIT = 10 ** 6

_STREAM_DROPS = 0
_STREAM_SHADOWING = 1
_STREAM_FADING = 2


@dataclass(frozen=True)
class ScenarioConfig:
    cell_radius: float                      # km
    num_users_uniform: int
    sca_positions: tuple[tuple[float, float], ...]
    users_per_sca: int
    n_bs: int
    n_sca: int
    qos_targets: tuple[float, ...]          # bits/s/Hz per user
    seed: int
    sca_user_radius: float = 0.04           # km
    carrier_freq: float = 2.0               # GHz, documentation only
    num_subcarriers: int = 600
    shadowing_stddev: float = 7.0           # dB
    noise_variance_dbm: float = -127.0
    hardware: HardwareProfile | None = None

    def __post_init__(self):
        if self.cell_radius <= 0:
            raise InvalidInputError("cell_radius must be > 0")
        if self.num_users_uniform < 0 or self.users_per_sca < 0:
            raise InvalidInputError("user counts must be >= 0")
        for pos in self.sca_positions:
            if np.hypot(pos[0], pos[1]) >= self.cell_radius:
                raise InvalidInputError(f"SCA at {pos} is not strictly inside the cell disc")
        if self.n_bs < 1:
            raise InvalidInputError("n_bs must be >= 1")
        if self.n_sca < 0:
            raise InvalidInputError("n_sca must be >= 0")
        if self.sca_user_radius <= 0:
            raise InvalidInputError("sca_user_radius must be > 0")
        if len(self.qos_targets) != self.num_users:
            raise InvalidInputError(
                f"qos_targets has {len(self.qos_targets)} entries for {self.num_users} users")
        if any(g < 0 for g in self.qos_targets):
            raise InvalidInputError("QoS targets must be >= 0")
        if not 0 <= self.seed < 2 ** 64:
            raise InvalidInputError("seed must fit in 64 bits")
        hw = self.hardware
        if hw is None:
            hw = HardwareProfile.default(self.num_sca, subcarriers=self.num_subcarriers)
            object.__setattr__(self, "hardware", hw)
        if hw.num_transmitters < self.num_sca + 1:
            raise InvalidInputError("hardware profile does not cover all transmitters")

    @property
    def num_sca(self) -> int:
        return len(self.sca_positions)

    @property
    def num_users(self) -> int:
        return self.num_users_uniform + self.users_per_sca * self.num_sca

    def antennas(self, j: int) -> int:
        return self.n_bs if j == 0 else self.n_sca

    @property
    def noise_variance_mw(self) -> float:
        return 10.0 ** (self.noise_variance_dbm / 10.0)


@dataclass
class ChannelSet:
    """One realization: channel vectors, their covariances, noise and geometry."""

    h: list            # h[k][j], complex vector of length antennas(j)
    R: list            # R[k][j], Hermitian PSD covariance of h[k][j]
    sigma2: np.ndarray  # per-user noise power, mW
    user_positions: np.ndarray  # (K, 2) km

    @property
    def num_users(self) -> int:
        return len(self.h)

    @property
    def num_transmitters(self) -> int:
        return len(self.h[0]) if self.h else 0

    def antennas(self, j: int) -> int:
        return len(self.h[0][j]) if self.h else 0


def stream(seed: int, *key: int) -> np.random.Generator:
    """Named, splittable substream of the root seed."""
    return np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=tuple(key)))


def drop_users(config: ScenarioConfig, rng: np.random.Generator) -> np.ndarray:
    """Sample user positions: uniform-in-disc users first, then per-SCA groups."""
    points = [_disc_points(rng, config.num_users_uniform, (0.0, 0.0), config.cell_radius)]
    for pos in config.sca_positions:
        points.append(_disc_points(rng, config.users_per_sca, pos, config.sca_user_radius))
    return np.vstack(points) if points else np.zeros((0, 2))


def _disc_points(rng: np.random.Generator, count: int, center, radius: float) -> np.ndarray:
    """Rejection sampling from the bounding square of the disc."""
    out = np.empty((count, 2))
    filled = 0
    for _ in range(_REJECTION_LIMIT):
        if filled == count:
            break
        cand = rng.uniform(-radius, radius, size=2)
        if cand[0] ** 2 + cand[1] ** 2 <= radius ** 2:
            out[filled] = cand + np.asarray(center)
            filled += 1
    else:
        raise RuntimeError("rejection sampler failed to terminate")
    return out


def path_loss_db(distance_km: float, link_kind: str) -> float:
    """Distance-dependent path and penetration loss in dB."""
    if not distance_km > 0:
        raise InvalidInputError("distance must be > 0")
    d = max(distance_km, MIN_DISTANCE_KM)
    if link_kind == MACRO:
        return 148.1 + 37.6 * np.log10(d)
    if link_kind == SCA_NEAR:
        return 127.0 + 30.0 * np.log10(d)
    raise InvalidInputError(f"unknown link kind {link_kind!r}")


def _steering_grid(n: int, azimuth: float) -> np.ndarray:
    """Half-wavelength ULA steering vectors on a grid of 2n angles within +-10 deg."""
    spread = np.deg2rad(10.0)
    angles = azimuth + np.linspace(-spread, spread, 2 * n)
    return np.exp(1j * np.pi * np.outer(np.arange(n), np.sin(angles)))


def build_correlation(config: ScenarioConfig, positions: np.ndarray,
                      shadowing_db: np.ndarray) -> list:
    """Covariance R[k][j] = gain * (angular model for the BS, identity for SCAs).

    The linear gain inverts (path loss - shadowing) dB; traces are normalized
    to antennas(j) * gain.  The near-SCA loss formula applies to any
    (user, SCA) pair within NEAR_SCA_KM of each other.
    """
    K = len(positions)
    if shadowing_db.shape != (K, config.num_sca + 1):
        raise InvalidInputError("need one shadowing draw per (user, transmitter) link")
    sites = [(0.0, 0.0)] + list(config.sca_positions)
    R = []
    for k in range(K):
        row = []
        for j, site in enumerate(sites):
            n = config.antennas(j)
            if n == 0:
                row.append(np.zeros((0, 0), dtype=complex))
                continue
            delta = positions[k] - np.asarray(site)
            dist = float(np.hypot(delta[0], delta[1]))
            if dist <= 0:
                dist = MIN_DISTANCE_KM
            kind = SCA_NEAR if (j > 0 and dist <= NEAR_SCA_KM) else MACRO
            gain = 10.0 ** (-(path_loss_db(dist, kind) - shadowing_db[k, j]) / 10.0)
            if j == 0:
                steer = _steering_grid(n, float(np.arctan2(delta[1], delta[0])))
                raw = steer @ steer.conj().T / steer.shape[1]
                raw = 0.5 * (raw + raw.conj().T)
                row.append(raw * (n * gain / np.real(np.trace(raw))))
            else:
                row.append(gain * np.eye(n, dtype=complex))
        R.append(row)
    return R


def draw_channels(config: ScenarioConfig, R: list, positions: np.ndarray,
                  fading_rng) -> ChannelSet:
    """h[k][j] = R^{1/2} z with z standard circular complex Gaussian.

    fading_rng(k, j) must return the generator for link (k, j); the matrix
    square root is the eigendecomposition one with negative eigenvalues
    clamped to zero.
    """
    K = len(R)
    h = []
    for k in range(K):
        row = []
        for j, Rkj in enumerate(R[k]):
            n = Rkj.shape[0]
            if n == 0:
                row.append(np.zeros(0, dtype=complex))
                continue
            rng = fading_rng(k, j)
            zr = rng.normal(size=(2, n))
            z = (zr[0] + 1j * zr[1]) / np.sqrt(2.0)
            w, V = np.linalg.eigh(Rkj)
            root = (V * np.sqrt(np.maximum(w, 0.0))) @ V.conj().T
            row.append(root @ z)
        h.append(row)
    sigma2 = np.full(K, config.noise_variance_mw)
    return ChannelSet(h=h, R=R, sigma2=sigma2, user_positions=np.asarray(positions))


def realize_scenario(config: ScenarioConfig, trial: int = 0) -> ChannelSet:
    """Full deterministic (config, trial) -> ChannelSet realization."""
    positions = drop_users(config, stream(config.seed, trial, _STREAM_DROPS))
    shadowing = config.shadowing_stddev * stream(config.seed, trial, _STREAM_SHADOWING).normal(
        size=(config.num_users, config.num_sca + 1))
    R = build_correlation(config, positions, shadowing)
    return draw_channels(
        config, R, positions,
        lambda k, j: stream(config.seed, trial, _STREAM_FADING, k, j))


def load_config(path: str, overrides: dict | None = None) -> ScenarioConfig:
    """Read a ScenarioConfig from a JSON file keyed exactly by the field names.

    `hardware`, when present, is a nested object with HardwareProfile field
    names.  A scalar `qos_targets` is broadcast to all users.
    """
    with open(path) as fh:
        data = json.load(fh)
    if overrides:
        data.update(overrides)
    return config_from_dict(data)


def config_from_dict(data: dict) -> ScenarioConfig:
    data = dict(data)
    hw = data.get("hardware")
    if isinstance(hw, dict):
        data["hardware"] = HardwareProfile(
            rho=tuple(hw["rho"]), eta=tuple(hw["eta"]),
            per_antenna_limit=tuple(hw["per_antenna_limit"]),
            subcarriers=int(hw.get("subcarriers", data.get("num_subcarriers", 600))),
        )
    data["sca_positions"] = tuple((float(p[0]), float(p[1])) for p in data.get("sca_positions", ()))
    qos = data.get("qos_targets", 2.0)
    if np.isscalar(qos):
        n_users = int(data["num_users_uniform"]) + int(data.get("users_per_sca", 0)) * len(data["sca_positions"])
        qos = (float(qos),) * n_users
    else:
        qos = tuple(float(g) for g in qos)
    data["qos_targets"] = qos
    known = {f for f in ScenarioConfig.__dataclass_fields__}
    unknown = set(data) - known
    if unknown:
        raise InvalidInputError(f"unknown config keys: {sorted(unknown)}")
    return ScenarioConfig(**data)


def with_axis_value(config: ScenarioConfig, axis: str, value) -> ScenarioConfig:
    """Copy of the config with one sweep axis replaced."""
    if axis == "n_bs":
        return replace(config, n_bs=int(value))
    if axis == "n_sca":
        return replace(config, n_sca=int(value))
    if axis == "qos":
        return replace(config, qos_targets=(float(value),) * config.num_users)
    raise InvalidInputError(f"unknown sweep axis {axis!r}")
