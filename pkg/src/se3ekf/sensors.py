"""Truth trajectories and synthetic gyro / vector-observation measurements.

Gyro model: ``ω̃ = ω + β + η_v`` with ``β̇ = η_u``.  Continuous noise
densities are discretized at the gyro step as variances ``σ_v²/dt`` (rate
noise) and ``σ_u²·dt`` (bias random-walk increment).

Vector observations: ``b_i = A(q) r_i + v_i`` with ``v_i ~ N(0, σ_i² I₃)``.
Noisy body vectors are *not* renormalized.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass, field

import numpy as np

from .lie import quat_normalize, quat_propagate, quat_to_attitude


class ConfigError(ValueError):
    """Raised for invalid simulation or campaign configuration."""


@dataclass(frozen=True)
class NoiseParams:
    sigma_v: float = 1e-4  # rad/s/√Hz
    sigma_u: float = 1e-6  # rad/s²/√Hz
    sigma_obs: float | tuple[float, ...] = 1e-3  # rad, scalar or one per sensor

    def validate(self) -> None:
        obs = np.atleast_1d(self.sigma_obs)
        for name, value in (("sigma_v", self.sigma_v), ("sigma_u", self.sigma_u)):
            if not np.isfinite(value) or value < 0:
                raise ConfigError(f"{name} must be finite and >= 0, got {value}")
        if not np.all(np.isfinite(obs)) or np.any(obs < 0):
            raise ConfigError(f"sigma_obs must be finite and >= 0, got {self.sigma_obs}")

    def obs_sigmas(self, n: int) -> np.ndarray:
        s = np.atleast_1d(np.asarray(self.sigma_obs, dtype=float))
        if s.size == 1:
            return np.full(n, float(s[0]))
        if s.size != n:
            raise ConfigError(f"sigma_obs has {s.size} entries for {n} reference vectors")
        return s

    def process_noise(self) -> np.ndarray:
        """Continuous spectral density of ``w = [η_v; η_u]``."""
        return np.diag([self.sigma_v**2] * 3 + [self.sigma_u**2] * 3)


@dataclass(frozen=True)
class MotionProfile:
    """Body angular-rate profile ``ω(t)``.

    ``constant``: ``ω = rate``.
    ``sinusoidal``: ``ω_i = rate_i + amplitude_i sin(2π frequency_i t + phase_i)``.
    """

    kind: str = "constant"
    rate: tuple[float, float, float] = (0.0, 0.0, 0.0)
    amplitude: tuple[float, float, float] = (0.0, 0.0, 0.0)
    frequency: tuple[float, float, float] = (0.0, 0.0, 0.0)
    phase: tuple[float, float, float] = (0.0, 0.0, 0.0)

    def validate(self) -> None:
        if self.kind not in ("constant", "sinusoidal"):
            raise ConfigError(f"unknown motion profile {self.kind!r}")
        for name in ("rate", "amplitude", "frequency", "phase"):
            v = np.asarray(getattr(self, name), dtype=float)
            if v.shape != (3,) or not np.all(np.isfinite(v)):
                raise ConfigError(f"motion.{name} must be 3 finite numbers")

    def omega(self, t: np.ndarray | float) -> np.ndarray:
        t = np.asarray(t, dtype=float)[..., None]
        base = np.broadcast_to(np.asarray(self.rate, dtype=float), t.shape[:-1] + (3,))
        if self.kind == "constant":
            return base.copy()
        arg = 2.0 * np.pi * np.asarray(self.frequency) * t + np.asarray(self.phase)
        return base + np.asarray(self.amplitude) * np.sin(arg)


@dataclass(frozen=True)
class SimConfig:
    duration: float = 600.0
    gyro_rate: float = 10.0
    obs_rate: float = 1.0
    motion: MotionProfile = field(default_factory=MotionProfile)
    initial_attitude: tuple[float, float, float, float] = (0.0, 0.0, 0.0, 1.0)
    initial_bias: tuple[float, float, float] = (0.0, 0.0, 0.0)
    noise: NoiseParams = field(default_factory=NoiseParams)
    ref_vectors: tuple[tuple[float, float, float], ...] = ((1.0, 0.0, 0.0), (0.0, 1.0, 0.0))
    seed: int = 0

    @property
    def dt(self) -> float:
        return 1.0 / self.gyro_rate

    @property
    def n_steps(self) -> int:
        return int(round(self.duration * self.gyro_rate))

    @property
    def obs_every(self) -> int:
        """Number of gyro steps between observations."""
        return int(round(self.gyro_rate / self.obs_rate))

    def refs(self) -> np.ndarray:
        return np.asarray(self.ref_vectors, dtype=float).reshape(-1, 3)

    def validate(self) -> None:
        for name in ("duration", "gyro_rate", "obs_rate"):
            value = getattr(self, name)
            if not np.isfinite(value) or value <= 0:
                raise ConfigError(f"{name} must be > 0, got {value}")
        if self.obs_rate > self.gyro_rate:
            raise ConfigError(
                f"obs_rate ({self.obs_rate}) must not exceed gyro_rate ({self.gyro_rate})"
            )
        ratio = self.gyro_rate / self.obs_rate
        if abs(ratio - round(ratio)) > 1e-9:
            raise ConfigError(f"gyro_rate/obs_rate must be an integer, got {ratio}")
        steps = self.duration * self.gyro_rate
        if abs(steps - round(steps)) > 1e-6 or round(steps) < 1:
            raise ConfigError("duration must be a positive whole number of gyro steps")
        q0 = np.asarray(self.initial_attitude, dtype=float)
        if q0.shape != (4,) or abs(np.linalg.norm(q0) - 1.0) > 1e-9:
            raise ConfigError("initial_attitude must be a unit quaternion [q1, q2, q3, q4]")
        if np.asarray(self.initial_bias, dtype=float).shape != (3,):
            raise ConfigError("initial_bias must have 3 components")
        refs = self.refs()
        if refs.shape[0] < 1:
            raise ConfigError("at least one reference vector is required")
        if np.any(np.abs(np.linalg.norm(refs, axis=1) - 1.0) > 1e-9):
            raise ConfigError("reference vectors must be unit norm")
        self.motion.validate()
        self.noise.validate()
        self.noise.obs_sigmas(refs.shape[0])
        if not isinstance(self.seed, (int, np.integer)) or self.seed < 0:
            raise ConfigError(f"seed must be a non-negative integer, got {self.seed}")


@dataclass(frozen=True)
class TruthRecord:
    t: float
    q_true: np.ndarray
    beta_true: np.ndarray
    omega_true: np.ndarray


@dataclass(frozen=True)
class TruthTrajectory:
    """Truth sampled at the gyro rate; row ``k`` is time ``t[k]``."""

    t: np.ndarray  # (K+1,)
    q: np.ndarray  # (K+1, 4)
    beta: np.ndarray  # (K+1, 3)
    omega: np.ndarray  # (K+1, 3)

    def __len__(self) -> int:
        return len(self.t)

    def __getitem__(self, k: int) -> TruthRecord:
        return TruthRecord(self.t[k], self.q[k], self.beta[k], self.omega[k])


@dataclass(frozen=True)
class GyroSample:
    t: float
    omega_meas: np.ndarray


@dataclass(frozen=True)
class VectorObsSet:
    """One epoch of ``n`` vector observations.

    ``body_vectors`` may carry leading batch axes, ``(..., n, 3)``.
    """

    t: float
    body_vectors: np.ndarray
    ref_vectors: np.ndarray
    sigma: np.ndarray

    def __post_init__(self):
        refs = np.asarray(self.ref_vectors, dtype=float)
        if refs.ndim != 2 or refs.shape[0] < 1 or refs.shape[1] != 3:
            raise ValueError("ref_vectors must have shape (n, 3) with n >= 1")
        if np.asarray(self.body_vectors).shape[-2:] != refs.shape:
            raise ValueError("body_vectors and ref_vectors disagree in shape")
        if np.asarray(self.sigma).shape != (refs.shape[0],):
            raise ValueError("one sigma per sensor is required")

    @property
    def n(self) -> int:
        return len(self.ref_vectors)


@dataclass(frozen=True)
class MeasurementStream:
    """Gyro samples at every step and observation epochs for one trial."""

    gyro_t: np.ndarray  # (K,)
    gyro: np.ndarray  # (K, 3); sample k drives the step t[k] -> t[k+1]
    obs_index: np.ndarray  # (M,) indices into the truth time grid
    obs_t: np.ndarray  # (M,)
    body_vectors: np.ndarray  # (M, n, 3)
    ref_vectors: np.ndarray  # (n, 3)
    sigma: np.ndarray  # (n,)

    def observation(self, j: int) -> VectorObsSet:
        return VectorObsSet(self.obs_t[j], self.body_vectors[j], self.ref_vectors, self.sigma)


def trial_rngs(seed: int, trial: int) -> dict[str, np.random.Generator]:
    """Independent generators for one trial, derived from ``(seed, trial)``."""
    children = np.random.SeedSequence([int(seed), int(trial)]).spawn(4)
    names = ("truth", "gyro", "obs", "init")
    return {name: np.random.default_rng(ss) for name, ss in zip(names, children)}


@functools.lru_cache(maxsize=8)
def attitude_track(cfg: SimConfig) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Deterministic ``(t, q, omega)`` on the gyro grid; arrays are read-only.

    The rate profile is held constant over each gyro step, so the closed-form
    quaternion step is exact.
    """
    K, dt = cfg.n_steps, cfg.dt
    t = np.arange(K + 1) / cfg.gyro_rate
    omega = cfg.motion.omega(t)
    q = np.empty((K + 1, 4))
    q[0] = quat_normalize(np.asarray(cfg.initial_attitude, dtype=float))
    for k in range(K):
        q[k + 1] = quat_propagate(q[k], omega[k], dt)
    for a in (t, q, omega):
        a.flags.writeable = False
    return t, q, omega


def simulate_truth(cfg: SimConfig, rng: np.random.Generator | None = None) -> TruthTrajectory:
    """Truth attitude plus the bias random walk ``β_{k+1} = β_k + σ_u √dt n_k``.

    With ``sigma_u == 0`` the bias stays constant and ``rng`` is not consumed.
    """
    cfg.validate()
    if rng is None:
        rng = trial_rngs(cfg.seed, 0)["truth"]
    t, q, omega = attitude_track(cfg)
    K, dt = cfg.n_steps, cfg.dt
    beta = np.empty((K + 1, 3))
    beta[0] = cfg.initial_bias
    if cfg.noise.sigma_u > 0:
        steps = cfg.noise.sigma_u * np.sqrt(dt) * rng.standard_normal((K, 3))
        beta[1:] = beta[0] + np.cumsum(steps, axis=0)
    else:
        beta[1:] = beta[0]
    return TruthTrajectory(t=t.copy(), q=q.copy(), beta=beta, omega=omega.copy())


def gyro_measure(
    omega_true: np.ndarray,
    beta_true: np.ndarray,
    noise: NoiseParams,
    rng: np.random.Generator,
    dt: float,
) -> np.ndarray:
    """``ω̃ = ω + β + η_v`` with ``η_v ~ N(0, σ_v²/dt I)``; broadcasts over rows."""
    omega_true = np.asarray(omega_true, dtype=float)
    clean = omega_true + np.asarray(beta_true, dtype=float)
    if noise.sigma_v == 0:
        return clean
    return clean + noise.sigma_v / np.sqrt(dt) * rng.standard_normal(clean.shape)


def observe_vectors(
    q_true: np.ndarray,
    refs: np.ndarray,
    sigma_obs: np.ndarray | float,
    rng: np.random.Generator,
) -> np.ndarray:
    """Body-frame vectors ``A(q) r_i + v_i``; returns ``(..., n, 3)``."""
    refs = np.asarray(refs, dtype=float)
    sigma = np.broadcast_to(np.asarray(sigma_obs, dtype=float), (refs.shape[0],))
    A = quat_to_attitude(q_true)
    clean = np.einsum("...ij,nj->...ni", A, refs)
    if np.all(sigma == 0):
        return clean
    return clean + sigma[:, None] * rng.standard_normal(clean.shape)


def simulate_measurements(
    cfg: SimConfig,
    truth: TruthTrajectory,
    gyro_rng: np.random.Generator,
    obs_rng: np.random.Generator,
) -> MeasurementStream:
    """Gyro samples at every step, observations every ``obs_every`` steps from t=0."""
    K = cfg.n_steps
    gyro = gyro_measure(truth.omega[:K], truth.beta[:K], cfg.noise, gyro_rng, cfg.dt)
    idx = np.arange(0, K + 1, cfg.obs_every)
    refs = cfg.refs()
    sigma = cfg.noise.obs_sigmas(len(refs))
    body = observe_vectors(truth.q[idx], refs, sigma, obs_rng)
    return MeasurementStream(
        gyro_t=truth.t[:K].copy(),
        gyro=gyro,
        obs_index=idx,
        obs_t=truth.t[idx].copy(),
        body_vectors=body,
        ref_vectors=refs,
        sigma=sigma,
    )


def simulate_trial(cfg: SimConfig, trial: int) -> tuple[TruthTrajectory, MeasurementStream]:
    """Truth plus measurements for trial ``trial`` of ``cfg.seed``."""
    rngs = trial_rngs(cfg.seed, trial)
    truth = simulate_truth(cfg, rngs["truth"])
    return truth, simulate_measurements(cfg, truth, rngs["gyro"], rngs["obs"])
