"""Monte Carlo campaigns: paired trials, error metrics and result files.

All trials of one variant run together as a batch (leading array axis).
Every variant in a campaign replays the same truth and measurement streams,
trial by trial, so comparisons are paired.

Output files (column order is stable):

``truth_<trial>.csv``
    ``t, q1, q2, q3, q4, beta_x, beta_y, beta_z, omega_x, omega_y, omega_z``
``gyro_<trial>.csv``
    ``t, omega_meas_x, omega_meas_y, omega_meas_z``
``obs_<trial>.csv``
    ``t, b0_x, b0_y, b0_z, b1_x, ...`` (one triple per reference vector)
``metrics_<variant>_<trial>.csv``
    see :data:`METRICS_COLUMNS`; one row per observation epoch, after the update
``aggregate_<variant>.csv``
    see :data:`AGGREGATE_COLUMNS`
``summary.json``
    per-variant steady-state RMSE, mean NEES and divergence counts
"""

from __future__ import annotations

import dataclasses
import json
import os
import tempfile
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import filters
from .filters import FilterState, Variant
from .lie import quat_conjugate, quat_from_rotvec, quat_multiply
from .sensors import (
    ConfigError,
    MeasurementStream,
    MotionProfile,
    NoiseParams,
    SimConfig,
    TruthTrajectory,
    VectorObsSet,
    simulate_trial,
    trial_rngs,
)

TRUTH_COLUMNS = (
    "t", "q1", "q2", "q3", "q4", "beta_x", "beta_y", "beta_z",
    "omega_x", "omega_y", "omega_z",
)  # fmt: skip
GYRO_COLUMNS = ("t", "omega_meas_x", "omega_meas_y", "omega_meas_z")
METRICS_COLUMNS = (
    "t", "attitude_error_deg",
    "att_err_x_deg", "att_err_y_deg", "att_err_z_deg",
    "bias_err_x", "bias_err_y", "bias_err_z",
    "nees",
    "sigma3_att_x_deg", "sigma3_att_y_deg", "sigma3_att_z_deg",
    "sigma3_bias_x", "sigma3_bias_y", "sigma3_bias_z",
    "p_asymmetry", "p_min_eig", "q_norm_dev",
)  # fmt: skip
AGGREGATE_COLUMNS = (
    "t", "attitude_rmse_deg", "sigma3_attitude_deg",
    "bias_rmse_x", "bias_rmse_y", "bias_rmse_z",
    "sigma3_bias_x", "sigma3_bias_y", "sigma3_bias_z",
    "mean_nees", "n_trials",
)  # fmt: skip

FLOAT_FMT = "%.17g"


# ---------------------------------------------------------------------------
# configuration


@dataclass(frozen=True)
class InitConfig:
    """Initial estimate: ``q̂₀ = exp-perturbed q_true₀``, ``β̂₀`` per ``bias_mode``.

    ``bias_mode="zero"`` starts from ``β̂₀ = 0``; ``"sampled"`` draws
    ``β̂₀ = β₀ + N(0, bias_sigma² I)`` so the initial bias error matches ``P₀``.
    ``perturb=False`` starts exactly at the truth (``P₀`` is unchanged).
    """

    attitude_sigma_deg: float = 5.0
    bias_sigma: float = float(np.deg2rad(0.2))  # rad/s
    bias_mode: str = "zero"
    perturb: bool = True

    def validate(self) -> None:
        if not self.attitude_sigma_deg > 0 or not self.bias_sigma > 0:
            raise ConfigError("init sigmas must be > 0")
        if self.bias_mode not in ("zero", "sampled"):
            raise ConfigError(f"init.bias_mode must be 'zero' or 'sampled', got {self.bias_mode!r}")
        if not isinstance(self.perturb, bool):
            raise ConfigError("init.perturb must be true or false")


@dataclass(frozen=True)
class CampaignConfig:
    sim: SimConfig = field(default_factory=SimConfig)
    variants: tuple[str, ...] = tuple(v.value for v in Variant)
    trials: int = 50
    output: str = "campaign_out"
    injection_mode: str = "first_order"
    init: InitConfig = field(default_factory=InitConfig)
    discretization: str = "euler"
    convergence_time: float = 60.0
    covariance_reset: str = "none"  # no other mode is implemented
    filter_noise: NoiseParams | None = None  # filter tuning; defaults to sim.noise

    @property
    def assumed_noise(self) -> NoiseParams:
        return self.sim.noise if self.filter_noise is None else self.filter_noise

    def validate(self) -> None:
        self.sim.validate()
        self.init.validate()
        if not isinstance(self.trials, (int, np.integer)) or self.trials < 1:
            raise ConfigError(f"trials must be an integer >= 1, got {self.trials}")
        if not self.variants:
            raise ConfigError("at least one variant is required")
        try:
            for v in self.variants:
                Variant.parse(v)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        if self.injection_mode not in ("first_order", "exact"):
            raise ConfigError("injection_mode must be 'first_order' or 'exact'")
        if self.discretization not in ("euler", "van_loan"):
            raise ConfigError("discretization must be 'euler' or 'van_loan'")
        if self.filter_noise is not None:
            self.filter_noise.validate()
            self.filter_noise.obs_sigmas(len(self.sim.refs()))
        if self.covariance_reset != "none":
            raise ConfigError("covariance_reset supports only 'none'")
        if not 0 <= self.convergence_time < self.sim.duration:
            raise ConfigError("convergence_time must lie in [0, duration)")

    def variant_list(self) -> list[Variant]:
        return [Variant.parse(v) for v in self.variants]


def default_campaign_config(**overrides) -> CampaignConfig:
    """Desk-scale scenario: 600 s, 10 Hz gyro, 1 Hz two-vector star tracker."""
    d2r = np.pi / 180.0
    sim = SimConfig(
        duration=600.0,
        gyro_rate=10.0,
        obs_rate=1.0,
        motion=MotionProfile(
            kind="sinusoidal",
            rate=(0.0, 0.0, 0.06 * d2r),
            amplitude=(1.0 * d2r, 0.5 * d2r, 0.8 * d2r),
            frequency=(0.01, 0.015, 0.007),
            phase=(0.0, 1.0, 2.0),
        ),
        initial_attitude=(0.0, 0.0, 0.0, 1.0),
        initial_bias=(0.1 * d2r, -0.05 * d2r, 0.08 * d2r),
        noise=NoiseParams(sigma_v=1e-4, sigma_u=1e-6, sigma_obs=1e-3),
        ref_vectors=((1.0, 0.0, 0.0), (0.0, 1.0, 0.0)),
        seed=0,
    )
    cfg = CampaignConfig(sim=sim)
    return dataclasses.replace(cfg, **overrides) if overrides else cfg


def _tuplify(x):
    if isinstance(x, list):
        return tuple(_tuplify(v) for v in x)
    return x


def _build(cls, data, where: str):
    if not isinstance(data, dict):
        raise ConfigError(f"{where or 'config'} must be a JSON object")
    names = {f.name for f in dataclasses.fields(cls)}
    unknown = sorted(set(data) - names)
    if unknown:
        raise ConfigError(f"unknown key(s) in {where or 'config'}: {', '.join(unknown)}")
    nested = {
        "sim": SimConfig, "init": InitConfig, "motion": MotionProfile,
        "noise": NoiseParams, "filter_noise": NoiseParams,
    }  # fmt: skip
    kwargs = {}
    for key, value in data.items():
        if key in nested and value is not None and cls in (CampaignConfig, SimConfig):
            kwargs[key] = _build(nested[key], value, f"{where}.{key}".lstrip("."))
        else:
            kwargs[key] = _tuplify(value)
    try:
        return cls(**kwargs)
    except TypeError as exc:
        raise ConfigError(str(exc)) from None


def config_from_dict(data: dict) -> CampaignConfig:
    """Build and validate a :class:`CampaignConfig`; unknown keys are rejected.

    Omitted keys fall back to :func:`default_campaign_config`.
    """
    base = config_to_dict(default_campaign_config())
    merged = _merge(base, data)
    cfg = _build(CampaignConfig, merged, "")
    cfg.validate()
    return cfg


def _merge(base: dict, data: dict) -> dict:
    if not isinstance(data, dict):
        raise ConfigError("config must be a JSON object")
    out = dict(base)
    for key, value in data.items():
        if key not in base:
            out[key] = value  # rejected later with a precise message
        elif isinstance(base[key], dict) and isinstance(value, dict):
            out[key] = _merge(base[key], value)
        else:
            out[key] = value
    return out


def config_to_dict(cfg: CampaignConfig) -> dict:
    def conv(x):
        if isinstance(x, tuple):
            return [conv(v) for v in x]
        if isinstance(x, np.generic):
            return x.item()
        return x

    def walk(obj):
        return {f.name: (walk(getattr(obj, f.name)) if dataclasses.is_dataclass(getattr(obj, f.name))
                         else conv(getattr(obj, f.name))) for f in dataclasses.fields(obj)}

    return walk(cfg)


def load_config(path: str | os.PathLike) -> CampaignConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON in {path}: {exc}") from None
    return config_from_dict(data)


# ---------------------------------------------------------------------------
# metrics


def attitude_error_angle(q_true: np.ndarray, q_hat: np.ndarray) -> np.ndarray:
    """Principal angle of ``A(q) A(q̂)⁻¹`` in degrees, within ``[0, 180]``."""
    dq = quat_multiply(q_true, quat_conjugate(q_hat))
    s = np.linalg.norm(dq[..., :3], axis=-1)
    return np.degrees(2.0 * np.arctan2(s, np.abs(dq[..., 3])))


def nees(true_error, P: np.ndarray) -> np.ndarray:
    """Normalized estimation error squared ``dxᵀ P⁻¹ dx``.

    Raises
    ------
    numpy.linalg.LinAlgError
        If ``P`` is singular.
    """
    dx = true_error.vector if isinstance(true_error, filters.ErrorState) else np.asarray(true_error, dtype=float)
    P = np.asarray(P, dtype=float)
    if np.any(np.linalg.cond(P) > 1e15):
        raise np.linalg.LinAlgError("covariance is singular")
    sol = np.linalg.solve(P, dx[..., None])[..., 0]
    return np.sum(dx * sol, axis=-1)


def trial_rmse(errors: np.ndarray) -> np.ndarray:
    """Per-trial RMS over time; ``errors`` is ``(trials, steps)``."""
    return np.sqrt(np.mean(np.square(errors), axis=-1))


def campaign_rmse(trial_rmses: np.ndarray) -> float:
    """RMS across trials of per-trial RMSE values."""
    return float(np.sqrt(np.mean(np.square(trial_rmses))))


def stepwise_rmse(errors: np.ndarray) -> np.ndarray:
    """RMS across trials at each step; ``errors`` is ``(trials, steps, ...)``."""
    return np.sqrt(np.mean(np.square(errors), axis=0))


def chi2_interval(dof: int, n_trials: int, level: float = 0.95) -> tuple[float, float]:
    """Two-sided bounds for the trial-averaged NEES of a consistent filter."""
    from scipy.stats import chi2

    a = (1.0 - level) / 2.0
    n = dof * n_trials
    return chi2.ppf(a, n) / n_trials, chi2.ppf(1.0 - a, n) / n_trials


# ---------------------------------------------------------------------------
# simulation bundle


def initial_state(cfg: CampaignConfig, truth: TruthTrajectory, trial: int, variant: Variant) -> FilterState:
    """Perturbed initial estimate and matching covariance in the variant's coordinates.

    The perturbation draws come from the trial's ``init`` stream, so all
    variants start from the same ``(q̂₀, β̂₀)``.
    """
    rng = trial_rngs(cfg.sim.seed, trial)["init"]
    sig_a = np.deg2rad(cfg.init.attitude_sigma_deg)
    sig_b = cfg.init.bias_sigma
    err = sig_a * rng.standard_normal(3)
    bias_err = sig_b * rng.standard_normal(3)
    # A(q̂₀) = exp(err×) A(q₀), i.e. δα_body = err
    if not cfg.init.perturb:
        err, bias_err = np.zeros(3), np.zeros(3)
    q_hat = quat_multiply(quat_from_rotvec(-err), truth.q[0])
    if cfg.init.bias_mode == "sampled" or not cfg.init.perturb:
        beta_hat = truth.beta[0] + bias_err
    else:
        beta_hat = np.zeros(3)
    P_common = np.diag([sig_a**2] * 3 + [sig_b**2] * 3)
    T = filters.to_common_error(variant, q_hat, beta_hat)
    Ti = np.linalg.inv(T)
    return FilterState(q_hat, beta_hat, Ti @ P_common @ Ti.T, truth.t[0])


def _stack_states(states: list[FilterState]) -> FilterState:
    return FilterState(
        np.stack([s.q_hat for s in states]),
        np.stack([s.beta_hat for s in states]),
        np.stack([s.P for s in states]),
        states[0].t,
    )


# ---------------------------------------------------------------------------
# runner


@dataclass
class VariantResult:
    """Per-trial metric arrays for one variant, shape ``(trials, epochs, ...)``."""

    variant: Variant
    trial_ids: np.ndarray
    t: np.ndarray
    metrics: np.ndarray  # (trials, epochs, len(METRICS_COLUMNS))
    diverged: np.ndarray  # (trials,) bool

    def column(self, name: str) -> np.ndarray:
        return self.metrics[..., METRICS_COLUMNS.index(name)]

    @property
    def divergence_count(self) -> int:
        return int(np.sum(self.diverged))


def run_variant(
    cfg: CampaignConfig,
    variant: Variant | str,
    bundles: list[tuple[TruthTrajectory, MeasurementStream]],
    trial_ids: list[int],
) -> VariantResult:
    """Run ``variant`` over the given trials in one batch."""
    variant = Variant.parse(variant)
    sim = cfg.sim
    dt = sim.dt
    noise = cfg.assumed_noise
    sigma = noise.obs_sigmas(len(sim.refs()))
    N = len(bundles)
    truth_q = np.stack([b[0].q for b in bundles])
    truth_beta = np.stack([b[0].beta for b in bundles])
    gyro = np.stack([b[1].gyro for b in bundles])
    body = np.stack([b[1].body_vectors for b in bundles])  # (N, M, n, 3)
    stream0 = bundles[0][1]
    obs_index = stream0.obs_index
    state = _stack_states([initial_state(cfg, b[0], i, variant) for b, i in zip(bundles, trial_ids)])

    M = len(obs_index)
    metrics = np.full((N, M, len(METRICS_COLUMNS)), np.nan)
    diverged = np.zeros(N, dtype=bool)
    obs_at = {int(k): j for j, k in enumerate(obs_index)}

    with np.errstate(invalid="ignore", over="ignore", divide="ignore"):
        for k in range(sim.n_steps + 1):
            if k > 0:
                state = filters.predict(
                    state, gyro[:, k - 1], dt, variant, noise,
                    discretization=cfg.discretization, strict=False,
                )
            j = obs_at.get(k)
            if j is None:
                continue
            obs = VectorObsSet(stream0.obs_t[j], body[:, j], stream0.ref_vectors, sigma)
            state, _ = filters.update(state, obs, variant, mode=cfg.injection_mode, strict=False)
            ok = (
                np.all(np.isfinite(state.P), axis=(-1, -2))
                & np.all(np.isfinite(state.q_hat), axis=-1)
                & np.all(np.isfinite(state.beta_hat), axis=-1)
            )
            diverged |= ~ok
            if np.all(diverged):
                continue
            live = ~diverged
            metrics[live, j] = _epoch_metrics(
                variant,
                stream0.obs_t[j],
                truth_q[live, k],
                truth_beta[live, k],
                state.q_hat[live],
                state.beta_hat[live],
                state.P[live],
            )
            # sanitize diverged members so they cannot raise downstream
            if np.any(diverged):
                state = FilterState(
                    np.where(diverged[:, None], [0.0, 0.0, 0.0, 1.0], state.q_hat),
                    np.where(diverged[:, None], 0.0, state.beta_hat),
                    np.where(diverged[:, None, None], np.eye(6), state.P),
                    state.t,
                )
    return VariantResult(variant, np.asarray(trial_ids), stream0.obs_t.copy(), metrics, diverged)


def _epoch_metrics(variant, t, q, beta, q_hat, beta_hat, P) -> np.ndarray:
    n = len(q)
    out = np.empty((n, len(METRICS_COLUMNS)))
    dalpha = filters.attitude_error_vector(q, q_hat, "body")
    T = filters.to_common_error(variant, q_hat, beta_hat)
    Pc = T @ P @ np.swapaxes(T, -1, -2)
    var = np.diagonal(Pc, axis1=-2, axis2=-1)
    dx = filters.true_error(variant, q, beta, q_hat, beta_hat)
    asym, min_eig = filters.covariance_health(P)
    out[:, 0] = t
    out[:, 1] = attitude_error_angle(q, q_hat)
    out[:, 2:5] = np.degrees(dalpha)
    out[:, 5:8] = beta_hat - beta
    out[:, 8] = np.sum(dx * np.linalg.solve(P, dx[..., None])[..., 0], axis=-1)
    out[:, 9:12] = 3.0 * np.degrees(np.sqrt(np.maximum(var[:, :3], 0.0)))
    out[:, 12:15] = 3.0 * np.sqrt(np.maximum(var[:, 3:], 0.0))
    out[:, 15] = asym
    out[:, 16] = min_eig
    out[:, 17] = np.abs(np.linalg.norm(q_hat, axis=-1) - 1.0)
    return out


@dataclass
class Aggregate:
    """Cross-trial statistics over non-divergent trials."""

    t: np.ndarray
    attitude_rmse_deg: np.ndarray
    sigma3_attitude_deg: np.ndarray
    bias_rmse: np.ndarray  # (epochs, 3)
    sigma3_bias: np.ndarray  # (epochs, 3)
    mean_nees: np.ndarray
    n_trials: int

    def table(self) -> np.ndarray:
        return np.column_stack([
            self.t, self.attitude_rmse_deg, self.sigma3_attitude_deg,
            self.bias_rmse, self.sigma3_bias, self.mean_nees,
            np.full(len(self.t), self.n_trials, dtype=float),
        ])  # fmt: skip


def aggregate(result: VariantResult) -> Aggregate:
    m = result.metrics[~result.diverged]
    n = len(m)
    epochs = len(result.t)
    if n == 0:
        nan = np.full(epochs, np.nan)
        return Aggregate(result.t, nan, nan, np.full((epochs, 3), np.nan), np.full((epochs, 3), np.nan), nan, 0)
    col = METRICS_COLUMNS.index
    sig_att = m[..., col("sigma3_att_x_deg"):col("sigma3_att_z_deg") + 1] / 3.0
    sig_bias = m[..., col("sigma3_bias_x"):col("sigma3_bias_z") + 1] / 3.0
    return Aggregate(
        t=result.t,
        attitude_rmse_deg=stepwise_rmse(m[..., col("attitude_error_deg")]),
        sigma3_attitude_deg=3.0 * np.sqrt(np.mean(np.sum(sig_att**2, axis=-1), axis=0)),
        bias_rmse=stepwise_rmse(m[..., col("bias_err_x"):col("bias_err_z") + 1]),
        sigma3_bias=3.0 * np.sqrt(np.mean(sig_bias**2, axis=0)),
        mean_nees=np.mean(m[..., col("nees")], axis=0),
        n_trials=n,
    )


def summarize(result: VariantResult, agg: Aggregate, convergence_time: float) -> dict:
    steady = agg.t >= convergence_time
    out = {
        "trials": int(len(result.diverged)),
        "divergence_count": result.divergence_count,
        "diverged_trials": [int(i) for i in result.trial_ids[result.diverged]],
    }
    if agg.n_trials == 0:
        out.update(attitude_rmse_deg=None, bias_rmse=None, mean_nees=None, within_3sigma_fraction=None)
        return out
    m = result.metrics[~result.diverged][:, steady]
    att = m[..., METRICS_COLUMNS.index("attitude_error_deg")]
    bias = m[..., 5:8]
    out.update(
        attitude_rmse_deg=campaign_rmse(trial_rmse(att)),
        bias_rmse=[campaign_rmse(trial_rmse(bias[..., i])) for i in range(3)],
        mean_nees=float(np.mean(m[..., METRICS_COLUMNS.index("nees")])),
        within_3sigma_fraction=float(np.mean(agg.attitude_rmse_deg[steady] <= agg.sigma3_attitude_deg[steady])),
    )
    return out


@dataclass
class CampaignResult:
    config: CampaignConfig
    results: dict[str, VariantResult]
    aggregates: dict[str, Aggregate]
    summary: dict


def run_campaign(
    cfg: CampaignConfig,
    *,
    write: bool = True,
    workers: int = 1,
    variants: list[Variant | str] | None = None,
) -> CampaignResult:
    """Simulate every trial once, then run each variant over the paired streams.

    Divergent trials are excluded from aggregates and counted per variant.
    ``workers`` splits trials into contiguous chunks run on a thread pool;
    results do not depend on it.
    """
    cfg.validate()
    chosen = [Variant.parse(v) for v in (variants or cfg.variants)]
    trial_ids = list(range(cfg.trials))
    bundles = [simulate_trial(cfg.sim, i) for i in trial_ids]

    workers = max(1, min(int(workers), len(trial_ids)))
    chunks = [c.tolist() for c in np.array_split(np.arange(len(trial_ids)), workers) if len(c)]

    results: dict[str, VariantResult] = {}
    for variant in chosen:
        def job(idx, variant=variant):
            return run_variant(cfg, variant, [bundles[i] for i in idx], [trial_ids[i] for i in idx])

        if len(chunks) == 1:
            parts = [job(chunks[0])]
        else:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                parts = list(pool.map(job, chunks))
        results[variant.value] = VariantResult(
            variant,
            np.concatenate([p.trial_ids for p in parts]),
            parts[0].t,
            np.concatenate([p.metrics for p in parts]),
            np.concatenate([p.diverged for p in parts]),
        )

    aggregates = {name: aggregate(r) for name, r in results.items()}
    summary = {
        "seed": int(cfg.sim.seed),
        "trials": int(cfg.trials),
        "variants": {
            name: summarize(results[name], aggregates[name], cfg.convergence_time) for name in results
        },
    }
    out = CampaignResult(cfg, results, aggregates, summary)
    if write:
        write_campaign(out, bundles)
    return out


# ---------------------------------------------------------------------------
# persistence


def atomic_write_text(path: str | os.PathLike, text: str) -> None:
    """Write via a temporary file in the same directory, then rename."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def format_csv(columns, rows: np.ndarray) -> str:
    rows = np.atleast_2d(np.asarray(rows, dtype=float))
    lines = [",".join(columns)]
    lines.extend(",".join(FLOAT_FMT % v for v in row) for row in rows)
    return "\n".join(lines) + "\n"


def write_csv(path, columns, rows) -> None:
    atomic_write_text(path, format_csv(columns, rows))


def read_csv(path) -> tuple[list[str], np.ndarray]:
    with open(path) as fh:
        header = fh.readline().strip().split(",")
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    return header, data


def obs_columns(n: int) -> tuple[str, ...]:
    return ("t",) + tuple(f"b{i}_{ax}" for i in range(n) for ax in "xyz")


def write_streams(out_dir, trial: int, truth: TruthTrajectory, stream: MeasurementStream) -> None:
    """Truth, gyro and observation CSVs for one trial."""
    out_dir = Path(out_dir)
    write_csv(out_dir / f"truth_{trial}.csv", TRUTH_COLUMNS,
              np.column_stack([truth.t, truth.q, truth.beta, truth.omega]))
    write_csv(out_dir / f"gyro_{trial}.csv", GYRO_COLUMNS, np.column_stack([stream.gyro_t, stream.gyro]))
    n = len(stream.ref_vectors)
    write_csv(out_dir / f"obs_{trial}.csv", obs_columns(n),
              np.column_stack([stream.obs_t, stream.body_vectors.reshape(len(stream.obs_t), 3 * n)]))


def write_campaign(result: CampaignResult, bundles) -> None:
    out_dir = Path(result.config.output)
    for i, (truth, stream) in enumerate(bundles):
        write_streams(out_dir, i, truth, stream)
    for name, res in result.results.items():
        for row, trial in enumerate(res.trial_ids):
            write_csv(out_dir / f"metrics_{name}_{trial}.csv", METRICS_COLUMNS, res.metrics[row])
        write_csv(out_dir / f"aggregate_{name}.csv", AGGREGATE_COLUMNS, result.aggregates[name].table())
    atomic_write_text(out_dir / "summary.json", json.dumps(result.summary, indent=2, sort_keys=True) + "\n")


def simulate_only(cfg: CampaignConfig) -> list[Path]:
    """Write truth and measurement streams for every trial; no filtering."""
    cfg.validate()
    for i in range(cfg.trials):
        write_streams(cfg.output, i, *simulate_trial(cfg.sim, i))
    return sorted(Path(cfg.output).glob("*.csv"))
