"""Error-state Kalman filters for attitude and gyro bias.

Four variants share one predict/update interface and differ only in how the
6-dimensional error state is defined:

``se3_body``
    Right error on SE(3), ``γ = χ χ̂⁻¹ = exp(dx^)``; ``dα = -δα`` (body
    frame) and ``dβ = Δβ + δα × β̂``.
``se3_ref``
    Left error on SE(3), ``γ = χ̂⁻¹ χ = exp(dx^)``; ``dα = -δα`` (reference
    frame) and ``dβ = A(q̂)ᵀ Δβ``.
``mekf_body``
    Multiplicative error ``A(q) = A(δq) A(q̂)``, additive bias error.
``mekf_ref``
    Multiplicative error ``A(q) = A(q̂) A(δq)``, additive bias error.

In all cases ``A(δq) ≈ I - (δα×)`` and ``Δβ = β - β̂``.  The state, gain and
covariance arrays may carry a leading batch axis so a Monte Carlo campaign
can run all trials of one variant in lock-step.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, replace
from typing import NamedTuple

import numpy as np
import scipy.linalg

from .lie import (
    exp_so3,
    left_jacobian_so3,
    quat_conjugate,
    quat_from_rotvec,
    quat_from_small_angle,
    quat_multiply,
    quat_propagate,
    quat_to_attitude,
    quat_to_rotvec,
    skew,
)
from .sensors import NoiseParams, VectorObsSet

MAX_INNOVATION_COND = 1e12
_I3 = np.eye(3)
_Z3 = np.zeros((3, 3))


class FilterError(RuntimeError):
    """Base class for numerical failures inside a filter step."""


class FilterDivergenceError(FilterError):
    """The propagated covariance or state became non-finite."""


class SingularInnovationError(FilterError):
    """The innovation covariance is numerically singular."""


class Variant(str, enum.Enum):
    SE3_BODY = "se3_body"
    SE3_REF = "se3_ref"
    MEKF_BODY = "mekf_body"
    MEKF_REF = "mekf_ref"

    @classmethod
    def parse(cls, name: "str | Variant") -> "Variant":
        """Accept ``se3_body``, ``Se3Body``, ``se3-body`` and the like."""
        if isinstance(name, Variant):
            return name
        key = str(name).strip().lower().replace("-", "").replace("_", "")
        for v in cls:
            if v.value.replace("_", "") == key:
                return v
        raise ValueError(
            f"unknown filter variant {name!r}; expected one of "
            + ", ".join(v.value for v in cls)
        )

    @property
    def is_se3(self) -> bool:
        return self in (Variant.SE3_BODY, Variant.SE3_REF)

    @property
    def is_body(self) -> bool:
        return self in (Variant.SE3_BODY, Variant.MEKF_BODY)


ALL_VARIANTS = tuple(Variant)


@dataclass(frozen=True)
class FilterState:
    """Estimate ``(q̂, β̂)`` with covariance ``P`` over the variant's error state."""

    q_hat: np.ndarray
    beta_hat: np.ndarray
    P: np.ndarray
    t: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "q_hat", np.asarray(self.q_hat, dtype=float))
        object.__setattr__(self, "beta_hat", np.asarray(self.beta_hat, dtype=float))
        object.__setattr__(self, "P", np.asarray(self.P, dtype=float))

    @property
    def batch_shape(self) -> tuple[int, ...]:
        return self.q_hat.shape[:-1]

    def to_record(self, full_covariance: bool = False) -> dict:
        """Flat JSON-friendly snapshot of a single (unbatched) state."""
        if self.batch_shape:
            raise ValueError("to_record() expects an unbatched state")
        rec = {
            "t": float(self.t),
            "q1": float(self.q_hat[0]),
            "q2": float(self.q_hat[1]),
            "q3": float(self.q_hat[2]),
            "q4": float(self.q_hat[3]),
            "beta_x": float(self.beta_hat[0]),
            "beta_y": float(self.beta_hat[1]),
            "beta_z": float(self.beta_hat[2]),
        }
        for i, d in enumerate(np.diag(self.P)):
            rec[f"P{i}{i}"] = float(d)
        if full_covariance:
            rec["P"] = self.P.tolist()
        return rec

    @classmethod
    def from_record(cls, rec: dict) -> "FilterState":
        q = [rec["q1"], rec["q2"], rec["q3"], rec["q4"]]
        beta = [rec["beta_x"], rec["beta_y"], rec["beta_z"]]
        if "P" in rec:
            P = np.asarray(rec["P"], dtype=float)
        else:
            P = np.diag([rec[f"P{i}{i}"] for i in range(6)])
        return cls(q, beta, P, rec["t"])


STATE_RECORD_COLUMNS = (
    "t", "q1", "q2", "q3", "q4", "beta_x", "beta_y", "beta_z",
    "P00", "P11", "P22", "P33", "P44", "P55",
)  # fmt: skip


@dataclass(frozen=True)
class ErrorState:
    d_alpha: np.ndarray
    d_beta: np.ndarray

    @classmethod
    def from_vector(cls, dx: np.ndarray) -> "ErrorState":
        dx = np.asarray(dx, dtype=float)
        return cls(dx[..., :3], dx[..., 3:])

    @property
    def vector(self) -> np.ndarray:
        return np.concatenate([self.d_alpha, self.d_beta], axis=-1)


class ProcessJacobians(NamedTuple):
    F: np.ndarray
    G: np.ndarray


class MeasurementModel(NamedTuple):
    H: np.ndarray  # (..., 3n, 6)
    h_pred: np.ndarray  # (..., 3n)
    R: np.ndarray  # (3n, 3n)


def _blocks(a, b, c, d) -> np.ndarray:
    """Assemble ``[[a, b], [c, d]]`` from (possibly batched) 3×3 blocks."""
    shape = np.broadcast_shapes(*(np.shape(x)[:-2] for x in (a, b, c, d)))
    out = np.empty(shape + (6, 6))
    out[..., :3, :3] = a
    out[..., :3, 3:] = b
    out[..., 3:, :3] = c
    out[..., 3:, 3:] = d
    return out


def _mv(M: np.ndarray, v: np.ndarray) -> np.ndarray:
    return np.einsum("...ij,...j->...i", M, v)


def _T(M: np.ndarray) -> np.ndarray:
    return np.swapaxes(M, -1, -2)


# ---------------------------------------------------------------------------
# process models


def process_jacobians_se3_body(omega_meas: np.ndarray, beta_hat: np.ndarray) -> ProcessJacobians:
    """``F = [[-(ω̃×), I], [-(β̂×)(ω̃×), (β̂×)]]``, ``G = [[I, 0], [(β̂×), I]]``.

    The lower-left block carries the *measured* rate ``ω̃ = ω̂ + β̂``.  Writing
    it with ``ω̂`` drops the ``(β̂×)²`` term that comes from re-expressing
    ``Δβ`` through ``dβ``; finite differences of the exact error dynamics
    confirm the ``ω̃`` form.
    """
    W = skew(omega_meas)
    B = skew(beta_hat)
    shape = np.broadcast_shapes(W.shape, B.shape)
    eye = np.broadcast_to(_I3, shape)
    zero = np.broadcast_to(_Z3, shape)
    F = _blocks(-W, eye, -B @ W, B)
    G = _blocks(eye, zero, B, eye)
    return ProcessJacobians(F, G)


def process_jacobians_se3_ref(q_hat: np.ndarray, omega_hat: np.ndarray) -> ProcessJacobians:
    """``F = [[0, I], [0, ((Âᵀω̂)×)]]``, ``G = blockdiag(Âᵀ, Âᵀ)``."""
    At = _T(quat_to_attitude(q_hat))
    Wr = skew(_mv(At, omega_hat))
    shape = np.broadcast_shapes(At.shape, Wr.shape)
    zero = np.broadcast_to(_Z3, shape)
    F = _blocks(zero, np.broadcast_to(_I3, shape), zero, Wr)
    G = _blocks(At, zero, zero, At)
    return ProcessJacobians(F, G)


def process_jacobians_mekf_body(omega_hat: np.ndarray) -> ProcessJacobians:
    W = skew(omega_hat)
    eye = np.broadcast_to(_I3, W.shape)
    zero = np.broadcast_to(_Z3, W.shape)
    return ProcessJacobians(_blocks(-W, -eye, zero, zero), _blocks(-eye, zero, zero, eye))


def process_jacobians_mekf_ref(q_hat: np.ndarray) -> ProcessJacobians:
    At = _T(quat_to_attitude(q_hat))
    eye = np.broadcast_to(_I3, At.shape)
    zero = np.broadcast_to(_Z3, At.shape)
    return ProcessJacobians(_blocks(zero, -At, zero, zero), _blocks(-At, zero, zero, eye))


def process_jacobians(
    variant: Variant | str,
    q_hat: np.ndarray,
    beta_hat: np.ndarray,
    omega_meas: np.ndarray,
) -> ProcessJacobians:
    variant = Variant.parse(variant)
    omega_hat = np.asarray(omega_meas, dtype=float) - beta_hat
    if variant is Variant.SE3_BODY:
        return process_jacobians_se3_body(omega_meas, beta_hat)
    if variant is Variant.SE3_REF:
        return process_jacobians_se3_ref(q_hat, omega_hat)
    if variant is Variant.MEKF_BODY:
        return process_jacobians_mekf_body(omega_hat)
    return process_jacobians_mekf_ref(q_hat)


def discretize(
    F: np.ndarray,
    G: np.ndarray,
    Qc: np.ndarray,
    dt: float,
    method: str = "euler",
) -> tuple[np.ndarray, np.ndarray]:
    """Transition matrix and discrete process noise for one step.

    ``euler``: ``Φ = I + F dt``, ``Q_d = G Q Gᵀ dt``.
    ``van_loan``: exact for constant ``F``, ``G`` over the step.
    """
    GQG = G @ Qc @ _T(G)
    if method == "euler":
        return np.eye(6) + F * dt, GQG * dt
    if method == "van_loan":
        shape = np.broadcast_shapes(F.shape[:-2], GQG.shape[:-2])
        M = np.zeros(shape + (12, 12))
        M[..., :6, :6] = -F
        M[..., :6, 6:] = GQG
        M[..., 6:, 6:] = _T(F)
        E = scipy.linalg.expm(M * dt)
        Phi = _T(E[..., 6:, 6:])
        return Phi, Phi @ E[..., :6, 6:]
    raise ValueError(f"unknown discretization {method!r}")


def _symmetrize(P: np.ndarray) -> np.ndarray:
    return 0.5 * (P + _T(P))


def predict(
    state: FilterState,
    omega_meas: np.ndarray,
    dt: float,
    variant: Variant | str,
    noise: NoiseParams,
    *,
    discretization: str = "euler",
    strict: bool = True,
) -> FilterState:
    """Propagate ``q̂`` with ``ω̂ = ω̃ - β̂`` and ``P`` through one gyro step.

    ``β̂`` is left unchanged.  Jacobians are evaluated at the start of the step.

    Raises
    ------
    FilterDivergenceError
        If ``strict`` and the propagated covariance is not finite.  With
        ``strict=False`` non-finite entries are passed through for the caller
        to mask.
    """
    if dt <= 0:
        raise ValueError(f"dt must be positive, got {dt}")
    omega_meas = np.asarray(omega_meas, dtype=float)
    F, G = process_jacobians(variant, state.q_hat, state.beta_hat, omega_meas)
    Phi, Qd = discretize(F, G, noise.process_noise(), dt, discretization)
    P = _symmetrize(Phi @ state.P @ _T(Phi) + Qd)
    if strict and not np.all(np.isfinite(P)):
        raise FilterDivergenceError(f"covariance became non-finite at t={state.t + dt:.6g}")
    q = quat_propagate(state.q_hat, omega_meas - state.beta_hat, dt)
    return FilterState(q, state.beta_hat.copy(), P, state.t + dt)


# ---------------------------------------------------------------------------
# measurement model and update


def measurement_model(
    variant: Variant | str, q_hat_minus: np.ndarray, obs: VectorObsSet
) -> MeasurementModel:
    """Stacked sensitivity ``H``, prediction ``A(q̂⁻) r_i`` and block-diagonal ``R``.

    Per sensor, with ``b̂ = A(q̂⁻) r``:

    ======== ===================
    se3_body ``[-(b̂×), 0]``
    mekf_body ``[(b̂×), 0]``
    se3_ref  ``[-(b̂×) A(q̂⁻), 0]``
    mekf_ref ``[(b̂×) A(q̂⁻), 0]``
    ======== ===================
    """
    variant = Variant.parse(variant)
    refs = np.asarray(obs.ref_vectors, dtype=float)
    n = refs.shape[0]
    if n == 0:
        raise ValueError("observation set is empty")
    A = quat_to_attitude(q_hat_minus)
    b_hat = np.einsum("...ij,nj->...ni", A, refs)  # (..., n, 3)
    Bx = skew(b_hat)  # (..., n, 3, 3)
    sign = -1.0 if variant.is_se3 else 1.0
    att = sign * Bx
    if not variant.is_body:
        att = att @ A[..., None, :, :]
    batch = b_hat.shape[:-2]
    H = np.zeros(batch + (n, 3, 6))
    H[..., :3] = att
    H = H.reshape(batch + (3 * n, 6))
    sigma = np.asarray(obs.sigma, dtype=float)
    R = np.diag(np.repeat(sigma**2, 3))
    return MeasurementModel(H, b_hat.reshape(batch + (3 * n,)), R)


def update(
    state: FilterState,
    obs: VectorObsSet,
    variant: Variant | str,
    *,
    mode: str = "first_order",
    strict: bool = True,
) -> tuple[FilterState, ErrorState]:
    """Kalman gain, error-state estimate, injection and Joseph covariance update.

    Returns the posterior state and the injected error state ``dx̂``.

    Raises
    ------
    SingularInnovationError
        If ``strict`` and the innovation covariance has condition number
        above 1e12.  With ``strict=False`` the affected batch members get a
        NaN covariance instead.
    """
    variant = Variant.parse(variant)
    H, h_pred, R = measurement_model(variant, state.q_hat, obs)
    y = np.asarray(obs.body_vectors, dtype=float).reshape(h_pred.shape[:-1] + (-1,))
    residual = y - h_pred
    P = state.P
    PHt = P @ _T(H)
    S = _symmetrize(H @ PHt + R)
    finite = np.all(np.isfinite(S), axis=(-1, -2))
    cond = np.linalg.cond(np.where(finite[..., None, None], S, np.eye(S.shape[-1])))
    bad = ~finite | ~(cond < MAX_INNOVATION_COND)
    if np.any(bad):
        if strict:
            raise SingularInnovationError(
                f"innovation covariance is singular (cond={np.max(cond):.3e}) at t={state.t:.6g}"
            )
        S = np.where(bad[..., None, None], np.eye(S.shape[-1]), S)
    K = _T(np.linalg.solve(S, _T(PHt)))
    dx = _mv(K, residual)
    IKH = np.eye(6) - K @ H
    P_post = _symmetrize(IKH @ P @ _T(IKH) + K @ R @ _T(K))
    if np.any(bad):
        P_post = np.where(bad[..., None, None], np.nan, P_post)
        dx = np.where(bad[..., None], 0.0, dx)
    err = ErrorState.from_vector(dx)
    injected = inject(variant, state, err, mode)
    return replace(injected, P=P_post), err


# ---------------------------------------------------------------------------
# injection


def _as_vector(dx) -> np.ndarray:
    return dx.vector if isinstance(dx, ErrorState) else np.asarray(dx, dtype=float)


def inject_se3_body(state: FilterState, dx, mode: str = "first_order") -> FilterState:
    """Left-compose the error, ``χ̂⁺ = exp(dx^) χ̂⁻``.

    ``first_order`` uses ``exp(dx^) ≈ I + dx^``: the attitude factor
    ``I + (dα×)`` becomes the unit quaternion ``[-dα/2; 1]`` and the bias is
    ``(I + (dα×)) β̂ + dβ``.
    """
    v = _as_vector(dx)
    da, db = v[..., :3], v[..., 3:]
    if mode == "exact":
        dq = quat_from_rotvec(-da)
        beta = _mv(exp_so3(da), state.beta_hat) + _mv(left_jacobian_so3(da), db)
    elif mode == "first_order":
        dq = quat_from_small_angle(-da)
        beta = state.beta_hat + np.cross(da, state.beta_hat) + db
    else:
        raise ValueError(f"unknown injection mode {mode!r}")
    q = _normalize(quat_multiply(dq, state.q_hat))
    return FilterState(q, beta, state.P, state.t)


def inject_se3_ref(state: FilterState, dx, mode: str = "first_order") -> FilterState:
    """Right-compose the error, ``χ̂⁺ = χ̂⁻ exp(dx^)``.

    ``first_order`` gives ``A⁺ = A(q̂⁻)(I + (dα×))`` and
    ``β̂⁺ = β̂⁻ + A(q̂⁻) dβ``.
    """
    v = _as_vector(dx)
    da, db = v[..., :3], v[..., 3:]
    A = quat_to_attitude(state.q_hat)
    if mode == "exact":
        dq = quat_from_rotvec(-da)
        beta = state.beta_hat + _mv(A, _mv(left_jacobian_so3(da), db))
    elif mode == "first_order":
        dq = quat_from_small_angle(-da)
        beta = state.beta_hat + _mv(A, db)
    else:
        raise ValueError(f"unknown injection mode {mode!r}")
    q = _normalize(quat_multiply(state.q_hat, dq))
    return FilterState(q, beta, state.P, state.t)


def inject_mekf(state: FilterState, dx, variant: Variant | str) -> FilterState:
    """Multiplicative attitude update with ``δq = [δα/2; 1]``, additive bias."""
    variant = Variant.parse(variant)
    if variant.is_se3:
        raise ValueError(f"{variant.value} is not an MEKF variant")
    v = _as_vector(dx)
    dq = quat_from_small_angle(v[..., :3])
    if variant is Variant.MEKF_BODY:
        q = quat_multiply(dq, state.q_hat)
    else:
        q = quat_multiply(state.q_hat, dq)
    return FilterState(_normalize(q), state.beta_hat + v[..., 3:], state.P, state.t)


def inject(variant: Variant | str, state: FilterState, dx, mode: str = "first_order") -> FilterState:
    variant = Variant.parse(variant)
    if variant is Variant.SE3_BODY:
        return inject_se3_body(state, dx, mode)
    if variant is Variant.SE3_REF:
        return inject_se3_ref(state, dx, mode)
    return inject_mekf(state, dx, variant)


def _normalize(q: np.ndarray) -> np.ndarray:
    return q / np.linalg.norm(q, axis=-1, keepdims=True)


# ---------------------------------------------------------------------------
# error bookkeeping


def attitude_error_vector(q_true: np.ndarray, q_hat: np.ndarray, frame: str = "body") -> np.ndarray:
    """``δα`` with ``A(q) = exp(-δα×) A(q̂)`` (body) or ``A(q̂) exp(-δα×)`` (reference)."""
    if frame == "body":
        dq = quat_multiply(q_true, quat_conjugate(q_hat))
    elif frame == "reference":
        dq = quat_multiply(quat_conjugate(q_hat), q_true)
    else:
        raise ValueError(f"frame must be 'body' or 'reference', got {frame!r}")
    return quat_to_rotvec(dq)


def true_error(
    variant: Variant | str,
    q_true: np.ndarray,
    beta_true: np.ndarray,
    q_hat: np.ndarray,
    beta_hat: np.ndarray,
) -> np.ndarray:
    """The variant's error state between truth and estimate, shape ``(..., 6)``."""
    variant = Variant.parse(variant)
    frame = "body" if variant.is_body else "reference"
    da = attitude_error_vector(q_true, q_hat, frame)
    dbeta = np.asarray(beta_true, dtype=float) - beta_hat
    if variant is Variant.SE3_BODY:
        return np.concatenate([-da, dbeta + np.cross(da, beta_hat)], axis=-1)
    if variant is Variant.SE3_REF:
        At = _T(quat_to_attitude(q_hat))
        return np.concatenate([-da, _mv(At, dbeta)], axis=-1)
    return np.concatenate([da, dbeta], axis=-1)


def to_common_error(variant: Variant | str, q_hat: np.ndarray, beta_hat: np.ndarray) -> np.ndarray:
    """Linear map from the variant's error state to ``[δα_body; Δβ]``.

    Used to express every variant's covariance in one set of coordinates.
    """
    variant = Variant.parse(variant)
    q_hat = np.asarray(q_hat, dtype=float)
    shape = q_hat.shape[:-1] + (3, 3)
    eye = np.broadcast_to(_I3, shape)
    zero = np.broadcast_to(_Z3, shape)
    if variant is Variant.MEKF_BODY:
        return _blocks(eye, zero, zero, eye)
    if variant is Variant.SE3_BODY:
        return _blocks(-eye, zero, -skew(beta_hat), eye)
    A = quat_to_attitude(q_hat)
    if variant is Variant.MEKF_REF:
        return _blocks(A, zero, zero, eye)
    return _blocks(-A, zero, zero, A)


def covariance_health(P: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Max absolute asymmetry and minimum eigenvalue, per batch member."""
    P = np.asarray(P, dtype=float)
    asym = np.max(np.abs(P - _T(P)), axis=(-1, -2))
    min_eig = np.linalg.eigvalsh(_symmetrize(P))[..., 0]
    return asym, min_eig
