"""SO(3)/SE(3) and quaternion primitives.

Conventions used throughout the package:

* Quaternions are scalar-last, ``q = [q1, q2, q3, q4]`` with ``q4`` the
  scalar part.
* ``A(q)`` is the attitude matrix mapping reference-frame vectors into the
  body frame, ``b = A(q) r``.  For ``q = [sin(θ/2) e, cos(θ/2)]`` this gives
  ``A(q) = exp_so3(-θ e)``.
* The quaternion product satisfies ``A(p ⊗ q) = A(p) A(q)``.
* SE(3) elements are plain ``(..., 4, 4)`` arrays.

Every function broadcasts over leading axes, so a stack of ``N`` states can be
handled in one call.
"""

from __future__ import annotations

import numpy as np

SMALL_ANGLE = 1e-4
QUAT_NORM_TOL = 1e-6


def skew(v: np.ndarray) -> np.ndarray:
    """Cross-product matrix, ``skew(v) @ w == np.cross(v, w)``."""
    v = np.asarray(v, dtype=float)
    out = np.zeros(v.shape[:-1] + (3, 3))
    x, y, z = v[..., 0], v[..., 1], v[..., 2]
    out[..., 0, 1] = -z
    out[..., 0, 2] = y
    out[..., 1, 0] = z
    out[..., 1, 2] = -x
    out[..., 2, 0] = -y
    out[..., 2, 1] = x
    return out


def vee(m: np.ndarray) -> np.ndarray:
    """Inverse of :func:`skew` (reads the antisymmetric entries only)."""
    m = np.asarray(m, dtype=float)
    return np.stack([m[..., 2, 1], m[..., 0, 2], m[..., 1, 0]], axis=-1)


def _so3_coefficients(phi: np.ndarray):
    """Return ``angle, sin(a)/a, (1-cos a)/a², (a-sin a)/a³`` per element.

    Below :data:`SMALL_ANGLE` the ratios come from their Taylor series.
    """
    angle = np.linalg.norm(phi, axis=-1)
    small = angle < SMALL_ANGLE
    a = np.where(small, 1.0, angle)
    a2 = a * a
    half_sin = np.sin(0.5 * a)
    c1 = np.where(small, 1.0 - angle**2 / 6.0, np.sin(a) / a)
    # 1 - cos(a) written as 2 sin²(a/2) to avoid cancellation
    c2 = np.where(small, 0.5 - angle**2 / 24.0, 2.0 * half_sin * half_sin / a2)
    c3 = np.where(small, 1.0 / 6.0 - angle**2 / 120.0, (a - np.sin(a)) / (a2 * a))
    return angle, c1, c2, c3


def exp_so3(phi: np.ndarray) -> np.ndarray:
    """Rotation matrix ``exp(phi×)`` (Rodrigues).

    Small angles use the series ``I + Φ + Φ²/2 + Φ³/6``.
    """
    phi = np.asarray(phi, dtype=float)
    angle, c1, c2, _ = _so3_coefficients(phi)
    K = skew(phi)
    K2 = K @ K
    small = (angle < SMALL_ANGLE)[..., None, None]
    eye = np.eye(3)
    closed = eye + c1[..., None, None] * K + c2[..., None, None] * K2
    taylor = eye + K + 0.5 * K2 + (K2 @ K) / 6.0
    return np.where(small, taylor, closed)


def left_jacobian_so3(phi: np.ndarray) -> np.ndarray:
    """Left Jacobian ``J = Σ (phi×)ⁿ / (n+1)!``.

    Small angles use ``I + Φ/2 + Φ²/6 + Φ³/24``.
    """
    phi = np.asarray(phi, dtype=float)
    angle, _, c2, c3 = _so3_coefficients(phi)
    K = skew(phi)
    K2 = K @ K
    small = (angle < SMALL_ANGLE)[..., None, None]
    eye = np.eye(3)
    closed = eye + c2[..., None, None] * K + c3[..., None, None] * K2
    taylor = eye + 0.5 * K + K2 / 6.0 + (K2 @ K) / 24.0
    return np.where(small, taylor, closed)


def hat_se3(zeta: np.ndarray) -> np.ndarray:
    """4×4 Lie-algebra matrix of ``zeta = [phi; mu]``."""
    zeta = np.asarray(zeta, dtype=float)
    out = np.zeros(zeta.shape[:-1] + (4, 4))
    out[..., :3, :3] = skew(zeta[..., :3])
    out[..., :3, 3] = zeta[..., 3:]
    return out


def exp_se3(zeta: np.ndarray) -> np.ndarray:
    """SE(3) exponential in block form ``[[exp(phi×), J mu], [0, 1]]``."""
    zeta = np.asarray(zeta, dtype=float)
    phi, mu = zeta[..., :3], zeta[..., 3:]
    J = left_jacobian_so3(phi)
    return make_transform(exp_so3(phi), np.einsum("...ij,...j->...i", J, mu))


def make_transform(rot: np.ndarray, trans: np.ndarray) -> np.ndarray:
    rot = np.asarray(rot, dtype=float)
    trans = np.asarray(trans, dtype=float)
    shape = np.broadcast_shapes(rot.shape[:-2], trans.shape[:-1])
    T = np.zeros(shape + (4, 4))
    T[..., :3, :3] = rot
    T[..., :3, 3] = trans
    T[..., 3, 3] = 1.0
    return T


def se3_inverse(T: np.ndarray) -> np.ndarray:
    """Closed-form inverse ``[[Rᵀ, -Rᵀ t], [0, 1]]``."""
    T = np.asarray(T, dtype=float)
    Rt = np.swapaxes(T[..., :3, :3], -1, -2)
    return make_transform(Rt, -np.einsum("...ij,...j->...i", Rt, T[..., :3, 3]))


def embed_state(A: np.ndarray, beta: np.ndarray) -> np.ndarray:
    """Pack attitude matrix and gyro bias into one SE(3) element."""
    return make_transform(A, beta)


def extract_state(chi: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Inverse of :func:`embed_state`."""
    chi = np.asarray(chi, dtype=float)
    return chi[..., :3, :3].copy(), chi[..., :3, 3].copy()


# ---------------------------------------------------------------------------
# quaternions


def quat_identity(shape: tuple[int, ...] = ()) -> np.ndarray:
    q = np.zeros(shape + (4,))
    q[..., 3] = 1.0
    return q


def quat_normalize(q: np.ndarray) -> np.ndarray:
    q = np.asarray(q, dtype=float)
    return q / np.linalg.norm(q, axis=-1, keepdims=True)


def quat_conjugate(q: np.ndarray) -> np.ndarray:
    q = np.asarray(q, dtype=float)
    return np.concatenate([-q[..., :3], q[..., 3:]], axis=-1)


def quat_multiply(p: np.ndarray, q: np.ndarray) -> np.ndarray:
    """Composition with ``A(p ⊗ q) = A(p) A(q)``."""
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    pv, p4 = p[..., :3], p[..., 3:]
    qv, q4 = q[..., :3], q[..., 3:]
    vec = p4 * qv + q4 * pv - np.cross(pv, qv)
    scal = p4 * q4 - np.sum(pv * qv, axis=-1, keepdims=True)
    return np.concatenate([vec, scal], axis=-1)


def quat_to_attitude(q: np.ndarray) -> np.ndarray:
    """Attitude matrix ``A(q) = (q4² - |ρ|²) I + 2 ρρᵀ - 2 q4 [ρ×]``.

    Raises
    ------
    ValueError
        If any quaternion deviates from unit norm by more than 1e-6.
    """
    q = np.asarray(q, dtype=float)
    norm = np.linalg.norm(q, axis=-1)
    if np.any(np.abs(norm - 1.0) > QUAT_NORM_TOL):
        raise ValueError(
            f"quaternion is not unit norm (max deviation "
            f"{np.max(np.abs(norm - 1.0)):.3e})"
        )
    rho, q4 = q[..., :3], q[..., 3]
    scal = q4 * q4 - np.sum(rho * rho, axis=-1)
    return (
        scal[..., None, None] * np.eye(3)
        + 2.0 * rho[..., :, None] * rho[..., None, :]
        - 2.0 * q4[..., None, None] * skew(rho)
    )


def quat_from_rotvec(v: np.ndarray) -> np.ndarray:
    """Quaternion of rotation vector ``v``; ``A(result) = exp_so3(-v)``."""
    v = np.asarray(v, dtype=float)
    angle = np.linalg.norm(v, axis=-1, keepdims=True)
    small = angle < SMALL_ANGLE
    a = np.where(small, 1.0, angle)
    # sin(a/2)/a
    k = np.where(small, 0.5 - angle**2 / 48.0, np.sin(0.5 * a) / a)
    return np.concatenate([k * v, np.cos(0.5 * angle)], axis=-1)


def quat_to_rotvec(q: np.ndarray) -> np.ndarray:
    """Inverse of :func:`quat_from_rotvec`, angle in ``[0, π]``."""
    q = np.asarray(q, dtype=float)
    q = np.where(q[..., 3:] < 0.0, -q, q)
    s = np.linalg.norm(q[..., :3], axis=-1, keepdims=True)
    angle = 2.0 * np.arctan2(s, q[..., 3:])
    small = s < 1e-12
    k = np.where(small, 2.0 / np.where(small, q[..., 3:], 1.0), angle / np.where(small, 1.0, s))
    return k * q[..., :3]


def quat_from_small_angle(delta_alpha: np.ndarray) -> np.ndarray:
    """Normalized ``[δα/2; 1]``, so that ``A ≈ I - (δα×)``."""
    delta_alpha = np.asarray(delta_alpha, dtype=float)
    q = np.concatenate(
        [0.5 * delta_alpha, np.ones(delta_alpha.shape[:-1] + (1,))], axis=-1
    )
    return quat_normalize(q)


def omega_matrix(omega: np.ndarray) -> np.ndarray:
    """4×4 ``Ω(ω)`` with ``Ξ(q) ω = Ω(ω) q``."""
    omega = np.asarray(omega, dtype=float)
    out = np.zeros(omega.shape[:-1] + (4, 4))
    out[..., :3, :3] = -skew(omega)
    out[..., :3, 3] = omega
    out[..., 3, :3] = -omega
    return out


def xi_matrix(q: np.ndarray) -> np.ndarray:
    """4×3 ``Ξ(q) = [q4 I + (ρ×); -ρᵀ]``."""
    q = np.asarray(q, dtype=float)
    out = np.zeros(q.shape[:-1] + (4, 3))
    out[..., :3, :] = q[..., 3, None, None] * np.eye(3) + skew(q[..., :3])
    out[..., 3, :] = -q[..., :3]
    return out


def quat_propagate(q: np.ndarray, omega: np.ndarray, dt: float) -> np.ndarray:
    """Integrate ``q̇ = ½ Ξ(q) ω`` over ``dt`` with ``ω`` held constant.

    The step is the exact rotation ``q⁺ = quat_from_rotvec(ω dt) ⊗ q``,
    followed by renormalization.
    """
    if dt <= 0:
        raise ValueError(f"dt must be positive, got {dt}")
    omega = np.asarray(omega, dtype=float)
    return quat_normalize(quat_multiply(quat_from_rotvec(omega * dt), q))
