"""
Attitude and bias as one SE(3) element
======================================

The filters pack the attitude matrix and the gyro bias into a single 4×4
transform.  This script walks through the exponential map, the quaternion
convention, and why the two group errors are invariant.
"""

import numpy as np

from se3ekf.lie import (
    embed_state,
    exp_se3,
    exp_so3,
    left_jacobian_so3,
    quat_from_rotvec,
    quat_to_attitude,
    se3_inverse,
)

np.set_printoptions(precision=4, suppress=True)

# A tangent vector ζ = [φ; μ]: rotation part φ, "translation" (bias) part μ.
zeta = np.array([0.3, -0.2, 0.5, 1e-3, 2e-3, -1e-3])
T = exp_se3(zeta)
print("exp(ζ^) =\n", T)

# The rotation block is Rodrigues' formula and the translation block is J μ.
print("rotation block matches exp_so3:", np.allclose(T[:3, :3], exp_so3(zeta[:3])))
print("translation block matches J μ:", np.allclose(T[:3, 3], left_jacobian_so3(zeta[:3]) @ zeta[3:]))

# Quaternions are scalar-last.  A rotation vector θe becomes the attitude
# matrix exp(-θ e×): the matrix maps reference-frame vectors into the body.
q = quat_from_rotvec([0.0, 0.0, np.pi / 2])
print("A(q) for 90° about z:\n", quat_to_attitude(q))
print("body image of reference x:", quat_to_attitude(q) @ [1.0, 0, 0])

# Group errors.  The body-frame (right) error χ χ̂⁻¹ ignores any common
# right factor, and the reference-frame (left) error χ̂⁻¹ χ ignores any
# common left factor.
rng = np.random.default_rng(0)
chi = embed_state(exp_so3(rng.normal(size=3)), rng.normal(size=3))
chi_hat = embed_state(exp_so3(rng.normal(size=3)), rng.normal(size=3))
T0 = embed_state(exp_so3(rng.normal(size=3)), rng.normal(size=3))

right = chi @ se3_inverse(chi_hat)
left = se3_inverse(chi_hat) @ chi
print("right error unchanged by χ → χT₀:", np.abs(right - (chi @ T0) @ se3_inverse(chi_hat @ T0)).max())
print("left error unchanged by χ → T₀χ: ", np.abs(left - se3_inverse(T0 @ chi_hat) @ (T0 @ chi)).max())
