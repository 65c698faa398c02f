import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from oracles import (
    cross_matrix,
    exp_se3_direct,
    power_series,
    random_unit_quaternion,
    rk4_quaternion,
)
from se3ekf.lie import (
    SMALL_ANGLE,
    embed_state,
    exp_se3,
    exp_so3,
    extract_state,
    hat_se3,
    left_jacobian_so3,
    make_transform,
    quat_conjugate,
    quat_from_rotvec,
    quat_from_small_angle,
    quat_multiply,
    quat_propagate,
    quat_to_attitude,
    quat_to_rotvec,
    se3_inverse,
    skew,
    vee,
    xi_matrix,
    omega_matrix,
)

vec3 = arrays(np.float64, 3, elements=st.floats(-5, 5))


def random_transform(rng):
    return make_transform(exp_so3(rng.uniform(-3, 3, 3) / np.sqrt(3)), rng.normal(size=3))


class TestSkew:
    def test_zero(self):
        np.testing.assert_array_equal(skew([0, 0, 0]), np.zeros((3, 3)))

    def test_canonical_cross(self):
        np.testing.assert_array_equal(skew([1, 0, 0]) @ [0, 1, 0], [0, 0, 1])

    def test_antisymmetric(self):
        S = skew([0.3, -1.2, 2.0])
        np.testing.assert_array_equal(S.T, -S)

    @given(vec3, vec3)
    def test_matches_cross_and_anticommutes(self, v, w):
        np.testing.assert_allclose(skew(v) @ w, np.cross(v, w), atol=1e-12)
        np.testing.assert_allclose(skew(v) @ w, -skew(w) @ v, atol=1e-12)

    def test_vee_inverts_skew_batched(self):
        v = np.random.default_rng(0).normal(size=(7, 3))
        np.testing.assert_array_equal(vee(skew(v)), v)


class TestExpSO3:
    def test_identity(self):
        np.testing.assert_array_equal(exp_so3([0, 0, 0]), np.eye(3))

    def test_half_turn_about_x(self):
        phi = np.array([np.pi, 0, 0])
        oracle = power_series(cross_matrix(phi), terms=30)
        np.testing.assert_allclose(oracle, np.diag([1.0, -1.0, -1.0]), atol=1e-12)
        np.testing.assert_allclose(exp_so3(phi), oracle, atol=1e-12)

    def test_inverse(self):
        rng = np.random.default_rng(1)
        for _ in range(50):
            phi = rng.normal(size=3)
            np.testing.assert_allclose(exp_so3(phi) @ exp_so3(-phi), np.eye(3), atol=1e-12)

    @given(arrays(np.float64, 3, elements=st.floats(-3.6, 3.6)))
    def test_is_rotation_up_to_two_pi(self, phi):
        R = exp_so3(phi)
        np.testing.assert_allclose(R.T @ R, np.eye(3), atol=1e-9)
        assert np.linalg.det(R) == pytest.approx(1.0, abs=1e-9)

    def test_matches_series(self):
        rng = np.random.default_rng(2)
        for _ in range(20):
            phi = rng.uniform(-1.5, 1.5, 3)
            np.testing.assert_allclose(exp_so3(phi), power_series(cross_matrix(phi)), atol=1e-12)


class TestLeftJacobian:
    def test_identity(self):
        np.testing.assert_array_equal(left_jacobian_so3([0, 0, 0]), np.eye(3))

    def test_matches_series(self):
        phi = np.array([0.7, -0.2, 0.4])
        oracle = power_series(cross_matrix(phi), terms=30, shift=1)
        np.testing.assert_allclose(left_jacobian_so3(phi), oracle, atol=1e-12)

    def test_translation_block_of_exp(self):
        rng = np.random.default_rng(3)
        for _ in range(20):
            zeta = rng.normal(size=6)
            T = exp_se3(zeta)
            np.testing.assert_allclose(T[:3, 3], left_jacobian_so3(zeta[:3]) @ zeta[3:], atol=1e-14)


@pytest.mark.parametrize("fn", [exp_so3, left_jacobian_so3])
@pytest.mark.parametrize("scale", [0.9, 0.999999, 1.000001, 1.1])
def test_taylor_branch_agrees_with_closed_form(fn, scale):
    direction = np.array([0.48, -0.6, 0.64])
    phi = SMALL_ANGLE * scale * direction
    series = power_series(cross_matrix(phi), terms=12, shift=0 if fn is exp_so3 else 1)
    assert np.max(np.abs(fn(phi) - series)) < 1e-12


class TestExpSE3:
    def test_identity(self):
        np.testing.assert_array_equal(exp_se3(np.zeros(6)), np.eye(4))

    def test_pure_translation(self):
        np.testing.assert_array_equal(exp_se3([0, 0, 0, 1, 2, 3]), make_transform(np.eye(3), [1, 2, 3]))

    def test_matches_direct_series(self):
        rng = np.random.default_rng(4)
        for _ in range(200):
            axis = rng.normal(size=3)
            axis /= np.linalg.norm(axis)
            zeta = np.concatenate([rng.uniform(0.01, 3) * axis, rng.normal(size=3)])
            np.testing.assert_allclose(exp_se3(zeta), exp_se3_direct(zeta), atol=1e-10)

    def test_matches_power_series(self):
        zeta = np.array([0.3, -0.8, 1.1, 0.5, -2.0, 0.7])
        np.testing.assert_allclose(exp_se3(zeta), power_series(hat_se3(zeta), terms=40), atol=1e-12)

    def test_batched(self):
        zeta = np.random.default_rng(5).normal(size=(4, 2, 6))
        out = exp_se3(zeta)
        assert out.shape == (4, 2, 4, 4)
        np.testing.assert_array_equal(out[3, 1], exp_se3(zeta[3, 1]))


class TestInverseAndGroup:
    def test_identity(self):
        np.testing.assert_array_equal(se3_inverse(np.eye(4)), np.eye(4))

    def test_two_sided_inverse_and_involution(self):
        rng = np.random.default_rng(6)
        for _ in range(50):
            T = random_transform(rng)
            np.testing.assert_allclose(T @ se3_inverse(T), np.eye(4), atol=1e-12)
            np.testing.assert_allclose(se3_inverse(T) @ T, np.eye(4), atol=1e-12)
            np.testing.assert_allclose(se3_inverse(se3_inverse(T)), T, atol=1e-12)

    def test_associativity(self):
        rng = np.random.default_rng(7)
        for _ in range(50):
            a, b, c = (random_transform(rng) for _ in range(3))
            np.testing.assert_allclose((a @ b) @ c, a @ (b @ c), atol=1e-12)

    def test_embed_extract_roundtrip(self):
        np.testing.assert_array_equal(embed_state(np.eye(3), np.zeros(3)), np.eye(4))
        rng = np.random.default_rng(8)
        A, beta = exp_so3(rng.normal(size=3)), rng.normal(size=3)
        A2, beta2 = extract_state(embed_state(A, beta))
        np.testing.assert_array_equal(A2, A)
        np.testing.assert_array_equal(beta2, beta)

    def test_inverse_block_layout(self):
        rng = np.random.default_rng(9)
        A, beta = exp_so3(rng.normal(size=3)), rng.normal(size=3)
        inv = se3_inverse(embed_state(A, beta))
        np.testing.assert_array_equal(inv[:3, :3], A.T)
        np.testing.assert_allclose(inv[:3, 3], -A.T @ beta, atol=1e-15)
        np.testing.assert_array_equal(inv[3], [0, 0, 0, 1])


class TestQuaternion:
    def test_identity_attitude(self):
        np.testing.assert_array_equal(quat_to_attitude([0, 0, 0, 1]), np.eye(3))

    def test_quarter_turn_about_x(self):
        q = [np.sin(np.pi / 4), 0, 0, np.cos(np.pi / 4)]
        oracle = power_series(cross_matrix([-np.pi / 2, 0, 0]), terms=30)
        np.testing.assert_allclose(quat_to_attitude(q), oracle, atol=1e-12)

    def test_double_cover_and_orthogonality(self):
        rng = np.random.default_rng(10)
        for _ in range(20):
            q = random_unit_quaternion(rng)
            A = quat_to_attitude(q)
            np.testing.assert_allclose(quat_to_attitude(-q), A, atol=1e-15)
            np.testing.assert_allclose(A @ A.T, np.eye(3), atol=1e-12)

    def test_rejects_non_unit(self):
        with pytest.raises(ValueError, match="unit norm"):
            quat_to_attitude([0, 0, 0, 1.001])

    def test_product_composes_attitudes(self):
        rng = np.random.default_rng(11)
        for _ in range(20):
            p, q = random_unit_quaternion(rng), random_unit_quaternion(rng)
            lhs = quat_to_attitude(quat_multiply(p, q))
            np.testing.assert_allclose(lhs, quat_to_attitude(p) @ quat_to_attitude(q), atol=1e-12)
            np.testing.assert_allclose(quat_multiply(q, quat_conjugate(q)), [0, 0, 0, 1], atol=1e-15)

    def test_rotvec_roundtrip_and_convention(self):
        rng = np.random.default_rng(12)
        for _ in range(20):
            v = rng.uniform(-1.7, 1.7, 3)
            q = quat_from_rotvec(v)
            np.testing.assert_allclose(quat_to_attitude(q), exp_so3(-v), atol=1e-12)
            np.testing.assert_allclose(quat_to_rotvec(q), v, atol=1e-12)
            np.testing.assert_allclose(quat_to_rotvec(-q), v, atol=1e-12)

    def test_small_angle_quaternion_first_order(self):
        da = np.array([1e-4, -2e-4, 5e-5])
        A = quat_to_attitude(quat_from_small_angle(da))
        np.testing.assert_allclose(A, np.eye(3) - skew(da), atol=1e-7)

    def test_xi_and_omega_matrices_agree(self):
        rng = np.random.default_rng(13)
        q, w = random_unit_quaternion(rng), rng.normal(size=3)
        np.testing.assert_allclose(xi_matrix(q) @ w, omega_matrix(w) @ q, atol=1e-15)


class TestQuatPropagate:
    def test_zero_rate(self):
        q = random_unit_quaternion(np.random.default_rng(14))
        np.testing.assert_allclose(quat_propagate(q, [0, 0, 0], 0.1), q, atol=1e-15)

    def test_matches_rk4_and_rotation_increment(self):
        rng = np.random.default_rng(15)
        for _ in range(10):
            q, w = random_unit_quaternion(rng), rng.normal(size=3) * 0.5
            dt = 0.1
            q1 = quat_propagate(q, w, dt)
            np.testing.assert_allclose(q1, rk4_quaternion(q, w, dt), atol=1e-9)
            np.testing.assert_allclose(
                quat_to_attitude(q1), exp_so3(-w * dt) @ quat_to_attitude(q), atol=1e-9
            )

    @settings(max_examples=50)
    @given(vec3, st.floats(1e-3, 10.0))
    def test_preserves_norm(self, w, dt):
        q = quat_propagate(np.array([0.1, -0.3, 0.5, 0.8]) / np.linalg.norm([0.1, -0.3, 0.5, 0.8]), w, dt)
        assert abs(np.linalg.norm(q) - 1.0) < 1e-12

    def test_rejects_non_positive_dt(self):
        with pytest.raises(ValueError):
            quat_propagate([0, 0, 0, 1], [0, 0, 1], 0.0)
