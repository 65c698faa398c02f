import dataclasses

import numpy as np
import pytest

from oracles import cross_matrix, power_series, triad
from se3ekf.lie import exp_so3, quat_from_rotvec, quat_to_attitude, quat_to_rotvec
from se3ekf.sensors import (
    ConfigError,
    MotionProfile,
    NoiseParams,
    SimConfig,
    VectorObsSet,
    gyro_measure,
    observe_vectors,
    simulate_measurements,
    simulate_trial,
    simulate_truth,
    trial_rngs,
)

QUIET = NoiseParams(sigma_v=0.0, sigma_u=0.0, sigma_obs=0.0)


def constant_cfg(rate, duration=100.0, noise=QUIET, **kw):
    return SimConfig(
        duration=duration,
        motion=MotionProfile(kind="constant", rate=tuple(rate)),
        noise=noise,
        **kw,
    )


class TestTruth:
    def test_static(self):
        cfg = constant_cfg((0, 0, 0), duration=10.0, initial_bias=(1e-3, 0, -2e-3))
        truth = simulate_truth(cfg)
        np.testing.assert_array_equal(truth.q, np.broadcast_to([0, 0, 0, 1.0], truth.q.shape))
        np.testing.assert_array_equal(truth.beta, np.broadcast_to(cfg.initial_bias, truth.beta.shape))
        assert len(truth) == 101

    def test_constant_rate_one_radian(self):
        truth = simulate_truth(constant_cfg((0.01, 0, 0)))
        np.testing.assert_allclose(quat_to_rotvec(truth.q[-1]), [1.0, 0, 0], atol=1e-6)
        oracle = power_series(cross_matrix([-1.0, 0, 0]))
        np.testing.assert_allclose(quat_to_attitude(truth.q[-1]), oracle, atol=1e-6)

    def test_same_seed_bitwise_identical(self):
        cfg = constant_cfg((0.01, 0.02, 0), noise=NoiseParams(), seed=42)
        a, b = simulate_truth(cfg, trial_rngs(42, 3)["truth"]), simulate_truth(cfg, trial_rngs(42, 3)["truth"])
        assert a.q.tobytes() == b.q.tobytes()
        assert a.beta.tobytes() == b.beta.tobytes()
        c = simulate_truth(cfg, trial_rngs(42, 4)["truth"])
        assert not np.array_equal(a.beta, c.beta)

    def test_sinusoidal_profile(self):
        m = MotionProfile(kind="sinusoidal", rate=(0, 0, 1), amplitude=(2, 0, 0), frequency=(0.25, 0, 0))
        np.testing.assert_allclose(m.omega(1.0), [2.0, 0, 1.0], atol=1e-15)
        assert m.omega(np.zeros(5)).shape == (5, 3)

    def test_bias_increments_uncorrelated(self):
        cfg = constant_cfg((0, 0, 0), duration=1e4, noise=NoiseParams(sigma_u=1e-6))
        truth = simulate_truth(cfg, np.random.default_rng(7))
        d = np.diff(truth.beta[:, 0])
        assert len(d) == 100_000
        d = d - d.mean()
        for lag in (1, 2, 5, 10):
            rho = np.dot(d[:-lag], d[lag:]) / np.dot(d, d)
            assert abs(rho) < 0.02
        assert np.std(d) == pytest.approx(1e-6 * np.sqrt(cfg.dt), rel=0.02)


class TestGyro:
    def test_noiseless(self):
        w, b = np.array([0.1, -0.2, 0.3]), np.array([1e-3, 2e-3, -1e-3])
        out = gyro_measure(w, b, QUIET, np.random.default_rng(0), 0.1)
        np.testing.assert_array_equal(out, w + b)

    @pytest.mark.parametrize("dt", [0.1, 0.01])
    def test_noise_moments(self, dt):
        n = 100_000
        noise = NoiseParams(sigma_v=1e-4)
        w = np.zeros((n, 3))
        beta = np.tile([1e-3, 0, -1e-3], (n, 1))
        resid = gyro_measure(w, beta, noise, np.random.default_rng(1), dt) - beta
        sigma = noise.sigma_v / np.sqrt(dt)
        assert np.all(np.abs(resid.mean(axis=0)) < 4 * sigma / np.sqrt(n))
        np.testing.assert_allclose(resid.var(axis=0), sigma**2, rtol=0.05)


class TestVectorObservations:
    def test_identity_noiseless(self):
        refs = np.array([[1.0, 0, 0], [0, 0.6, 0.8]])
        out = observe_vectors([0, 0, 0, 1.0], refs, 0.0, np.random.default_rng(0))
        np.testing.assert_array_equal(out, refs)

    def test_quarter_turn_about_z(self):
        q = quat_from_rotvec([0, 0, np.pi / 2])
        out = observe_vectors(q, np.array([[1.0, 0, 0]]), 0.0, np.random.default_rng(0))
        np.testing.assert_allclose(out[0], quat_to_attitude(q) @ [1, 0, 0], atol=1e-15)
        np.testing.assert_allclose(out[0], exp_so3([0, 0, -np.pi / 2]) @ [1, 0, 0], atol=1e-15)
        np.testing.assert_allclose(out[0], [0, -1, 0], atol=1e-15)

    def test_noise_statistics(self):
        n = 100_000
        q = np.tile(quat_from_rotvec([0.3, -0.4, 1.0]), (n, 1))
        refs = np.array([[1.0, 0, 0], [0, 1.0, 0]])
        sigma = np.array([1e-3, 5e-3])
        out = observe_vectors(q, refs, sigma, np.random.default_rng(2))
        resid = out - (quat_to_attitude(q[0]) @ refs.T).T
        for i in range(2):
            np.testing.assert_allclose(resid[:, i].std(axis=0), sigma[i], rtol=0.05)

    def test_not_renormalized(self):
        out = observe_vectors([0, 0, 0, 1.0], np.array([[1.0, 0, 0]]), 0.1, np.random.default_rng(3))
        assert abs(np.linalg.norm(out[0]) - 1.0) > 1e-6

    def test_triad_inverts_noiseless_pipeline(self):
        cfg = dataclasses.replace(
            constant_cfg((0.01, -0.02, 0.03), duration=20.0),
            ref_vectors=((1.0, 0, 0), (0, 0.6, 0.8)),
        )
        truth, stream = simulate_trial(cfg, 0)
        for j, k in enumerate(stream.obs_index):
            b = stream.body_vectors[j]
            A = triad(b[0], b[1], *stream.ref_vectors)
            np.testing.assert_allclose(A, quat_to_attitude(truth.q[k]), atol=1e-9)

    def test_obs_set_shape_checks(self):
        with pytest.raises(ValueError):
            VectorObsSet(0.0, np.zeros((2, 3)), np.eye(3), np.ones(3))
        with pytest.raises(ValueError):
            VectorObsSet(0.0, np.zeros((3, 3)), np.eye(3), np.ones(2))


class TestStream:
    def test_schedule(self):
        cfg = SimConfig(duration=5.0, gyro_rate=10.0, obs_rate=2.0)
        truth, stream = simulate_trial(cfg, 0)
        assert stream.gyro.shape == (50, 3)
        np.testing.assert_array_equal(stream.obs_index, np.arange(0, 51, 5))
        np.testing.assert_array_equal(stream.obs_t, truth.t[stream.obs_index])
        assert stream.body_vectors.shape == (11, 2, 3)
        assert stream.obs_t[2] == 1.0

    def test_streams_independent_of_each_other(self):
        # changing the obs noise must not perturb the gyro draws
        cfg = SimConfig(duration=5.0)
        quiet_obs = dataclasses.replace(cfg, noise=dataclasses.replace(cfg.noise, sigma_obs=0.0))
        _, a = simulate_trial(cfg, 1)
        _, b = simulate_trial(quiet_obs, 1)
        np.testing.assert_array_equal(a.gyro, b.gyro)

    def test_measurements_replayable(self):
        cfg = SimConfig(duration=5.0, seed=9)
        truth = simulate_truth(cfg, trial_rngs(9, 0)["truth"])
        s1 = simulate_measurements(cfg, truth, np.random.default_rng(1), np.random.default_rng(2))
        s2 = simulate_measurements(cfg, truth, np.random.default_rng(1), np.random.default_rng(2))
        assert s1.gyro.tobytes() == s2.gyro.tobytes()
        assert s1.body_vectors.tobytes() == s2.body_vectors.tobytes()


@pytest.mark.parametrize(
    "change, match",
    [
        ({"duration": -1.0}, "duration"),
        ({"obs_rate": 3.0}, "integer"),
        ({"obs_rate": 20.0}, "exceed"),
        ({"ref_vectors": ((2.0, 0, 0),)}, "unit norm"),
        ({"initial_attitude": (0, 0, 0, 2.0)}, "unit quaternion"),
        ({"seed": -1}, "seed"),
        ({"noise": NoiseParams(sigma_v=-1.0)}, "sigma_v"),
        ({"noise": NoiseParams(sigma_obs=(1e-3, 1e-3, 1e-3))}, "sigma_obs"),
        ({"motion": MotionProfile(kind="tumbling")}, "motion"),
    ],
)
def test_config_errors(change, match):
    cfg = dataclasses.replace(SimConfig(), **change)
    with pytest.raises(ConfigError, match=match):
        cfg.validate()
