import math

import numpy as np
import pytest

from blochfb import (
    BlochState,
    ControlInput,
    IntegrationError,
    IntegratorConfig,
    Mode,
    OpenLoopPolicy,
    ReservoirParams,
    ZERO_POLICY,
    build_coefficient_table,
    em_step,
    integrate_deterministic,
    markov_rates,
    simulate,
    wiener_increments,
)


class TestWienerIncrements:
    def test_moments(self):
        dt = 1e-3
        n = 10**6
        w = wiener_increments(n, dt, master_seed=1234, trajectory_index=0)
        assert abs(np.mean(w)) <= 4.0 * math.sqrt(dt / n)
        assert np.var(w) == pytest.approx(dt, rel=1e-2)

    def test_deterministic(self):
        a = wiener_increments(1000, 0.01, 77, 3, stream=2)
        b = wiener_increments(1000, 0.01, 77, 3, stream=2)
        np.testing.assert_array_equal(a, b)

    def test_streams_disjoint(self):
        base = wiener_increments(256, 0.01, 77, 3, stream=0)
        for other in (
            wiener_increments(256, 0.01, 77, 4, stream=0),
            wiener_increments(256, 0.01, 77, 3, stream=1),
            wiener_increments(256, 0.01, 78, 3, stream=0),
        ):
            assert not np.array_equal(base, other)

    def test_validation(self):
        with pytest.raises(ValueError):
            wiener_increments(-1, 0.01, 0, 0)
        with pytest.raises(ValueError):
            wiener_increments(10, 0.0, 0, 0)
        with pytest.raises(ValueError):
            wiener_increments(10, 0.01, 0, 2**32)


class TestIntegratorConfig:
    def test_validation(self):
        with pytest.raises(ValueError):
            IntegratorConfig(dt=0.0)
        with pytest.raises(ValueError):
            IntegratorConfig(dt=2.0, t_max=1.0)
        with pytest.raises(ValueError):
            IntegratorConfig(scheme="milstein")
        with pytest.raises(ValueError):
            IntegratorConfig(clamp_policy="ignore")
        with pytest.raises(ValueError):
            IntegratorConfig(master_seed=2**64)

    def test_steps(self):
        assert IntegratorConfig(dt=0.1, t_max=1.0).n_steps == 10


class TestEmStep:
    def test_euler_precession_limit(self, zero_rate_table):
        p0 = ReservoirParams.from_ratio(0.5, kBT=10.0, alpha_sq=0.0, M=0.0)
        s = BlochState(0.5, 0.0, 0.0)
        dt = 1e-3
        out = em_step(s, 0.0, ControlInput(), 0.0, dt, zero_rate_table, p0)
        assert out.x == pytest.approx(0.5)
        assert out.y == pytest.approx(0.5 * p0.omega0 * dt)
        assert out.z == 0.0

    def test_pole_noise_free(self, zero_rate_table, zero_rate_params):
        out = em_step(
            BlochState(0, 0, 1), 0.0, ControlInput(), 0.3, 1e-3,
            zero_rate_table, zero_rate_params,
        )
        # diffusion vanishes at the pole; only deterministic dephasing acts
        assert out.x == 0.0 and out.y == 0.0
        assert out.z == pytest.approx(1.0)

    def test_bit_exact_rerun(self, table, params, s0):
        a = em_step(s0, 0.7, ControlInput(0.1, 0.2), 0.013, 1e-3, table, params)
        b = em_step(s0, 0.7, ControlInput(0.1, 0.2), 0.013, 1e-3, table, params)
        assert (a.x, a.y, a.z) == (b.x, b.y, b.z)

    def test_matches_path_loop_step(self, table, params, s0):
        cfg = IntegratorConfig(dt=1e-3, t_max=1e-3, master_seed=5)
        rec = simulate(params, table, cfg, ZERO_POLICY, Mode.NONMARKOVIAN, s0)
        stepped = em_step(
            s0, 0.0, ControlInput(), float(rec.noise[1]), 1e-3, table, params
        )
        np.testing.assert_array_equal(
            rec.states[1], [stepped.x, stepped.y, stepped.z]
        )


class TestSimulate:
    def test_record_shapes_and_anchors(self, params, table, s0):
        cfg = IntegratorConfig(dt=1e-3, t_max=2.0, master_seed=42)
        rec = simulate(params, table, cfg, ZERO_POLICY, Mode.NONMARKOVIAN, s0)
        n = cfg.n_steps
        for arr in (rec.times, rec.noise, rec.record, rec.lambda_t):
            assert arr.shape == (n + 1,)
        assert rec.states.shape == (n + 1, 3)
        assert rec.controls.shape == (n + 1, 2)
        assert rec.record[0] == 0.0
        assert rec.lambda_t[0] == 1.0
        np.testing.assert_array_equal(rec.states[0], s0.as_array())

    def test_homodyne_record_reconstruction(self, params, table, s0):
        cfg = IntegratorConfig(dt=1e-3, t_max=1.0, master_seed=21)
        rec = simulate(params, table, cfg, ZERO_POLICY, Mode.NONMARKOVIAN, s0)
        c = math.sqrt(params.eta * params.M)
        dY = rec.noise[1:] + c * (-rec.states[:-1, 2] / 2.0) * cfg.dt
        np.testing.assert_allclose(np.cumsum(dY), rec.record[1:], atol=1e-15)

    def test_zero_noise_matches_deterministic_reference(self, s0):
        # M = 0 kills the diffusion; Euler-Maruyama reduces to Euler and must
        # track the RK4 reference to first order in dt
        p = ReservoirParams.from_ratio(0.5, kBT=10.0, M=0.0)
        tab = build_coefficient_table(p, 5.0, 0.01)
        cfg = IntegratorConfig(dt=1e-4, t_max=5.0, master_seed=1)
        rec = simulate(p, tab, cfg, ZERO_POLICY, Mode.NONMARKOVIAN, s0)
        ref = integrate_deterministic(s0, 1e-4, cfg.n_steps, tab, p)
        assert float(np.max(np.abs(rec.states - ref))) <= 5e-4

    def test_bitwise_rerun(self, params, table, s0):
        cfg = IntegratorConfig(dt=1e-3, t_max=3.0, master_seed=9, trajectory_index=4)
        a = simulate(params, table, cfg, ZERO_POLICY, Mode.NONMARKOVIAN, s0)
        b = simulate(params, table, cfg, ZERO_POLICY, Mode.NONMARKOVIAN, s0)
        np.testing.assert_array_equal(a.states, b.states)
        np.testing.assert_array_equal(a.record, b.record)

    def test_markovian_mode_decay(self, params, table, s0):
        # constant-rate mode: transverse coherence decays like
        # exp(-(Delta_inf + M/2) t) up to measurement noise
        p = ReservoirParams.from_ratio(0.5, kBT=10.0, M=0.0)
        cfg = IntegratorConfig(dt=1e-3, t_max=10.0, master_seed=2)
        rec = simulate(p, table, cfg, ZERO_POLICY, Mode.MARKOVIAN, s0)
        d_inf, _ = markov_rates(p)
        assert rec.lambda_t[-1] == pytest.approx(math.exp(-d_inf * 10.0), rel=1e-2)

    def test_pole_initial_state_lambda_nan(self, zero_rate_params, zero_rate_table):
        cfg = IntegratorConfig(dt=1e-3, t_max=0.5, master_seed=3)
        rec = simulate(
            zero_rate_params, zero_rate_table, cfg, ZERO_POLICY,
            Mode.NONMARKOVIAN, BlochState(0, 0, 1),
        )
        assert np.all(np.isnan(rec.lambda_t))

    def test_horizon_beyond_table(self, params, table, s0):
        cfg = IntegratorConfig(dt=1e-3, t_max=100.0, master_seed=1)
        with pytest.raises(ValueError):
            simulate(params, table, cfg, ZERO_POLICY, Mode.NONMARKOVIAN, s0)

    def test_missing_initial_state(self, params, table):
        cfg = IntegratorConfig(dt=1e-3, t_max=1.0)
        with pytest.raises(ValueError):
            simulate(params, table, cfg, ZERO_POLICY, Mode.NONMARKOVIAN)

    def test_nonfinite_aborts_with_context(self, params, table, s0):
        # a divergent open-loop drive overflows the state
        n = 50
        huge = OpenLoopPolicy(
            dt=0.01, ux=np.full(n, 1e160), uy=np.zeros(n)
        )
        cfg = IntegratorConfig(dt=0.01, t_max=0.4, master_seed=1)
        with pytest.raises(IntegrationError) as err:
            simulate(params, table, cfg, huge, Mode.NONMARKOVIAN, s0)
        assert err.value.t >= 0.0
        assert err.value.trajectory_index == 0

    def test_clamping_counts_events(self, zero_rate_params, zero_rate_table, s0):
        # pure initial state rides the sphere; discretization overshoots
        # must be clamped, never silent
        cfg = IntegratorConfig(dt=2e-3, t_max=10.0, master_seed=8)
        rec = simulate(
            zero_rate_params, zero_rate_table, cfg, ZERO_POLICY,
            Mode.NONMARKOVIAN, s0,
        )
        assert rec.clamp_count > 0
        norms = np.linalg.norm(rec.states, axis=1)
        assert np.max(norms) <= 1.0 + 1e-12

    def test_reject_policy_resamples(self, zero_rate_params, zero_rate_table, s0):
        cfg_p = IntegratorConfig(dt=2e-3, t_max=10.0, master_seed=8)
        cfg_r = IntegratorConfig(
            dt=2e-3, t_max=10.0, master_seed=8, clamp_policy="reject_step"
        )
        a = simulate(zero_rate_params, zero_rate_table, cfg_p, ZERO_POLICY,
                     Mode.NONMARKOVIAN, s0)
        b = simulate(zero_rate_params, zero_rate_table, cfg_r, ZERO_POLICY,
                     Mode.NONMARKOVIAN, s0)
        assert b.clamp_count > 0
        # resampling changed the applied increments at clamped steps
        assert not np.array_equal(a.noise, b.noise)
        # and the resampled path still lives inside the ball
        assert np.max(np.linalg.norm(b.states, axis=1)) <= 1.0 + 1e-12

    def test_purity_preserved_at_unit_efficiency(
        self, zero_rate_params, zero_rate_table, s0
    ):
        # eta = 1 and no thermal channels: |s| = 1 is exactly preserved by
        # the continuous dynamics; the integrator may drift by O(sqrt(dt))
        cfg = IntegratorConfig(dt=1e-4, t_max=5.0, master_seed=6)
        rec = simulate(
            zero_rate_params, zero_rate_table, cfg, ZERO_POLICY,
            Mode.NONMARKOVIAN, s0,
        )
        devs = np.abs(1.0 - np.linalg.norm(rec.states, axis=1))
        assert float(np.max(devs)) <= 5e-3


class TestDeterministicIntegrator:
    def test_rotation_accuracy(self, zero_rate_table):
        p0 = ReservoirParams.from_ratio(0.5, kBT=10.0, alpha_sq=0.0, M=0.0)
        s0 = BlochState(0.6, 0.0, 0.4)
        n = 2000
        path = integrate_deterministic(s0, 0.01, n, zero_rate_table, p0)
        t = 0.01 * n
        expect = [0.6 * math.cos(t), 0.6 * math.sin(t), 0.4]
        np.testing.assert_allclose(path[-1], expect, atol=1e-9)
