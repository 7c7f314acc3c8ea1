import math
import warnings

import numpy as np
import pytest
from scipy.integrate import quad

from blochfb import (
    QuadratureConfig,
    ReservoirParams,
    ResourceLimitError,
    build_coefficient_table,
    damping_coefficient,
    diffusion_coefficient,
    dissipation_kernel,
    markov_rates,
    noise_kernel,
    spectral_density,
)


# ---------------------------------------------------------------- oracles

def noise_kernel_quadosc(tau, p):
    """Second, independent rule for k(tau): mpmath oscillatory quadrature."""
    import mpmath as mp

    mp.mp.dps = 25

    def f(w):
        J = (2 * p.gamma0 / mp.pi) * w * p.omega_c**2 / (p.omega_c**2 + w**2)
        c = 1 if p.kBT == 0 else mp.coth(w / (2 * p.kBT))
        return 2 * J * c * mp.cos(w * tau)

    return float(mp.quadosc(f, [0, mp.inf], omega=tau))


def diffusion_nested_oracle(t, p):
    """Brute-force route for Delta(t): tau-integral of the noise kernel."""
    def k(tau):
        def f(w):
            pref = (4.0 * p.gamma0 / math.pi) * p.omega_c**2 / (p.omega_c**2 + w * w)
            if p.kBT == 0.0:
                return pref * w
            x = w / (2.0 * p.kBT)
            wcoth = 2.0 * p.kBT * (1.0 + x * x / 3.0) if x < 1e-4 else w / math.tanh(x)
            return pref * wcoth

        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            v, _ = quad(f, 0.0, np.inf, weight="cos", wvar=tau,
                        limlst=300, limit=400, epsabs=1e-13, epsrel=1e-13)
        return v

    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        v, _ = quad(lambda tau: k(tau) * math.cos(p.omega0 * tau), 0.0, t,
                    limit=400, epsabs=1e-12, epsrel=1e-12)
    return p.alpha_sq * v


def damping_quadrature_oracle(t, p):
    v, _ = quad(
        lambda tau: dissipation_kernel(tau, p) * math.sin(p.omega0 * tau),
        0.0, t, limit=300, epsabs=1e-16, epsrel=1e-13,
    )
    return p.alpha_sq * v


# Frozen from diffusion_nested_oracle (see above), which integrates
# k(tau) cos(w0 tau) directly instead of swapping the integration order.
DELTA_FROZEN = [
    # (t, r, kBT, value)
    (1.0, 0.5, 10.0, 0.13549878343574026),
    (5.0, 0.5, 10.0, 0.06561278708294),
    (4.7, 0.1, 10.0, -0.020756098568441947),
    (3.0, 0.5, 1.0, 0.01087929065685384),
    (2.0, 0.1, 0.0, 0.000324383187827519),
]


# ---------------------------------------------------------- spectral density

class TestSpectralDensity:
    def test_zero_frequency(self, params):
        assert spectral_density(0.0, params) == 0.0

    def test_value_at_cutoff(self):
        p = ReservoirParams(omega_c=0.1)
        assert spectral_density(0.1, p) == pytest.approx(
            p.gamma0 * p.omega_c / math.pi, rel=1e-14
        )
        assert spectral_density(0.1, p) == pytest.approx(0.031831, rel=1e-4)

    def test_argmax_at_cutoff(self, params):
        w = np.linspace(1e-4, 20 * params.omega_c, 40001)
        peak = w[np.argmax(spectral_density(w, params))]
        assert peak == pytest.approx(params.omega_c, rel=1e-3)

    def test_decays_at_infinity(self, params):
        assert spectral_density(1e6, params) < 1e-5

    def test_negative_frequency_rejected(self, params):
        with pytest.raises(ValueError):
            spectral_density(-0.1, params)


class TestReservoirParams:
    @pytest.mark.parametrize(
        "kwargs",
        [
            {"omega0": 0.0},
            {"gamma0": -1.0},
            {"omega_c": 0.0},
            {"kBT": -0.1},
            {"alpha_sq": -1e-3},
            {"M": -0.05},
            {"eta": 1.5},
        ],
    )
    def test_invalid_parameters_rejected(self, kwargs):
        with pytest.raises(ValueError):
            ReservoirParams(**kwargs)

    def test_ratio(self):
        assert ReservoirParams.from_ratio(0.25).ratio == pytest.approx(0.25)


# ------------------------------------------------------- dissipation kernel

class TestDissipationKernel:
    def test_short_time_limit(self, params):
        expect = 2.0 * params.gamma0 * params.omega_c**2
        assert dissipation_kernel(1e-12, params) == pytest.approx(expect, rel=1e-9)

    def test_one_cutoff_time(self, params):
        tau = 1.0 / params.omega_c
        expect = 2.0 * params.gamma0 * params.omega_c**2 * math.exp(-1.0)
        assert dissipation_kernel(tau, params) == pytest.approx(expect, rel=1e-14)

    def test_strictly_decreasing(self, params):
        taus = np.linspace(0.01, 30.0, 300)
        vals = dissipation_kernel(taus, params)
        assert np.all(np.diff(vals) < 0)

    @pytest.mark.parametrize("tau", [0.0, -1.0])
    def test_domain_error(self, params, tau):
        with pytest.raises(ValueError):
            dissipation_kernel(tau, params)

    def test_matches_sine_transform_quadrature(self, params):
        # closed form vs direct numerical sine transform of J
        # (weight='sin' integrates f(w) sin(w tau), so pass the plain density)
        for tau in (0.01, 0.5, 1.0 / params.omega_c, 5.0):
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                ref, _ = quad(
                    lambda w: 2.0 * spectral_density(w, params),
                    0.0, np.inf, weight="sin", wvar=tau, limlst=200,
                    epsabs=1e-12, epsrel=1e-12,
                )
            assert dissipation_kernel(tau, params) == pytest.approx(ref, rel=1e-6)


# ------------------------------------------------------------- noise kernel

class TestNoiseKernel:
    def test_high_temperature_closed_form(self):
        p = ReservoirParams.from_ratio(0.5, kBT=100.0)
        for tau_wc in np.linspace(0.1, 5.0, 8):
            tau = tau_wc / p.omega_c
            expect = 4.0 * p.gamma0 * p.kBT * p.omega_c * math.exp(-p.omega_c * tau)
            assert noise_kernel(tau, p) == pytest.approx(expect, rel=1e-2)

    def test_zero_temperature_two_rules_agree(self):
        p = ReservoirParams.from_ratio(0.5, kBT=0.0)
        tau = 10.0 / p.omega_c
        a = noise_kernel(tau, p)
        b = noise_kernel_quadosc(tau, p)
        assert a == pytest.approx(b, rel=1e-6)

    def test_finite_temperature_two_rules_agree(self, params):
        tau = 2.0
        assert noise_kernel(tau, params) == pytest.approx(
            noise_kernel_quadosc(tau, params), rel=1e-6
        )

    def test_tau_zero_rejected_all_temperatures(self):
        # the 1/omega envelope of J coth makes k(0) log-divergent for every
        # temperature, so tau = 0 is a domain error even at kBT > 0
        for kbt in (0.0, 10.0):
            with pytest.raises(ValueError):
                noise_kernel(0.0, ReservoirParams.from_ratio(0.5, kBT=kbt))


# ----------------------------------------------------- diffusion coefficient

class TestDiffusionCoefficient:
    def test_zero_time(self, params):
        assert diffusion_coefficient(0.0, params) == 0.0

    def test_negative_time_rejected(self, params):
        with pytest.raises(ValueError):
            diffusion_coefficient(-0.5, params)

    @pytest.mark.parametrize("t,r,kbt,expect", DELTA_FROZEN)
    def test_frozen_nested_oracle_values(self, t, r, kbt, expect):
        p = ReservoirParams.from_ratio(r, kBT=kbt)
        got = diffusion_coefficient(t, p)
        assert got == pytest.approx(expect, rel=1e-4, abs=1e-9)

    def test_live_nested_oracle(self, params):
        got = diffusion_coefficient(1.5, params)
        assert got == pytest.approx(diffusion_nested_oracle(1.5, params), rel=1e-4)

    def test_high_temperature_formula(self):
        # scale-relative comparison: the formula crosses zero inside the
        # window, so pointwise relative error is ill-defined near the roots
        for r in (0.1, 0.5):
            p = ReservoirParams.from_ratio(r, kBT=100.0)
            ts = np.linspace(0.5, 20.0, 40)
            w0, wc = p.omega0, p.omega_c
            ht = (
                p.alpha_sq * 4.0 * p.gamma0 * p.kBT * wc
                * (wc - np.exp(-wc * ts) * (wc * np.cos(w0 * ts) - w0 * np.sin(w0 * ts)))
                / (wc * wc + w0 * w0)
            )
            got = np.array([diffusion_coefficient(t, p) for t in ts])
            scale = np.max(np.abs(ht))
            assert np.max(np.abs(got - ht)) <= 1e-2 * scale

    def test_goes_negative_memory_signature(self):
        p = ReservoirParams.from_ratio(0.1, kBT=10.0)
        assert diffusion_coefficient(4.7, p) < 0.0

    def test_refinement_converges_below_reported_error(self, params):
        tab1 = build_coefficient_table(params, 5.0, 0.05)
        tab2 = build_coefficient_table(
            params, 5.0, 0.05, qcfg=QuadratureConfig(abs_tol=0.5e-10)
        )
        change = np.abs(tab2.delta - tab1.delta)
        assert np.all(change <= np.maximum(tab1.quad_error, 1e-15))
        assert tab1.quad_converged


# ------------------------------------------------------ damping coefficient

class TestDampingCoefficient:
    def test_zero_time(self, params):
        assert damping_coefficient(0.0, params) == 0.0

    def test_negative_time_rejected(self, params):
        with pytest.raises(ValueError):
            damping_coefficient(-1e-9, params)

    def test_long_time_limit(self):
        p = ReservoirParams.from_ratio(0.1)
        r = p.ratio
        expect = p.alpha_sq * 2.0 * p.gamma0 * p.omega0 * r * r / (1.0 + r * r)
        assert damping_coefficient(1e4, p) == pytest.approx(expect, rel=1e-10)

    @pytest.mark.parametrize("r", [0.1, 0.5, 3.0])
    def test_closed_form_vs_quadrature(self, r):
        p = ReservoirParams.from_ratio(r, kBT=10.0)
        for t in (0.1, 1.0, 7.5, 30.0):
            assert damping_coefficient(t, p) == pytest.approx(
                damping_quadrature_oracle(t, p), rel=1e-8
            )

    def test_nonnegative_on_grid(self):
        for r in (0.1, 0.5, 3.0):
            p = ReservoirParams.from_ratio(r)
            ts = np.linspace(0.0, 50.0, 2000)
            assert np.all(damping_coefficient(ts, p) >= 0.0)


# ------------------------------------------------------------- markov rates

class TestMarkovRates:
    def test_gamma_inf_example(self):
        p = ReservoirParams.from_ratio(0.1, kBT=10.0)
        _, g_inf = markov_rates(p)
        assert g_inf == pytest.approx(0.01 * 2.0 * (0.01 / 1.01), rel=1e-12)
        assert g_inf == pytest.approx(1.9802e-4, rel=1e-4)

    def test_ordering(self):
        for kbt in (0.0, 1.0, 10.0):
            d_inf, g_inf = markov_rates(ReservoirParams.from_ratio(0.5, kBT=kbt))
            assert d_inf >= g_inf >= 0.0

    def test_high_temperature_linear_growth(self):
        d1, _ = markov_rates(ReservoirParams.from_ratio(0.5, kBT=100.0))
        d2, _ = markov_rates(ReservoirParams.from_ratio(0.5, kBT=200.0))
        assert d2 / d1 == pytest.approx(2.0, rel=1e-3)

    def test_delta_approaches_limit(self, params):
        d_inf, _ = markov_rates(params)
        assert diffusion_coefficient(200.0, params) == pytest.approx(d_inf, rel=2e-2)


# ------------------------------------------------------------------- tables

class TestCoefficientTable:
    def test_combination_identities_exact(self, table):
        assert np.array_equal(table.gamma1 - table.gamma2, 2.0 * table.gamma)
        assert np.array_equal(table.gamma1 + table.gamma2, 2.0 * table.delta)

    def test_first_row_zero(self, table):
        assert table.delta[0] == 0.0 and table.gamma[0] == 0.0

    def test_grid(self, table):
        assert table.t_grid[0] == 0.0
        assert table.t_max == pytest.approx(16.0)
        assert np.allclose(np.diff(table.t_grid), table.dt)

    def test_memory_signature_present(self):
        p = ReservoirParams.from_ratio(0.1, kBT=10.0)
        tab = build_coefficient_table(p, 20.0, 0.05)
        assert np.min(tab.delta) < 0.0

    def test_markovian_table_matches_rates(self, params):
        rates = markov_rates(params)
        tab = build_coefficient_table(params, 10.0, 0.1, constant_rates=rates)
        np.testing.assert_allclose(tab.delta, rates[0], rtol=1e-15)
        np.testing.assert_allclose(tab.gamma, rates[1], rtol=1e-15)
        assert np.array_equal(tab.gamma1 - tab.gamma2, 2.0 * tab.gamma)

    def test_rates_at_interpolates(self, table, params):
        d, g = table.rates_at(1.005)
        assert d == pytest.approx(0.5 * (table.delta[100] + table.delta[101]))
        assert g == pytest.approx(0.5 * (table.gamma[100] + table.gamma[101]))
        with pytest.raises(ValueError):
            table.rates_at(100.0)

    def test_immutable(self, table):
        with pytest.raises(ValueError):
            table.delta[0] = 1.0

    def test_resource_budget(self, params):
        with pytest.raises(ResourceLimitError) as err:
            build_coefficient_table(params, 1000.0, 1e-6)
        assert err.value.requested > err.value.available

    def test_invalid_grid(self, params):
        with pytest.raises(ValueError):
            build_coefficient_table(params, -1.0, 0.1)
        with pytest.raises(ValueError):
            build_coefficient_table(params, 1.0, 2.0)
