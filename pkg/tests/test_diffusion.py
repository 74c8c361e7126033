"""Space transform, bridges, joint pseudo-density, and the MC oracle."""

import math

import numpy as np
import pytest

from radonlik import argmax_invariance, check_proportionality, likelihood_curve
from radonlik.diffusion import (MEASURE_OBS_BRIDGE, MEASURE_OBS_BRIDGE_TILTED,
                                BridgeSegment, BridgeSet, ObservationSet, SDESpec,
                                _bridge_rows, add_linear, brownian_drift_spec,
                                diffusion_model_family, drift_integral, invert_lamperti,
                                lamperti, lamperti_derivative, logistic_spec, mle_theta,
                                obs_bridge_log_density, observations_from_csv,
                                observations_to_csv, ou_exact_transition_density,
                                ou_spec, remove_linear, sample_bridge_set,
                                sample_brownian_bridge, simulate_ou,
                                transform_observations, transition_density_mc,
                                unit_drift, unit_drift_derivative)

LOG_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)


def generic(spec: SDESpec) -> SDESpec:
    """Strip the closed forms so the quadrature/bracketing paths are used."""
    from dataclasses import replace
    return replace(spec, eta=None, eta_inv=None, alpha_fn=None, dalpha_dx=None,
                   drift_integral_fn=None)


class TestLamperti:
    def test_unit_sigma_is_identity(self):
        spec = brownian_drift_spec()
        assert lamperti(spec, 1.7, 0.5) == pytest.approx(1.7)

    def test_constant_sigma_is_linear(self):
        spec = ou_spec(sigma0=2.0)
        assert lamperti(spec, 3.0, 1.0) == pytest.approx(1.5)
        assert lamperti_derivative(spec, 3.0, 1.0) == pytest.approx(0.5)
        assert lamperti_derivative(brownian_drift_spec(), 3.0, 1.0) == 1.0

    def test_multiplicative_sigma_gives_log(self):
        spec = logistic_spec()
        assert lamperti(spec, 4.0, 1.0) == pytest.approx(math.log(4.0))
        assert lamperti_derivative(spec, 4.0, 1.0) == pytest.approx(0.25)

    def test_quadrature_route_matches_closed_form(self):
        spec = logistic_spec()
        got = lamperti(generic(spec), 4.0, 1.0)
        assert got == pytest.approx(math.log(4.0), abs=1e-10)

    def test_inversion_round_trip(self):
        spec = generic(logistic_spec())
        x = lamperti(spec, 2.5, 0.7)
        assert invert_lamperti(spec, x, 0.7) == pytest.approx(2.5, abs=1e-9)

    def test_sigma_derivative_matches_finite_differences(self):
        for spec in (ou_spec(1.3), logistic_spec()):
            y, th, h = 1.5, 0.8, 1e-6
            fd = (spec.sigma(y + h, th) - spec.sigma(y - h, th)) / (2 * h)
            got = spec.dsigma_dy(y, th)
            assert got == pytest.approx(fd, rel=1e-5, abs=1e-7)

    def test_transform_is_strictly_monotone_in_y(self):
        obs = ObservationSet(times=(0.0, 1.0, 2.0), values=(0.5, 2.0, 1.0))
        trans = transform_observations(logistic_spec(), obs, 0.9)
        order_y = np.argsort(obs.values)
        order_x = np.argsort(trans.values)
        assert np.array_equal(order_y, order_x)


class TestUnitDrift:
    def test_unit_sigma_keeps_raw_drift(self):
        spec = brownian_drift_spec()
        assert unit_drift(spec, 0.3, 2.0) == pytest.approx(2.0)

    def test_mean_reverting_case(self):
        spec = ou_spec()
        assert unit_drift(spec, 1.5, 2.0) == pytest.approx(-3.0)

    def test_zero_drift_multiplicative_sigma(self):
        # a = 0 and sigma(u) = u: the transformed drift is the constant -1/2
        spec = SDESpec(name="gbm0", drift=lambda y, th: 0.0, sigma=lambda y, th: y,
                       dsigma_dy=lambda y, th: 1.0, state=(1e-9, math.inf), base_point=1.0)
        assert unit_drift(spec, 0.4, 1.0) == pytest.approx(-0.5, abs=1e-9)

    def test_generic_route_matches_closed_form(self):
        spec = logistic_spec()
        got = unit_drift(generic(spec), 0.6, 1.1)
        assert got == pytest.approx(spec.alpha_fn(0.6, 1.1), abs=1e-9)

    def test_derivative_central_difference(self):
        spec = logistic_spec()
        got = unit_drift_derivative(generic(spec), 0.4, 0.9)
        assert got == pytest.approx(spec.dalpha_dx(0.4, 0.9), abs=1e-5)


class TestDriftIntegral:
    def test_mean_reverting_closed_form(self):
        assert drift_integral(ou_spec(), 2.0, 1.0) == pytest.approx(-2.0)

    def test_zero_at_origin(self):
        assert drift_integral(ou_spec(), 0.0, 1.7) == 0.0

    def test_zero_drift_integral_vanishes(self):
        spec = SDESpec(name="flat", drift=lambda y, th: 0.0, sigma=lambda y, th: 1.0,
                       dsigma_dy=lambda y, th: 0.0, state=(-math.inf, math.inf),
                       base_point=0.0, eta=lambda y, th: y, eta_inv=lambda x, th: x,
                       alpha_fn=lambda x, th: 0.0 * x, dalpha_dx=lambda x, th: 0.0 * x)
        for u in (-1.0, 0.0, 2.5):
            assert drift_integral(spec, u, 0.0) == pytest.approx(0.0, abs=1e-12)

    def test_quadrature_matches_closed_form(self):
        spec = logistic_spec()
        got = drift_integral(generic(spec), 1.3, 0.8)
        assert got == pytest.approx(spec.drift_integral_fn(1.3, 0.8), abs=1e-9)


class TestBridgeTransform:
    def test_linear_path_maps_to_zero(self):
        x0, x1 = 0.4, 1.2
        path = add_linear(np.zeros(9), x0, x1)
        back = remove_linear(path, x0, x1)
        assert back[0] == 0.0 and back[-1] == 0.0
        assert np.max(np.abs(back)) <= 1e-14

    def test_zero_endpoints_is_identity(self):
        values = np.sin(np.linspace(0.0, 3.0, 11))
        assert np.array_equal(remove_linear(values, 0.0, 0.0), values)

    def test_round_trip_tight(self):
        rng = np.random.default_rng(3)
        values = rng.normal(size=33)
        back = remove_linear(add_linear(values, -0.7, 2.2), -0.7, 2.2)
        assert np.max(np.abs(back - values)) <= 1e-14


class TestBridgeSampling:
    def test_endpoints_exactly_zero(self):
        values = sample_brownian_bridge(1.0, 0.125, seed=0)
        assert values[0] == 0.0 and values[-1] == 0.0

    def test_step_equal_to_length_leaves_endpoints_only(self):
        values = sample_brownian_bridge(1.0, 1.0, seed=1)
        assert np.array_equal(values, np.zeros(2))

    def test_step_must_divide_length(self):
        with pytest.raises(ValueError):
            sample_brownian_bridge(1.0, 0.3, seed=0)

    def test_seed_reproducibility(self):
        a = sample_brownian_bridge(2.0, 0.25, seed=11)
        b = sample_brownian_bridge(2.0, 0.25, seed=11)
        assert np.array_equal(a, b)

    def test_midpoint_variance(self):
        # bridge variance at s on [0, T] is s (T - s) / T: 1/4 at the middle
        draws = 10 ** 5
        rows = _bridge_rows(np.random.default_rng(42), draws, 2, 0.5)
        var = float(np.var(rows[:, 1], ddof=1))
        se = 0.25 * math.sqrt(2.0 / (draws - 1))
        assert abs(var - 0.25) <= 3.0 * se

    def test_bridge_set_requires_zero_endpoints(self):
        seg = BridgeSegment(t0=0.0, t1=1.0, values=np.array([0.1, 0.0]))
        with pytest.raises(ValueError):
            BridgeSet(segments=(seg,))


class TestJointDensity:
    def make_obs(self):
        return ObservationSet(times=(0.0, 0.5, 1.0, 1.8), values=(0.0, 0.3, -0.2, 0.5))

    def test_zero_drift_reduces_to_gaussian_sum(self):
        obs = self.make_obs()
        bridges = sample_bridge_set(obs.times, n_steps=40, seed=2)
        spec = brownian_drift_spec()
        got = obs_bridge_log_density(spec, obs, bridges, 0.0)
        want = sum(-0.5 * ((obs.values[i] - obs.values[i - 1])
                           / math.sqrt(obs.times[i] - obs.times[i - 1])) ** 2 - LOG_SQRT_2PI
                   for i in range(1, 4))
        assert got == want

    def test_vanishing_mean_reversion_matches_zero_drift(self):
        obs = self.make_obs()
        bridges = sample_bridge_set(obs.times, n_steps=40, seed=2)
        flat = obs_bridge_log_density(brownian_drift_spec(), obs, bridges, 0.0)
        nearly = obs_bridge_log_density(ou_spec(), obs, bridges, 1e-9)
        assert nearly == pytest.approx(flat, abs=1e-8)

    def test_missing_bridge_segment_rejected(self):
        obs = self.make_obs()
        bridges = sample_bridge_set(obs.times[:-1], n_steps=40, seed=2)
        with pytest.raises(ValueError):
            obs_bridge_log_density(ou_spec(), obs, bridges, 1.0)

    def test_fixed_bridge_proportionality(self):
        obs = self.make_obs()
        bridges = sample_bridge_set(obs.times, n_steps=64, seed=9)
        family = diffusion_model_family(ou_spec(), tuple(np.linspace(0.25, 2.0, 8)))
        omega = (obs, bridges)
        c1 = likelihood_curve(family, MEASURE_OBS_BRIDGE, omega)
        c2 = likelihood_curve(family, MEASURE_OBS_BRIDGE_TILTED, omega)
        report = check_proportionality(c1, c2, 1e-10)
        assert report.passed and argmax_invariance(c1, c2)


class TestTransitionDensityMC:
    def test_zero_drift_is_exact_with_zero_variance(self):
        spec = SDESpec(name="flat", drift=lambda y, th: 0.0, sigma=lambda y, th: 1.0,
                       dsigma_dy=lambda y, th: 0.0, state=(-math.inf, math.inf),
                       base_point=0.0, eta=lambda y, th: y, eta_inv=lambda x, th: x,
                       alpha_fn=lambda x, th: 0.0 * x, dalpha_dx=lambda x, th: 0.0 * x)
        est, se = transition_density_mc(spec, 0.0, 1.0, 0.0, 0.5, 200, 0.05, seed=1)
        want = math.exp(-0.5 * 0.25) / math.sqrt(2.0 * math.pi)
        assert est == pytest.approx(want, abs=1e-14)
        assert se == pytest.approx(0.0, abs=1e-14)

    def test_matches_exact_mean_reverting_density(self):
        est, se = transition_density_mc(ou_spec(), 1.0, 1.0, 0.0, 0.5, 20000, 2e-3, seed=3)
        exact = ou_exact_transition_density(1.0, 1.0, 0.0, 0.5)
        assert abs(est - exact) <= 3.0 * se
        assert abs(est - exact) / exact < 0.02

    def test_symmetric_under_sign_flip(self):
        est1, se1 = transition_density_mc(ou_spec(), 1.0, 1.0, 0.4, -0.3, 20000, 2e-3, seed=5)
        est2, se2 = transition_density_mc(ou_spec(), 1.0, 1.0, -0.4, 0.3, 20000, 2e-3, seed=6)
        assert abs(est1 - est2) <= 3.0 * math.hypot(se1, se2)

    def test_replicate_floor(self):
        with pytest.raises(ValueError):
            transition_density_mc(ou_spec(), 1.0, 1.0, 0.0, 0.5, 50, 1e-2, seed=0)


class TestMLE:
    def test_single_point_grid(self):
        obs = ObservationSet(times=(0.0, 0.5), values=(0.2, 0.1))
        idx, curve = mle_theta(ou_spec(), obs, (0.8,), 200, 0.02, seed=1)
        assert idx == frozenset({0}) and len(curve) == 1

    def test_argmax_close_to_exact_density_argmax(self):
        grid = tuple(np.linspace(0.25, 2.0, 8))
        obs = simulate_ou(1.0, 0.0, tuple(np.arange(51) * 0.5), seed=17)
        exact_curve = [sum(math.log(ou_exact_transition_density(th, 0.5, obs.values[i],
                                                                obs.values[i + 1]))
                           for i in range(50)) for th in grid]
        exact_idx = int(np.argmax(exact_curve))
        idx, _ = mle_theta(ou_spec(), obs, grid, 400, 0.01, seed=23)
        assert min(abs(i - exact_idx) for i in idx) <= 1

    def test_doubling_replicates_keeps_argmax(self):
        grid = tuple(np.linspace(0.25, 2.0, 8))
        obs = simulate_ou(1.0, 0.0, tuple(np.arange(21) * 0.5), seed=29)
        idx1, _ = mle_theta(ou_spec(), obs, grid, 300, 0.01, seed=31)
        idx2, _ = mle_theta(ou_spec(), obs, grid, 600, 0.01, seed=31)
        assert idx1 == idx2


class TestObservationIO:
    def test_csv_round_trip(self, tmp_path):
        obs = simulate_ou(1.0, 0.3, (0.0, 0.4, 1.1), seed=2)
        path = tmp_path / "obs.csv"
        observations_to_csv(obs, path)
        back = observations_from_csv(path)
        assert back.times == obs.times and back.values == obs.values

    def test_times_must_increase(self):
        with pytest.raises(ValueError):
            ObservationSet(times=(0.0, 0.0), values=(1.0, 2.0))
