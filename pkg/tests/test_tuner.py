import numpy as np
import pytest

from _support import small_sampled_graph
from bipquant.degrees import builtin_pair
from bipquant.distortion import linear_profile, uniform_profile
from bipquant.engine import BipParams, quantize
from bipquant.graph import FactorGraph, sample_graph
from bipquant.sources import derived_seeds, random_source
from bipquant.tuner import (
    GammaModel,
    TunerConfig,
    centered_positions,
    estimate_flip_probs,
    eval_gamma,
    fit_cubic,
    moving_average,
    parse_gamma_file,
    parse_gamma_model,
    run_tuning,
    serialize_gamma_file,
    serialize_gamma_model,
    tuner_step,
)

CUBIC_REF = GammaModel(0.0792, -0.0841, -0.7925, 1.3378, 10_000)


def test_moving_average():
    np.testing.assert_allclose(moving_average(np.full(50, 0.3), 11), 0.3, rtol=1e-14)
    np.testing.assert_allclose(moving_average([0, 3, 0, 0], 3), [1.5, 1.0, 1.0, 0.0])
    with pytest.raises(ValueError):
        moving_average([1, 2], 2)


def test_tuner_step_examples():
    np.testing.assert_allclose(tuner_step([1.0, 1.0], [0.2, 0.1], [0.1, 0.1], 3.0), [1.15, 0.85])
    g = np.array([0.7, 1.1, 1.3])
    p = np.array([0.1, 0.2, 0.3])
    np.testing.assert_array_equal(tuner_step(g, p, p, 3.0), g)
    np.testing.assert_allclose(tuner_step(g, p + 0.05, p, 3.0), g, atol=1e-15)


def test_tuner_step_mean_and_clamp():
    rng = np.random.default_rng(0)
    g = rng.uniform(1, 2, 100)
    new = tuner_step(g, rng.uniform(0, 0.1, 100), rng.uniform(0, 0.1, 100), 3.0)
    assert new.mean() == pytest.approx(g.mean(), abs=1e-12)
    clamped = tuner_step([0.01, 1.0], [0.0, 0.5], [0.5, 0.0], 3.0)
    assert clamped[0] == 0.0


def test_reference_cubic_model():
    g = eval_gamma(CUBIC_REF, 10_000)
    assert g[5000] == pytest.approx(1.3378, abs=1e-12)
    assert np.mean(np.diff(g) < 0) > 0.8
    assert g[0] > g[-1]


def test_centered_positions():
    x = centered_positions(10_000)
    assert x[5000] == 0.0
    assert x[0] == pytest.approx(-0.5 / 0.2886)


def test_fit_recovers_cubic():
    n = 997
    model = GammaModel(0.05, -0.1, -0.6, 1.2, n)
    fit = fit_cubic(eval_gamma(model, n), n)
    np.testing.assert_allclose(fit.coefficients, model.coefficients, atol=1e-9)
    np.testing.assert_allclose(eval_gamma(fit, n), eval_gamma(model, n), atol=1e-12)


def test_fit_constant():
    fit = fit_cubic(np.full(200, 0.9))
    np.testing.assert_allclose(fit.coefficients, [0, 0, 0, 0.9], atol=1e-12)


def test_model_and_gamma_file_io():
    text = serialize_gamma_model(CUBIC_REF)
    assert parse_gamma_model(text) == CUBIC_REF
    assert parse_gamma_model("0.0792 -0.0841 -0.7925 1.3378 10000") == CUBIC_REF
    g = np.array([1.07, 0.5, 0.0])
    np.testing.assert_array_equal(parse_gamma_file(serialize_gamma_file(g), 3), g)
    with pytest.raises(ValueError):
        parse_gamma_model("1 2 3")
    with pytest.raises(ValueError):
        parse_gamma_file("1.0 -2.0")
    with pytest.raises(ValueError):
        parse_gamma_file("1.0 2.0", n=3)


def test_config_validation():
    with pytest.raises(ValueError):
        TunerConfig(window=100)
    with pytest.raises(ValueError):
        TunerConfig(k=0)


def test_derived_seeds_and_sources():
    assert derived_seeds(3, 4) == derived_seeds(3, 4)
    assert len(set(derived_seeds(3, 50))) == 50
    np.testing.assert_array_equal(random_source(100, 7), random_source(100, 7))
    assert not np.array_equal(random_source(100, 7), random_source(100, 8))


def test_flip_estimate_zero_when_no_flips():
    # a lone check per bit reproduces any source exactly
    g = FactorGraph.from_adjacency(5, [[i] for i in range(5)])
    p = BipParams.for_graph(g, 1.0)
    est = estimate_flip_probs(g, np.ones(5), p, k=1, seed=0, window=3)
    assert np.all(est == 0.0)


@pytest.fixture(scope="module")
def half_rate():
    rho, lam = builtin_pair(0.5)
    g = sample_graph(2000, 1000, rho, lam, seed=21)
    return g, BipParams.for_graph(g, 1.07)


def test_flip_estimate_matches_distortion(half_rate):
    g, p = half_rate
    est = estimate_flip_probs(g, 1.07, p, k=4, seed=3, window=1)
    seeds = derived_seeds(3, 4)
    d = np.mean([quantize(g, random_source(g.n, sd), p).distortion for sd in seeds])
    assert est.mean() == pytest.approx(d, abs=1e-12)
    again = estimate_flip_probs(g, 1.07, p, k=4, seed=3, window=1)
    np.testing.assert_array_equal(est, again)


def test_flip_estimate_threads_identical(half_rate):
    g, p = half_rate
    a = estimate_flip_probs(g, 1.07, p, k=3, seed=1, threads=1)
    b = estimate_flip_probs(g, 1.07, p, k=3, seed=1, threads=3)
    np.testing.assert_array_equal(a, b)


def test_zero_iterations_returns_initial(half_rate):
    g, p = half_rate
    res = run_tuning(g, linear_profile(g.n), 0.5, TunerConfig(iterations=0, gamma0=1.07))
    np.testing.assert_array_equal(res.gamma, np.full(g.n, 1.07))
    assert res.history == []


def test_tuning_linear_profile_shape(half_rate):
    g, p = half_rate
    cfg = TunerConfig(k=8, iterations=3, gamma0=1.07)
    res = run_tuning(g, linear_profile(g.n), 0.5, cfg, params=p, seed=2)
    assert len(res.history) == 4
    assert res.history[-1] < res.history[0]
    fit = fit_cubic(res.gamma, g.n)
    # heavy weights get strong checks: gamma decreases along the profile
    assert fit.a1 < 0
    assert res.gamma[: g.n // 4].mean() > res.gamma[-g.n // 4:].mean()


def test_tuning_uniform_profile_stays_flat(half_rate):
    g, p = half_rate
    cfg = TunerConfig(k=8, iterations=2, gamma0=1.07)
    res = run_tuning(g, uniform_profile(g.n), 0.5, cfg, params=p, seed=4)
    assert res.gamma.mean() == pytest.approx(1.07, abs=1e-9)
    assert np.abs(res.gamma - 1.07).max() < 0.15


def test_small_graph_tuning_runs():
    g = small_sampled_graph(60, 30, 0)
    res = run_tuning(g, linear_profile(g.n), 0.5, TunerConfig(k=2, iterations=1, window=5))
    assert res.gamma.shape == (60,)
    assert res.targets.shape == (60,)
