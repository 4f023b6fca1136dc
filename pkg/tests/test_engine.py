import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from _support import random_small_graph, random_tree, reference_round, tree_diameter
from bipquant.degrees import EdgeDegreeDistribution, builtin_pair
from bipquant.distortion import weighted_distortion
from bipquant.engine import (
    BipParams,
    MessageState,
    bit_update,
    check_update,
    damp,
    default_gamma,
    final_bias,
    propagate,
    quantize,
    quantize_single_round,
    run_round,
    select_fixes,
    source_message,
)
from bipquant.graph import FactorGraph, ResidualState, decimate, encode, sample_graph
from bipquant.oracle import exact_distribution
from bipquant.sources import random_source


# -- scalar rules --------------------------------------------------------------


def test_source_message():
    assert source_message(0, 0.0) == 0.0
    assert source_message(0, 1.07) == pytest.approx(0.7894612, abs=1e-7)
    assert source_message(1, 1.07) == -source_message(0, 1.07)
    assert source_message(0, 50.0) == 1.0 - 1e-7


def test_bit_update():
    assert bit_update([0.37]) == pytest.approx(0.37, abs=1e-15)
    assert bit_update([0.5, 0.5]) == pytest.approx(0.8, abs=1e-15)
    assert bit_update([0.0, 0.0, 0.0]) == 0.0
    assert bit_update([]) == 0.0


def test_damp():
    assert damp(0.3, 0.3) == pytest.approx(0.3, abs=1e-15)
    assert damp(0.8, 0.0) == pytest.approx(0.5, abs=1e-15)
    assert damp(0.6, -0.6) == 0.0


def test_check_update():
    assert check_update([], 0.78949) == 0.78949
    assert check_update([0.5, -0.5], 0.78949) == pytest.approx(-0.1973725, abs=1e-12)
    assert check_update([0.9, 0.0, 0.4], 0.7) == 0.0


def test_final_bias():
    assert final_bias([]) == 0.0
    assert final_bias([-0.42]) == pytest.approx(-0.42, abs=1e-15)


def test_damping_forms_agree_on_grid():
    grid = np.linspace(-0.999, 0.999, 41)
    for b in grid:
        for p in grid:
            ratio = math.sqrt((1 + b) / (1 - b) * (1 + p) / (1 - p))
            assert damp(b, p, 1e-15) == pytest.approx((ratio - 1) / (ratio + 1), abs=1e-12)


def _sel(biases, t=0.8, lo=1, hi=2):
    b = np.asarray(biases, dtype=float)
    p = BipParams(np.ones(1), t=t, num_min=lo, num_max=hi)
    return select_fixes(b, np.ones(b.size, bool), p)


def test_select_fixes_examples():
    assert _sel([0.9, -0.95, 0.3]) == [(1, 1), (0, 0)]
    assert _sel([0.0, 0.0, 0.0], lo=1, hi=1) == [(0, 1)]
    assert len(_sel([0.9, 0.9, 0.95, -0.99, 0.85], hi=2)) == 2


def test_select_fixes_respects_minimum_and_activity():
    b = np.array([0.99, 0.1, -0.2, 0.05])
    p = BipParams(np.ones(1), t=0.8, num_min=2, num_max=4)
    active = np.array([False, True, True, True])
    assert select_fixes(b, active, p) == [(2, 1), (1, 0)]
    assert select_fixes(b, np.zeros(4, bool), p) == []


def test_select_ties_prefer_lower_index():
    assert _sel([0.5, -0.5, 0.5], lo=2, hi=2) == [(0, 0), (1, 1)]


def test_params_validation():
    with pytest.raises(ValueError):
        BipParams(np.ones(3), max_iter=0)
    with pytest.raises(ValueError):
        BipParams(np.ones(3), num_min=3, num_max=2)
    with pytest.raises(ValueError):
        BipParams(np.array([1.0, -0.1]))
    with pytest.raises(ValueError):
        BipParams(np.ones(3), t=1.0)


def test_params_for_graph_counts():
    rho, lam = builtin_pair(0.5)
    g = sample_graph(10_000, 5000, rho, lam, 2)
    p = BipParams.for_graph(g, 1.07)
    assert (p.num_min, p.num_max) == (5, 50)
    assert p.gamma.shape == (10_000,)


def test_default_gamma():
    assert default_gamma(0.5) == 1.07
    assert default_gamma(0.37) == 0.8
    assert default_gamma(0.66) == 1.3
    assert default_gamma(0.9) == 1.5


# -- compiled schedule vs scalar reference --------------------------------------


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_kernel_matches_reference(seed):
    rng = np.random.default_rng(seed)
    m, n = int(rng.integers(2, 10)), int(rng.integers(2, 18))
    g = random_small_graph(rng, m, n, max_check_degree=4)
    gamma = rng.uniform(0.0, 2.0, g.n)
    s = rng.integers(0, 2, g.n)
    params = BipParams(gamma, max_iter=int(rng.integers(1, 8)), start_damp=int(rng.integers(1, 6)),
                       num_min=1, num_max=min(2, g.m))
    state = ResidualState.initial(g, s)
    if g.m > 2:
        decimate(state, g, [(0, int(rng.integers(2)))])
    msgs = MessageState.initial(g, state, params)
    S_ref = msgs.satisfaction_by_edge(g).copy()
    B_ref = msgs.B.copy()
    for r in range(2):
        _, fixes, got = run_round(g, state, msgs, params, r + 1)
        want = reference_round(g, state.active_bit, state.residual_source, gamma, S_ref, B_ref,
                               params.max_iter, params.start_damp, params.clamp_eps)
        np.testing.assert_allclose(got, want, atol=1e-12, rtol=0)
        np.testing.assert_allclose(msgs.satisfaction_by_edge(g), S_ref, atol=1e-12, rtol=0)
        np.testing.assert_allclose(msgs.B, B_ref, atol=1e-12, rtol=0)
        decimate(state, g, fixes[:1])


def test_high_degree_bits_use_stable_products():
    # one bit on 60 checks, all strongly satisfied: plain products of (1 - S) underflow
    g = random_tree(np.random.default_rng(0), 1, 60)
    p = BipParams(np.full(60, 20.0), max_iter=3, start_damp=99, clamp_eps=1e-7)
    b = propagate(g, np.zeros(60, int), p)
    assert b[0] == 1.0 - 1e-7
    b = propagate(g, np.ones(60, int), p)
    assert b[0] == -(1.0 - 1e-7)


def test_messages_stay_clamped():
    rng = np.random.default_rng(1)
    g = random_small_graph(rng, 10, 30, 3)
    gamma = rng.uniform(0, 5, g.n)
    p = BipParams(gamma, max_iter=15, start_damp=5, clamp_eps=1e-7)
    state = ResidualState.initial(g, rng.integers(0, 2, g.n))
    msgs = MessageState.initial(g, state, p)
    run_round(g, state, msgs, p, 1)
    lim = 1 - 1e-7
    assert np.all(np.abs(msgs.B) <= lim)
    S = msgs.satisfaction_by_edge(g)
    assert np.all(np.abs(S) <= np.tanh(gamma[g.edge_check]) + 1e-7)


# -- behaviour ---------------------------------------------------------------------


def test_tree_exactness_small():
    rng = np.random.default_rng(7)
    for _ in range(30):
        g = random_tree(rng, int(rng.integers(1, 10)), int(rng.integers(1, 16)))
        gamma = rng.uniform(0.3, 2.0, g.n)
        s = rng.integers(0, 2, g.n)
        d = tree_diameter(g)
        p = BipParams(gamma, max_iter=d + 2, start_damp=d + 3, clamp_eps=1e-12)
        np.testing.assert_allclose(propagate(g, s, p), exact_distribution(g, s, gamma).gaps,
                                   atol=1e-9, rtol=0)


def test_tree_codeword_source_recovered():
    rng = np.random.default_rng(3)
    for _ in range(20):
        g = random_tree(rng, int(rng.integers(1, 10)), int(rng.integers(10, 20)))
        w0 = rng.integers(0, 2, g.m)
        s = encode(g, w0)
        p = BipParams(np.full(g.n, 3.0), max_iter=tree_diameter(g) + 2, start_damp=99,
                      num_min=1, num_max=1)
        res = quantize(g, s, p)
        assert res.distortion == 0.0
        # bits sharing one check and nothing else are interchangeable, so only c is pinned
        np.testing.assert_array_equal(encode(g, res.w), s)


def test_degree_one_checks_pass_source_through():
    rng = np.random.default_rng(5)
    m = 6
    adjacency = [[i] for i in range(m)] * 2
    g = FactorGraph.from_adjacency(m, adjacency)
    s = np.tile(rng.integers(0, 2, m), 2)
    p = BipParams(np.full(g.n, 15.0), max_iter=2, start_damp=99)
    b = propagate(g, s, p)
    np.testing.assert_allclose(b, np.where(s[:m] == 0, 1.0, -1.0), atol=1e-6)


def test_zero_strength_fixes_everything_to_one():
    rng = np.random.default_rng(2)
    g = random_small_graph(rng, 8, 16)
    p = BipParams(np.zeros(g.n), num_min=1, num_max=3)
    res = quantize(g, rng.integers(0, 2, g.n), p)
    assert (res.w == 1).all()
    assert all(r.max_abs_bias == 0.0 for r in res.rounds)


@pytest.fixture(scope="module")
def half_rate():
    rho, lam = builtin_pair(0.5)
    g = sample_graph(2000, 1000, rho, lam, seed=9)
    return g, BipParams.for_graph(g, 1.07)


def test_result_consistency_and_determinism(half_rate):
    g, p = half_rate
    s = random_source(g.n, 1)
    r1 = quantize(g, s, p)
    r2 = quantize(g, s, p)
    np.testing.assert_array_equal(r1.w, r2.w)
    np.testing.assert_array_equal(r1.c, encode(g, r1.w))
    assert r1.distortion == weighted_distortion(s, r1.c) == r2.distortion
    assert sum(r.bits_fixed for r in r1.rounds) == g.m
    assert r1.iterations_total == len(r1.rounds) * p.max_iter
    assert 0.1 < r1.distortion < 0.14


def test_bias_builds_over_rounds(half_rate):
    g, p = half_rate
    res = quantize(g, random_source(g.n, 4), p)
    tops = [r.max_abs_bias for r in res.rounds]
    # the first round starts from source messages and stays just under t
    assert 0.5 < tops[0] < 0.8
    assert max(tops[1:5]) > 0.9
    assert np.mean([r.converged for r in res.rounds]) > 0.8


def test_gauge_covariance_on_trees():
    # trees forget the initial messages within one round, so the gauge symmetry is exact
    rng = np.random.default_rng(8)
    checked = 0
    while checked < 40:
        g = random_tree(rng, int(rng.integers(2, 12)), int(rng.integers(2, 24)))
        s = rng.integers(0, 2, g.n)
        w0 = rng.integers(0, 2, g.m)
        p = BipParams(rng.uniform(0.3, 2.0, g.n), max_iter=tree_diameter(g) + 2, start_damp=99,
                      num_min=1, num_max=2)
        r1 = quantize(g, s, p)
        r2 = quantize(g, s ^ encode(g, w0), p)
        if min(r.min_fixed_bias for r in r1.rounds + r2.rounds) == 0.0:
            continue  # a zero bias is fixed to 1 regardless of the gauge
        checked += 1
        assert r1.distortion == pytest.approx(r2.distortion, abs=1e-12)
        np.testing.assert_array_equal(r2.w, r1.w ^ w0)


def test_gauge_breaks_with_source_initialization(half_rate):
    # S starts at the check's source message, which transforms with c0 rather than w0
    g, p = half_rate
    s = random_source(g.n, 2)
    w0 = np.random.default_rng(0).integers(0, 2, g.m)
    r1 = quantize(g, s, p)
    r2 = quantize(g, s ^ encode(g, w0), p)
    assert not np.array_equal(r2.w, r1.w ^ w0)
    assert abs(r1.distortion - r2.distortion) < 0.02


def test_single_round_is_schedule_special_case(half_rate):
    g, p = half_rate
    s = random_source(g.n, 3)
    a = quantize_single_round(g, s, p)
    b = quantize(g, s, p.replace(num_min=g.m, num_max=g.m))
    np.testing.assert_array_equal(a.w, b.w)
    assert len(a.rounds) == 1


def test_single_round_degree_two_checks():
    rho, lam = EdgeDegreeDistribution.single(2), EdgeDegreeDistribution.single(4)
    g = sample_graph(2000, 1000, rho, lam, seed=1)
    p = BipParams.for_graph(g, 1.0)
    d = [quantize_single_round(g, random_source(g.n, k), p).distortion for k in range(5)]
    assert np.isfinite(d).all()
    assert np.mean(d) < 0.5


def test_shape_errors(half_rate):
    g, p = half_rate
    with pytest.raises(ValueError):
        quantize(g, np.zeros(g.n - 1, int), p)
    with pytest.raises(ValueError):
        quantize(g, np.zeros(g.n, int), p.replace(gamma=np.ones(3)))
