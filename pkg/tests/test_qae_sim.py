"""Amplitude-estimation simulator: schedules, call accounting, accuracy,
and byte-level determinism."""

import math

import numpy as np
import pytest

from qnumdiff.qae_sim import (
    DEPTH_SCALE,
    SHOTS_PER_DEPTH,
    AmplitudeProblem,
    QAEResult,
    classical_mc_estimate,
    depth_schedule,
    grover_call_count,
    mlae_estimate,
    mlae_estimate_batch,
    shots_for_delta,
    spawn_generators,
)


def test_depth_schedule_shape():
    assert depth_schedule(0.5) == [0]
    assert depth_schedule(0.25) == [0, 1]
    assert depth_schedule(1e-2) == [0, 1, 2, 4, 8, 16, 32]
    sched = depth_schedule(1e-3)
    K = math.ceil(math.log2(DEPTH_SCALE / 1e-3))
    assert sched == [0] + [2**k for k in range(K)]
    with pytest.raises(ValueError):
        depth_schedule(0.0)
    with pytest.raises(ValueError):
        depth_schedule(1.0)


def test_shots_for_delta_pinned_and_scaled():
    assert shots_for_delta(0.01) == SHOTS_PER_DEPTH
    assert shots_for_delta(0.001) > shots_for_delta(0.01)
    expected = math.ceil(SHOTS_PER_DEPTH * math.log(2 / 0.05) / math.log(200))
    assert shots_for_delta(0.05) == expected
    assert shots_for_delta(0.01, shots_per_depth=10) == 10
    with pytest.raises(ValueError):
        shots_for_delta(0.0)


def test_grover_call_count_closed_form():
    # sum over the ladder of (2*m_k + 1) telescopes to 2^(K+1) + K - 1.
    for eps in (1e-1, 1e-2, 1e-3):
        depths = depth_schedule(eps)
        K = len(depths) - 1
        assert grover_call_count(depths, 1) == 2 ** (K + 1) + K - 1
        assert grover_call_count(depths, 48) == 48 * (2 ** (K + 1) + K - 1)


def test_problem_validation():
    with pytest.raises(ValueError):
        AmplitudeProblem(-0.1)
    with pytest.raises(ValueError):
        AmplitudeProblem(1.1)
    assert AmplitudeProblem(0.25).theta_true == pytest.approx(math.pi / 6)


def test_degenerate_probabilities_estimated_exactly():
    for p_true, expected in ((0.0, 0.0), (1.0, 1.0)):
        rng = np.random.default_rng(7)
        res = mlae_estimate(AmplitudeProblem(p_true), 1e-3, 0.01, rng)
        assert res.estimate == expected


def test_mlae_accuracy_across_probabilities():
    eps, delta = 1e-2, 0.01
    for p in (0.1, 0.3, 0.5, 0.7, 0.9):
        estimates, _ = mlae_estimate_batch(AmplitudeProblem(p), eps, delta,
                                           seed=314159, trials=50)
        failures = int(np.sum(np.abs(estimates - p) > eps))
        assert failures <= 2, f"p={p}: {failures}/50 misses"


def test_mlae_result_contract():
    rng = np.random.default_rng(11)
    res = mlae_estimate(AmplitudeProblem(0.3), 1e-2, 0.01, rng)
    assert isinstance(res, QAEResult)
    depths = depth_schedule(1e-2)
    assert res.shots == SHOTS_PER_DEPTH * len(depths)
    assert res.grover_calls == grover_call_count(depths, SHOTS_PER_DEPTH)
    assert res.variant == "mlae"
    assert res.confidence == 0.99
    assert 0.0 <= res.estimate <= 1.0


def test_mlae_input_validation():
    prob = AmplitudeProblem(0.3)
    with pytest.raises(TypeError):
        mlae_estimate(prob, 1e-2, 0.01, np.random.RandomState(0))
    rng = np.random.default_rng(0)
    with pytest.raises(ValueError):
        mlae_estimate(prob, 1e-2, 0.01, rng, repeats=2)
    with pytest.raises(ValueError):
        mlae_estimate(prob, 1e-2, 0.01, rng, repeats=0)


def test_mlae_repeats_take_median_and_bill_all_calls():
    prob = AmplitudeProblem(0.3)
    res1 = mlae_estimate(prob, 1e-2, 0.01, np.random.default_rng(5))
    res3 = mlae_estimate(prob, 1e-2, 0.01, np.random.default_rng(5), repeats=3)
    assert res3.grover_calls == 3 * res1.grover_calls
    assert res3.shots == 3 * res1.shots
    assert abs(res3.estimate - 0.3) <= 1e-2


def test_batch_matches_single_trials_exactly():
    prob = AmplitudeProblem(0.7)
    eps, delta, seed, trials = 1e-2, 0.01, 90210, 8
    estimates, template = mlae_estimate_batch(prob, eps, delta, seed, trials)
    children = np.random.SeedSequence(seed).spawn(trials)
    for t in range(trials):
        rng = np.random.Generator(np.random.PCG64(children[t]))
        single = mlae_estimate(prob, eps, delta, rng)
        assert estimates[t] == single.estimate
        assert template.grover_calls == single.grover_calls


def test_determinism_same_seed_same_bytes():
    prob = AmplitudeProblem(0.42)
    a, _ = mlae_estimate_batch(prob, 1e-3, 0.01, seed=123, trials=6)
    b, _ = mlae_estimate_batch(prob, 1e-3, 0.01, seed=123, trials=6)
    assert a.tobytes() == b.tobytes()
    c, _ = mlae_estimate_batch(prob, 1e-3, 0.01, seed=124, trials=6)
    assert a.tobytes() != c.tobytes()


def test_classical_count_formula():
    rng = np.random.default_rng(0)
    res = classical_mc_estimate(AmplitudeProblem(0.5), 1e-2, 0.01, rng)
    n = math.ceil(math.log(200) / (2e-4))
    assert res.grover_calls == n == res.shots
    assert res.variant == "classical"
    # Halving eps quadruples the bill, up to the two ceilings.
    res_half = classical_mc_estimate(
        AmplitudeProblem(0.5), 5e-3, 0.01, np.random.default_rng(0)
    )
    assert res_half.grover_calls == math.ceil(math.log(200) / (2 * 5e-3**2))
    assert abs(res_half.grover_calls - 4 * res.grover_calls) <= 4
    with pytest.raises(TypeError):
        classical_mc_estimate(AmplitudeProblem(0.5), 1e-2, 0.01, np.random.RandomState(0))
    with pytest.raises(ValueError):
        classical_mc_estimate(AmplitudeProblem(0.5), 2.0, 0.01, rng)


def test_classical_accuracy():
    estimates = []
    for rng in spawn_generators(2718, 50):
        estimates.append(classical_mc_estimate(AmplitudeProblem(0.3), 1e-2, 0.01, rng).estimate)
    failures = sum(abs(e - 0.3) > 1e-2 for e in estimates)
    assert failures <= 2


def test_mlae_beats_classical_on_calls():
    depths = depth_schedule(1e-3)
    quantum = grover_call_count(depths, shots_for_delta(0.01))
    classical = math.ceil(math.log(200) / (2 * 1e-6))
    assert quantum < classical / 50


def test_spawn_generators_are_independent_and_reproducible():
    gens_a = spawn_generators(99, 3)
    gens_b = spawn_generators(99, 3)
    draws_a = [g.random(4).tobytes() for g in gens_a]
    draws_b = [g.random(4).tobytes() for g in gens_b]
    assert draws_a == draws_b
    assert len({*draws_a}) == 3
