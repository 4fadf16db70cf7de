import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gcmkit import NumericError, QueryError, SetFunction, ShapleyConfig, estimate_shapley


def shapley_by_permutation_enumeration(evaluator, n):
    """Independent oracle: average marginal contributions over all n! orders."""
    totals = np.zeros(n)
    for order in itertools.permutations(range(n)):
        members = np.zeros(n, dtype=bool)
        previous = evaluator(members.copy())
        for player in order:
            members[player] = True
            current = evaluator(members.copy())
            totals[player] += current - previous
            previous = current
    return totals / math.factorial(n)


def glove_game(mask):
    left = int(mask[0]) + int(mask[1])
    right = int(mask[2])
    return float(min(left, right))


def test_additive_game_returns_weights():
    weights = np.array([1.0, 2.0, 3.0])
    f = SetFunction(3, lambda mask: float(weights[mask].sum()))
    values = estimate_shapley(f, ShapleyConfig(method="exact"))
    assert np.allclose(values, weights, rtol=0, atol=1e-12)


def test_symmetric_two_player_game():
    f = SetFunction(2, lambda mask: float(mask.sum() if mask.sum() < 2 else 2.0))
    values = estimate_shapley(f, ShapleyConfig(method="exact"))
    assert np.allclose(values, [1.0, 1.0], atol=1e-12)


def test_glove_game_matches_brute_force():
    exact = estimate_shapley(SetFunction(3, glove_game), ShapleyConfig(method="exact"))
    oracle = shapley_by_permutation_enumeration(glove_game, 3)
    assert np.allclose(exact, oracle, atol=1e-12)
    assert np.allclose(exact, [1 / 6, 1 / 6, 2 / 3], atol=1e-12)


def test_null_player_gets_exact_zero():
    def game(mask):
        return float(mask[0]) * 2.0  # player 1 never matters

    values = estimate_shapley(SetFunction(2, game), ShapleyConfig(method="exact"))
    assert values[1] == 0.0


def test_symmetry_is_bit_identical():
    def game(mask):
        # players 0 and 1 interchangeable
        return float(mask[0] + mask[1] + 0.5 * (mask[0] & mask[1]) + 3.0 * mask[2])

    values = estimate_shapley(SetFunction(3, game), ShapleyConfig(method="exact"))
    assert values[0] == values[1]


@given(st.lists(st.floats(min_value=-10, max_value=10), min_size=1, max_size=5), st.integers(0, 100))
@settings(max_examples=40, deadline=None)
def test_exact_efficiency_property(weights, interaction_seed):
    weights = np.asarray(weights)
    n = len(weights)
    rng = np.random.default_rng(interaction_seed)
    bonus = rng.uniform(-1, 1, size=1 << n)

    def game(mask):
        bits = sum(1 << i for i in range(n) if mask[i])
        return float(weights[mask].sum() + bonus[bits])

    values = estimate_shapley(SetFunction(n, game), ShapleyConfig(method="exact"))
    total = game(np.ones(n, dtype=bool)) - game(np.zeros(n, dtype=bool))
    assert sum(values) == pytest.approx(total, rel=1e-12, abs=1e-12)


def test_permutation_estimate_converges_on_glove_game():
    config = ShapleyConfig(method="permutation", num_permutations=2000, seed=5)
    estimate = estimate_shapley(SetFunction(3, glove_game), config)
    assert np.max(np.abs(estimate - np.array([1 / 6, 1 / 6, 2 / 3]))) <= 0.05


def test_permutation_seed_determinism():
    config = ShapleyConfig(method="permutation", num_permutations=50, seed=9)
    a = estimate_shapley(SetFunction(3, glove_game), config)
    b = estimate_shapley(SetFunction(3, glove_game), config)
    assert np.array_equal(a, b)


def test_permutation_efficiency_with_stochastic_evaluator():
    # noisy additive game: each evaluation adds fresh N(0, sigma^2) noise, so
    # the total over one permutation chain telescopes to v(N)-v(0) plus the
    # noise of the two endpoint evaluations.
    sigma = 0.5
    weights = np.array([1.0, -2.0, 0.5, 3.0])
    rng = np.random.default_rng(123)

    def game(mask):
        return float(weights[mask].sum() + sigma * rng.standard_normal())

    permutations = 400
    config = ShapleyConfig(method="permutation", num_permutations=permutations, seed=3)
    estimate = estimate_shapley(SetFunction(4, game), config)
    exact_total = weights.sum()
    standard_error = sigma * math.sqrt(2.0 / permutations)
    assert abs(estimate.sum() - exact_total) <= 4 * standard_error


def test_exact_rejects_large_arity():
    with pytest.raises(QueryError, match="20 players"):
        estimate_shapley(SetFunction(21, lambda mask: 0.0), ShapleyConfig(method="exact"))


def test_non_finite_evaluator_rejected():
    with pytest.raises(NumericError, match="non-finite"):
        estimate_shapley(SetFunction(2, lambda mask: float("nan")), ShapleyConfig(method="exact"))


def test_evaluator_sees_every_subset_once_for_exact():
    seen = []

    def game(mask):
        seen.append(tuple(bool(v) for v in mask))
        return 0.0

    estimate_shapley(SetFunction(3, game), ShapleyConfig(method="exact"))
    assert len(seen) == 8
    assert len(set(seen)) == 8
