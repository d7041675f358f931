from fractions import Fraction

import pytest
from conftest import families, rationals01
from hypothesis import given, settings
from hypothesis import strategies as st
from oracles import brute_probability, inclusion_exclusion

from sunflower_lab.core import InputError, SetSystem, check_proper_upper
from sunflower_lab.evaluation import (
    find_approx_sunflower,
    is_approx_sunflower,
    is_satisfying,
    monte_carlo_satisfaction,
    satisfaction_probability,
    uniform_distance,
)
from sunflower_lab.families import BlockFamilySpec, block_family

half = Fraction(1, 2)


def S(n, *sets):
    return SetSystem.from_sets(n, sets)


class TestSatisfactionProbability:
    def test_single(self):
        assert satisfaction_probability(S(1, [0]), Fraction(1, 3)) == Fraction(1, 3)

    def test_two_singletons(self):
        assert satisfaction_probability(S(2, [0], [1]), half) == Fraction(3, 4)

    def test_block_family(self):
        assert satisfaction_probability(block_family(BlockFamilySpec(4, 2)), half) == Fraction(81, 256)

    def test_empty_family_and_empty_set(self):
        assert satisfaction_probability(S(3), half) == 0
        assert satisfaction_probability(S(3, []), half) == 1

    @pytest.mark.parametrize("p", [0, 1, Fraction(3, 2), "-1/2"])
    def test_p_range(self, p):
        with pytest.raises(InputError):
            satisfaction_probability(S(1, [0]), p)


class TestIsSatisfying:
    def test_boundary_is_strict(self):
        assert not is_satisfying(S(1, [0]), half, half)

    def test_three_singletons(self):
        assert is_satisfying(S(3, [0], [1], [2]), half, Fraction(1, 4))

    def test_empty(self):
        assert not is_satisfying(S(3), half, half)


class TestMonteCarlo:
    def test_single(self):
        est = monte_carlo_satisfaction(S(1, [0]), half, 100_000, seed=1)
        assert abs(est.estimate - 0.5) <= 3 * est.stderr + 1e-12

    def test_empty(self):
        est = monte_carlo_satisfaction(S(2), half, 1000, seed=0)
        assert est.estimate == 0 and est.hits == 0

    def test_deterministic(self):
        F = S(4, [0, 1], [2, 3])
        a = monte_carlo_satisfaction(F, Fraction(1, 3), 20_000, seed=7)
        b = monte_carlo_satisfaction(F, Fraction(1, 3), 20_000, seed=7)
        assert a == b

    def test_agrees_with_exact(self):
        import random

        rng = random.Random(11)
        misses = 0
        for _ in range(100):
            n = rng.randint(2, 8)
            sets = {tuple(sorted(rng.sample(range(n), rng.randint(1, min(3, n))))) for _ in range(rng.randint(1, 5))}
            F = SetSystem.from_sets(n, sets)
            p = Fraction(rng.randint(1, 9), 10)
            exact = float(satisfaction_probability(F, p))
            est = monte_carlo_satisfaction(F, p, 4000, seed=rng.randrange(10**6))
            sigma = max(est.stderr, (exact * (1 - exact) / est.trials) ** 0.5, 1e-9)
            if abs(est.estimate - exact) > 4 * sigma:
                misses += 1
        assert misses == 0


class TestApproxSunflower:
    def test_shared_core(self):
        res = is_approx_sunflower(S(3, [0, 1], [0, 2]), half, half)
        assert res.holds and res.residual.sets == [(1,), (2,)] and res.probability == Fraction(3, 4)
        assert not res.degenerate

    def test_single_set_degenerate(self):
        res = is_approx_sunflower(S(1, [0]), Fraction(1, 3), Fraction(1, 100))
        assert res.holds and res.degenerate and res.probability == 1

    def test_sparse(self):
        res = is_approx_sunflower(S(4, [0, 1], [2, 3]), Fraction(1, 10), Fraction(1, 10))
        assert not res.holds and res.probability == 1 - Fraction(99, 100) ** 2

    def test_empty_rejected(self):
        with pytest.raises(InputError):
            is_approx_sunflower(S(2), half, half)

    def test_find_singletons(self):
        F = SetSystem.from_sets(8, [[i] for i in range(8)])
        found = find_approx_sunflower(F, half, Fraction(1, 100))
        assert found == F

    def test_find_single_set(self):
        assert find_approx_sunflower(S(2, [0, 1]), half, half) is None
        assert find_approx_sunflower(S(2, [0, 1]), half, half, mode="exhaustive") is None

    def test_exhaustive_limit(self):
        with pytest.raises(InputError):
            find_approx_sunflower(SetSystem.from_sets(21, [[i] for i in range(21)]), half, half, mode="exhaustive")

    @pytest.mark.parametrize("m", range(2, 9))
    @pytest.mark.parametrize("p,eps", [(half, Fraction(1, 10)), (Fraction(1, 3), Fraction(1, 2)), (Fraction(1, 5), Fraction(3, 4))])
    def test_singleton_threshold(self, m, p, eps):
        F = SetSystem.from_sets(m, [[i] for i in range(m)])
        expected = 1 - (1 - p) ** m > 1 - eps
        assert bool(is_approx_sunflower(F, p, eps)) == expected


@settings(max_examples=200, deadline=None)
@given(families(max_n=9, max_w=4, max_sets=7, allow_empty_set=True), rationals01)
def test_exact_matches_inclusion_exclusion(F, p):
    assert satisfaction_probability(F, p) == inclusion_exclusion(F, p)


@settings(max_examples=100, deadline=None)
@given(families(max_n=7, max_w=3, max_sets=6), rationals01)
def test_exact_matches_enumeration(F, p):
    assert satisfaction_probability(F, p) == brute_probability(F, p)


@settings(max_examples=100, deadline=None)
@given(families(max_n=7, max_sets=6), rationals01, st.data())
def test_adding_a_set_never_decreases(F, p, data):
    extra = data.draw(st.frozensets(st.integers(0, F.universe_size - 1), min_size=1, max_size=3))
    G = SetSystem.from_sets(F.universe_size, F.sets + [tuple(sorted(extra))])
    assert satisfaction_probability(G, p) >= satisfaction_probability(F, p)


@settings(max_examples=100, deadline=None)
@given(families(max_n=6, max_sets=5), families(max_n=6, max_sets=5), rationals01)
def test_proper_upper_dominates(F, G, p):
    n = max(F.universe_size, G.universe_size)
    F = SetSystem.from_sets(n, F.sets)
    G = SetSystem.from_sets(n, G.sets)
    if check_proper_upper(G, F):
        assert satisfaction_probability(G, p) >= satisfaction_probability(F, p)
        assert uniform_distance(F, G) >= 0


@settings(max_examples=50, deadline=None)
@given(families(max_n=7, max_sets=6, min_sets=2), rationals01, rationals01)
def test_found_approx_sunflowers_verify(F, p, eps):
    for mode in ("link", "exhaustive"):
        sub = find_approx_sunflower(F, p, eps, mode=mode)
        if sub is not None:
            assert len(sub) >= 2 and is_approx_sunflower(sub, p, eps)
            assert set(sub.masks) <= set(F.masks)
