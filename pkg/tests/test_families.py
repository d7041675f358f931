import itertools
import math
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sunflower_lab.core import InputError, ResourceBudgetError, is_non_redundant
from sunflower_lab.evaluation import satisfaction_probability
from sunflower_lab.families import (
    BlockFamilySpec,
    IntersectingBlockSpec,
    SubspaceSpec,
    block_family,
    block_family_prediction,
    complete_uniform_family,
    complete_uniform_mass,
    family_from_spec,
    intersecting_block_family,
    intersecting_block_prediction,
    intersecting_pair_fraction,
    is_alpha_large,
    random_family,
    random_intersecting_family,
    subspace_family,
    subspace_regularity_check,
    zero_free_vector,
)
from sunflower_lab.regular import WeightedFamily, certify_family, is_kappa_regular, max_regularity, uniform_mass_table
from sunflower_lab.sunflower import is_intersecting

GF5 = SubspaceSpec(5, 4, ((1, 0, 1, 1), (0, 1, 1, 2)))


def brute_rank(rows, p):
    """Dimension of the span, by counting the vectors it contains."""
    if not rows:
        return 0
    span = {tuple(sum(c * r[i] for c, r in zip(coeffs, rows)) % p for i in range(len(rows[0])))
            for coeffs in itertools.product(range(p), repeat=len(rows))}
    return round(math.log(len(span), p))


class TestBlockFamily:
    def test_small(self):
        F = block_family(BlockFamilySpec(2, 2))
        assert len(F) == 4 and F.universe_size == 4

    def test_regularity_bracket(self):
        F = block_family(BlockFamilySpec(4, 2))
        assert 2 in max_regularity(F, Fraction(1, 10**4))

    def test_satisfaction(self):
        spec = BlockFamilySpec(4, 2)
        assert satisfaction_probability(block_family(spec), Fraction(1, 2)) == Fraction(81, 256)
        assert block_family_prediction(spec)["satisfaction_half"] == Fraction(81, 256)

    def test_overflow(self):
        with pytest.raises(ResourceBudgetError):
            block_family(BlockFamilySpec(21, 2))

    @pytest.mark.parametrize("w,k", [(1, 3), (2, 3), (3, 2), (3, 3)])
    def test_uniform_exact_masses(self, w, k):
        F = block_family(BlockFamilySpec(w, k))
        D = WeightedFamily.uniform(F)
        assert is_kappa_regular(D, k).regular
        for T, m in uniform_mass_table(F).items():
            assert m == Fraction(1, k ** len(T))  # every realised T is a partial transversal
        assert not certify_family(F, Fraction(k) + Fraction(1, 100)).regular


class TestIntersectingBlock:
    def test_w3_t2(self):
        spec = IntersectingBlockSpec(3, 2)
        F = intersecting_block_family(spec)
        assert spec.m == 2 and len(F) == 4 and is_intersecting(F)
        table = uniform_mass_table(F)
        assert table[(2,)] == Fraction(3, 4)  # element of the second block
        assert table[(0, 1)] == Fraction(1, 2)
        pred = intersecting_block_prediction(spec)
        assert pred["singleton_mass"] == Fraction(3, 4) and pred["block_mass"] == Fraction(1, 2)

    def test_t_too_large(self):
        with pytest.raises(InputError):
            IntersectingBlockSpec(4, 3)
        with pytest.raises(InputError):
            IntersectingBlockSpec(4, 1)

    @pytest.mark.parametrize("w,t", [(w, t) for w in range(3, 6) for t in range(2, (w + 1) // 2 + 1)])
    def test_grid(self, w, t):
        spec = IntersectingBlockSpec(w, t)
        F = intersecting_block_family(spec)
        pred = intersecting_block_prediction(spec)
        assert is_intersecting(F) and len(F) == pred["size"]
        assert all(len(s) == w for s in F.sets)
        table = uniform_mass_table(F)
        singles = {T[0]: m for T, m in table.items() if len(T) == 1}
        assert set(singles.values()) == {pred["singleton_mass"]}
        assert table[tuple(range(t))] == pred["block_mass"]


class TestCompleteUniform:
    def test_w3_n5(self):
        F = complete_uniform_family(3, 5)
        assert is_intersecting(F)
        assert is_kappa_regular(WeightedFamily.uniform(F), Fraction(5, 3)).regular

    def test_not_intersecting(self):
        assert not is_intersecting(complete_uniform_family(2, 4))

    def test_w2_n9(self):
        F = complete_uniform_family(2, 9)
        # pairs meet iff equal or sharing one point: (36 + 36*14) / 36**2
        assert intersecting_pair_fraction(F) == Fraction(36 + 36 * 14, 36 * 36)

    @pytest.mark.parametrize("w", [2, 3, 4])
    def test_mass_formula(self, w):
        n = 2 * w - 1
        table = uniform_mass_table(complete_uniform_family(w, n))
        for T, m in table.items():
            assert m == complete_uniform_mass(w, n, len(T)) <= Fraction(w, n) ** len(T)


class TestSubspace:
    def test_zero_dim(self):
        F = subspace_family(SubspaceSpec(3, 2, ()))
        assert F.sets == [(0, 3)]

    def test_p2(self):
        F = subspace_family(SubspaceSpec(2, 2, ((1, 1),)))
        assert F.sets == [(0, 2), (1, 3)]
        assert F.labels[3] == (1, 1)

    def test_gf5_family(self):
        F = subspace_family(GF5)
        assert len(F) == 25 and all(len(s) == 4 for s in F.sets)

    def test_spec_validation(self):
        with pytest.raises(InputError):
            SubspaceSpec(4, 2, ((1, 0),))
        with pytest.raises(InputError):
            SubspaceSpec(17, 2, ((1, 0),))
        with pytest.raises(InputError):
            SubspaceSpec(3, 2, ((1, 1), (2, 2)))
        with pytest.raises(InputError):
            SubspaceSpec(3, 2, ((1, 1, 0),))

    def test_largeness(self):
        full = SubspaceSpec(3, 3, ((1, 0, 0), (0, 1, 0), (0, 0, 1)))
        assert is_alpha_large(full, 1)
        assert is_alpha_large(SubspaceSpec(3, 2, ((1, 0), (0, 1))), 1)
        assert is_alpha_large(GF5, Fraction(1, 2))
        res = is_alpha_large(GF5, Fraction(3, 4))
        assert not res and res.witness is not None

    def test_zero_free(self):
        assert zero_free_vector(SubspaceSpec(3, 2, ((1, 1),))) == (1, 1)
        assert zero_free_vector(SubspaceSpec(3, 2, ((1, 0),))) is None
        v = zero_free_vector(GF5)
        assert v == (1, 1, 2, 3)

    def test_regularity(self):
        full = SubspaceSpec(3, 2, ((1, 0), (0, 1)))
        assert subspace_regularity_check(full, 1)
        table = uniform_mass_table(subspace_family(full))
        assert all(m == Fraction(1, 3 ** len(T)) for T, m in table.items())
        assert subspace_regularity_check(GF5, Fraction(1, 2))
        res = subspace_regularity_check(GF5, Fraction(3, 4))
        assert not res and res.witness is not None

    def test_regularity_agrees_with_masses(self):
        F = subspace_family(GF5)
        table = uniform_mass_table(F)
        for a in (Fraction(1, 2), Fraction(2, 3), Fraction(3, 4), Fraction(1)):
            # exact check: mass**b * p**(a t) <= 1 with alpha = a/b
            brute = all(m ** a.denominator * 5 ** (a.numerator * len(T)) <= 1 for T, m in table.items())
            assert bool(subspace_regularity_check(GF5, a)) == brute


class TestRandom:
    def test_seed_stable(self):
        assert random_family(8, 3, 10, 5) == random_family(8, 3, 10, 5)
        assert random_family(8, 3, 10, 5) != random_family(8, 3, 10, 6)

    def test_nonredundant(self):
        F = random_family(7, 3, 20, 1, nonredundant=True)
        assert is_non_redundant(F) and len(F) == 20

    def test_too_many(self):
        with pytest.raises(InputError):
            random_family(4, 2, 7, 0, nonredundant=True)

    def test_intersecting(self):
        F = random_intersecting_family(8, 3, 10, 3)
        assert is_intersecting(F)

    def test_spec_dispatch(self):
        assert len(family_from_spec({"kind": "block", "w": 2, "kappa": 3})) == 9
        with pytest.raises(InputError):
            family_from_spec({"kind": "random", "n": 4, "w": 2, "m": 3})
        with pytest.raises(InputError):
            family_from_spec({"kind": "nope"})
        with pytest.raises(InputError):
            family_from_spec({"kind": "block", "w": 2})


@settings(max_examples=60, deadline=None)
@given(st.sampled_from([2, 3, 5, 7]), st.integers(1, 4), st.data())
def test_largeness_matches_brute_ranks(p, n, data):
    k = data.draw(st.integers(0, min(n, 2)))
    rows = [tuple(data.draw(st.lists(st.integers(0, p - 1), min_size=n, max_size=n))) for _ in range(k)]
    if brute_rank(rows, p) != k:
        return
    spec = SubspaceSpec(p, n, tuple(rows))
    alpha = data.draw(st.fractions(min_value=0, max_value=1, max_denominator=4))
    expected = all(
        brute_rank([tuple(r[i] for i in I) for r in rows], p) >= alpha * len(I)
        for size in range(1, n + 1) for I in itertools.combinations(range(n), size)
    )
    assert bool(is_alpha_large(spec, alpha)) == expected
    F = subspace_family(spec)
    assert len(F) == p**k and all(len(s) == n for s in F.sets)
