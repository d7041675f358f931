"""Generators for the constructions studied here, with closed-form predictions.

All generators are deterministic; the random ones are deterministic per seed.
"""

from __future__ import annotations

import itertools
import math
import random
from dataclasses import dataclass
from fractions import Fraction

from .core import InputError, ResourceBudgetError, SetSystem, to_mask
from .gf import is_prime, rank_mod_p, restrict_columns, span_vectors
from .regular import parse_rational
from .sunflower import find_disjoint

MAX_SETS = 10**6


@dataclass(frozen=True)
class BlockFamilySpec:
    w: int
    kappa: int

    def __post_init__(self):
        if self.w < 1 or self.kappa < 1:
            raise InputError("block family needs w >= 1 and block size >= 1")


def block_family(spec: BlockFamilySpec) -> SetSystem:
    """All transversals of w disjoint blocks of size kappa (block i is
    ``i*kappa .. i*kappa + kappa - 1``)."""
    if spec.kappa**spec.w > MAX_SETS:
        raise ResourceBudgetError(f"{spec.kappa}**{spec.w} sets is over the {MAX_SETS} limit")
    blocks = [range(i * spec.kappa, (i + 1) * spec.kappa) for i in range(spec.w)]
    return SetSystem.from_sets(spec.w * spec.kappa, itertools.product(*blocks))


def block_family_prediction(spec: BlockFamilySpec) -> dict:
    return {
        "size": spec.kappa**spec.w,
        "regularity": Fraction(spec.kappa),
        "satisfaction_half": (1 - Fraction(1, 2**spec.kappa)) ** spec.w,
    }


@dataclass(frozen=True)
class IntersectingBlockSpec:
    w: int
    t: int

    def __post_init__(self):
        if self.t < 2:
            raise InputError("block size t must be at least 2 (t = 1 collapses to a single set)")
        # ceil(w/2) rather than w/2 so that odd w (e.g. w=3, t=2) is admissible
        if 2 * self.t > self.w + 1:
            raise InputError(f"block size t={self.t} exceeds w/2 for w={self.w}")

    @property
    def m(self) -> int:
        return self.w - self.t + 1


def intersecting_block_family(spec: IntersectingBlockSpec) -> SetSystem:
    """One block taken whole, one element from each of the other blocks."""
    t, m = spec.t, spec.m
    if m * t ** (m - 1) > MAX_SETS:
        raise ResourceBudgetError("intersecting block family too large")
    blocks = [list(range(i * t, (i + 1) * t)) for i in range(m)]
    sets = []
    for i in range(m):
        others = [blocks[j] for j in range(m) if j != i]
        for pick in itertools.product(*others):
            sets.append(list(blocks[i]) + list(pick))
    return SetSystem.from_sets(m * t, sets)


def intersecting_block_prediction(spec: IntersectingBlockSpec) -> dict:
    t, m = spec.t, spec.m
    return {
        "size": m * t ** (m - 1),
        "singleton_mass": Fraction(1, m) + (1 - Fraction(1, m)) * Fraction(1, t),
        "block_mass": Fraction(1, m),
    }


def complete_uniform_family(w: int, n: int) -> SetSystem:
    if w < 0 or n < w:
        raise InputError("need 0 <= w <= n")
    if math.comb(n, w) > MAX_SETS:
        raise ResourceBudgetError(f"C({n},{w}) sets is over the {MAX_SETS} limit")
    return SetSystem.from_sets(n, itertools.combinations(range(n), w))


def complete_uniform_mass(w: int, n: int, t: int) -> Fraction:
    """Uniform containment mass of a fixed t-set among all w-subsets of [n]."""
    out = Fraction(1)
    for i in range(t):
        out *= Fraction(w - i, n - i)
    return out


def intersecting_pair_fraction(F: SetSystem) -> Fraction:
    """Pr[S and S' intersect] for S, S' drawn independently and uniformly from F."""
    ms = F.masks
    hits = sum(1 for a in ms for b in ms if a & b)
    return Fraction(hits, len(ms) ** 2)


@dataclass(frozen=True)
class SubspaceSpec:
    p: int
    n: int
    generator: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        if not is_prime(self.p) or self.p > 13:
            raise InputError(f"p={self.p} must be a prime at most 13")
        gen = tuple(tuple(int(v) % self.p for v in row) for row in self.generator)
        if any(len(row) != self.n for row in gen):
            raise InputError("generator rows must have length n")
        if rank_mod_p(gen, self.p) != len(gen):
            raise InputError("generator rows are linearly dependent")
        object.__setattr__(self, "generator", gen)

    @property
    def k(self) -> int:
        return len(self.generator)

    def element(self, i: int, a: int) -> int:
        return i * self.p + a

    def labels(self) -> tuple[tuple[int, int], ...]:
        return tuple((i, a) for i in range(self.n) for a in range(self.p))


def subspace_family(spec: SubspaceSpec) -> SetSystem:
    """S(v) = {(i, v_i)} for every v in the row space; (i, a) is element i*p + a."""
    if spec.p**spec.k > 10**5:
        raise ResourceBudgetError("subspace too large to enumerate")
    sets = [[spec.element(i, a) for i, a in enumerate(v)] for _, v in span_vectors(spec.generator, spec.n, spec.p)]
    return SetSystem.from_sets(spec.n * spec.p, sets, labels=spec.labels())


@dataclass(frozen=True)
class AlphaLargeResult:
    holds: bool
    witness: tuple[int, ...] | None = None

    def __bool__(self) -> bool:
        return self.holds


def _coordinate_subsets(n: int):
    for size in range(1, n + 1):
        yield from itertools.combinations(range(n), size)


def is_alpha_large(spec: SubspaceSpec, alpha) -> AlphaLargeResult:
    """rank of the column-restricted generator >= alpha |I| for every non-empty I."""
    alpha = parse_rational(alpha)
    if spec.n > 16:
        raise ResourceBudgetError("largeness check limited to n <= 16")
    for I in _coordinate_subsets(spec.n):
        rank = rank_mod_p(restrict_columns(spec.generator, I), spec.p) if spec.k else 0
        if rank < alpha * len(I):
            return AlphaLargeResult(False, I)
    return AlphaLargeResult(True)


def zero_free_vector(spec: SubspaceSpec) -> tuple[int, ...] | None:
    """First vector of V (coefficient-lexicographic) with no zero coordinate."""
    if spec.p**spec.k > MAX_SETS:
        raise ResourceBudgetError("subspace too large to scan")
    for _, v in span_vectors(spec.generator, spec.n, spec.p):
        if all(v):
            return v
    return None


@dataclass(frozen=True)
class SubspaceRegularity:
    holds: bool
    witness: tuple[int, ...] | None = None  # flattened element indices of T
    count: int | None = None

    def __bool__(self) -> bool:
        return self.holds


def subspace_regularity_check(spec: SubspaceSpec, alpha) -> SubspaceRegularity:
    """Uniform mass of every realised partial assignment T is at most p**(-alpha |T|).

    Counts come from enumerating V, not from ranks. With alpha = a/b the test
    count * p**(alpha t) <= p**k is decided as count**b * p**(a t) <= p**(k b).
    Patterns reusing a coordinate have mass zero and are skipped.
    """
    alpha = parse_rational(alpha)
    if alpha < 0:
        raise InputError("alpha must be non-negative")
    if spec.n > 16:
        raise ResourceBudgetError("regularity check limited to n <= 16")
    p, k = spec.p, spec.k
    a, b = alpha.numerator, alpha.denominator
    vectors = [v for _, v in span_vectors(spec.generator, spec.n, p)]
    for I in _coordinate_subsets(spec.n):
        counts: dict[tuple[int, ...], int] = {}
        for v in vectors:
            key = tuple(v[i] for i in I)
            counts[key] = counts.get(key, 0) + 1
        pattern, count = min(counts.items(), key=lambda kv: (-kv[1], kv[0]))
        if count**b * p ** (a * len(I)) > p ** (k * b):
            return SubspaceRegularity(False, tuple(spec.element(i, x) for i, x in zip(I, pattern)), count)
    return SubspaceRegularity(True)


def random_family(n: int, w: int, m: int, seed: int, nonredundant: bool = False) -> SetSystem:
    """m distinct random sets of size <= w; all of size exactly w when ``nonredundant``."""
    if n < 1 or w < 1 or m < 0:
        raise InputError("need n >= 1, w >= 1, m >= 0")
    w = min(w, n)
    rng = random.Random(seed)
    if nonredundant:
        cap = math.comb(n, w)
        if m > cap:
            raise InputError(f"only C({n},{w}) = {cap} sets of size {w} exist")
        if cap <= 100_000:
            sets = rng.sample(list(itertools.combinations(range(n), w)), m)
            return SetSystem.from_sets(n, sets)
    else:
        cap = sum(math.comb(n, s) for s in range(1, w + 1))
        if m > cap:
            raise InputError(f"only {cap} non-empty sets of size <= {w} exist")
    seen: list[int] = []
    have = set()
    while len(seen) < m:
        size = w if nonredundant else rng.randint(1, w)
        mk = to_mask(rng.sample(range(n), size))
        if mk not in have:
            have.add(mk)
            seen.append(mk)
    return SetSystem(n, tuple(seen))


def random_intersecting_family(n: int, w: int, m: int, seed: int, max_attempts: int = 2000,
                               min_size: int = 1) -> SetSystem:
    """Grow an intersecting family by rejection: each new set must meet all earlier ones."""
    rng = random.Random(seed)
    w = min(w, n)
    kept: list[int] = []
    for _ in range(max_attempts):
        if len(kept) >= m:
            break
        mk = to_mask(rng.sample(range(n), rng.randint(min(min_size, w), w)))
        if mk in kept or not all(mk & o for o in kept):
            continue
        kept.append(mk)
    return SetSystem(n, tuple(kept))


def random_family_without_disjoint(n: int, w: int, m: int, r: int, seed: int,
                                   max_attempts: int = 2000) -> SetSystem:
    """Grow a family with no r pairwise disjoint members by rejection."""
    rng = random.Random(seed)
    w = min(w, n)
    kept: list[int] = []
    for _ in range(max_attempts):
        if len(kept) >= m:
            break
        mk = to_mask(rng.sample(range(n), rng.randint(1, w)))
        if mk in kept:
            continue
        trial = SetSystem(n, tuple(kept + [mk]))
        if find_disjoint(trial, r) is None:
            kept.append(mk)
    return SetSystem(n, tuple(kept))


def family_from_spec(spec: dict) -> SetSystem:
    """Build a family from a JSON spec: ``{"kind": ..., ...parameters}``."""
    kind = spec.get("kind")
    try:
        if kind == "block":
            return block_family(BlockFamilySpec(int(spec["w"]), int(spec["kappa"])))
        if kind == "intersecting_block":
            return intersecting_block_family(IntersectingBlockSpec(int(spec["w"]), int(spec["t"])))
        if kind == "complete_uniform":
            return complete_uniform_family(int(spec["w"]), int(spec["n"]))
        if kind == "subspace":
            return subspace_family(subspace_spec_from_dict(spec))
        if kind in ("random", "random_intersecting"):
            if spec.get("seed") is None:
                raise InputError("random families need an explicit seed")
            args = int(spec["n"]), int(spec["w"]), int(spec["m"]), int(spec["seed"])
            if kind == "random":
                return random_family(*args, nonredundant=bool(spec.get("nonredundant", False)))
            return random_intersecting_family(*args)
    except KeyError as exc:
        raise InputError(f"spec of kind {kind!r} is missing {exc}") from None
    raise InputError(f"unknown family kind {kind!r}")


def subspace_spec_from_dict(spec: dict) -> SubspaceSpec:
    try:
        return SubspaceSpec(int(spec["p"]), int(spec["n"]), tuple(tuple(r) for r in spec.get("generator", [])))
    except KeyError as exc:
        raise InputError(f"subspace spec is missing {exc}") from None


def triangle() -> SetSystem:
    return complete_uniform_family(2, 3)

