"""p-biased satisfaction probabilities and approximate-sunflower predicates."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .core import InputError, SetSystem, core_intersection, link, members, popcount, submasks
from .regular import parse_rational

# fixed chunk size keeps Monte-Carlo output independent of how chunks are scheduled
MC_CHUNK = 8192


def _check_p(p) -> Fraction:
    p = parse_rational(p)
    if not 0 < p < 1:
        raise InputError("p must lie strictly between 0 and 1")
    return p


def _minimize(terms) -> frozenset[int]:
    ts = sorted(set(terms), key=popcount)
    kept: list[int] = []
    for t in ts:
        if not any(k & t == k for k in kept):
            kept.append(t)
    return frozenset(kept)


def _components(terms: frozenset[int]) -> list[frozenset[int]]:
    groups: list[tuple[int, list[int]]] = []
    for t in terms:
        merged_mask, merged = t, [t]
        rest = []
        for gm, gl in groups:
            if gm & merged_mask:
                merged_mask |= gm
                merged.extend(gl)
            else:
                rest.append((gm, gl))
        groups = rest + [(merged_mask, merged)]
    return [frozenset(g) for _, g in groups]


def _prob_none(terms: frozenset[int], p: Fraction, q: Fraction, memo: dict) -> Fraction:
    """Pr[no term is contained in the p-biased random set]; terms minimized."""
    if 0 in terms:
        return Fraction(0)
    if not terms:
        return Fraction(1)
    hit = memo.get(terms)
    if hit is not None:
        return hit
    comps = _components(terms)
    if len(comps) > 1:
        out = Fraction(1)
        for c in comps:
            out *= _prob_none(c, p, q, memo)
            if not out:
                break
    else:
        freq: dict[int, int] = {}
        for t in terms:
            m, i = t, 0
            while m:
                if m & 1:
                    freq[i] = freq.get(i, 0) + 1
                m >>= 1
                i += 1
        e = min(freq, key=lambda i: (-freq[i], i))
        bit = 1 << e
        present = _minimize(t & ~bit for t in terms)
        absent = frozenset(t for t in terms if not t & bit)
        out = p * _prob_none(present, p, q, memo) + q * _prob_none(absent, p, q, memo)
    memo[terms] = out
    return out


def satisfaction_probability(F: SetSystem, p) -> Fraction:
    """Exact Pr over W ~ X_p that some member of F is contained in W.

    Splits on the most frequent element, factors over element-disjoint
    components, and memoizes on the minimized term set.
    """
    p = _check_p(p)
    return 1 - _prob_none(_minimize(F.masks), p, 1 - p, {})


def is_satisfying(F: SetSystem, p, eps) -> bool:
    eps = parse_rational(eps)
    return satisfaction_probability(F, p) > 1 - eps


def uniform_distance(F: SetSystem, G: SetSystem) -> Fraction:
    """Pr[f_F != f_G] under the uniform measure, assuming f_G >= f_F pointwise."""
    half = Fraction(1, 2)
    return satisfaction_probability(G, half) - satisfaction_probability(F, half)


@dataclass(frozen=True)
class MonteCarloEstimate:
    estimate: float
    stderr: float
    trials: int
    hits: int


def monte_carlo_satisfaction(F: SetSystem, p, trials: int, seed: int) -> MonteCarloEstimate:
    """Sample-mean estimate with its standard error; chunks seeded from (seed, chunk)."""
    p = float(_check_p(p))
    if trials <= 0:
        raise InputError("trials must be positive")
    n = F.universe_size
    if not len(F):
        return MonteCarloEstimate(0.0, 0.0, trials, 0)
    masks = F.masks
    cols = [np.array(members(m), dtype=np.intp) for m in masks]
    hits = 0
    children = np.random.SeedSequence([seed]).spawn((trials + MC_CHUNK - 1) // MC_CHUNK)
    for k, child in enumerate(children):
        size = min(MC_CHUNK, trials - k * MC_CHUNK)
        rng = np.random.default_rng(child)
        draws = rng.random((size, n)) < p
        ok = np.zeros(size, dtype=bool)
        for c in cols:
            ok |= draws[:, c].all(axis=1) if len(c) else True
        hits += int(ok.sum())
    est = hits / trials
    stderr = (est * (1 - est) / trials) ** 0.5
    return MonteCarloEstimate(est, stderr, trials, hits)


@dataclass(frozen=True)
class ApproxSunflowerCheck:
    holds: bool
    core: tuple[int, ...]
    residual: SetSystem
    probability: Fraction
    degenerate: bool

    def __bool__(self) -> bool:
        return self.holds


def is_approx_sunflower(F: SetSystem, p, eps) -> ApproxSunflowerCheck:
    """Strip the common core and test the residual for (p, eps)-satisfaction.

    A residual containing the empty set (single-member input) is satisfied
    with probability one; such results carry ``degenerate=True``.
    """
    if not len(F):
        raise InputError("approximate sunflower needs a non-empty family")
    eps = parse_rational(eps)
    core = core_intersection(F)
    residual = link(F, core)
    prob = satisfaction_probability(residual, p)
    return ApproxSunflowerCheck(prob > 1 - eps, core, residual, prob, residual.has_empty_set())


def find_approx_sunflower(F: SetSystem, p, eps, mode: str = "link") -> SetSystem | None:
    """Search for a subfamily of at least two sets that is a (p, eps)-approximate sunflower.

    ``link`` tries the stars ``{S : T subset of S}`` for T = {} and then every T
    inside a member, by size then lexicographically. ``exhaustive`` tries every
    subfamily, largest first (needs ``len(F) <= 20``).
    """
    if mode == "link":
        cands = {0}
        for m in F.masks:
            cands.update(submasks(m))
        for t in sorted(cands, key=lambda t: (popcount(t), members(t))):
            sub = F.with_masks(m for m in F.masks if m & t == t)
            if len(sub) >= 2 and is_approx_sunflower(sub, p, eps):
                return sub
        return None
    if mode == "exhaustive":
        if len(F) > 20:
            raise InputError("exhaustive search is limited to 20 sets")
        for size in range(len(F), 1, -1):
            for idx in itertools.combinations(range(len(F)), size):
                sub = F.subsystem(idx)
                if is_approx_sunflower(sub, p, eps):
                    return sub
        return None
    raise InputError(f"unknown search mode {mode!r}")
