"""Sunflower certificates, disjoint-set search, and extraction recursions."""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass

from .core import (
    InputError,
    SetSystem,
    is_non_redundant,
    is_non_trivial,
    members,
    to_mask,
)
from .evaluation import is_approx_sunflower
from .regular import format_rational, heavy_set, parse_rational


@dataclass(frozen=True)
class SunflowerCertificate:
    core: tuple[int, ...]
    petal_indices: tuple[int, ...]

    def to_dict(self) -> dict:
        return {"core": list(self.core), "petal_indices": list(self.petal_indices)}


def verify_sunflower(F: SetSystem, cert: SunflowerCertificate) -> bool:
    """Every pair of the chosen sets meets exactly in the core."""
    idx = cert.petal_indices
    if len(idx) < 2 or len(set(idx)) != len(idx):
        return False
    if any(i < 0 or i >= len(F) for i in idx):
        return False
    k = to_mask(cert.core)
    chosen = [F.masks[i] for i in idx]
    return all(a & b == k for a, b in itertools.combinations(chosen, 2))


def find_disjoint(F: SetSystem, r: int, mode: str = "exact") -> list[int] | None:
    """Indices of ``r`` pairwise disjoint members, or None.

    ``exact`` backtracks in index order and returns the lexicographically first
    solution; it is complete but exponential. ``greedy`` repeatedly takes the
    compatible set with the fewest conflicts and may miss solutions.
    """
    if r < 1:
        raise InputError("r must be positive")
    ms = F.masks
    n = len(ms)
    if mode == "exact":
        chosen: list[int] = []

        def bt(start: int, used: int) -> bool:
            if len(chosen) == r:
                return True
            for i in range(start, n - (r - len(chosen)) + 1):
                if ms[i] & used == 0:
                    chosen.append(i)
                    if bt(i + 1, used | ms[i]):
                        return True
                    chosen.pop()
            return False

        return list(chosen) if bt(0, 0) else None
    if mode == "greedy":
        alive = list(range(n))
        chosen = []
        while alive and len(chosen) < r:
            conflicts = {i: sum(1 for j in alive if j != i and ms[i] & ms[j]) for i in alive}
            pick = min(alive, key=lambda i: (conflicts[i], i))
            chosen.append(pick)
            alive = [j for j in alive if j != pick and not ms[j] & ms[pick]]
        return sorted(chosen) if len(chosen) == r else None
    raise InputError(f"unknown mode {mode!r}")


def is_intersecting(F: SetSystem) -> bool:
    return all(a & b for a, b in itertools.combinations(F.masks, 2))


def _monochromatic_pick(masks, colour_masks) -> list[int] | None:
    picks = []
    for cm in colour_masks:
        for i, m in enumerate(masks):
            if m & cm == m:
                picks.append(i)
                break
        else:
            return None
    return picks


def coloring_search(F: SetSystem, r: int, seed: int, max_tries: int = 1000,
                    exhaustive_limit: int = 16) -> list[int] | None:
    """r pairwise disjoint sets, one monochromatic set per colour class.

    Random colourings first; if none works and at most ``exhaustive_limit``
    elements are in use, every colouring of those elements is swept in
    lexicographic order.
    """
    if not is_non_trivial(F):
        raise InputError("colouring search needs a non-trivial family")
    if r < 1:
        raise InputError("r must be positive")
    used = members(F.union_mask)
    rng = random.Random(seed)

    def colour_masks(assignment) -> list[int]:
        cms = [0] * r
        for e, c in zip(used, assignment):
            cms[c] |= 1 << e
        return cms

    for _ in range(max_tries):
        picks = _monochromatic_pick(F.masks, colour_masks([rng.randrange(r) for _ in used]))
        if picks is not None:
            return picks
    if len(used) <= exhaustive_limit:
        for assignment in itertools.product(range(r), repeat=len(used)):
            picks = _monochromatic_pick(F.masks, colour_masks(assignment))
            if picks is not None:
                return picks
    return None


@dataclass(frozen=True)
class ExtractionReport:
    """Found certificate, or the restriction chain the search walked."""

    found: bool
    certificate: SunflowerCertificate | None = None
    trace: tuple[tuple[tuple[int, ...], int], ...] = ()  # (T_k, |F_k| after restriction)
    sizes: tuple[int, ...] = ()  # |F_0|, |F_1|, ...
    kappa: object = None
    note: str = ""

    def to_dict(self) -> dict:
        d = {
            "outcome": "found" if self.found else "exhausted",
            "trace": [{"T": list(t), "size": s} for t, s in self.trace],
            "sizes": list(self.sizes),
            "note": self.note,
        }
        if self.certificate is not None:
            d["certificate"] = self.certificate.to_dict()
        if self.kappa is not None:
            d["kappa"] = format_rational(self.kappa)
        return d


def _require_extractable(F: SetSystem, r: int) -> None:
    if r < 2:
        raise InputError("sunflowers need r >= 2")
    if not is_non_trivial(F):
        raise InputError("extraction needs a non-trivial family")
    if not is_non_redundant(F):
        raise InputError("extraction needs a non-redundant family")


def erdos_rado_extract(F: SetSystem, r: int) -> ExtractionReport:
    """Classical recursion: r disjoint sets, or restrict to the most popular
    element of a maximal disjoint collection and recurse.

    The collection is grown greedily in set order; ties for the element go
    to the lowest index.
    """
    _require_extractable(F, r)
    idx = list(range(len(F)))  # positions in F of the current family's sets
    current = list(F.masks)
    core = 0
    trace = []
    sizes = [len(current)]
    while True:
        sub = F.with_masks(current)
        hit = find_disjoint(sub, r)
        if hit is not None:
            cert = SunflowerCertificate(members(core), tuple(idx[i] for i in hit))
            return ExtractionReport(True, cert, tuple(trace), tuple(sizes))
        if not current or max(bin(m).count("1") for m in current) == 0:
            return ExtractionReport(False, None, tuple(trace), tuple(sizes), note="width exhausted")
        union = 0
        for m in current:
            if m & union == 0:
                union |= m
        counts = {}
        for e in members(union):
            counts[e] = sum(1 for m in current if m >> e & 1)
        e = min(counts, key=lambda e: (-counts[e], e))
        bit = 1 << e
        keep = [i for i, m in enumerate(current) if m & bit]
        idx = [idx[i] for i in keep]
        current = [current[i] & ~bit for i in keep]
        core |= bit
        trace.append(((e,), len(current)))
        sizes.append(len(current))


def regularity_guided_extract(F: SetSystem, r: int, kappa) -> ExtractionReport:
    """Follow heavy sets while the uniform distribution is not kappa-regular,
    then look for r disjoint sets in what remains."""
    _require_extractable(F, r)
    kappa = parse_rational(kappa)
    idx = list(range(len(F)))
    current = list(F.masks)
    core = 0
    trace = []
    sizes = [len(current)]
    while True:
        sub = F.with_masks(current)
        heavy = heavy_set(sub, kappa)
        if heavy is None:
            break
        t = to_mask(heavy.T)
        keep = [i for i, m in enumerate(current) if m & t == t]
        idx = [idx[i] for i in keep]
        current = [current[i] & ~t for i in keep]
        core |= t
        trace.append((heavy.T, len(current)))
        sizes.append(len(current))
    hit = find_disjoint(F.with_masks(current), r)
    if hit is None:
        return ExtractionReport(False, None, tuple(trace), tuple(sizes), kappa, note="no r disjoint sets in the regular remainder")
    cert = SunflowerCertificate(members(core), tuple(idx[i] for i in hit))
    return ExtractionReport(True, cert, tuple(trace), tuple(sizes), kappa)


def sunflower_from_approx(F: SetSystem, r: int, seed: int = 0, max_tries: int = 1000) -> SunflowerCertificate | None:
    """Turn a (1/r, 1/r)-approximate sunflower into an r-sunflower.

    Strip the core, colour-search r disjoint residuals, re-attach the core.
    """
    if len(F) < 2 or not is_non_redundant(F):
        raise InputError("needs a non-redundant family with at least two sets")
    check = is_approx_sunflower(F, parse_rational(1) / r, parse_rational(1) / r)
    if not check:
        return None
    residual = check.residual  # non-redundant input keeps residuals distinct, in order
    picks = coloring_search(residual, r, seed, max_tries)
    if picks is None:
        return None
    return SunflowerCertificate(check.core, tuple(picks))


def find_sunflower_exact(F: SetSystem, r: int) -> SunflowerCertificate | None:
    """Complete search: every sunflower's core is the intersection of two of
    its petals, so try each pairwise intersection as a core (smallest first)
    and look for r disjoint residuals among the sets containing it."""
    if r < 2:
        raise InputError("sunflowers need r >= 2")
    ms = F.masks
    cores = sorted({a & b for a, b in itertools.combinations(ms, 2)}, key=lambda k: (bin(k).count("1"), k))
    for k in cores:
        idx = [i for i, m in enumerate(ms) if m & k == k]
        if len(idx) < r:
            continue
        hit = find_disjoint(F.with_masks([ms[i] & ~k for i in idx]), r)
        if hit is not None:
            return SunflowerCertificate(members(k), tuple(idx[j] for j in hit))
    return None
