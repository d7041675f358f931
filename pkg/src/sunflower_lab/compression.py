"""Upper-bound DNF compression oracles and the width-halving sandwich recursion.

The recursion splits a family at width w/2, replaces the wide part by an
oracle-supplied proper upper bound, and recurses on what stays narrow. Every
level records exact failure probabilities under the uniform measure, so the
bookkeeping inequalities are checked rather than assumed. Also home to the
numeric validators for the kappa_0 growth conditions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

from mpmath import iv

from .core import (
    InputError,
    ResourceBudgetError,
    SetSystem,
    check_proper_upper,
    is_non_trivial,
    members,
    minimal_subsystem,
    popcount,
    submasks,
)
from .evaluation import satisfaction_probability, uniform_distance
from .regular import format_rational, parse_rational

iv.dps = 40

CompressionOracle = Callable[[SetSystem, Fraction], SetSystem]


class OracleContractError(RuntimeError):
    """A compression oracle returned something that is not a close proper upper bound."""


def identity_oracle(F: SetSystem, eps) -> SetSystem:
    return F


def exhaustive_compression_oracle(F: SetSystem, eps, max_nodes: int = 2_000_000) -> SetSystem:
    """Smallest proper upper bound within uniform distance ``eps`` of ``F``.

    Covers are built by depth-first search: the first uncovered minimal set S
    must contain some member of the cover, so branch over the non-empty
    subsets of S. Sizes are tried in increasing order; within the first size
    that admits a close cover, fewer total elements win, then lexicographic
    order. The empty set is never used, so the result stays non-trivial.
    """
    eps = parse_rational(eps)
    if not is_non_trivial(F):
        raise InputError("compression needs a non-trivial family")
    targets = list(minimal_subsystem(F).masks)
    base = satisfaction_probability(F, Fraction(1, 2))
    nodes = 0

    def search(k: int) -> set[frozenset[int]]:
        found: set[frozenset[int]] = set()

        def dfs(cover: list[int]) -> None:
            nonlocal nodes
            nodes += 1
            if nodes > max_nodes:
                raise ResourceBudgetError(f"compression search exceeded {max_nodes} nodes")
            for s in targets:
                if not any(c & s == c for c in cover):
                    break
            else:
                found.add(frozenset(cover))
                return
            if len(cover) == k:
                return
            for piece in submasks(s):
                if piece:
                    cover.append(piece)
                    dfs(cover)
                    cover.pop()

        dfs([])
        return found

    half = Fraction(1, 2)
    for k in range(1, len(targets) + 1):
        best = None
        for cover in search(k):
            if len(cover) != k:
                continue
            G = F.with_masks(sorted(cover))
            if satisfaction_probability(G, half) - base > eps:
                continue
            key = (sum(popcount(c) for c in cover), sorted(members(c) for c in cover))
            if best is None or key < best[0]:
                best = (key, G)
        if best is not None:
            return F.with_masks(sorted(best[1].masks, key=members))
    raise AssertionError("the minimal sets always form a zero-distance cover")


def log2_upper(w: int) -> Fraction:
    """A rational at or just above log2(w); exact for powers of two."""
    if w & (w - 1) == 0:
        return Fraction(w.bit_length() - 1)
    return Fraction(math.ceil(math.log2(w) * 2**20) + 1, 2**20)


@dataclass
class RecursionLevel:
    width: int
    eps: Fraction
    family: SetSystem
    base_case: bool = False
    gamma: Fraction | None = None
    eps_next: Fraction | None = None
    wide: SetSystem | None = None  # F1
    compressed: SetSystem | None = None  # F2
    merged: SetSystem | None = None  # F3
    still_wide: SetSystem | None = None  # F4
    narrow: SetSystem | None = None  # F5
    prob_zero: dict[str, Fraction] = field(default_factory=dict)
    oracle_distance: Fraction | None = None
    checks: dict[str, bool] = field(default_factory=dict)
    kappa0: float | None = None
    wide_mass_bound: float | None = None
    kappa_next_lower: float | None = None
    note: str = ""

    def to_dict(self) -> dict:
        fam = lambda G: None if G is None else G.to_dict()  # noqa: E731
        rat = lambda x: None if x is None else format_rational(x)  # noqa: E731
        return {
            "width": self.width,
            "eps": rat(self.eps),
            "base_case": self.base_case,
            "gamma": rat(self.gamma),
            "eps_next": rat(self.eps_next),
            "F": fam(self.family),
            "F1": fam(self.wide),
            "F2": fam(self.compressed),
            "F3": fam(self.merged),
            "F4": fam(self.still_wide),
            "F5": fam(self.narrow),
            "prob_zero": {k: format_rational(v) for k, v in sorted(self.prob_zero.items())},
            "oracle_distance": rat(self.oracle_distance),
            "checks": dict(sorted(self.checks.items())),
            "kappa0": self.kappa0,
            "wide_mass_bound": self.wide_mass_bound,
            "kappa_next_lower": self.kappa_next_lower,
            "note": self.note,
        }


@dataclass
class RecursionTrace:
    levels: list[RecursionLevel]

    @property
    def depth(self) -> int:
        return len(self.levels)

    @property
    def ok(self) -> bool:
        return all(all(lv.checks.values()) for lv in self.levels)

    def to_dict(self) -> dict:
        return {"depth": self.depth, "ok": self.ok, "levels": [lv.to_dict() for lv in self.levels]}


def _kappa0_float(w: int, eps: Fraction, c_prime) -> float | None:
    if w < 2:
        return None
    try:
        return (math.log2(w) ** 2 / float(eps)) ** float(c_prime)
    except OverflowError:
        return math.inf


def sandwich_recursion(F: SetSystem, eps, oracle: CompressionOracle, c=2, c_prime=24) -> RecursionTrace:
    """Run the width-halving recursion on ``F`` with the given oracle.

    Per level with width w >= 3: gamma = eps / log2(w) rounded down to a
    rational, eps' = eps - gamma (so eps' + gamma = eps exactly and
    eps' >= eps(1 - 1/log2 w)). Failure probabilities are exact, uniform
    measure, over the ambient universe. Widths <= 2 and empty remainders
    end the recursion.
    """
    eps = parse_rational(eps)
    half = Fraction(1, 2)

    def q(G: SetSystem) -> Fraction:
        return 1 - satisfaction_probability(G, half)

    levels: list[RecursionLevel] = []
    current = F
    while True:
        w = current.width
        lv = RecursionLevel(width=w, eps=eps, family=current)
        lv.prob_zero["f"] = q(current)
        levels.append(lv)
        if w <= 2 or not len(current):
            lv.base_case = True
            lv.note = "empty family" if not len(current) else "width <= 2"
            return RecursionTrace(levels)
        if current.has_empty_set():
            lv.base_case = True
            lv.note = "contains the empty set; f is constant 1"
            return RecursionTrace(levels)

        gamma = eps / log2_upper(w)
        lv.gamma = gamma
        lv.eps_next = eps - gamma
        lv.checks["eps_accounting"] = lv.eps_next + gamma == eps
        lv.kappa0 = _kappa0_float(w, eps, c_prime)

        wide = current.with_masks(m for m in current.masks if 2 * popcount(m) >= w)
        lv.wide = wide
        if len(wide):
            compressed = oracle(wide, gamma)
            if compressed.universe_size != current.universe_size:
                raise OracleContractError("oracle changed the universe")
            witness = check_proper_upper(compressed, wide)
            if not witness:
                raise OracleContractError(f"oracle output misses {witness.witness}")
            if compressed.width > wide.width:
                raise OracleContractError("oracle output is wider than its input")
            dist = uniform_distance(wide, compressed)
            if dist > gamma:
                raise OracleContractError(f"oracle output is {dist} away, allowed {gamma}")
            lv.oracle_distance = dist
        else:
            compressed = current.with_masks(())
            lv.oracle_distance = Fraction(0)
        lv.compressed = compressed
        wide_set = set(wide.masks)
        merged = current.with_masks([m for m in current.masks if m not in wide_set] + list(compressed.masks))
        lv.merged = merged
        still_wide = merged.with_masks(m for m in merged.masks if 2 * popcount(m) >= w)
        narrow = merged.with_masks(m for m in merged.masks if 2 * popcount(m) < w)
        lv.still_wide, lv.narrow = still_wide, narrow

        pz = lv.prob_zero
        pz["f1"], pz["f2"], pz["f3"], pz["f5"] = q(wide), q(compressed), q(merged), q(narrow)
        gap = pz["f1"] - pz["f2"]
        lv.checks["oracle_gap_le_gamma"] = 0 <= gap <= gamma
        lv.checks["f_le_f3_plus_gap"] = pz["f"] <= pz["f3"] + gap
        lv.checks["f_le_f3_plus_gamma"] = pz["f"] <= pz["f3"] + gamma
        lv.checks["f3_le_f5"] = pz["f3"] <= pz["f5"]
        lv.checks["chain"] = pz["f"] <= pz["f5"] + gamma
        if lv.kappa0 is not None and lv.kappa0 not in (0.0, math.inf):
            lv.wide_mass_bound = len(still_wide) * lv.kappa0 ** (-w / 2)
            lv.kappa_next_lower = lv.kappa0 * (1 - lv.wide_mass_bound)

        if merged.has_empty_set():
            lv.note = "F3 contains the empty set; f3 is constant 1"
            return RecursionTrace(levels)
        current, eps = narrow, lv.eps_next


@dataclass(frozen=True)
class TauCheck:
    holds: bool
    equality: bool
    degenerate: bool
    tau: float
    tau_next: float | None


def tau_check(w: int, eps) -> TauCheck:
    """Compare tau(floor(w/2), eps(1 - 1/log w)) with tau(w, eps), tau = log2(w)/eps.

    For w >= 3 the inequality reduces exactly to log2 floor(w/2) <= log2 w - 1,
    i.e. 2*floor(w/2) <= w, with equality iff w is even. At w = 2 the shrunken
    error is 0 and tau_next is 0/0; the reduced form (equality) is reported with
    ``degenerate`` set.
    """
    eps = parse_rational(eps)
    if w < 2:
        raise InputError("tau is defined for w >= 2")
    if eps <= 0:
        raise InputError("eps must be positive")
    h = w // 2
    holds = 2 * h <= w
    equality = 2 * h == w
    L = iv.log(w) / iv.log(2)
    tau = L / _iv_frac(eps)
    if w == 2:
        return TauCheck(holds, equality, True, float(tau.mid), None)
    eps_next = _iv_frac(eps) * (1 - 1 / L)
    tau_next = (iv.log(h) / iv.log(2)) / eps_next
    # interval cross-check of the exact reduction
    if tau_next.a > tau.b:
        raise AssertionError(f"interval evaluation contradicts the reduction at w={w}")
    return TauCheck(holds, equality, False, float(tau.mid), float(tau_next.mid))


def _iv_frac(x: Fraction):
    return iv.mpf(x.numerator) / iv.mpf(x.denominator)


def _iv_log2(w: int):
    if w == 1:
        return iv.mpf(0)
    return iv.log(w) / iv.log(2)


def kappa0_interval(w: int, eps: Fraction, c_prime: Fraction):
    """((log2 w)**2 / eps) ** c' as an outward-rounded interval."""
    base = _iv_log2(w) ** 2 / _iv_frac(eps)
    if w == 1:
        return iv.mpf(0)
    return base ** _iv_frac(c_prime)


def _verdict(lhs, rhs) -> str:
    if lhs.a >= rhs.b:
        return "pass"
    if lhs.b < rhs.a:
        return "fail"
    return "undecided"


@dataclass(frozen=True)
class Kappa0Report:
    w: int
    eps: Fraction
    c: Fraction
    c_prime: Fraction
    conditions: dict
    tau: TauCheck | None

    @property
    def passed(self) -> bool:
        return all(v == "pass" for v in self.conditions.values())

    def to_dict(self) -> dict:
        return {
            "w": self.w,
            "eps": format_rational(self.eps),
            "c": format_rational(self.c),
            "c_prime": format_rational(self.c_prime),
            "conditions": dict(self.conditions),
            "passed": self.passed,
            "tau_equality": None if self.tau is None else self.tau.equality,
        }


def kappa0_conditions(w: int, eps, c, c_prime) -> Kappa0Report:
    """Evaluate the growth conditions on kappa0(w, eps) = ((log2 w)**2/eps)**c'.

    (i)   kappa0 >= w (2**w log2(1/eps))**2            at w in {1, 2}
    (ii)  kappa0 >= (log2(w)/eps)**(12c)                at w >= 3
    (iii) kappa0(w, eps) >= kappa0(floor(w/2), eps(1 - 1/log2 w)) + 1   at w >= 3
    For w >= 3 condition (i) is also evaluated at the base width 2 with the
    same eps. Verdicts come from interval comparisons: "pass" or "fail" only
    when the intervals separate.
    """
    eps, c, c_prime = parse_rational(eps), parse_rational(c), parse_rational(c_prime)
    if w < 1:
        raise InputError("w must be at least 1")
    if not 0 < eps < 1:
        raise InputError("eps must lie in (0, 1)")
    conditions: dict[str, str] = {}
    conditions["c_gt_1"] = "pass" if c > 1 else "fail"
    conditions["c_prime_ge_12c"] = "pass" if c_prime >= 12 * c else "fail"

    def cond_i(width: int) -> str:
        lhs = kappa0_interval(width, eps, c_prime)
        rhs = width * (2**width * _iv_log2_frac_inv(eps)) ** 2
        return _verdict(lhs, rhs)

    if w <= 2:
        conditions["i"] = cond_i(w)
        return Kappa0Report(w, eps, c, c_prime, conditions, tau_check(w, eps) if w == 2 else None)
    conditions["i_at_base_2"] = cond_i(2)
    k0 = kappa0_interval(w, eps, c_prime)
    L = _iv_log2(w)
    conditions["ii"] = _verdict(k0, (L / _iv_frac(eps)) ** _iv_frac(12 * c))
    eps_next = _iv_frac(eps) * (1 - 1 / L)
    h = w // 2
    if h == 1:
        k0_next = iv.mpf(0)
    else:
        k0_next = (_iv_log2(h) ** 2 / eps_next) ** _iv_frac(c_prime)
    conditions["iii"] = _verdict(k0, k0_next + 1)
    tc = tau_check(w, eps)
    conditions["tau_monotone"] = "pass" if tc.holds else "fail"
    return Kappa0Report(w, eps, c, c_prime, conditions, tc)


def _iv_log2_frac_inv(eps: Fraction):
    # log2(1/eps) = log2(den) - log2(num)
    return _iv_log2(eps.denominator) - _iv_log2(eps.numerator)
