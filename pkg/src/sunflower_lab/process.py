"""Iterative extraction of disjoint r-tuples from a distribution, and the
star system of their unions.

The loop repeatedly finds r pairwise disjoint positive-mass sets, removes
the smallest of their masses from each, and records the union. Analysing
the distribution on the unions either finds it regular, or yields a heavy
set whose majority piece bounds the regularity of the original distribution.
"""

from __future__ import annotations

import csv
import io
import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

from mpmath import log, mp, mpf

from .core import InputError, SetSystem, members, popcount, to_mask
from .regular import WeightedFamily, format_rational, is_kappa_regular, parse_rational, subset_mass
from .sunflower import find_disjoint

Finder = Callable[[SetSystem, int], "list[int] | None"]


def exact_finder(F: SetSystem, r: int) -> list[int] | None:
    return find_disjoint(F, r, "exact")


@dataclass(frozen=True)
class Iteration:
    indices: tuple[int, ...]  # into the original family
    delta: Fraction
    union: int  # bitmask of W_i
    mass_before: Fraction
    mass_after: Fraction


@dataclass
class ProcessTrace:
    family: SetSystem
    r: int
    initial: tuple[Fraction, ...]
    final: tuple[Fraction, ...]
    iterations: list[Iteration]
    halt: str  # "mass" | "no_tuple"

    @property
    def delta_total(self) -> Fraction:
        return sum((it.delta for it in self.iterations), Fraction(0))

    def to_dict(self) -> dict:
        return {
            "r": self.r,
            "halt": self.halt,
            "family": self.family.to_dict(),
            "initial": [format_rational(w) for w in self.initial],
            "final": [format_rational(w) for w in self.final],
            "delta_total": format_rational(self.delta_total),
            "iterations": [
                {
                    "indices": list(it.indices),
                    "delta": format_rational(it.delta),
                    "W": list(members(it.union)),
                    "mass_before": format_rational(it.mass_before),
                    "mass_after": format_rational(it.mass_after),
                }
                for it in self.iterations
            ],
        }

    def to_csv(self) -> str:
        buf = io.StringIO()
        out = csv.writer(buf, lineterminator="\n")
        out.writerow(["iteration", "delta", "delta_float", "residual_mass", "residual_mass_float"])
        for i, it in enumerate(self.iterations, 1):
            out.writerow([i, format_rational(it.delta), f"{float(it.delta):.12g}",
                          format_rational(it.mass_after), f"{float(it.mass_after):.12g}"])
        return buf.getvalue()


def run_extraction(F: SetSystem, D: WeightedFamily, r: int, finder: Finder = exact_finder) -> ProcessTrace:
    """Peel disjoint r-tuples off D while at least half the mass remains."""
    if r < 1:
        raise InputError("r must be positive")
    if D.family != F:
        raise InputError("distribution is not on the given family")
    D.require_distribution()
    weights = list(D.weights)
    total = sum(weights, Fraction(0))
    iterations: list[Iteration] = []
    half = Fraction(1, 2)
    while total >= half:
        alive = [i for i, w in enumerate(weights) if w > 0]
        hit = finder(F.subsystem(alive), r)
        if hit is None:
            return ProcessTrace(F, r, D.weights, tuple(weights), iterations, "no_tuple")
        chosen = tuple(alive[j] for j in hit)
        union = 0
        for i in chosen:
            if F.masks[i] & union:
                raise AssertionError("finder returned overlapping sets")
            union |= F.masks[i]
        delta = min(weights[i] for i in chosen)
        for i in chosen:
            weights[i] -= delta
        before, total = total, total - r * delta
        iterations.append(Iteration(chosen, delta, union, before, total))
    return ProcessTrace(F, r, D.weights, tuple(weights), iterations, "mass")


@dataclass(frozen=True)
class StarSystem:
    """Distinct unions W with their raw extracted mass and the normalised D*."""

    family: SetSystem
    masses: tuple[Fraction, ...]
    delta_total: Fraction

    @property
    def distribution(self) -> WeightedFamily:
        return WeightedFamily(self.family, tuple(m / self.delta_total for m in self.masses))

    def to_dict(self) -> dict:
        return {
            "family": self.family.to_dict(),
            "masses": [format_rational(m) for m in self.masses],
            "delta_total": format_rational(self.delta_total),
            "distribution": [format_rational(w) for w in self.distribution.weights],
        }


def build_star(trace: ProcessTrace) -> StarSystem:
    """Merge repeated unions; D*(W) is W's share of the total extracted mass."""
    if not trace.iterations:
        raise InputError("star system of an empty trace")
    order: list[int] = []
    mass: dict[int, Fraction] = {}
    for it in trace.iterations:
        if it.union not in mass:
            order.append(it.union)
            mass[it.union] = Fraction(0)
        mass[it.union] += it.delta
    fam = trace.family.with_masks(order)
    return StarSystem(fam, tuple(mass[m] for m in order), trace.delta_total)


@dataclass
class StarAnalysis:
    regular: bool
    beta: Fraction
    T: tuple[int, ...] = ()
    t: int = 0
    star_mass: Fraction | None = None  # D*-mass of T
    I: tuple[int, ...] = ()  # iteration positions with T inside W_i
    pieces: dict[int, tuple[int, int]] = field(default_factory=dict)  # i -> (j_i, T_i mask)
    T_star: tuple[int, ...] = ()
    I_sets: dict[int, tuple[int, ...]] = field(default_factory=dict)  # set index -> I(S)
    sums: dict[str, Fraction] = field(default_factory=dict)
    inequalities: dict[str, bool] = field(default_factory=dict)
    kappa_upper_power: Fraction | None = None  # kappa ** |T*| <= this

    @property
    def ok(self) -> bool:
        return self.regular or all(self.inequalities.values())

    def to_dict(self) -> dict:
        if self.regular:
            return {"outcome": "regular", "beta": format_rational(self.beta)}
        return {
            "outcome": "heavy",
            "beta": format_rational(self.beta),
            "T": list(self.T),
            "t": self.t,
            "star_mass": format_rational(self.star_mass),
            "I": list(self.I),
            "T_star": list(self.T_star),
            "I_sets": {str(k): list(v) for k, v in sorted(self.I_sets.items())},
            "sums": {k: format_rational(v) for k, v in sorted(self.sums.items())},
            "inequalities": dict(sorted(self.inequalities.items())),
            "kappa_upper": float(self.kappa_upper_power) ** (1 / len(self.T_star)),
            "kappa_upper_power": format_rational(self.kappa_upper_power),
            "kappa_upper_root": len(self.T_star),
        }


def analyze_star(star: StarSystem, original: WeightedFamily, trace: ProcessTrace, beta) -> StarAnalysis:
    """Turn a beta-regularity violation of D* into a heavy set T* of the original D.

    Inequalities recorded (all exact):
      majority_piece     r |T*| >= |T|
      majority_share     mass(T_i = T*) >= 2**-t * mass(I)
      star_heavy         mass(I) >= delta_total * beta**-t
      delta_floor        delta_total >= 1/(2r)     (mass-halted unit-mass runs)
      telescoping        sum over I(S) of delta_i <= D(S) for every S
      final_chain        D(sets containing T*) >= mass(T_i = T*) >= 1/(2r (2 beta)**t)
      eta_cap            (2r (2 beta)**t) <= (2r (2 beta)**r) ** |T*|
    """
    beta = parse_rational(beta)
    if beta <= 0:
        raise InputError("beta must be positive")
    cert = is_kappa_regular(star.distribution, beta)
    if cert.regular:
        return StarAnalysis(True, beta)
    r = trace.r
    T = cert.violating_set
    tm = to_mask(T)
    t = len(T)
    its = trace.iterations
    I = tuple(i for i, it in enumerate(its) if it.union & tm == tm)
    pieces: dict[int, tuple[int, int]] = {}
    for i in I:
        sets = its[i].indices
        j = max(range(len(sets)), key=lambda j: (popcount(trace.family.masks[sets[j]] & tm), -j))
        pieces[i] = (j, trace.family.masks[sets[j]] & tm)
    by_piece: dict[int, Fraction] = {}
    for i in I:
        by_piece[pieces[i][1]] = by_piece.get(pieces[i][1], 0) + its[i].delta
    t_star = min(by_piece, key=lambda p: (-by_piece[p], members(p)))
    mass_I = sum((its[i].delta for i in I), Fraction(0))
    mass_star = by_piece[t_star]

    I_sets: dict[int, list[int]] = {}
    for i in I:
        if pieces[i][1] == t_star:
            s = its[i].indices[pieces[i][0]]
            I_sets.setdefault(s, []).append(i)
    D_mass_Tstar = subset_mass(original, t_star)
    two_beta = 2 * beta
    floor_bound = Fraction(1) / (2 * r * two_beta**t)
    a = analysis = StarAnalysis(False, beta, T, t, cert.mass, I, pieces, members(t_star),
                                {k: tuple(v) for k, v in I_sets.items()})
    a.sums = {
        "mass_I": mass_I,
        "mass_T_star": mass_star,
        "delta_total": star.delta_total,
        "D_mass_T_star": D_mass_Tstar,
        "floor_bound": floor_bound,
    }
    ineq = a.inequalities
    ineq["majority_piece"] = r * popcount(t_star) >= t
    ineq["majority_share"] = mass_star >= mass_I / 2**t
    ineq["star_heavy"] = mass_I >= star.delta_total / beta**t
    halted_by_mass = trace.halt == "mass" and sum(trace.initial, Fraction(0)) == 1
    ineq["delta_floor"] = (not halted_by_mass) or star.delta_total >= Fraction(1, 2 * r)
    ineq["telescoping"] = all(
        sum((its[i].delta for i in v), Fraction(0)) <= original.weights[s] for s, v in I_sets.items()
    )
    chain_ok = D_mass_Tstar >= mass_star
    if halted_by_mass:
        chain_ok = chain_ok and mass_star >= floor_bound
    ineq["final_chain"] = chain_ok
    power = 1 / floor_bound
    a.kappa_upper_power = power
    ineq["eta_cap"] = power <= (2 * r * two_beta**r) ** popcount(t_star) if popcount(t_star) else False
    return analysis


def eta_bound(w: int, r: int, beta) -> Fraction:
    """r * 2**(r+1) * beta**r (independent of w once beta(wr) is supplied)."""
    beta = parse_rational(beta)
    return r * 2 ** (r + 1) * beta**r


def power_of_two_cascade(r: int, eta_values: dict) -> Fraction:
    """Replay the doubling induction for the bound on alpha(w, r).

    With s the least power of two >= r, returns
    max(eta(s/2), 2 eta(s/4), 4 eta(s/8), ..., (s/2) eta(1)).
    ``eta_values`` maps each power of two below s to eta(w, .).
    """
    if r < 2:
        raise InputError("r must be at least 2")
    s = 1
    while s < r:
        s *= 2
    best = None
    k, part = 0, s // 2
    while part >= 1:
        if part not in eta_values:
            raise InputError(f"missing eta value for r={part}")
        v = 2**k * parse_rational(eta_values[part])
        best = v if best is None else max(best, v)
        k += 1
        part //= 2
    return best


@dataclass(frozen=True)
class MainTheoremReport:
    w: int
    r: int
    c: Fraction
    log_wr: float
    alpha_bound: float
    c_r: float | None
    log2_size_threshold: float

    def to_dict(self) -> dict:
        return {k: (format_rational(v) if isinstance(v, Fraction) else v) for k, v in self.__dict__.items()}


def main_theorem_bound(w: int, r: int, c) -> MainTheoremReport:
    """Evaluate r 2**(r+1) (log2(wr))**(c r), the exponent c_r with
    (log2 w)**c_r equal to it, and log2 of the size threshold alpha**w."""
    c = parse_rational(c)
    if w < 2 or r < 1:
        raise InputError("need w >= 2 and r >= 1")
    with mp.workdps(50):
        return _main_theorem_bound(w, r, c)


def _main_theorem_bound(w: int, r: int, c: Fraction) -> MainTheoremReport:
    log_wr = log(mpf(w * r), 2)
    alpha = mpf(r) * 2 ** (r + 1) * log_wr ** (mpf(c.numerator) / c.denominator * r)
    log_w = log(mpf(w), 2)
    c_r = None
    if log_w > 1:
        c_r = float(log(alpha) / log(log_w))
    return MainTheoremReport(w, r, c, float(log_wr), float(alpha), c_r, float(w * log(alpha, 2)))


def intersecting_unions(trace: ProcessTrace) -> bool:
    return all(a.union & b.union for a, b in itertools.combinations(trace.iterations, 2))
