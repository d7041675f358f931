"""Regular distributions and exact regularity certification of set systems.

A distribution D on non-empty sets is kappa-regular when every T is contained
in a D-random set with probability at most ``kappa**-|T|``. A family is
kappa-regular when some kappa-regular D is supported on it; deciding that is a
linear feasibility problem, solved here exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, Mapping

from .core import InputError, SetSystem, is_non_trivial, members, popcount, submasks, to_mask, _as_mask
from .lp import maximize


def parse_rational(value) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, float):
        raise InputError(f"refusing float {value!r}; pass a rational string like '3/2'")
    try:
        return Fraction(str(value).strip())
    except (ValueError, ZeroDivisionError) as exc:
        raise InputError(f"bad rational {value!r}: {exc}") from None


def format_rational(x: Fraction) -> str:
    return f"{x.numerator}/{x.denominator}"


@dataclass(frozen=True)
class WeightedFamily:
    """Non-negative exact weights on the sets of a family."""

    family: SetSystem
    weights: tuple[Fraction, ...]

    def __post_init__(self):
        ws = tuple(parse_rational(w) for w in self.weights)
        if len(ws) != len(self.family):
            raise InputError(f"{len(ws)} weights for {len(self.family)} sets")
        if any(w < 0 for w in ws):
            raise InputError("weights must be non-negative")
        object.__setattr__(self, "weights", ws)

    @classmethod
    def uniform(cls, F: SetSystem) -> WeightedFamily:
        if not len(F):
            raise InputError("no uniform distribution on an empty family")
        w = Fraction(1, len(F))
        return cls(F, (w,) * len(F))

    @property
    def total(self) -> Fraction:
        return sum(self.weights, Fraction(0))

    def support(self) -> list[tuple[int, Fraction]]:
        return [(m, w) for m, w in zip(self.family.masks, self.weights) if w > 0]

    def weight_of(self, S) -> Fraction:
        m = _as_mask(S)
        try:
            return self.weights[self.family.masks.index(m)]
        except ValueError:
            return Fraction(0)

    def is_distribution(self) -> bool:
        return self.total == 1 and all(m != 0 for m, _ in self.support())

    def require_distribution(self) -> None:
        if self.total != 1:
            raise InputError(f"weights sum to {self.total}, not 1")
        if any(m == 0 for m, _ in self.support()):
            raise InputError("distribution puts mass on the empty set; regularity is unbounded there")

    def to_dict(self) -> dict:
        d = self.family.to_dict()
        d["weights"] = [format_rational(w) for w in self.weights]
        return d

    @classmethod
    def from_dict(cls, d: dict) -> WeightedFamily:
        F = SetSystem.from_dict(d)
        if "weights" not in d:
            raise InputError("missing 'weights'")
        return cls(F, tuple(parse_rational(w) for w in d["weights"]))


def subset_mass(D: WeightedFamily, T) -> Fraction:
    t = _as_mask(T)
    return sum((w for m, w in zip(D.family.masks, D.weights) if m & t == t), Fraction(0))


def _bound(kappa: Fraction, size: int) -> Fraction:
    return Fraction(1) / kappa**size


@dataclass(frozen=True)
class RegularityCertificate:
    """Outcome of a regularity query at a fixed kappa.

    ``regular`` with a ``witness`` distribution; otherwise either a concrete
    violating set with its mass (distribution queries) or an infeasible LP with
    its binding constraint sets (family queries).
    """

    regular: bool
    kappa: Fraction
    witness: WeightedFamily | None = None
    violating_set: tuple[int, ...] | None = None
    mass: Fraction | None = None
    binding: tuple[tuple[int, ...], ...] = ()
    lp_value: Fraction | None = None

    @property
    def verdict(self) -> str:
        if self.regular:
            return "regular"
        return "violation" if self.violating_set is not None else "infeasible"

    def __bool__(self) -> bool:
        return self.regular

    def to_dict(self) -> dict:
        d = {"verdict": self.verdict, "kappa": format_rational(self.kappa)}
        if self.witness is not None:
            d["witness"] = self.witness.to_dict()
        if self.violating_set is not None:
            d["violating_set"] = list(self.violating_set)
            d["mass"] = format_rational(self.mass)
        if self.binding:
            d["binding"] = [list(t) for t in self.binding]
        if self.lp_value is not None:
            d["lp_value"] = format_rational(self.lp_value)
        return d


def _containment_masses(pairs: Iterable[tuple[int, Fraction]]) -> dict[int, Fraction]:
    masses: dict[int, Fraction] = {}
    for m, w in pairs:
        for t in submasks(m):
            if t:
                masses[t] = masses.get(t, 0) + w
    return masses


def is_kappa_regular(D: WeightedFamily, kappa) -> RegularityCertificate:
    """Exact check of every non-empty T inside a support set.

    On failure the reported T maximises the excess ``mass - kappa**-|T|``;
    ties go to the smaller, then lexicographically first, T.
    """
    kappa = parse_rational(kappa)
    if kappa <= 0:
        raise InputError("kappa must be positive")
    D.require_distribution()
    worst = None
    for t, mass in _containment_masses(D.support()).items():
        size = popcount(t)
        excess = mass - _bound(kappa, size)
        if excess > 0:
            key = (-excess, size, members(t))
            if worst is None or key < worst[0]:
                worst = (key, t, mass)
    if worst is None:
        return RegularityCertificate(True, kappa, witness=D)
    return RegularityCertificate(False, kappa, violating_set=members(worst[1]), mass=worst[2])


def _constraint_rows(F: SetSystem) -> list[tuple[int, int]]:
    """(representative T, cover bitmask over set indices), one per distinct cover.

    Among the T sharing a cover the largest is kept; its bound is the tightest
    once kappa > 1.
    """
    cover: dict[int, int] = {}
    for idx, m in enumerate(F.masks):
        bit = 1 << idx
        for t in submasks(m):
            if t:
                cover[t] = cover.get(t, 0) | bit
    best: dict[int, int] = {}
    for t in sorted(cover, key=lambda t: (-popcount(t), members(t))):
        best.setdefault(cover[t], t)
    return sorted(((t, c) for c, t in best.items()), key=lambda tc: (popcount(tc[0]), members(tc[0])))


def certify_family(F: SetSystem, kappa, max_pivots: int | None = None) -> RegularityCertificate:
    """Decide by exact LP whether some kappa-regular distribution lives on ``F``.

    Maximises the total weight subject to every containment bound and a cap of
    one; the family is kappa-regular exactly when the optimum reaches one.
    """
    kappa = parse_rational(kappa)
    if kappa <= 0:
        raise InputError("kappa must be positive")
    if not is_non_trivial(F):
        raise InputError("regularity is defined only for non-trivial families")
    if kappa <= 1:
        return RegularityCertificate(True, kappa, witness=WeightedFamily.uniform(F))
    n = len(F)
    rows = _constraint_rows(F)
    A = [[1 if c >> j & 1 else 0 for j in range(n)] for _, c in rows]
    b = [_bound(kappa, popcount(t)) for t, _ in rows]
    A.append([1] * n)
    b.append(Fraction(1))
    res = maximize([1] * n, A, b, max_pivots=max_pivots)
    if res.value == 1:
        return RegularityCertificate(True, kappa, witness=WeightedFamily(F, tuple(res.x)), lp_value=res.value)
    binding = tuple(members(rows[i][0]) for i in res.tight_rows if i < len(rows))
    return RegularityCertificate(False, kappa, binding=binding, lp_value=res.value)


def simplest_between(lo: Fraction, hi: Fraction) -> Fraction:
    """The rational of least denominator in the closed interval [lo, hi], lo > 0."""
    fl = math.floor(lo)
    if fl == lo:
        return Fraction(fl)
    if fl + 1 <= hi:
        return Fraction(fl + 1)
    return fl + 1 / simplest_between(1 / (hi - fl), 1 / (lo - fl))


@dataclass(frozen=True)
class RegularityInterval:
    """Bracket ``lo <= kappa* <= hi`` for the largest feasible kappa."""

    lo: Fraction
    hi: Fraction
    lo_certificate: RegularityCertificate
    hi_certificate: RegularityCertificate
    steps: int = 0

    def __contains__(self, x) -> bool:
        return self.lo <= parse_rational(x) <= self.hi

    @property
    def width(self) -> Fraction:
        return self.hi - self.lo

    def to_dict(self) -> dict:
        return {
            "lo": format_rational(self.lo),
            "hi": format_rational(self.hi),
            "lo_float": float(self.lo),
            "hi_float": float(self.hi),
            "steps": self.steps,
            "witness": self.lo_certificate.witness.to_dict(),
        }


def max_regularity(F: SetSystem, tol, max_pivots: int | None = None) -> RegularityInterval:
    """Bracket the supremum of feasible kappa to within ``tol``.

    Starts from [1, u+1] where u is the number of elements used by F (the
    singleton bounds sum to at most u/kappa, so kappa <= u). Probes the
    simplest rational in the middle third of the current bracket, which lands
    exactly on small-denominator optima.
    """
    tol = parse_rational(tol)
    if tol <= 0:
        raise InputError("tol must be positive")
    lo = Fraction(1)
    lo_cert = certify_family(F, lo, max_pivots)
    hi = Fraction(popcount(F.union_mask) + 1)
    hi_cert = certify_family(F, hi, max_pivots)
    if hi_cert.regular:
        raise AssertionError("upper starting point unexpectedly feasible")
    steps = 0
    while hi - lo > tol:
        third = (hi - lo) / 3
        mid = simplest_between(lo + third, hi - third)
        cert = certify_family(F, mid, max_pivots)
        if cert.regular:
            lo, lo_cert = mid, cert
        else:
            hi, hi_cert = mid, cert
        steps += 1
    return RegularityInterval(lo, hi, lo_cert, hi_cert, steps)


@dataclass(frozen=True)
class HeavySet:
    T: tuple[int, ...]
    count: int


def heavy_set(F: SetSystem, kappa) -> HeavySet | None:
    """A T with ``count(T) * kappa**|T| > |F|`` maximising that score, if any.

    Such a T is exactly where the uniform distribution on F stops being
    kappa-regular. Ties: higher score, then smaller T, then lexicographic.
    """
    kappa = parse_rational(kappa)
    if kappa <= 1:
        raise InputError("heavy_set needs kappa > 1")
    if not len(F):
        raise InputError("heavy_set needs a non-empty family")
    counts: dict[int, int] = {}
    for m in F.masks:
        for t in submasks(m):
            if t:
                counts[t] = counts.get(t, 0) + 1
    best = None
    for t, c in counts.items():
        size = popcount(t)
        key = (-c * kappa**size, size, members(t))
        if best is None or key < best[0]:
            best = (key, t, c)
    if best is None or -best[0][0] <= len(F):
        return None
    return HeavySet(members(best[1]), best[2])


def pushforward_upper(D: WeightedFamily, phi: Callable | Mapping) -> WeightedFamily:
    """Move each set's mass to a non-empty subset of it, merging collisions."""
    get = phi.__getitem__ if isinstance(phi, Mapping) else phi
    order: list[int] = []
    mass: dict[int, Fraction] = {}
    for m, w in D.support():
        image = get(members(m))
        im = to_mask(image)
        if im & m != im:
            raise InputError(f"image {members(im)} is not inside {members(m)}")
        if im == 0:
            raise InputError(f"image of {members(m)} is empty")
        if im not in mass:
            order.append(im)
            mass[im] = Fraction(0)
        mass[im] += w
    image_family = D.family.with_masks(order)
    return WeightedFamily(image_family, tuple(mass[m] for m in order))


def condition(D: WeightedFamily, Fp: SetSystem) -> tuple[WeightedFamily, Fraction]:
    """Restrict D to ``Fp`` and renormalise; also return the kept mass."""
    own = set(D.family.masks)
    for m in Fp.masks:
        if m not in own:
            raise InputError(f"{members(m)} is not a set of the conditioned family")
    ws = [D.weight_of(m) for m in Fp.masks]
    alpha = sum(ws, Fraction(0))
    if alpha == 0:
        raise InputError("conditioning on a zero-mass subfamily")
    return WeightedFamily(Fp, tuple(w / alpha for w in ws)), alpha


def uniform_mass_table(F: SetSystem) -> dict[tuple[int, ...], Fraction]:
    """Uniform containment mass of every non-empty T inside some member."""
    D = WeightedFamily.uniform(F)
    return {members(t): m for t, m in _containment_masses(D.support()).items()}
