"""Set systems over a dense integer universe, read as monotone DNFs.

Sets are stored as int bitmasks; the public surface speaks in sorted tuples of
element indices.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Sequence


class InputError(ValueError):
    """Malformed or out-of-contract input."""


class ResourceBudgetError(RuntimeError):
    """A configured search or pivot budget was exhausted."""


def to_mask(elements: Iterable[int]) -> int:
    m = 0
    for e in elements:
        if e < 0:
            raise InputError(f"negative element index {e}")
        m |= 1 << e
    return m


def members(mask: int) -> tuple[int, ...]:
    out = []
    i = 0
    while mask:
        if mask & 1:
            out.append(i)
        mask >>= 1
        i += 1
    return tuple(out)


def popcount(mask: int) -> int:
    return bin(mask).count("1")


def submasks(mask: int) -> Iterator[int]:
    """All submasks of ``mask``, including 0 and ``mask`` itself."""
    sub = mask
    while True:
        yield sub
        if sub == 0:
            return
        sub = (sub - 1) & mask


def _as_mask(T) -> int:
    if isinstance(T, int):
        return T
    return to_mask(T)


@dataclass(frozen=True)
class SetSystem:
    """A family of distinct subsets of ``range(universe_size)``.

    Duplicate sets are merged on construction, keeping first-occurrence order.
    ``labels`` optionally names the universe elements; it is metadata and does
    not take part in equality.
    """

    universe_size: int
    masks: tuple[int, ...]
    labels: tuple | None = field(default=None, compare=False)

    def __post_init__(self):
        if self.universe_size < 0:
            raise InputError("universe size must be non-negative")
        limit = 1 << self.universe_size
        seen = set()
        uniq = []
        for m in self.masks:
            if m < 0 or m >= limit:
                raise InputError(f"set {members(m)} leaves universe of size {self.universe_size}")
            if m not in seen:
                seen.add(m)
                uniq.append(m)
        object.__setattr__(self, "masks", tuple(uniq))
        if self.labels is not None and len(self.labels) != self.universe_size:
            raise InputError("label table does not match universe size")

    @classmethod
    def from_sets(cls, universe_size: int, sets: Iterable[Iterable[int]], labels=None) -> SetSystem:
        return cls(universe_size, tuple(to_mask(s) for s in sets), labels)

    @property
    def sets(self) -> list[tuple[int, ...]]:
        return [members(m) for m in self.masks]

    @property
    def width(self) -> int:
        return max((popcount(m) for m in self.masks), default=0)

    def __len__(self) -> int:
        return len(self.masks)

    def __iter__(self) -> Iterator[tuple[int, ...]]:
        return (members(m) for m in self.masks)

    def __contains__(self, s) -> bool:
        return _as_mask(s) in self.masks

    def index(self, s) -> int:
        return self.masks.index(_as_mask(s))

    @property
    def union_mask(self) -> int:
        u = 0
        for m in self.masks:
            u |= m
        return u

    def has_empty_set(self) -> bool:
        return 0 in self.masks

    def subsystem(self, indices: Iterable[int]) -> SetSystem:
        return SetSystem(self.universe_size, tuple(self.masks[i] for i in indices), self.labels)

    def with_masks(self, masks: Iterable[int]) -> SetSystem:
        return SetSystem(self.universe_size, tuple(masks), self.labels)

    def to_dict(self) -> dict:
        d = {"universe": self.universe_size, "sets": [list(s) for s in self.sets]}
        if self.labels is not None:
            d["labels"] = [list(x) if isinstance(x, tuple) else x for x in self.labels]
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_dict(cls, d: dict) -> SetSystem:
        """Strict loader: rejects out-of-range indices, unsorted sets, and duplicates."""
        try:
            n = int(d["universe"])
            raw = d["sets"]
        except (KeyError, TypeError, ValueError) as exc:
            raise InputError(f"bad set-system document: {exc}") from None
        masks = []
        seen = set()
        for s in raw:
            s = list(s)
            if any(not isinstance(i, int) or isinstance(i, bool) for i in s):
                raise InputError(f"non-integer element in {s}")
            if any(b <= a for a, b in zip(s, s[1:])):
                raise InputError(f"set {s} is not strictly ascending")
            if any(i < 0 or i >= n for i in s):
                raise InputError(f"set {s} leaves universe of size {n}")
            m = to_mask(s)
            if m in seen:
                raise InputError(f"duplicate set {s}")
            seen.add(m)
            masks.append(m)
        labels = d.get("labels")
        if labels is not None:
            labels = tuple(tuple(x) if isinstance(x, list) else x for x in labels)
        return cls(n, tuple(masks), labels)

    @classmethod
    def from_json(cls, text: str) -> SetSystem:
        try:
            d = json.loads(text)
        except json.JSONDecodeError as exc:
            raise InputError(f"invalid JSON: {exc}") from None
        return cls.from_dict(d)


def _check_assignment(F: SetSystem, x) -> int:
    xm = _as_mask(x)
    if xm >> F.universe_size:
        raise InputError(f"assignment {members(xm)} leaves universe of size {F.universe_size}")
    return xm


def evaluate(F: SetSystem, x) -> int:
    """Value of the monotone DNF of ``F`` on the assignment whose 1-bits are ``x``."""
    xm = _check_assignment(F, x)
    return int(any(m & ~xm == 0 for m in F.masks))


def is_non_redundant(F: SetSystem) -> bool:
    ms = F.masks
    for i, a in enumerate(ms):
        for b in ms[i + 1:]:
            if a & b == a or a & b == b:
                return False
    return True


def is_non_trivial(F: SetSystem) -> bool:
    return len(F) > 0 and not F.has_empty_set()


def maximal_subsystem(F: SetSystem) -> SetSystem:
    ms = F.masks
    keep = [a for a in ms if not any(b != a and a & b == a for b in ms)]
    return F.with_masks(keep)


def minimal_subsystem(F: SetSystem) -> SetSystem:
    """The minimal members; same DNF as ``F``."""
    ms = F.masks
    keep = [a for a in ms if not any(b != a and a & b == b for b in ms)]
    return F.with_masks(keep)


def link(F: SetSystem, T) -> SetSystem:
    """``{S \\ T : S in F, T subset of S}`` with duplicates merged."""
    t = _as_mask(T)
    return F.with_masks(m & ~t for m in F.masks if m & t == t)


def core_intersection(F: SetSystem) -> tuple[int, ...]:
    if not F.masks:
        raise InputError("core of an empty family is undefined")
    k = F.masks[0]
    for m in F.masks[1:]:
        k &= m
    return members(k)


def is_proper_lower(Fp: SetSystem, F: SetSystem) -> bool:
    own = set(F.masks)
    return all(m in own for m in Fp.masks)


@dataclass(frozen=True)
class ProperUpperResult:
    proper: bool
    witness: tuple[int, ...] | None = None

    def __bool__(self) -> bool:
        return self.proper


def check_proper_upper(Fp: SetSystem, F: SetSystem) -> ProperUpperResult:
    """Either every S in F contains some member of Fp, or the indicator of the
    first uncovered S separates the two DNFs."""
    if Fp.universe_size != F.universe_size:
        raise InputError("proper-upper check needs a shared universe")
    for s in F.masks:
        if not any(sp & s == sp for sp in Fp.masks):
            return ProperUpperResult(False, members(s))
    return ProperUpperResult(True)


def intersects_all(masks: Sequence[int], m: int) -> bool:
    return all(m & o for o in masks)
