from __future__ import annotations

import sys
from fractions import Fraction
from pathlib import Path

from hypothesis import strategies as st

sys.path.insert(0, str(Path(__file__).parent))

from sunflower_lab.core import SetSystem  # noqa: E402


@st.composite
def families(draw, max_n=8, max_w=4, max_sets=8, min_sets=0, allow_empty_set=False):
    n = draw(st.integers(1, max_n))
    w = min(max_w, n)
    lo = 0 if allow_empty_set else 1
    sets = draw(st.lists(st.frozensets(st.integers(0, n - 1), min_size=lo, max_size=w),
                         min_size=min_sets, max_size=max_sets, unique=True))
    return SetSystem.from_sets(n, [sorted(s) for s in sets])


@st.composite
def distributions(draw, **kw):
    from sunflower_lab.regular import WeightedFamily

    F = draw(families(min_sets=1, **kw))
    raw = draw(st.lists(st.integers(1, 6), min_size=len(F), max_size=len(F)))
    total = sum(raw)
    return WeightedFamily(F, tuple(Fraction(x, total) for x in raw))


rationals01 = st.fractions(min_value=Fraction(1, 20), max_value=Fraction(19, 20), max_denominator=20)
