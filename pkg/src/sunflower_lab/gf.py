"""Small prime-field linear algebra on lists of ints."""

from __future__ import annotations

import itertools
from typing import Iterator, Sequence


def is_prime(p: int) -> bool:
    return p >= 2 and all(p % d for d in range(2, int(p**0.5) + 1))


def rank_mod_p(rows: Sequence[Sequence[int]], p: int) -> int:
    """Rank over GF(p) by Gaussian elimination with modular inverses."""
    work = [[v % p for v in row] for row in rows]
    if not work:
        return 0
    n_cols = len(work[0])
    rank = 0
    for col in range(n_cols):
        pivot = next((r for r in range(rank, len(work)) if work[r][col]), None)
        if pivot is None:
            continue
        work[rank], work[pivot] = work[pivot], work[rank]
        inv = pow(work[rank][col], p - 2, p)
        work[rank] = [v * inv % p for v in work[rank]]
        for r in range(len(work)):
            if r != rank and work[r][col]:
                f = work[r][col]
                work[r] = [(a - f * b) % p for a, b in zip(work[r], work[rank])]
        rank += 1
        if rank == len(work):
            break
    return rank


def restrict_columns(rows: Sequence[Sequence[int]], cols: Sequence[int]) -> list[list[int]]:
    return [[row[c] for c in cols] for row in rows]


def span_vectors(rows: Sequence[Sequence[int]], n: int, p: int) -> Iterator[tuple[tuple[int, ...], tuple[int, ...]]]:
    """(coefficients, vector) for every combination, coefficients in lexicographic order."""
    k = len(rows)
    for coeffs in itertools.product(range(p), repeat=k):
        v = [0] * n
        for a, row in zip(coeffs, rows):
            if a:
                for i in range(n):
                    v[i] += a * row[i]
        yield coeffs, tuple(x % p for x in v)
