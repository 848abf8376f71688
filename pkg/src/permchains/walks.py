"""
Staircase walks: sequences of n up-steps (+1) and n down-steps (-1).

A walk is the image of a permutation of 1..2n in which the labels 1..n map to
+1 and the labels n+1..2n map to -1.  Geometrically it is a lattice path from
(0, n) to (n, 0) (+1 = right, -1 = down); the quantity tracked everywhere
below is the prefix-sum height h_k, whose lattice reading is x+y = n + h_k at
the path corner after k steps.

Unit squares (tiles) under the path are indexed by their top-right lattice
corner (x, y), 1 <= x, y <= n.  A tile is "steep" when x + y - n clears the
threshold n - sqrt(n); steep tiles carry the heavy swap ratio xi, the rest the
near-critical ratio gamma.  The same integer predicate drives the swap
probabilities of the fluctuating-bias chains, so walk weights factor exactly
as gamma^(#flat tiles) * xi^(#steep tiles).
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Sequence

from .perms import check_permutation


def check_walk(steps: Sequence[int]) -> tuple[int, ...]:
    w = tuple(int(s) for s in steps)
    if len(w) % 2 or any(s not in (-1, 1) for s in w):
        raise ValueError("walk must be an even-length sequence over {-1, +1}")
    if sum(w) != 0:
        raise ValueError("walk must have equal numbers of +1 and -1 steps")
    return w


def to_staircase_walk(sigma: Sequence[int]) -> tuple[int, ...]:
    """Map a permutation of 1..2n to steps: +1 for labels <= n, else -1.

    >>> to_staircase_walk((5, 1, 7, 8, 4, 3, 6, 2))
    (-1, 1, -1, -1, 1, 1, -1, 1)
    """
    sigma = check_permutation(sigma)
    if len(sigma) % 2:
        raise ValueError("need an even number of labels")
    n = len(sigma) // 2
    return tuple(1 if v <= n else -1 for v in sigma)


def walk_to_permutation(w: Sequence[int]) -> tuple[int, ...]:
    """Inverse of :func:`to_staircase_walk` on its image.

    Small labels are placed in increasing order at the +1 positions and large
    labels in increasing order at the -1 positions, matching the chains in
    which each half stays internally sorted.
    """
    w = check_walk(w)
    n = len(w) // 2
    small, large = iter(range(1, n + 1)), iter(range(n + 1, 2 * n + 1))
    return tuple(next(small) if s == 1 else next(large) for s in w)


def heights(w: Sequence[int]) -> tuple[int, ...]:
    out = []
    h = 0
    for s in w:
        h += s
        out.append(h)
    return tuple(out)


def max_height(w: Sequence[int]) -> int:
    return max(heights(w))


def all_walks(n: int) -> list[tuple[int, ...]]:
    """All C(2n, n) walks, lexicographic with -1 < +1."""
    out = []
    for ups in itertools.combinations(range(2 * n), n):
        w = [-1] * (2 * n)
        for k in ups:
            w[k] = 1
        out.append(tuple(w))
    out.sort()
    return out


# -- the fluctuating-bias threshold ------------------------------------------


def cut_level(n: int) -> int:
    """Integer height level of the bottleneck: ceil(n - sqrt(n)) = n - isqrt(n)."""
    return n - math.isqrt(n)


def exceeds_diag(t: int, n: int) -> bool:
    """Exact test for t >= n - sqrt(n), no floating point.

    Used both for classifying tiles (t = x + y - n) and for picking the swap
    probability of a (small, large) label pair (t = small - (large - n) + 1).
    """
    return t >= n - math.isqrt(n)


def tile_counts(w: Sequence[int]) -> tuple[int, int]:
    """(flat, steep) tile counts under the walk.

    Column x (1-based) holds tiles y = 1..H(x) where H(x) is the path height
    over that column; the tile (x, y) is steep iff x + y - n >= n - sqrt(n).
    """
    w = check_walk(w)
    n = len(w) // 2
    level = cut_level(n)
    total = 0
    steep = 0
    downs_seen = 0
    col = 0
    for s in w:
        if s == -1:
            downs_seen += 1
        else:
            col += 1
            height = n - downs_seen
            total += height
            # steep tiles in this column: y >= 2n - level... y + x - n >= level
            y_min = n + level - col
            if height >= y_min:
                steep += height - max(y_min, 1) + 1
    return total - steep, steep


def tile_count_total(w: Sequence[int]) -> int:
    flat, steep = tile_counts(w)
    return flat + steep


def walk_weight(w: Sequence[int], gamma: Fraction, xi: Fraction) -> Fraction:
    flat, steep = tile_counts(w)
    return gamma**flat * xi**steep


def cut_class(w: Sequence[int], widened: bool = False) -> int:
    """1, 2, or 3 by max height below / at / above the bottleneck level.

    The widened variant counts level+1 as part of the middle class, which is
    the right cut for chains that can change the max height by 2 per move.
    """
    n = len(w) // 2
    level = cut_level(n)
    h = max_height(w)
    top = level + 1 if widened else level
    if h < level:
        return 1
    return 2 if h <= top else 3


@dataclass(frozen=True)
class HeightProfile:
    """Per max-height tile statistics: counts[h][(flat, steep)] = #walks."""

    n: int
    counts: dict

    def class_table(self, widened: bool = False) -> dict[int, dict]:
        """Merge heights into cut classes 1, 2, 3."""
        level = cut_level(self.n)
        top = level + 1 if widened else level
        out = {1: {}, 2: {}, 3: {}}
        for h, table in self.counts.items():
            cls = 1 if h < level else (2 if h <= top else 3)
            bucket = out[cls]
            for key, cnt in table.items():
                bucket[key] = bucket.get(key, 0) + cnt
        return out


@lru_cache(maxsize=None)
def height_profile(n: int) -> HeightProfile:
    """Enumerate all walks once and bucket tile counts by max height."""
    counts: dict[int, dict] = {}
    for w in all_walks(n):
        h = max_height(w)
        key = tile_counts(w)
        counts.setdefault(h, {})
        counts[h][key] = counts[h].get(key, 0) + 1
    return HeightProfile(n=n, counts=counts)


def class_weight(table: dict, gamma: Fraction, xi) -> Fraction:
    """Sum of gamma^flat * xi^steep over a {(flat, steep): count} table."""
    total = 0
    for (flat, steep), cnt in table.items():
        total += cnt * gamma**flat * xi**steep
    return total
