"""Enumeration of fixed polyominoes (edge-connected cell sets up to translation).

Uses Redelmeier's canonical growth: every polyomino is generated exactly
once, rooted at its lowest-then-leftmost cell, by only admitting cells with
``y > 0`` or ``y == 0 and x >= 0`` relative to the root.
"""
from __future__ import annotations

from typing import Iterator

from .exceptions import InvalidSpecError
from .lattice import LatticeDomain

# Counts of fixed polyominoes of sizes 1..10 (OEIS A001168).
KNOWN_COUNTS = (1, 2, 6, 19, 63, 216, 760, 2725, 9910, 36446)

_STEPS = ((1, 0), (-1, 0), (0, 1), (0, -1))


def _admissible(c) -> bool:
    return c[1] > 0 or (c[1] == 0 and c[0] >= 0)


def _normalise(cells) -> tuple:
    mx = min(c[0] for c in cells)
    my = min(c[1] for c in cells)
    return tuple(sorted((x - mx, y - my) for x, y in cells))


def fixed_polyominoes(max_size: int) -> Iterator[tuple]:
    """Yield every fixed polyomino with at most ``max_size`` cells.

    Cells are translated so the minimum coordinate on each axis is 0 and
    listed in lexicographic order. Polyominoes come out in generation
    order, which is deterministic.
    """
    if max_size < 1:
        raise InvalidSpecError("max_size must be >= 1")
    poly: list = []

    def grow(untried: list, seen: frozenset):
        untried = list(untried)
        while untried:
            cell = untried.pop()
            poly.append(cell)
            yield _normalise(poly)
            if len(poly) < max_size:
                fresh = []
                for dx, dy in _STEPS:
                    nb = (cell[0] + dx, cell[1] + dy)
                    if _admissible(nb) and nb not in seen and nb not in fresh:
                        fresh.append(nb)
                yield from grow(untried + fresh, seen | frozenset(fresh))
            poly.pop()

    yield from grow([(0, 0)], frozenset([(0, 0)]))


def polyomino_domains(max_size: int, min_size: int = 1) -> list[LatticeDomain]:
    """All fixed polyominoes in the size range, sorted by size then cells."""
    found = sorted(
        (p for p in fixed_polyominoes(max_size) if len(p) >= min_size),
        key=lambda p: (len(p), p),
    )
    return [LatticeDomain.from_points(p, 2) for p in found]


def count_by_size(max_size: int) -> list[int]:
    counts = [0] * max_size
    for p in fixed_polyominoes(max_size):
        counts[len(p) - 1] += 1
    return counts
