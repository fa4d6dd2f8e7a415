"""Finite subsets of the integer lattice Z^n and their boundary combinatorics.

Points are plain tuples of Python ints. Every set exposed by this module is
ordered lexicographically, which is the canonical order used for matrix
indexing downstream.
"""
from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .exceptions import InvalidSpecError, PreconditionError
from .records import VerificationRecord

Point = tuple  # tuple[int, ...]

# Coordinates stay well inside int64 so that neighbours, doubled centres and
# squared distances of desk-scale domains never overflow.
COORD_LIMIT = 2**31


def unit_steps(n: int) -> list[tuple[int, Point]]:
    """All 2n signed unit vectors as ``(axis, vector)`` pairs."""
    steps = []
    for k in range(n):
        for sign in (-1, 1):
            v = [0] * n
            v[k] = sign
            steps.append((k, tuple(v)))
    return steps


def shift(x: Point, v: Point) -> Point:
    return tuple(a + b for a, b in zip(x, v))


def neighbours(x: Point) -> list[Point]:
    return [shift(x, v) for _, v in unit_steps(len(x))]


@dataclass(frozen=True, order=True)
class LatticeEdge:
    """An edge of Z^n stored as ``lo -> lo + e_axis``.

    ``axis`` is 0-based. ``lo`` is the lexicographically smaller endpoint.
    """

    lo: Point
    hi: Point
    axis: int

    @classmethod
    def between(cls, x: Point, y: Point) -> "LatticeEdge":
        x, y = tuple(x), tuple(y)
        if len(x) != len(y):
            raise PreconditionError("endpoints have different dimensions")
        diff = [b - a for a, b in zip(x, y)]
        if sum(abs(d) for d in diff) != 1:
            raise PreconditionError(f"{x} and {y} are not lattice neighbours")
        axis = next(k for k, d in enumerate(diff) if d)
        lo, hi = (x, y) if x < y else (y, x)
        return cls(lo, hi, axis)

    @property
    def endpoints(self) -> tuple[Point, Point]:
        return (self.lo, self.hi)

    @property
    def midpoint2(self) -> Point:
        """Twice the midpoint; integral, so exact arithmetic stays in ints."""
        return tuple(a + b for a, b in zip(self.lo, self.hi))


@dataclass(frozen=True)
class LatticeDomain:
    """A finite nonempty set of points of Z^n.

    Use :meth:`from_points` rather than the constructor; it deduplicates,
    sorts and validates.
    """

    n: int
    points: tuple
    point_set: frozenset = field(repr=False, compare=False)

    @classmethod
    def from_points(cls, points: Iterable[Sequence[int]], n: int | None = None) -> "LatticeDomain":
        pts = {tuple(int(c) for c in p) for p in points}
        if not pts:
            raise InvalidSpecError("a domain needs at least one point")
        dims = {len(p) for p in pts}
        if n is None:
            if len(dims) != 1:
                raise InvalidSpecError(f"points of mixed dimension {sorted(dims)}")
            n = dims.pop()
        elif dims != {n}:
            raise InvalidSpecError(f"every point must have exactly {n} coordinates")
        if n < 1:
            raise InvalidSpecError("dimension must be at least 1")
        for p in pts:
            if any(abs(c) >= COORD_LIMIT for c in p):
                raise InvalidSpecError(f"coordinate of {p} exceeds +/-{COORD_LIMIT}")
        return cls(n, tuple(sorted(pts)), frozenset(pts))

    def __len__(self) -> int:
        return len(self.points)

    def __contains__(self, x) -> bool:
        return tuple(x) in self.point_set

    def __hash__(self) -> int:
        return hash((self.n, self.points))

    def __eq__(self, other) -> bool:
        if not isinstance(other, LatticeDomain):
            return NotImplemented
        return self.n == other.n and self.points == other.points

    def as_array(self) -> np.ndarray:
        return np.array(self.points, dtype=np.int64).reshape(len(self.points), self.n)

    @cached_property
    def profile(self) -> "BoundaryProfile":
        return _compute_profile(self)


@dataclass(frozen=True)
class BoundaryProfile:
    """Vertex and edge boundaries of a lattice domain.

    Attributes
    ----------
    delta : tuple of points
        Vertex boundary: points outside the domain adjacent to it.
    delta_bad : tuple of points
        Boundary points all of whose neighbours lie in the domain.
    edge_boundary : tuple of LatticeEdge
        Edges with exactly one endpoint in the domain.
    energy_edges : tuple of LatticeEdge
        Edges with at least one endpoint in the domain.
    direction_counts : tuple of int
        Number of energy edges parallel to each axis.
    """

    delta: tuple
    delta_bad: tuple
    edge_boundary: tuple
    energy_edges: tuple
    direction_counts: tuple
    delta_set: frozenset = field(repr=False)
    delta_bad_set: frozenset = field(repr=False)


def _compute_profile(d: LatticeDomain) -> BoundaryProfile:
    omega = d.point_set
    steps = unit_steps(d.n)
    delta = set()
    edge_boundary = set()
    energy = set()
    for x in d.points:
        for axis, v in steps:
            y = shift(x, v)
            e = LatticeEdge(x, y, axis) if v[axis] > 0 else LatticeEdge(y, x, axis)
            energy.add(e)
            if y not in omega:
                delta.add(y)
                edge_boundary.add(e)
    bad = {x for x in delta if all(shift(x, v) in omega for _, v in steps)}
    counts = [0] * d.n
    for e in energy:
        counts[e.axis] += 1
    return BoundaryProfile(
        delta=tuple(sorted(delta)),
        delta_bad=tuple(sorted(bad)),
        edge_boundary=tuple(sorted(edge_boundary)),
        energy_edges=tuple(sorted(energy)),
        direction_counts=tuple(counts),
        delta_set=frozenset(delta),
        delta_bad_set=frozenset(bad),
    )


def boundary_profile(d: LatticeDomain) -> BoundaryProfile:
    return d.profile


def _require_boundary(x, d: LatticeDomain) -> Point:
    x = tuple(x)
    if x not in d.profile.delta_set:
        raise PreconditionError(f"{x} is not a boundary vertex of the domain")
    return x


def is_bad_vertex(x: Sequence[int], d: LatticeDomain) -> bool:
    """True iff the boundary vertex ``x`` has every neighbour inside ``d``."""
    x = _require_boundary(x, d)
    return x in d.profile.delta_bad_set


def q2_boundary_neighbors(x: Sequence[int], d: LatticeDomain) -> tuple:
    """Boundary vertices within Chebyshev distance 1 of ``x``, ``x`` included."""
    x = _require_boundary(x, d)
    delta = d.profile.delta_set
    found = []
    for off in itertools.product((-1, 0, 1), repeat=d.n):
        y = shift(x, off)
        if y in delta:
            found.append(y)
    return tuple(sorted(found))


def p_map(e: LatticeEdge, d: LatticeDomain) -> Point:
    """The endpoint of a boundary edge that lies outside the domain."""
    lo_in, hi_in = e.lo in d.point_set, e.hi in d.point_set
    if lo_in == hi_in:
        raise PreconditionError(f"{e} is not in the edge boundary")
    return e.hi if lo_in else e.lo


def classify_point(x: Sequence[int], d: LatticeDomain) -> str:
    """One of ``"interior"``, ``"boundary"`` or ``"exterior"``."""
    x = tuple(x)
    if x in d.point_set:
        return "interior"
    if x in d.profile.delta_set:
        return "boundary"
    return "exterior"


def bad_vertex_injection_check(d: LatticeDomain) -> VerificationRecord:
    """Check that ``x -> x + e_1`` maps bad boundary vertices injectively into the domain."""
    bad = d.profile.delta_bad
    e1 = (1,) + (0,) * (d.n - 1)
    images = [shift(x, e1) for x in bad]
    injective = len(set(images)) == len(images)
    into = all(y in d.point_set for y in images)
    count_ok = len(bad) <= len(d)
    return VerificationRecord(
        name="lattice.bad_vertex_injection",
        passed=injective and into and count_ok,
        lhs=len(d),
        rhs=len(bad),
        details={
            "injective": injective,
            "maps_into_domain": into,
            "ratio": len(bad) / len(d),
        },
    )


# ---------------------------------------------------------------------------
# Fixture families


@dataclass(frozen=True)
class ShapeSpec:
    """Declarative description of a domain for :func:`generate`.

    ``kind`` is one of ``box``, ``chebyshev_ball``, ``punctured_box``,
    ``checker_ring``, ``random_connected`` or ``points``.
    """

    kind: str
    n: int = 2
    dims: tuple = ()
    radius: int = 0
    size: int = 0
    seed: int = 0
    points: tuple = ()


def box(n: int, dims: Sequence[int]) -> LatticeDomain:
    """Axis-aligned box ``[0, d_1) x ... x [0, d_n)``."""
    dims = tuple(int(a) for a in dims)
    if n < 1 or len(dims) != n or min(dims) < 1:
        raise InvalidSpecError(f"box needs {n} positive side lengths, got {dims}")
    return LatticeDomain.from_points(itertools.product(*(range(a) for a in dims)), n)


def chebyshev_ball(n: int, radius: int) -> LatticeDomain:
    """Points with ``max |x_i| <= radius``."""
    if n < 1 or radius < 0:
        raise InvalidSpecError("chebyshev_ball needs n >= 1 and radius >= 0")
    r = range(-radius, radius + 1)
    return LatticeDomain.from_points(itertools.product(r, repeat=n), n)


def punctured_box() -> LatticeDomain:
    """The 5x5 square around the origin in Z^2 with the origin removed."""
    pts = [p for p in itertools.product(range(-2, 3), repeat=2) if p != (0, 0)]
    return LatticeDomain.from_points(pts, 2)


def checker_ring(radius: int) -> LatticeDomain:
    """Chebyshev sphere of the given radius plus the odd-parity points inside it.

    Taken literally; the result is generally not connected as an induced
    subgraph.
    """
    if radius < 1:
        raise InvalidSpecError("checker_ring needs radius >= 1")
    R = radius
    pts = []
    for x in range(-R, R + 1):
        for y in range(-R, R + 1):
            on_ring = max(abs(x), abs(y)) == R
            odd_inside = abs(x) <= R - 1 and abs(y) <= R - 1 and (x + y) % 2 == 1
            if on_ring or odd_inside:
                pts.append((x, y))
    return LatticeDomain.from_points(pts, 2)


def random_connected(n: int, size: int, seed: int = 0) -> LatticeDomain:
    """Grow a connected domain from the origin.

    Each step adds one point drawn uniformly, via
    ``numpy.random.default_rng(seed).integers``, from the current vertex
    boundary listed in lexicographic order.
    """
    if n < 1 or size < 1:
        raise InvalidSpecError("random_connected needs n >= 1 and size >= 1")
    rng = np.random.default_rng(seed)
    origin = (0,) * n
    cells = {origin}
    frontier = set(neighbours(origin))
    while len(cells) < size:
        candidates = sorted(frontier)
        pick = candidates[int(rng.integers(len(candidates)))]
        cells.add(pick)
        frontier.discard(pick)
        frontier.update(y for y in neighbours(pick) if y not in cells)
    return LatticeDomain.from_points(cells, n)


def generate(spec: ShapeSpec) -> LatticeDomain:
    kind = spec.kind
    if kind == "box":
        return box(spec.n, spec.dims)
    if kind == "chebyshev_ball":
        return chebyshev_ball(spec.n, spec.radius)
    if kind == "punctured_box":
        return punctured_box()
    if kind == "checker_ring":
        return checker_ring(spec.radius)
    if kind == "random_connected":
        return random_connected(spec.n, spec.size, spec.seed)
    if kind == "points":
        return LatticeDomain.from_points(spec.points, spec.n if spec.points else None)
    raise InvalidSpecError(f"unknown shape kind {kind!r}")


# ---------------------------------------------------------------------------
# Domain file format: {"n": int, "points": [[int, ...], ...]}


def domain_to_json(d: LatticeDomain) -> dict:
    return {"n": d.n, "points": [list(p) for p in d.points]}


def domain_from_json(obj: dict) -> LatticeDomain:
    try:
        n = int(obj["n"])
        points = obj["points"]
    except (KeyError, TypeError, ValueError) as exc:
        raise InvalidSpecError(f"malformed domain object: {exc}") from exc
    return LatticeDomain.from_points(points, n)


def read_domain(path) -> LatticeDomain:
    try:
        obj = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise InvalidSpecError(f"{path}: {exc}") from exc
    return domain_from_json(obj)


def write_domain(d: LatticeDomain, path) -> None:
    Path(path).write_text(json.dumps(domain_to_json(d), separators=(",", ":")) + "\n")
