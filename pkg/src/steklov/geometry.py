"""Continuous comparison geometry for lattice domains.

Each boundary edge ``{x, y}`` of a domain is dual to a unit (n-1)-cube
centred at the edge midpoint and normal to the edge; the union of these cubes
is the boundary of the union of unit cubes around the domain's points. This
module evaluates the squared-distance double integral over that surface, its
barycentric moment, the good/bad classification of boundary-edge pairs and
the map from good pairs to pairs of boundary vertices.

Doubled centres are integral, so most quantities are computed in exact
integer arithmetic; pair integrals scaled by 12 are integers.
"""
from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .exceptions import InvalidSpecError, InvariantViolation, PreconditionError
from .lattice import LatticeDomain, LatticeEdge, q2_boundary_neighbors
from .records import VerificationRecord, holds
from .spectral import boundary_double_sum

MAX_BOUNDARY_EDGES = 20_000
EXACT_PAIR_LIMIT = 10**6
CHUNK = 1024
REL_IDENTITY_TOL = 1e-9

_BALL_TABLE_MAX = 12


def unit_ball_volume(n: int) -> float:
    """Volume of the unit ball in R^n."""
    if n < 1:
        raise InvalidSpecError("dimension must be >= 1")
    if n <= _BALL_TABLE_MAX:
        # omega_0 = 1, omega_1 = 2, omega_n = 2 pi / n * omega_{n-2}
        vols = [1.0, 2.0]
        for k in range(2, n + 1):
            vols.append(2 * math.pi / k * vols[k - 2])
        return vols[n]
    return math.exp(0.5 * n * math.log(math.pi) - math.lgamma(0.5 * n + 1))


def ball_radius(volume: float, n: int) -> float:
    """Radius of the ball in R^n with the given volume."""
    return (volume / unit_ball_volume(n)) ** (1.0 / n)


@dataclass(frozen=True)
class BoundaryCube:
    """Unit (n-1)-cube dual to a boundary edge.

    ``center2`` is twice the centre (integral); ``normal_axis`` is 0-based.
    """

    center2: tuple
    normal_axis: int
    source_edge: LatticeEdge | None = None

    @classmethod
    def from_edge(cls, e: LatticeEdge) -> "BoundaryCube":
        return cls(e.midpoint2, e.axis, e)

    @property
    def n(self) -> int:
        return len(self.center2)

    @property
    def center(self) -> tuple:
        return tuple(c / 2 for c in self.center2)

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        """Uniform samples on the cube, shape ``(size, n)``."""
        pts = np.tile(np.asarray(self.center, dtype=float), (size, 1))
        for k in range(self.n):
            if k != self.normal_axis:
                pts[:, k] += rng.random(size) - 0.5
        return pts


def boundary_cubes(d: LatticeDomain) -> tuple:
    return tuple(BoundaryCube.from_edge(e) for e in d.profile.edge_boundary)


def pair_integral(c1: BoundaryCube, c2: BoundaryCube, exact: bool = False):
    """Integral of ``|s - t|^2`` over ``s`` in ``c1`` and ``t`` in ``c2``.

    Each cube has unit measure and ``n - 1`` free coordinates of variance
    1/12, so the value is ``|p - q|^2 + (n - 1)/6`` for centres ``p, q``.
    """
    if c1.n != c2.n:
        raise PreconditionError("cubes live in different dimensions")
    sq2 = sum((a - b) ** 2 for a, b in zip(c1.center2, c2.center2))
    value = Fraction(sq2, 4) + Fraction(c1.n - 1, 6)
    return value if exact else float(value)


# ---------------------------------------------------------------------------
# Per-domain arrays


@dataclass(frozen=True, eq=False)
class _Arrays:
    n: int
    centers2: np.ndarray  # (M, n) doubled cube centres
    p_index: np.ndarray  # (M,) index into delta of each edge's outer endpoint
    delta: np.ndarray  # (N, n)
    bad: np.ndarray  # (N,) bool
    z_index: np.ndarray  # (N,) chosen companion for good equal-P pairs, -1 if bad


@lru_cache(maxsize=32)
def _arrays(d: LatticeDomain) -> _Arrays:
    prof = d.profile
    m = len(prof.edge_boundary)
    if m > MAX_BOUNDARY_EDGES:
        raise InvalidSpecError(
            f"edge boundary has {m} edges; pair sums are capped at {MAX_BOUNDARY_EDGES}"
        )
    index = {x: i for i, x in enumerate(prof.delta)}
    centers2 = np.array([e.midpoint2 for e in prof.edge_boundary], dtype=np.int64).reshape(m, d.n)
    p_index = np.array(
        [index[e.hi] if e.lo in d.point_set else index[e.lo] for e in prof.edge_boundary],
        dtype=np.int64,
    )
    bad = np.array([x in prof.delta_bad_set for x in prof.delta], dtype=bool)
    z_index = np.full(len(prof.delta), -1, dtype=np.int64)
    for i, x in enumerate(prof.delta):
        # companions need a second axis; on Z^1 the f-map is undefined
        if bad[i] or d.n < 2:
            continue
        others = [y for y in q2_boundary_neighbors(x, d) if y != x]
        if not others:
            raise InvariantViolation(
                f"non-bad boundary vertex {x} has no other boundary vertex within Chebyshev distance 1"
            )
        z_index[i] = index[others[0]]
    delta = np.array(prof.delta, dtype=np.int64).reshape(len(prof.delta), d.n)
    return _Arrays(d.n, centers2, p_index, delta, bad, z_index)


def _require_plane(d: LatticeDomain) -> None:
    if d.n < 2:
        raise PreconditionError("the f-map and pair comparison need dimension n >= 2")


def _chunks(m: int):
    for start in range(0, m, CHUNK):
        yield start, min(m, start + CHUNK)


# ---------------------------------------------------------------------------
# Double integral and moments


@dataclass(frozen=True)
class MomentReport:
    """Double integral over the boundary surface and its barycentric moment.

    ``total_integral`` is summed pair by pair; ``second_moment`` is summed
    cube by cube about the barycentre. In exact mode both are Fractions and
    ``identity_error`` is ``total - 2 M second_moment`` exactly.
    """

    boundary_count: int
    total_integral: object
    barycenter: tuple
    second_moment: object
    identity_error: object
    exact: bool

    @property
    def identity_relative_error(self) -> float:
        return abs(float(self.identity_error)) / max(1.0, abs(float(self.total_integral)))


def total_double_integral(d: LatticeDomain, exact: bool | None = None) -> MomentReport:
    arr = _arrays(d)
    c2 = arr.centers2
    m, n = c2.shape
    if exact is None:
        exact = m * m <= EXACT_PAIR_LIMIT
    if exact:
        pair_sq2 = 0
        for s, e in _chunks(m):
            diff = c2[s:e, None, :] - c2[None, :, :]
            pair_sq2 += int(np.sum(diff * diff))
        total = Fraction(pair_sq2, 4) + Fraction(m * m * (n - 1), 6)
        sums = [int(v) for v in c2.sum(axis=0)]
        bary = tuple(Fraction(s, 2 * m) for s in sums)
        moment = Fraction(m * (n - 1), 12)
        for row in c2.tolist():
            moment += sum((Fraction(r, 2) - b) ** 2 for r, b in zip(row, bary))
        err = total - 2 * m * moment
    else:
        c = c2.astype(float) / 2.0
        total = 0.0
        for s, e in _chunks(m):
            diff = c[s:e, None, :] - c[None, :, :]
            total += float(np.sum(diff * diff))
        total += m * m * (n - 1) / 6.0
        bary_arr = c.mean(axis=0)
        bary = tuple(float(b) for b in bary_arr)
        moment = float(np.sum((c - bary_arr) ** 2)) + m * (n - 1) / 12.0
        err = total - 2 * m * moment
    return MomentReport(m, total, bary, moment, err, exact)


# ---------------------------------------------------------------------------
# Good and bad pairs


@dataclass(frozen=True)
class PairClassification:
    """Ordered pairs of boundary edges split into good and bad.

    A pair is bad when both edges end at the same bad boundary vertex.
    """

    good_count: int
    bad_count: int
    bad_bound: int
    domain: LatticeDomain = field(repr=False, compare=False)

    @property
    def total(self) -> int:
        return self.good_count + self.bad_count

    @property
    def within_bound(self) -> bool:
        return self.bad_count <= self.bad_bound

    def good_pairs(self):
        """Iterate good pairs as index pairs into ``profile.edge_boundary``."""
        arr = _arrays(self.domain)
        p = arr.p_index
        for a in range(len(p)):
            for b in range(len(p)):
                if p[a] != p[b] or not arr.bad[p[a]]:
                    yield a, b


def classify_pairs(d: LatticeDomain) -> PairClassification:
    arr = _arrays(d)
    m = len(arr.p_index)
    per_vertex = np.bincount(arr.p_index, minlength=len(arr.delta))
    bad_count = int(np.sum(per_vertex[arr.bad] ** 2))
    bad_bound = 4 * d.n**2 * int(arr.bad.sum())
    if bad_count > bad_bound:
        raise InvariantViolation(f"{bad_count} bad pairs exceed the bound {bad_bound}")
    return PairClassification(m * m - bad_count, bad_count, bad_bound, d)


# ---------------------------------------------------------------------------
# The map from good pairs to pairs of boundary vertices


@dataclass(frozen=True)
class FMapReport:
    """Image statistics and per-pair checks of the good-pair map.

    Good pairs with distinct outer endpoints map to those endpoints. Good
    pairs sharing an outer endpoint ``x`` map to ``(x, z)`` with ``z`` the
    lexicographically smallest other boundary vertex within Chebyshev
    distance 1 of ``x``.

    The ``*_ok`` flags record the per-pair integral bounds: against the
    endpoint distance for distinct endpoints, against the image distance for
    every good pair, and by ``n`` for every bad pair.
    """

    multiplicity: int
    multiplicity_bound: int
    good_image_sum: int
    double_sum: int
    distinct_endpoint_ok: bool
    good_pair_ok: bool
    bad_pair_ok: bool
    worst_good_ratio: float
    companions: dict = field(repr=False)

    @property
    def image_sum_ok(self) -> bool:
        return self.good_image_sum <= self.multiplicity * self.double_sum


def f_map(d: LatticeDomain) -> FMapReport:
    _require_plane(d)
    arr = _arrays(d)
    n = d.n
    c2, p, delta, bad, z = arr.centers2, arr.p_index, arr.delta, arr.bad, arr.z_index
    m, nd = len(p), len(delta)
    c3 = 4 * n  # constant in the pair-integral bounds

    counts: Counter = Counter()
    dense_counts = np.zeros(nd * nd, dtype=np.int64) if nd * nd <= 4 * 10**7 else None
    image_sum = 0
    distinct_ok = good_ok = bad_ok = True
    worst = 0.0
    for s, e in _chunks(m):
        pa = p[s:e, None]
        pb = p[None, :]
        same = pa == pb
        bad_a = bad[p[s:e]][:, None]
        is_bad = same & bad_a
        good = ~is_bad
        f1 = np.broadcast_to(pa, (e - s, m))
        f2 = np.where(same, z[p[s:e]][:, None], pb)

        diff = c2[s:e, None, :] - c2[None, :, :]
        twelve_int = 3 * np.sum(diff * diff, axis=2) + 2 * (n - 1)
        fd = delta[f1] - delta[np.where(good, f2, f1)]
        f_sq = np.sum(fd * fd, axis=2)

        distinct_ok &= bool(np.all(twelve_int[~same] <= 12 * c3 * f_sq[~same]))
        good_ok &= bool(np.all(twelve_int[good] <= 12 * c3 * f_sq[good]))
        bad_ok &= bool(np.all(twelve_int[is_bad] <= 12 * n))
        if good.any():
            worst = max(worst, float(np.max(twelve_int[good] / (12.0 * f_sq[good]))))
        image_sum += int(np.sum(f_sq[good]))

        codes = (f1[good] * nd + f2[good]).ravel()
        if dense_counts is not None:
            dense_counts += np.bincount(codes, minlength=nd * nd)
        else:
            uniq, cnt = np.unique(codes, return_counts=True)
            counts.update(dict(zip(uniq.tolist(), cnt.tolist())))
    if dense_counts is not None:
        mult = int(dense_counts.max()) if m else 0
    else:
        mult = max(counts.values()) if counts else 0

    bound = 8 * n * n
    if mult > bound:
        raise InvariantViolation(f"multiplicity {mult} exceeds {bound}")
    prof = d.profile
    companions = {prof.delta[i]: prof.delta[z[i]] for i in range(nd) if z[i] >= 0}
    return FMapReport(
        multiplicity=mult,
        multiplicity_bound=bound,
        good_image_sum=image_sum,
        double_sum=boundary_double_sum(d),
        distinct_endpoint_ok=distinct_ok,
        good_pair_ok=good_ok,
        bad_pair_ok=bad_ok,
        worst_good_ratio=worst,
        companions=companions,
    )


def f_image(d: LatticeDomain, e1: LatticeEdge, e2: LatticeEdge):
    """Image of one good pair of boundary edges; ``None`` for a bad pair."""
    _require_plane(d)
    arr = _arrays(d)
    prof = d.profile
    index = {e: i for i, e in enumerate(prof.edge_boundary)}
    try:
        a, b = index[e1], index[e2]
    except KeyError:
        raise PreconditionError("both edges must belong to the edge boundary") from None
    pa, pb = arr.p_index[a], arr.p_index[b]
    if pa != pb:
        return prof.delta[pa], prof.delta[pb]
    if arr.bad[pa]:
        return None
    return prof.delta[pa], prof.delta[arr.z_index[pa]]


# ---------------------------------------------------------------------------
# Inequality links


def isoperimetric_check(d: LatticeDomain, moments: MomentReport | None = None) -> VerificationRecord:
    """Surface second moment about the barycentre versus that of the equal-volume ball."""
    moments = moments or total_double_integral(d)
    n, vol = d.n, len(d)
    radius = ball_radius(vol, n)
    rhs = n * vol * radius
    lhs = float(moments.second_moment)
    total = float(moments.total_integral)
    total_rhs = 2 * n * moments.boundary_count * vol * radius
    ok = holds(rhs, lhs) and holds(total_rhs, total)
    return VerificationRecord(
        name="geometry.isoperimetric",
        passed=ok,
        lhs=lhs,
        rhs=rhs,
        details={
            "radius": radius,
            "total_integral": total,
            "total_lower_bound": total_rhs,
            "slack_ratio": lhs / rhs,
        },
    )


def chain_est1(
    d: LatticeDomain,
    use_actual_mf: bool = True,
    moments: MomentReport | None = None,
    fmap: FMapReport | None = None,
) -> VerificationRecord:
    """Upper bound of the double integral by the boundary double sum, and the
    resulting lower bound on the double sum.
    """
    moments = moments or total_double_integral(d)
    fmap = fmap or f_map(d)
    n, vol = d.n, len(d)
    c3 = 4 * n
    mf = fmap.multiplicity if use_actual_mf else fmap.multiplicity_bound
    n_bad = len(d.profile.delta_bad)
    n_edge = len(d.profile.edge_boundary)
    radius = ball_radius(vol, n)
    total = float(moments.total_integral)
    s = fmap.double_sum
    right_rhs = c3 * mf * s + 4 * n**3 * n_bad
    est1_rhs = 2 * n * (n_edge * vol * radius - 2 * n**2 * n_bad) / (c3 * mf) if mf else math.inf
    right_ok = holds(total, right_rhs)
    est1_ok = holds(est1_rhs, s)
    tag = "actual" if use_actual_mf else "bound"
    return VerificationRecord(
        name=f"geometry.est1[{tag}]",
        passed=right_ok and est1_ok,
        lhs=s,
        rhs=est1_rhs,
        details={
            "multiplicity_used": mf,
            "total_integral": total,
            "right_upper_bound": right_rhs,
            "right_ok": right_ok,
            "est1_ok": est1_ok,
            "radius": radius,
            "bad_vertices": n_bad,
            "edge_boundary": n_edge,
        },
    )


@dataclass(frozen=True)
class GeometryReport:
    """Every geometric quantity entering the lower-bound chain for one domain."""

    total_integral: object
    barycenter: tuple
    second_moment: object
    radius: float
    multiplicity: int
    good_pairs: int
    bad_pairs: int
    double_sum: int
    links: tuple

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.links)

    def to_dict(self) -> dict:
        from .records import jsonable

        return {
            "total_integral": jsonable(self.total_integral),
            "barycenter": jsonable(list(self.barycenter)),
            "second_moment": jsonable(self.second_moment),
            "R": self.radius,
            "m_f": self.multiplicity,
            "good_pairs": self.good_pairs,
            "bad_pairs": self.bad_pairs,
            "double_sum": self.double_sum,
            "links": [r.to_dict() for r in self.links],
            "passed": self.passed,
        }


def geometry_report(d: LatticeDomain, exact: bool | None = None) -> GeometryReport:
    moments = total_double_integral(d, exact)
    pairs = classify_pairs(d)
    fmap = f_map(d)
    rel_err = moments.identity_relative_error
    links = (
        VerificationRecord(
            "geometry.moment_identity",
            passed=(moments.identity_error == 0) if moments.exact else rel_err <= REL_IDENTITY_TOL,
            lhs=moments.total_integral,
            rhs=2 * moments.boundary_count * moments.second_moment,
            relation="==",
            details={"exact": moments.exact, "relative_error": rel_err},
        ),
        VerificationRecord(
            "geometry.bad_pair_count",
            passed=pairs.within_bound,
            lhs=pairs.bad_bound,
            rhs=pairs.bad_count,
            details={"good_pairs": pairs.good_count},
        ),
        VerificationRecord(
            "geometry.multiplicity",
            passed=fmap.multiplicity <= fmap.multiplicity_bound,
            lhs=fmap.multiplicity_bound,
            rhs=fmap.multiplicity,
        ),
        VerificationRecord("geometry.distinct_endpoint_pairs", passed=fmap.distinct_endpoint_ok),
        VerificationRecord(
            "geometry.good_pairs",
            passed=fmap.good_pair_ok,
            lhs=4 * d.n,
            rhs=fmap.worst_good_ratio,
            details={"meaning": "max over good pairs of integral / |f1 - f2|^2"},
        ),
        VerificationRecord("geometry.bad_pairs", passed=fmap.bad_pair_ok),
        VerificationRecord(
            "geometry.image_sum",
            passed=fmap.image_sum_ok,
            lhs=fmap.multiplicity * fmap.double_sum,
            rhs=fmap.good_image_sum,
        ),
        isoperimetric_check(d, moments),
        chain_est1(d, True, moments, fmap),
        chain_est1(d, False, moments, fmap),
    )
    return GeometryReport(
        total_integral=moments.total_integral,
        barycenter=moments.barycenter,
        second_moment=moments.second_moment,
        radius=ball_radius(len(d), d.n),
        multiplicity=fmap.multiplicity,
        good_pairs=pairs.good_count,
        bad_pairs=pairs.bad_count,
        double_sum=fmap.double_sum,
        links=links,
    )

