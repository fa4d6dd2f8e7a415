"""Theorem constants and the end-to-end lower-bound chain for lattice domains.

For a finite domain in Z^n the chain runs

    sum_{i=2}^{n+1} 1/lambda_i
        >= coordinate trial value
        >= double_sum / (2 |delta| |E|)                    (rhs_main)
        >= est1 / (2 |delta| |E|)                          (chain_a)
        >= n (|dE| |Omega| R - 2n^2 |delta'|) / (|dE| 2n |Omega| C3 m)   (chain_b)
        >= (R - 2n^2/|Omega|) / (2 C3 m)                   (chain_c)
        =  C1 |Omega|^{1/n} - C2/|Omega|                   (m = 8 n^2)

where ``est1`` is the lower bound on the boundary double sum produced by the
comparison geometry. Links whose lower side is nonpositive are recorded as
vacuous passes: every left-hand side in the chain is nonnegative.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

from .exceptions import InvalidSpecError, PreconditionError
from .geometry import GeometryReport, ball_radius, geometry_report, unit_ball_volume
from .lattice import LatticeDomain, bad_vertex_injection_check, q2_boundary_neighbors
from .records import VerificationRecord, holds, jsonable
from .spectral import (
    ZERO_TOL,
    CoordinateBound,
    Spectrum,
    coordinate_trial_bound,
    solve,
)


@dataclass(frozen=True)
class TheoremConstants:
    """Constants of the eigenvalue lower bound in dimension ``n``.

    ``c1 = 1/(64 n^3 omega_n^{1/n})``, ``c2 = 1/(32 n)``, ``c3 = 4n`` and
    ``threshold = (2 c2 / c1)^{n/(n+1)}``, the volume above which the bound
    is at least half its leading term.
    """

    n: int
    omega_n: float
    c1: float
    c2: float
    c3: float
    threshold: float


def constants(n: int) -> TheoremConstants:
    if n < 1:
        raise InvalidSpecError("dimension must be >= 1")
    omega = unit_ball_volume(n)
    c1 = 1.0 / (64 * n**3 * omega ** (1.0 / n))
    c2 = 1.0 / (32 * n)
    threshold = (2 * c2 / c1) ** (n / (n + 1))
    return TheoremConstants(n, omega, c1, c2, 4.0 * n, threshold)


def nth_root(k: int, n: int) -> float:
    """``k ** (1/n)``, exact when ``k`` is a perfect n-th power."""
    r = round(k ** (1.0 / n))
    for cand in (r - 1, r, r + 1):
        if cand >= 0 and cand**n == k:
            return float(cand)
    return k ** (1.0 / n)


def theorem_rhs(size: int, n: int) -> float:
    c = constants(n)
    return c.c1 * nth_root(size, n) - c.c2 / size


def inverse_eigen_sum(spec: Spectrum, n: int) -> float:
    """``sum_{i=2}^{min(n+1, N)} 1/lambda_i``; infinite if any such eigenvalue is zero."""
    total = 0.0
    for i in range(1, min(n + 1, len(spec))):
        if spec.is_zero(i):
            return math.inf
        total += 1.0 / float(spec.eigenvalues[i])
    return total


def _link(name, upper, lower, **details) -> VerificationRecord:
    """Record ``upper >= lower``; vacuous when ``lower <= 0``."""
    ok = holds(lower, upper)
    vacuous = not ok and lower <= 0
    return VerificationRecord(name, ok or vacuous, upper, lower, vacuous=vacuous, details=details)


@dataclass(frozen=True)
class BoundReport:
    """Fully evaluated inequality chain for one lattice domain."""

    n: int
    size: int
    boundary: int
    bad_boundary: int
    edge_boundary: int
    energy_edges: int
    spectrum_head: tuple
    zero_multiplicity: int
    lhs: float
    coordinate: CoordinateBound
    rhs_main: float
    rhs_theorem: float
    corollary_rhs: float | None
    geometry: GeometryReport
    links: tuple = field(default=())

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.links)

    @property
    def failures(self) -> list[VerificationRecord]:
        return [r for r in self.links if not r.passed]

    @property
    def lambda2(self) -> float:
        return self.spectrum_head[1] if len(self.spectrum_head) > 1 else math.inf

    def to_dict(self) -> dict:
        return {
            "domain": {
                "n": self.n,
                "size": self.size,
                "delta": self.boundary,
                "delta_bad": self.bad_boundary,
                "edge_boundary": self.edge_boundary,
                "energy_edges": self.energy_edges,
            },
            "spectrum_head": jsonable(list(self.spectrum_head)),
            "zero_multiplicity": self.zero_multiplicity,
            "lhs": jsonable(self.lhs),
            "coordinate_bound": jsonable(self.coordinate.total),
            "coordinate_per_axis": jsonable(list(self.coordinate.per_axis)),
            "rhs_main": jsonable(self.rhs_main),
            "rhs_theorem": jsonable(self.rhs_theorem),
            "corollary_rhs": jsonable(self.corollary_rhs),
            "geometry": self.geometry.to_dict(),
            "links": [r.to_dict() for r in self.links],
            "passed": self.passed,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"


def _lattice_links(d: LatticeDomain) -> list[VerificationRecord]:
    prof = d.profile
    n, size = d.n, len(d)
    nb, ne = len(prof.delta_bad), len(prof.edge_boundary)
    ok37 = all(
        len(q2_boundary_neighbors(x, d)) >= 2 for x in prof.delta if x not in prof.delta_bad_set
    )
    counts_ok = nb <= len(prof.delta) <= ne <= 2 * n * size
    edge_identity = 2 * len(prof.energy_edges) == 2 * n * size + ne
    return [
        bad_vertex_injection_check(d),
        VerificationRecord("lattice.companion_exists", ok37),
        VerificationRecord(
            "lattice.boundary_counts",
            counts_ok and edge_identity,
            details={
                "ordered_counts": counts_ok,
                "energy_edge_identity": edge_identity,
            },
        ),
        VerificationRecord(
            "lattice.direction_partition",
            sum(prof.direction_counts) == len(prof.energy_edges),
        ),
    ]


def verify_theorem(d: LatticeDomain, zero_tol: float = ZERO_TOL, exact: bool | None = None) -> BoundReport:
    n, size = d.n, len(d)
    if n < 2:
        raise PreconditionError("the bound chain is stated for dimension n >= 2")
    prof = d.profile
    sp = solve(d, zero_tol)
    spec = sp.spectrum
    lhs = inverse_eigen_sum(spec, n)
    coord = coordinate_trial_bound(d, sp.form)
    geo = geometry_report(d, exact)
    k = constants(n)

    n_delta, n_energy = len(prof.delta), len(prof.energy_edges)
    n_edge, n_bad = len(prof.edge_boundary), len(prof.delta_bad)
    radius = ball_radius(size, n)
    mf = 8 * n * n
    est1 = 2 * n * (n_edge * size * radius - 2 * n**2 * n_bad) / (k.c3 * mf)
    chain_a = est1 / (2 * n_delta * n_energy)
    chain_b = n * (n_edge * size * radius - 2 * n**2 * n_bad) / (n_edge * 2 * n * size * k.c3 * mf)
    chain_c = (radius - 2 * n**2 / size) / (2 * k.c3 * mf)
    rhs = theorem_rhs(size, n)
    cor = n / rhs if rhs > 0 else None

    links = _lattice_links(d) + list(geo.links) + [
        VerificationRecord(
            "spectral.coordinate_orthonormality",
            coord.gram_error <= 1e-12,
            details={"gram_error": coord.gram_error},
        ),
        _link("chain.variational", lhs, coord.total),
        _link("chain.coordinate_to_main", coord.total, coord.rhs_main),
        _link("chain.main_to_est1", coord.rhs_main, chain_a),
        _link("chain.boundary_sizes", chain_a, chain_b),
        _link("chain.bad_vertices", chain_b, chain_c),
        VerificationRecord(
            "chain.constants",
            math.isclose(chain_c, rhs, rel_tol=1e-12, abs_tol=1e-15),
            chain_c,
            rhs,
            relation="==",
        ),
        _link("theorem", lhs, rhs),
    ]
    head = tuple(float(v) for v in spec.eigenvalues[: n + 1])
    return BoundReport(
        n=n,
        size=size,
        boundary=n_delta,
        bad_boundary=n_bad,
        edge_boundary=n_edge,
        energy_edges=n_energy,
        spectrum_head=head,
        zero_multiplicity=spec.zero_multiplicity,
        lhs=lhs,
        coordinate=coord,
        rhs_main=coord.rhs_main,
        rhs_theorem=rhs,
        corollary_rhs=cor,
        geometry=geo,
        links=tuple(links),
    )


def verify_corollary(d: LatticeDomain, zero_tol: float = ZERO_TOL) -> VerificationRecord:
    """Upper bound on the first nonzero eigenvalue and the large-volume form of the sum bound."""
    n, size = d.n, len(d)
    if n < 2:
        raise PreconditionError("the bound chain is stated for dimension n >= 2")
    spec = solve(d, zero_tol).spectrum
    k = constants(n)
    lam2 = float(spec.eigenvalues[1]) if len(spec) > 1 else math.inf
    denom = theorem_rhs(size, n)
    if denom > 0:
        bound = n / denom
        cor_ok = lam2 <= bound * (1 + 1e-12)
        cor_vacuous = False
    else:
        bound = math.inf
        cor_ok, cor_vacuous = True, True
    lhs = inverse_eigen_sum(spec, n)
    half = 0.5 * k.c1 * nth_root(size, n)
    if size >= k.threshold:
        remark_ok, remark_vacuous = holds(half, lhs), False
    else:
        remark_ok, remark_vacuous = True, True
    return VerificationRecord(
        "corollary",
        passed=cor_ok and remark_ok,
        lhs=lam2,
        rhs=bound,
        relation="<=",
        vacuous=cor_vacuous and remark_vacuous,
        details={
            "corollary_vacuous": cor_vacuous,
            "inverse_sum": lhs,
            "half_leading_term": half,
            "threshold": k.threshold,
            "remark_applies": not remark_vacuous,
            "remark_ok": remark_ok,
        },
    )

