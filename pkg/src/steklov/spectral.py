"""Dirichlet energy, harmonic extension and the Dirichlet-to-Neumann operator.

Functions on the closure are numpy vectors ordered interior vertices first
(canonical order), then boundary vertices (canonical order).
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, field
from functools import cached_property
from typing import Union

import numpy as np
from scipy import sparse
from scipy.sparse.linalg import cg, splu

from .exceptions import (
    DegenerateClosureError,
    InvalidTrialFamilyError,
    NonSymmetricError,
    PreconditionError,
)
from .graph import SubgraphProblem
from .lattice import LatticeDomain

ZERO_TOL = 1e-9  # eigenvalue counts as zero below ZERO_TOL * max(1, lambda_max)
ZERO_TOL_MAX = 1e-6
SYMMETRY_TOL = 1e-10
TRIAL_TOL = 1e-9
# Interior blocks above this size are solved iteratively.
DIRECT_SOLVE_LIMIT = 200_000
CG_RTOL = 1e-12


@dataclass(frozen=True, eq=False)
class EnergyForm:
    """Block decomposition of the Dirichlet energy over the closure.

    Attributes
    ----------
    interior_block : scipy.sparse.csc_matrix
        Interior-interior block; the interior degree on the diagonal.
    coupling_block : scipy.sparse.csr_matrix
        Interior-boundary block, ``-1`` per energy edge.
    boundary_diagonal : ndarray
        Number of interior neighbours of each boundary vertex.
    interior_order, boundary_order : tuple
        Vertex labels (lattice points or graph indices) in index order.
    edges : ndarray of shape (m, 2)
        Energy edges as closure indices.
    """

    interior_block: sparse.csc_matrix
    coupling_block: sparse.csr_matrix
    boundary_diagonal: np.ndarray
    interior_order: tuple
    boundary_order: tuple
    edges: np.ndarray = field(repr=False)

    @property
    def n_interior(self) -> int:
        return len(self.interior_order)

    @property
    def n_boundary(self) -> int:
        return len(self.boundary_order)

    @property
    def n_closure(self) -> int:
        return self.n_interior + self.n_boundary

    @cached_property
    def _lu(self):
        return splu(self.interior_block)

    def solve_interior(self, rhs: np.ndarray) -> np.ndarray:
        if self.n_interior <= DIRECT_SOLVE_LIMIT:
            return self._lu.solve(np.asarray(rhs, dtype=float))
        rhs = np.asarray(rhs, dtype=float)
        if rhs.ndim == 1:
            return _cg(self.interior_block, rhs)
        return np.column_stack([_cg(self.interior_block, rhs[:, j]) for j in range(rhs.shape[1])])

    def quadratic(self, u: np.ndarray) -> float:
        """Block evaluation of the energy of a closure vector."""
        ui, ub = u[: self.n_interior], u[self.n_interior:]
        return float(
            ui @ (self.interior_block @ ui)
            + 2 * ui @ (self.coupling_block @ ub)
            + ub @ (self.boundary_diagonal * ub)
        )


def _cg(a, b):
    x, info = cg(a, b, rtol=CG_RTOL, maxiter=10 * a.shape[0])
    if info != 0:
        raise RuntimeError(f"conjugate gradient did not converge (info={info})")
    return x


def _closure_structure(source):
    if isinstance(source, LatticeDomain):
        prof = source.profile
        interior, boundary = source.points, prof.delta
        index = {p: i for i, p in enumerate(interior)}
        index.update({p: len(interior) + i for i, p in enumerate(boundary)})
        edges = [(index[e.lo], index[e.hi]) for e in prof.energy_edges]
        return interior, boundary, edges
    if isinstance(source, SubgraphProblem):
        if source.degenerate:
            raise DegenerateClosureError(
                f"closure component {list(source.degenerate_component)} contains no boundary vertex",
                source.degenerate_component,
            )
        index = {v: i for i, v in enumerate(source.closure)}
        edges = [(index[a], index[b]) for a, b in source.energy_edges]
        return source.omega, source.delta, edges
    raise TypeError(f"cannot assemble an energy form from {type(source).__name__}")


def assemble_energy(source: Union[LatticeDomain, SubgraphProblem]) -> EnergyForm:
    interior, boundary, edges = _closure_structure(source)
    ni, nb = len(interior), len(boundary)
    e = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
    # Put the interior endpoint first; energy edges always have one.
    swap = e[:, 0] >= ni
    e[swap] = e[swap][:, ::-1]
    a, b = e[:, 0], e[:, 1]

    both = b < ni
    ii_r = np.concatenate([a[both], b[both]])
    ii_c = np.concatenate([b[both], a[both]])
    deg = np.bincount(a, minlength=ni) + np.bincount(b[both], minlength=ni)
    rows = np.concatenate([ii_r, np.arange(ni)])
    cols = np.concatenate([ii_c, np.arange(ni)])
    vals = np.concatenate([-np.ones(len(ii_r)), deg.astype(float)])
    l_ii = sparse.csc_matrix((vals, (rows, cols)), shape=(ni, ni))

    cross = ~both
    l_ib = sparse.csr_matrix(
        (-np.ones(int(cross.sum())), (a[cross], b[cross] - ni)), shape=(ni, nb)
    )
    bdiag = np.bincount(b[cross] - ni, minlength=nb).astype(float)
    return EnergyForm(l_ii, l_ib, bdiag, tuple(interior), tuple(boundary), e)


# ---------------------------------------------------------------------------
# Edgewise operators (these never touch the block matrices)


def dirichlet_energy(form: EnergyForm, u: np.ndarray, v: np.ndarray | None = None) -> float:
    """Polarised Dirichlet energy summed edge by edge."""
    a, b = form.edges[:, 0], form.edges[:, 1]
    du = u[a] - u[b]
    dv = du if v is None else v[a] - v[b]
    return float(du @ dv)


def laplacian(form: EnergyForm, u: np.ndarray) -> np.ndarray:
    """``sum_{y ~ x} (u(y) - u(x))`` at every interior vertex ``x``."""
    ni = form.n_interior
    a, b = form.edges[:, 0], form.edges[:, 1]
    out = np.zeros(ni)
    np.add.at(out, a, u[b] - u[a])
    inner = b < ni
    np.add.at(out, b[inner], u[a[inner]] - u[b[inner]])
    return out


def normal_derivative(form: EnergyForm, u: np.ndarray) -> np.ndarray:
    """``sum_{y in Omega, y ~ x} (u(x) - u(y))`` at every boundary vertex ``x``."""
    ni = form.n_interior
    a, b = form.edges[:, 0], form.edges[:, 1]
    cross = b >= ni
    out = np.zeros(form.n_boundary)
    np.add.at(out, b[cross] - ni, u[b[cross]] - u[a[cross]])
    return out


def harmonic_extension(form: EnergyForm, phi) -> np.ndarray:
    """Extend boundary values harmonically; returns a closure vector."""
    phi = np.asarray(phi, dtype=float)
    if phi.shape != (form.n_boundary,):
        raise PreconditionError(f"expected {form.n_boundary} boundary values, got shape {phi.shape}")
    ui = form.solve_interior(-(form.coupling_block @ phi)) if form.n_interior else np.zeros(0)
    return np.concatenate([ui, phi])


def green_identity_residual(form: EnergyForm, u) -> float:
    """``|D(u) + <Lap u, u>_Omega - <du/dn, u>_boundary|`` for any closure vector."""
    u = np.asarray(u, dtype=float)
    ni = form.n_interior
    energy = dirichlet_energy(form, u)
    interior_term = float(laplacian(form, u) @ u[:ni])
    boundary_term = float(normal_derivative(form, u) @ u[ni:])
    return abs(energy + interior_term - boundary_term)


# ---------------------------------------------------------------------------
# DtN operator and spectrum


@dataclass(frozen=True, eq=False)
class DtNOperator:
    matrix: np.ndarray
    boundary_order: tuple

    def asymmetry(self) -> float:
        m = self.matrix
        if m.size == 0:
            return 0.0
        return float(np.max(np.abs(m - m.T)) / max(1.0, np.max(np.abs(m))))


def dtn_matrix(form: EnergyForm, block: int = 256) -> DtNOperator:
    """Schur complement ``L_BB - L_IB^T L_II^{-1} L_IB`` as a dense matrix."""
    nb = form.n_boundary
    lam = np.diag(form.boundary_diagonal)
    if form.n_interior and nb:
        l_ib = form.coupling_block.tocsc()
        for start in range(0, nb, block):
            stop = min(nb, start + block)
            x = form.solve_interior(l_ib[:, start:stop].toarray())
            lam[:, start:stop] -= l_ib.T @ x
    return DtNOperator(lam, form.boundary_order)


def definitional_dtn(form: EnergyForm) -> DtNOperator:
    """DtN built column by column: extend each unit vector, take its normal derivative."""
    nb = form.n_boundary
    lam = np.zeros((nb, nb))
    for j in range(nb):
        phi = np.zeros(nb)
        phi[j] = 1.0
        lam[:, j] = normal_derivative(form, harmonic_extension(form, phi))
    return DtNOperator(lam, form.boundary_order)


@dataclass(frozen=True, eq=False)
class Spectrum:
    """Ascending eigenvalues with orthonormal eigenvectors as columns."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    zero_multiplicity: int
    zero_threshold: float
    boundary_order: tuple = ()

    def __len__(self) -> int:
        return len(self.eigenvalues)

    def is_zero(self, i: int) -> bool:
        return bool(self.eigenvalues[i] < self.zero_threshold)


def steklov_spectrum(op: DtNOperator, zero_tol: float = ZERO_TOL) -> Spectrum:
    if not 0 < zero_tol <= ZERO_TOL_MAX:
        raise PreconditionError(f"zero tolerance must lie in (0, {ZERO_TOL_MAX}]")
    m = np.asarray(op.matrix, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise NonSymmetricError("DtN matrix must be square")
    asym = op.asymmetry()
    if asym > SYMMETRY_TOL:
        raise NonSymmetricError(f"matrix asymmetry {asym:.3e} exceeds {SYMMETRY_TOL}")
    if m.shape[0] == 0:
        return Spectrum(np.zeros(0), np.zeros((0, 0)), 0, zero_tol, op.boundary_order)
    sym = 0.5 * (m + m.T)
    vals, vecs = np.linalg.eigh(sym)
    # Fix signs: first component above round-off is positive.
    for j in range(vecs.shape[1]):
        col = vecs[:, j]
        idx = np.flatnonzero(np.abs(col) > 1e-12)
        if len(idx) and col[idx[0]] < 0:
            vecs[:, j] = -col
    scale = max(1.0, float(vals[-1]))
    res = np.linalg.norm(sym @ vecs - vecs * vals, axis=0)
    if np.any(res > 1e-9 * scale):
        raise RuntimeError(f"eigen-residual {res.max():.3e} exceeds tolerance")
    threshold = zero_tol * scale
    zero_mult = int(np.sum(vals < threshold))
    return Spectrum(vals, vecs, zero_mult, threshold, op.boundary_order)


@dataclass(frozen=True, eq=False)
class SteklovProblem:
    """Energy form, DtN operator and spectrum computed together."""

    form: EnergyForm
    dtn: DtNOperator
    spectrum: Spectrum


def solve(source, zero_tol: float = ZERO_TOL) -> SteklovProblem:
    form = assemble_energy(source)
    op = dtn_matrix(form)
    return SteklovProblem(form, op, steklov_spectrum(op, zero_tol))


# ---------------------------------------------------------------------------
# Variational principle


def variational_sum_lower_bound(form: EnergyForm, trials) -> float:
    """Boundary mass ``sum_i sum_z v_i(z)^2`` of an admissible trial family.

    ``trials`` has one closure vector per row. The family must be
    energy-orthonormal and have zero boundary sum; its value never exceeds
    the corresponding sum of reciprocal eigenvalues.
    """
    v = np.atleast_2d(np.asarray(trials, dtype=float))
    if v.shape[1] != form.n_closure:
        raise InvalidTrialFamilyError(f"trial vectors must have length {form.n_closure}")
    a, b = form.edges[:, 0], form.edges[:, 1]
    diffs = v[:, a] - v[:, b]
    gram = diffs @ diffs.T
    gram_err = np.max(np.abs(gram - np.eye(len(v)))) if len(v) else 0.0
    if gram_err > TRIAL_TOL:
        raise InvalidTrialFamilyError(f"energy Gram matrix deviates from identity by {gram_err:.3e}")
    vb = v[:, form.n_interior:]
    mean_err = np.max(np.abs(vb.sum(axis=1))) if len(v) else 0.0
    if mean_err > TRIAL_TOL:
        raise InvalidTrialFamilyError(f"boundary sum {mean_err:.3e} is not zero")
    return float(np.sum(vb**2))


def optimal_trial_family(form: EnergyForm, spec: Spectrum, p: int) -> np.ndarray:
    """Rows ``lambda_i^{-1/2} u_{phi_i}`` for ``i = 2..p`` (1-based)."""
    rows = []
    for i in range(1, min(p, len(spec))):
        lam = spec.eigenvalues[i]
        if spec.is_zero(i):
            raise PreconditionError(f"eigenvalue {i + 1} is zero; no optimal trial function")
        rows.append(harmonic_extension(form, spec.eigenvectors[:, i]) / np.sqrt(lam))
    return np.array(rows).reshape(len(rows), form.n_closure)


def reciprocal_sum(spec: Spectrum, p: int) -> float:
    """``sum_{i=2}^{p} 1/lambda_i``; indices past the spectrum contribute 0."""
    total = 0.0
    for i in range(1, min(p, len(spec))):
        if spec.is_zero(i):
            return float("inf")
        total += 1.0 / spec.eigenvalues[i]
    return total


@dataclass(frozen=True)
class CoordinateBound:
    """Values of the coordinate trial functions for a lattice domain.

    ``per_axis[k]`` is the boundary variance of coordinate ``k`` divided by
    the number of energy edges along axis ``k``. ``rhs_main`` is the weaker
    bound ``double_sum / (2 |delta| |E|)``.
    """

    per_axis: tuple
    total: float
    rhs_main: float
    double_sum: int
    centred_sum_of_squares: float
    gram_error: float
    zero_axes: tuple = ()


def coordinate_trial_family(d: LatticeDomain, form: EnergyForm | None = None) -> np.ndarray:
    form = form or assemble_energy(d)
    prof = d.profile
    closure = np.array(form.interior_order + form.boundary_order, dtype=float).reshape(-1, d.n)
    boundary = closure[form.n_interior:]
    rows = []
    for k in range(d.n):
        count = prof.direction_counts[k]
        col = closure[:, k] - boundary[:, k].mean()
        rows.append(col / np.sqrt(count) if count else np.zeros_like(col))
    return np.array(rows)


def boundary_double_sum(d: LatticeDomain) -> int:
    """``sum_{z, w in delta} |z - w|^2`` by direct pairwise summation (exact)."""
    pts = np.array(d.profile.delta, dtype=np.int64).reshape(-1, d.n)
    total = 0
    for start in range(0, len(pts), 1024):
        diff = pts[start:start + 1024, None, :] - pts[None, :, :]
        total += int(np.sum(diff * diff))
    return total


def coordinate_trial_bound(d: LatticeDomain, form: EnergyForm | None = None) -> CoordinateBound:
    form = form or assemble_energy(d)
    prof = d.profile
    trials = coordinate_trial_family(d, form)
    a, b = form.edges[:, 0], form.edges[:, 1]
    diffs = trials[:, a] - trials[:, b]
    gram = diffs @ diffs.T
    zero_axes = tuple(k for k in range(d.n) if prof.direction_counts[k] == 0)
    target = np.eye(d.n)
    for k in zero_axes:
        target[k, k] = 0.0
    gram_err = float(np.max(np.abs(gram - target)))

    boundary = np.array(prof.delta, dtype=float).reshape(-1, d.n)
    centred = boundary - boundary.mean(axis=0)
    per_axis = []
    for k in range(d.n):
        count = prof.direction_counts[k]
        per_axis.append(float(np.sum(centred[:, k] ** 2) / count) if count else 0.0)
    double_sum = boundary_double_sum(d)
    n_energy = len(prof.energy_edges)
    return CoordinateBound(
        per_axis=tuple(per_axis),
        total=float(sum(per_axis)),
        rhs_main=double_sum / (2 * len(prof.delta) * n_energy),
        double_sum=double_sum,
        centred_sum_of_squares=float(np.sum(centred**2)),
        gram_error=gram_err,
        zero_axes=zero_axes,
    )


# ---------------------------------------------------------------------------
# CSV export


def vertex_label(v) -> str:
    if isinstance(v, tuple):
        return "(" + ",".join(str(c) for c in v) + ")"
    return str(v)


def format_value(x: float) -> str:
    return format(float(x), ".15g")


def write_spectrum_csv(spec: Spectrum, fh) -> None:
    """Header ``index,eigenvalue``; 1-based indices, zero eigenvalues written as 0."""
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(["index", "eigenvalue"])
    for i, lam in enumerate(spec.eigenvalues, start=1):
        w.writerow([i, "0" if spec.is_zero(i - 1) else format_value(lam)])


def write_dtn_csv(op: DtNOperator, fh) -> None:
    """Row-major matrix with boundary labels in the first row and column."""
    w = csv.writer(fh, lineterminator="\n")
    labels = [vertex_label(v) for v in op.boundary_order]
    w.writerow([""] + labels)
    for lab, row in zip(labels, op.matrix):
        w.writerow([lab] + [format_value(x) for x in row])
