import io

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from steklov.exceptions import (
    DegenerateClosureError,
    InvalidTrialFamilyError,
    NonSymmetricError,
    PreconditionError,
)
from steklov.graph import FiniteGraph, connected_components, gadget_problem, subgraph_problem
from steklov.lattice import LatticeDomain, punctured_box, random_connected
from steklov.spectral import (
    DtNOperator,
    assemble_energy,
    coordinate_trial_bound,
    coordinate_trial_family,
    definitional_dtn,
    dirichlet_energy,
    dtn_matrix,
    green_identity_residual,
    harmonic_extension,
    laplacian,
    optimal_trial_family,
    reciprocal_sum,
    solve,
    steklov_spectrum,
    variational_sum_lower_bound,
    write_dtn_csv,
    write_spectrum_csv,
)

from oracles import bisection_eigenvalues

SINGLE = LatticeDomain.from_points([(0, 0)])
DOMINO = LatticeDomain.from_points([(0, 0), (1, 0)])
PATH3 = FiniteGraph.from_edges(3, [(0, 1), (1, 2)])


def lattice_domains():
    return st.one_of(
        st.builds(random_connected, st.integers(2, 3), st.integers(1, 25), st.integers(0, 10**6)),
        st.frozensets(st.tuples(st.integers(-4, 4), st.integers(-4, 4)), min_size=1, max_size=10).map(
            lambda s: LatticeDomain.from_points(s, 2)
        ),
    )


def test_energy_blocks_single():
    f = assemble_energy(SINGLE)
    assert f.interior_block.toarray().tolist() == [[4.0]]
    assert f.coupling_block.toarray().tolist() == [[-1.0] * 4]
    assert f.boundary_diagonal.tolist() == [1.0] * 4


def test_energy_blocks_path_and_domino():
    f = assemble_energy(subgraph_problem(PATH3, [1]))
    assert f.interior_block.toarray().tolist() == [[2.0]]
    assert f.boundary_diagonal.tolist() == [1.0, 1.0]
    f = assemble_energy(DOMINO)
    assert f.interior_block.toarray().tolist() == [[4.0, -1.0], [-1.0, 4.0]]


def test_degenerate_closure_rejected():
    host = FiniteGraph.from_edges(4, [(0, 1), (2, 3)])
    p = subgraph_problem(host, [0, 2, 3])
    with pytest.raises(DegenerateClosureError) as err:
        assemble_energy(p)
    assert set(err.value.component) == {2, 3}


@settings(max_examples=40, deadline=None)
@given(lattice_domains(), st.integers(0, 2**32 - 1))
def test_block_quadratic_matches_edgewise(d, seed):
    f = assemble_energy(d)
    rng = np.random.default_rng(seed)
    for _ in range(3):
        u = rng.standard_normal(f.n_closure)
        e = dirichlet_energy(f, u)
        assert f.quadratic(u) == pytest.approx(e, rel=1e-12, abs=1e-12)
    # interior block is positive definite for lattice domains
    assert np.linalg.eigvalsh(f.interior_block.toarray()).min() > 0


def test_harmonic_extension_examples():
    f = assemble_energy(SINGLE)
    assert harmonic_extension(f, [1, 1, 1, 1])[0] == pytest.approx(1)
    assert harmonic_extension(f, [1, 0, 0, 0])[0] == pytest.approx(0.25)
    g = assemble_energy(subgraph_problem(PATH3, [1]))
    assert harmonic_extension(g, [3.0, -1.0])[0] == pytest.approx(1.0)
    with pytest.raises(PreconditionError):
        harmonic_extension(f, [1, 2])


@settings(max_examples=30, deadline=None)
@given(lattice_domains(), st.integers(0, 2**32 - 1))
def test_harmonic_extension_is_harmonic(d, seed):
    f = assemble_energy(d)
    phi = np.random.default_rng(seed).standard_normal(f.n_boundary)
    u = harmonic_extension(f, phi)
    assert np.max(np.abs(laplacian(f, u))) < 1e-10 * max(1, np.max(np.abs(phi)))
    const = harmonic_extension(f, np.full(f.n_boundary, 2.5))
    assert np.allclose(const, 2.5, atol=1e-12)


def test_dtn_examples():
    op = dtn_matrix(assemble_energy(SINGLE))
    assert np.allclose(op.matrix, np.eye(4) - 0.25, atol=1e-14)
    spec = steklov_spectrum(op)
    assert np.allclose(spec.eigenvalues, [0, 1, 1, 1], atol=1e-12)
    op = dtn_matrix(assemble_energy(subgraph_problem(PATH3, [1])))
    assert np.allclose(op.matrix, [[0.5, -0.5], [-0.5, 0.5]], atol=1e-14)
    assert np.allclose(steklov_spectrum(op).eigenvalues, [0, 1], atol=1e-14)
    lam = solve(gadget_problem(2)).spectrum.eigenvalues
    assert lam[1] == pytest.approx(4 / 11, abs=1e-12)


def test_domino_dtn_exact():
    # rational Schur complement computed independently
    op = dtn_matrix(assemble_energy(DOMINO))
    order = op.boundary_order
    m = op.matrix
    for i, x in enumerate(order):
        for j, y in enumerate(order):
            if i == j:
                want = 11 / 15
            elif (x[0] <= 0) == (y[0] <= 0):
                want = -4 / 15
            else:
                want = -1 / 15
            assert m[i, j] == pytest.approx(want, abs=1e-14), (x, y)
    lam = steklov_spectrum(op).eigenvalues
    assert np.allclose(lam, [0, 0.4, 1, 1, 1, 1], atol=1e-13)


@settings(max_examples=40, deadline=None)
@given(lattice_domains())
def test_schur_matches_definitional(d):
    f = assemble_energy(d)
    a, b = dtn_matrix(f, block=3), definitional_dtn(f)
    assert np.max(np.abs(a.matrix - b.matrix)) < 1e-10
    assert a.asymmetry() < 1e-12


def test_schur_matches_definitional_graph():
    f = assemble_energy(gadget_problem(3))
    assert np.max(np.abs(dtn_matrix(f).matrix - definitional_dtn(f).matrix)) < 1e-10


@settings(max_examples=30, deadline=None)
@given(lattice_domains(), st.integers(0, 2**32 - 1))
def test_polarisation_identity(d, seed):
    f = assemble_energy(d)
    lam = dtn_matrix(f).matrix
    rng = np.random.default_rng(seed)
    phi, psi = rng.standard_normal((2, f.n_boundary))
    up, us = harmonic_extension(f, phi), harmonic_extension(f, psi)
    e = dirichlet_energy(f, up, us)
    assert phi @ lam @ psi == pytest.approx(e, abs=1e-10 * max(1, abs(e)))
    assert psi @ lam @ phi == pytest.approx(e, abs=1e-10 * max(1, abs(e)))


def test_green_identity():
    f = assemble_energy(DOMINO)
    assert green_identity_residual(f, np.ones(f.n_closure)) == 0
    rng = np.random.default_rng(0)
    for _ in range(100):
        u = rng.standard_normal(f.n_closure)
        assert green_identity_residual(f, u) < 1e-10 * max(1, dirichlet_energy(f, u))
    phi = rng.standard_normal(f.n_boundary)
    u = harmonic_extension(f, phi)
    assert dirichlet_energy(f, u) == pytest.approx(phi @ dtn_matrix(f).matrix @ phi, abs=1e-12)


@settings(max_examples=30, deadline=None)
@given(lattice_domains(), st.integers(0, 2**32 - 1))
def test_green_identity_general(d, seed):
    f = assemble_energy(d)
    u = np.random.default_rng(seed).standard_normal(f.n_closure)
    assert green_identity_residual(f, u) < 1e-10 * max(1, dirichlet_energy(f, u))


def test_spectrum_basic():
    spec = steklov_spectrum(DtNOperator(np.array([[2.0, -1.0], [-1.0, 2.0]]), ("a", "b")))
    assert np.allclose(spec.eigenvalues, [1, 3])
    assert spec.zero_multiplicity == 0
    two = LatticeDomain.from_points([(0, 0), (10, 10)])
    assert solve(two).spectrum.zero_multiplicity == 2
    with pytest.raises(NonSymmetricError):
        steklov_spectrum(DtNOperator(np.array([[1.0, 0.5], [0.0, 1.0]]), ()))
    with pytest.raises(NonSymmetricError):
        steklov_spectrum(DtNOperator(np.ones((2, 3)), ()))
    with pytest.raises(PreconditionError):
        steklov_spectrum(DtNOperator(np.eye(2), ()), zero_tol=1e-3)


def test_eigenvector_signs_and_orthonormality():
    spec = solve(punctured_box()).spectrum
    v = spec.eigenvectors
    assert np.allclose(v.T @ v, np.eye(len(spec)), atol=1e-10)
    for j in range(v.shape[1]):
        col = v[:, j]
        assert col[np.flatnonzero(np.abs(col) > 1e-12)[0]] > 0


@pytest.mark.parametrize(
    "source",
    [
        SINGLE,
        DOMINO,
        subgraph_problem(PATH3, [1]),
        subgraph_problem(FiniteGraph.from_edges(5, [(0, 1), (1, 2), (2, 3), (1, 4)]), [1, 2]),
        LatticeDomain.from_points([(0,), (1,), (2,)]),
        LatticeDomain.from_points([(0, 0, 0)]),
    ],
)
def test_spectrum_against_bisection(source):
    sp = solve(source)
    n = len(sp.spectrum)
    assert n <= 6
    oracle = bisection_eigenvalues(sp.dtn.matrix)
    assert np.allclose(sp.spectrum.eigenvalues, oracle, atol=1e-10)


@settings(max_examples=40, deadline=None)
@given(lattice_domains())
def test_zero_multiplicity_counts_components(d):
    sp = solve(d)
    f = sp.form
    g = FiniteGraph.from_edges(f.n_closure, [tuple(e) for e in f.edges])
    comps = connected_components(g)
    assert sp.spectrum.zero_multiplicity == len(comps)
    lam = sp.spectrum.eigenvalues
    assert lam[0] > -1e-10
    assert lam[-1] <= f.boundary_diagonal.max() + 1e-10
    for comp in comps:
        ind = np.zeros(f.n_boundary)
        ind[[i - f.n_interior for i in comp if i >= f.n_interior]] = 1
        assert np.max(np.abs(sp.dtn.matrix @ ind)) < 1e-10


def test_variational_optimal_family_domino():
    sp = solve(DOMINO)
    for p in range(2, 9):
        trials = optimal_trial_family(sp.form, sp.spectrum, p)
        value = variational_sum_lower_bound(sp.form, trials)
        assert value == pytest.approx(reciprocal_sum(sp.spectrum, p), rel=1e-8)
    assert reciprocal_sum(sp.spectrum, 3) == pytest.approx(3.5)


def test_variational_single_trial():
    f = assemble_energy(SINGLE)
    phi = np.array([1.0, -1.0, 0.0, 0.0])
    u = harmonic_extension(f, phi)
    v = u / np.sqrt(dirichlet_energy(f, u))
    assert variational_sum_lower_bound(f, [v]) <= 1 + 1e-12
    with pytest.raises(InvalidTrialFamilyError):
        variational_sum_lower_bound(f, [u * 3])
    w = harmonic_extension(f, np.array([1.0, 0, 0, 0]))
    with pytest.raises(InvalidTrialFamilyError):
        variational_sum_lower_bound(f, [w / np.sqrt(dirichlet_energy(f, w))])
    with pytest.raises(InvalidTrialFamilyError):
        variational_sum_lower_bound(f, [[1.0, 2.0]])


@settings(max_examples=30, deadline=None)
@given(lattice_domains(), st.integers(0, 2**32 - 1), st.integers(2, 6))
def test_variational_random_family_below_reciprocals(d, seed, p):
    sp = solve(d)
    f = sp.form
    k = min(p - 1, f.n_boundary - 1)
    if k < 1 or sp.spectrum.is_zero(1):
        return
    rng = np.random.default_rng(seed)
    # random boundary data, mean-zero, extended and orthonormalised in energy
    phi = rng.standard_normal((k, f.n_boundary))
    phi -= phi.mean(axis=1, keepdims=True)
    u = np.array([harmonic_extension(f, x) for x in phi])
    a, b = f.edges[:, 0], f.edges[:, 1]
    gram = (u[:, a] - u[:, b]) @ (u[:, a] - u[:, b]).T
    w = np.linalg.inv(np.linalg.cholesky(gram))
    trials = w @ u
    value = variational_sum_lower_bound(f, trials)
    assert value <= reciprocal_sum(sp.spectrum, p) * (1 + 1e-9)


def test_coordinate_bound_single_vertex():
    cb = coordinate_trial_bound(SINGLE)
    assert cb.per_axis == (1.0, 1.0)
    assert cb.total == 2.0
    assert cb.total == pytest.approx(reciprocal_sum(solve(SINGLE).spectrum, 3))
    assert cb.gram_error < 1e-14


def test_coordinate_bound_domino():
    cb = coordinate_trial_bound(DOMINO)
    assert cb.per_axis == pytest.approx((5.5 / 3, 1.0))
    assert cb.total <= reciprocal_sum(solve(DOMINO).spectrum, 3) == pytest.approx(3.5)
    assert cb.rhs_main <= cb.total


@settings(max_examples=40, deadline=None)
@given(lattice_domains())
def test_coordinate_bound_properties(d):
    sp = solve(d)
    cb = coordinate_trial_bound(d, sp.form)
    nd = len(d.profile.delta)
    assert cb.double_sum == pytest.approx(2 * nd * cb.centred_sum_of_squares, rel=1e-12)
    assert cb.gram_error < 1e-12
    assert cb.rhs_main <= cb.total * (1 + 1e-12)
    trials = coordinate_trial_family(d, sp.form)
    value = variational_sum_lower_bound(sp.form, trials)
    assert value == pytest.approx(cb.total, rel=1e-12)
    assert value <= reciprocal_sum(sp.spectrum, d.n + 1) * (1 + 1e-9)


def test_coordinate_bound_one_dimension():
    # every lattice point has edges along each axis, so no axis is ever empty
    d = LatticeDomain.from_points([(0,), (1,)])
    cb = coordinate_trial_bound(d)
    assert cb.zero_axes == ()
    assert cb.total == pytest.approx(4.5 / 3)


def test_csv_exports():
    sp = solve(SINGLE)
    buf = io.StringIO()
    write_spectrum_csv(sp.spectrum, buf)
    assert buf.getvalue() == "index,eigenvalue\n1,0\n2,1\n3,1\n4,1\n"
    buf = io.StringIO()
    write_dtn_csv(sp.dtn, buf)
    lines = buf.getvalue().splitlines()
    assert lines[0] == ',"(-1,0)","(0,-1)","(0,1)","(1,0)"'
    assert lines[1].startswith('"(-1,0)",0.75,-0.25')
    assert len(lines) == 5
