import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qmgerbe import (
    KernelParams,
    LagrangianField,
    SpacetimePoint,
    action_line_integral,
    classical_action,
    connection_from_lagrangian,
    gauge_transform,
    stokes_check,
    surface_integral_dL_dt,
    verify_connection,
    vev_report,
    wkb_phase,
)
from qmgerbe.errors import DomainError, IncompleteDataError
from qmgerbe.geometry import (
    constructed_connection,
    free_lagrangian,
    lagrangian_one_form,
    polynomial_lagrangian,
    slab_cover,
)
from qmgerbe.mesh import DiscretePath, DiscreteSurface, SimplicialComplex, box_volume, polygon_path, square_surface

Q = LagrangianField(lambda q, t: q[0], lambda q, t: np.array([1.0, 0.0]))
UNIT_LOOP = polygon_path([[0, 0], [1, 0], [1, 1], [0, 1]], samples_per_side=5)


def test_line_integral_of_q_on_unit_square():
    assert action_line_integral(Q, UNIT_LOOP) == pytest.approx(1.0, abs=1e-14)
    assert action_line_integral(Q, UNIT_LOOP.reversed()) == pytest.approx(-1.0, abs=1e-14)


def test_constant_lagrangian_has_no_loop_action():
    L = LagrangianField(lambda q, t: 3.7)
    loop = polygon_path(np.random.default_rng(0).uniform(-1, 1, size=(7, 2)))
    assert action_line_integral(L, loop) == pytest.approx(0.0, abs=1e-14)


def test_free_action_along_classical_segment():
    t = np.linspace(0.0, 1.0, 1000)
    path = DiscretePath(np.column_stack([t, t]))
    S = action_line_integral(free_lagrangian(1.0), path)
    assert S == pytest.approx(0.5, abs=1e-5)
    assert S == pytest.approx(classical_action(KernelParams("free"), SpacetimePoint(0, 0), SpacetimePoint(1, 1)))


def test_surface_integral_of_q():
    assert surface_integral_dL_dt(Q, square_surface(4)) == pytest.approx(1.0, abs=1e-9)
    assert surface_integral_dL_dt(LagrangianField(lambda q, t: 2.0, lambda q, t: np.zeros(2)), square_surface(4)) == 0.0


def test_q_squared_is_reproduced_exactly():
    # both rules are exact here: linear gradient, and q is constant on vertical edges
    L = polynomial_lagrangian([(1.0, (2, 0))])
    for n in (2, 4, 8):
        rep = stokes_check(L, square_surface(n))
        assert rep.line == pytest.approx(1.0, abs=1e-13) and rep.residual < 1e-12


def test_refinement_is_second_order():
    L = polynomial_lagrangian([(1.0, (2, 1))])
    errs = [abs(surface_integral_dL_dt(L, square_surface(n)) - 0.5) for n in (2, 4, 8)]
    rates = np.log2(np.array(errs[:-1]) / np.array(errs[1:]))
    assert np.all(np.abs(rates - 2.0) < 0.05)


def test_stokes_unit_square():
    rep = stokes_check(Q, square_surface(3))
    assert rep.passed and rep.residual < 1e-9 and not rep.closed


def test_stokes_closed_surface():
    from qmgerbe.mesh import box_surface

    L = polynomial_lagrangian([(1.0, (2, 1, 1)), (0.5, (0, 3, 0))])
    rep = stokes_check(L, box_surface(3))
    assert rep.closed and rep.line == 0.0
    assert rep.residual == pytest.approx(abs(rep.surface))


def test_finite_difference_gradient_matches_exact():
    exact = polynomial_lagrangian([(1.0, (3, 0)), (2.0, (1, 2)), (-0.5, (0, 3))])
    fd = LagrangianField(exact.fn)
    for x in np.random.default_rng(1).uniform(-1, 1, size=(5, 2)):
        assert np.allclose(fd.gradient(x), exact.gradient(x), atol=1e-7)


def test_velocity_lagrangian_rules():
    L = free_lagrangian()
    with pytest.raises(DomainError):
        L.value([0.0, 0.0])
    with pytest.raises(DomainError):
        L.gradient([0.0, 0.0])
    with pytest.raises(DomainError):
        action_line_integral(L, DiscretePath([[0, 0], [1, 0]]))


# -- vacuum expectation values ---------------------------------------------------------

def test_vev_single_loop():
    rep = vev_report(Q, [UNIT_LOOP])
    assert rep.values[0] == pytest.approx(1.0) and rep.hbar_phys == pytest.approx(1.0)


def test_vev_loop_and_bounding_surface():
    L = polynomial_lagrangian([(1.0, (3, 0)), (1.0, (1, 2))])
    surf = square_surface(16)
    loop = DiscretePath(surf.boundary()[0].vertices, closed=True)
    rep = vev_report(L, [loop, surf], physical_index=1)
    assert abs(rep.values[0] - rep.values[1]) <= stokes_check(L, surf).residual + 1e-12
    assert rep.hbar_phys == rep.values[1]


def test_vev_validation():
    with pytest.raises(DomainError):
        vev_report(Q, [UNIT_LOOP], physical_index=1)
    with pytest.raises(DomainError):
        vev_report(Q, [np.zeros((3, 2))])


@settings(max_examples=30, deadline=None)
@given(st.floats(-5, 5), st.integers(0, 2**32 - 1))
def test_vev_linearity(lam, seed):
    rng = np.random.default_rng(seed)
    L = polynomial_lagrangian([(c, tuple(e)) for c, e in zip(rng.normal(size=3), rng.integers(0, 3, size=(3, 2)))])
    cands = [polygon_path(rng.uniform(-1, 1, size=(5, 2))), square_surface(3, (-0.5, 0.0), (0.5, 1.0))]
    base = vev_report(L, cands).values
    scaled = vev_report(L.scaled(lam), cands).values
    for a, b in zip(base, scaled):
        assert b == pytest.approx(lam * a, abs=1e-12)


# -- gauge transformations and WKB ---------------------------------------------------------

def test_constant_gauge_function_changes_nothing():
    form = lagrangian_one_form(Q)
    moved = gauge_transform(form, lambda q: 4.2)
    a, b = UNIT_LOOP.edges()
    assert np.array_equal(moved.on_edges(a, b), form.on_edges(a, b))


def test_open_path_shift_is_endpoint_difference():
    form = lagrangian_one_form(Q)

    def f(q):
        return np.sin(3 * q[0]) + q[0] ** 2

    path = DiscretePath(np.random.default_rng(3).uniform(-1, 1, size=(9, 2)))
    shift = gauge_transform(form, f).integrate(path) - form.integrate(path)
    assert shift == pytest.approx(f(path.vertices[-1, :-1]) - f(path.vertices[0, :-1]), abs=1e-12)


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_gauge_invariance_of_closed_loops(seed):
    rng = np.random.default_rng(seed)
    k, phase, amp = rng.uniform(-3, 3, size=3)
    L = polynomial_lagrangian([(c, tuple(e)) for c, e in zip(rng.normal(size=3), rng.integers(0, 3, size=(3, 2)))])
    form = lagrangian_one_form(L)
    loop = polygon_path(rng.uniform(-2, 2, size=(rng.integers(3, 9), 2)), samples_per_side=2)
    moved = gauge_transform(form, lambda q: amp * np.cos(k * q[0] + phase))
    assert abs(moved.integrate(loop) - form.integrate(loop)) < 1e-12


def test_wkb_gauge_factor():
    pts = np.linspace(-1, 1, 7)[:, None]
    R = lambda q: np.exp(-q[0] ** 2)  # noqa: E731
    S = lambda q: 0.5 * q[0] ** 2  # noqa: E731
    psi = wkb_phase(R, S, pts, hbar=0.7)
    assert np.array_equal(wkb_phase(R, S, pts, hbar=0.7, f=lambda q: 0.0), psi)
    moved = wkb_phase(R, S, pts, hbar=0.7, f=lambda q: 1.3)
    assert np.allclose(moved, psi * np.exp(1j * 1.3 / 0.7), atol=1e-15)
    wavy = wkb_phase(R, S, pts, hbar=0.7, f=lambda q: np.sin(5 * q[0]))
    assert np.allclose(np.abs(wavy), np.abs(psi), atol=1e-15)


# -- connection data -----------------------------------------------------------------------

def test_zero_lagrangian_gives_zero_connection():
    A = connection_from_lagrangian(LagrangianField(lambda q, t: 0.0), (1, 2))
    assert np.all(A.on_edges(*UNIT_LOOP.edges()) == 0)


def test_holonomy_is_exponentiated_action():
    L = polynomial_lagrangian([(1.0, (2, 1)), (-0.4, (1, 0))])
    A = connection_from_lagrangian(L, (1, 2), hbar=0.6)
    assert A.holonomy(UNIT_LOOP) == pytest.approx(np.exp(1j * action_line_integral(L, UNIT_LOOP) / 0.6), abs=1e-14)


def test_dA_on_square_matches_surface_flux():
    L = polynomial_lagrangian([(1.0, (3, 0)), (1.0, (1, 2))])
    hbar = 0.5
    errs = []
    for n in (4, 8, 16):
        surf = square_surface(n)
        A = connection_from_lagrangian(L, (1, 2), hbar)
        dA = sum(A.integrate(p) for p in surf.boundary())
        errs.append(abs(dA - surface_integral_dL_dt(L, surf) / hbar))
    assert np.all(np.log2(np.array(errs[:-1]) / np.array(errs[1:])) > 1.8)


def test_constructed_connection_converges():
    cover = slab_cover()
    res = []
    # the coarsest meshes are pre-asymptotic for the triple-overlap edges
    for n in (6, 12):
        rep = verify_connection(constructed_connection(SimplicialComplex.from_mesh(box_volume(n)), cover, seed=1))
        assert rep.checked["tets"] > 0 and rep.checked["faces"] > 0 and rep.checked["edges"] > 0
        res.append([rep.residual_H, rep.residual_B, rep.residual_A])
    ratio = np.array(res[0]) / np.array(res[1])
    assert np.all(ratio > 3.4)


def test_flat_connection_passes():
    K = SimplicialComplex.from_mesh(box_volume(3))
    rep = verify_connection(constructed_connection(K, slab_cover(), flat=True))
    assert rep.passed and rep.flat and rep.max_residual == 0.0


def test_perturbed_connection_fails():
    cover = slab_cover()
    K = SimplicialComplex.from_mesh(box_volume(6))
    data = constructed_connection(K, cover, seed=2)
    base = verify_connection(data).max_residual
    from qmgerbe.cover import overlap

    edge = int(np.flatnonzero(K.inside(1, overlap(cover, (1, 2, 3))))[0])
    rep = verify_connection(data.perturbed_A((1, 2), edge, 0.1), tol=1e-2)
    assert not rep.passed
    assert max(rep.residual_A, rep.residual_B) >= 0.1 - base


def test_missing_connection_data():
    K = SimplicialComplex.from_mesh(box_volume(2))
    data = constructed_connection(K, slab_cover())
    del data.B[2]
    with pytest.raises(IncompleteDataError):
        verify_connection(data)
    with pytest.raises(DomainError):
        constructed_connection(SimplicialComplex.from_mesh(square_surface(2)), slab_cover())


def _random_polynomial(rng):
    n = rng.integers(1, 4)
    expo = rng.integers(0, 4, size=(n, 2))
    expo[0, 0] = max(expo[0, 0], 3)  # keep at least one cubic term so the error is not zero
    return polynomial_lagrangian([(c, tuple(e)) for c, e in zip(rng.uniform(-2, 2, size=n), expo)])


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_stokes_converges_at_second_order(seed):
    rng = np.random.default_rng(seed)
    L = _random_polynomial(rng)
    # a random orientation-preserving affine image of the unit square
    M = np.eye(2) + rng.uniform(-0.4, 0.4, size=(2, 2))
    if np.linalg.det(M) <= 0.2:
        M = np.eye(2)
    shift = rng.uniform(-1, 1, size=2)
    res = []
    for n in (8, 16, 32):
        sq = square_surface(n)
        surf = DiscreteSurface(sq.vertices @ M.T + shift, sq.triangles)
        res.append(stokes_check(L, surf).residual)
    if res[0] < 1e-11:
        return
    rates = np.log2(np.array(res[:-1]) / np.array(res[1:]))
    assert rates[-1] > 1.8
