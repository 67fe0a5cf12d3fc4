import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qmgerbe import Cover, U1Cochain, coboundary, verify_cocycle, verify_gerbe_cocycle, verify_line_bundle_cocycle
from qmgerbe.cech import permutation_parity
from qmgerbe.cover import overlap, sample_points
from qmgerbe.errors import DomainError, IncompleteDataError

COVER = Cover.intervals([(0.0, 2.0), (1.0, 3.0), (1.5, 4.0), (1.8, 5.0)])
QUAD_PTS = sample_points(overlap(COVER, (1, 2, 3, 4)), 4, seed=3)
PTS = QUAD_PTS + [np.array([0.5]), np.array([1.2]), np.array([1.6]), np.array([3.5])]


def test_constant_one_is_closed():
    one = U1Cochain.constant(COVER, 1, PTS)
    d = coboundary(one)
    assert d.degree == 2
    assert all(v == 1 for _, v in d.items())


def test_dd_of_zero_cochain_is_one():
    h = U1Cochain.random(COVER, 0, PTS, seed=1)
    dh = coboundary(h)
    rep = verify_line_bundle_cocycle(dh)
    assert rep.passed and rep.cocycle_deviation < 1e-12 and rep.checked > 0
    ddh = coboundary(dh)
    assert max(abs(v - 1) for _, v in ddh.items()) < 1e-12


def test_coboundary_of_degree_one_is_gerbe_cocycle():
    tau = U1Cochain.random(COVER, 1, PTS, seed=4)
    rep = verify_gerbe_cocycle(coboundary(tau))
    assert rep.passed and rep.max_deviation < 1e-12 and rep.checked == len(QUAD_PTS)


def test_coboundary_degree_one_formula():
    tau = U1Cochain.random(COVER, 1, PTS, seed=2)
    g = coboundary(tau)
    p = QUAD_PTS[0]
    expect = tau.value((1, 2), p) * tau.value((2, 3), p) * tau.value((3, 1), p)
    assert abs(g.value((1, 2, 3), p) - expect) < 1e-14


def test_line_bundle_constant_passes():
    assert verify_line_bundle_cocycle(U1Cochain.constant(COVER, 1, PTS)).passed


def test_line_bundle_perturbation_is_reported():
    lam = coboundary(U1Cochain.random(COVER, 0, PTS, seed=7))
    p = QUAD_PTS[0]
    bad = lam.perturbed((1, 2), p, 0.1)
    rep = verify_line_bundle_cocycle(bad, tol=1e-6)
    assert not rep.passed
    assert rep.cocycle_deviation == pytest.approx(2 * abs(np.sin(0.05)), abs=1e-12)


def test_gerbe_trivial_passes():
    assert verify_gerbe_cocycle(U1Cochain.constant(COVER, 2, PTS)).passed


def test_gerbe_perturbation_is_reported():
    g = coboundary(U1Cochain.random(COVER, 1, PTS, seed=11))
    p = QUAD_PTS[1]
    bad = g.perturbed((1, 2, 3), p, 0.2)
    rep = verify_gerbe_cocycle(bad, tol=1e-6)
    assert not rep.passed
    assert rep.cocycle_deviation == pytest.approx(2 * np.sin(0.1), abs=1e-12)
    assert rep.worst[0] == (1, 2, 3, 4)


def test_permuted_reads_follow_parity():
    g = U1Cochain.random(COVER, 2, QUAD_PTS, seed=0)
    p = QUAD_PTS[0]
    base = g.value((1, 2, 3), p)
    for perm in itertools.permutations((1, 2, 3)):
        expect = base if permutation_parity(perm) > 0 else 1 / base
        assert abs(g.value(perm, p) - expect) < 1e-15


def test_inconsistent_transposition_is_reported():
    lam = U1Cochain.constant(COVER, 1, PTS)
    p = QUAD_PTS[0]
    lam.set((2, 1), p, np.exp(0.3j))  # should have been 1
    rep = verify_line_bundle_cocycle(lam)
    assert rep.symmetry_deviation == pytest.approx(abs(np.exp(0.3j) - 1), abs=1e-12)
    assert not rep.passed


def test_missing_face_is_incomplete_data():
    tau = U1Cochain(COVER, 1)
    tau.set((1, 2), QUAD_PTS[0], 1.0)
    with pytest.raises(IncompleteDataError):
        coboundary(tau)


def test_value_must_be_unit():
    tau = U1Cochain(COVER, 1)
    with pytest.raises(DomainError):
        tau.set((1, 2), QUAD_PTS[0], 1.01)


def test_point_must_lie_in_overlap():
    tau = U1Cochain(COVER, 1)
    with pytest.raises(DomainError):
        tau.set((1, 4), [0.5], 1.0)


def test_wrong_degree_and_repeated_label():
    tau = U1Cochain(COVER, 1)
    with pytest.raises(DomainError):
        tau.set((1, 2, 3), QUAD_PTS[0], 1.0)
    with pytest.raises(DomainError):
        tau.set((2, 2), QUAD_PTS[0], 1.0)
    with pytest.raises(DomainError):
        verify_gerbe_cocycle(tau)


def test_rows_round_trip():
    g = U1Cochain.random(COVER, 2, QUAD_PTS, seed=5)
    again = U1Cochain.from_rows(COVER, 2, g.to_rows())
    for (idx, p), v in g.items():
        assert again.value(idx, p) == v


@settings(max_examples=1000, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_coboundaries_are_gerbe_cocycles(seed):
    tau = U1Cochain.random(COVER, 1, QUAD_PTS[:2], seed=seed)
    assert verify_gerbe_cocycle(coboundary(tau)).passed


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(0, 2))
def test_dd_is_trivial_in_every_degree(seed, k):
    c = U1Cochain.random(COVER, k, PTS, seed=seed)
    dd = coboundary(coboundary(c))
    assert max((abs(v - 1) for _, v in dd.items()), default=0.0) < 1e-12
    assert verify_cocycle(coboundary(c)).passed


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2**32 - 1), st.permutations([1, 2, 3, 4]))
def test_antisymmetry_under_any_permutation(seed, perm):
    c = U1Cochain.random(COVER, 3, QUAD_PTS[:1], seed=seed)
    p = QUAD_PTS[0]
    v = c.value(perm, p)
    ref = c.value((1, 2, 3, 4), p)
    assert abs(v - (ref if permutation_parity(perm) > 0 else 1 / ref)) < 1e-15
