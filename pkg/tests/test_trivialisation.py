import numpy as np
import pytest
from conftest import cval
from hypothesis import given, settings
from hypothesis import strategies as st

from qmgerbe import KernelParams, TrivParams, tau_closed, tau_numeric
from qmgerbe.cover import Chart
from qmgerbe.errors import DomainError, TangentPoleError, TimeOrderError
from qmgerbe.kernels import prefactor_1d
from qmgerbe.trivialisation import eval_J_linear, eval_K_harmonic, phase_ratio

LIN = TrivParams(KernelParams("linear", F=1.0), 0.0, 1.0, 2.0)
HARM = TrivParams(KernelParams("harmonic", omega=1.0), 0.0, np.pi / 4, np.pi / 2)


def test_free_closed_is_exactly_one():
    tp = TrivParams(KernelParams("free"), -0.3, 0.5, 1.7)
    for q in (-1.0, 0.0, 2.0):
        r = tau_closed(tp, q)
        assert r.tau == 1.0 and r.method == "closed"


def test_free_numeric_against_oracle(derived):
    tp = TrivParams(KernelParams("free"), -0.3, 0.5, 1.7)
    for q, ref in derived["tau_free"].items():
        assert abs(tau_numeric(tp, float(q)).tau - cval(ref)) < 1e-6


def test_free_numeric_is_constant():
    tp = TrivParams(KernelParams("free", m=2.0, hbar=0.5), 0.0, 0.4, 1.9)
    ref = tau_numeric(tp, 0.0)
    for q in (-2.0, 0.7, 3.0):
        assert abs(phase_ratio(tau_numeric(tp, q), ref)) < 1e-6


def test_linear_closed_value():
    assert abs(tau_closed(LIN, 0.0).tau - np.exp(-1j / 3)) < 1e-15


@pytest.mark.parametrize("q", [0.5, 1.0])
def test_linear_ratio_against_oracle(derived, q):
    ref = cval(derived["tau_ratio_linear"][str(q)])
    assert abs(ref - np.exp(2j * q)) < 1e-6
    numeric = tau_numeric(LIN, q).tau / tau_numeric(LIN, 0.0).tau
    closed = tau_closed(LIN, q).tau / tau_closed(LIN, 0.0).tau
    assert abs(np.angle(numeric / ref)) < 1e-5
    assert abs(np.angle(closed / ref)) < 1e-5


def test_harmonic_closed_value():
    assert abs(tau_closed(HARM, 1.0).tau - np.exp(-1j)) < 1e-14


def test_harmonic_ratio_against_oracle(derived):
    ref = cval(derived["tau_ratio_harmonic"])
    numeric = tau_numeric(HARM, 1.0).tau / tau_numeric(HARM, 0.0).tau
    closed = tau_closed(HARM, 1.0).tau / tau_closed(HARM, 0.0).tau
    assert abs(np.angle(numeric / ref)) < 1e-5
    assert abs(np.angle(closed / ref)) < 1e-5


def test_vanishing_force_limit():
    tp = TrivParams(KernelParams("linear", F=1e-8), 0.0, 1.0, 2.0)
    for q in (-2.0, 0.3, 2.0):
        assert abs(tau_closed(tp, q).tau - 1.0) < 1e-7
    zero = TrivParams(KernelParams("linear", F=0.0), 0.0, 1.0, 2.0)
    assert tau_closed(zero, 1.3).tau == 1.0


def test_vanishing_frequency_limit():
    tp = TrivParams(KernelParams("harmonic", omega=1e-8), 0.0, 1.0, 2.0)
    for q in (-2.0, 0.3, 2.0):
        r = tau_closed(tp, q)
        assert abs(r.tau - 1.0) < 1e-7 and abs(r.tau_tilde_modulus - 1.0) < 1e-7


def test_J_reduces_to_fresnel_normalisation():
    tp = TrivParams(KernelParams("linear", F=0.0, m=2.0, hbar=0.5), 0.0, 0.7, 1.5)
    for leg in ("first", "second"):
        dt = tp.gap(leg)
        assert eval_J_linear(tp, 0.9, leg) == pytest.approx(np.sqrt(2j * np.pi * 0.5 * dt / 2.0), abs=1e-15)


def test_J_closed_value():
    pref = np.sqrt(2j * np.pi)
    assert abs(eval_J_linear(LIN, 0.0, "first") - pref * np.exp(-1j / 6)) < 1e-15


@pytest.mark.parametrize("q", [0.0, 0.5])
@pytest.mark.parametrize("leg", ["first", "second"])
def test_J_against_oracle(derived, q, leg):
    # the oracle integrates the full kernel, so include its normalisation
    z = eval_J_linear(LIN, q, leg) * prefactor_1d(LIN.kernel, LIN.gap(leg))
    assert abs(z - cval(derived["J"][f"{q},{leg}"])) < 1e-6


def test_K_closed_value():
    pref = np.sqrt(2j * np.pi)
    assert abs(eval_K_harmonic(HARM, 1.0, "first") - pref * np.exp(-0.5j)) < 1e-14


@pytest.mark.parametrize("q", [0.0, 1.0])
@pytest.mark.parametrize("leg", ["first", "second"])
def test_K_against_oracle(derived, q, leg):
    z = eval_K_harmonic(HARM, q, leg) * prefactor_1d(HARM.kernel, HARM.gap(leg))
    assert abs(z - cval(derived["K"][f"{q},{leg}"])) < 1e-6


def test_K_small_frequency_matches_free_J():
    K = TrivParams(KernelParams("harmonic", omega=1e-6), 0.0, 0.8, 1.5)
    J = TrivParams(KernelParams("linear", F=0.0), 0.0, 0.8, 1.5)
    for leg in ("first", "second"):
        assert abs(eval_K_harmonic(K, 0.6, leg) - eval_J_linear(J, 0.6, leg)) < 1e-7


def test_leg_integral_kind_checks():
    with pytest.raises(DomainError):
        eval_J_linear(HARM, 0.0, "first")
    with pytest.raises(DomainError):
        eval_K_harmonic(LIN, 0.0, "first")
    with pytest.raises(DomainError):
        eval_J_linear(LIN, 0.0, "third")


def test_tangent_pole_is_refused():
    tp = TrivParams(KernelParams("harmonic", omega=1.0), 0.0, np.pi / 2, 2.0)
    with pytest.raises(TangentPoleError):
        tau_closed(tp, 0.5)


def test_time_order_is_enforced():
    with pytest.raises(TimeOrderError):
        TrivParams(KernelParams("free"), 0.0, 0.0, 1.0)


def test_midpoint_shape():
    with pytest.raises(DomainError):
        tau_closed(LIN, [0.1, 0.2])


def test_chart_restricted_mode():
    r = tau_numeric(LIN, 0.5, charts=(Chart(1, -3.0, 3.0), Chart(2, -2.0, 4.0)))
    assert r.method == "numeric-chart"
    assert abs(abs(r.tau) - 1.0) < 1e-12


def test_factorisation_over_coordinates():
    k2 = KernelParams("linear", d=2, F=(0.6, -0.4))
    tp2 = TrivParams(k2, 0.0, 0.9, 1.7)
    q = np.array([0.3, -1.1])
    prod = 1.0
    for j in range(2):
        prod *= tau_closed(TrivParams(k2.coordinate(j), 0.0, 0.9, 1.7), q[j]).tau
    assert abs(tau_closed(tp2, q).tau - prod) < 1e-14
    kh = KernelParams("harmonic", d=2, omega=0.8)
    tph = TrivParams(kh, 0.0, 0.6, 1.5)
    num = tau_numeric(tph, q).tau
    prod = 1.0
    for j in range(2):
        prod *= tau_numeric(TrivParams(kh.coordinate(j), 0.0, 0.6, 1.5), q[j]).tau
    assert abs(num - prod) < 1e-10


def _params(kind, rng):
    m, hbar = rng.uniform(0.5, 2.0, size=2)
    g1, g2 = rng.uniform(0.3, 1.2, size=2)
    t1 = rng.uniform(-1, 1)
    kw = {"F": rng.uniform(-1.5, 1.5)} if kind == "linear" else {}
    if kind == "harmonic":
        kw["omega"] = rng.uniform(0.3, 1.2)
    return TrivParams(KernelParams(kind, m=m, hbar=hbar, **kw), t1, t1 + g1, t1 + g1 + g2)


@settings(max_examples=10, deadline=None)
@given(st.integers(0, 2**32 - 1), st.sampled_from(["free", "linear", "harmonic"]))
def test_numeric_and_closed_ratios_agree(seed, kind):
    rng = np.random.default_rng(seed)
    tp = _params(kind, rng)
    q_ref = rng.uniform(-1, 1)
    n_ref, c_ref = tau_numeric(tp, q_ref), tau_closed(tp, q_ref)
    for q in rng.uniform(-2, 2, size=4):
        n, c = tau_numeric(tp, q), tau_closed(tp, q)
        assert abs(np.angle((n.tau / n_ref.tau) / (c.tau / c_ref.tau))) < 1e-5
        assert abs(abs(n.tau) - 1) < 1e-12 and abs(abs(c.tau) - 1) < 1e-12
