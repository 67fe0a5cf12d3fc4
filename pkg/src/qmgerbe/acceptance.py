"""The nine acceptance checks, runnable from the CLI and from pytest.

Each check returns a :class:`CriterionResult` whose ``line()`` is a one-line
pass/fail summary.  Tolerances and runtime limits are fixed here and are
never relaxed by callers.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import charclass as cc
from .cech import U1Cochain, coboundary, verify_gerbe_cocycle
from .cocycle import LoopSpec, steepest_descent_cocycle
from .cover import Cover, overlap, sample_points
from .geometry import (
    GerbeConnectionData,
    LagrangianField,
    constructed_connection,
    gauge_transform,
    lagrangian_one_form,
    polynomial_lagrangian,
    slab_cover,
    stokes_check,
    verify_connection,
    wkb_phase,
)
from .kernels import KernelParams, SpacetimePoint, compose_semigroup, propagator, timeslice_propagator
from .mesh import DiscretePath, SimplicialComplex, box_volume, closed_volume, square_surface
from .quadrature import DEFAULT_QUAD, QuadratureSpec
from .trivialisation import TrivParams, tau_closed, tau_numeric


@dataclass
class CriterionResult:
    number: int
    title: str
    passed: bool
    metrics: dict
    runtime: float = 0.0
    limit: float = float("inf")

    @property
    def ok(self) -> bool:
        return self.passed and self.runtime < self.limit

    def line(self) -> str:
        tag = "PASS" if self.ok else "FAIL"
        shown = ", ".join(f"{k}={_fmt(v)}" for k, v in self.metrics.items())
        timing = f"{self.runtime:.2f} s < {self.limit:g} s" if self.runtime < self.limit else (
            f"{self.runtime:.2f} s exceeds {self.limit:g} s"
        )
        return f"[{tag}] criterion {self.number} ({self.title}): {shown} [{timing}]"

    def as_dict(self) -> dict:
        return {
            "criterion": self.number,
            "title": self.title,
            "passed": self.ok,
            "metrics": {k: _plain(v) for k, v in self.metrics.items()},
            "runtime_s": self.runtime,
            "limit_s": self.limit,
        }


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v))
    if isinstance(v, (float, np.floating)):
        return f"{float(v):.3g}"
    return str(v)


def _plain(v):
    if isinstance(v, (np.bool_,)):
        return bool(v)
    if isinstance(v, (np.floating,)):
        return float(v)
    if isinstance(v, (np.integer,)):
        return int(v)
    return v


def _wrap(x: float) -> float:
    return float(abs(np.angle(np.exp(1j * x))))


def _ratio_error(tp: TrivParams, grid, q_ref: float, quad: QuadratureSpec) -> float:
    ref_n = tau_numeric(tp, q_ref, quad).tau
    ref_c = tau_closed(tp, q_ref).tau
    worst = 0.0
    for q in grid:
        rn = tau_numeric(tp, q, quad).tau / ref_n
        rc = tau_closed(tp, q).tau / ref_c
        worst = max(worst, float(abs(np.angle(rn / rc))))
    return worst


# -- criteria ----------------------------------------------------------------------------

def criterion_1(seed: int = 0, quad: QuadratureSpec = DEFAULT_QUAD) -> CriterionResult:
    rng = np.random.default_rng(seed)
    grid = np.linspace(-2.0, 2.0, 9)
    k = KernelParams("free")
    closed_exact = True
    worst = 0.0
    for _ in range(10):
        g1, g2 = rng.uniform(0.3, 2.0, size=2)
        t1 = rng.uniform(-1.0, 1.0)
        tp = TrivParams(k, t1, t1 + g1, t1 + g1 + g2)
        closed_exact &= all(tau_closed(tp, q).tau == 1.0 for q in grid)
        ref = tau_numeric(tp, 0.0, quad).tau
        for q in grid:
            worst = max(worst, float(abs(np.angle(tau_numeric(tp, q, quad).tau / ref))))
    return CriterionResult(
        1,
        "free trivialisation",
        bool(closed_exact and worst < 1e-5),
        {"closed_is_one": bool(closed_exact), "max_ratio_phase": worst},
        limit=30.0,
    )


def criterion_2(seed: int = 0, quad: QuadratureSpec = DEFAULT_QUAD) -> CriterionResult:
    grid = np.linspace(-2.0, 2.0, 21)
    worst = 0.0
    for m, hbar, F in [(1.0, 1.0, 1.0), (2.0, 1.0, 0.5)]:
        tp = TrivParams(KernelParams("linear", m=m, hbar=hbar, F=F), 0.0, 0.8, 1.7)
        worst = max(worst, _ratio_error(tp, grid, 0.0, quad))
    # F -> 0: closed form and numeric ratios against the free system
    small = TrivParams(KernelParams("linear", F=1e-8), 0.0, 0.8, 1.7)
    free = TrivParams(KernelParams("free"), 0.0, 0.8, 1.7)
    cont_closed = max(abs(tau_closed(small, q).tau - 1.0) for q in grid)
    ref_s, ref_f = tau_numeric(small, 0.0, quad).tau, tau_numeric(free, 0.0, quad).tau
    cont_numeric = max(
        abs(tau_numeric(small, q, quad).tau / ref_s - tau_numeric(free, q, quad).tau / ref_f) for q in grid[::5]
    )
    ok = worst < 1e-5 and cont_closed < 1e-7 and cont_numeric < 1e-7
    return CriterionResult(
        2,
        "linear trivialisation",
        bool(ok),
        {"max_ratio_phase": worst, "F0_closed": float(cont_closed), "F0_numeric": float(cont_numeric)},
        limit=120.0,
    )


def criterion_3(seed: int = 0, quad: QuadratureSpec = DEFAULT_QUAD) -> CriterionResult:
    grid = np.linspace(-2.0, 2.0, 21)
    worst = 0.0
    for omega in (0.5, 1.0):
        tp = TrivParams(KernelParams("harmonic", omega=omega), 0.0, 0.9, 1.6)
        worst = max(worst, _ratio_error(tp, grid, 0.0, quad))
    small = TrivParams(KernelParams("harmonic", omega=1e-8), 0.0, 0.9, 1.6)
    free = TrivParams(KernelParams("free"), 0.0, 0.9, 1.6)
    cont_closed = max(
        max(abs(tau_closed(small, q).tau - 1.0), abs(tau_closed(small, q).tau_tilde_modulus - 1.0)) for q in grid
    )
    ref_s, ref_f = tau_numeric(small, 0.0, quad).tau, tau_numeric(free, 0.0, quad).tau
    cont_numeric = max(
        abs(tau_numeric(small, q, quad).tau / ref_s - tau_numeric(free, q, quad).tau / ref_f) for q in grid[::5]
    )
    ok = worst < 1e-5 and cont_closed < 1e-7 and cont_numeric < 1e-7
    return CriterionResult(
        3,
        "harmonic trivialisation",
        bool(ok),
        {"max_ratio_phase": worst, "w0_closed": float(cont_closed), "w0_numeric": float(cont_numeric)},
        limit=120.0,
    )


def _kernels() -> list:
    return [KernelParams("free"), KernelParams("linear", F=0.7), KernelParams("harmonic", omega=1.0)]


def criterion_4(seed: int = 0, quad: QuadratureSpec = DEFAULT_QUAD) -> CriterionResult:
    rng = np.random.default_rng(seed)
    worst_c = 0.0
    for k in _kernels():
        for _ in range(20):
            q1, q2 = rng.uniform(-2.0, 2.0, size=2)
            T = rng.uniform(0.5, 2.0)
            tmid = T * rng.uniform(0.2, 0.8)
            p1, p2 = SpacetimePoint(q1, 0.0), SpacetimePoint(q2, T)
            G = propagator(k, p1, p2)
            worst_c = max(worst_c, abs(compose_semigroup(k, p1, tmid, p2, quad) - G) / abs(G))
    worst_t = 0.0
    for k in _kernels():
        p1, p2 = SpacetimePoint(0.4, 0.0), SpacetimePoint(-0.7, 1.3)
        G = propagator(k, p1, p2)
        for N in (2, 3, 4):
            worst_t = max(worst_t, abs(timeslice_propagator(k, p1, p2, N) - G) / abs(G))
    return CriterionResult(
        4,
        "semigroup and time slicing",
        bool(worst_c < 1e-5 and worst_t < 1e-5),
        {"compose_rel": float(worst_c), "timeslice_rel": float(worst_t)},
        limit=120.0,
    )


def criterion_5(seed: int = 0) -> CriterionResult:
    cover = Cover.intervals([(0.0, 2.0), (1.0, 3.0), (1.5, 4.0), (1.8, 5.0)])
    pts = sample_points(overlap(cover, (1, 2, 3, 4)), 2, seed)
    worst_dd = 0.0
    for k in range(1000):
        c = U1Cochain.random(cover, k % 2, pts, seed + k)
        dd = coboundary(coboundary(c))
        for _, v in dd.items():
            worst_dd = max(worst_dd, abs(v - 1.0))
    passes, detected, injected = 0, 0, 0
    rng = np.random.default_rng(seed)
    for k in range(20):
        g = coboundary(U1Cochain.random(cover, 1, pts, 10_000 + seed + k))
        passes += verify_gerbe_cocycle(g).passed
        keys = list(g.keys())
        idx, p = keys[rng.integers(len(keys))]
        amount = rng.uniform(1e-3, np.pi) * rng.choice([-1.0, 1.0])
        injected += 1
        detected += not verify_gerbe_cocycle(g.perturbed(idx, p, amount)).passed
    # the smallest admissible perturbation on its own
    g = coboundary(U1Cochain.random(cover, 1, pts, seed))
    idx, p = next(iter(g.keys()))
    injected += 1
    detected += not verify_gerbe_cocycle(g.perturbed(idx, p, 1e-3)).passed
    ok = worst_dd < 1e-12 and passes == 20 and detected == injected
    return CriterionResult(
        5,
        "Cech identities",
        bool(ok),
        {"max_dd_dev": worst_dd, "cocycles_pass": f"{passes}/20", "detected": f"{detected}/{injected}"},
        limit=10.0,
    )


def free_example_loop() -> LoopSpec:
    return LoopSpec(KernelParams("free"), (0.0, 2.0, -2.0), 1.0, tuple(float(t) for t in range(9)))


def criterion_6(seed: int = 0) -> CriterionResult:
    res = steepest_descent_cocycle(free_example_loop())
    s_err = abs(res.S_loop - 11.0)
    g_err = abs(res.g - np.exp(11j))
    rng = np.random.default_rng(seed)
    relabel = 0.0
    for k in _kernels():
        for _ in range(5):
            times = np.cumsum(rng.uniform(0.2, 0.5, size=9))
            loop = LoopSpec(k, tuple(rng.uniform(-2, 2, size=3)), rng.uniform(-1, 1), tuple(times),
                            anchors_out=tuple(rng.uniform(-2, 2, size=3)))
            a = steepest_descent_cocycle(loop).S_loop
            b = steepest_descent_cocycle(loop.relabeled()).S_loop
            c = steepest_descent_cocycle(loop.relabeled().relabeled()).S_loop
            relabel = max(relabel, abs(a - b), abs(a - c))
    degenerate = steepest_descent_cocycle(LoopSpec(KernelParams("free"), (1.0, 1.0, 1.0), 1.0, tuple(range(9))))
    ok = s_err <= 1e-12 and g_err <= 1e-12 and relabel <= 1e-12 and degenerate.g == 1.0
    return CriterionResult(
        6,
        "steepest-descent cocycle",
        bool(ok),
        {"S_loop": res.S_loop, "g_err": float(g_err), "relabel_dev": relabel, "degenerate_g": str(degenerate.g)},
        limit=1.0,
    )


STOKES_FIELDS = (
    ((1.0, (3, 0)), (1.0, (1, 2))),
    ((0.5, (2, 1)), (-1.0, (3, 1)), (2.0, (0, 2))),
    ((1.0, (1, 3)), (0.3, (4, 0))),
)


def criterion_7(seed: int = 0) -> CriterionResult:
    slopes = []
    for terms in STOKES_FIELDS:
        L = polynomial_lagrangian(terms)
        r = [stokes_check(L, square_surface(n)).residual for n in (4, 8, 16, 32)]
        slopes.extend(np.log2(np.array(r[:-1]) / np.array(r[1:])))
    stokes_ok = all(abs(s - 2.0) <= 0.2 for s in slopes)
    cover = slab_cover()
    res = []
    for n in (4, 8, 16):
        K = SimplicialComplex.from_mesh(box_volume(n))
        data = constructed_connection(K, cover, seed=seed)
        rep = verify_connection(data)
        res.append([rep.residual_H, rep.residual_B, rep.residual_A])
        if n == 8:
            perturbed = _perturb_triple_edge(data, cover, 0.1)
            pert = verify_connection(perturbed).max_residual
    fit = np.polyfit(np.log([1 / 4, 1 / 8, 1 / 16]), np.log(np.array(res)), 1)[0]
    conn_ok = bool(np.all(fit >= 1.8)) and pert >= 0.09
    return CriterionResult(
        7,
        "Stokes and connection",
        bool(stokes_ok and conn_ok),
        {
            "stokes_slopes": f"{min(slopes):.3f}..{max(slopes):.3f}",
            "connection_slopes": "/".join(f"{s:.2f}" for s in fit),
            "perturbed_residual": pert,
        },
        limit=60.0,
    )


def _perturb_triple_edge(data: GerbeConnectionData, cover: Cover, amount: float) -> GerbeConnectionData:
    mask = data.complex.inside(1, overlap(cover, (1, 2, 3)))
    edge = int(np.flatnonzero(mask)[len(np.flatnonzero(mask)) // 2])
    return data.perturbed_A((1, 2), edge, amount)


def gluing_instance(n_flux: float, c: float = 1.0, hbar: float = 1.0, cells: int = 32, consistent: bool = True):
    """Vortex Lagrangian on a box whose two halves glue to a closed volume.

    The box ``[-1, 1]^2 x [0, T]`` is chosen so the surface flux over
    ``pi hbar`` is ``n_flux``.  Each half carries ``flux / hbar`` of ``H``
    (a doubled copy when ``consistent`` is false).
    """
    T = n_flux * hbar / (2.0 * c)
    vol = box_volume((cells, cells, 1), (-1.0, -1.0, 0.0), (1.0, 1.0, T))
    per_half = np.pi * n_flux * (1.0 if consistent else 2.0)
    H = (cc.uniform_H(vol, per_half), cc.uniform_H(vol, per_half))
    return cc.vortex_lagrangian(c), H, vol, vol.reversed(), hbar


def criterion_8(seed: int = 0) -> CriterionResult:
    cv = closed_volume(2)
    planted = {}
    for n in (0, 1, 2, 5):
        rep = cc.integrate_H_closed_volume(cc.uniform_H(cv, 2 * np.pi * n), cv)
        planted[n] = rep.n == n and rep.passed
    rng = np.random.default_rng(seed)
    glue_ok = 0
    for k in range(20):
        n_flux = float(rng.integers(1, 5)) + (0.0 if k % 4 else 0.5)
        consistent = k % 5 != 3
        L, H, v1, v2, hbar = gluing_instance(n_flux, c=rng.uniform(0.5, 2.0), hbar=rng.uniform(0.5, 2.0),
                                             consistent=consistent)
        rep = cc.gluing_check(L, H, v1, v2, hbar)
        expect = rep.surface.passed and rep.volume.passed and rep.surface.n == rep.volume.n
        truth = consistent and n_flux == int(n_flux)
        glue_ok += rep.passed == expect == truth
    parity_even = 0
    loops = 0
    for k in range(10):
        anchors = tuple(rng.uniform(-3, 3, size=3))
        loop = LoopSpec(KernelParams("free"), anchors, rng.uniform(-1, 1), tuple(np.cumsum(rng.uniform(0.3, 1, 9))))
        S = steepest_descent_cocycle(loop).S_loop
        for turns in (1, 2, 3):
            hbar = S / (2 * np.pi * turns)
            res = steepest_descent_cocycle(LoopSpec(loop.kernel.replace(hbar=hbar), anchors, loop.midpoint, loop.times))
            rep = cc.cocycle_integer_form(res.g, winding=cc.winding_of(res.action_over_hbar))
            loops += 1
            parity_even += rep.passed and rep.parity == "even"
    ok = all(planted.values()) and glue_ok == 20 and parity_even == loops
    return CriterionResult(
        8,
        "quantization",
        bool(ok),
        {"planted_n": all(planted.values()), "gluing": f"{glue_ok}/20", "even_parity": f"{parity_even}/{loops}"},
        limit=30.0,
    )


def criterion_9(seed: int = 0) -> CriterionResult:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for k in range(100):
        d = 1 + k % 2
        n = int(rng.integers(3, 12))
        corners = rng.uniform(-2, 2, size=(n, d + 1))
        path = DiscretePath(corners, closed=True)
        terms = [(rng.normal(), tuple(rng.integers(0, 3, size=d + 1))) for _ in range(4)]
        L = polynomial_lagrangian(terms)
        a, b, w = rng.normal(size=3)

        def f(q, a=a, b=b, w=w):
            return a * np.sin(w * q[0]) + b * float(np.sum(q**2))

        form = lagrangian_one_form(L)
        worst = max(worst, abs(gauge_transform(form, f).integrate(path) - form.integrate(path)))
    pts = rng.uniform(-2, 2, size=(50, 1))
    C, hbar = 0.83, 0.7
    R = lambda q: 1.0 + q[0] ** 2
    S = lambda q: np.sin(q[0]) + 0.3 * q[0]
    psi = wkb_phase(R, S, pts, hbar)
    ratio = wkb_phase(R, S, pts, hbar, f=lambda q: C) / psi
    wkb_err = float(np.max(np.abs(ratio - np.exp(1j * C / hbar))))
    ok = worst <= 1e-12 and wkb_err <= 1e-12
    return CriterionResult(9, "gauge invariance", bool(ok), {"max_loop_shift": worst, "wkb_err": wkb_err}, limit=10.0)


CRITERIA: dict[int, Callable[..., CriterionResult]] = {
    1: criterion_1,
    2: criterion_2,
    3: criterion_3,
    4: criterion_4,
    5: criterion_5,
    6: criterion_6,
    7: criterion_7,
    8: criterion_8,
    9: criterion_9,
}


def run(number: int, seed: int = 0) -> CriterionResult:
    t0 = time.perf_counter()
    result = CRITERIA[number](seed=seed)
    result.runtime = time.perf_counter() - t0
    return result


def run_all(numbers=None, seed: int = 0) -> list:
    return [run(k, seed) for k in (numbers or sorted(CRITERIA))]
