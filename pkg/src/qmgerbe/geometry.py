"""Action integrals, Stokes checks, gauge transformations and gerbe connections.

Everything lives in F x R with time as the last coordinate.  The 1-form
``L dt`` is integrated along polylines with the trapezoidal rule (midpoint
rule when ``L`` depends on velocity), and the 2-form ``dL ^ dt`` over
triangulated surfaces with the centroid rule.  Both are second order, so
Stokes residuals shrink like ``h^2``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .cech import U1Cochain
from .cover import Chart, Cover, overlap
from .errors import DomainError, IncompleteDataError
from .mesh import DiscretePath, DiscreteSurface, SimplicialComplex


class LagrangianField:
    """Lagrangian ``L(q, t)`` (or ``L(q, qdot, t)`` when ``uses_velocity``).

    Parameters
    ----------
    fn : callable
        Scalar Lagrangian; ``q`` is a length-d array.
    grad : callable, optional
        Analytic gradient ``grad(q, t) -> (d + 1,)`` ordered ``(dL/dq, dL/dt)``.
        Central differences with step ``1e-4 * scale`` are used otherwise.
    uses_velocity : bool
    scale : float
        Typical mesh length, sets the finite-difference step.
    """

    def __init__(self, fn: Callable, grad: Callable | None = None, uses_velocity: bool = False, scale: float = 1.0):
        self.fn = fn
        self.grad = grad
        self.uses_velocity = uses_velocity
        self.scale = float(scale)

    def value(self, x, v=None) -> float:
        x = np.asarray(x, dtype=float)
        if self.uses_velocity:
            if v is None:
                raise DomainError("this Lagrangian needs a velocity")
            return float(self.fn(x[:-1], np.asarray(v, dtype=float), x[-1]))
        return float(self.fn(x[:-1], x[-1]))

    def gradient(self, x) -> np.ndarray:
        if self.uses_velocity:
            raise DomainError("dL ^ dt is only defined for Lagrangians on F x R (no velocity)")
        x = np.asarray(x, dtype=float)
        if self.grad is not None:
            return np.asarray(self.grad(x[:-1], x[-1]), dtype=float)
        h = 1e-4 * self.scale
        out = np.empty(x.size)
        for j in range(x.size):
            e = np.zeros(x.size)
            e[j] = h
            out[j] = (self.value(x + e) - self.value(x - e)) / (2 * h)
        return out

    def scaled(self, lam: float) -> "LagrangianField":
        grad = None if self.grad is None else (lambda *a: lam * np.asarray(self.grad(*a)))
        return LagrangianField(lambda *a: lam * self.fn(*a), grad, self.uses_velocity, self.scale)


def free_lagrangian(m: float = 1.0) -> LagrangianField:
    return LagrangianField(lambda q, v, t: 0.5 * m * float(np.dot(v, v)), uses_velocity=True)


# -- discrete 1-forms -------------------------------------------------------------

class OneForm:
    """A value for every oriented edge ``a -> b`` of F x R.

    ``edge_fn(a, b)`` takes two ``(n, D)`` arrays of edge endpoints and
    returns ``n`` values; it must be odd under ``a <-> b``.
    """

    def __init__(self, edge_fn: Callable, label=None):
        self.edge_fn = edge_fn
        self.label = label

    def on_edges(self, a, b) -> np.ndarray:
        return np.asarray(self.edge_fn(np.atleast_2d(a), np.atleast_2d(b)), dtype=float)

    def integrate(self, path: DiscretePath) -> float:
        return float(np.sum(self.on_edges(*path.edges())))

    def holonomy(self, path: DiscretePath) -> complex:
        return complex(np.exp(1j * self.integrate(path)))

    def __add__(self, other: "OneForm") -> "OneForm":
        return OneForm(lambda a, b: self.on_edges(a, b) + other.on_edges(a, b), self.label)

    def __mul__(self, lam: float) -> "OneForm":
        return OneForm(lambda a, b: lam * self.on_edges(a, b), self.label)

    __rmul__ = __mul__


def lagrangian_one_form(L: LagrangianField, hbar: float = 1.0, label=None) -> OneForm:
    """``L dt / hbar`` per edge (trapezoid, or midpoint with velocity ``dq/dt``)."""

    def edge_fn(a, b):
        dt = b[:, -1] - a[:, -1]
        if L.uses_velocity:
            if np.any(dt == 0):
                raise DomainError("velocity-dependent Lagrangian on an edge with dt = 0")
            mid = (a + b) / 2
            vel = (b[:, :-1] - a[:, :-1]) / dt[:, None]
            vals = np.array([L.value(m, v) for m, v in zip(mid, vel)])
        else:
            vals = 0.5 * (np.array([L.value(x) for x in a]) + np.array([L.value(x) for x in b]))
        return vals * dt / hbar

    return OneForm(edge_fn, label)


def action_line_integral(L: LagrangianField, path: DiscretePath) -> float:
    return lagrangian_one_form(L).integrate(path)


def gauge_transform(form: OneForm, f: Callable) -> OneForm:
    """Add the exact differential of ``f(q)`` (a function on F, not on time)."""

    def fv(x):
        return np.array([float(f(p[:-1])) for p in x])

    return OneForm(lambda a, b: form.on_edges(a, b) + (fv(b) - fv(a)), form.label)


def connection_from_lagrangian(L: LagrangianField, pair: tuple, hbar: float = 1.0) -> OneForm:
    """``A = L dt / hbar`` per edge; the factor ``i`` enters only on exponentiation."""
    return lagrangian_one_form(L, hbar, label=tuple(pair))


# -- surfaces ------------------------------------------------------------------------

def surface_integral_dL_dt(L: LagrangianField, surf: DiscreteSurface) -> float:
    """Centroid rule for ``int_S dL ^ dt = sum_j int dL/dq_j dq_j ^ dt``."""
    if len(surf.triangles) == 0:
        return 0.0
    areas = surf.projected_areas()
    grads = np.array([L.gradient(c) for c in surf.centroids()])
    tcol = surf.dim - 1
    return float(np.sum(grads[:, :tcol] * areas[:, :tcol, tcol]))


def mesh_size(surf: DiscreteSurface) -> float:
    """Longest edge of the triangulation."""
    p = surf.vertices[surf.triangles]
    e = np.concatenate([p[:, 1] - p[:, 0], p[:, 2] - p[:, 1], p[:, 0] - p[:, 2]])
    return float(np.max(np.linalg.norm(e, axis=1)))


@dataclass(frozen=True)
class StokesReport:
    line: float
    surface: float
    residual: float
    tol: float
    closed: bool
    h: float

    @property
    def passed(self) -> bool:
        return self.residual < self.tol

    def as_dict(self) -> dict:
        return {
            "line": self.line,
            "surface": self.surface,
            "residual": self.residual,
            "tol": self.tol,
            "closed": self.closed,
            "h": self.h,
            "passed": self.passed,
        }


def stokes_check(L: LagrangianField, surf: DiscreteSurface, tol: float = 1e-9) -> StokesReport:
    """Compare ``oint_{dS} L dt`` with ``int_S dL ^ dt``.

    A closed surface has no boundary, so its line side is 0.
    """
    loops = surf.boundary()
    line = float(sum(action_line_integral(L, p) for p in loops))
    area = surface_integral_dL_dt(L, surf)
    return StokesReport(line, area, abs(line - area), tol, not loops, mesh_size(surf))


@dataclass(frozen=True)
class VevReport:
    values: tuple
    physical_index: int

    @property
    def hbar_phys(self) -> float:
        return self.values[self.physical_index]

    def as_dict(self) -> dict:
        return {"hbar_i": list(self.values), "physical_index": self.physical_index, "hbar_phys": self.hbar_phys}


def vev_report(L: LagrangianField, candidates: Sequence, physical_index: int = 0) -> VevReport:
    """Action value of each candidate path or surface; one of them is the physical one."""
    if not 0 <= physical_index < len(candidates):
        raise DomainError(f"physical index {physical_index} outside 0..{len(candidates) - 1}")
    vals = []
    for c in candidates:
        if isinstance(c, DiscretePath):
            vals.append(action_line_integral(L, c))
        elif isinstance(c, DiscreteSurface):
            vals.append(surface_integral_dL_dt(L, c))
        else:
            raise DomainError(f"candidate of type {type(c).__name__} is neither a path nor a surface")
    return VevReport(tuple(vals), physical_index)


def _field(fn, points) -> np.ndarray:
    if callable(fn):
        return np.array([fn(p) for p in points], dtype=float)
    return np.broadcast_to(np.asarray(fn, dtype=float), (len(points),))


def wkb_phase(R, S, points, hbar: float = 1.0, f=None) -> np.ndarray:
    """Samples of ``psi = R exp(i S / hbar)``, then multiplied by ``exp(i f / hbar)``.

    ``R``, ``S`` and ``f`` are callables on F or arrays of sample values.
    """
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    if pts.shape[0] == 1 and np.ndim(points) == 1:
        pts = pts.T
    psi = _field(R, pts) * np.exp(1j * _field(S, pts) / hbar)
    if f is not None:
        psi = psi * np.exp(1j * _field(f, pts) / hbar)
    return psi


# -- gerbe connections ----------------------------------------------------------------

@dataclass
class GerbeConnectionData:
    """Sampled connection ``(A, B, H)`` and cocycle ``g`` on one mesh.

    ``A[(a, b)]`` lives on edges, ``B[a]`` on triangles and ``H`` on
    tetrahedra, all in the canonical orientations of ``complex``.  ``g`` is
    sampled at mesh vertices inside triple overlaps.
    """

    cover: Cover
    complex: SimplicialComplex
    g: U1Cochain
    A: dict
    B: dict
    H: np.ndarray

    def A_pair(self, a: int, b: int) -> np.ndarray:
        if (a, b) in self.A:
            return np.asarray(self.A[(a, b)])
        if (b, a) in self.A:
            return -np.asarray(self.A[(b, a)])
        raise IncompleteDataError(f"no A form for the chart pair ({a}, {b})")

    def B_chart(self, a: int) -> np.ndarray:
        if a not in self.B:
            raise IncompleteDataError(f"no B form for chart {a}")
        return np.asarray(self.B[a])

    def perturbed_A(self, pair: tuple, edge: int, amount: float) -> "GerbeConnectionData":
        A = {k: np.array(v, dtype=float) for k, v in self.A.items()}
        A[tuple(pair)][edge] += amount
        return GerbeConnectionData(self.cover, self.complex, self.g, A, self.B, self.H)


@dataclass(frozen=True)
class ConnectionReport:
    residual_H: float
    residual_B: float
    residual_A: float
    checked: dict
    tol: float
    worst: dict = field(default_factory=dict)

    @property
    def max_residual(self) -> float:
        return max(self.residual_H, self.residual_B, self.residual_A)

    @property
    def passed(self) -> bool:
        return self.max_residual < self.tol

    @property
    def flat(self) -> bool:
        return self.residual_H < self.tol and self.checked.get("H_norm", 0.0) < self.tol

    def as_dict(self) -> dict:
        return {
            "residual_H_dB": self.residual_H,
            "residual_B_dA": self.residual_B,
            "residual_A_dlog_g": self.residual_A,
            "checked": dict(self.checked),
            "tol": self.tol,
            "passed": self.passed,
        }


def _max(x) -> float:
    return float(np.max(np.abs(x))) if np.size(x) else 0.0


def verify_connection(data: GerbeConnectionData, tol: float = 1e-6) -> ConnectionReport:
    """Check ``H = dB_a``, ``B_b - B_a = dA_ab`` and ``A_ab + A_bc + A_ca = g^-1 dg``.

    The last identity is compared edge by edge with the phase difference of
    the stored ``g`` samples at the two edge endpoints.  Residuals are
    absolute, per element, maximised over the mesh.
    """
    K = data.complex
    cover = data.cover
    H = np.asarray(data.H, dtype=float)
    if H.shape != (K.count(3),):
        raise IncompleteDataError(f"H must have one value per tetrahedron ({K.count(3)})")
    d1, d2 = K.coboundary(1), K.coboundary(2)
    checked = {"tets": 0, "faces": 0, "edges": 0, "H_norm": _max(H)}
    worst = {}

    rH = 0.0
    for a in cover.labels:
        mask = K.inside(3, cover.chart(a))
        if not mask.any():
            continue
        r = np.abs(H - d2 @ data.B_chart(a))[mask]
        checked["tets"] += int(mask.sum())
        if _max(r) > rH:
            rH, worst["H"] = _max(r), a

    rB = 0.0
    for a, b in itertools.combinations(cover.labels, 2):
        mask = K.inside(2, overlap(cover, (a, b)))
        if not mask.any():
            continue
        r = np.abs(data.B_chart(b) - data.B_chart(a) - d1 @ data.A_pair(a, b))[mask]
        checked["faces"] += int(mask.sum())
        if _max(r) > rB:
            rB, worst["B"] = _max(r), (a, b)

    rA = 0.0
    edges = np.array(K.simplices[1], dtype=int)
    for a, b, c in itertools.combinations(cover.labels, 3):
        mask = K.inside(1, overlap(cover, (a, b, c)))
        if not mask.any():
            continue
        total = data.A_pair(a, b) + data.A_pair(b, c) + data.A_pair(c, a)
        for e in np.flatnonzero(mask):
            i, j = edges[e]
            gi = data.g.value((a, b, c), K.vertices[i])
            gj = data.g.value((a, b, c), K.vertices[j])
            r = abs(total[e] - np.angle(gj * np.conj(gi)))
            if r > rA:
                rA, worst["A"] = r, (a, b, c, int(e))
        checked["edges"] += int(mask.sum())
    return ConnectionReport(rH, rB, rA, checked, tol, worst)


# -- a constructed exact instance ----------------------------------------------------------

def _b_field(x):
    return np.array([np.sin(x[0]), x[1] ** 2, x[0] * x[2]])


def _two_form_from_vector(b) -> np.ndarray:
    # b0 dx1^dx2 + b1 dx2^dx0 + b2 dx0^dx1
    F = np.zeros((3, 3))
    F[1, 2], F[2, 0], F[0, 1] = b
    return F - F.T


def _beta(x, s):
    return s * np.array([np.sin(x[1] + x[2]), np.cos(x[0]) * x[2], x[0] * x[1]])


def _dbeta(x, s):
    c12 = np.cos(x[1] + x[2])
    J = np.array(  # J[i, j] = d_i beta_j
        [
            [0.0, -np.sin(x[0]) * x[2], x[1]],
            [c12, 0.0, x[0]],
            [c12, np.cos(x[0]), 0.0],
        ]
    )
    return s * (J - J.T)


_CHI_DIR = np.array([1.0, 2.0, -1.0])


def _chi(x, c):
    return c * np.sin(float(_CHI_DIR @ x))


def _dchi(x, c):
    return c * np.cos(float(_CHI_DIR @ x)) * _CHI_DIR


def constructed_connection(
    complex: SimplicialComplex, cover: Cover, seed: int = 0, flat: bool = False
) -> GerbeConnectionData:
    """Connection data satisfying all three identities exactly in the continuum.

    ``B_a = B0 + d beta_a``, ``H = dB0``, ``A_ab = beta_b - beta_a + d chi_ab``
    and ``g_abc = exp(i (chi_ab + chi_bc + chi_ca))``, sampled with midpoint
    and centroid rules, so the discrete residuals are pure quadrature error.
    ``flat=True`` gives ``B_a = 0``, ``A = 0``, ``g = 1``.
    """
    if complex.vertices.shape[1] != 3 or cover.d != 3:
        raise DomainError("the constructed connection lives in three ambient dimensions")
    rng = np.random.default_rng(seed)
    labels = cover.labels
    amp = 0.0 if flat else 1.0
    s = {a: amp * rng.uniform(0.5, 1.5) for a in labels}
    c = {p: amp * rng.uniform(0.2, 0.6) for p in itertools.combinations(labels, 2)}

    def chi(a, b, x):
        return _chi(x, c[(a, b)]) if a < b else -_chi(x, c[(b, a)])

    H = complex.sample_3(lambda x: amp * (np.cos(x[0]) + 2 * x[1] + x[0]))
    B = {
        a: complex.sample_2(lambda x, a=a: amp * _two_form_from_vector(_b_field(x)) + _dbeta(x, s[a]))
        for a in labels
    }
    A = {
        (a, b): complex.sample_1(lambda x, a=a, b=b: _beta(x, s[b]) - _beta(x, s[a]) + _dchi(x, c[(a, b)]))
        for a, b in itertools.combinations(labels, 2)
    }
    g = U1Cochain(cover, 2)
    for a, b, cc in itertools.combinations(labels, 3):
        region = overlap(cover, (a, b, cc))
        for x in complex.vertices:
            if region.contains(x):
                g.set((a, b, cc), x, np.exp(1j * (chi(a, b, x) + chi(b, cc, x) + chi(cc, a, x))))
    return GerbeConnectionData(cover, complex, g, A, B, H)


def slab_cover(lo: float = 0.0, hi: float = 1.0, pad: float = 0.1) -> Cover:
    """Three charts of the unit box, slabs along the first axis with a common overlap."""
    w = hi - lo
    box_lo, box_hi = lo - pad, hi + pad
    cuts = [(box_lo, lo + 0.7 * w), (lo + 0.25 * w, box_hi), (lo + 0.2 * w, lo + 0.8 * w + 0.013)]
    charts = [
        Chart(k + 1, (a, box_lo, box_lo), (b, box_hi, box_hi)) for k, (a, b) in enumerate(cuts)
    ]
    return Cover(3, charts)


def polynomial_lagrangian(terms: Sequence, scale: float = 1.0) -> LagrangianField:
    """``L = sum_k c_k prod_j x_j^(e_kj)`` over ``x = (q_1, .., q_d, t)`` with an exact gradient.

    ``terms`` is a list of ``(c, exponents)`` pairs, e.g. ``[(1.0, (3, 0)), (1.0, (1, 2))]``
    for ``q^3 + q t^2``.
    """
    coef = np.array([float(c) for c, _ in terms])
    expo = np.array([list(e) for _, e in terms], dtype=int)
    if expo.ndim != 2 or np.any(expo < 0):
        raise DomainError("exponents must be non-negative integer tuples of equal length")

    def full(q, t):
        return np.append(np.atleast_1d(q), t)

    def fn(q, t):
        x = full(q, t)
        return float(np.sum(coef * np.prod(x**expo, axis=1)))

    def grad(q, t):
        x = full(q, t)
        out = np.zeros(x.size)
        for j in range(x.size):
            e = expo.copy()
            live = e[:, j] > 0
            e[live, j] -= 1
            out[j] = np.sum((coef * expo[:, j] * np.prod(x**e, axis=1))[live])
        return out

    return LagrangianField(fn, grad, scale=scale)
