"""Closed-form propagators for the free particle, the constant force and the
isotropic harmonic oscillator, plus numerical composition checks.

All d-dimensional kernels are products of one-dimensional ones; the
``[.]^(d/2)`` prefactors use the principal branch, ``sqrt(i) = exp(i pi/4)``.
The harmonic kernel is refused within ``CAUSTIC_TOL`` of ``sin(omega dt) = 0``
instead of guessing a Maslov index.
"""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import CausticError, DivergentIntegralError, DomainError, PoleError, QuadratureError, TimeOrderError
from .quadrature import DEFAULT_QUAD, QuadratureSpec, regularized_integral, richardson_zero, stationary_phase_fit

KINDS = ("free", "linear", "harmonic")
CAUSTIC_TOL = 1e-9


@dataclass(frozen=True)
class KernelParams:
    """Physical parameters of one of the three quadratic systems.

    ``F`` may be a scalar (the same force on every coordinate) or a
    length-``d`` sequence.  ``F`` is required for ``kind="linear"`` only and
    ``omega`` for ``kind="harmonic"`` only.
    """

    kind: str
    m: float = 1.0
    hbar: float = 1.0
    d: int = 1
    F: float | tuple | None = None
    omega: float | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise DomainError(f"kind must be one of {KINDS}, got {self.kind!r}")
        if not self.m > 0 or not self.hbar > 0:
            raise DomainError("m and hbar must be strictly positive")
        if int(self.d) != self.d or self.d < 1:
            raise DomainError("d must be a positive integer")
        if (self.F is not None) != (self.kind == "linear"):
            raise DomainError("F is required for, and only for, kind='linear'")
        if (self.omega is not None) != (self.kind == "harmonic"):
            raise DomainError("omega is required for, and only for, kind='harmonic'")
        if self.kind == "harmonic" and not self.omega > 0:
            raise DomainError("omega must be positive")
        if self.F is not None and not np.isscalar(self.F):
            F = tuple(float(x) for x in self.F)
            if len(F) != self.d:
                raise DomainError(f"force has {len(F)} components, d = {self.d}")
            object.__setattr__(self, "F", F)

    @property
    def force(self) -> np.ndarray:
        if self.F is None:
            return np.zeros(self.d)
        return np.broadcast_to(np.asarray(self.F, dtype=float), (self.d,)).copy()

    def replace(self, **changes) -> "KernelParams":
        return dataclasses.replace(self, **changes)

    def coordinate(self, j: int) -> "KernelParams":
        """The one-dimensional system seen by coordinate ``j``."""
        F = None if self.F is None else float(self.force[j])
        return dataclasses.replace(self, d=1, F=F)

    def to_dict(self) -> dict:
        out = {"kind": self.kind, "m": self.m, "hbar": self.hbar, "d": self.d}
        if self.F is not None:
            out["F"] = list(self.F) if isinstance(self.F, tuple) else self.F
        if self.omega is not None:
            out["omega"] = self.omega
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "KernelParams":
        F = data.get("F")
        if isinstance(F, list):
            F = tuple(F)
        return cls(
            kind=data["kind"],
            m=float(data.get("m", 1.0)),
            hbar=float(data.get("hbar", 1.0)),
            d=int(data.get("d", 1)),
            F=F,
            omega=data.get("omega"),
        )

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


@dataclass(frozen=True)
class SpacetimePoint:
    q: tuple
    t: float

    def __post_init__(self):
        object.__setattr__(self, "q", tuple(float(x) for x in np.atleast_1d(self.q)))
        object.__setattr__(self, "t", float(self.t))

    @property
    def qv(self) -> np.ndarray:
        return np.asarray(self.q)


def _check_points(p: KernelParams, p1: SpacetimePoint, p2: SpacetimePoint) -> float:
    if len(p1.q) != p.d or len(p2.q) != p.d:
        raise DomainError(f"positions must have {p.d} components")
    T = p2.t - p1.t
    if not T > 0:
        raise TimeOrderError(f"need t2 > t1, got t1={p1.t}, t2={p2.t}")
    return T


def _sin_checked(p: KernelParams, T) -> float:
    wt = p.omega * T
    s = np.sin(wt)
    if abs(s) < CAUSTIC_TOL:
        raise CausticError(f"harmonic kernel at a caustic: omega*dt = {wt!r}")
    return s


# -- one-dimensional building blocks (vectorised; q may be complex) ----------

def action_1d(p: KernelParams, q1, q2, T: float, f: float = 0.0):
    """Classical action of one coordinate between ``(q1, 0)`` and ``(q2, T)``."""
    m = p.m
    dq = q2 - q1
    if p.kind == "free":
        return m * dq**2 / (2 * T)
    if p.kind == "linear":
        return m * dq**2 / (2 * T) + 0.5 * f * T * (q1 + q2) - f**2 * T**3 / (24 * m)
    w = p.omega
    s = _sin_checked(p, T)
    # (q1^2 + q2^2) cos - 2 q1 q2 rewritten to stay accurate as omega -> 0
    return m * w / (2 * s) * (dq**2 - 2 * np.sin(w * T / 2) ** 2 * (q1**2 + q2**2))


def prefactor_1d(p: KernelParams, T: float) -> complex:
    if p.kind == "harmonic":
        s = _sin_checked(p, T)
        base = p.m * p.omega / (2j * np.pi * p.hbar * s)
    else:
        base = p.m / (2j * np.pi * p.hbar * T)
    return complex(np.sqrt(complex(base)))


def kernel_1d(p: KernelParams, q1, t1: float, q2, t2: float, f: float = 0.0):
    """One-dimensional propagator; broadcasts over array-valued positions."""
    T = t2 - t1
    return prefactor_1d(p, T) * np.exp(1j * action_1d(p, q1, q2, T, f) / p.hbar)


def classical_path_1d(p: KernelParams, q1, t1: float, q2, t2: float, t, f: float = 0.0):
    t = np.asarray(t, dtype=float)
    T = t2 - t1
    if p.kind == "free":
        return q1 + (q2 - q1) * (t - t1) / T
    if p.kind == "linear":
        return q1 + (q2 - q1) * (t - t1) / T + f / (2 * p.m) * (t - t1) * (t - t2)
    w = p.omega
    s = _sin_checked(p, T)
    return (q1 * np.sin(w * (t2 - t)) + q2 * np.sin(w * (t - t1))) / s


# -- public operations ----------------------------------------------------------

def propagator_prefactor(p: KernelParams, t1: float, t2: float) -> complex:
    """The ``[.]^(d/2)`` normalisation of the kernel (principal branch)."""
    if not t2 > t1:
        raise TimeOrderError(f"need t2 > t1, got t1={t1}, t2={t2}")
    return prefactor_1d(p, t2 - t1) ** p.d


def propagator(p: KernelParams, p1: SpacetimePoint, p2: SpacetimePoint) -> complex:
    """G(q1, t1; q2, t2) for the system described by ``p``."""
    T = _check_points(p, p1, p2)
    f = p.force
    out = 1.0 + 0.0j
    for j in range(p.d):
        out *= kernel_1d(p, p1.q[j], p1.t, p2.q[j], p2.t, f[j])
    return complex(out)


def classical_action(p: KernelParams, p1: SpacetimePoint, p2: SpacetimePoint) -> float:
    """Action of the classical trajectory from ``p1`` to ``p2``."""
    T = _check_points(p, p1, p2)
    f = p.force
    return float(sum(action_1d(p, p1.q[j], p2.q[j], T, f[j]) for j in range(p.d)))


def classical_path(p: KernelParams, p1: SpacetimePoint, p2: SpacetimePoint, t) -> np.ndarray:
    """Positions on the classical trajectory at the times ``t``; shape ``(len(t), d)``."""
    _check_points(p, p1, p2)
    f = p.force
    t = np.atleast_1d(np.asarray(t, dtype=float))
    cols = [classical_path_1d(p, p1.q[j], p1.t, p2.q[j], p2.t, t, f[j]) for j in range(p.d)]
    return np.stack(cols, axis=-1)


def fresnel_gaussian(a: float, b: float) -> complex:
    """``int exp(i (a x^2/2 + b x)) dx`` under the ``a -> a + i0`` prescription."""
    if a == 0:
        raise DivergentIntegralError("fresnel_gaussian: a = 0, the integral diverges")
    return complex(
        np.sqrt(2 * np.pi / abs(a)) * np.exp(1j * np.sign(a) * np.pi / 4) * np.exp(-1j * b**2 / (2 * a))
    )


def duality_phase(s_over_hbar: float) -> float:
    """Exchange ``S/hbar -> hbar/S``."""
    if s_over_hbar == 0:
        raise PoleError("duality_phase has a pole at S/hbar = 0")
    return 1.0 / s_over_hbar


def _length_scale(p: KernelParams, T: float) -> float:
    return float(np.sqrt(p.hbar * T / p.m))


def compose_semigroup(
    p: KernelParams,
    p1: SpacetimePoint,
    tmid: float,
    p2: SpacetimePoint,
    quad: QuadratureSpec = DEFAULT_QUAD,
) -> complex:
    """Numerically integrate ``G(p1 -> (x, tmid)) G((x, tmid) -> p2)`` over ``x``.

    Should reproduce ``propagator(p, p1, p2)``.
    """
    _check_points(p, p1, p2)
    if not p1.t < tmid < p2.t:
        raise TimeOrderError(f"need t1 < tmid < t2, got {p1.t}, {tmid}, {p2.t}")
    f = p.force
    scale = _length_scale(p, min(tmid - p1.t, p2.t - tmid))
    out = 1.0 + 0.0j
    for j in range(p.d):
        a, b, fj = p1.q[j], p2.q[j], f[j]

        def integrand(x, a=a, b=b, fj=fj):
            return kernel_1d(p, a, p1.t, x, tmid, fj) * kernel_1d(p, x, tmid, b, p2.t, fj)

        x0 = float(classical_path_1d(p, a, p1.t, b, p2.t, tmid, fj))
        out *= regularized_integral(integrand, x0, scale, quad)
    return complex(out)


def _nested_1d(p, a, b, t1, t2, N, f, quad: QuadratureSpec) -> complex:
    times = t1 + (t2 - t1) * np.arange(N + 1) / N
    dt = times[1] - times[0]
    scale = _length_scale(p, dt)
    grids = []
    for k in range(1, N):
        tk = times[k]

        def marginal(x, tk=tk):
            return kernel_1d(p, a, t1, x, tk, f) * kernel_1d(p, x, tk, b, t2, f)

        x0 = float(classical_path_1d(p, a, t1, b, t2, tk, f))
        x_star, curv = stationary_phase_fit(marginal, x0, scale)
        grids.append((x_star, curv, 1.0 / np.sqrt(abs(curv))))

    def run(points, weights):
        v = kernel_1d(p, a, t1, points[0], times[1], f) * weights[0]
        peak = np.max(np.abs(v))
        for k in range(1, N - 1):
            nxt = np.zeros(points[k].size, dtype=complex)
            for lo in range(0, points[k].size, 512):
                blk = points[k][lo : lo + 512]
                K = kernel_1d(p, points[k - 1][:, None], times[k], blk[None, :], times[k + 1], f)
                nxt[lo : lo + 512] = v @ K
            v = nxt * weights[k]
            peak = max(peak, np.max(np.abs(v)))
        terms = v * kernel_1d(p, points[-1], times[N - 1], b, t2, f)
        total = np.sum(terms)
        if not np.isfinite(total) or abs(total) * quad.max_dynamic_range < max(peak, np.max(np.abs(terms))):
            raise QuadratureError("time-sliced integral is dominated by cancellation")
        return total

    if quad.method == "rotated":
        Y = np.sqrt(2.0 * quad.budget) + 2.0
        y = np.linspace(-Y, Y, quad.rotated_nodes)
        h = y[1] - y[0]
        pts, wts = [], []
        for x_star, curv, ell in grids:
            if curv < 0:
                raise QuadratureError("time-sliced contour rotation needs a positive quadratic form")
            rot = np.exp(1j * np.pi / 4)
            pts.append(x_star + rot * ell * y)
            wts.append(np.full(y.size, rot * ell * h))
        return complex(run(pts, wts))

    eps_min = min(quad.eps)
    values = []
    for e in quad.eps:
        pts, wts = [], []
        for x_star, curv, ell in grids:
            R = quad.half_width if quad.half_width is not None else np.sqrt(2 * quad.budget / eps_min) * ell
            x = np.linspace(x_star - R, x_star + R, quad.nodes)
            h = x[1] - x[0]
            w = np.full(x.size, h)
            w[0] = w[-1] = h / 2
            pts.append(x)
            wts.append(w * np.exp(-e * ((x - x_star) / ell) ** 2 / 2))
        values.append(run(pts, wts))
    return complex(richardson_zero(quad.eps, values))


def timeslice_propagator(
    p: KernelParams,
    p1: SpacetimePoint,
    p2: SpacetimePoint,
    N: int,
    quad: QuadratureSpec | None = None,
) -> complex:
    """Propagator rebuilt from ``N`` equal time slices of the exact short-time kernel.

    The ``N - 1`` intermediate positions are integrated on regularised grids.
    Defaults to the rotated-contour rule, which keeps the nested sums small.
    """
    _check_points(p, p1, p2)
    if int(N) != N or N < 2:
        raise DomainError("need N >= 2 slices")
    if quad is None:
        quad = QuadratureSpec(method="rotated")
    f = p.force
    out = 1.0 + 0.0j
    for j in range(p.d):
        out *= _nested_1d(p, p1.q[j], p2.q[j], p1.t, p2.t, int(N), f[j], quad)
    return complex(out)


def phase_report(z: complex) -> dict:
    return {"re": z.real, "im": z.imag, "modulus": abs(z), "phase": float(np.angle(z))}
