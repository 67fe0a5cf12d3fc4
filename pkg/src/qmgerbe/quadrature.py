"""Regularised quadrature for Gaussian phase integrals.

Integrals of the form ``int exp(i (a x^2 / 2 + b x + c)) dx`` over the real
line converge only conditionally.  They are defined here by the usual
``a -> a + i eps`` prescription: the integrand is damped by
``exp(-eps |a| (x - x*)^2 / 2)`` around its stationary point ``x*``,
integrated with the trapezoidal rule, and the result is extrapolated to
``eps -> 0`` from several damping strengths (Richardson / Lagrange
extrapolation; the damped integral is analytic in ``eps``).

The stationary point and the curvature ``a`` are read off numerically from
the phase of the integrand, so callers only supply a vectorised integrand
plus a rough centre and length scale.

A second method rotates the contour by ``pi/4`` through the stationary
point, which turns the integrand into a decaying Gaussian.  It needs an
integrand that is entire in ``x`` (true for all quadratic-action kernels)
and is used for nested integrals where the damped rule gets expensive.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

import numpy as np
from scipy.special import roots_legendre

from .errors import QuadratureError

# relative size of the quadratic phase below which the integrand is treated as flat
_FLAT_CURVATURE = 1e-10


@dataclass(frozen=True)
class QuadratureSpec:
    """Settings for :func:`regularized_integral`.

    Parameters
    ----------
    nodes : int
        Trapezoid nodes for the damped method.
    eps : tuple of float
        Relative damping strengths used for extrapolation to zero.
    half_width : float or None
        Integration half-width in the integrand's own length units.  ``None``
        picks the width at which the weakest damping has decayed by
        ``exp(-budget)``.
    budget : float
        Number of e-folds both the truncation and the aliasing error must
        be suppressed by.
    method : {"damped", "rotated"}
    rotated_nodes : int
        Nodes per integration variable for the rotated-contour method.
    max_dynamic_range : float
        Largest tolerated ratio between the biggest summand and the result
        (rotated method); beyond it cancellation destroys the answer.
    """

    nodes: int = 8192
    eps: tuple = (1e-2, 5e-3, 2.5e-3)
    half_width: float | None = None
    budget: float = 22.0
    method: str = "damped"
    rotated_nodes: int = 241
    max_dynamic_range: float = 1e8

    def __post_init__(self):
        if self.method not in ("damped", "rotated"):
            raise QuadratureError(f"unknown quadrature method {self.method!r}")
        if self.nodes < 3 or self.rotated_nodes < 3:
            raise QuadratureError("need at least 3 quadrature nodes")
        if len(self.eps) < 1 or min(self.eps) <= 0:
            raise QuadratureError("damping strengths must be positive")
        if len(set(self.eps)) != len(self.eps):
            raise QuadratureError("damping strengths must be distinct")
        if self.half_width is not None and not self.half_width > 0:
            raise QuadratureError(f"degenerate quadrature domain (half-width {self.half_width})")


DEFAULT_QUAD = QuadratureSpec()


def richardson_zero(eps, values) -> complex:
    """Value at ``eps = 0`` of the polynomial through ``(eps_k, values_k)``."""
    eps = np.asarray(eps, dtype=float)
    values = np.asarray(values)
    out = 0.0 + 0.0j
    for k in range(eps.size):
        w = 1.0
        for j in range(eps.size):
            if j != k:
                w *= eps[j] / (eps[j] - eps[k])
        out += w * values[k]
    return out


def stationary_phase_fit(f: Callable, x0: float, scale: float, iterations: int = 2):
    """Locate the stationary point and curvature of ``arg f`` near ``x0``.

    Returns ``(x_star, curvature)`` with ``curvature = d^2 arg f / dx^2``.
    Exact (up to rounding) for a quadratic phase.
    """
    x = float(x0)
    h = 1e-4 * scale
    curv = 0.0
    for _ in range(iterations):
        vals = f(np.array([x - h, x, x + h]))
        if np.any(vals == 0) or not np.all(np.isfinite(vals)):
            raise QuadratureError(f"integrand vanishes or is not finite near x = {x}")
        lm = np.angle(vals[0] / vals[1])
        lp = np.angle(vals[2] / vals[1])
        curv = (lp + lm) / h**2
        slope = (lp - lm) / (2 * h)
        if abs(curv) * scale**2 < _FLAT_CURVATURE:
            raise QuadratureError(
                "integrand phase has no quadratic term; the oscillatory integral does not converge"
            )
        x = x - slope / curv
    return x, curv


def _damped(f, x_star, ell, quad: QuadratureSpec) -> complex:
    eps_min = min(quad.eps)
    if quad.half_width is None:
        R = np.sqrt(2.0 * quad.budget / eps_min) * ell
    else:
        R = quad.half_width
    x = np.linspace(x_star - R, x_star + R, quad.nodes)
    h = x[1] - x[0]
    # truncation: weakest damping at the domain edge
    if eps_min * (R / ell) ** 2 / 2.0 < quad.budget:
        raise QuadratureError(
            f"domain half-width {R:.4g} too small for damping {eps_min:g}; "
            f"need at least {np.sqrt(2 * quad.budget / eps_min) * ell:.4g}"
        )
    # aliasing: spectrum of the damped chirp ~ exp(-eps (k ell)^2 / 2)
    k_nyq = 2.0 * np.pi / h
    if eps_min * (k_nyq * ell) ** 2 / 2.0 < quad.budget:
        raise QuadratureError(
            f"oscillation estimate exceeds budget: {quad.nodes} nodes on half-width "
            f"{R:.4g} cannot resolve the integrand"
        )
    fx = f(x)
    w = np.full(x.size, h)
    w[0] = w[-1] = h / 2
    u2 = ((x - x_star) / ell) ** 2
    vals = [np.sum(fx * w * np.exp(-e * u2 / 2.0)) for e in quad.eps]
    return richardson_zero(quad.eps, vals)


def _rotated(f, x_star, curv, ell, quad: QuadratureSpec) -> complex:
    rot = np.exp(1j * np.sign(curv) * np.pi / 4)
    Y = np.sqrt(2.0 * quad.budget) + 2.0
    y = np.linspace(-Y, Y, quad.rotated_nodes)
    h = y[1] - y[0]
    terms = f(x_star + rot * ell * y)
    total = rot * ell * h * np.sum(terms)
    if abs(total) * quad.max_dynamic_range < ell * h * np.max(np.abs(terms)):
        raise QuadratureError("rotated-contour sum is dominated by cancellation")
    return total


def regularized_integral(f: Callable, x0: float, scale: float, quad: QuadratureSpec = DEFAULT_QUAD) -> complex:
    """Integral of ``f`` over the real line under the ``i eps`` prescription.

    Parameters
    ----------
    f : callable
        Vectorised integrand ``f(x) -> complex array``; must be of Gaussian
        phase type (constant modulus, quadratic phase) on the real axis.
    x0, scale : float
        Rough location of the stationary point and the natural length scale.
    quad : QuadratureSpec
    """
    x_star, curv = stationary_phase_fit(f, x0, scale)
    ell = 1.0 / np.sqrt(abs(curv))
    if quad.method == "rotated":
        return _rotated(f, x_star, curv, ell, quad)
    return _damped(f, x_star, ell, quad)


@lru_cache(maxsize=8)
def _legendre(nodes: int):
    return roots_legendre(nodes)


def finite_interval_integral(f: Callable, lo: float, hi: float, nodes: int = 4096) -> complex:
    """Gauss-Legendre integral of ``f`` over ``[lo, hi]`` (no regularisation)."""
    if not hi > lo:
        raise QuadratureError(f"degenerate quadrature domain [{lo}, {hi}]")
    x, w = _legendre(nodes)
    mid, half = (hi + lo) / 2, (hi - lo) / 2
    return half * np.sum(w * f(mid + half * x))
