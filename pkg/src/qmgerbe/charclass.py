"""Integrality checks for the characteristic class of the gerbe.

Phase conventions: ``H`` is stored as the real coefficient of the
``i``-valued 3-form, so quantisation over a closed volume reads
``int_V H in 2 pi Z`` and the surface condition reads
``(1/hbar) int_S dL ^ dt in pi Z``.
"""

from __future__ import annotations

from dataclasses import dataclass
from collections import Counter

import numpy as np

from .errors import BoundaryMismatchError, DomainError, WrongOperationError
from .geometry import LagrangianField, surface_integral_dL_dt
from .mesh import DiscreteVolume, boundary_chain

TOL_CONSTRUCTED = 1e-6
TOL_QUADRATURE = 1e-3


@dataclass(frozen=True)
class QuantizationReport:
    value: float
    normalization: float
    n: int
    deviation: float
    tol: float

    @property
    def ratio(self) -> float:
        return self.value / self.normalization

    @property
    def passed(self) -> bool:
        return self.deviation < self.tol

    @property
    def parity(self) -> str:
        return "even" if self.n % 2 == 0 else "odd"

    def as_dict(self) -> dict:
        return {
            "value": self.value,
            "normalization": self.normalization,
            "ratio": self.ratio,
            "n": self.n,
            "deviation": self.deviation,
            "parity": self.parity,
            "tol": self.tol,
            "passed": self.passed,
        }


def quantize(value: float, normalization: float, tol: float) -> QuantizationReport:
    x = value / normalization
    n = int(np.round(x))
    return QuantizationReport(float(value), float(normalization), n, float(abs(x - n)), tol)


def integrate_H(H, vol: DiscreteVolume) -> float:
    """Sum of a discrete 3-form over the tetrahedra of ``vol``.

    ``H`` is either one value per tetrahedron (in the volume's own
    orientation) or, in three ambient dimensions, a density ``h(x)`` that is
    integrated by the centroid rule.
    """
    if callable(H):
        vals = np.array([float(H(c)) for c in vol.centroids()]) * vol.signed_volumes()
    else:
        vals = np.asarray(H, dtype=float)
        if vals.shape != (len(vol.tets),):
            raise DomainError(f"H needs one value per tetrahedron ({len(vol.tets)}), got shape {vals.shape}")
    return float(np.sum(vals))


def integrate_H_closed_volume(H, vol: DiscreteVolume, tol: float = TOL_CONSTRUCTED) -> QuantizationReport:
    """``(1 / 2 pi) int_V H`` and its distance to the nearest integer."""
    if not vol.is_closed:
        raise WrongOperationError("volume has a boundary; use gauss_law_check for volumes with boundary")
    return quantize(integrate_H(H, vol), 2 * np.pi, tol)


@dataclass(frozen=True)
class GaussLawReport:
    volume_integral: float
    surface_flux: float
    residual: float
    tol: float

    @property
    def passed(self) -> bool:
        return self.residual < self.tol

    def as_dict(self) -> dict:
        return {
            "volume_integral": self.volume_integral,
            "surface_flux_over_hbar": self.surface_flux,
            "residual": self.residual,
            "tol": self.tol,
            "passed": self.passed,
        }


def gauss_law_check(
    L: LagrangianField, H, vol: DiscreteVolume, hbar: float = 1.0, tol: float = TOL_QUADRATURE
) -> GaussLawReport:
    """Compare ``int_V H`` with ``(1/hbar) int_{dV} dL ^ dt``."""
    S = vol.boundary()
    if len(S.triangles) == 0:
        raise WrongOperationError("volume is closed; use integrate_H_closed_volume")
    vint = integrate_H(H, vol)
    flux = surface_integral_dL_dt(L, S) / hbar
    return GaussLawReport(vint, flux, abs(vint - flux), tol)


@dataclass(frozen=True)
class GluingReport:
    surface: QuantizationReport
    volume: QuantizationReport

    @property
    def equivalent(self) -> bool:
        return abs(self.surface.ratio - self.volume.ratio) < max(self.surface.tol, self.volume.tol)

    @property
    def passed(self) -> bool:
        return self.surface.passed and self.volume.passed and self.surface.n == self.volume.n

    def as_dict(self) -> dict:
        return {
            "surface": self.surface.as_dict(),
            "volume": self.volume.as_dict(),
            "equivalent": self.equivalent,
            "passed": self.passed,
        }


def gluing_check(
    L: LagrangianField,
    H: tuple,
    vol1: DiscreteVolume,
    vol2: DiscreteVolume,
    hbar: float = 1.0,
    tol: float = TOL_QUADRATURE,
) -> GluingReport:
    """Surface condition on ``S = dV1 = -dV2`` against the volume condition on ``V1 + V2``.

    ``H = (H1, H2)`` gives the 3-form data on each half.  The surface side is
    ``(1 / pi hbar) int_S dL ^ dt`` and the volume side
    ``(1 / 2 pi) (int_V1 H1 + int_V2 H2)``; both should be the same integer.
    """
    if not np.array_equal(vol1.vertices, vol2.vertices):
        raise BoundaryMismatchError("the two volumes must share one vertex array")
    b1 = Counter(boundary_chain(vol1.tets.tolist()))
    b2 = Counter(boundary_chain(vol2.tets.tolist()))
    keys = set(b1) | set(b2)
    if not b1 or any(b1[k] + b2[k] != 0 for k in keys):
        raise BoundaryMismatchError("boundary of the second volume is not the reversed boundary of the first")
    H1, H2 = H
    flux = surface_integral_dL_dt(L, vol1.boundary()) / hbar
    surface = quantize(flux, np.pi, tol)
    volume = quantize(integrate_H(H1, vol1) + integrate_H(H2, vol2), 2 * np.pi, tol)
    return GluingReport(surface, volume)


def cocycle_integer_form(g: complex, tol: float = TOL_CONSTRUCTED, winding: int = 0) -> QuantizationReport:
    """Write ``g = exp(i pi n)``; ``n`` from the principal phase plus ``2 pi winding``."""
    if abs(abs(g) - 1.0) > 1e-9:
        raise DomainError(f"|g| = {abs(g)!r} is not 1")
    phase = float(np.angle(g)) + 2 * np.pi * winding
    return quantize(phase, np.pi, tol)


def winding_of(total_phase: float) -> int:
    """Number of ``2 pi`` turns separating ``total_phase`` from its principal value."""
    return int(np.round((total_phase - np.angle(np.exp(1j * total_phase))) / (2 * np.pi)))


def uniform_H(vol: DiscreteVolume, total: float) -> np.ndarray:
    """Per-tetrahedron 3-form spreading ``total`` evenly over the cells."""
    return np.full(len(vol.tets), total / len(vol.tets))


def vortex_lagrangian(c: float) -> LagrangianField:
    """``L = c * atan2(q2, q1)``: multivalued around ``q1 = q2 = 0``, so closed-surface fluxes need not vanish.

    Around the axis ``dL ^ dt`` integrates to ``2 pi c`` per unit time.
    """

    def fn(q, t):
        return c * np.arctan2(q[1], q[0])

    def grad(q, t):
        r2 = q[0] ** 2 + q[1] ** 2
        return np.array([-c * q[1] / r2, c * q[0] / r2, 0.0])

    return LagrangianField(fn, grad)
