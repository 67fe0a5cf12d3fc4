"""Gerbe trivialisations on double overlaps.

For a midpoint ``q12`` in ``U_1 cap U_2`` and times ``t1 < t12 < t2`` the
unnormalised trivialisation is

    tt(q12) = [int dq1 G(q1, t1; q12, t12)] * [int dq2 G(q12, t12; q2, t2)]

and ``tau = tt / |tt|``.  The two integrals factorise (and factorise again
over coordinates), so only one-dimensional regularised integrals are needed.
Closed forms exist for the three quadratic systems; the oscillator's closed
form drops constant (q12-independent) phases, so numerical and closed values
are compared through ratios ``tau(q) / tau(q_ref)``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .cover import Chart
from .errors import DomainError, TangentPoleError, TimeOrderError, VanishingModulusError
from .kernels import CAUSTIC_TOL, KernelParams, _sin_checked, kernel_1d
from .quadrature import DEFAULT_QUAD, QuadratureSpec, finite_interval_integral, regularized_integral

VANISHING_TOL = 1e-12


@dataclass(frozen=True)
class TrivParams:
    kernel: KernelParams
    t1: float
    t12: float
    t2: float

    def __post_init__(self):
        if not self.t1 < self.t12 < self.t2:
            raise TimeOrderError(f"need t1 < t12 < t2, got ({self.t1}, {self.t12}, {self.t2})")
        if self.kernel.kind == "harmonic":
            _sin_checked(self.kernel, self.t12 - self.t1)
            _sin_checked(self.kernel, self.t2 - self.t12)

    def gap(self, leg: str) -> float:
        if leg == "first":
            return self.t12 - self.t1
        if leg == "second":
            return self.t2 - self.t12
        raise DomainError(f"leg must be 'first' or 'second', got {leg!r}")


@dataclass(frozen=True)
class TrivResult:
    tau: complex
    tau_tilde_modulus: float
    method: str
    tau_tilde: complex | None = None

    def __post_init__(self):
        if abs(abs(self.tau) - 1.0) > 1e-12:
            raise DomainError("trivialisation must have unit modulus")

    @property
    def phase(self) -> float:
        return float(np.angle(self.tau))


def _q(tp: TrivParams, q12) -> np.ndarray:
    q = np.atleast_1d(np.asarray(q12, dtype=float))
    if q.size != tp.kernel.d:
        raise DomainError(f"midpoint must have {tp.kernel.d} components")
    if not np.all(np.isfinite(q)):
        raise DomainError("midpoint must be finite")
    return q


def _tan_checked(p: KernelParams, dt: float) -> float:
    c = np.cos(p.omega * dt)
    if abs(c) < CAUSTIC_TOL:
        raise TangentPoleError(f"tan(omega*dt) has a pole at omega*dt = {p.omega * dt!r}")
    return float(np.tan(p.omega * dt))


def _linear_leg_phase(p: KernelParams, q: np.ndarray, dt: float) -> float:
    f = p.force
    return float(np.sum(-(f**2) * dt**3 / (6 * p.m) + f * q * dt) / p.hbar)


def eval_J_linear(tp: TrivParams, q12, leg: str) -> complex:
    """Closed value of the constant-force leg integral ``J``.

    ``[2 pi i hbar dt / m]^(d/2) exp{(i/hbar)[-F^2 dt^3/(6m) + F q12 dt]}``
    """
    p = tp.kernel
    if p.kind != "linear":
        raise DomainError("J integrals belong to the constant-force system")
    q = _q(tp, q12)
    dt = tp.gap(leg)
    pref = complex(np.sqrt(2j * np.pi * p.hbar * dt / p.m)) ** p.d
    return pref * np.exp(1j * _linear_leg_phase(p, q, dt))


def eval_K_harmonic(tp: TrivParams, q12, leg: str) -> complex:
    """Closed value of the oscillator leg integral ``K``.

    ``[2 pi i hbar tan(w dt) / (m w)]^(d/2) exp{-(i m w / 2 hbar) tan(w dt) |q12|^2}``
    """
    p = tp.kernel
    if p.kind != "harmonic":
        raise DomainError("K integrals belong to the harmonic oscillator")
    q = _q(tp, q12)
    dt = tp.gap(leg)
    tn = _tan_checked(p, dt)
    pref = complex(np.sqrt(2j * np.pi * p.hbar * tn / (p.m * p.omega))) ** p.d
    return pref * np.exp(-0.5j * p.m * p.omega * tn * float(q @ q) / p.hbar)


def tau_closed(tp: TrivParams, q12) -> TrivResult:
    p = tp.kernel
    q = _q(tp, q12)
    dt1, dt2 = tp.gap("first"), tp.gap("second")
    if p.kind == "free":
        return TrivResult(1.0 + 0.0j, 1.0, "closed", 1.0 + 0.0j)
    if p.kind == "linear":
        phase = _linear_leg_phase(p, q, dt1) + _linear_leg_phase(p, q, dt2)
        tau = complex(np.exp(1j * phase))
        # the Fresnel normalisations cancel the kernel prefactors exactly
        return TrivResult(tau, 1.0, "closed", tau)
    tn1, tn2 = _tan_checked(p, dt1), _tan_checked(p, dt2)
    phase = -0.5 * p.m * p.omega * (tn1 + tn2) * float(q @ q) / p.hbar
    tau = complex(np.exp(1j * phase))
    modulus = abs(np.cos(p.omega * dt1) * np.cos(p.omega * dt2)) ** (-p.d / 2)
    return TrivResult(tau, float(modulus), "closed", None)


def _leg_integrals(tp: TrivParams, q: np.ndarray, quad: QuadratureSpec, charts):
    p = tp.kernel
    f = p.force
    legs = []
    for j in range(p.d):
        qj, fj = q[j], f[j]

        def first(x, qj=qj, fj=fj):
            return kernel_1d(p, x, tp.t1, qj, tp.t12, fj)

        def second(x, qj=qj, fj=fj):
            return kernel_1d(p, qj, tp.t12, x, tp.t2, fj)

        if charts is None:
            s1 = np.sqrt(p.hbar * tp.gap("first") / p.m)
            s2 = np.sqrt(p.hbar * tp.gap("second") / p.m)
            legs.append(regularized_integral(first, qj, s1, quad))
            legs.append(regularized_integral(second, qj, s2, quad))
        else:
            c1, c2 = charts
            legs.append(finite_interval_integral(first, c1.lo[j], c1.hi[j]))
            legs.append(finite_interval_integral(second, c2.lo[j], c2.hi[j]))
    return legs


def tau_numeric(
    tp: TrivParams,
    q12,
    quad: QuadratureSpec = DEFAULT_QUAD,
    charts: tuple[Chart, Chart] | None = None,
) -> TrivResult:
    """Trivialisation from regularised quadrature of the propagator integrals.

    With ``charts=(U1, U2)`` the endpoint integrals run over the two chart
    boxes instead of all of R^d.  That variant has no closed-form target and
    is tagged ``"numeric-chart"``.
    """
    q = _q(tp, q12)
    legs = _leg_integrals(tp, q, quad, charts)
    tt = complex(np.prod(legs))
    mod = abs(tt)
    if not mod > VANISHING_TOL:
        raise VanishingModulusError(f"|tau_tilde| = {mod!r} at q12 = {q.tolist()}")
    method = "numeric" if charts is None else "numeric-chart"
    return TrivResult(tt / mod, mod, method, tt)


def phase_ratio(a: TrivResult, b: TrivResult) -> float:
    """Phase of ``a.tau / b.tau`` in (-pi, pi]."""
    return float(np.angle(a.tau / b.tau))
