"""The gerbe 2-cocycle built from trivialisations, and its loop picture.

``g_abc(q) = tau_ab(q) tau_bc(q) tau_ca(q)`` with every factor evaluated at
one common midpoint.  Written out through the propagators, ``g`` is the phase
of a six-propagator amplitude whose legs run

    a1 -> 123 -> a2,   a2' -> 123 -> a3,   a3' -> 123 -> a1'

at nine strictly increasing times.  In the steepest-descent picture each leg
is replaced by its classical trajectory and ``g = exp(i S_loop / hbar)``.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .cover import Cover, overlap
from .errors import DomainError, TimeOrderError
from .kernels import KernelParams, SpacetimePoint, action_1d, classical_action, classical_path
from .quadrature import DEFAULT_QUAD, QuadratureSpec
from .trivialisation import TrivParams, tau_closed, tau_numeric

TIME_NAMES = ("t_a1", "t_123", "t_a2", "t'_a2", "t'_123", "t_a3", "t'_a3", "t''_123", "t'_a1")


def check_time_order(times: Sequence[float]) -> None:
    """Raise :class:`TimeOrderError` naming the first violated inequality."""
    if len(times) != 9:
        raise DomainError(f"need nine times, got {len(times)}")
    for i in range(8):
        if not times[i] < times[i + 1]:
            raise TimeOrderError(
                f"time ordering violated: {TIME_NAMES[i]} = {times[i]} is not < "
                f"{TIME_NAMES[i + 1]} = {times[i + 1]}"
            )


def _pos(x, d: int) -> tuple:
    v = tuple(float(c) for c in np.atleast_1d(x))
    if len(v) != d:
        raise DomainError(f"position {v} does not have {d} components")
    return v


@dataclass(frozen=True)
class LoopSpec:
    """Anchor events and midpoint of a three-leg loop.

    ``anchors`` are ``(q_a1, q_a2, q_a3)``; ``anchors_out`` are the primed
    endpoints ``(q'_a1, q'_a2, q'_a3)`` and default to ``anchors``.
    """

    kernel: KernelParams
    anchors: tuple
    midpoint: tuple
    times: tuple
    anchors_out: tuple | None = None

    def __post_init__(self):
        d = self.kernel.d
        if len(self.anchors) != 3:
            raise DomainError("a loop has exactly three anchors")
        object.__setattr__(self, "anchors", tuple(_pos(a, d) for a in self.anchors))
        out = self.anchors if self.anchors_out is None else tuple(_pos(a, d) for a in self.anchors_out)
        if len(out) != 3:
            raise DomainError("a loop has exactly three primed anchors")
        object.__setattr__(self, "anchors_out", out)
        object.__setattr__(self, "midpoint", _pos(self.midpoint, d))
        times = tuple(float(t) for t in self.times)
        check_time_order(times)
        object.__setattr__(self, "times", times)

    def segments(self) -> list:
        """The six (start, end) events of the classical legs."""
        t = self.times
        a1, a2, a3 = self.anchors
        b1, b2, b3 = self.anchors_out
        M = self.midpoint
        P = SpacetimePoint
        return [
            (P(a1, t[0]), P(M, t[1])),
            (P(M, t[1]), P(a2, t[2])),
            (P(b2, t[3]), P(M, t[4])),
            (P(M, t[4]), P(a3, t[5])),
            (P(b3, t[6]), P(M, t[7])),
            (P(M, t[7]), P(b1, t[8])),
        ]

    def triv_params(self) -> tuple:
        t = self.times
        k = self.kernel
        return (TrivParams(k, t[0], t[1], t[2]), TrivParams(k, t[3], t[4], t[5]), TrivParams(k, t[6], t[7], t[8]))

    def relabeled(self) -> "LoopSpec":
        """Same loop started at the second anchor: (a1, a2, a3) -> (a2, a3, a1)."""
        t = self.times
        gap = t[3] - t[2]
        tail = t[8] + gap
        new_times = t[3:] + (tail, tail + (t[1] - t[0]), tail + (t[2] - t[0]))
        a, b = self.anchors, self.anchors_out
        return LoopSpec(
            self.kernel,
            (b[1], a[2], b[0]),
            self.midpoint,
            new_times,
            anchors_out=(a[1], b[2], a[0]),
        )

    def polyline(self, samples: int = 32, with_time: bool = False) -> np.ndarray:
        """Vertices of the loop on configuration space (classical legs, straight connectors)."""
        pieces = []
        for s, e in self.segments():
            ts = np.linspace(s.t, e.t, samples + 1)
            xs = classical_path(self.kernel, s, e, ts)
            # endpoints exactly, so the midpoint is hit bit-for-bit
            xs[0], xs[-1] = s.q, e.q
            pieces.append(np.column_stack([xs, ts]) if with_time else xs)
        out = [pieces[0]]
        for p in pieces[1:]:
            if np.array_equal(out[-1][-1, : self.kernel.d], p[0, : self.kernel.d]):
                p = p[1:]
            out.append(p)
        verts = np.vstack(out)
        if not np.array_equal(verts[-1, : self.kernel.d], verts[0, : self.kernel.d]):
            closing = verts[0].copy()
            if with_time:
                closing[-1] = verts[-1, -1]
            verts = np.vstack([verts, closing])
        return verts

    def to_dict(self) -> dict:
        return {
            "kernel": self.kernel.to_dict(),
            "anchors": [list(a) for a in self.anchors],
            "anchors_out": [list(a) for a in self.anchors_out],
            "midpoint": list(self.midpoint),
            "times": list(self.times),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "LoopSpec":
        return cls(
            KernelParams.from_dict(data["kernel"]),
            tuple(data["anchors"]),
            data["midpoint"],
            tuple(data["times"]),
            anchors_out=tuple(data["anchors_out"]) if data.get("anchors_out") is not None else None,
        )


# -- trivialisation evaluators -------------------------------------------------

class PairTrivialisation:
    """``tau_ab(q)`` for chart pairs, with ``tau_ba = 1 / tau_ab``.

    ``params`` maps ordered pairs ``(a, b)`` to :class:`TrivParams`.
    """

    def __init__(self, params: dict, method: str = "closed", quad: QuadratureSpec = DEFAULT_QUAD):
        if method not in ("closed", "numeric"):
            raise DomainError(f"method must be 'closed' or 'numeric', got {method!r}")
        self.params = dict(params)
        self.method = method
        self.quad = quad

    def _eval(self, tp: TrivParams, q) -> complex:
        if self.method == "closed":
            return tau_closed(tp, q).tau
        return tau_numeric(tp, q, self.quad).tau

    def __call__(self, a: int, b: int, q) -> complex:
        if (a, b) in self.params:
            return self._eval(self.params[(a, b)], q)
        if (b, a) in self.params:
            return 1.0 / self._eval(self.params[(b, a)], q)
        raise DomainError(f"no trivialisation data for the pair ({a}, {b})")


def two_cocycle(tau: Callable, q123, labels: Sequence[int] = (1, 2, 3), cover: Cover | None = None) -> complex:
    """``g_abc(q) = tau_ab(q) tau_bc(q) tau_ca(q)`` at one shared midpoint."""
    a, b, c = labels
    if cover is not None and not overlap(cover, (a, b, c)).contains(q123):
        raise DomainError(f"midpoint {np.atleast_1d(q123).tolist()} is outside U_{a} cap U_{b} cap U_{c}")
    g = tau(a, b, q123) * tau(b, c, q123) * tau(c, a, q123)
    return complex(g / abs(g))


def g_tilde_numeric(trivs: Sequence[TrivParams], q123, quad: QuadratureSpec = DEFAULT_QUAD) -> complex:
    """Six-propagator amplitude whose phase is the 2-cocycle.

    ``trivs`` are the (t_a1, t_123, t_a2), (t'_a2, t'_123, t_a3) and
    (t'_a3, t''_123, t'_a1) time triples, in that order.
    """
    if len(trivs) != 3:
        raise DomainError("need three time triples")
    kernels = {tp.kernel for tp in trivs}
    if len(kernels) != 1:
        raise DomainError("the three legs must share one kernel")
    times = [t for tp in trivs for t in (tp.t1, tp.t12, tp.t2)]
    check_time_order(times)
    out = 1.0 + 0.0j
    for tp in trivs:
        out *= tau_numeric(tp, q123, quad).tau_tilde
    return complex(out)


# -- steepest descent ----------------------------------------------------------

@dataclass(frozen=True)
class SteepestDescentResult:
    g: complex
    S_loop: float
    per_segment_actions: tuple
    hbar: float

    @property
    def phase(self) -> float:
        return float(np.angle(self.g))

    @property
    def action_over_hbar(self) -> float:
        return self.S_loop / self.hbar

    def as_dict(self) -> dict:
        return {
            "phase": self.phase,
            "S_loop": self.S_loop,
            "per_segment_actions": list(self.per_segment_actions),
            "re": self.g.real,
            "im": self.g.imag,
        }


def _stationary_endpoint(p: KernelParams, fixed, T: float, free_is_start: bool) -> tuple:
    """Endpoint making the leg action stationary (zero momentum at the free end)."""
    f = p.force
    out = []
    for j, qf in enumerate(fixed):
        def S(x):
            return action_1d(p, x, qf, T, f[j]) if free_is_start else action_1d(p, qf, x, T, f[j])

        s_m, s_0, s_p = S(-1.0), S(0.0), S(1.0)
        A = (s_p + s_m - 2 * s_0) / 2
        B = (s_p - s_m) / 2
        if A == 0:
            raise DomainError("leg action has no quadratic term in the free endpoint")
        out.append(-B / (2 * A))
    return tuple(out)


def extremal_loop(loop: LoopSpec) -> LoopSpec:
    """Loop whose six free endpoints sit at their stationary values.

    This is the steepest-descent counterpart of integrating the endpoints
    out; anchors become outputs instead of inputs.
    """
    p = loop.kernel
    t = loop.times
    M = loop.midpoint
    a1 = _stationary_endpoint(p, M, t[1] - t[0], True)
    a2 = _stationary_endpoint(p, M, t[2] - t[1], False)
    b2 = _stationary_endpoint(p, M, t[4] - t[3], True)
    a3 = _stationary_endpoint(p, M, t[5] - t[4], False)
    b3 = _stationary_endpoint(p, M, t[7] - t[6], True)
    b1 = _stationary_endpoint(p, M, t[8] - t[7], False)
    return LoopSpec(p, (a1, a2, a3), M, t, anchors_out=(b1, b2, b3))


def steepest_descent_cocycle(loop: LoopSpec, extremal: bool = False) -> SteepestDescentResult:
    """``g = exp(i S_loop / hbar)`` with ``S_loop`` summed over the six classical legs."""
    if extremal:
        loop = extremal_loop(loop)
    acts = tuple(classical_action(loop.kernel, s, e) for s, e in loop.segments())
    S = math.fsum(acts)
    g = complex(np.exp(1j * S / loop.kernel.hbar))
    return SteepestDescentResult(g, S, acts, loop.kernel.hbar)


# -- lobes -----------------------------------------------------------------------

def signed_area(vertices, axes: tuple = (0, 1)) -> float:
    """Shoelace area of a closed polyline projected on the plane ``axes``."""
    v = np.asarray(vertices, dtype=float)
    if v.ndim != 2 or v.shape[1] < 2:
        raise DomainError("signed area needs at least two columns; append time for d = 1")
    x, y = v[:, axes[0]], v[:, axes[1]]
    return 0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))


def _chain(vertices, close: bool = True) -> Counter:
    """Directed edges of a polyline as a formal chain (opposite edges cancel)."""
    v = [tuple(float(c) for c in row) for row in np.asarray(vertices)]
    if close and v[0] != v[-1]:
        v.append(v[0])
    chain = Counter()
    for a, b in zip(v[:-1], v[1:]):
        if a == b:
            continue
        if chain[(b, a)] > 0:
            chain[(b, a)] -= 1
            if chain[(b, a)] == 0:
                del chain[(b, a)]
        else:
            chain[(a, b)] += 1
    return chain


@dataclass
class LobeDecomposition:
    """The three closed sub-loops through the shared midpoint.

    ``lobes[0]`` encloses the first anchor (it contains the polyline's start),
    ``lobes[1]`` the second and ``lobes[2]`` the third.  Each lobe is a closed
    vertex chain beginning and ending at the midpoint.
    """

    lobes: tuple
    midpoint: np.ndarray
    loop: np.ndarray = field(repr=False)

    def boundary_chain(self) -> Counter:
        total = Counter()
        for lobe in self.lobes:
            for edge, n in _chain(lobe, close=False).items():
                rev = (edge[1], edge[0])
                if total[rev] > 0:
                    k = min(n, total[rev])
                    total[rev] -= k
                    n -= k
                    if total[rev] == 0:
                        del total[rev]
                if n:
                    total[edge] += n
        return total

    def loop_chain(self) -> Counter:
        return _chain(self.loop)

    def signed_areas(self, axes: tuple = (0, 1)) -> tuple:
        return tuple(signed_area(lobe, axes) for lobe in self.lobes)

    def degenerate(self, tol: float = 1e-12, axes: tuple = (0, 1)) -> tuple:
        """Lobes whose outgoing and returning legs enclose no area."""
        return tuple(abs(a) <= tol for a in self.signed_areas(axes))

    @property
    def all_degenerate(self) -> bool:
        return all(self.degenerate())


def decompose_loop(vertices, midpoint, tol: float = 1e-12) -> LobeDecomposition:
    """Cut a closed polyline at its three visits to ``midpoint``.

    Only the leading ``len(midpoint)`` columns are compared, so vertices with
    an appended time column (``LoopSpec.polyline(with_time=True)``) can be cut
    at the spatial midpoint.
    """
    v = np.asarray(vertices, dtype=float)
    if v.ndim == 1:
        v = v[:, None]
    M = np.atleast_1d(np.asarray(midpoint, dtype=float))
    closed = v
    if np.array_equal(v[0], v[-1]):
        v = v[:-1]
    if M.size > v.shape[1]:
        raise DomainError(f"midpoint has {M.size} components, vertices only {v.shape[1]}")
    # extra trailing columns (e.g. time) are carried along but not matched
    hits = [i for i in range(len(v)) if np.linalg.norm(v[i, : M.size] - M) <= tol]
    if len(hits) != 3:
        raise DomainError(f"loop must visit the midpoint exactly three times, found {len(hits)}")
    n = len(v)

    def arc(i, j):
        idx = [i]
        k = i
        while k != j:
            k = (k + 1) % n
            idx.append(k)
        return v[idx]

    h0, h1, h2 = hits
    lobes = (arc(h2, h0), arc(h0, h1), arc(h1, h2))
    if not np.array_equal(closed[0], closed[-1]):
        closed = np.vstack([closed, closed[:1]])
    return LobeDecomposition(lobes, M, closed)
