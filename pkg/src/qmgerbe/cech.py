"""U(1)-valued Cech cochains sampled at points of chart overlaps.

A degree-k cochain assigns a unit complex number to each ordered
(k+1)-tuple of chart labels at each sample point lying in the tuple's
overlap.  Values are stored under the tuple order they were given in;
reading a permuted tuple falls back to the stored ordering and applies
the alternating convention (odd permutations invert the value).

The coboundary is multiplicative::

    (dc)_{i0..i(k+1)}(x) = prod_j c_{i0..^ij..i(k+1)}(x) ** (-1)**j

which for k = 1 reads ``(dt)_{abc} = t_ab t_bc t_ca``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from itertools import combinations
from typing import Callable, Iterable

import numpy as np

from .cover import Cover, overlap
from .errors import DomainError, IncompleteDataError

UNIT_TOL = 1e-12


def _point_key(x) -> tuple:
    return tuple(float(v) for v in np.atleast_1d(np.asarray(x, dtype=float)))


def permutation_parity(seq) -> int:
    """+1 for an even rearrangement of ``sorted(seq)``, -1 for an odd one."""
    seq = list(seq)
    if len(set(seq)) != len(seq):
        raise DomainError(f"repeated chart label in {tuple(seq)}")
    sign = 1
    for i in range(len(seq)):
        for j in range(i + 1, len(seq)):
            if seq[i] > seq[j]:
                sign = -sign
    return sign


class U1Cochain:
    """Pointwise samples of a U(1)-valued Cech k-cochain on a cover."""

    def __init__(self, cover: Cover, degree: int):
        if degree < 0:
            raise DomainError("cochain degree must be nonnegative")
        self.cover = cover
        self.degree = int(degree)
        self._data: dict = {}
        self._canon: dict = {}  # (sorted tuple, point) -> stored ordering

    # -- construction -----------------------------------------------------

    def set(self, indices, point, value) -> None:
        indices = tuple(int(i) for i in indices)
        if len(indices) != self.degree + 1:
            raise DomainError(
                f"degree-{self.degree} cochain needs {self.degree + 1} labels, got {indices}"
            )
        permutation_parity(indices)
        value = complex(value)
        if abs(abs(value) - 1.0) > UNIT_TOL:
            raise DomainError(f"|value| = {abs(value)!r} is not 1")
        p = _point_key(point)
        if len(indices) == 1:
            ok = self.cover.chart(indices[0]).contains(p)
        else:
            ok = overlap(self.cover, indices).contains(p)
        if not ok:
            raise DomainError(f"point {p} is not in the overlap of charts {indices}")
        self._data[(indices, p)] = value
        self._canon.setdefault((tuple(sorted(indices)), p), indices)

    @classmethod
    def from_function(cls, cover: Cover, degree: int, fn: Callable, points: Iterable) -> "U1Cochain":
        """Sample ``fn(indices, x)`` on every sorted tuple of charts containing each point."""
        c = cls(cover, degree)
        for x in points:
            p = _point_key(x)
            for combo in combinations(cover.charts_containing(p), degree + 1):
                c.set(combo, p, fn(combo, np.asarray(p)))
        return c

    @classmethod
    def random(cls, cover: Cover, degree: int, points: Iterable, seed: int) -> "U1Cochain":
        rng = np.random.default_rng(seed)
        return cls.from_function(
            cover, degree, lambda combo, x: np.exp(1j * rng.uniform(-np.pi, np.pi)), points
        )

    @classmethod
    def constant(cls, cover: Cover, degree: int, points: Iterable, value: complex = 1.0) -> "U1Cochain":
        return cls.from_function(cover, degree, lambda combo, x: value, points)

    # -- access -----------------------------------------------------------

    @property
    def points(self) -> list:
        seen = {}
        for (_, p) in self._data:
            seen.setdefault(p, None)
        return list(seen)

    def keys(self):
        return self._data.keys()

    def items(self):
        return self._data.items()

    def __len__(self):
        return len(self._data)

    def has(self, indices, point) -> bool:
        p = _point_key(point)
        return (tuple(sorted(indices)), p) in self._canon

    def value(self, indices, point) -> complex:
        """Value on ``indices`` at ``point``, inverting for odd reorderings."""
        indices = tuple(int(i) for i in indices)
        p = _point_key(point)
        hit = self._data.get((indices, p))
        if hit is not None:
            return hit
        stored = self._canon.get((tuple(sorted(indices)), p))
        if stored is None:
            raise IncompleteDataError(
                f"degree-{self.degree} cochain has no entry for {indices} at {p}"
            )
        v = self._data[(stored, p)]
        if permutation_parity(indices) != permutation_parity(stored):
            v = 1.0 / v
        return v

    def perturbed(self, indices, point, phase: float) -> "U1Cochain":
        """Copy with one stored entry multiplied by ``exp(i*phase)``."""
        out = self.copy()
        indices = tuple(indices)
        p = _point_key(point)
        if (indices, p) not in out._data:
            raise IncompleteDataError(f"no stored entry {indices} at {p}")
        out._data[(indices, p)] = out._data[(indices, p)] * np.exp(1j * phase)
        return out

    def copy(self) -> "U1Cochain":
        out = U1Cochain(self.cover, self.degree)
        out._data = dict(self._data)
        out._canon = dict(self._canon)
        return out

    def __mul__(self, other: "U1Cochain") -> "U1Cochain":
        if other.degree != self.degree:
            raise DomainError("cannot multiply cochains of different degree")
        out = U1Cochain(self.cover, self.degree)
        for (idx, p), v in self._data.items():
            out.set(idx, p, v * other.value(idx, p))
        return out

    # -- serialization ------------------------------------------------------

    def to_rows(self) -> list:
        return [
            {"indices": list(idx), "point": list(p), "re": v.real, "im": v.imag}
            for (idx, p), v in self._data.items()
        ]

    @classmethod
    def from_rows(cls, cover: Cover, degree: int, rows: Iterable[dict]) -> "U1Cochain":
        c = cls(cover, degree)
        for row in rows:
            c.set(row["indices"], row["point"], complex(row["re"], row["im"]))
        return c

    def to_json(self) -> str:
        return json.dumps(self.to_rows())


def coboundary(c: U1Cochain) -> U1Cochain:
    """Multiplicative Cech coboundary, evaluated at every stored sample point."""
    k = c.degree
    out = U1Cochain(c.cover, k + 1)
    for p in c.points:
        for combo in combinations(c.cover.charts_containing(p), k + 2):
            v = 1.0 + 0.0j
            for j in range(k + 2):
                face = combo[:j] + combo[j + 1 :]
                fv = c.value(face, p)
                v = v * fv if j % 2 == 0 else v / fv
            # renormalise so that rounding never accumulates off the circle
            out.set(combo, p, v / abs(v))
    return out


@dataclass
class CocycleReport:
    """Outcome of a cocycle check.

    ``cocycle_deviation`` is the largest ``|product - 1|`` of the alternating
    identity; ``symmetry_deviation`` the largest failure of the inversion rule
    among tuples stored under more than one ordering.
    """

    degree: int
    tol: float
    cocycle_deviation: float = 0.0
    symmetry_deviation: float = 0.0
    checked: int = 0
    worst: tuple | None = None
    details: list = field(default_factory=list)

    @property
    def max_deviation(self) -> float:
        return max(self.cocycle_deviation, self.symmetry_deviation)

    @property
    def passed(self) -> bool:
        return self.max_deviation < self.tol

    def __bool__(self):
        return self.passed

    def as_dict(self) -> dict:
        return {
            "degree": self.degree,
            "tol": self.tol,
            "cocycle_deviation": self.cocycle_deviation,
            "symmetry_deviation": self.symmetry_deviation,
            "checked": self.checked,
            "passed": self.passed,
        }


def _symmetry_deviation(c: U1Cochain) -> float:
    worst = 0.0
    for (idx, p), v in c.items():
        stored = c._canon[(tuple(sorted(idx)), p)]
        if stored == idx:
            continue
        ref = c._data[(stored, p)]
        expect = ref if permutation_parity(idx) == permutation_parity(stored) else 1.0 / ref
        worst = max(worst, abs(v / expect - 1.0))
    return worst


def _alternating_check(c: U1Cochain, tol: float) -> CocycleReport:
    rep = CocycleReport(degree=c.degree, tol=tol)
    k = c.degree
    for p in c.points:
        for combo in combinations(c.cover.charts_containing(p), k + 2):
            v = 1.0 + 0.0j
            for j in range(k + 2):
                face = combo[:j] + combo[j + 1 :]
                fv = c.value(face, p)
                v = v * fv if j % 2 == 0 else v / fv
            dev = abs(v - 1.0)
            rep.checked += 1
            if dev > rep.cocycle_deviation:
                rep.cocycle_deviation = dev
                rep.worst = (combo, p)
    rep.symmetry_deviation = _symmetry_deviation(c)
    return rep


def verify_line_bundle_cocycle(lam: U1Cochain, tol: float = 1e-9) -> CocycleReport:
    """Check ``l_ab l_bc l_ca = 1`` on triple overlaps and ``l_ba = 1 / l_ab``."""
    if lam.degree != 1:
        raise DomainError("line-bundle transition functions are a degree-1 cochain")
    rep = CocycleReport(degree=1, tol=tol)
    for p in lam.points:
        for a, b, c in combinations(lam.cover.charts_containing(p), 3):
            v = lam.value((a, b), p) * lam.value((b, c), p) * lam.value((c, a), p)
            dev = abs(v - 1.0)
            rep.checked += 1
            if dev > rep.cocycle_deviation:
                rep.cocycle_deviation = dev
                rep.worst = ((a, b, c), p)
    rep.symmetry_deviation = _symmetry_deviation(lam)
    return rep


def verify_gerbe_cocycle(g: U1Cochain, tol: float = 1e-9) -> CocycleReport:
    """Check ``g_bcd g_acd^-1 g_abd g_abc^-1 = 1`` on every quadruple overlap.

    Also compares every entry stored under a non-sorted ordering against the
    inversion rule for transpositions.
    """
    if g.degree != 2:
        raise DomainError("a gerbe is a degree-2 cochain")
    return _alternating_check(g, tol)


def verify_cocycle(c: U1Cochain, tol: float = 1e-9) -> CocycleReport:
    """Generic alternating cocycle check for any degree."""
    return _alternating_check(c, tol)
