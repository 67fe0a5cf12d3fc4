"""Good covers of configuration space by axis-aligned open boxes."""

from __future__ import annotations

import json
from dataclasses import dataclass
from itertools import combinations
from typing import Iterable, Sequence

import numpy as np

from .errors import DomainError


@dataclass(frozen=True)
class Chart:
    """Open box ``(lo, hi)`` labelled by an integer index."""

    index: int
    lo: tuple
    hi: tuple

    def __post_init__(self):
        lo = tuple(float(x) for x in np.atleast_1d(self.lo))
        hi = tuple(float(x) for x in np.atleast_1d(self.hi))
        if len(lo) != len(hi):
            raise DomainError(f"chart {self.index}: lo and hi differ in length")
        if not all(a < b for a, b in zip(lo, hi)):
            raise DomainError(f"chart {self.index}: need lo < hi componentwise")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)
        object.__setattr__(self, "index", int(self.index))

    @property
    def dim(self) -> int:
        return len(self.lo)

    def contains(self, x) -> bool:
        x = np.atleast_1d(np.asarray(x, dtype=float))
        return bool(np.all(x > self.lo) and np.all(x < self.hi))


@dataclass(frozen=True)
class OverlapRegion:
    indices: tuple
    lo: tuple
    hi: tuple
    empty: bool

    def contains(self, x) -> bool:
        if self.empty:
            return False
        x = np.atleast_1d(np.asarray(x, dtype=float))
        return bool(np.all(x > self.lo) and np.all(x < self.hi))


class Cover:
    """A finite cover of a box-shaped region of R^d by open chart boxes.

    Boxes are convex, so every nonempty overlap is contractible and the
    cover is automatically good.
    """

    def __init__(self, d: int, charts: Iterable[Chart]):
        charts = tuple(charts)
        if int(d) < 1:
            raise DomainError("dimension must be positive")
        if not charts:
            raise DomainError("a cover needs at least one chart")
        labels = [c.index for c in charts]
        if len(set(labels)) != len(labels):
            raise DomainError(f"duplicate chart labels in {labels}")
        for c in charts:
            if c.dim != d:
                raise DomainError(f"chart {c.index} has dimension {c.dim}, cover has {d}")
        self.d = int(d)
        self.charts = charts
        self._by_label = {c.index: c for c in charts}

    @property
    def labels(self) -> tuple:
        return tuple(self._by_label)

    def chart(self, label: int) -> Chart:
        try:
            return self._by_label[label]
        except KeyError:
            raise KeyError(f"no chart labelled {label!r}") from None

    def charts_containing(self, x) -> tuple:
        """Sorted labels of the charts whose open box contains ``x``."""
        return tuple(sorted(c.index for c in self.charts if c.contains(x)))

    def nonempty_overlaps(self, order: int) -> list:
        """All sorted ``order``-tuples of labels with a nonempty intersection."""
        out = []
        for combo in combinations(sorted(self.labels), order):
            if not overlap(self, combo).empty:
                out.append(combo)
        return out

    def to_dict(self) -> dict:
        return {
            "d": self.d,
            "charts": [{"index": c.index, "lo": list(c.lo), "hi": list(c.hi)} for c in self.charts],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Cover":
        charts = [Chart(c["index"], c["lo"], c["hi"]) for c in data["charts"]]
        return cls(data["d"], charts)

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text: str) -> "Cover":
        return cls.from_dict(json.loads(text))

    def __eq__(self, other):
        return isinstance(other, Cover) and self.d == other.d and self.charts == other.charts

    def __repr__(self):
        return f"Cover(d={self.d}, charts={len(self.charts)})"

    @classmethod
    def intervals(cls, bounds: Sequence[tuple]) -> "Cover":
        """One-dimensional cover from ``[(lo, hi), ...]``, labelled 1, 2, ..."""
        return cls(1, [Chart(i + 1, [lo], [hi]) for i, (lo, hi) in enumerate(bounds)])


def overlap(cover: Cover, indices: Sequence[int]) -> OverlapRegion:
    """Intersection of the charts named by ``indices``.

    The result does not depend on the order of the labels.
    """
    indices = tuple(indices)
    if len(indices) < 2:
        raise DomainError("overlap needs at least two chart labels")
    charts = [cover.chart(i) for i in indices]
    lo = np.max([c.lo for c in charts], axis=0)
    hi = np.min([c.hi for c in charts], axis=0)
    empty = bool(np.any(hi <= lo))
    return OverlapRegion(tuple(sorted(indices)), tuple(lo.tolist()), tuple(hi.tolist()), empty)


def sample_points(region, n: int, seed: int) -> list:
    """``n`` points drawn uniformly and strictly inside a box.

    ``region`` may be an :class:`OverlapRegion` or a :class:`Chart`.
    """
    if getattr(region, "empty", False):
        raise DomainError(f"cannot sample the empty overlap {region.indices}")
    if n < 1:
        raise DomainError("need n >= 1")
    lo = np.asarray(region.lo)
    hi = np.asarray(region.hi)
    rng = np.random.default_rng(seed)
    # open interval (0, 1): reject exact zeros
    u = rng.random((n, lo.size))
    while np.any(u == 0.0):
        u[u == 0.0] = rng.random(int(np.sum(u == 0.0)))
    pts = lo + u * (hi - lo)
    pts = np.clip(pts, np.nextafter(lo, hi), np.nextafter(hi, lo))
    return [p for p in pts]
