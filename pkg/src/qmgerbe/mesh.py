"""Simplicial meshes in F x R and lowest-order cochain calculus.

Points carry the configuration coordinates first and time last, so a mesh
in ``D`` ambient dimensions describes ``d = D - 1`` configuration
coordinates.  Oriented simplices are vertex-index tuples; the oriented
boundary of ``(v0, ..., vk)`` is ``sum_i (-1)^i (v0, .., ^vi, .., vk)``.
Cochains on a :class:`SimplicialComplex` live on canonically (ascending)
ordered simplices, and the coboundary is the transposed signed incidence.
"""

from __future__ import annotations

import itertools
from collections import defaultdict, deque

import numpy as np
import scipy.sparse as sp

from .cech import permutation_parity
from .errors import DomainError


def _signed_faces(simplices):
    """All codimension-1 faces in ascending order, with their incidence signs."""
    S = np.asarray(simplices, dtype=int)
    if S.ndim != 2 or S.size == 0:
        return np.zeros((0, max(S.shape[-1] - 1, 0)), dtype=int), np.zeros(0, dtype=int)
    k = S.shape[1]
    faces, signs = [], []
    for i in range(k):
        f = np.delete(S, i, axis=1)
        inv = np.zeros(len(f), dtype=int)
        for a in range(k - 1):
            for b in range(a + 1, k - 1):
                inv += f[:, a] > f[:, b]
        faces.append(np.sort(f, axis=1))
        signs.append((-1) ** i * (1 - 2 * (inv % 2)))
    return np.concatenate(faces), np.concatenate(signs)


def boundary_chain(simplices) -> dict:
    """Oriented boundary as ``{sorted face: integer coefficient}``, zeros dropped."""
    faces, signs = _signed_faces(simplices)
    if len(faces) == 0:
        return {}
    uniq, inv = np.unique(faces, axis=0, return_inverse=True)
    coef = np.bincount(inv.ravel(), weights=signs, minlength=len(uniq)).astype(int)
    return {tuple(int(v) for v in uniq[j]): int(coef[j]) for j in np.flatnonzero(coef)}


def _faces_from_chain(chain: dict) -> list:
    out = []
    for key in sorted(chain):
        c = chain[key]
        if abs(c) != 1:
            raise DomainError(f"face {key} has boundary coefficient {c}; orientation is inconsistent")
        out.append(key if c == 1 else key[:-2] + (key[-1], key[-2]))
    return out


def _check_consistent(simplices, what: str) -> None:
    S = np.asarray(simplices, dtype=int)
    if S.size == 0:
        return
    srt = np.sort(S, axis=1)
    if np.any(srt[:, 1:] == srt[:, :-1]):
        bad = S[np.flatnonzero(np.any(srt[:, 1:] == srt[:, :-1], axis=1))[0]]
        raise DomainError(f"{what} {tuple(int(v) for v in bad)} repeats a vertex")
    faces, signs = _signed_faces(S)
    uniq, inv = np.unique(faces, axis=0, return_inverse=True)
    inv = inv.ravel()
    count = np.bincount(inv, minlength=len(uniq))
    total = np.bincount(inv, weights=signs, minlength=len(uniq))
    bad = np.flatnonzero((count > 2) | ((count == 2) & (total != 0)))
    if bad.size:
        raise DomainError(f"inconsistent orientation of the {what} mesh around face {tuple(int(v) for v in uniq[bad[0]])}")


def _points(vertices) -> np.ndarray:
    v = np.asarray(vertices, dtype=float)
    if v.ndim != 2 or v.shape[1] < 1:
        raise DomainError("vertices must be an (n, D) array")
    if not np.all(np.isfinite(v)):
        raise DomainError("vertices must be finite")
    return v


def _cells(cells, k: int, n_vertices: int) -> np.ndarray:
    c = np.asarray(cells, dtype=int).reshape(-1, k)
    if c.size and (c.min() < 0 or c.max() >= n_vertices):
        raise DomainError("cell refers to a missing vertex")
    return c


class DiscretePath:
    """Polyline in F x R; ``closed`` paths have first vertex == last vertex."""

    def __init__(self, vertices, closed: bool = False):
        v = _points(vertices)
        if closed and not np.array_equal(v[0], v[-1]):
            v = np.vstack([v, v[:1]])
        if len(v) < 2:
            raise DomainError("a path needs at least two vertices")
        body = v[:-1] if closed else v
        if len({tuple(r) for r in body}) != len(body):
            raise DomainError("path repeats a vertex")
        self.vertices = v
        self.closed = closed

    @property
    def dim(self) -> int:
        return self.vertices.shape[1]

    def edges(self):
        return self.vertices[:-1], self.vertices[1:]

    def reversed(self) -> "DiscretePath":
        return DiscretePath(self.vertices[::-1], self.closed)

    def __len__(self):
        return len(self.vertices)


class DiscreteSurface:
    """Oriented triangles in F x R."""

    def __init__(self, vertices, triangles):
        self.vertices = _points(vertices)
        self.triangles = _cells(triangles, 3, len(self.vertices))
        _check_consistent(self.triangles.tolist(), "triangle")

    @property
    def dim(self) -> int:
        return self.vertices.shape[1]

    def boundary_edges(self) -> list:
        return _faces_from_chain(boundary_chain(self.triangles.tolist()))

    def boundary(self) -> list:
        """Boundary as a list of closed :class:`DiscretePath` (empty if closed)."""
        edges = self.boundary_edges()
        nxt = defaultdict(deque)
        for a, b in edges:
            nxt[a].append(b)
        loops = []
        remaining = len(edges)
        while remaining:
            start = min(k for k, q in nxt.items() if q)
            idx = [start]
            cur = start
            while True:
                cur = nxt[cur].popleft()
                remaining -= 1
                if cur == start:
                    break
                idx.append(cur)
            loops.append(DiscretePath(self.vertices[idx], closed=True))
        return loops

    @property
    def is_closed(self) -> bool:
        return not self.boundary_edges()

    def reversed(self) -> "DiscreteSurface":
        return DiscreteSurface(self.vertices, self.triangles[:, [0, 2, 1]])

    def projected_areas(self) -> np.ndarray:
        """Signed areas ``(m, D, D)`` of every triangle projected on each coordinate plane."""
        p = self.vertices[self.triangles]
        return _plane_areas(p[:, 1] - p[:, 0], p[:, 2] - p[:, 0])

    def centroids(self) -> np.ndarray:
        return self.vertices[self.triangles].mean(axis=1)


class DiscreteVolume:
    """Oriented tetrahedra in F x R."""

    def __init__(self, vertices, tets):
        self.vertices = _points(vertices)
        self.tets = _cells(tets, 4, len(self.vertices))
        _check_consistent(self.tets.tolist(), "tetrahedron")

    @property
    def dim(self) -> int:
        return self.vertices.shape[1]

    def boundary(self) -> DiscreteSurface:
        faces = _faces_from_chain(boundary_chain(self.tets.tolist()))
        return DiscreteSurface(self.vertices, np.array(faces, dtype=int).reshape(-1, 3))

    @property
    def is_closed(self) -> bool:
        return not boundary_chain(self.tets.tolist())

    def reversed(self) -> "DiscreteVolume":
        return DiscreteVolume(self.vertices, self.tets[:, [0, 1, 3, 2]])

    def centroids(self) -> np.ndarray:
        return self.vertices[self.tets].mean(axis=1)

    def signed_volumes(self) -> np.ndarray:
        """Oriented volumes; only defined in three ambient dimensions."""
        if self.dim != 3:
            raise DomainError("signed volumes of tetrahedra need a three-dimensional ambient space")
        p = self.vertices[self.tets]
        return _triple(p[:, 1] - p[:, 0], p[:, 2] - p[:, 0], p[:, 3] - p[:, 0]) / 6.0


def _plane_areas(e1: np.ndarray, e2: np.ndarray) -> np.ndarray:
    # A[:, i, j] = (e1_i e2_j - e1_j e2_i) / 2
    return 0.5 * (e1[:, :, None] * e2[:, None, :] - e1[:, None, :] * e2[:, :, None])


def _triple(a: np.ndarray, b: np.ndarray, c: np.ndarray) -> np.ndarray:
    # written out so that swapping b and c negates the result bit for bit
    cross = np.stack(
        [
            b[:, 1] * c[:, 2] - b[:, 2] * c[:, 1],
            b[:, 2] * c[:, 0] - b[:, 0] * c[:, 2],
            b[:, 0] * c[:, 1] - b[:, 1] * c[:, 0],
        ],
        axis=1,
    )
    return a[:, 0] * cross[:, 0] + a[:, 1] * cross[:, 1] + a[:, 2] * cross[:, 2]


# -- structured meshes ----------------------------------------------------------

def kuhn_mesh(n, lo, hi):
    """Kuhn triangulation of a box into positively oriented ``D``-simplices.

    Returns ``(vertices, simplices)``.  Every grid cube is split into ``D!``
    simplices along monotone lattice paths.
    """
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    D = lo.size
    shape = (int(n),) * D if np.isscalar(n) else tuple(int(k) for k in n)
    if len(shape) != D or min(shape) < 1:
        raise DomainError("need a positive cell count per dimension")
    if not np.all(hi > lo):
        raise DomainError("box must have hi > lo in every dimension")
    axes = [np.linspace(lo[j], hi[j], shape[j] + 1) for j in range(D)]
    grid = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, D)
    npts = tuple(k + 1 for k in shape)

    def vid(idx):
        return int(np.ravel_multi_index(tuple(idx), npts))

    simplices = []
    for cell in itertools.product(*[range(k) for k in shape]):
        for perm in itertools.permutations(range(D)):
            cur = list(cell)
            s = [vid(cur)]
            for j in perm:
                cur[j] += 1
                s.append(vid(cur))
            if permutation_parity(perm) < 0:
                s[-1], s[-2] = s[-2], s[-1]
            simplices.append(s)
    return grid, np.array(simplices, dtype=int)


def square_surface(n: int, lo=(0.0, 0.0), hi=(1.0, 1.0)) -> DiscreteSurface:
    """Triangulated rectangle in the (q, t) plane, counter-clockwise triangles."""
    v, s = kuhn_mesh(n, lo, hi)
    return DiscreteSurface(v, s)


def box_volume(n, lo=(0.0, 0.0, 0.0), hi=(1.0, 1.0, 1.0)) -> DiscreteVolume:
    v, s = kuhn_mesh(n, lo, hi)
    return DiscreteVolume(v, s)


def box_surface(n, lo=(0.0, 0.0, 0.0), hi=(1.0, 1.0, 1.0)) -> DiscreteSurface:
    """Closed triangulated surface of a box (a topological sphere), outward oriented."""
    return box_volume(n, lo, hi).boundary()


def closed_volume(n=1, lo=(0.0,) * 4, hi=(1.0,) * 4) -> DiscreteVolume:
    """Closed 3-volume: the oriented boundary of a triangulated 4-box."""
    v, s = kuhn_mesh(n, lo, hi)
    faces = _faces_from_chain(boundary_chain(s.tolist()))
    return DiscreteVolume(v, np.array(faces, dtype=int))


def polygon_path(corners, samples_per_side: int = 1, closed: bool = True) -> DiscretePath:
    """Straight-sided polyline through ``corners`` with evenly spaced vertices."""
    c = _points(corners)
    if closed:
        c = np.vstack([c, c[:1]])
    pieces = []
    for a, b in zip(c[:-1], c[1:]):
        s = np.linspace(0.0, 1.0, samples_per_side + 1)[:-1, None]
        pieces.append(a + s * (b - a))
    pieces.append(c[-1:])
    return DiscretePath(np.vstack(pieces), closed=closed)


# -- cochains on a complex ---------------------------------------------------------

class SimplicialComplex:
    """All faces of a set of top simplices, in ascending vertex order."""

    def __init__(self, vertices, top):
        self.vertices = _points(vertices)
        top = np.asarray(top, dtype=int)
        self.top_dim = top.shape[1] - 1
        self.simplices = []
        for k in range(self.top_dim + 1):
            faces = set()
            for s in top.tolist():
                faces.update(itertools.combinations(sorted(s), k + 1))
            self.simplices.append(sorted(faces))
        self._index = [{s: i for i, s in enumerate(level)} for level in self.simplices]

    @classmethod
    def from_mesh(cls, mesh) -> "SimplicialComplex":
        if isinstance(mesh, DiscreteVolume):
            return cls(mesh.vertices, mesh.tets)
        if isinstance(mesh, DiscreteSurface):
            return cls(mesh.vertices, mesh.triangles)
        raise DomainError("need a DiscreteSurface or DiscreteVolume")

    def count(self, k: int) -> int:
        return len(self.simplices[k])

    def index(self, k: int, simplex) -> int:
        return self._index[k][tuple(simplex)]

    def coboundary(self, k: int) -> sp.csr_matrix:
        """Matrix of ``d: C^k -> C^(k+1)``."""
        if not 0 <= k < self.top_dim:
            raise DomainError(f"no coboundary from degree {k} on a {self.top_dim}-complex")
        rows, cols, vals = [], [], []
        for r, s in enumerate(self.simplices[k + 1]):
            for i in range(len(s)):
                rows.append(r)
                cols.append(self._index[k][s[:i] + s[i + 1 :]])
                vals.append((-1) ** i)
        shape = (self.count(k + 1), self.count(k))
        return sp.csr_matrix((vals, (rows, cols)), shape=shape)

    def d(self, k: int, cochain) -> np.ndarray:
        return self.coboundary(k) @ np.asarray(cochain)

    def points(self, k: int) -> np.ndarray:
        """Vertex coordinates of every k-simplex, shape ``(n_k, k+1, D)``."""
        return self.vertices[np.array(self.simplices[k], dtype=int).reshape(-1, k + 1)]

    def inside(self, k: int, box) -> np.ndarray:
        """Mask of k-simplices whose vertices all lie in ``box`` (anything with ``contains``)."""
        vmask = np.array([box.contains(x) for x in self.vertices], dtype=bool)
        idx = np.array(self.simplices[k], dtype=int).reshape(-1, k + 1)
        return vmask[idx].all(axis=1)

    # sampling of smooth forms: midpoint / centroid rules

    def sample_0(self, fn) -> np.ndarray:
        return np.array([float(fn(x)) for x in self.vertices])

    def sample_1(self, fn) -> np.ndarray:
        """``fn(x) -> (D,)`` covector, integrated over edges by the midpoint rule."""
        p = self.points(1)
        mid = p.mean(axis=1)
        dx = p[:, 1] - p[:, 0]
        return np.array([float(np.dot(fn(m), e)) for m, e in zip(mid, dx)])

    def sample_2(self, fn) -> np.ndarray:
        """``fn(x) -> (D, D)`` antisymmetric, integrated over triangles at centroids."""
        p = self.points(2)
        areas = _plane_areas(p[:, 1] - p[:, 0], p[:, 2] - p[:, 0])
        # sum over i < j of F_ij A_ij equals half the full contraction
        return np.array([0.5 * float(np.sum(fn(c) * a)) for c, a in zip(p.mean(axis=1), areas)])

    def sample_3(self, fn) -> np.ndarray:
        """Scalar density times oriented volume; three ambient dimensions only."""
        if self.vertices.shape[1] != 3:
            raise DomainError("3-form sampling is implemented for three ambient dimensions")
        p = self.points(3)
        vol = _triple(p[:, 1] - p[:, 0], p[:, 2] - p[:, 0], p[:, 3] - p[:, 0]) / 6.0
        return np.array([float(fn(c)) for c in p.mean(axis=1)]) * vol
