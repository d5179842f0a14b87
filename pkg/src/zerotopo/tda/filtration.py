"""Delaunay triangulation and the alpha filtration of a planar point set.

Filtration values use the radius convention: an edge enters at half its
length when its diametral disk is empty (Gabriel edge) and otherwise at the
circumradius of the triangle whose apex lies inside that disk; a triangle
enters at its circumradius; vertices enter at 0.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, Tuple

import numpy as np
from scipy.spatial import Delaunay, QhullError

from ..errors import DegenerateInputError

__all__ = ["Triangulation", "Filtration", "delaunay", "alpha_filtration", "jitter_points"]

JITTER_SCALE = 1e-9

Simplex = Tuple[int, ...]


@dataclass(frozen=True)
class Triangulation:
    points: np.ndarray  # (P, 2)
    triangles: np.ndarray  # (T, 3) sorted vertex ids
    edges: np.ndarray  # (E, 2) sorted vertex ids
    edge_triangles: np.ndarray  # (E, 2) incident triangle ids, -1 when absent
    triangle_edges: np.ndarray  # (T, 3) edge id opposite each vertex slot


def jitter_points(points: np.ndarray, seed: int = 0) -> Tuple[np.ndarray, np.ndarray]:
    """Perturb by ``1e-9 * bbox diagonal`` uniform noise; returns (jittered, offsets)."""
    pts = np.asarray(points, dtype=float)
    diag = float(np.linalg.norm(pts.max(axis=0) - pts.min(axis=0))) if len(pts) else 0.0
    rng = np.random.default_rng(seed)
    offsets = rng.uniform(-1.0, 1.0, size=pts.shape) * JITTER_SCALE * max(diag, 1.0)
    return pts + offsets, offsets


def _check_cloud(pts: np.ndarray) -> None:
    if pts.ndim != 2 or pts.shape[1] != 2:
        raise DegenerateInputError("points must be an (n, 2) array")
    if len(pts) < 3:
        raise DegenerateInputError(f"need at least 3 points, got {len(pts)}")
    if len(np.unique(pts, axis=0)) != len(pts):
        raise DegenerateInputError("points must be pairwise distinct")
    centered = pts - pts.mean(axis=0)
    sv = np.linalg.svd(centered, compute_uv=False)
    if sv[1] <= 1e-12 * max(sv[0], 1e-300):
        raise DegenerateInputError("points are collinear")


def delaunay(points: np.ndarray, jitter_seed: int | None = 0) -> Triangulation:
    """Delaunay triangulation; with ``jitter_seed`` set, points are jittered first."""
    pts = np.asarray(points, dtype=float)
    _check_cloud(pts)
    if jitter_seed is not None:
        pts, _ = jitter_points(pts, jitter_seed)
    return _triangulate(pts)


def _triangulate(pts: np.ndarray) -> Triangulation:
    try:
        dt = Delaunay(pts)
    except QhullError as exc:  # pragma: no cover - guarded by _check_cloud
        raise DegenerateInputError(str(exc)) from exc
    tris = np.sort(dt.simplices.astype(np.int64), axis=1)
    if len(np.unique(tris.ravel())) != len(pts):
        raise DegenerateInputError("triangulation dropped input points")
    T = len(tris)
    n = len(pts)
    # local edge k is opposite vertex slot k
    a = tris[:, [1, 0, 0]]
    b = tris[:, [2, 2, 1]]
    keys = (a * n + b).ravel()
    uniq, inverse = np.unique(keys, return_inverse=True)
    edges = np.stack([uniq // n, uniq % n], axis=1)
    triangle_edges = inverse.reshape(T, 3)
    occ_tri = np.repeat(np.arange(T), 3)
    order = np.argsort(inverse, kind="stable")
    sorted_edges = inverse[order]
    first = np.ones(len(order), dtype=bool)
    first[1:] = sorted_edges[1:] != sorted_edges[:-1]
    edge_triangles = np.full((len(edges), 2), -1, dtype=np.int64)
    edge_triangles[sorted_edges[first], 0] = occ_tri[order[first]]
    edge_triangles[sorted_edges[~first], 1] = occ_tri[order[~first]]
    return Triangulation(pts, tris, edges, edge_triangles, triangle_edges)


@dataclass(frozen=True)
class Filtration:
    """Alpha filtration as an ordered simplex list.

    Position ``i`` of the ordering holds a simplex of dimension ``dim[i]``
    whose id within its dimension is ``sid[i]``; ``r`` is nondecreasing.
    """

    triangulation: Triangulation
    r: np.ndarray
    dim: np.ndarray
    sid: np.ndarray
    vertex_pos: np.ndarray
    edge_pos: np.ndarray
    triangle_pos: np.ndarray
    edge_r: np.ndarray
    triangle_r: np.ndarray
    offsets: np.ndarray = field(repr=False)

    @property
    def points(self) -> np.ndarray:
        return self.triangulation.points

    @property
    def n_vertices(self) -> int:
        return len(self.vertex_pos)

    def __len__(self) -> int:
        return len(self.r)

    def simplex(self, i: int) -> Simplex:
        d, k = int(self.dim[i]), int(self.sid[i])
        tri = self.triangulation
        if d == 0:
            return (k,)
        if d == 1:
            return tuple(int(v) for v in tri.edges[k])
        return tuple(int(v) for v in tri.triangles[k])

    def entries(self) -> Iterator[Tuple[float, Simplex]]:
        for i in range(len(self)):
            yield float(self.r[i]), self.simplex(i)

    def dump_rows(self) -> np.ndarray:
        """``(r, v1, v2, v3)`` rows with -1 padding, in filtration order."""
        rows = np.full((len(self), 4), -1.0)
        rows[:, 0] = self.r
        tri = self.triangulation
        d0 = self.dim == 0
        rows[d0, 1] = self.sid[d0]
        d1 = self.dim == 1
        rows[d1, 1:3] = tri.edges[self.sid[d1]]
        d2 = self.dim == 2
        rows[d2, 1:4] = tri.triangles[self.sid[d2]]
        return rows


def circumcircles(pts: np.ndarray, tris: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    A, B, C = pts[tris[:, 0]], pts[tris[:, 1]], pts[tris[:, 2]]
    b = B - A
    c = C - A
    d = 2.0 * (b[:, 0] * c[:, 1] - b[:, 1] * c[:, 0])
    bb = np.einsum("ij,ij->i", b, b)
    cc = np.einsum("ij,ij->i", c, c)
    ux = (c[:, 1] * bb - b[:, 1] * cc) / d
    uy = (b[:, 0] * cc - c[:, 0] * bb) / d
    center = A + np.stack([ux, uy], axis=1)
    radius = np.hypot(ux, uy)
    return center, radius


def alpha_filtration(points: np.ndarray, jitter_seed: int | None = 0) -> Filtration:
    pts = np.asarray(points, dtype=float)
    _check_cloud(pts)
    offsets = np.zeros_like(pts)
    if jitter_seed is not None:
        pts, offsets = jitter_points(pts, jitter_seed)
    tri = _triangulate(pts)
    return _alpha_from_triangulation(tri, offsets)


def _alpha_from_triangulation(tri: Triangulation, offsets: np.ndarray) -> Filtration:
    pts, tris = tri.points, tri.triangles
    _, tri_r = circumcircles(pts, tris)
    e = tri.edges
    half_len = 0.5 * np.linalg.norm(pts[e[:, 1]] - pts[e[:, 0]], axis=1)
    attached_r = np.full(len(e), np.inf)
    # apex strictly inside the diametral disk <=> obtuse angle at the apex
    apex = pts[tris]  # (T, 3, 2)
    for k in range(3):
        p = apex[:, k]
        a = apex[:, (k + 1) % 3]
        b = apex[:, (k + 2) % 3]
        attached = np.einsum("ij,ij->i", a - p, b - p) < 0
        np.minimum.at(attached_r, tri.triangle_edges[attached, k], tri_r[attached])
    edge_r = np.where(np.isfinite(attached_r), attached_r, half_len)
    # near-right triangles (common on a lattice) can round below their hypotenuse
    tri_r = np.maximum(tri_r, edge_r[tri.triangle_edges].max(axis=1))
    n, E, T = len(pts), len(e), len(tris)
    r = np.concatenate([np.zeros(n), edge_r, tri_r])
    dim = np.concatenate([np.zeros(n, np.int64), np.ones(E, np.int64), np.full(T, 2, np.int64)])
    sid = np.concatenate([np.arange(n), np.arange(E), np.arange(T)])
    order = np.lexsort((sid, dim, r))
    pos = np.empty(len(order), dtype=np.int64)
    pos[order] = np.arange(len(order))
    return Filtration(
        triangulation=tri,
        r=r[order],
        dim=dim[order],
        sid=sid[order],
        vertex_pos=pos[:n],
        edge_pos=pos[n : n + E],
        triangle_pos=pos[n + E :],
        edge_r=edge_r,
        triangle_r=tri_r,
        offsets=offsets,
    )
