"""Minimum and stable volumes read off the persistence tree, ε tuning,
component selection and rasterization onto the spectrogram grid."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import List, Sequence

import numpy as np

from ..signal import SpectrogramGrid
from .tree import PersistencePair, PersistenceTree

__all__ = [
    "Volume",
    "minimum_volume",
    "stable_volume",
    "sv_size_curve",
    "tune_epsilon",
    "top_components",
    "rasterize_volume",
    "EPS_MAX",
    "EPS_GRID_POINTS",
]

EPS_MAX = 0.15
EPS_GRID_POINTS = 40
# a plateau search needs at least this many size changes in range
MIN_BREAKPOINTS = 10
MAX_EXPANSIONS = 20
# cell centers within this fraction of a cell from a triangle count as inside
RASTER_TOL = 1e-6


@dataclass(frozen=True)
class Volume:
    """Set of triangle ids (tree nodes) attached to one H1 pair."""

    triangles: np.ndarray
    pair: PersistencePair
    kind: str  # "minimum" | "stable"
    epsilon: float = 0.0
    tree: PersistenceTree = field(repr=False, compare=False, default=None)

    def __len__(self) -> int:
        return len(self.triangles)

    def vertices(self) -> np.ndarray:
        """``(len, 3, 2)`` plane coordinates of the triangles."""
        tri = self.tree.filtration.triangulation
        return tri.points[tri.triangles[self.triangles]]


def _check_pair(tree: PersistenceTree, pair: PersistencePair) -> int:
    v = pair.death_simplex
    if pair.dim != 1 or not 0 <= v < tree.n_nodes - 1 or tree.edge[v] != pair.birth_simplex:
        raise ValueError("pair is not an H1 pair of this persistence tree")
    return v


def minimum_volume(tree: PersistenceTree, pair: PersistencePair) -> Volume:
    """The death triangle and all of its descendants."""
    v = _check_pair(tree, pair)
    tris = np.sort(tree.descendants(v))
    return Volume(tris, pair, "minimum", 0.0, tree)


def _kept_children(tree: PersistenceTree, v: int, epsilon: float) -> np.ndarray:
    kids = tree.children(v)
    return kids[tree.label[kids] >= (1.0 + epsilon) * tree.label[v]]


def stable_volume(tree: PersistenceTree, pair: PersistencePair, epsilon: float) -> Volume:
    """Death triangle plus the full subtrees of the children whose link
    value is at least ``(1 + epsilon) * birth``.  ``epsilon = 0`` gives the
    minimum volume."""
    if not epsilon >= 0:
        raise ValueError("epsilon must be nonnegative")
    v = _check_pair(tree, pair)
    parts = [np.array([v])]
    for c in _kept_children(tree, v, epsilon).tolist():
        parts.append(tree.descendants(c))
    tris = np.sort(np.concatenate(parts))
    return Volume(tris, pair, "stable", float(epsilon), tree)


def sv_size_curve(tree: PersistenceTree, pair: PersistencePair, eps: np.ndarray) -> np.ndarray:
    """``|SV_eps|`` for every value of ``eps``, from precomputed subtree sizes."""
    v = _check_pair(tree, pair)
    eps = np.asarray(eps, dtype=float)
    kids = tree.children(v)
    ratio = tree.label[kids] / tree.label[v]
    sizes = tree.subtree_size[kids]
    keep = ratio[None, :] >= 1.0 + eps[:, None]
    return 1 + keep.astype(np.int64) @ sizes


def _breakpoints(tree: PersistenceTree, v: int) -> np.ndarray:
    kids = tree.children(v)
    return np.unique(tree.label[kids] / tree.label[v] - 1.0)


def _plateau_start(sizes: np.ndarray) -> int:
    """Start index of the longest run of equal values; earlier run wins ties."""
    best_start, best_len = 0, 0
    start = 0
    for i in range(1, len(sizes) + 1):
        if i == len(sizes) or sizes[i] != sizes[start]:
            if i - start > best_len:
                best_start, best_len = start, i - start
            start = i
    return best_start


def _longest_run(sizes: np.ndarray) -> int:
    start = _plateau_start(sizes)
    stop = start
    while stop < len(sizes) and sizes[stop] == sizes[start]:
        stop += 1
    return stop - start


def tune_epsilon(tree: PersistenceTree, pair: PersistencePair, eps_max: float = EPS_MAX) -> float:
    """Smallest ε of the longest plateau of ``|SV_eps|`` on a 40-point grid
    over ``[0, eps_max]``.

    If fewer than ten size changes fall in the interval and no run of at
    least two equal grid values exists, the interval is doubled and the
    search repeated.
    """
    _check_pair(tree, pair)
    v = pair.death_simplex
    bps = _breakpoints(tree, v)
    for _ in range(MAX_EXPANSIONS):
        grid = np.linspace(0.0, eps_max, EPS_GRID_POINTS)
        sizes = sv_size_curve(tree, pair, grid)
        inside = np.count_nonzero((bps > 0) & (bps <= eps_max))
        if inside >= MIN_BREAKPOINTS or _longest_run(sizes) >= 2:
            break
        eps_max *= 2.0
    return float(grid[_plateau_start(sizes)])


def top_components(
    pairs: Sequence[PersistencePair], K: int, non_overlapping: bool = False
) -> List[PersistencePair]:
    """The K pairs farthest from the diagonal, zero-persistence pairs excluded.

    With ``non_overlapping`` only pairs whose death triangle hangs directly
    below the outer region are eligible; their minimum volumes are disjoint.
    """
    if K < 1:
        raise ValueError("K must be >= 1")
    cand = [p for p in pairs if p.death > p.birth]
    if non_overlapping:
        cand = [p for p in cand if p.root_child]
    cand.sort(key=lambda p: (-p.distance, p.birth, p.death, p.death_simplex))
    return cand[:K]


def rasterize_volume(vol: Volume, grid: SpectrogramGrid) -> np.ndarray:
    """Boolean ``M x N`` mask of cells whose center lies in a volume triangle
    (boundary included)."""
    M, N = grid.shape
    mask = np.zeros((M, N), dtype=bool)
    if vol is None or len(vol) == 0:
        return mask
    tv = vol.vertices()  # (T, 3, 2) as (u, v)
    du, dv = grid.du, grid.dv
    tol = RASTER_TOL * min(du, dv)
    lo = tv.min(axis=1)
    hi = tv.max(axis=1)
    n0 = np.clip(np.ceil((lo[:, 0] - tol) / du), 0, N - 1).astype(np.int64)
    n1 = np.clip(np.floor((hi[:, 0] + tol) / du), 0, N - 1).astype(np.int64)
    m0 = np.clip(np.ceil((lo[:, 1] - tol) / dv), 0, M - 1).astype(np.int64)
    m1 = np.clip(np.floor((hi[:, 1] + tol) / dv), 0, M - 1).astype(np.int64)
    wn = np.maximum(n1 - n0 + 1, 0)
    wm = np.maximum(m1 - m0 + 1, 0)
    counts = wn * wm
    total = int(counts.sum())
    if total == 0:
        return mask
    tid = np.repeat(np.arange(len(tv)), counts)
    local = np.arange(total) - np.repeat(np.cumsum(counts) - counts, counts)
    nn = n0[tid] + local % wn[tid]
    mm = m0[tid] + local // wn[tid]
    p = np.stack([nn * du, mm * dv], axis=1)
    A, B, C = tv[tid, 0], tv[tid, 1], tv[tid, 2]
    orient = np.sign(_cross(B - A, C - A))
    inside = np.ones(total, dtype=bool)
    for a, b in ((A, B), (B, C), (C, A)):
        edge = b - a
        dist = orient * _cross(edge, p - a) / np.linalg.norm(edge, axis=1)
        inside &= dist >= -tol
    mask[mm[inside], nn[inside]] = True
    return mask


def _cross(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return a[:, 0] * b[:, 1] - a[:, 1] * b[:, 0]
