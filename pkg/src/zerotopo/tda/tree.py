"""Persistence tree over the 2-simplices of an alpha filtration, and diagrams.

The tree is built by sweeping the filtration backwards.  Each edge either
joins two distinct regions of the complement (triangles plus the outer
region, node ``T``) or is skipped.  When two regions meet, the root that
entered the filtration earlier becomes a child of the other; the edge value
labels the link.  Reading the links back gives the H1 diagram, and subtrees
give minimum volumes.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import List

import numpy as np

from ..errors import InvariantError
from .filtration import Filtration

__all__ = [
    "PersistencePair",
    "PersistenceTree",
    "build_persistence_tree",
    "diagram_h1",
    "diagram_h0",
    "validate_filtration",
]


@dataclass(frozen=True)
class PersistencePair:
    """One point of a persistence diagram.

    For dim 1, ``birth_simplex`` is the edge id and ``death_simplex`` the
    triangle id (tree node) of the pair; ``root_child`` tells whether that
    node hangs directly below the outer region.
    """

    birth: float
    death: float
    dim: int
    birth_simplex: int = -1
    death_simplex: int = -1
    root_child: bool = False

    @property
    def persistence(self) -> float:
        return self.death - self.birth

    @property
    def distance(self) -> float:
        """Distance of ``(birth, death)`` to the diagonal."""
        return (self.death - self.birth) / np.sqrt(2.0)

    @property
    def zero_persistence(self) -> bool:
        return self.death == self.birth


class _UnionFind:
    def __init__(self, n: int):
        self.parent = list(range(n))

    def find(self, a: int) -> int:
        parent = self.parent
        root = a
        while parent[root] != root:
            root = parent[root]
        while parent[a] != root:
            parent[a], a = root, parent[a]
        return root


@dataclass(frozen=True)
class PersistenceTree:
    """Rooted tree over triangle nodes ``0..T-1`` and the outer node ``T``.

    ``parent[i]`` is -1 only for the outer node.  ``label[i]`` is the value
    of the edge ``edge[i]`` linking node i to its parent.
    """

    filtration: Filtration
    parent: np.ndarray
    label: np.ndarray
    edge: np.ndarray
    node_r: np.ndarray
    child_ptr: np.ndarray
    child_idx: np.ndarray
    subtree_size: np.ndarray

    @property
    def root(self) -> int:
        return len(self.parent) - 1

    @property
    def n_nodes(self) -> int:
        return len(self.parent)

    def children(self, node: int) -> np.ndarray:
        return self.child_idx[self.child_ptr[node] : self.child_ptr[node + 1]]

    def descendants(self, node: int, include_self: bool = True) -> np.ndarray:
        out = [node] if include_self else []
        stack = list(self.children(node))
        while stack:
            v = stack.pop()
            out.append(v)
            stack.extend(self.children(v))
        return np.asarray(out, dtype=np.int64)


def validate_filtration(filt: Filtration) -> None:
    r = filt.r
    if len(r) == 0 or np.any(np.diff(r) < 0) or np.any(r < 0):
        raise InvariantError("filtration values must be nonnegative and nondecreasing")
    tri = filt.triangulation
    e = tri.edges
    if np.any(filt.vertex_pos[e[:, 0]] > filt.edge_pos) or np.any(filt.vertex_pos[e[:, 1]] > filt.edge_pos):
        raise InvariantError("an edge precedes one of its vertices")
    if np.any(filt.edge_pos[tri.triangle_edges] > filt.triangle_pos[:, None]):
        raise InvariantError("a triangle precedes one of its edges")


def build_persistence_tree(filt: Filtration) -> PersistenceTree:
    validate_filtration(filt)
    tri = filt.triangulation
    T = len(tri.triangles)
    outer = T
    # filtration index of each node; the outer region comes last
    node_pos = np.append(filt.triangle_pos, len(filt)).tolist()
    parent = np.full(T + 1, -1, dtype=np.int64)
    label = np.full(T + 1, np.nan)
    link = np.full(T + 1, -1, dtype=np.int64)
    uf = _UnionFind(T + 1)
    top = list(range(T + 1))  # tree root of each union-find class
    edge_tris = np.where(tri.edge_triangles < 0, outer, tri.edge_triangles).tolist()
    edge_r = filt.edge_r.tolist()
    for e in np.argsort(filt.edge_pos)[::-1].tolist():
        s, t = edge_tris[e]
        cs, ct = uf.find(s), uf.find(t)
        if cs == ct:
            continue
        rs, rt = top[cs], top[ct]
        if node_pos[rs] > node_pos[rt]:
            hi, lo = rs, rt
        else:
            hi, lo = rt, rs
        parent[lo] = hi
        label[lo] = edge_r[e]
        link[lo] = e
        if top[cs] == lo:
            uf.parent[cs] = ct
        else:
            uf.parent[ct] = cs
    if np.count_nonzero(parent < 0) != 1 or parent[outer] != -1:
        raise InvariantError("persistence tree is not a single tree rooted at the outer region")
    order = np.argsort(parent[:-1], kind="stable")
    child_idx = np.arange(T)[order]
    counts = np.bincount(parent[:-1], minlength=T + 1)
    child_ptr = np.concatenate([[0], np.cumsum(counts)])
    size = _subtree_sizes(parent, filt.triangle_pos)
    node_r = np.append(filt.triangle_r, np.inf)
    return PersistenceTree(filt, parent, label, link, node_r, child_ptr, child_idx, size)


def _subtree_sizes(parent: np.ndarray, triangle_pos: np.ndarray) -> np.ndarray:
    # children always enter the filtration before their parent
    size = np.ones(len(parent), dtype=np.int64)
    for v in np.argsort(triangle_pos).tolist():
        size[parent[v]] += size[v]
    size[-1] -= 1  # the outer region is not a triangle
    return size


def diagram_h1(tree: PersistenceTree) -> List[PersistencePair]:
    """One pair per tree link: (edge value, node value).  Includes b == d pairs."""
    T = tree.n_nodes - 1
    root = tree.root
    pairs = []
    for v in range(T):
        pairs.append(
            PersistencePair(
                birth=float(tree.label[v]),
                death=float(tree.node_r[v]),
                dim=1,
                birth_simplex=int(tree.edge[v]),
                death_simplex=v,
                root_child=bool(tree.parent[v] == root),
            )
        )
    return pairs


def diagram_h0(filt: Filtration) -> List[PersistencePair]:
    """Components merge along edges in filtration order; one pair never dies."""
    tri = filt.triangulation
    uf = _UnionFind(filt.n_vertices)
    edges = tri.edges.tolist()
    edge_r = filt.edge_r.tolist()
    pairs = []
    for e in np.argsort(filt.edge_pos).tolist():
        a, b = edges[e]
        ra, rb = uf.find(a), uf.find(b)
        if ra == rb:
            continue
        # all components are born at 0; keep the lower vertex id as representative
        if ra < rb:
            uf.parent[rb] = ra
            dead = rb
        else:
            uf.parent[ra] = rb
            dead = ra
        pairs.append(PersistencePair(0.0, float(edge_r[e]), 0, birth_simplex=dead, death_simplex=e))
    pairs.append(PersistencePair(0.0, float("inf"), 0))
    return pairs
