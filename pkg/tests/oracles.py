"""Independent reference implementations used only by the tests."""
from itertools import combinations

import numpy as np


def reduction_diagrams(entries):
    """Standard Z/2 column reduction of the full boundary matrix.

    ``entries`` is a list of ``(r, simplex)`` with simplices as sorted tuples,
    in filtration order.  Returns ``{0: [(b, d), ...], 1: [...]}`` with
    unpaired classes given death ``inf``.
    """
    index = {s: i for i, (_, s) in enumerate(entries)}
    columns = []
    for _, s in entries:
        if len(s) == 1:
            columns.append(set())
        else:
            columns.append({index[f] for f in combinations(s, len(s) - 1)})
    low_to_col = {}
    paired = set()
    pairs = {0: [], 1: []}
    for j, col in enumerate(columns):
        while col:
            low = max(col)
            if low not in low_to_col:
                break
            col ^= columns[low_to_col[low]]
        if col:
            low = max(col)
            low_to_col[low] = j
            paired.update((low, j))
            dim = len(entries[low][1]) - 1
            pairs[dim].append((entries[low][0], entries[j][0]))
    for i, (r, s) in enumerate(entries):
        if i not in paired and len(s) - 1 in pairs:
            pairs[len(s) - 1].append((r, float("inf")))
    return pairs


def in_alpha_complex(points, simplex, r):
    """Direct test of the definition: does the intersection over u in the
    simplex of (closed ball B_u(r) ∩ closed Voronoi cell V_u) meet?

    Voronoi cells are handled as half-plane constraints, so nothing here
    depends on a triangulation.
    """
    pts = np.asarray(points, float)
    s = list(simplex)
    others = [i for i in range(len(pts)) if i not in s]
    if len(s) == 1:
        return r >= 0
    if len(s) == 3:
        a, b, c = pts[s]
        m = 2 * np.array([b - a, c - a])
        x = np.linalg.solve(m, np.array([b @ b - a @ a, c @ c - a @ a]))
        R = np.linalg.norm(x - a)
        d_other = np.linalg.norm(pts[others] - x, axis=1)
        return bool(np.all(d_other >= R) and R <= r)
    a, b = pts[s]
    mid = (a + b) / 2
    direction = np.array([-(b - a)[1], (b - a)[0]])
    direction /= np.linalg.norm(direction)
    lo, hi = -np.inf, np.inf
    # |x - a|^2 <= |x - p|^2 is linear in x: 2 x.(p - a) <= |p|^2 - |a|^2
    for p in pts[others]:
        g = 2 * (p - a)
        h = p @ p - a @ a
        coef = g @ direction
        rhs = h - g @ mid
        if abs(coef) < 1e-15:
            if rhs < 0:
                return False
            continue
        t = rhs / coef
        if coef > 0:
            hi = min(hi, t)
        else:
            lo = max(lo, t)
    if lo > hi:
        return False
    t = min(max(0.0, lo), hi)
    dist = np.hypot(np.linalg.norm(b - a) / 2, t)
    return bool(dist <= r)


def exhaustive_min_volume(filt, pair_birth_edge, pair_death_tri):
    """Smallest 2-chain V containing the death triangle such that the boundary
    of V avoids every edge entering strictly between birth and death and
    contains the birth edge.  All solutions of that affine system over Z/2 are
    enumerated; returns the minimal size.
    """
    tri = filt.triangulation
    b = filt.edge_pos[pair_birth_edge]
    d = filt.triangle_pos[pair_death_tri]
    free = [t for t in range(len(tri.triangles)) if b < filt.triangle_pos[t] < d]
    rows = [e for e in range(len(tri.edges)) if b < filt.edge_pos[e] < d]
    rows.append(pair_birth_edge)
    row_of = {e: i for i, e in enumerate(rows)}
    nr = len(rows)

    def bvec(t):
        v = np.zeros(nr, dtype=np.uint8)
        for e in tri.triangle_edges[t]:
            if e in row_of:
                v[row_of[e]] ^= 1
        return v

    A = np.array([bvec(t) for t in free], dtype=np.uint8).T.reshape(nr, len(free))
    target = bvec(pair_death_tri)
    target[-1] ^= 1  # want (boundary of V)[birth edge] == 1, elsewhere 0
    # solve A x = target over GF(2): x0 + nullspace
    M = np.concatenate([A, target[:, None]], axis=1).copy()
    nfree = len(free)
    pivots = []
    row = 0
    for col in range(nfree):
        piv = next((i for i in range(row, nr) if M[i, col]), None)
        if piv is None:
            continue
        M[[row, piv]] = M[[piv, row]]
        for i in range(nr):
            if i != row and M[i, col]:
                M[i] ^= M[row]
        pivots.append(col)
        row += 1
    if any(M[i, -1] and not M[i, :-1].any() for i in range(nr)):
        return None
    x0 = np.zeros(nfree, dtype=np.uint8)
    for i, col in enumerate(pivots):
        x0[col] = M[i, -1]
    basis = []
    for col in range(nfree):
        if col in pivots:
            continue
        v = np.zeros(nfree, dtype=np.uint8)
        v[col] = 1
        for i, pc in enumerate(pivots):
            v[pc] = M[i, col]
        basis.append(v)
    best = None
    k = len(basis)
    assert k <= 20, "solution space too large to enumerate"
    B = np.array(basis, dtype=np.uint8).reshape(k, nfree)
    for mask in range(1 << k):
        coeff = np.array([(mask >> i) & 1 for i in range(k)], dtype=np.uint8)
        x = x0 ^ (coeff @ B % 2).astype(np.uint8) if k else x0
        size = 1 + int(x.sum())
        if best is None or size < best:
            best = size
    return best
