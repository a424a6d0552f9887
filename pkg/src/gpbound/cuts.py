"""Cutting planes: records, closed-form projectors, separation, clustering.

Three families are used. For the equipartition relaxation (order n,
entries of X live in [-1/k, (k-1)/k]):

  triangle   X_ij + X_il <= (k-1)/k + X_jl           (nodes i; j < l)
  indep_set  sum_{p<q in I} X_pq >= (1-k)/2          (|I| = k+1)

For the bisection relaxation (order 2n+1, first row/column is the arrow):

  bqp        X_il + X_jl <= X_ll + X_ij              (i, j, l >= 1 distinct)

Each family has an exact Euclidean projector onto the single-cut halfspace
(intersected, for bqp, with the arrow identities tying X_ll, X_1l and the
complementary copy l* of l). Projectors only touch the cut's support.
"""

from __future__ import annotations

import heapq
from collections import defaultdict
from dataclasses import dataclass

import numpy as np

__all__ = [
    "Cut",
    "CutClustering",
    "TRIANGLE",
    "INDEP_SET",
    "BQP",
    "triangle_cut",
    "indep_set_cut",
    "bqp_cut",
    "cut_violation",
    "project_triangle",
    "project_indepset",
    "project_bqp",
    "separate_triangles",
    "separate_indepset_exact",
    "separate_indepset_greedy",
    "separate_indepset_prob",
    "separate_bqp",
    "inverse_weight_choice",
    "cluster_cuts",
]

TRIANGLE = "triangle"
INDEP_SET = "indep_set"
BQP = "bqp"

_KIND_RANK = {TRIANGLE: 0, INDEP_SET: 1, BQP: 2}

SEPARATION_TOL = 1e-3
ARROW_TOL = 1e-6


@dataclass(frozen=True)
class Cut:
    """One cutting plane, 0-based matrix indices.

    nodes: (i, j, l) for triangle (j < l), the sorted member tuple for
    indep_set, (i, j, l, lstar) for bqp (i < j). support lists the
    canonical (row <= col) matrix positions the cut's projector may touch.
    """

    kind: str
    nodes: tuple[int, ...]
    support: tuple[tuple[int, int], ...]
    violation_at_add: float = 0.0

    @property
    def key(self):
        return (self.kind, self.nodes)


def _pair(a: int, b: int) -> tuple[int, int]:
    return (a, b) if a <= b else (b, a)


def triangle_cut(i: int, j: int, l: int, violation: float = 0.0) -> Cut:
    if len({i, j, l}) != 3:
        raise ValueError("triangle needs three distinct indices")
    if j > l:
        j, l = l, j
    support = (_pair(i, j), _pair(i, l), _pair(j, l))
    return Cut(TRIANGLE, (i, j, l), support, violation)


def indep_set_cut(members, violation: float = 0.0) -> Cut:
    nodes = tuple(sorted(members))
    if len(set(nodes)) != len(nodes) or len(nodes) < 3:
        raise ValueError("independent set needs >= 3 distinct members")
    support = tuple(
        (nodes[a], nodes[b])
        for a in range(len(nodes)) for b in range(a + 1, len(nodes))
    )
    return Cut(INDEP_SET, nodes, support, violation)


def bqp_cut(i: int, j: int, l: int, n: int, violation: float = 0.0) -> Cut:
    """BQP cut on the order-(2n+1) bisection matrix.

    lstar is the complementary copy of l (same vertex, other part);
    the projector also touches the arrow entries of l and lstar.
    """
    if i > j:
        i, j = j, i
    if len({i, j, l}) != 3 or min(i, j, l) < 1 or max(i, j, l) > 2 * n:
        raise ValueError("bqp cut needs distinct indices in 1..2n")
    lstar = 1 + (l + n - 1) % (2 * n)
    support = tuple(sorted({
        _pair(i, l), _pair(j, l), _pair(i, j),
        (l, l), (0, l), (lstar, lstar), (0, lstar),
    }))
    return Cut(BQP, (i, j, l, lstar), support, violation)


def cut_violation(X: np.ndarray, cut: Cut, k: int | None = None) -> float:
    """Amount by which X violates the cut (positive means violated)."""
    if cut.kind == TRIANGLE:
        i, j, l = cut.nodes
        return float(X[i, j] + X[i, l] - X[j, l] - (k - 1.0) / k)
    if cut.kind == INDEP_SET:
        s = sum(X[p, q] for p, q in cut.support)
        return float((1.0 - k) / 2.0 - s)
    i, j, l, _ = cut.nodes
    return float(X[i, l] + X[j, l] - X[i, j] - X[l, l])


# ---------------------------------------------------------------------------
# projection kernels (shared by the per-cut projectors and the batched
# Dykstra engine; both call the same code paths so results are identical)
# ---------------------------------------------------------------------------

def _triangle_kernel(a, b, g, k):
    """Project gathered triples (a, b, g) = (M_ij, M_il, M_jl) onto
    a + b <= (k-1)/k + g. Inactive triples pass through unchanged."""
    c = (k - 1.0) / k
    s = a + b - g
    # a and b move down by v, g up by v; inactive triples get v = 0
    v = np.where(s > c, (s - c) * (1.0 / 3.0), 0.0)
    return a - v, b - v, g + v


def _indepset_kernel(vals, k):
    """Rows of vals hold the gathered pairwise entries of one independent
    set each; rows summing below (1-k)/2 get a uniform shift back onto
    the hyperplane."""
    s = vals.sum(axis=1)
    mask = s < (1.0 - k) / 2.0
    shift = -(k - 1.0) / (k * (k + 1.0)) - (2.0 / (k * (k + 1.0))) * s
    return np.where(mask[:, None], vals + shift[:, None], vals)


def _bqp_kernel(v_il, v_jl, v_ij, v_ll, v_0l, v_ss, v_0s):
    """Project gathered bqp-cut entries onto the cut halfspace within the
    arrow-consistent slice (X_ll = X_1l, X_ll + X_{l*l*} = 1).

    Returns the 7 updated value arrays in the same order as the inputs:
    (i,l), (j,l), (i,j), (l,l), (1,l), (l*,l*), (1,l*) positions.
    """
    u = v_ll - v_ss
    w = v_0l - v_0s
    t = 0.05 * u + 0.1 * w
    mu1 = u / 6.0 + w / 3.0 + 0.5
    h = v_il + v_jl - v_ij
    hard = h - mu1 > 0.0

    q = np.where(hard, t + 0.15 - 0.3 * h, 0.0)
    mu = np.where(hard, 0.1 * h + 3.0 * t + 0.45, mu1)
    return v_il + q, v_jl + q, v_ij - q, mu, mu, 1.0 - mu, 1.0 - mu


def _check_arrow_consistent(M: np.ndarray, tol: float = ARROW_TOL) -> None:
    """The bqp projector is only exact on matrices whose corner is 1,
    whose first row equals the diagonal, and whose paired diagonal
    entries sum to 1. All iterates in this solver satisfy that; anything
    else is a usage bug, hence an assertion."""
    N = M.shape[0]
    n = (N - 1) // 2
    if N != 2 * n + 1:
        raise AssertionError("bqp cuts need an odd matrix order 2n+1")
    d = M.diagonal()
    if abs(M[0, 0] - 1.0) > tol:
        raise AssertionError(f"corner entry {M[0, 0]} != 1")
    if np.max(np.abs(M[0, 1:] - d[1:])) > tol:
        raise AssertionError("first row does not match the diagonal")
    if np.max(np.abs(d[1:n + 1] + d[n + 1:] - 1.0)) > tol:
        raise AssertionError("paired diagonal entries do not sum to 1")


# ---------------------------------------------------------------------------
# single-cut projectors
# ---------------------------------------------------------------------------

def project_triangle(M: np.ndarray, cut: Cut, k: int) -> np.ndarray:
    """Exact projection onto one triangle-cut halfspace.

    Entries outside the cut's support are returned unchanged.
    """
    i, j, l = cut.nodes
    a, b, g = _triangle_kernel(
        np.array([M[i, j]]), np.array([M[i, l]]), np.array([M[j, l]]), k
    )
    X = np.array(M, dtype=float, copy=True)
    X[i, j] = X[j, i] = a[0]
    X[i, l] = X[l, i] = b[0]
    X[j, l] = X[l, j] = g[0]
    return X


def project_indepset(M: np.ndarray, cut: Cut, k: int) -> np.ndarray:
    """Exact projection onto one independent-set-cut halfspace."""
    rows = np.array([p for p, _ in cut.support])
    cols = np.array([q for _, q in cut.support])
    vals = _indepset_kernel(M[rows, cols][None, :], k)[0]
    X = np.array(M, dtype=float, copy=True)
    X[rows, cols] = vals
    X[cols, rows] = vals
    return X


def project_bqp(M: np.ndarray, cut: Cut) -> np.ndarray:
    """Exact projection onto one bqp-cut halfspace within the
    arrow-consistent slice. Asserts the input is arrow consistent."""
    _check_arrow_consistent(M)
    i, j, l, ls = cut.nodes
    gathered = [
        np.array([M[i, l]]), np.array([M[j, l]]), np.array([M[i, j]]),
        np.array([M[l, l]]), np.array([M[0, l]]),
        np.array([M[ls, ls]]), np.array([M[0, ls]]),
    ]
    o_il, o_jl, o_ij, o_l, o_0l, o_s, o_0s = _bqp_kernel(*gathered)
    X = np.array(M, dtype=float, copy=True)
    X[i, l] = X[l, i] = o_il[0]
    X[j, l] = X[l, j] = o_jl[0]
    X[i, j] = X[j, i] = o_ij[0]
    X[l, l] = o_l[0]
    X[0, l] = X[l, 0] = o_0l[0]
    X[ls, ls] = o_s[0]
    X[0, ls] = X[ls, 0] = o_0s[0]
    return X


# ---------------------------------------------------------------------------
# separation
# ---------------------------------------------------------------------------

def _top_cuts(records, limit):
    """records: list of (violation, kind_rank, nodes, builder). Sort by
    violation descending, ties by kind then lexicographic nodes."""
    records.sort(key=lambda r: (-r[0], r[1], r[2]))
    if limit is not None:
        records = records[:limit]
    return [build() for _, _, _, build in records]


def separate_triangles(X: np.ndarray, k: int, limit: int | None = None,
                       tol: float = SEPARATION_TOL) -> list[Cut]:
    """Enumerate all violated triangle cuts, most violated first.

    Full O(n^3) scan, vectorized per apex; exact. Ties break toward
    lexicographically smaller (i, j, l).
    """
    n = X.shape[0]
    c = (k - 1.0) / k
    ju, lu = np.triu_indices(n, 1)
    recs = []
    for i in range(n):
        row = X[i]
        viol = row[ju] + row[lu] - X[ju, lu] - c
        ok = (viol > tol) & (ju != i) & (lu != i)
        if not ok.any():
            continue
        for v, j, l in zip(viol[ok], ju[ok], lu[ok]):
            nodes = (i, int(j), int(l))
            recs.append((float(v), _KIND_RANK[TRIANGLE], nodes,
                         _make_triangle(nodes, float(v))))
    return _top_cuts(recs, limit)


def _make_triangle(nodes, v):
    def build():
        return triangle_cut(*nodes, violation=v)
    return build


def _make_indepset(nodes, v):
    def build():
        return indep_set_cut(nodes, violation=v)
    return build


def _make_bqp(nodes, v, n):
    def build():
        return bqp_cut(nodes[0], nodes[1], nodes[2], n, violation=v)
    return build


def separate_indepset_exact(X: np.ndarray, k: int, limit: int | None = None,
                            tol: float = SEPARATION_TOL) -> list[Cut]:
    """Exact independent-set separation by enumeration; k in {2, 3} only
    (sets of size 3 or 4; beyond that enumeration is not practical)."""
    if k not in (2, 3):
        raise ValueError("exact independent-set separation needs k in {2, 3}")
    n = X.shape[0]
    thresh = (1.0 - k) / 2.0
    recs = []
    if k == 2:
        for i in range(n - 2):
            idx = np.arange(i + 1, n)
            if idx.size < 2:
                continue
            a, b = np.triu_indices(idx.size, 1)
            s = X[i, idx][a] + X[i, idx][b] + X[idx[a], idx[b]]
            viol = thresh - s
            ok = viol > tol
            for v, p, q in zip(viol[ok], idx[a[ok]], idx[b[ok]]):
                nodes = (i, int(p), int(q))
                recs.append((float(v), _KIND_RANK[INDEP_SET], nodes,
                             _make_indepset(nodes, float(v))))
    else:
        for i in range(n - 3):
            for j in range(i + 1, n - 2):
                idx = np.arange(j + 1, n)
                if idx.size < 2:
                    continue
                a, b = np.triu_indices(idx.size, 1)
                col = X[i, idx] + X[j, idx]
                s = X[i, j] + col[a] + col[b] + X[idx[a], idx[b]]
                viol = thresh - s
                ok = viol > tol
                for v, p, q in zip(viol[ok], idx[a[ok]], idx[b[ok]]):
                    nodes = (i, j, int(p), int(q))
                    recs.append((float(v), _KIND_RANK[INDEP_SET], nodes,
                                 _make_indepset(nodes, float(v))))
    return _top_cuts(recs, limit)


def separate_indepset_greedy(X: np.ndarray, k: int, limit: int | None = None,
                             tol: float = SEPARATION_TOL) -> list[Cut]:
    """Greedy heuristic: grow a size-(k+1) set from every start vertex,
    always adding the vertex with the smallest total affinity to the
    current members (ties toward the lowest index)."""
    n = X.shape[0]
    if n < k + 1:
        return []
    Y = X + 1.0 / k
    found = {}
    for v in range(n):
        members = [v]
        score = Y[v].copy()
        score[v] = np.inf
        while len(members) < k + 1:
            u = int(np.argmin(score))
            members.append(u)
            score += Y[u]
            score[u] = np.inf
        nodes = tuple(sorted(members))
        if nodes in found:
            continue
        s = sum(X[p, q] for a, p in enumerate(nodes)
                for q in nodes[a + 1:])
        viol = (1.0 - k) / 2.0 - s
        if viol > tol:
            found[nodes] = float(viol)
    recs = [(v, _KIND_RANK[INDEP_SET], nd, _make_indepset(nd, v))
            for nd, v in found.items()]
    return _top_cuts(recs, limit)


def inverse_weight_choice(rng, p) -> int:
    """Draw an index with probability proportional to 1/p (p positive)."""
    w = 1.0 / np.asarray(p, dtype=float)
    cdf = np.cumsum(w)
    u = rng.random() * cdf[-1]
    return int(min(np.searchsorted(cdf, u, side="right"), w.size - 1))


def separate_indepset_prob(X: np.ndarray, k: int, N_R: int, eps: float,
                           seed: int,
                           tol: float = SEPARATION_TOL) -> list[Cut]:
    """Randomized independent-set separation.

    Repeats N_R times: start at a uniform vertex, then k times draw the
    next member with probability inversely proportional to its accumulated
    affinity (plus eps) to the members so far. Larger eps washes out the
    affinities; in the limit the draws are uniform. Distinct violated sets
    are returned, most violated first. Deterministic for a fixed seed.
    """
    rng = np.random.default_rng(seed)
    n = X.shape[0]
    if n < k + 1:
        return []
    Y = X + 1.0 / k
    found = {}
    for _ in range(N_R):
        v = int(rng.integers(n))
        members = [v]
        taken = np.zeros(n, dtype=bool)
        taken[v] = True
        p = Y[v] + eps
        for _ in range(k):
            free = np.flatnonzero(~taken)
            u = int(free[inverse_weight_choice(rng, p[free])])
            members.append(u)
            taken[u] = True
            p = p + Y[u]
        nodes = tuple(sorted(members))
        if nodes in found:
            continue
        s = sum(X[a, b] for x, a in enumerate(nodes) for b in nodes[x + 1:])
        viol = (1.0 - k) / 2.0 - s
        if viol > tol:
            found[nodes] = float(viol)
    recs = [(v, _KIND_RANK[INDEP_SET], nd, _make_indepset(nd, v))
            for nd, v in found.items()]
    return _top_cuts(recs, None)


def separate_bqp(X: np.ndarray, limit: int | None = None,
                 tol: float = SEPARATION_TOL) -> list[Cut]:
    """Enumerate all violated bqp cuts on an order-(2n+1) matrix."""
    N = X.shape[0]
    n = (N - 1) // 2
    iu, ju = np.triu_indices(N, 1)
    inner = iu >= 1
    iu, ju = iu[inner], ju[inner]
    recs = []
    for l in range(1, N):
        col = X[:, l]
        viol = col[iu] + col[ju] - X[iu, ju] - X[l, l]
        ok = (viol > tol) & (iu != l) & (ju != l)
        if not ok.any():
            continue
        for v, i, j in zip(viol[ok], iu[ok], ju[ok]):
            nodes = (int(i), int(j), l)
            recs.append((float(v), _KIND_RANK[BQP], nodes,
                         _make_bqp(nodes, float(v), n)))
    return _top_cuts(recs, limit)


# ---------------------------------------------------------------------------
# clustering
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CutClustering:
    """A partition of a cut family into support-disjoint classes.

    clusters holds index tuples into cuts; within one cluster no two cuts
    share a matrix position, so their projectors commute and can be
    applied in one vectorized pass. k carries the equipartition parameter
    needed by the triangle/indep_set projection kernels (None for BP).
    """

    cuts: tuple[Cut, ...] = ()
    clusters: tuple[tuple[int, ...], ...] = ()
    k: int | None = None

    def __post_init__(self):
        for group in self.clusters:
            seen = set()
            for idx in group:
                for pos in self.cuts[idx].support:
                    if pos in seen:
                        raise ValueError(
                            "cuts within a cluster must have disjoint support"
                        )
                    seen.add(pos)


def cluster_cuts(cuts, k: int | None = None) -> CutClustering:
    """Greedy saturation coloring of the support-conflict graph.

    Cuts sharing any matrix position conflict. Vertices are colored in
    order of decreasing saturation (number of distinct neighbour colors),
    ties by degree then index, which keeps the number of clusters small
    in practice. Deterministic.
    """
    cuts = tuple(cuts)
    if not cuts:
        return CutClustering((), (), k)
    buckets = defaultdict(list)
    for idx, c in enumerate(cuts):
        for pos in c.support:
            buckets[pos].append(idx)
    neighbors = [set() for _ in cuts]
    for members in buckets.values():
        if len(members) > 1:
            for a in members:
                neighbors[a].update(members)
    for i, nb in enumerate(neighbors):
        nb.discard(i)

    m = len(cuts)
    color = [-1] * m
    sat = [set() for _ in range(m)]
    deg = [len(nb) for nb in neighbors]
    heap = [(0, -deg[i], i) for i in range(m)]
    heapq.heapify(heap)
    while heap:
        negs, _, i = heapq.heappop(heap)
        if color[i] != -1 or -negs != len(sat[i]):
            continue
        c = 0
        while c in sat[i]:
            c += 1
        color[i] = c
        for j in neighbors[i]:
            if color[j] == -1 and c not in sat[j]:
                sat[j].add(c)
                heapq.heappush(heap, (-len(sat[j]), -deg[j], j))
    ncolors = max(color) + 1
    groups = [[] for _ in range(ncolors)]
    for i, c in enumerate(color):
        groups[c].append(i)
    return CutClustering(cuts, tuple(tuple(g) for g in groups), k)
