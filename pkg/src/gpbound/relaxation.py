"""Facially reduced DNN relaxations of equipartition and bisection.

For k-equipartition the lifted matrix has the graph's order n and lives in

    X_EP = { diag(X) = (k-1)/k * 1,  -1/k <= X_ij <= (k-1)/k },

for bisection the lift is of order 2n+1 (leading 1, then the indicator of
each part) and lives in

    X_BP = { X_11 = 1, gangster entries = 0, arrow: X e_1 = diag(X),
             part sizes on the diagonal blocks, 0 <= X <= 1 }.

Both sets come with an exact Euclidean projector, and the PSD part of the
relaxation is pushed onto a smaller face via an orthonormal basis V.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .graph import GraphInstance, PartitionSpec, laplacian
from .linalg import orthonormal_basis, sym

__all__ = [
    "BaseSetDescriptor",
    "Relaxation",
    "build_relaxation",
    "project_base_ep",
    "project_base_bp",
    "project_capped_simplex",
    "gangster_pairs",
    "partition_constraint_matrix",
    "bisection_coupling_matrix",
    "lift_equipartition",
    "lift_bisection",
]


@dataclass(frozen=True, eq=False)
class BaseSetDescriptor:
    """Everything a base-set projector needs to know.

    problem is "EP" or "BP". EP uses (k, diag_value, box_lo, box_hi);
    BP uses (n, m, gangster) where gangster holds 0-based row/col index
    arrays covering both orientations of the forced-zero entries.
    """

    problem: str
    k: int = 0
    diag_value: float = 0.0
    box_lo: float = 0.0
    box_hi: float = 1.0
    n: int = 0
    m: tuple[int, int] = (0, 0)
    gangster: tuple[np.ndarray, np.ndarray] | None = None


@dataclass(eq=False)
class Relaxation:
    """Compiled relaxation data for one (graph, partition) pair.

    Lbar is the unscaled objective matrix (<Lbar, X> equals the cut weight
    on feasible lifts), Lbar_scaled = scale * Lbar is what the inner solver
    actually works with. V has orthonormal columns spanning the reduced
    face; feasible_trace is tr(X) for every feasible lifted X.
    """

    problem: str
    n: int
    order: int
    spec: PartitionSpec
    Lbar: np.ndarray
    Lbar_scaled: np.ndarray
    V: np.ndarray
    scale: float
    base: BaseSetDescriptor
    feasible_trace: float
    integer_objective: bool
    name: str = "graph"


def _ep_scale(L: np.ndarray, n: int, k: int) -> float:
    norm = float(np.linalg.norm(L))
    if norm == 0.0:
        return 1.0
    if n <= 400:
        return 1.0 / norm
    if n <= 800:
        return k / norm
    return n / (k * norm)


def gangster_pairs(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Index arrays of the forced-zero entries of the order-(2n+1) lift.

    Entry (q, n+q) must vanish for q = 1..n (a vertex cannot sit in both
    parts); both orientations are listed so X[rows, cols] = 0 zeroes the
    symmetric pair.
    """
    q = np.arange(1, n + 1)
    rows = np.concatenate([q, q + n])
    cols = np.concatenate([q + n, q])
    return rows, cols


def build_relaxation(g: GraphInstance, spec: PartitionSpec,
                     scale: float | None = None) -> Relaxation:
    """Assemble objective, reduced-face basis and base set for g."""
    if spec.n != g.n:
        raise ValueError(
            f"part sizes {spec.m} sum to {spec.n}, graph has n={g.n}"
        )
    L = laplacian(g)
    integer = g.has_integer_weights()
    if spec.kind == "equipartition":
        n, k = g.n, spec.k
        Lbar = 0.5 * L
        W = np.vstack([np.eye(n - 1), -np.ones((1, n - 1))])
        V = orthonormal_basis(W)
        S = _ep_scale(L, n, k) if scale is None else float(scale)
        base = BaseSetDescriptor(
            problem="EP", k=k, diag_value=(k - 1.0) / k,
            box_lo=-1.0 / k, box_hi=(k - 1.0) / k,
        )
        return Relaxation(
            problem="EP", n=n, order=n, spec=spec, Lbar=Lbar,
            Lbar_scaled=S * Lbar, V=V, scale=S, base=base,
            feasible_trace=n * (k - 1.0) / k, integer_objective=integer,
            name=g.name,
        )

    n = g.n
    m1, m2 = spec.m
    order = 2 * n + 1
    Lbar = np.zeros((order, order))
    Lbar[1:n + 1, 1:n + 1] = 0.5 * L
    Lbar[n + 1:, n + 1:] = 0.5 * L
    Vn = np.vstack([np.eye(n - 1), -np.ones((1, n - 1))])
    V2 = np.array([[1.0], [-1.0]])
    W = np.zeros((order, n))
    W[0, 0] = 1.0
    W[1:n + 1, 0] = m1 / n
    W[n + 1:, 0] = m2 / n
    W[1:, 1:] = np.kron(V2, Vn)
    V = orthonormal_basis(W)
    S = 1.0 if scale is None else float(scale)
    base = BaseSetDescriptor(
        problem="BP", n=n, m=(m1, m2), gangster=gangster_pairs(n)
    )
    return Relaxation(
        problem="BP", n=n, order=order, spec=spec, Lbar=Lbar,
        Lbar_scaled=S * Lbar, V=V, scale=S, base=base,
        feasible_trace=n + 1.0, integer_objective=integer, name=g.name,
    )


# ---------------------------------------------------------------------------
# base-set projectors
# ---------------------------------------------------------------------------

def project_base_ep(M: np.ndarray, d: BaseSetDescriptor) -> np.ndarray:
    """Exact projection onto X_EP: clip to the box, pin the diagonal."""
    X = np.clip(M, d.box_lo, d.box_hi)
    np.fill_diagonal(X, d.diag_value)
    return sym(X)


def project_base_bp(M: np.ndarray, d: BaseSetDescriptor) -> np.ndarray:
    """Exact projection onto X_BP.

    The set splits orthogonally: the corner entry is pinned at 1, the
    gangster entries at 0, the remaining inner block is clipped to [0, 1],
    and the tied arrow/diagonal entries (X_1t = X_tt, one per vertex copy,
    coupled across the two copies by X_tt + X_{t+n,t+n} = 1 and the part
    size sum_t X_tt = m1) reduce to a capped-simplex projection of the
    weighted average of the entries they tie together.
    """
    n = d.n
    diag = M.diagonal()
    y = project_capped_simplex(
        (diag[1:n + 1] - diag[n + 1:]) / 6.0
        + (M[0, 1:n + 1] - M[0, n + 1:]) / 3.0 + 0.5,
        float(d.m[0]),
    )
    X = np.array(M, dtype=float, copy=True)
    X[0, :] = 0.0
    X[:, 0] = 0.0
    np.fill_diagonal(X, 0.0)
    rows, cols = d.gangster
    X[rows, cols] = 0.0
    np.clip(X, 0.0, 1.0, out=X)
    X[0, 0] = 1.0
    i1 = np.arange(1, n + 1)
    i2 = np.arange(n + 1, 2 * n + 1)
    X[0, i1] = X[i1, 0] = X[i1, i1] = y
    X[0, i2] = X[i2, 0] = X[i2, i2] = 1.0 - y
    return sym(X)


def project_capped_simplex(y: np.ndarray, m: float) -> np.ndarray:
    """Euclidean projection of y onto {x : sum x = m, 0 <= x <= 1}.

    The minimizer is x = clip(y - tau, 0, 1) where tau solves
    sum_i clip(y_i - tau, 0, 1) = m. The left side is piecewise linear and
    non-increasing in tau with breakpoints {y_i - 1, y_i}, so tau is found
    exactly by scanning the sorted breakpoints. O(n log n).
    """
    y = np.asarray(y, dtype=float)
    n = y.size
    if not 0.0 <= m <= n:
        raise ValueError(f"target sum {m} outside [0, {n}]")
    if n == 0:
        return y.copy()
    bps = np.concatenate([y - 1.0, y])
    bps.sort()
    g = _capped_sums(y, bps)
    # g[0] = n >= m >= 0 = g[-1]; find the segment containing m
    j = int(np.searchsorted(-g, -m, side="left"))
    if g[j] == m or j == 0:
        tau = bps[j]
    else:
        slope = (g[j] - g[j - 1]) / (bps[j] - bps[j - 1])
        tau = bps[j - 1] + (m - g[j - 1]) / slope
    return np.clip(y - tau, 0.0, 1.0)


def _capped_sums(y: np.ndarray, taus: np.ndarray) -> np.ndarray:
    """sum_i clip(y_i - tau, 0, 1) evaluated at every tau at once."""
    n = y.size
    ys = np.sort(y)
    cum = np.concatenate([[0.0], np.cumsum(ys)])
    hi = np.searchsorted(ys, taus + 1.0, side="left")   # y_i >= tau+1 -> at 1
    lo = np.searchsorted(ys, taus, side="right")        # y_i <= tau  -> at 0
    free = np.maximum(hi - lo, 0)
    free_sum = cum[hi] - cum[np.minimum(lo, hi)]
    return (n - hi) + free_sum - free * taus


# ---------------------------------------------------------------------------
# structural helpers (used by tests and the bound certificates)
# ---------------------------------------------------------------------------

def partition_constraint_matrix(n: int, k: int) -> np.ndarray:
    """Constraint matrix of the assignment polytope on vec(P).

    Rows are the k part-size sums and the n row sums of the n-by-k
    assignment matrix (column-major vectorization). Its rank is n + k - 1.
    """
    return np.vstack([
        np.kron(np.eye(k), np.ones((1, n))),
        np.kron(np.ones((1, k)), np.eye(n)),
    ])


def bisection_coupling_matrix(n: int, m: tuple[int, int]) -> np.ndarray:
    """(n+2) x (2n+1) matrix annihilating every feasible bisection lift.

    Rows encode the two part sizes and, per vertex, membership in exactly
    one part; T @ (1; x1; x2) = 0 for every feasible indicator pair, and
    T V = 0 for the reduced-face basis V.
    """
    m1, m2 = m
    T = np.zeros((n + 2, 2 * n + 1))
    T[0, 0] = -m1
    T[0, 1:n + 1] = 1.0
    T[1, 0] = -m2
    T[1, n + 1:] = 1.0
    T[2:, 0] = -1.0
    T[2:, 1:n + 1] = np.eye(n)
    T[2:, n + 1:] = np.eye(n)
    return T


def lift_equipartition(labels, k: int) -> np.ndarray:
    """Feasible point of X_EP from a k-partition (0-based labels)."""
    a = np.asarray(labels)
    n = a.size
    P = np.zeros((n, k))
    P[np.arange(n), a] = 1.0
    return P @ P.T - np.full((n, n), 1.0 / k)


def lift_bisection(indicator) -> np.ndarray:
    """Feasible point of X_BP from a part-1 indicator vector."""
    x1 = np.asarray(indicator, dtype=float)
    u = np.concatenate([[1.0], x1, 1.0 - x1])
    return np.outer(u, u)
