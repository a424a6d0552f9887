"""Safe lower bounds from dual iterates, and primal reference values.

The certificate is

    lb = min_{X in X_T} <Lbar_scaled + Z, X>  -  c * lambda_max(V^T Z V)

unscaled by the objective scaling, minus a small safety margin. Here c is
the exact trace of every feasible lifted matrix, so the bound is valid for
any dual iterate Z, converged or not: feasible X = V R V^T with R PSD and
tr(R) = c gives <Z, X> = <V^T Z V, R> <= c * lambda_max(V^T Z V) by the
Rayleigh bound. lambda_max is over-estimated by a small multiple of the
matrix norm to absorb eigensolver error.

The minimum over X_T is an LP: entries of X are boxed, cut rows are the
cutting planes (plus, for bisection, the arrow/part-size equalities).
Exact mode solves it with the simplex; BoxRelaxed drops the coupling rows
and minimizes entrywise, which relaxes the feasible set further and so
stays valid.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .cuts import BQP, INDEP_SET, TRIANGLE, Cut
from .graph import GraphInstance, PartitionSpec, partition_cut_weight
from .linalg import lambda_max, sym
from .relaxation import Relaxation
from .simplex import kkt_residual, solve_lp

__all__ = [
    "EXACT",
    "BOX_RELAXED",
    "LpFailure",
    "BoundCertificate",
    "safe_lower_bound",
    "solve_lp_over_XT",
    "enumerate_optimum",
    "heuristic_upper_bound",
]

EXACT = "Exact"
BOX_RELAXED = "BoxRelaxed"

EIG_SAFETY = 1e-9
BOUND_MARGIN = 1e-6
LP_RESID_TOL = 1e-8
_ROW_VIOL_TOL = 1e-9
_ROW_BATCH = 64


class LpFailure(RuntimeError):
    """The simplex could not certify the LP part of a bound."""


@dataclass(frozen=True, eq=False)
class BoundCertificate:
    """One certified lower bound. lb is unscaled (original objective);
    lb_rounded is ceil(lb) when all edge weights are integral, else None.
    lp_value and lambda_term are the scaled-space ingredients."""

    lb: float
    lb_rounded: int | None
    lp_status: str
    lp_value: float
    lambda_term: float
    trace_constant: float
    Z_used: np.ndarray | None = None
    R_used: np.ndarray | None = None


def _norm_mode(mode: str) -> str:
    m = mode.replace("_", "").replace("-", "").lower()
    if m == "exact":
        return EXACT
    if m in ("boxrelaxed", "box"):
        return BOX_RELAXED
    raise ValueError(f"unknown bound mode {mode!r}")


def safe_lower_bound(R, Z, rel: Relaxation, cuts,
                     mode: str = EXACT) -> BoundCertificate:
    """Certify a lower bound from the dual iterate Z.

    Valid whatever the state of convergence. An LP failure in Exact mode
    degrades to BoxRelaxed with a warning rather than raising.
    """
    mode = _norm_mode(mode)
    C = rel.Lbar_scaled + Z
    lp_status = mode
    if mode == EXACT:
        try:
            val, _ = solve_lp_over_XT(C, rel, cuts)
        except LpFailure as exc:
            warnings.warn(
                f"LP certificate failed ({exc}); using the box relaxation",
                RuntimeWarning,
            )
            val, _ = _box_min(C, rel)
            lp_status = BOX_RELAXED
    else:
        val, _ = _box_min(C, rel)
    if np.any(Z):
        small = sym(rel.V.T @ Z @ rel.V)
        lam = lambda_max(small)
        lam += EIG_SAFETY * float(np.linalg.norm(small)) + 1e-15
    else:
        lam = 0.0
    lam_term = rel.feasible_trace * lam
    lb = (val - lam_term) / rel.scale - BOUND_MARGIN
    rounded = int(math.ceil(lb)) if rel.integer_objective else None
    return BoundCertificate(
        lb=lb, lb_rounded=rounded, lp_status=lp_status, lp_value=val,
        lambda_term=lam_term, trace_constant=rel.feasible_trace,
        Z_used=Z, R_used=R,
    )


# ---------------------------------------------------------------------------
# minimum of <C, X> over the cut-augmented polytope
# ---------------------------------------------------------------------------

def _box_min(C: np.ndarray, rel: Relaxation):
    """Entrywise minimum over the separable superset (no coupling rows)."""
    if rel.problem == "EP":
        d = rel.base
        n = rel.order
        iu, ju = np.triu_indices(n, 1)
        coeff = 2.0 * C[iu, ju]
        val = d.diag_value * float(np.trace(C))
        val += float(np.minimum(coeff * d.box_lo, coeff * d.box_hi).sum())
        X = np.where(C > 0.0, d.box_lo, d.box_hi)
        X = sym(X)
        np.fill_diagonal(X, d.diag_value)
        return val, X
    n = rel.n
    val = float(C[0, 0])
    a_coef = np.diag(C)[1:] + 2.0 * C[0, 1:]
    val += float(np.minimum(a_coef, 0.0).sum())
    a = (a_coef < 0.0).astype(float)
    iu, ju = np.triu_indices(rel.order, 1)
    inner = iu >= 1
    iu, ju = iu[inner], ju[inner]
    gang = (ju - iu == n) & (iu >= 1) & (iu <= n)
    coeff = 2.0 * C[iu, ju]
    val += float(np.minimum(coeff[~gang], 0.0).sum())
    X = np.zeros_like(C)
    X[iu[~gang], ju[~gang]] = (coeff[~gang] < 0.0).astype(float)
    X = X + X.T
    X[0, 0] = 1.0
    t = np.arange(1, rel.order)
    X[t, t] = a
    X[0, t] = X[t, 0] = a
    return val, X


def solve_lp_over_XT(C: np.ndarray, rel: Relaxation, cuts):
    """min <C, X> over the base polytope intersected with all cuts.

    Exact: closed form off the cut supports, simplex (with row
    generation) on them. Returns (value, argmin X). Raises LpFailure when
    the KKT residual of the simplex solution exceeds LP_RESID_TOL.
    """
    cuts = list(cuts)
    if rel.problem == "EP":
        return _lp_ep(C, rel, cuts)
    return _lp_bp(C, rel, cuts)


def _lp_ep(C, rel, cuts):
    d = rel.base
    n = rel.order
    val, X = _box_min(C, rel)
    if not cuts:
        return val, X
    pairs = sorted({p for c in cuts for p in c.support})
    index = {p: i for i, p in enumerate(pairs)}

    # subtract the closed-form contribution of the cut pairs, the LP
    # re-adds its own
    pr = np.array([p for p, _ in pairs])
    pc = np.array([q for _, q in pairs])
    coeff = 2.0 * C[pr, pc]
    val -= float(np.minimum(coeff * d.box_lo, coeff * d.box_hi).sum())

    rows = []
    for c in cuts:
        if c.kind == TRIANGLE:
            i, j, l = c.nodes
            row = [(index[_canon(i, j)], 1.0), (index[_canon(i, l)], 1.0),
                   (index[_canon(j, l)], -1.0)]
            rows.append((row, "<", (d.k - 1.0) / d.k))
        elif c.kind == INDEP_SET:
            row = [(index[p], 1.0) for p in c.support]
            rows.append((row, ">", (1.0 - d.k) / 2.0))
        else:
            raise ValueError(f"cut kind {c.kind} on an EP relaxation")

    comp = _components(len(pairs), rows)
    lo = np.full(len(pairs), d.box_lo)
    up = np.full(len(pairs), d.box_hi)
    xsol = np.empty(len(pairs))
    for members, rowidx in comp:
        sub = {g: i for i, g in enumerate(members)}
        subrows = [
            ([(sub[j], cf) for j, cf in rows[r][0]], rows[r][1], rows[r][2])
            for r in rowidx
        ]
        xs, v = _generate_and_solve(
            coeff[members], lo[members], up[members], subrows)
        xsol[members] = xs
        val += v
    X[pr, pc] = xsol
    X[pc, pr] = xsol
    return val, X


def _lp_bp(C, rel, cuts):
    n = rel.n
    N = rel.order
    m1, m2 = rel.base.m
    gang = {(q, n + q) for q in range(1, n + 1)}

    pairs = sorted({
        p for c in cuts for p in c.support
        if p[0] >= 1 and p[0] != p[1] and p not in gang
    })
    index = {p: i for i, p in enumerate(pairs)}
    npair = len(pairs)
    # variables: pair entries first, then the 2n arrow values
    nv = npair + 2 * n

    cvec = np.zeros(nv)
    if npair:
        pr = np.array([p for p, _ in pairs])
        pc = np.array([q for _, q in pairs])
        cvec[:npair] = 2.0 * C[pr, pc]
    arrow_coef = np.diag(C)[1:] + 2.0 * C[0, 1:]
    cvec[npair:] = arrow_coef

    lo = np.zeros(nv)
    up = np.ones(nv)

    rows = [
        ([(npair + t, 1.0) for t in range(n)], "=", float(m1)),
        ([(npair + t, 1.0) for t in range(n, 2 * n)], "=", float(m2)),
    ]
    for t in range(n):
        rows.append(([(npair + t, 1.0), (npair + t + n, 1.0)], "=", 1.0))
    nfixed = len(rows)
    for c in cuts:
        if c.kind != BQP:
            raise ValueError(f"cut kind {c.kind} on a BP relaxation")
        i, j, l, _ = c.nodes
        row = [(npair + l - 1, -1.0)]
        for (a, b), cf in ((_canon(i, l), 1.0), (_canon(j, l), 1.0),
                           (_canon(i, j), -1.0)):
            if (a, b) in gang:
                continue
            row.append((index[(a, b)], cf))
        rows.append((row, "<", 0.0))

    xs, v = _generate_and_solve(cvec, lo, up, rows,
                                always_active=range(nfixed))
    val = float(C[0, 0]) + v

    # closed form on the remaining inner pairs
    iu, ju = np.triu_indices(N, 1)
    keep = iu >= 1
    iu, ju = iu[keep], ju[keep]
    used = np.zeros((N, N), dtype=bool)
    q = np.arange(1, n + 1)
    used[q, q + n] = True
    if npair:
        used[pr, pc] = True
    w = 2.0 * C[iu, ju]
    neg = (~used[iu, ju]) & (w < 0.0)
    X = np.zeros_like(C)
    X[iu[neg], ju[neg]] = 1.0
    val += float(w[neg].sum())
    if npair:
        X[pr, pc] = xs[:npair]
    X = X + X.T
    X[0, 0] = 1.0
    t = np.arange(1, N)
    X[t, t] = xs[npair:]
    X[0, t] = X[t, 0] = xs[npair:]
    return val, X


def _canon(a, b):
    return (a, b) if a <= b else (b, a)


def _components(nvars, rows):
    """Union-find on variables through shared rows. Returns a list of
    (member variable indices, row indices) pairs; variables untouched by
    any row form singleton components with no rows."""
    parent = list(range(nvars))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for row, _, _ in rows:
        base = find(row[0][0])
        for j, _ in row[1:]:
            parent[find(j)] = base
    groups = {}
    for v in range(nvars):
        groups.setdefault(find(v), []).append(v)
    rowmap = {root: [] for root in groups}
    for ridx, (row, _, _) in enumerate(rows):
        rowmap[find(row[0][0])].append(ridx)
    out = []
    for root in sorted(groups):
        members = np.array(sorted(groups[root]), dtype=np.intp)
        out.append((members, rowmap[root]))
    return out


def _generate_and_solve(cvec, lo, up, rows, always_active=()):
    """Row generation: solve with a working subset of rows, add the most
    violated missing rows, repeat. Verifies the final KKT residual over
    the complete row set."""
    nv = cvec.size
    active = list(always_active)
    in_active = set(active)

    def build(idxs):
        A = np.zeros((len(idxs), nv))
        b = np.empty(len(idxs))
        senses = []
        for out_i, r in enumerate(idxs):
            row, s, rhs = rows[r]
            for j, cf in row:
                A[out_i, j] += cf
            senses.append(s)
            b[out_i] = rhs
        return A, b, "".join(senses)

    if active:
        A, b, senses = build(active)
        res = solve_lp(cvec, lo, up, A, b, senses)
        if res.status != "optimal":
            raise LpFailure(f"simplex status {res.status}")
        x = res.x
    else:
        x = np.where(cvec > 0.0, lo, np.where(cvec < 0.0, up, lo))
        res = None

    for _ in range(200):
        viols = []
        for ridx, (row, s, rhs) in enumerate(rows):
            if ridx in in_active:
                continue
            act = sum(cf * x[j] for j, cf in row)
            v = act - rhs if s == "<" else (rhs - act if s == ">" else
                                            abs(act - rhs))
            if v > _ROW_VIOL_TOL:
                viols.append((v, ridx))
        if not viols:
            break
        viols.sort(key=lambda t: (-t[0], t[1]))
        for _, ridx in viols[:_ROW_BATCH]:
            active.append(ridx)
            in_active.add(ridx)
        A, b, senses = build(active)
        res = solve_lp(cvec, lo, up, A, b, senses)
        if res.status != "optimal":
            raise LpFailure(f"simplex status {res.status}")
        x = res.x
    else:
        raise LpFailure("row generation did not settle")

    # certify against the full row set
    A_all, b_all, senses_all = build(range(len(rows)))
    y_all = np.zeros(len(rows))
    if res is not None:
        for out_i, ridx in enumerate(active):
            y_all[ridx] = res.y[out_i]
    z_all = cvec - (A_all.T @ y_all if len(rows) else 0.0)
    resid = kkt_residual(cvec, lo, up, A_all, b_all, senses_all,
                         x, y_all, z_all)
    if resid > LP_RESID_TOL:
        raise LpFailure(f"KKT residual {resid:.2e}")
    return x, float(cvec @ x)


# ---------------------------------------------------------------------------
# primal reference values
# ---------------------------------------------------------------------------

def enumerate_optimum(g: GraphInstance, spec: PartitionSpec):
    """Exact minimum cut weight over all partitions with the given part
    sizes, by exhaustive assignment with symmetry pruning (interchangeable
    empty parts of equal size are tried once). Guarded to n <= 16.

    Returns (value, labels) with 0-based part labels per vertex.
    """
    n = g.n
    if n > 16:
        raise ValueError("enumeration is guarded to n <= 16")
    if spec.n != n:
        raise ValueError(f"part sizes {spec.m} do not sum to n={n}")
    sizes = list(spec.m)
    k = len(sizes)
    W = g.adjacency()
    all_nonneg = all(w >= 0 for _, _, w in g.edges)
    labels = np.full(n, -1, dtype=int)
    remaining = sizes.copy()
    PS = np.zeros((k, n))
    best_val = math.inf
    best_labels = None

    def rec(v, cost):
        nonlocal best_val, best_labels
        if all_nonneg and cost >= best_val:
            return
        if v == n:
            if cost < best_val:
                best_val = cost
                best_labels = labels.copy()
            return
        col = PS[:, v]
        total = col.sum()
        tried_empty = set()
        for t in range(k):
            if remaining[t] == 0:
                continue
            if remaining[t] == sizes[t]:
                if sizes[t] in tried_empty:
                    continue
                tried_empty.add(sizes[t])
            delta = total - col[t]
            labels[v] = t
            remaining[t] -= 1
            PS[t] += W[v]
            rec(v + 1, cost + delta)
            PS[t] -= W[v]
            remaining[t] += 1
            labels[v] = -1

    rec(0, 0.0)
    return float(best_val), tuple(int(t) for t in best_labels)


def heuristic_upper_bound(g: GraphInstance, spec: PartitionSpec,
                          seed: int = 0, restarts: int = 20):
    """Feasible partition by randomized assignment plus swap local search.

    Best-improvement pairwise swaps until no swap helps; the best value
    over all restarts is returned as (value, labels). Always an upper
    bound for the minimum cut with the given part sizes.
    """
    n = g.n
    if spec.n != n:
        raise ValueError(f"part sizes {spec.m} do not sum to n={n}")
    sizes = spec.m
    k = len(sizes)
    W = g.adjacency()
    rng = np.random.default_rng(seed)
    best_val = math.inf
    best_labels = None
    ar = np.arange(n)
    for _ in range(max(1, restarts)):
        perm = rng.permutation(n)
        labels = np.empty(n, dtype=int)
        pos = 0
        for t, s in enumerate(sizes):
            labels[perm[pos:pos + s]] = t
            pos += s
        PS = np.zeros((k, n))
        for t in range(k):
            PS[t] = W[labels == t].sum(axis=0)
        val = partition_cut_weight(g, labels)
        for _ in range(4 * n + 20):
            G = PS[labels]                      # G[v, u] = PS[label_v, u]
            own = G[ar, ar]
            D = own[:, None] + own[None, :] - G - G.T + 2.0 * W
            D[labels[:, None] == labels[None, :]] = np.inf
            u, v = np.unravel_index(np.argmin(D), D.shape)
            if D[u, v] >= -1e-12:
                break
            a, b = labels[u], labels[v]
            labels[u], labels[v] = b, a
            PS[a] += W[v] - W[u]
            PS[b] += W[u] - W[v]
            val += float(D[u, v])
        val = partition_cut_weight(g, labels)
        if val < best_val:
            best_val = val
            best_labels = labels.copy()
    return float(best_val), tuple(int(t) for t in best_labels)
