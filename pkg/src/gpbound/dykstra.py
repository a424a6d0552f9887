"""Cyclic Dykstra projection onto the cut-augmented base set.

The target set is the intersection of the base polytope (exact projector
supplied by the caller) with one halfspace per cutting plane. Cuts are
grouped into support-disjoint clusters; all cuts of a cluster are applied
in one vectorized pass, which is exactly equivalent to applying them one
by one in any order because they touch pairwise disjoint entries.

The correction (normal) vectors can be warm started across successive
projections of nearby points, which is how the inner solver uses this:
the engine keeps its normals between calls until the cut family changes.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .cuts import (BQP, INDEP_SET, TRIANGLE, CutClustering, _bqp_kernel,
                   _indepset_kernel, _triangle_kernel)

__all__ = ["DykstraState", "DykstraInfo", "DykstraEngine", "dykstra_project"]

EPS_PROJ_DEFAULT = 1e-4
MAX_SWEEPS_DEFAULT = 2000


@dataclass
class DykstraState:
    """Iterate and correction terms of one Dykstra run.

    N_base is the correction for the base-set projection; N_cluster holds
    one flat correction vector per cluster, aligned with the cluster's
    gathered support positions.
    """

    X: np.ndarray
    N_base: np.ndarray
    N_cluster: list[np.ndarray]
    q: int = 0


@dataclass(frozen=True)
class DykstraInfo:
    sweeps: int
    converged: bool
    residual: float
    residuals: tuple[float, ...] = ()


class _CompiledCluster:
    """Index plumbing for one support-disjoint cluster.

    rows/cols gather the union of the member cuts' support positions into
    one flat value vector; the per-kind index matrices address slots of
    that vector, one column per cut, so each kind needs a single gather
    and a single scatter. Within a cluster the positions are pairwise
    distinct, which makes the scatters race free.
    """

    def __init__(self, cuts, idxs, k):
        pos = []
        slot = {}
        for i in idxs:
            for p in cuts[i].support:
                if p in slot:
                    raise ValueError("cluster supports must be disjoint")
                slot[p] = len(pos)
                pos.append(p)
        self.rows = np.array([p for p, _ in pos], dtype=np.intp)
        self.cols = np.array([q for _, q in pos], dtype=np.intp)
        self.size = len(pos)
        self.k = k

        tri = [c for c in (cuts[i] for i in idxs) if c.kind == TRIANGLE]
        iss = [c for c in (cuts[i] for i in idxs) if c.kind == INDEP_SET]
        bqp = [c for c in (cuts[i] for i in idxs) if c.kind == BQP]
        if (tri or iss) and k is None:
            raise ValueError("triangle/indep_set clusters need k")

        self.tri = None
        if tri:
            self.tri = np.array(
                [[slot[_key(c.nodes[a], c.nodes[b])] for c in tri]
                 for a, b in ((0, 1), (0, 2), (1, 2))],
                dtype=np.intp,
            )
        self.iss = None
        if iss:
            sizes = {len(c.nodes) for c in iss}
            if len(sizes) != 1:
                raise ValueError("independent sets of mixed size")
            self.iss = np.array(
                [[slot[p] for p in c.support] for c in iss], dtype=np.intp
            )
        self.bqp = None
        if bqp:
            mat = []
            for c in bqp:
                i, j, l, ls = c.nodes
                mat.append([
                    slot[_key(i, l)], slot[_key(j, l)], slot[_key(i, j)],
                    slot[(l, l)], slot[(0, l)], slot[(ls, ls)], slot[(0, ls)],
                ])
            self.bqp = np.ascontiguousarray(
                np.array(mat, dtype=np.intp).T
            )

    def apply(self, X, normal):
        """One Dykstra step for this cluster, in place on X and normal."""
        shifted = X[self.rows, self.cols]
        shifted += normal
        out = shifted.copy()
        if self.tri is not None:
            g = shifted[self.tri]
            out[self.tri] = _triangle_kernel(g[0], g[1], g[2], self.k)
        if self.iss is not None:
            out[self.iss] = _indepset_kernel(shifted[self.iss], self.k)
        if self.bqp is not None:
            out[self.bqp] = _bqp_kernel(*shifted[self.bqp])
        np.subtract(shifted, out, out=normal)
        X[self.rows, self.cols] = out
        X[self.cols, self.rows] = out


def _key(a, b):
    return (a, b) if a <= b else (b, a)


class DykstraEngine:
    """Reusable projector onto (base set) intersect (all cuts).

    Holds the compiled clusters and the correction terms; normals persist
    across project() calls until reset(), which the caller must do
    whenever the cut family changes.
    """

    def __init__(self, base_projector, clustering: CutClustering, order: int):
        self._base = base_projector
        self._order = order
        self._compiled = [
            _CompiledCluster(clustering.cuts, idxs, clustering.k)
            for idxs in clustering.clusters
        ]
        self.state: DykstraState | None = None
        self.reset()

    def reset(self) -> None:
        self.state = DykstraState(
            X=np.zeros((self._order, self._order)),
            N_base=np.zeros((self._order, self._order)),
            N_cluster=[np.zeros(c.size) for c in self._compiled],
            q=0,
        )

    def project(self, M: np.ndarray,
                eps_proj: float = EPS_PROJ_DEFAULT,
                max_sweeps: int = MAX_SWEEPS_DEFAULT):
        """Best approximation of M in the intersection.

        Returns (X, DykstraInfo). With no cuts this is a single call of
        the base projector.
        """
        st = self.state
        if not self._compiled:
            X = self._base(M)
            st.X = X
            st.q += 1
            return X, DykstraInfo(1, True, 0.0, (0.0,))
        X = np.array(M, dtype=float, copy=True)
        prev = X.copy()
        residuals = []
        converged = False
        sweeps = 0
        for _ in range(max_sweeps):
            sweeps += 1
            shifted = X + st.N_base
            X = self._base(shifted)
            np.subtract(shifted, X, out=st.N_base)
            for comp, normal in zip(self._compiled, st.N_cluster):
                comp.apply(X, normal)
            res = float(np.linalg.norm(X - prev))
            residuals.append(res)
            st.q += 1
            if res < eps_proj:
                converged = True
                break
            prev = X.copy()
        st.X = X
        return X, DykstraInfo(sweeps, converged, residuals[-1],
                              tuple(residuals))


def dykstra_project(M: np.ndarray, base_projector,
                    clusters: CutClustering,
                    eps_proj: float = EPS_PROJ_DEFAULT,
                    max_sweeps: int = MAX_SWEEPS_DEFAULT):
    """One-shot projection of M onto (base set) intersect (all cuts).

    Fresh zero corrections, i.e. plain Dykstra; converges to the exact
    Euclidean projection as eps_proj -> 0.
    """
    engine = DykstraEngine(base_projector, clusters, M.shape[0])
    return engine.project(M, eps_proj=eps_proj, max_sweeps=max_sweeps)
