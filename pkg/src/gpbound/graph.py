"""Graph instances, benchmark generators, and edge-list file I/O.

Vertices are labelled 1..n in files and in :class:`GraphInstance` edges;
everything further down the stack (matrices, separators) is 0-based.
"""

from __future__ import annotations

import itertools
import math
import os
from dataclasses import dataclass

import numpy as np

__all__ = [
    "GraphInstance",
    "PartitionSpec",
    "GraphFormatError",
    "laplacian",
    "partition_cut_weight",
    "gen_gnp_degree",
    "gen_unit_disk",
    "gen_spinglass",
    "read_edge_list",
    "write_edge_list",
]


class GraphFormatError(ValueError):
    """Raised when an edge-list file cannot be parsed."""


@dataclass(frozen=True)
class GraphInstance:
    """Weighted undirected graph.

    Parameters
    ----------
    n : int
        Number of vertices, labelled 1..n.
    edges : tuple of (int, int, float)
        Each edge once as (i, j, w) with 1 <= i < j <= n. Weights may be
        negative (spin-glass instances use +/-1).
    name : str
        Display name used in reports and tables.
    """

    n: int
    edges: tuple[tuple[int, int, float], ...]
    name: str = "graph"

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("graph needs at least one vertex")
        seen = set()
        for i, j, w in self.edges:
            if not (1 <= i < j <= self.n):
                raise ValueError(f"edge ({i},{j}) out of range for n={self.n}")
            if (i, j) in seen:
                raise ValueError(f"duplicate edge ({i},{j})")
            if not math.isfinite(w):
                raise ValueError(f"non-finite weight on edge ({i},{j})")
            seen.add((i, j))

    @property
    def num_edges(self) -> int:
        return len(self.edges)

    def has_integer_weights(self) -> bool:
        return all(float(w).is_integer() for _, _, w in self.edges)

    def adjacency(self) -> np.ndarray:
        """Dense symmetric weighted adjacency matrix (0-based)."""
        A = np.zeros((self.n, self.n))
        for i, j, w in self.edges:
            A[i - 1, j - 1] = w
            A[j - 1, i - 1] = w
        return A


@dataclass(frozen=True)
class PartitionSpec:
    """Target part sizes for a partition problem.

    ``kind`` is "equipartition" (k parts of size n/k each) or "bisection"
    (two parts of sizes m1 >= m2). ``m`` is sorted non-increasing.
    """

    kind: str
    k: int
    m: tuple[int, ...]

    def __post_init__(self):
        if self.kind not in ("equipartition", "bisection"):
            raise ValueError(f"unknown partition kind {self.kind!r}")
        if self.k != len(self.m) or self.k < 2:
            raise ValueError("need k >= 2 part sizes")
        if any(s < 1 for s in self.m):
            raise ValueError("part sizes must be positive")
        if tuple(sorted(self.m, reverse=True)) != self.m:
            raise ValueError("part sizes must be sorted non-increasing")
        if self.kind == "bisection" and self.k != 2:
            raise ValueError("bisection means exactly two parts")
        if self.kind == "equipartition" and len(set(self.m)) != 1:
            raise ValueError("equipartition parts must have equal size")

    @staticmethod
    def equipartition(n: int, k: int) -> "PartitionSpec":
        if k < 2 or n % k != 0:
            raise ValueError(f"k={k} does not divide n={n}")
        return PartitionSpec("equipartition", k, (n // k,) * k)

    @staticmethod
    def bisection(m1: int, m2: int) -> "PartitionSpec":
        if m1 < m2:
            m1, m2 = m2, m1
        return PartitionSpec("bisection", 2, (m1, m2))

    @property
    def n(self) -> int:
        return sum(self.m)


def laplacian(g: GraphInstance) -> np.ndarray:
    """Weighted graph Laplacian Diag(A 1) - A."""
    A = g.adjacency()
    return np.diag(A.sum(axis=1)) - A


def partition_cut_weight(g: GraphInstance, labels) -> float:
    """Total weight of edges with differently-labelled endpoints.

    ``labels`` assigns a part label to each vertex, 0-based positions.
    """
    a = np.asarray(labels)
    if a.shape != (g.n,):
        raise ValueError("labels must assign one part per vertex")
    return float(sum(w for i, j, w in g.edges if a[i - 1] != a[j - 1]))


# ---------------------------------------------------------------------------
# generators
# ---------------------------------------------------------------------------

def gen_gnp_degree(n: int, target_degree: float, seed: int) -> GraphInstance:
    """G(n, p) instance with p chosen for a given expected degree.

    p = target_degree / (n - 1) must land in (0, 1]; target_degree = n - 1
    gives the complete graph. Unit weights.
    """
    if n < 2:
        raise ValueError("need n >= 2")
    p = target_degree / (n - 1)
    if not 0.0 < p <= 1.0:
        raise ValueError(f"target_degree={target_degree} outside (0, {n - 1}]")
    rng = np.random.default_rng(seed)
    iu, ju = np.triu_indices(n, 1)
    keep = rng.random(iu.size) < p
    edges = tuple(
        (int(i) + 1, int(j) + 1, 1.0) for i, j in zip(iu[keep], ju[keep])
    )
    return GraphInstance(n, edges, name=f"gnp_{n}_{target_degree:g}_s{seed}")


def gen_unit_disk(n: int, d: float, seed: int) -> GraphInstance:
    """Random points in the unit square, edge iff distance <= d.

    d must be in (0, sqrt(2)]; d = sqrt(2) gives the complete graph.
    Unit weights.
    """
    if n < 2:
        raise ValueError("need n >= 2")
    if not 0.0 < d <= math.sqrt(2.0):
        raise ValueError(f"d={d} outside (0, sqrt(2)]")
    rng = np.random.default_rng(seed)
    pts = rng.random((n, 2))
    iu, ju = np.triu_indices(n, 1)
    dist = np.hypot(pts[iu, 0] - pts[ju, 0], pts[iu, 1] - pts[ju, 1])
    keep = dist <= d
    edges = tuple(
        (int(i) + 1, int(j) + 1, 1.0) for i, j in zip(iu[keep], ju[keep])
    )
    return GraphInstance(n, edges, name=f"unitdisk_{n}_{d:g}_s{seed}")


def gen_spinglass(dim: int, n_r: int, neg_fraction: float, seed: int) -> GraphInstance:
    """Toroidal grid (dim = 2 or 3, n_r cells per axis) with +/-1 weights.

    Each vertex couples to its nearest neighbour along every axis, with
    wraparound. For n_r = 2 the two neighbours along an axis coincide and
    the parallel edges collapse to one. Each distinct edge independently
    gets weight -1 with probability ``neg_fraction``, else +1.
    """
    if dim not in (2, 3):
        raise ValueError("dim must be 2 or 3")
    if n_r < 2:
        raise ValueError("need n_r >= 2")
    if not 0.0 <= neg_fraction <= 1.0:
        raise ValueError("neg_fraction must be in [0, 1]")

    def vid(coord):
        idx = 0
        for c in coord:
            idx = idx * n_r + c
        return idx + 1

    pairs = set()
    for coord in itertools.product(range(n_r), repeat=dim):
        u = vid(coord)
        for axis in range(dim):
            nb = list(coord)
            nb[axis] = (nb[axis] + 1) % n_r
            v = vid(nb)
            pairs.add((min(u, v), max(u, v)))
    rng = np.random.default_rng(seed)
    edges = []
    for i, j in sorted(pairs):
        w = -1.0 if rng.random() < neg_fraction else 1.0
        edges.append((i, j, w))
    n = n_r ** dim
    return GraphInstance(
        n, tuple(edges), name=f"spinglass{dim}pm_{n_r}_s{seed}"
    )


# ---------------------------------------------------------------------------
# file I/O
# ---------------------------------------------------------------------------

def _fmt_weight(w: float) -> str:
    return str(int(w)) if float(w).is_integer() else repr(float(w))


def write_edge_list(g: GraphInstance, path) -> None:
    """Write "n m" header then one "i j w" line per edge (1-based)."""
    with open(path, "w") as fh:
        fh.write(f"{g.n} {len(g.edges)}\n")
        for i, j, w in g.edges:
            fh.write(f"{i} {j} {_fmt_weight(w)}\n")


def read_edge_list(path, name: str | None = None) -> GraphInstance:
    """Parse an edge-list file written by :func:`write_edge_list`.

    Raises :class:`GraphFormatError` naming the offending line number on
    malformed input.
    """
    if name is None:
        name = os.path.splitext(os.path.basename(str(path)))[0]
    with open(path) as fh:
        lines = fh.read().splitlines()
    body = [(no, ln) for no, ln in enumerate(lines, start=1) if ln.strip()]
    if not body:
        raise GraphFormatError(f"{path}: empty file")
    head_no, head = body[0]
    parts = head.split()
    if len(parts) != 2:
        raise GraphFormatError(f"{path}:{head_no}: header must be 'n m'")
    try:
        n, m = int(parts[0]), int(parts[1])
    except ValueError:
        raise GraphFormatError(f"{path}:{head_no}: header must be 'n m'") from None
    edges = []
    for no, ln in body[1:]:
        toks = ln.split()
        if len(toks) != 3:
            raise GraphFormatError(f"{path}:{no}: expected 'i j w'")
        try:
            i, j, w = int(toks[0]), int(toks[1]), float(toks[2])
        except ValueError:
            raise GraphFormatError(f"{path}:{no}: expected 'i j w'") from None
        if i == j:
            raise GraphFormatError(f"{path}:{no}: self-loop {i}")
        if i > j:
            i, j = j, i
        edges.append((i, j, w))
    if len(edges) != m:
        raise GraphFormatError(
            f"{path}: header promises {m} edges, found {len(edges)}"
        )
    try:
        return GraphInstance(n, tuple(edges), name=name)
    except ValueError as exc:
        raise GraphFormatError(f"{path}: {exc}") from None
