"""End-to-end solve: ADMM inner solves, separation, cut management.

One outer loop = warm-started inner solve on the current cut family,
bound certification, stop checks, then separation and cut addition. The
reported bound is the running maximum of the certified bounds; cuts are
never removed. Stop reasons, first match in this order:

  GapClosed         rounded bound meets the upper bound
  SmallImprovement  consecutive certified bounds differ by < 0.001
  FewNewCuts        separation found fewer than 0.25 n new cuts
  MaxOuterLoops     no more cut rounds allowed
  TimeLimit         wall-clock budget exhausted
"""

from __future__ import annotations

import json
import math
import time
from dataclasses import asdict, dataclass
from typing import Callable

import numpy as np

from .admm import AdmmConfig, base_projector, init_state, run_inner
from .bounds import EXACT, heuristic_upper_bound, safe_lower_bound
from .cuts import (_KIND_RANK, cluster_cuts, separate_bqp,
                   separate_indepset_exact, separate_indepset_greedy,
                   separate_indepset_prob, separate_triangles)
from .dykstra import DykstraEngine
from .graph import GraphInstance, PartitionSpec
from .relaxation import build_relaxation

__all__ = [
    "SolveConfig",
    "OuterRecord",
    "BoundReport",
    "GAP_CLOSED",
    "SMALL_IMPROVEMENT",
    "FEW_NEW_CUTS",
    "MAX_OUTER_LOOPS",
    "TIME_LIMIT",
    "solve",
]

GAP_CLOSED = "GapClosed"
SMALL_IMPROVEMENT = "SmallImprovement"
FEW_NEW_CUTS = "FewNewCuts"
MAX_OUTER_LOOPS = "MaxOuterLoops"
TIME_LIMIT = "TimeLimit"


@dataclass
class SolveConfig:
    """Driver knobs. None means "pick the default for this instance":
    num_cuts 3n (5n past n=300), max_outer_loops 30 (10 past n=300),
    eps_proj 1e-4 for EP and 1e-6 for BP, ADMM tolerance schedule
    (EP: 1e-3 with a 1e-4 last loop; BP: 1e-5 first and last, 1e-4
    between)."""

    ub: float | None = None
    num_cuts: int | None = None
    max_outer_loops: int | None = None
    eps_proj: float | None = None
    eps_admm_first: float | None = None
    eps_admm_middle: float | None = None
    eps_admm_last: float | None = None
    max_time: float = 7200.0
    seed: int = 0
    tol_sep: float = 1e-3
    sep_eps: float = 0.1
    sep_rounds: int | None = None
    bound_mode: str = EXACT
    max_inner_iterations: int = 20000
    max_sweeps: int = 2000
    small_improvement_tol: float = 1e-3
    ub_restarts: int = 20
    scale: float | None = None


@dataclass(frozen=True)
class OuterRecord:
    """One outer loop: the inner solve, its certificate, and what the
    separator did afterwards. cuts_total counts the cuts the inner solve
    ran with; cuts_added were appended after certification."""

    outer: int
    eps_admm: float
    inner_reason: str
    inner_iterations: int
    criterion: float
    sigma: float
    lb: float
    lb_best: float
    lb_rounded: int | None
    lp_status: str
    cuts_total: int
    new_cuts_found: int
    cuts_added: int
    wall_time: float


@dataclass(eq=False)
class BoundReport:
    name: str
    problem: str
    n: int
    k: int
    m: tuple[int, ...]
    ub: float
    lb: float
    lb_rounded: int | None
    stop_reason: str
    seed: int
    outer_loops: int
    cuts_total: int
    total_inner_iterations: int
    wall_time: float
    records: tuple[OuterRecord, ...] = ()

    _TIMING = ("wall_time",)

    def signature(self) -> dict:
        """Everything except wall-clock fields; equal signatures mean two
        runs took the same mathematical path."""
        top = {
            k: v for k, v in asdict(self).items()
            if k not in self._TIMING and k != "records"
        }
        top["m"] = list(self.m)
        top["records"] = [
            {k: v for k, v in asdict(r).items() if k not in self._TIMING}
            for r in self.records
        ]
        return top

    def to_dict(self) -> dict:
        d = asdict(self)
        d["m"] = list(self.m)
        d["records"] = [asdict(r) for r in self.records]
        return d

    def write_jsonl(self, path) -> None:
        """One line per outer record plus a trailing summary line."""
        with open(path, "w") as fh:
            for r in self.records:
                fh.write(json.dumps({"type": "outer", **asdict(r)}) + "\n")
            summary = self.to_dict()
            summary.pop("records")
            fh.write(json.dumps({"type": "summary", **summary}) + "\n")

    @staticmethod
    def table_header() -> str:
        return (f"{'graph':<28} {'n':>5} {'k':>3} {'ub':>12} {'lb':>14} "
                f"{'time':>8} {'#cuts':>7} {'#iter':>8} {'#outer':>7}")

    def table_row(self) -> str:
        name = self.name if len(self.name) <= 28 else self.name[:25] + "..."
        lb = f"{self.lb:.4f}"
        return (f"{name:<28} {self.n:>5} {self.k:>3} {self.ub:>12g} "
                f"{lb:>14} {self.wall_time:>8.1f} {self.cuts_total:>7} "
                f"{self.total_inner_iterations:>8} {self.outer_loops:>7}")


def _eps_schedule(problem: str, cfg: SolveConfig) -> Callable[[int, int], float]:
    if problem == "EP":
        first = cfg.eps_admm_first if cfg.eps_admm_first is not None else 1e-3
        mid = cfg.eps_admm_middle if cfg.eps_admm_middle is not None else 1e-3
        last = cfg.eps_admm_last if cfg.eps_admm_last is not None else 1e-4
    else:
        first = cfg.eps_admm_first if cfg.eps_admm_first is not None else 1e-5
        mid = cfg.eps_admm_middle if cfg.eps_admm_middle is not None else 1e-4
        last = cfg.eps_admm_last if cfg.eps_admm_last is not None else 1e-5

    def eps(outer: int, max_outer: int) -> float:
        if outer >= max_outer:
            return last
        if outer == 0:
            return first
        return mid

    return eps


def _separate(rel, X, known, cfg: SolveConfig, rng, limit: int):
    """All new violated cuts at X, deduplicated, ranked by violation
    (ties: triangle before indep_set, then node order). Returns the
    ranked list and its length."""
    if rel.problem == "EP":
        k = rel.spec.k
        fresh = separate_triangles(X, k, limit=limit, tol=cfg.tol_sep)
        if k <= 3:
            fresh += separate_indepset_exact(X, k, limit=limit,
                                             tol=cfg.tol_sep)
        else:
            n_r = cfg.sep_rounds if cfg.sep_rounds is not None else 5 * rel.n
            fresh += separate_indepset_greedy(X, k, limit=limit,
                                              tol=cfg.tol_sep)
            fresh += separate_indepset_prob(
                X, k, n_r, cfg.sep_eps, seed=int(rng.integers(2 ** 63)),
                tol=cfg.tol_sep)
    else:
        fresh = separate_bqp(X, limit=limit, tol=cfg.tol_sep)
    seen = set(known)
    cand = []
    for c in fresh:
        if c.key in seen:
            continue
        seen.add(c.key)
        cand.append(c)
    cand.sort(key=lambda c: (-c.violation_at_add, _KIND_RANK[c.kind], c.nodes))
    return cand, len(cand)


def _gap_closed(best: float, best_rounded: int | None, ub: float,
                integer_objective: bool) -> bool:
    if integer_objective and best_rounded is not None:
        return best_rounded >= ub - 1e-9
    return best >= ub - 1e-9


def solve(g: GraphInstance, spec: PartitionSpec,
          cfg: SolveConfig | None = None) -> BoundReport:
    """Certified lower bound for the minimum cut with given part sizes.

    Runs the inner solver on the plain relaxation, then up to
    max_outer_loops rounds of separation + warm-started re-solves.
    Deterministic for a fixed cfg.seed.
    """
    cfg = cfg or SolveConfig()
    t0 = time.monotonic()
    deadline = t0 + cfg.max_time
    rel = build_relaxation(g, spec, scale=cfg.scale)
    n = g.n
    num_cuts = cfg.num_cuts if cfg.num_cuts is not None else (
        3 * n if n <= 300 else 5 * n)
    max_outer = cfg.max_outer_loops if cfg.max_outer_loops is not None else (
        30 if n <= 300 else 10)
    eps_proj = cfg.eps_proj if cfg.eps_proj is not None else (
        1e-4 if rel.problem == "EP" else 1e-6)
    sched = _eps_schedule(rel.problem, cfg)
    if cfg.ub is not None:
        ub = float(cfg.ub)
    else:
        ub, _ = heuristic_upper_bound(g, spec, seed=cfg.seed,
                                      restarts=cfg.ub_restarts)
    rng = np.random.default_rng(cfg.seed)
    state = init_state(rel)
    kk = spec.k if rel.problem == "EP" else None
    cuts: list = []
    known_keys: set = set()
    engine = DykstraEngine(base_projector(rel), cluster_cuts((), k=kk),
                           rel.order)
    records: list[OuterRecord] = []
    best = -math.inf
    best_rounded: int | None = None
    prev_lb: float | None = None
    stop: str | None = None
    outer = 0
    total_iters = 0

    while True:
        eps_admm = sched(outer, max_outer)
        icfg = AdmmConfig(eps=eps_admm,
                          max_iterations=cfg.max_inner_iterations,
                          eps_proj=eps_proj, max_sweeps=cfg.max_sweeps)
        info = run_inner(state, rel, cuts, icfg, engine=engine,
                         deadline=deadline)
        total_iters += info.iterations
        cert = safe_lower_bound(state.R, state.Z, rel, cuts,
                                mode=cfg.bound_mode)
        if cert.lb > best:
            best = cert.lb
            best_rounded = cert.lb_rounded

        fresh: list = []
        found = 0
        if _gap_closed(best, best_rounded, ub, rel.integer_objective):
            stop = GAP_CLOSED
        elif prev_lb is not None and cert.lb - prev_lb < cfg.small_improvement_tol:
            stop = SMALL_IMPROVEMENT
        elif time.monotonic() >= deadline:
            stop = TIME_LIMIT
        else:
            fresh, found = _separate(rel, state.X, known_keys, cfg, rng,
                                     num_cuts)
            if found < 0.25 * n:
                stop = FEW_NEW_CUTS
            elif outer >= max_outer:
                stop = MAX_OUTER_LOOPS
            elif time.monotonic() >= deadline:
                stop = TIME_LIMIT
        prev_lb = cert.lb

        added = 0
        cuts_used = len(cuts)
        if stop is None:
            selected = fresh[:num_cuts]
            for c in selected:
                cuts.append(c)
                known_keys.add(c.key)
            added = len(selected)
            engine = DykstraEngine(base_projector(rel),
                                   cluster_cuts(tuple(cuts), k=kk),
                                   rel.order)
        records.append(OuterRecord(
            outer=outer, eps_admm=eps_admm, inner_reason=info.reason,
            inner_iterations=info.iterations, criterion=info.criterion,
            sigma=state.sigma, lb=cert.lb, lb_best=best,
            lb_rounded=cert.lb_rounded, lp_status=cert.lp_status,
            cuts_total=cuts_used, new_cuts_found=found, cuts_added=added,
            wall_time=time.monotonic() - t0,
        ))
        if stop is not None:
            break
        outer += 1

    return BoundReport(
        name=g.name, problem=rel.problem, n=n, k=spec.k, m=spec.m,
        ub=ub, lb=best, lb_rounded=best_rounded, stop_reason=stop,
        seed=cfg.seed, outer_loops=len(records), cuts_total=len(cuts),
        total_inner_iterations=total_iters,
        wall_time=time.monotonic() - t0, records=tuple(records),
    )
