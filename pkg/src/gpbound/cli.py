"""Command line interface: solve, gen, oracle, verify."""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from .admm import base_projector
from .bounds import enumerate_optimum, heuristic_upper_bound
from .cuts import cluster_cuts, triangle_cut
from .driver import BoundReport, SolveConfig, solve
from .dykstra import dykstra_project
from .graph import (GraphFormatError, PartitionSpec, gen_gnp_degree,
                    gen_spinglass, gen_unit_disk, read_edge_list,
                    write_edge_list)
from .linalg import sym
from .relaxation import (build_relaxation, lift_bisection, lift_equipartition,
                         project_capped_simplex)

__all__ = ["cli_main", "main"]


def _add_problem_args(p):
    p.add_argument("--k", type=int,
                   help="equipartition into k parts of size n/k")
    p.add_argument("--bisection", action="store_true",
                   help="bisection into parts (m1, n - m1)")
    p.add_argument("--m1", type=int,
                   help="larger part size for --bisection "
                        "(default ceil(n/2))")


def _spec_from_args(n, args) -> PartitionSpec:
    if args.bisection:
        if args.k is not None:
            raise ValueError("--k and --bisection are mutually exclusive")
        m1 = args.m1 if args.m1 is not None else (n + 1) // 2
        m2 = n - m1
        if not 1 <= m2 <= m1:
            raise ValueError(f"--m1 {m1} leaves an invalid partner {m2}")
        return PartitionSpec.bisection(m1, m2)
    if args.k is None:
        raise ValueError("pick a problem: --k K or --bisection [--m1 M1]")
    if args.m1 is not None:
        raise ValueError("--m1 only makes sense with --bisection")
    return PartitionSpec.equipartition(n, args.k)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="gpbound",
        description="Certified lower bounds for k-equipartition and "
                    "bisection via a DNN relaxation with cutting planes.",
    )
    sub = p.add_subparsers(dest="command", required=True)

    ps = sub.add_parser("solve", help="bound one instance")
    ps.add_argument("--file", required=True, help="edge list ('n m' header)")
    _add_problem_args(ps)
    ps.add_argument("--ub", type=float,
                    help="known upper bound (default: local search)")
    ps.add_argument("--seed", type=int, default=0)
    ps.add_argument("--num-cuts", type=int)
    ps.add_argument("--max-outer-loops", type=int)
    ps.add_argument("--max-time", type=float, default=7200.0)
    ps.add_argument("--eps-proj", type=float)
    ps.add_argument("--eps-admm", type=float,
                    help="flat ADMM tolerance (overrides the schedule)")
    ps.add_argument("--tol-sep", type=float, default=1e-3)
    ps.add_argument("--sep-eps", type=float, default=0.1)
    ps.add_argument("--sep-rounds", type=int)
    ps.add_argument("--bound-mode", choices=["exact", "box"],
                    default="exact")
    ps.add_argument("--jsonl", help="write per-loop records to this file")
    ps.add_argument("--no-header", action="store_true")

    pg = sub.add_parser("gen", help="write a benchmark instance")
    pg.add_argument("family", choices=["gnp", "unitdisk", "spinglass2pm",
                                       "spinglass3pm"])
    pg.add_argument("--n", type=int, help="vertices (gnp, unitdisk)")
    pg.add_argument("--degree", type=float, help="expected degree (gnp)")
    pg.add_argument("--d", type=float, help="connection radius (unitdisk)")
    pg.add_argument("--nr", type=int, help="cells per axis (spinglass)")
    pg.add_argument("--neg-fraction", type=float, default=0.5)
    pg.add_argument("--seed", type=int, default=0)
    pg.add_argument("-o", "--output", required=True)

    po = sub.add_parser("oracle", help="reference values for small instances")
    po.add_argument("what", choices=["optimum", "ub"])
    po.add_argument("--file", required=True)
    _add_problem_args(po)
    po.add_argument("--seed", type=int, default=0)
    po.add_argument("--restarts", type=int, default=20)

    pv = sub.add_parser("verify", help="structural self checks")
    pv.add_argument("--seed", type=int, default=0)
    return p


def _cmd_solve(args) -> int:
    g = read_edge_list(args.file)
    spec = _spec_from_args(g.n, args)
    cfg = SolveConfig(
        ub=args.ub, num_cuts=args.num_cuts,
        max_outer_loops=args.max_outer_loops, eps_proj=args.eps_proj,
        max_time=args.max_time, seed=args.seed, tol_sep=args.tol_sep,
        sep_eps=args.sep_eps, sep_rounds=args.sep_rounds,
        bound_mode="Exact" if args.bound_mode == "exact" else "BoxRelaxed",
    )
    if args.eps_admm is not None:
        cfg.eps_admm_first = args.eps_admm
        cfg.eps_admm_middle = args.eps_admm
        cfg.eps_admm_last = args.eps_admm
    report = solve(g, spec, cfg)
    if not args.no_header:
        print(BoundReport.table_header())
    print(report.table_row())
    rounded = ("" if report.lb_rounded is None
               else f"  certified integer bound {report.lb_rounded}")
    print(f"stop: {report.stop_reason}{rounded}")
    if args.jsonl:
        report.write_jsonl(args.jsonl)
    return 0


def _cmd_gen(args) -> int:
    fam = args.family
    if fam == "gnp":
        if args.n is None or args.degree is None:
            raise ValueError("gnp needs --n and --degree")
        g = gen_gnp_degree(args.n, args.degree, args.seed)
    elif fam == "unitdisk":
        if args.n is None or args.d is None:
            raise ValueError("unitdisk needs --n and --d")
        g = gen_unit_disk(args.n, args.d, args.seed)
    else:
        if args.nr is None:
            raise ValueError(f"{fam} needs --nr")
        dim = 2 if fam == "spinglass2pm" else 3
        g = gen_spinglass(dim, args.nr, args.neg_fraction, args.seed)
    write_edge_list(g, args.output)
    print(f"{args.output}: {g.name} n={g.n} m={g.num_edges}")
    return 0


def _cmd_oracle(args) -> int:
    g = read_edge_list(args.file)
    spec = _spec_from_args(g.n, args)
    if args.what == "optimum":
        value, labels = enumerate_optimum(g, spec)
    else:
        value, labels = heuristic_upper_bound(g, spec, seed=args.seed,
                                              restarts=args.restarts)
    print(json.dumps({"what": args.what, "graph": g.name, "n": g.n,
                      "m": list(spec.m), "value": value,
                      "labels": list(labels)}))
    return 0


def _cmd_verify(args) -> int:
    """Fast structural self checks (no external solver needed)."""
    rng = np.random.default_rng(args.seed)
    failures = []

    def check(name, fn):
        try:
            fn()
            print(f"ok   {name}")
        except Exception as exc:
            failures.append(name)
            print(f"FAIL {name}: {exc}")

    def basis_checks():
        g = gen_gnp_degree(8, 4.0, args.seed)
        for spec in (PartitionSpec.equipartition(8, 2),
                     PartitionSpec.bisection(5, 3)):
            rel = build_relaxation(g, spec)
            VtV = rel.V.T @ rel.V
            assert np.allclose(VtV, np.eye(rel.V.shape[1]), atol=1e-12)
            lift = (lift_equipartition([0, 0, 0, 0, 1, 1, 1, 1], 2)
                    if spec.kind == "equipartition"
                    else lift_bisection([1, 1, 1, 1, 1, 0, 0, 0]))
            R = rel.V.T @ lift @ rel.V
            assert np.linalg.norm(rel.V @ R @ rel.V.T - lift) < 1e-8

    def projector_checks():
        for spec in (PartitionSpec.equipartition(8, 2),
                     PartitionSpec.bisection(5, 3)):
            g = gen_gnp_degree(8, 4.0, args.seed)
            rel = build_relaxation(g, spec)
            proj = base_projector(rel)
            for _ in range(25):
                M = sym(rng.normal(size=(rel.order, rel.order)))
                P = proj(M)
                assert np.linalg.norm(proj(P) - P) < 1e-10
                far = np.linalg.norm(M - P)
                near = np.linalg.norm(M - proj(sym(
                    P + 0.01 * rng.normal(size=P.shape))))
                assert far <= near + 1e-8

    def simplex_check():
        y = rng.normal(size=40) * 2.0
        x = project_capped_simplex(y, 7.0)
        assert abs(x.sum() - 7.0) < 1e-9
        assert x.min() >= -1e-12 and x.max() <= 1.0 + 1e-12

    def dykstra_check():
        g = gen_gnp_degree(6, 3.0, args.seed)
        rel = build_relaxation(g, PartitionSpec.equipartition(6, 2))
        feas = lift_equipartition([0, 1, 0, 1, 0, 1], 2)
        cl = cluster_cuts((triangle_cut(0, 1, 2),), k=2)
        X, info = dykstra_project(feas, base_projector(rel), cl, 1e-10)
        assert info.converged and np.linalg.norm(X - feas) < 1e-8

    def solve_check():
        g = gen_gnp_degree(6, 3.0, args.seed)
        spec = PartitionSpec.equipartition(6, 2)
        report = solve(g, spec, SolveConfig(max_outer_loops=2, seed=args.seed))
        opt, _ = enumerate_optimum(g, spec)
        assert report.lb <= opt + 1e-9, (report.lb, opt)
        assert report.lb_rounded <= opt

    check("reduced-face basis", basis_checks)
    check("base projectors", projector_checks)
    check("capped simplex", simplex_check)
    check("dykstra fixed point", dykstra_check)
    check("end-to-end bound", solve_check)
    if failures:
        print(f"{len(failures)} check(s) failed", file=sys.stderr)
        return 1
    print("all checks passed")
    return 0


def cli_main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "solve":
            return _cmd_solve(args)
        if args.command == "gen":
            return _cmd_gen(args)
        if args.command == "oracle":
            return _cmd_oracle(args)
        return _cmd_verify(args)
    except (GraphFormatError, ValueError, OSError) as exc:
        print(f"gpbound: {exc}", file=sys.stderr)
        return 2


def main(argv=None) -> int:
    return cli_main(argv)


if __name__ == "__main__":
    sys.exit(main())
