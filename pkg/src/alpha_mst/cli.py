"""Command-line interface: ``alpha-mst {solve,bounds,check,gen,bench}``."""
from __future__ import annotations

import argparse
import csv
import logging
import os
import sys
from pathlib import Path

from .bnc import CSV_COLUMNS, BranchAndCut, SolveStatus
from .datasets import tsplib_suite
from .geometry import Alpha, GeometryError, TreeStructureError, build_tables, check_tree
from .instance import InstanceError, read_instance, write_instance
from .model import FormulationKind
from .oracle import verify_bound_chain
from .separation import format_cut_log

LOG_LEVELS = {"quiet": logging.WARNING, "info": logging.INFO, "debug": logging.DEBUG}
GRID = ["1/3pi", "2/5pi", "1/2pi", "3/5pi", "2/3pi", "4/5pi"]
BOUND_COLUMNS = ["instance", "n", "alpha", "w_fx", "w_fx+", "w_fx++", "w_fxy*", "w_fxy",
                 "gap_fx+_pct", "gap_fx++_pct", "gap_fxy*_pct", "fx+_eq_fxy*",
                 "t_fx", "t_fx+", "t_fx++", "t_fxy*", "t_ratio_fx++_fx", "t_ratio_fxy*_fx"]

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_INFEASIBLE = 0, 1, 2, 3


class UsageError(Exception):
    pass


def _alpha(text: str) -> Alpha:
    try:
        return Alpha.parse(text)
    except GeometryError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _kind(text: str) -> FormulationKind:
    try:
        return FormulationKind.parse(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _positive(text: str) -> float:
    v = float(text)
    if not v > 0:
        raise argparse.ArgumentTypeError("must be positive")
    return v


def _load(path, n=None):
    p = Path(path)
    if not p.is_file():
        raise UsageError(f"no such instance file: {path}")
    return read_instance(p, n)


def _append_csv(path, header, rows):
    path = Path(path)
    new = not path.exists() or path.stat().st_size == 0
    with path.open("a", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        if new:
            w.writerow(header)
        w.writerows(rows)


# ---------------------------------------------------------------------------
def cmd_solve(args) -> int:
    inst = _load(args.instance, args.n)
    tables = build_tables(inst, args.alpha)
    bc = BranchAndCut(inst, tables, args.formulation, time_limit=args.time_limit,
                      node_limit=args.node_limit, lp_backend=args.lp_backend)
    report = bc.run(seed=args.seed)
    print(f"{report.instance} n={report.n} alpha={report.alpha} kind={report.kind.value} "
          f"status={report.status.value} lb={report.lower_bound:.6f} ub={report.upper_bound:.6f} "
          f"nodes={report.stats.nodes} time={report.time_s:.2f}s")
    if args.json:
        Path(args.json).write_text(report.to_json(timing=not args.no_timing), encoding="utf-8")
    if args.csv:
        _append_csv(args.csv, CSV_COLUMNS, [report.csv_row()])
    if args.dump_cuts:
        Path(args.dump_cuts).write_text(format_cut_log(bc.cut_log, inst), encoding="utf-8")
    if args.export_lp:
        Path(args.export_lp).write_text(bc.model.to_lp_text(bc.variable_names()), encoding="utf-8")
    if report.status is SolveStatus.INFEASIBLE:
        return EXIT_INFEASIBLE
    return EXIT_OK


def _bound_row(inst, alpha, lp_backend):
    chain = verify_bound_chain(inst, build_tables(inst, alpha), lp_backend=lp_backend)
    w, t = chain.bounds, chain.times

    def pct(k):
        return f"{100.0 * (w[k] - w['fx']) / w['fx']:.2f}"

    def ratio(k):
        return f"{t[k] / t['fx']:.2f}" if t["fx"] > 0 else ""

    return [inst.name, inst.n, str(alpha)] + [f"{w[k]:.6f}" for k in ("fx", "fx+", "fx++", "fxy*", "fxy")] + [
        pct("fx+"), pct("fx++"), pct("fxy*"), int(chain.plus_equals_star)] + [
        f"{t[k]:.3f}" for k in ("fx", "fx+", "fx++", "fxy*")] + [ratio("fx++"), ratio("fxy*")]


def cmd_bounds(args) -> int:
    inst = _load(args.instance, args.n)
    alphas = args.alpha or [Alpha.parse(a) for a in GRID]
    rows = [_bound_row(inst, a, args.lp_backend) for a in alphas]
    out = csv.writer(sys.stdout, lineterminator="\n")
    out.writerow(BOUND_COLUMNS)
    out.writerows(rows)
    if args.csv:
        _append_csv(args.csv, BOUND_COLUMNS, rows)
    return EXIT_OK


def cmd_check(args) -> int:
    inst = _load(args.instance, args.n)
    tables = build_tables(inst, args.alpha)
    edges = []
    for k, line in enumerate(Path(args.tree).read_text(encoding="utf-8").splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 2:
            raise UsageError(f"{args.tree}:{k}: expected 'i j'")
        edges.append((int(parts[0]), int(parts[1])))
    try:
        verdict = check_tree(edges, tables)
    except TreeStructureError as exc:
        print(f"not a spanning tree: {exc}")
        return EXIT_FAIL
    for i, th in enumerate(verdict.theta):
        flag = "  VIOLATED" if i in verdict.violations else ""
        print(f"vertex {i}: theta={th:.9f}{flag}")
    w = inst.tree_weight(inst.eid(u, v) for u, v in edges)
    print(f"{'feasible' if verdict.feasible else 'infeasible'} alpha={args.alpha} weight={w:.6f}")
    return EXIT_OK if verdict.feasible else EXIT_FAIL


def cmd_gen(args) -> int:
    inst = _load(args.tsp, args.n)
    out = args.output or f"{Path(args.tsp).stem}-{inst.n}.amst"
    write_instance(inst, out)
    print(f"wrote {out} (n={inst.n}, m={inst.m})")
    return EXIT_OK


def cmd_bench(args) -> int:
    if args.instances:
        instances = [_load(p, args.n) for p in args.instances]
    else:
        instances = tsplib_suite(args.n)
    alphas = args.alpha or [Alpha.parse(a) for a in GRID]
    kinds = args.formulation or [FormulationKind.FX, FormulationKind.FX_PLUS,
                                 FormulationKind.FX_PLUSPLUS, FormulationKind.FXY_STAR]
    rows, agg = [], {}
    for a in alphas:
        for inst in instances:
            tables = build_tables(inst, a)
            for kind in kinds:
                bc = BranchAndCut(inst, tables, kind, time_limit=args.time_limit, lp_backend=args.lp_backend)
                rep = bc.run(seed=args.seed)
                rows.append(rep.csv_row())
                agg.setdefault((str(a), kind.value), []).append(rep)
                logging.getLogger(__name__).info("%s %s %s %s", inst.name, a, kind.value, rep.status.value)
    if args.out:
        _append_csv(args.out, CSV_COLUMNS, rows)
    header = ["alpha", "kind", "instances", "solved", "avg_root_gap_pct", "avg_nodes", "avg_time_s"]
    agg_rows = []
    for (a, k), reps in agg.items():
        gaps = [100.0 * (r.upper_bound - r.root_bound) / r.upper_bound for r in reps
                if r.status is SolveStatus.OPTIMAL]
        agg_rows.append([a, k, len(reps), sum(r.status is SolveStatus.OPTIMAL for r in reps),
                         f"{sum(gaps) / len(gaps):.2f}" if gaps else "",
                         f"{sum(r.stats.nodes for r in reps) / len(reps):.1f}",
                         f"{sum(r.time_s for r in reps) / len(reps):.2f}"])
    w = csv.writer(sys.stdout, lineterminator="\n")
    w.writerow(header)
    w.writerows(agg_rows)
    if args.aggregate:
        _append_csv(args.aggregate, header, agg_rows)
    return EXIT_OK


# ---------------------------------------------------------------------------
def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="alpha-mst", description="Angle-constrained minimum spanning trees")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, alpha_required=True):
        sp.add_argument("--n", type=int, default=None, help="use only the first N points")
        sp.add_argument("--lp-backend", choices=["simplex", "highs"], default="simplex")
        if alpha_required:
            sp.add_argument("--alpha", type=_alpha, required=True, help="angle as a multiple of pi, e.g. 2/3pi")

    s = sub.add_parser("solve", help="branch-and-cut on one instance")
    s.add_argument("instance")
    common(s)
    s.add_argument("--formulation", type=_kind, default=FormulationKind.FX_PLUSPLUS,
                   help="fx | fx+ | fx++ | fxy* | fxy (default fx++)")
    s.add_argument("--time-limit", type=_positive, default=None)
    s.add_argument("--node-limit", type=int, default=None)
    s.add_argument("--seed", type=int, default=None)
    s.add_argument("--json", help="write the JSON report here")
    s.add_argument("--csv", help="append one CSV record here")
    s.add_argument("--no-timing", action="store_true", help="omit timing fields from the JSON report")
    s.add_argument("--dump-cuts", help="write every generated cut as text rows")
    s.add_argument("--export-lp", help="write the final LP in LP-file format")
    s.set_defaults(func=cmd_solve)

    b = sub.add_parser("bounds", help="root bounds of all formulations")
    b.add_argument("instance")
    common(b, alpha_required=False)
    b.add_argument("--alpha", type=_alpha, action="append", help="repeatable; default is the six-angle grid")
    b.add_argument("--csv")
    b.set_defaults(func=cmd_bounds)

    c = sub.add_parser("check", help="angular feasibility of a tree file ('i j' per line, 0-based)")
    c.add_argument("instance")
    c.add_argument("tree")
    common(c)
    c.set_defaults(func=cmd_check)

    g = sub.add_parser("gen", help="extract a first-n-points instance from a TSPLIB file")
    g.add_argument("tsp")
    g.add_argument("--n", type=int, default=None)
    g.add_argument("-o", "--output")
    g.set_defaults(func=cmd_gen)

    h = sub.add_parser("bench", help="solve an instance x alpha grid")
    h.add_argument("instances", nargs="*", help="instance files (default: bundled suite)")
    h.add_argument("--n", type=int, default=15)
    h.add_argument("--lp-backend", choices=["simplex", "highs"], default="simplex")
    h.add_argument("--alpha", type=_alpha, action="append")
    h.add_argument("--formulation", type=_kind, action="append")
    h.add_argument("--time-limit", type=_positive, default=60.0)
    h.add_argument("--seed", type=int, default=None)
    h.add_argument("--out", help="append per-run CSV records here")
    h.add_argument("--aggregate", help="append the aggregate table here")
    h.set_defaults(func=cmd_bench)
    return p


def configure_logging():
    level = os.environ.get("ALPHA_MST_LOG", "quiet").strip().lower()
    logging.basicConfig(level=LOG_LEVELS.get(level, logging.WARNING), stream=sys.stderr,
                        format="%(levelname)s %(name)s: %(message)s")


def main(argv=None) -> int:
    configure_logging()
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, InstanceError, GeometryError, OSError) as exc:
        print(f"alpha-mst: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
