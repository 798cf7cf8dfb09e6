"""Branch-and-cut driver.

Best-first search over nodes that fix edge variables.  At every node the LP
is re-solved while separators find violated cuts; separators run in a fixed
order (SEC heuristic, SEC exact, angular cuts, odd cycles) and a class is
only tried when every earlier class came back empty.  Odd cycles are only
separated at depth <= 3 (root depth is 1).
"""
from __future__ import annotations

import heapq
import json
import logging
import math
import time
from collections import Counter
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

import numpy as np

from . import linprog
from .geometry import TreeStructureError, check_tree
from .heuristic import construct, lp_guided
from .linprog import INT_TOL, Basis, LpError, LpStatus
from .model import CutKind, CutPool, FormulationKind, build_initial_relaxation, make_cut
from .separation import (build_conflict_graph, lift_lac, separate_lac, separate_odd_cycle,
                         separate_sec_exact, separate_sec_heuristic)

log = logging.getLogger(__name__)

ODD_CYCLE_MAX_DEPTH = 3
REL_PRUNE_TOL = 1e-7


class SolveStatus(str, Enum):
    OPTIMAL = "OPTIMAL"
    TIME_LIMIT = "TIME_LIMIT"
    NODE_LIMIT = "NODE_LIMIT"
    INFEASIBLE = "INFEASIBLE"


@dataclass
class NodeRecord:
    depth: int
    bound: float
    fixings: tuple = ()
    order: int = 0
    basis: Optional[Basis] = field(default=None, repr=False)

    def __post_init__(self):
        if self.depth < 1:
            raise ValueError("node depth starts at 1")
        seen = {}
        for e, v in self.fixings:
            if seen.get(e, v) != v:
                raise ValueError(f"edge {e} fixed both ways")
            seen[e] = v

    def key(self):
        return (self.bound, self.depth, self.order)


def branch(node: NodeRecord, x, weights, first_order: int = 0):
    """Children fixing the most fractional x_e to 0 and 1 (ties: larger weight, then id)."""
    x = np.asarray(x, dtype=float)[: len(weights)]
    frac = np.abs(x - np.round(x))
    cand = np.flatnonzero(frac > INT_TOL)
    if cand.size == 0:
        raise ValueError("branching requires a fractional variable")
    score = np.abs(x[cand] - 0.5)
    pick = cand[np.lexsort((cand, -np.asarray(weights)[cand], score))[0]]
    kids = []
    for k, val in enumerate((0, 1)):
        kids.append(NodeRecord(node.depth + 1, node.bound, node.fixings + ((int(pick), val),),
                               first_order + k, node.basis))
    return int(pick), kids


@dataclass
class SolveStats:
    nodes: int = 0
    lp_solves: int = 0
    lp_iterations: int = 0
    sec_cuts: int = 0
    lac_cuts: int = 0
    cycle_cuts: int = 0
    safety_cuts: int = 0
    heuristic_improvements: int = 0
    cycle_calls_by_depth: Counter = field(default_factory=Counter)
    rounds_by_depth: Counter = field(default_factory=Counter)

    def to_dict(self):
        return {
            "nodes": self.nodes,
            "lp_solves": self.lp_solves,
            "lp_iterations": self.lp_iterations,
            "sec_cuts": self.sec_cuts,
            "lac_cuts": self.lac_cuts,
            "cycle_cuts": self.cycle_cuts,
            "safety_cuts": self.safety_cuts,
            "heuristic_improvements": self.heuristic_improvements,
            "cycle_calls_by_depth": {str(d): c for d, c in sorted(self.cycle_calls_by_depth.items())},
            "rounds_by_depth": {str(d): c for d, c in sorted(self.rounds_by_depth.items())},
        }


CSV_COLUMNS = ["instance", "n", "alpha", "kind", "status", "lb", "ub", "root_lb", "nodes",
               "sec_cuts", "lac_cuts", "cycle_cuts", "time_s"]

REPORT_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "required": ["instance", "n", "alpha", "alpha_radians", "kind", "status", "lower_bound",
                 "upper_bound", "root_bound", "tree", "stats", "limits", "seed"],
    "properties": {
        "instance": {"type": "string"},
        "n": {"type": "integer", "minimum": 2},
        "alpha": {"type": "string"},
        "alpha_radians": {"type": "number"},
        "kind": {"enum": [k.value for k in FormulationKind]},
        "status": {"enum": [s.value for s in SolveStatus]},
        "lower_bound": {"type": ["number", "null"]},
        "upper_bound": {"type": ["number", "null"]},
        "root_bound": {"type": ["number", "null"]},
        "tree": {"type": ["array", "null"],
                 "items": {"type": "array", "items": {"type": "integer"}, "minItems": 2, "maxItems": 2}},
        "stats": {"type": "object",
                  "required": ["nodes", "lp_solves", "sec_cuts", "lac_cuts", "cycle_cuts",
                               "cycle_calls_by_depth"]},
        "limits": {"type": "object"},
        "seed": {"type": ["integer", "null"]},
        "time_s": {"type": "number"},
    },
}


def _num(v):
    return None if v is None or not math.isfinite(v) else float(v)


@dataclass
class SolveReport:
    instance: str
    n: int
    alpha: str
    alpha_radians: float
    kind: FormulationKind
    status: SolveStatus
    lower_bound: float
    upper_bound: float
    root_bound: float
    tree: Optional[list]
    stats: SolveStats
    time_s: float
    time_limit: Optional[float] = None
    node_limit: Optional[int] = None
    seed: Optional[int] = None
    cuts: list = field(default_factory=list, repr=False)

    @property
    def gap(self) -> float:
        if not (math.isfinite(self.upper_bound) and math.isfinite(self.lower_bound)):
            return math.inf
        return (self.upper_bound - self.lower_bound) / max(1e-12, abs(self.upper_bound))

    def to_dict(self, timing: bool = True) -> dict:
        out = {
            "instance": self.instance,
            "n": self.n,
            "alpha": self.alpha,
            "alpha_radians": self.alpha_radians,
            "kind": self.kind.value,
            "status": self.status.value,
            "lower_bound": _num(self.lower_bound),
            "upper_bound": _num(self.upper_bound),
            "root_bound": _num(self.root_bound),
            "tree": [list(map(int, e)) for e in self.tree] if self.tree is not None else None,
            "stats": self.stats.to_dict(),
            "limits": {"time_limit": self.time_limit, "node_limit": self.node_limit},
            "seed": self.seed,
        }
        if timing:
            out["time_s"] = round(self.time_s, 6)
        return out

    def to_json(self, timing: bool = True) -> str:
        return json.dumps(self.to_dict(timing), indent=2, sort_keys=True) + "\n"

    def csv_row(self) -> list:
        def fmt(v):
            return "" if v is None or not math.isfinite(v) else repr(float(v))

        return [self.instance, self.n, self.alpha, self.kind.value, self.status.value,
                fmt(self.lower_bound), fmt(self.upper_bound), fmt(self.root_bound),
                self.stats.nodes, self.stats.sec_cuts, self.stats.lac_cuts, self.stats.cycle_cuts,
                f"{self.time_s:.3f}"]


@dataclass
class RootResult:
    objective: float
    x: np.ndarray
    y: Optional[np.ndarray]
    cuts: list
    rounds: int
    stats: SolveStats
    time_s: float


class BranchAndCut:
    """State of one solve: a single LP model that accumulates every cut."""

    def __init__(self, instance, tables, kind: FormulationKind, time_limit=None, node_limit=None,
                 lp_backend: str = "simplex"):
        self.instance = instance
        self.tables = tables
        self.kind = kind
        self.m = instance.m
        self.time_limit = time_limit
        self.node_limit = node_limit
        self.lp_backend = lp_backend
        self.model = build_initial_relaxation(instance, tables, kind)
        self.pool = CutPool()
        self.cut_log: list = []
        self.conflict = build_conflict_graph(instance, tables) if kind is FormulationKind.FX_PLUSPLUS else None
        self.stats = SolveStats()
        self.ub = math.inf
        self.best_ids: Optional[list] = None
        self.t0 = time.perf_counter()

    # -- helpers -------------------------------------------------------
    def elapsed(self) -> float:
        return time.perf_counter() - self.t0

    def timed_out(self) -> bool:
        return self.time_limit is not None and self.elapsed() >= self.time_limit

    def prune_tol(self) -> float:
        return REL_PRUNE_TOL * (1.0 + abs(self.ub)) if math.isfinite(self.ub) else 0.0

    def _lp(self, basis):
        if self.lp_backend == "highs":
            sol = linprog.solve_highs(self.model)
        else:
            sol = linprog.solve(self.model, warm_start=basis)
        self.stats.lp_solves += 1
        self.stats.lp_iterations += sol.iterations
        if sol.status not in (LpStatus.OPTIMAL, LpStatus.INFEASIBLE):
            raise LpError(f"LP solve ended with status {sol.status.value}")
        return sol

    def _add(self, cuts, x=None) -> list:
        new = [c for c in cuts if self.pool.add(c)]
        for c in new:
            self.cut_log.append((c, c.violation(x) if x is not None else float("nan")))
        if new:
            self.model.add_rows([c.row() for c in new])
            for c in new:
                if c.kind is CutKind.SEC:
                    self.stats.sec_cuts += 1
                elif c.kind is CutKind.LAC:
                    self.stats.lac_cuts += 1
                else:
                    self.stats.cycle_cuts += 1
        return new

    def offer(self, ids) -> bool:
        ids = sorted(int(e) for e in ids)
        w = self.instance.tree_weight(ids)
        if w < self.ub - self.prune_tol():
            self.ub = w
            self.best_ids = ids
            return True
        return False

    # -- cutting planes ------------------------------------------------
    def separate(self, x, depth: int) -> list:
        inst = self.instance
        self.stats.rounds_by_depth[depth] += 1
        new = self._add(separate_sec_heuristic(inst, x), x)
        if not new:
            new = self._add(separate_sec_exact(inst, x), x)
        if new or self.kind.has_arcs:
            return new
        new = self._add(separate_lac(inst, self.tables, x, cover_mode=self.kind is FormulationKind.FX), x)
        if new:
            return new
        if self.kind is FormulationKind.FX_PLUSPLUS and depth <= ODD_CYCLE_MAX_DEPTH:
            new = self._add(self._odd_cycles(x, depth), x)
        return new

    def _odd_cycles(self, x, depth: int) -> list:
        self.stats.cycle_calls_by_depth[depth] += 1
        return separate_odd_cycle(x, self.conflict)

    def cut_loop(self, node: NodeRecord):
        """Returns (solution, outcome, rounds); outcome is done / infeasible / pruned / time."""
        basis = node.basis
        rounds = 0
        while True:
            sol = self._lp(basis)
            if not sol.optimal:
                return sol, "infeasible", rounds
            if sol.objective >= self.ub - self.prune_tol():
                return sol, "pruned", rounds
            if self.timed_out():
                return sol, "time", rounds
            x = sol.x[: self.m]
            new = self.separate(x, node.depth)
            rounds += 1
            if log.isEnabledFor(logging.DEBUG):
                kinds = Counter(c.kind.value for c in new)
                log.debug("depth %d round %d obj %.9g cuts %s", node.depth, rounds, sol.objective, dict(kinds))
            if not new:
                return sol, "done", rounds
            basis = sol.basis

    def _apply(self, node: NodeRecord):
        self.model.lb[: self.m] = 0.0
        self.model.ub[: self.m] = 1.0
        for e, v in node.fixings:
            self.model.set_bounds(e, float(v), float(v))

    def _safety_cuts(self, ids, check) -> list:
        """LAC on the tree star of every vertex whose star is not admissible."""
        inst = self.instance
        nbrs = {i: [] for i in check.violations}
        for e in ids:
            u, v = (int(t) for t in inst.edges[e])
            if u in nbrs:
                nbrs[u].append(v)
            if v in nbrs:
                nbrs[v].append(u)
        cuts = []
        for i, s in nbrs.items():
            cand = lift_lac(i, s, self.tables)
            cuts.append(make_cut(CutKind.LAC, cand.edges(inst), cand.v, f"tree star at {i}"))
        return cuts

    # -- search --------------------------------------------------------
    def run(self, seed=None) -> SolveReport:
        inst = self.instance
        heur = construct(inst, self.tables)
        if heur.feasible:
            self.offer(heur.edge_ids)
        counter = 1
        heap = [(-math.inf, 1, 0, NodeRecord(1, -math.inf))]
        lb = -math.inf
        root_bound = math.nan
        status = None
        while heap:
            if self.timed_out():
                status = SolveStatus.TIME_LIMIT
                break
            if self.node_limit is not None and self.stats.nodes >= self.node_limit:
                status = SolveStatus.NODE_LIMIT
                break
            _, _, _, node = heapq.heappop(heap)
            if node.bound >= self.ub - self.prune_tol():
                continue
            lb = max(lb, node.bound)
            self._apply(node)
            sol, outcome, _ = self.cut_loop(node)
            self.stats.nodes += 1
            if node.depth == 1 and node.order == 0:
                root_bound = sol.objective
            if outcome == "time":
                node.bound = max(node.bound, sol.objective)
                node.basis = sol.basis
                heapq.heappush(heap, (node.bound, node.depth, node.order, node))
                status = SolveStatus.TIME_LIMIT
                break
            if outcome in ("infeasible", "pruned"):
                continue
            x = sol.x[: self.m]
            if np.all(np.abs(x - np.round(x)) <= INT_TOL):
                ids = np.flatnonzero(np.round(x) == 1)
                try:
                    check = check_tree([tuple(inst.edges[e]) for e in ids], self.tables)
                except TreeStructureError as exc:
                    raise RuntimeError(f"integral LP point passed SEC separation but is not a tree: {exc}")
                if check.feasible:
                    self.offer(ids)
                    continue
                new = self._add(self._safety_cuts(ids, check), x)
                self.stats.safety_cuts += len(new)
                if not new:
                    raise RuntimeError("angle-infeasible integral point could not be cut off")
                node.bound = max(node.bound, sol.objective)
                node.basis = sol.basis
                heapq.heappush(heap, (node.bound, node.depth, node.order, node))
                continue
            h = lp_guided(inst, self.tables, sol.x)
            if h.feasible and self.offer(h.edge_ids):
                self.stats.heuristic_improvements += 1
            parent = NodeRecord(node.depth, sol.objective, node.fixings, node.order, sol.basis)
            _, kids = branch(parent, x, inst.weights, counter)
            counter += len(kids)
            for kid in kids:
                heapq.heappush(heap, (kid.bound, kid.depth, kid.order, kid))
        if status is None:
            status = SolveStatus.OPTIMAL if self.best_ids is not None else SolveStatus.INFEASIBLE
            lb = self.ub
        else:
            open_bounds = [item[0] for item in heap]
            frontier = min(open_bounds) if open_bounds else self.ub
            lb = max(lb, min(frontier, self.ub))
        tree = [tuple(int(v) for v in inst.edges[e]) for e in self.best_ids] if self.best_ids else None
        return SolveReport(
            instance=inst.name, n=inst.n, alpha=str(self.tables.alpha), alpha_radians=self.tables.alpha_rad,
            kind=self.kind, status=status, lower_bound=lb, upper_bound=self.ub, root_bound=root_bound,
            tree=tree, stats=self.stats, time_s=self.elapsed(), time_limit=self.time_limit,
            node_limit=self.node_limit, seed=seed, cuts=list(self.pool.cuts))

    def variable_names(self) -> list[str]:
        n, m = self.instance.n, self.m
        names = [f"x_{u}_{v}" for u, v in self.instance.edges]
        if self.kind.has_arcs:
            names += [f"y_{i}_{j}" for i in range(n) for j in range(n) if j != i]
        return names

    def root(self) -> RootResult:
        sol, outcome, rounds = self.cut_loop(NodeRecord(1, -math.inf))
        self.stats.nodes = 1
        if outcome == "infeasible":
            obj = math.inf
        else:
            obj = sol.objective
        y = sol.x[self.m:] if self.kind.has_arcs else None
        return RootResult(obj, sol.x[: self.m].copy(), y, list(self.pool.cuts), rounds, self.stats, self.elapsed())


def solve(instance, tables, kind: FormulationKind, time_limit=None, node_limit=None, seed=None,
          lp_backend: str = "simplex") -> SolveReport:
    bc = BranchAndCut(instance, tables, kind, time_limit=time_limit, node_limit=node_limit, lp_backend=lp_backend)
    report = bc.run(seed=seed)
    log.info("%s alpha=%s %s: %s lb=%.9g ub=%.9g nodes=%d time=%.2fs", instance.name, tables.alpha,
             kind.value, report.status.value, report.lower_bound, report.upper_bound, report.stats.nodes,
             report.time_s)
    return report


def root_relaxation(instance, tables, kind: FormulationKind, time_limit=None,
                    lp_backend: str = "simplex") -> RootResult:
    """Root cutting-plane loop to convergence (no branching, no incumbent)."""
    bc = BranchAndCut(instance, tables, kind, time_limit=time_limit, lp_backend=lp_backend)
    return bc.root()
