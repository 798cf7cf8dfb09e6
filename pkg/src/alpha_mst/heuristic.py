"""Greedy construction of angle-feasible spanning trees."""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .model import as_x


class HeuristicStatus(Enum):
    FEASIBLE = "FEASIBLE"
    FAILED = "FAILED"


@dataclass
class HeuristicResult:
    status: HeuristicStatus
    edge_ids: list = field(default_factory=list)
    weight: float = float("inf")

    @property
    def feasible(self) -> bool:
        return self.status is HeuristicStatus.FEASIBLE

    def tree(self, instance) -> list[tuple[int, int]]:
        return [tuple(int(v) for v in instance.edges[e]) for e in self.edge_ids]


def construct(instance, tables, costs=None) -> HeuristicResult:
    """Kruskal scan by ``costs`` (ties by edge id) that keeps every star admissible.

    An edge is taken when it joins two components and both endpoint stars stay
    inside an alpha-sector.  No backtracking: if the scan ends with a forest
    the result is FAILED.
    """
    n = instance.n
    costs = instance.weights if costs is None else np.asarray(costs, dtype=float)
    if not np.all(np.isfinite(costs)):
        raise ValueError("edge costs must be finite")
    order = np.lexsort((np.arange(instance.m), costs))
    parent = list(range(n))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    star = [[] for _ in range(n)]
    chosen = []
    for e in order:
        u, v = (int(t) for t in instance.edges[e])
        ru, rv = find(u), find(v)
        if ru == rv:
            continue
        if not (tables.star_admissible(u, star[u] + [v]) and tables.star_admissible(v, star[v] + [u])):
            continue
        parent[ru] = rv
        star[u].append(v)
        star[v].append(u)
        chosen.append(int(e))
        if len(chosen) == n - 1:
            break
    if len(chosen) < n - 1:
        return HeuristicResult(HeuristicStatus.FAILED, sorted(chosen))
    ids = sorted(chosen)
    return HeuristicResult(HeuristicStatus.FEASIBLE, ids, instance.tree_weight(ids))


def lp_guided(instance, tables, point) -> HeuristicResult:
    """:func:`construct` under costs w_e (1 - x_e); the weight reported is the original one."""
    x = np.clip(as_x(point)[: instance.m], 0.0, 1.0)
    return construct(instance, tables, instance.weights * (1.0 - x))
