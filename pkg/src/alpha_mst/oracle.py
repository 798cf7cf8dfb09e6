"""Independent checks: exhaustive solvers and certificate verifiers.

Nothing here is used by the solver itself; these routines exist so that the
solver's answers can be compared with brute force on small instances.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import kernels
from .geometry import rotation_angle, sector_span
from .model import as_x

MAX_ORACLE_N = 9


class OracleError(RuntimeError):
    pass


# ---------------------------------------------------------------------------
# exhaustive tree enumeration
# ---------------------------------------------------------------------------
def admissibility_table(tables) -> np.ndarray:
    """``adm[i, mask]``: is the neighbor set ``mask`` an admissible star at ``i``."""
    n = tables.n
    adm = np.zeros((n, 1 << n), dtype=bool)
    for i in range(n):
        for mask in range(1 << n):
            if mask >> i & 1:
                continue
            nb = [j for j in range(n) if mask >> j & 1]
            adm[i, mask] = len(nb) <= 1 or sector_span(tables.theta0[i, nb]) <= tables.alpha_rad + tables.tol
    return adm


@dataclass
class TreeSet:
    """All angle-feasible spanning trees of an instance."""

    masks: np.ndarray      # uint64 edge bitmasks
    weights: np.ndarray

    def __len__(self):
        return int(self.masks.size)

    def incidence(self, m: int) -> np.ndarray:
        bits = np.arange(m, dtype=np.uint64)
        return ((self.masks[:, None] >> bits[None, :]) & np.uint64(1)).astype(np.int8)


def alpha_trees(instance, tables) -> TreeSet:
    n = instance.n
    if n > MAX_ORACLE_N:
        raise OracleError(f"exhaustive enumeration refused for n={n} > {MAX_ORACLE_N}")
    if n == 2:
        return TreeSet(np.array([1], dtype=np.uint64), np.array([instance.weights[0]]))
    masks, w = kernels.enumerate_trees(n, instance.edge_index, admissibility_table(tables), instance.weights)
    order = np.lexsort((masks, w))
    return TreeSet(masks[order], w[order])


@dataclass
class OracleResult:
    feasible: bool
    weight: float = math.inf
    edge_ids: list = field(default_factory=list)
    n_trees: int = 0


def brute_force_optimum(instance, tables, trees: Optional[TreeSet] = None) -> OracleResult:
    trees = alpha_trees(instance, tables) if trees is None else trees
    if len(trees) == 0:
        return OracleResult(False)
    m0 = int(trees.masks[0])
    ids = [e for e in range(instance.m) if m0 >> e & 1]
    return OracleResult(True, float(trees.weights[0]), ids, len(trees))


def max_cut_violation(cuts, trees: TreeSet, m: int) -> float:
    """Largest lhs - rhs of any cut over all trees (<= 0 means every cut is valid)."""
    if len(trees) == 0 or not cuts:
        return -math.inf
    inc = trees.incidence(m)
    worst = -math.inf
    for c in cuts:
        lhs = inc[:, list(c.support)].sum(axis=1)
        worst = max(worst, float(lhs.max()) - c.rhs)
    return worst


# ---------------------------------------------------------------------------
# exhaustive separation
# ---------------------------------------------------------------------------
def exhaustive_sec(instance, point) -> tuple[float, Optional[list]]:
    """Max of x(E(S)) - (|S| - 1) over all S with 2 <= |S| < n, and a maximiser."""
    x = as_x(point)
    n = instance.n
    if n > 16:
        raise OracleError("subset enumeration refused for n > 16")
    masks = np.arange(1 << n, dtype=np.int64)
    size = np.bitwise_count(masks).astype(np.int64)
    u, v = instance.edges[:, 0], instance.edges[:, 1]
    inside = ((masks[:, None] >> u) & (masks[:, None] >> v) & 1).astype(float)
    val = inside @ x - (size - 1)
    ok = (size >= 2) & (size < n)
    val = np.where(ok, val, -np.inf)
    k = int(np.argmax(val))
    return float(val[k]), [j for j in range(n) if k >> j & 1]


def exhaustive_odd_cycles(point, graph, max_len: Optional[int] = None) -> tuple[float, Optional[list]]:
    """Max violation sum(x_C) - (|C|-1)/2 over simple odd cycles of ``graph`` (DFS).

    When every pair inequality x_a + x_b <= 1 holds, the slack (1 - x_a - x_b)/2
    summed along a cycle equals 1/2 minus its violation, so paths whose slack
    already reaches 1/2 are abandoned: no completion can be violated.  The
    returned maximum is then exact whenever it is positive.
    """
    x = as_x(point)
    N = graph.n_vertices
    best, arg = -math.inf, None
    limit = N if max_len is None else max_len
    adj = [sorted(a) for a in graph.adj]
    prune = all(x[a] + x[b] <= 1.0 for a, b in graph.pairs)
    for s in range(N):
        stack = [(s, [s], x[s], 0.0)]
        while stack:
            v, path, tot, slack = stack.pop()
            for u in adj[v]:
                if u == s and len(path) >= 3 and len(path) % 2 == 1:
                    viol = tot - (len(path) - 1) / 2
                    if viol > best:
                        best, arg = viol, list(path)
                elif u > s and u not in path and len(path) < limit:
                    step = slack + (1.0 - x[v] - x[u]) / 2
                    if prune and step >= 0.5:
                        continue
                    stack.append((u, path + [u], tot + x[u], step))
    return best, arg


# ---------------------------------------------------------------------------
# independent validity bound for a single cut
# ---------------------------------------------------------------------------
def _ray_angles(points):
    pts = np.asarray(points, dtype=float)
    n = len(pts)
    th = np.zeros((n, n))
    for i in range(n):
        for j in range(n):
            if i != j:
                th[i, j] = math.atan2(pts[j, 1] - pts[i, 1], pts[j, 0] - pts[i, 0]) % (2 * math.pi)
    return th


def _max_stable(nodes, adjacent) -> int:
    nodes = list(nodes)
    if not nodes:
        return 0
    v, rest = nodes[0], nodes[1:]
    without = _max_stable(rest, adjacent)
    with_v = 1 + _max_stable([u for u in rest if not adjacent(v, u)], adjacent)
    return max(without, with_v)


def cut_tree_bound(cut, instance, alpha_rad: float, tol: float = 1e-9) -> int:
    """Upper bound on |T & support| over all angle-feasible spanning trees T.

    Minimum of three independent bounds: the forest rank of the support, the
    best alpha-sector count when the support is one vertex star, and the
    largest set of support edges with no two forming a non-admissible pair
    (brute force, supports up to 30 edges).  ``bound <= cut.rhs`` proves the
    cut valid.  Later bounds are skipped once that already holds.  Angles are
    recomputed from the points.
    """
    edges = [tuple(int(v) for v in instance.edges[e]) for e in cut.support]
    verts = sorted({v for e in edges for v in e})
    parent = {v: v for v in verts}

    def find(a):
        while parent[a] != a:
            a = parent[a]
        return a

    comps = len(verts)
    for u, v in edges:
        ru, rv = find(u), find(v)
        if ru != rv:
            parent[ru] = rv
            comps -= 1
    bound = len(verts) - comps
    th = _ray_angles(instance.points)

    def rot(i, j, k):
        return (th[i, k] - th[i, j]) % (2 * math.pi)

    if bound <= cut.rhs:
        return bound
    shared = set(edges[0])
    for e in edges[1:]:
        shared &= set(e)
    if shared:
        i = shared.pop()
        nbr = [v for e in edges for v in e if v != i]
        star = max(sum(1 for k in nbr if rot(i, j, k) <= alpha_rad + tol) for j in range(instance.n) if j != i)
        bound = min(bound, star)
    if bound > cut.rhs and len(edges) <= 30:
        def adjacent(a, b):
            common = set(edges[a]) & set(edges[b])
            if not common:
                return False
            i = common.pop()
            ja = edges[a][0] if edges[a][1] == i else edges[a][1]
            jb = edges[b][0] if edges[b][1] == i else edges[b][1]
            return rot(i, ja, jb) > alpha_rad + tol and rot(i, jb, ja) > alpha_rad + tol
        bound = min(bound, _max_stable(range(len(edges)), adjacent))
    return bound


# ---------------------------------------------------------------------------
# sector span by anchors
# ---------------------------------------------------------------------------
def sector_span_by_anchor(angles: Sequence[float]) -> float:
    """Smallest over anchors a of the largest counter-clockwise rotation from a to another ray."""
    a = [float(t) for t in angles]
    if len(a) <= 1:
        return 0.0
    return min(max(rotation_angle(p, q) for q in a) for p in a)


# ---------------------------------------------------------------------------
# arc-variable restoration
# ---------------------------------------------------------------------------
@dataclass
class RestorationTrace:
    vertex: int
    order: list
    eta: list
    y_hat: np.ndarray
    early_exit: bool = False


class RestorationError(ValueError):
    pass


def restore_y(i: int, x_i, y_i, tables, tol: float = 1e-9):
    """Move arc mass counter-clockwise around ``i`` until y_ij <= x_ij for every j.

    ``x_i[j]`` is the edge value x_{ij} and ``y_i[j]`` the arc value y_{ij};
    entry ``i`` of both is ignored.  Returns (y_hat, trace).
    """
    n = tables.n
    x_i = np.asarray(x_i, dtype=float).copy()
    y_i = np.asarray(y_i, dtype=float).copy()
    nb = [j for j in range(n) if j != i]
    x_i[i] = 0.0
    y_i[i] = 0.0
    if np.any(y_i[nb] < -tol) or np.any(y_i[nb] > 1 + tol):
        raise RestorationError(f"arc bounds violated at vertex {i}")
    if abs(y_i[nb].sum() - 1.0) > 1e-7:
        raise RestorationError(f"assignment row of vertex {i} sums to {y_i[nb].sum():.9g}, not 1")
    for j in nb:
        cover = sum(y_i[k] for k in np.flatnonzero(tables.covers[i, :, j]))
        if x_i[j] > cover + 1e-7:
            raise RestorationError(f"sector row ({i},{j}) violated: x={x_i[j]:.9g} > {cover:.9g}")
    if x_i[nb].sum() < 1.0 - 1e-7:
        raise RestorationError(f"x(delta({i})) = {x_i[nb].sum():.9g} < 1")
    excess = y_i - x_i
    if not np.any(excess[nb] > tol):
        return y_i, RestorationTrace(i, [], [], y_i, early_exit=True)
    v1 = max(nb, key=lambda j: (excess[j], -j))
    rest = sorted((j for j in nb if j != v1), key=lambda j: (tables.rot[i, v1, j], j))
    order = [v1] + rest
    y = y_i.copy()
    eta = []
    p = len(order)
    for k in range(p):
        a, b = order[k], order[(k + 1) % p]
        e = max(0.0, y[a] - x_i[a])
        y[a] -= e
        y[b] += e
        eta.append(e)
    return y, RestorationTrace(i, order, eta, y)


# ---------------------------------------------------------------------------
# projection-cut certificate of a lifted angular cut
# ---------------------------------------------------------------------------
@dataclass
class FarkasCertificate:
    vertex: int
    tau: float
    beta: np.ndarray   # indexed by neighbor vertex; entry ``vertex`` unused

    def row_sums(self, tables) -> np.ndarray:
        """For every ray j: sum of beta_k over k with rotation(j -> k) <= alpha."""
        i = self.vertex
        sums = np.full(tables.n, np.nan)
        for j in range(tables.n):
            if j != i:
                sums[j] = float(self.beta[tables.covers[i, j]].sum())
        return sums

    def violations(self, tables, tol: float = 1e-12) -> list[int]:
        sums = self.row_sums(tables)
        bad = [j for j in range(tables.n) if j != self.vertex and sums[j] > self.tau + tol]
        if np.any(self.beta < 0) or self.tau > 1 + tol:
            bad.append(-1)
        return bad


class CertificateError(AssertionError):
    pass


def lac_as_projection_cut(i: int, s: Sequence[int], tables) -> FarkasCertificate:
    """Multipliers beta = 1/v on ``s``, tau = 1, checked against every ray at ``i``."""
    from .separation import cover_value

    v, _ = cover_value(i, s, tables)
    beta = np.zeros(tables.n)
    beta[list(s)] = 1.0 / v
    cert = FarkasCertificate(i, 1.0, beta)
    bad = cert.violations(tables)
    if bad:
        raise CertificateError(f"certificate rows {bad} violated at vertex {i} for s={list(s)}")
    return cert


def outside_cover_bounded(i: int, s: Sequence[int], u: int, tables) -> bool:
    """Coverage from an outside ray never exceeds the cover value of ``s``."""
    from .separation import cover_count, cover_value

    v, _ = cover_value(i, s, tables)
    return cover_count(i, u, s, tables) <= v


# ---------------------------------------------------------------------------
# relaxation bound chain
# ---------------------------------------------------------------------------
class BoundChainError(AssertionError):
    def __init__(self, message, payload):
        super().__init__(message)
        self.payload = payload


@dataclass
class BoundChain:
    bounds: dict
    times: dict
    cuts: dict
    plus_equals_star: bool

    def gap(self, hi: str = "fx++", lo: str = "fx") -> float:
        return (self.bounds[hi] - self.bounds[lo]) / self.bounds[lo]


def verify_bound_chain(instance, tables, tol: float = 1e-6, lp_backend: str = "simplex") -> BoundChain:
    """Root bounds of all five formulations and the provable order among them."""
    from .bnc import root_relaxation
    from .model import FormulationKind as K

    bounds, times, cuts = {}, {}, {}
    for kind in (K.FX, K.FX_PLUS, K.FX_PLUSPLUS, K.FXY_STAR, K.FXY):
        res = root_relaxation(instance, tables, kind, lp_backend=lp_backend)
        bounds[kind.value] = res.objective
        times[kind.value] = res.time_s
        cuts[kind.value] = res.cuts
    w = bounds
    slack = tol * (1.0 + abs(w["fxy*"]))
    failures = []
    if w["fx"] > w["fx+"] + slack:
        failures.append("w(fx) > w(fx+)")
    if w["fx+"] > w["fxy*"] + slack:
        failures.append("w(fx+) > w(fxy*)")
    if w["fx+"] > w["fx++"] + slack:
        failures.append("w(fx+) > w(fx++)")
    if abs(w["fxy"] - w["fxy*"]) > slack:
        failures.append("w(fxy) != w(fxy*)")
    if failures:
        raise BoundChainError("; ".join(failures), {"instance": instance.name, "alpha": str(tables.alpha),
                                                   "bounds": dict(w)})
    return BoundChain(bounds, times, cuts, abs(w["fx+"] - w["fxy*"]) <= slack)
