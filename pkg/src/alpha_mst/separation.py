"""Separation routines for subtour, lifted angular and odd-cycle cuts."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from . import kernels
from .model import Cut, CutKind, as_x, make_cut

VIOLATION_TOL = 1e-6
SUPPORT_TOL = 1e-6
LAC_SUPPORT_CAP = 22


class SeparationError(RuntimeError):
    pass


def _components(n: int, edges: np.ndarray) -> list[list[int]]:
    parent = np.arange(n)

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for u, v in edges:
        ru, rv = find(u), find(v)
        if ru != rv:
            parent[max(ru, rv)] = min(ru, rv)
    groups: dict[int, list[int]] = {}
    for a in range(n):
        groups.setdefault(find(a), []).append(a)
    return list(groups.values())


def _inside(instance, S) -> np.ndarray:
    """Edge ids with both endpoints in S."""
    mask = np.zeros(instance.n, dtype=bool)
    mask[list(S)] = True
    return np.flatnonzero(mask[instance.edges[:, 0]] & mask[instance.edges[:, 1]])


def sec_cut(instance, S, note: str = "") -> Cut:
    S = sorted(int(v) for v in S)
    return make_cut(CutKind.SEC, _inside(instance, S), len(S) - 1, note or f"S={S}")


# ---------------------------------------------------------------------------
# subtour elimination
# ---------------------------------------------------------------------------
def separate_sec_heuristic(instance, point, tol: float = VIOLATION_TOL) -> list[Cut]:
    """Component-based SEC search: support components, then near-one components."""
    x = as_x(point)
    n = instance.n
    found: dict[tuple, Cut] = {}
    for thresh in (SUPPORT_TOL, 1.0 - SUPPORT_TOL):
        keep = x > thresh if thresh < 0.5 else x >= thresh
        for S in _components(n, instance.edges[keep]):
            if len(S) < 2 or len(S) == n:
                continue
            cut = sec_cut(instance, S)
            if cut.key not in found and cut.violation(x) > tol:
                found[cut.key] = cut
    return sorted(found.values(), key=lambda c: (-c.violation(x), c.support))


def separate_sec_exact(instance, point, tol: float = VIOLATION_TOL) -> list[Cut]:
    """Exact SEC separation by node-weighted minimum cuts.

    With d_i = x(delta(i)) and p_i = 1 - d_i/2, every S satisfies
    |S| - 1 - x(E(S)) = sum_{i in S} p_i + x(delta(S))/2 - 1, which is a cut
    capacity plus a constant.  Run k = 0..n-2 keeps vertex k on the source
    side and vertices 0..k-1 on the sink side, so together the runs cover
    every nonempty proper subset.  All violated sets met are returned, most
    violated first.  The point must satisfy x(E) = n - 1; otherwise V itself
    can be the minimiser and hide smaller violated sets.
    """
    x = as_x(point)
    n = instance.n
    src, snk = n, n + 1
    half = x / 2.0
    d = np.zeros(n)
    np.add.at(d, instance.edges[:, 0], x)
    np.add.at(d, instance.edges[:, 1], x)
    p = 1.0 - d / 2.0
    base = np.zeros((n + 2, n + 2))
    base[instance.edges[:, 0], instance.edges[:, 1]] = half
    base[instance.edges[:, 1], instance.edges[:, 0]] = half
    pos = p > 0
    base[np.flatnonzero(pos), snk] = p[pos]
    base[src, np.flatnonzero(~pos)] = -p[~pos]
    const = float(p[~pos].sum()) - 1.0
    found: dict[tuple, Cut] = {}
    for k in range(n - 1):
        cap = base.copy()
        cap[src, k] = np.inf
        cap[:k, snk] = np.inf
        value, side = kernels.min_cut(cap, src, snk)
        gap = value + const
        if gap < -tol:
            S = np.flatnonzero(side[:n])
            if 2 <= S.size < n:
                cut = sec_cut(instance, S)
                if cut.violation(x) > tol:
                    found.setdefault(cut.key, cut)
    return sorted(found.values(), key=lambda c: (-c.violation(x), c.support))


# ---------------------------------------------------------------------------
# lifted angular cuts
# ---------------------------------------------------------------------------
@dataclass
class LacCandidate:
    vertex: int
    neighbors: tuple
    v: int
    counts: dict

    def edges(self, instance) -> list[int]:
        return [instance.eid(self.vertex, j) for j in self.neighbors]


def cover_count(i: int, j: int, s: Iterable[int], tables) -> int:
    """Number of rays i->k, k in s, reached from ray i->j within an alpha rotation."""
    s = list(s)
    return int(np.count_nonzero(tables.covers[i, j, s])) if s else 0


def cover_value(i: int, s: Sequence[int], tables) -> tuple[int, dict]:
    """Cover value v of the star subset ``s`` (given as neighbor vertices of ``i``)."""
    s = list(dict.fromkeys(int(j) for j in s))
    if not s:
        raise ValueError("cover value of an empty subset")
    counts = {j: cover_count(i, j, s, tables) for j in s}
    return max(counts.values()), counts


def lift_lac(i: int, s: Sequence[int], tables, order: Sequence[int] | None = None) -> LacCandidate:
    """Grow ``s`` by every neighbor that leaves the cover value unchanged.

    Candidates are scanned in ``order`` (default: vertex index).  One pass is
    enough: a rejected candidate raises the cover value of every superset too.
    """
    cur = list(dict.fromkeys(int(j) for j in s))
    v, _ = cover_value(i, cur, tables)
    if order is None:
        order = range(tables.n)
    for k in order:
        k = int(k)
        if k == i or k in cur:
            continue
        if cover_value(i, cur + [k], tables)[0] <= v:
            cur.append(k)
    v2, counts = cover_value(i, cur, tables)
    assert v2 == v
    return LacCandidate(i, tuple(cur), v, counts)


def _star_support(instance, x, i):
    inc = instance.incident(i)
    sup = inc[x[inc] > SUPPORT_TOL]
    order = np.lexsort((sup, -x[sup]))
    return sup[order]


def separate_lac(instance, tables, point, cover_mode: bool = False,
                 tol: float = VIOLATION_TOL) -> list[Cut]:
    """At most one cut per vertex: the most violated subset of the star support.

    The subset maximising sum(x) - v is found by enumeration and then lifted
    (lifting keeps the rhs and only adds variables, so the lifted cut is at
    least as violated).  With ``cover_mode`` only non-admissible subsets are
    considered, the rhs is ``|s| - 1`` and no lifting is done.
    """
    x = as_x(point)
    cuts = []
    for i in range(instance.n):
        sup = _star_support(instance, x, i)[:LAC_SUPPORT_CAP]
        if sup.size < 2:
            continue
        nbr = np.array([instance.other(e, i) for e in sup])
        cov = tables.covers[i][np.ix_(nbr, nbr)]
        masks = (cov.astype(np.int64) << np.arange(nbr.size, dtype=np.int64)).sum(axis=1)
        best, _ = kernels.best_violated_subset(masks, x[sup], cover_mode, tol)
        if best == 0:
            continue
        chosen = [int(nbr[b]) for b in range(nbr.size) if best >> b & 1]
        if cover_mode:
            edges = [instance.eid(i, j) for j in chosen]
            cut = make_cut(CutKind.LAC, edges, len(chosen) - 1, f"cover at {i}")
        else:
            rest = [e for e in instance.incident(i) if instance.other(e, i) not in chosen]
            rest.sort(key=lambda e: (-x[e], e))
            cand = lift_lac(i, chosen, tables, order=[instance.other(e, i) for e in rest])
            cut = make_cut(CutKind.LAC, cand.edges(instance), cand.v, f"lifted at {i}")
        if cut.violation(x) > tol:
            cuts.append(cut)
    return cuts


def separate_cover(instance, tables, point, tol: float = VIOLATION_TOL) -> list[Cut]:
    return separate_lac(instance, tables, point, cover_mode=True, tol=tol)


# ---------------------------------------------------------------------------
# conflict graph and odd cycles
# ---------------------------------------------------------------------------
@dataclass
class ConflictGraph:
    """Graph on edge ids; adjacent edges share a vertex and form a non-admissible pair."""

    n_vertices: int
    pairs: np.ndarray  # (K, 2), first < second, lexicographically sorted

    def __post_init__(self):
        pairs = np.asarray(self.pairs, dtype=np.int64).reshape(-1, 2)
        pairs = np.sort(pairs, axis=1)
        if pairs.size:
            pairs = np.unique(pairs, axis=0)
            if np.any(pairs[:, 0] == pairs[:, 1]):
                raise ValueError("conflict graph cannot have loops")
        self.pairs = pairs
        self.adj = [set() for _ in range(self.n_vertices)]
        for a, b in pairs:
            self.adj[a].add(int(b))
            self.adj[b].add(int(a))

    @property
    def n_edges(self) -> int:
        return int(self.pairs.shape[0])

    def adjacent(self, a: int, b: int) -> bool:
        return b in self.adj[a]


def build_conflict_graph(instance, tables) -> ConflictGraph:
    n = instance.n
    pairs = []
    for i in range(n):
        c = tables.covers[i]
        nb = np.array([j for j in range(n) if j != i])
        sub = c[np.ix_(nb, nb)]
        clash = ~(sub | sub.T)
        np.fill_diagonal(clash, False)
        a, b = np.nonzero(np.triu(clash, k=1))
        for ja, jb in zip(nb[a], nb[b]):
            pairs.append((instance.eid(i, ja), instance.eid(i, jb)))
    return ConflictGraph(instance.m, np.array(pairs, dtype=np.int64).reshape(-1, 2))


def _simple_odd_cycle(walk: list[int]) -> list[int] | None:
    """Shortest-split reduction of a closed walk (w0..wL, w0 == wL, L odd) to a simple odd cycle."""
    seq = list(walk[:-1])
    while True:
        pos: dict[int, int] = {}
        split = None
        for t, v in enumerate(seq):
            if v in pos:
                split = (pos[v], t)
                break
            pos[v] = t
        if split is None:
            return seq if len(seq) % 2 == 1 and len(seq) >= 3 else None
        a, b = split
        inner = seq[a:b]
        outer = seq[:a] + seq[b:]
        seq = inner if len(inner) % 2 == 1 else outer


def _odd_hole(cycle: list[int], graph: ConflictGraph) -> list[int]:
    """Shrink an odd cycle along chords, always keeping the odd side."""
    cyc = list(cycle)
    while True:
        L = len(cyc)
        chord = None
        for a in range(L):
            for b in range(a + 2, L):
                if a == 0 and b == L - 1:
                    continue
                if graph.adjacent(cyc[a], cyc[b]):
                    chord = (a, b)
                    break
            if chord:
                break
        if chord is None:
            return cyc
        a, b = chord
        part = cyc[a:b + 1]
        cyc = part if len(part) % 2 == 1 else cyc[b:] + cyc[:a + 1]


def separate_odd_cycle(point, conflict: ConflictGraph, tol: float = VIOLATION_TOL) -> list[Cut]:
    """Odd-cycle cuts from shortest odd closed walks in the bipartite double cover.

    Edge weights (1 - x_e - x_f)/2 must be non-negative, i.e. every pair
    inequality x_e + x_f <= 1 already holds.  Vertices with x = 0 cannot lie
    on a violated cycle, so the search runs on the support only.
    """
    x = as_x(point)
    act = np.flatnonzero(x > SUPPORT_TOL)
    if act.size < 3 or conflict.n_edges == 0:
        return []
    local = np.full(conflict.n_vertices, -1, dtype=np.int64)
    local[act] = np.arange(act.size)
    pr = conflict.pairs
    keep = (local[pr[:, 0]] >= 0) & (local[pr[:, 1]] >= 0)
    pr = pr[keep]
    if pr.shape[0] < 3:
        return []
    w = (1.0 - x[pr[:, 0]] - x[pr[:, 1]]) / 2.0
    if np.any(w < -tol):
        k = int(np.argmin(w))
        raise SeparationError(
            f"pair inequality x[{pr[k, 0]}] + x[{pr[k, 1]}] <= 1 is violated; "
            "separate angular cuts before odd cycles")
    w = np.maximum(w, 0.0)
    p = act.size
    a, b = local[pr[:, 0]], local[pr[:, 1]]
    W = np.full((2 * p, 2 * p), np.inf)
    W[a, b + p] = w
    W[b + p, a] = w
    W[b, a + p] = w
    W[a + p, b] = w
    covered = np.zeros(p, dtype=bool)
    found: dict[tuple, Cut] = {}
    for s in range(p):
        if covered[s]:
            continue
        dist, pred = kernels.shortest_path(W, s, s + p)
        if not dist[s + p] < 0.5 - tol:
            continue
        walk = [s + p]
        while walk[-1] != s:
            walk.append(int(pred[walk[-1]]))
        walk = [v % p for v in reversed(walk)]
        cyc = _simple_odd_cycle(walk)
        if cyc is None:
            continue
        hole = _odd_hole([int(act[v]) for v in cyc], conflict)
        cut = make_cut(CutKind.ODD_CYCLE, hole, (len(hole) - 1) // 2, f"odd cycle of {len(hole)}")
        if cut.violation(x) > tol:
            found.setdefault(cut.key, cut)
            covered[local[list(hole)]] = True
    return sorted(found.values(), key=lambda c: (-c.violation(x), c.support))


# ---------------------------------------------------------------------------
# debug output
# ---------------------------------------------------------------------------
def format_cuts(cuts: Sequence[Cut], point, instance) -> str:
    """One row per cut: ``kind; support-edge-pairs; rhs; violation`` (violation at ``point``)."""
    x = as_x(point)
    return format_cut_log([(c, c.violation(x)) for c in cuts], instance)


def format_cut_log(entries, instance) -> str:
    """Same layout for (cut, violation) pairs recorded during a solve."""
    rows = []
    for c, viol in entries:
        pairs = " ".join(f"({instance.edges[e, 0]},{instance.edges[e, 1]})" for e in c.support)
        rows.append(f"{c.kind.value}; {pairs}; {c.rhs}; {viol:.6f}")
    return "\n".join(rows) + ("\n" if rows else "")
