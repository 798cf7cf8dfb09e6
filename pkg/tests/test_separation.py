import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from alpha_mst.geometry import Alpha, build_tables
from alpha_mst.instance import Instance
from alpha_mst.model import CutKind
from alpha_mst.oracle import alpha_trees, exhaustive_odd_cycles, exhaustive_sec, outside_cover_bounded, max_cut_violation
from alpha_mst.separation import (ConflictGraph, SeparationError, build_conflict_graph, cover_value, format_cuts,
                                  lift_lac, separate_cover, separate_lac, separate_odd_cycle, separate_sec_exact,
                                  separate_sec_heuristic)

from conftest import ALPHAS_SMALL, I, L, Q, T, U, Z, random_instance

THIRD = Alpha(1, 3)


def _star_point(inst, values):
    x = np.zeros(inst.m)
    for j, v in values.items():
        x[inst.eid(I, j)] = v
    return x


# --- cover value and lifting ------------------------------------------------
def test_cover_value_examples(fig_tables):
    tb = fig_tables(THIRD)
    v, counts = cover_value(I, [Z, U, T], tb)
    assert v == 1 and counts == {Z: 1, U: 1, T: 1}
    assert cover_value(I, [L, Z, U, T, Q], tb)[0] == 2
    assert cover_value(I, [Q], tb)[0] == 1


def test_lift_worked_example(fig_tables):
    tb = fig_tables(THIRD)
    cand = lift_lac(I, [Z, U, T], tb)
    assert set(cand.neighbors) == {L, Z, U, T} and cand.v == 1
    # q is rejected because it would raise the cover value to 2
    assert Q not in cand.neighbors
    assert cover_value(I, list(cand.neighbors) + [Q], tb)[0] == 2
    full = lift_lac(I, [Z, Q, U, T, L], tb)
    assert set(full.neighbors) == {Z, Q, U, T, L}


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10_000), st.integers(1, 11), st.integers(3, 8))
def test_lifting_keeps_cover_value_and_is_maximal(seed, twelfths, n):
    rng = np.random.default_rng(seed)
    inst = random_instance(rng, n)
    tb = build_tables(inst, Alpha(twelfths, 6))
    i = int(rng.integers(n))
    nb = [j for j in range(n) if j != i]
    s = list(rng.choice(nb, size=int(rng.integers(1, len(nb) + 1)), replace=False))
    v0 = cover_value(i, s, tb)[0]
    cand = lift_lac(i, s, tb, order=rng.permutation(n))
    assert cand.v == v0 == cover_value(i, cand.neighbors, tb)[0]
    for k in nb:
        if k not in cand.neighbors:
            assert cover_value(i, list(cand.neighbors) + [k], tb)[0] > cand.v
    # covers are implied: a non-admissible subset has v <= |s| - 1
    if not tb.star_admissible(i, s):
        assert v0 <= len(s) - 1


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10_000), st.integers(1, 23))
def test_outside_ray_never_exceeds_cover_value(seed, twelfths):
    rng = np.random.default_rng(seed)
    n = 7
    inst = random_instance(rng, n)
    tb = build_tables(inst, Alpha(twelfths, 12))
    i = int(rng.integers(n))
    nb = [j for j in range(n) if j != i]
    s = list(rng.choice(nb, size=int(rng.integers(1, len(nb))), replace=False))
    for u in nb:
        if u not in s:
            assert outside_cover_bounded(i, s, u, tb)


# --- LAC separation --------------------------------------------------------
def test_lac_half_point(fig, fig_tables):
    tb = fig_tables(THIRD)
    x = _star_point(fig, {Z: 0.5, U: 0.5, T: 0.5})
    cuts = [c for c in separate_lac(fig, tb, x) if fig.eid(I, Z) in c.support]
    assert len(cuts) == 1
    cut = cuts[0]
    assert cut.kind is CutKind.LAC and cut.rhs == 1
    assert cut.violation(x) == pytest.approx(0.5)
    assert fig.eid(I, L) in cut.support
    assert set(cut.support) == {fig.eid(I, j) for j in (L, Z, U, T)}
    cover = [c for c in separate_cover(fig, tb, x) if c.note == f"cover at {I}"]
    # the plain cover on the same subset has rhs 2 and is not violated at this point
    assert cover == []


def test_lac_pair_and_feasible_tree(fig, fig_tables):
    tb = fig_tables(THIRD)
    x = _star_point(fig, {U: 1.0, T: 1.0})
    cut = next(c for c in separate_lac(fig, tb, x) if fig.eid(I, U) in c.support)
    assert cut.violation(x) == pytest.approx(1.0)
    trees = alpha_trees(fig, tb)
    best = trees.incidence(fig.m)[0].astype(float)
    assert separate_lac(fig, tb, best) == []
    assert separate_cover(fig, tb, best) == []


# --- conflict graph --------------------------------------------------------
def test_conflict_graph_examples(fig, fig_tables):
    g = build_conflict_graph(fig, fig_tables(THIRD))
    assert g.adjacent(fig.eid(I, U), fig.eid(I, T))
    assert not g.adjacent(fig.eid(I, Z), fig.eid(I, Q))
    for a in (Alpha(1), Alpha(3, 2), Alpha(2)):
        assert build_conflict_graph(fig, fig_tables(a)).n_edges == 0


def test_conflict_graph_tiny_alpha():
    rng = np.random.default_rng(1)
    inst = random_instance(rng, 6)
    g = build_conflict_graph(inst, build_tables(inst, Alpha(1, 10**7)))
    # every pair of edges sharing a vertex conflicts (no collinear rays in random points)
    assert g.n_edges == inst.n * (inst.n - 1) * (inst.n - 2) // 2


# --- SEC -------------------------------------------------------------------
def _triangle_instance():
    pts = [(0, 0), (4, 0), (2, 3), (10, 10), (11, 12)]
    return Instance("tri", np.array(pts, dtype=float))


@pytest.mark.parametrize("value,violated", [(2 / 3, False), (0.7, True)])
def test_triangle_sec(value, violated):
    inst = _triangle_instance()
    x = np.zeros(inst.m)
    for a, b in itertools.combinations(range(3), 2):
        x[inst.eid(a, b)] = value
    x[inst.eid(3, 4)] = 1.0
    x[inst.eid(2, 3)] = 4 - 3 * value - 1.0
    cuts = separate_sec_exact(inst, x)
    tri = [c for c in cuts if set(c.support) == {inst.eid(a, b) for a, b in itertools.combinations(range(3), 2)}]
    if violated:
        assert tri and tri[0].violation(x) == pytest.approx(0.1)
    else:
        assert all(c.violation(x) > 1e-6 for c in cuts)
        assert not tri


def test_sec_tree_point_is_clean():
    rng = np.random.default_rng(4)
    inst = random_instance(rng, 7)
    x = np.zeros(inst.m)
    for j in range(1, 7):
        x[inst.eid(0, j)] = 1.0
    assert separate_sec_exact(inst, x) == [] and separate_sec_heuristic(inst, x) == []


def test_sec_heuristic_finds_integral_subtour():
    rng = np.random.default_rng(4)
    inst = random_instance(rng, 6)
    x = np.zeros(inst.m)
    for a, b in [(0, 1), (1, 2), (2, 0), (3, 4), (4, 5)]:
        x[inst.eid(a, b)] = 1.0
    cuts = separate_sec_heuristic(inst, x)
    assert cuts and all(c.violation(x) > 1e-6 for c in cuts)


def _random_point(rng, n, m):
    """Fractional x >= 0 with x(E) = n - 1 and x <= 1, often with a dense cluster."""
    while True:
        x = rng.random(m) * (rng.random(m) < rng.uniform(0.3, 0.9))
        x = np.round(x, int(rng.integers(1, 4)))
        if x.sum() == 0:
            continue
        x *= (n - 1) / x.sum()
        if x.max() <= 1.0:
            return x


def test_sec_exact_matches_enumeration():
    rng = np.random.default_rng(20)
    hits = 0
    for _ in range(200):
        n = int(rng.integers(3, 9))
        inst = random_instance(rng, n)
        x = _random_point(rng, n, inst.m)
        best, _ = exhaustive_sec(inst, x)
        cuts = separate_sec_exact(inst, x)
        assert bool(cuts) == (best > 1e-6)
        hits += bool(cuts)
        for c in cuts:
            assert c.violation(x) > 1e-6
        if cuts:
            assert cuts[0].violation(x) == pytest.approx(best, abs=1e-9)
    assert 20 < hits < 180


# --- odd cycles ------------------------------------------------------------
def test_triangle_odd_cycle():
    g = ConflictGraph(3, np.array([[0, 1], [1, 2], [0, 2]]))
    cuts = separate_odd_cycle(np.full(3, 0.5), g)
    assert len(cuts) == 1 and cuts[0].rhs == 1
    assert cuts[0].violation(np.full(3, 0.5)) == pytest.approx(0.5)
    assert separate_odd_cycle(np.zeros(3), g) == []


def test_negative_weight_is_an_error():
    g = ConflictGraph(3, np.array([[0, 1], [1, 2], [0, 2]]))
    with pytest.raises(SeparationError):
        separate_odd_cycle(np.array([0.9, 0.9, 0.1]), g)


def _random_conflict_point(rng, N):
    p = rng.uniform(0.15, 0.6)
    pairs = [(a, b) for a in range(N) for b in range(a + 1, N) if rng.random() < p]
    g = ConflictGraph(N, np.array(pairs, dtype=np.int64).reshape(-1, 2))
    # scale x so every pair inequality holds
    x = np.round(rng.random(N) * (rng.random(N) < 0.8), 2)
    for a, b in g.pairs:
        if x[a] + x[b] > 1:
            s = x[a] + x[b]
            x[a], x[b] = np.floor(x[a] / s * 100) / 100, np.floor(x[b] / s * 100) / 100
    return g, x


def test_odd_cycle_matches_enumeration():
    rng = np.random.default_rng(30)
    hits = 0
    for _ in range(200):
        N = int(rng.integers(3, 13))
        g, x = _random_conflict_point(rng, N)
        best, _ = exhaustive_odd_cycles(x, g)
        cuts = separate_odd_cycle(x, g)
        assert bool(cuts) == (best > 1e-6), (g.pairs.tolist(), x.tolist(), best)
        hits += bool(cuts)
        for c in cuts:
            assert c.violation(x) > 1e-6
            assert len(c.support) % 2 == 1
    assert hits > 20


def test_odd_hole_is_chordless():
    # pentagon 0-1-2-3-4 with chord (0,2): the short odd side (0,1,2) is a hole
    pairs = [(0, 1), (1, 2), (2, 3), (3, 4), (4, 0), (0, 2)]
    g = ConflictGraph(5, np.array(pairs))
    x = np.array([0.5, 0.5, 0.5, 0.5, 0.5])
    for c in separate_odd_cycle(x, g):
        sup = list(c.support)
        inner = sum(g.adjacent(a, b) for a, b in itertools.combinations(sup, 2))
        assert inner == len(sup)


# --- soundness against all alpha-trees -------------------------------------
def test_cuts_are_valid_for_every_alpha_tree():
    rng = np.random.default_rng(40)
    for k in range(25):
        n = int(rng.integers(4, 8))
        inst = random_instance(rng, n)
        tb = build_tables(inst, ALPHAS_SMALL[k % len(ALPHAS_SMALL)])
        trees = alpha_trees(inst, tb)
        x = rng.random(inst.m) * 0.8
        cuts = separate_sec_exact(inst, x) + separate_lac(inst, tb, x) + separate_cover(inst, tb, x)
        g = build_conflict_graph(inst, tb)
        cuts += separate_odd_cycle(np.minimum(x, 0.5), g)
        if len(trees):
            assert max_cut_violation(cuts, trees, inst.m) <= 0


def test_debug_dump_format(fig, fig_tables):
    tb = fig_tables(THIRD)
    x = _star_point(fig, {Z: 0.5, U: 0.5, T: 0.5})
    cuts = separate_lac(fig, tb, x)
    text = format_cuts(cuts, x, fig)
    rows = text.splitlines()
    assert len(rows) == len(cuts)
    kind, pairs, rhs, viol = rows[0].split("; ")
    assert kind == "LAC" and rhs == "1" and float(viol) == pytest.approx(0.5)
    assert pairs.startswith("(0,")
    assert format_cuts([], x, fig) == ""
