import numpy as np
import pytest
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import minimum_spanning_tree

from alpha_mst.geometry import Alpha, build_tables, check_tree
from alpha_mst.heuristic import HeuristicStatus, construct, lp_guided
from alpha_mst.instance import Instance
from alpha_mst.oracle import brute_force_optimum

from conftest import ALPHAS_SMALL, random_instance


def _scipy_mst_weight(inst):
    g = coo_matrix((inst.weights, (inst.edges[:, 0], inst.edges[:, 1])), shape=(inst.n, inst.n))
    return float(minimum_spanning_tree(g).sum())


def test_unconstrained_is_kruskal():
    rng = np.random.default_rng(0)
    for n in (2, 3, 6, 15, 30):
        inst = random_instance(rng, n)
        res = construct(inst, build_tables(inst, Alpha(2)))
        assert res.status is HeuristicStatus.FEASIBLE
        assert res.weight == pytest.approx(_scipy_mst_weight(inst), rel=1e-12)


def test_two_points():
    inst = Instance("pair", np.array([[0.0, 0.0], [1.0, 2.0]]))
    res = construct(inst, build_tables(inst, Alpha(1, 3)))
    assert res.feasible and res.edge_ids == [0] and res.weight == pytest.approx(np.sqrt(5))


def test_six_points_never_beats_oracle(fig, fig_tables):
    tb = fig_tables(Alpha(2, 3))
    res = construct(fig, tb)
    best = brute_force_optimum(fig, tb)
    if res.feasible:
        assert check_tree(res.tree(fig), tb).feasible
        assert res.weight >= best.weight - 1e-9


def test_feasible_results_pass_check_and_weight_is_original():
    rng = np.random.default_rng(1)
    seen = 0
    for k in range(40):
        inst = random_instance(rng, int(rng.integers(3, 9)))
        tb = build_tables(inst, ALPHAS_SMALL[k % len(ALPHAS_SMALL)])
        costs = rng.random(inst.m)
        res = construct(inst, tb, costs)
        if res.feasible:
            seen += 1
            assert check_tree(res.tree(inst), tb).feasible
            assert res.weight == pytest.approx(inst.tree_weight(res.edge_ids))
            assert res.weight >= brute_force_optimum(inst, tb).weight - 1e-9
        else:
            assert len(res.edge_ids) < inst.n - 1
    assert seen > 10


def test_lp_guided():
    rng = np.random.default_rng(2)
    inst = random_instance(rng, 7)
    tb = build_tables(inst, Alpha(1, 2))
    opt = brute_force_optimum(inst, tb)
    x = np.zeros(inst.m)
    x[opt.edge_ids] = 1.0
    # an integral tree point makes its own edges free, so the heuristic returns it
    res = lp_guided(inst, tb, x)
    assert res.feasible and res.edge_ids == sorted(opt.edge_ids)
    assert res.weight == pytest.approx(opt.weight)
    zero = lp_guided(inst, tb, np.zeros(inst.m))
    plain = construct(inst, tb)
    assert zero.status is plain.status and zero.edge_ids == plain.edge_ids


def test_non_finite_costs_rejected():
    inst = Instance("tri", np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]))
    with pytest.raises(ValueError):
        construct(inst, build_tables(inst, Alpha(1)), [1.0, np.nan, 2.0])
