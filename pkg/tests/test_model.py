import numpy as np
import pytest

from alpha_mst.datasets import tsplib_suite
from alpha_mst.geometry import Alpha, build_tables
from alpha_mst.model import (CutKind, CutPool, FormulationKind, FractionalPoint, arc_var, build_initial_relaxation,
                             make_cut)

K = FormulationKind


@pytest.fixture(scope="module")
def inst15():
    return tsplib_suite(15)[0]


@pytest.mark.parametrize("kind,n_vars,n_rows", [
    (K.FX, 105, 1), (K.FX_PLUS, 105, 1), (K.FX_PLUSPLUS, 105, 1),
    (K.FXY_STAR, 315, 1 + 15 + 210), (K.FXY, 315, 1 + 15 + 210 + 210)])
def test_initial_relaxation_sizes(inst15, kind, n_vars, n_rows):
    lp = build_initial_relaxation(inst15, build_tables(inst15, Alpha(1, 2)), kind)
    assert lp.n_vars == n_vars and lp.n_rows == n_rows
    assert np.array_equal(lp.c[:105], inst15.weights)
    assert np.all(lp.c[105:] == 0)


def test_arc_numbering_is_a_bijection():
    n, m = 6, 15
    ids = [arc_var(i, j, n, m) for i in range(n) for j in range(n) if i != j]
    assert sorted(ids) == list(range(m, 3 * m))
    with pytest.raises(ValueError):
        arc_var(2, 2, n, m)


def test_sector_rows_follow_covers(fig, fig_tables):
    tb = fig_tables(Alpha(2, 3))
    lp = build_initial_relaxation(fig, tb, K.FXY_STAR)
    m = fig.m
    row = next(r for r in lp.rows if r.name == "sector_0_1")
    arcs = sorted(int(a) for a in row.indices if a >= m)
    expect = sorted(arc_var(0, int(k), 6, m) for k in np.flatnonzero(tb.covers[0, :, 1]))
    assert arcs == expect


def test_kind_parsing():
    assert K.parse("fx++") is K.FX_PLUSPLUS
    assert K.parse("FXY*") is K.FXY_STAR
    assert K.FXY.has_arcs and not K.FX_PLUS.has_arcs
    with pytest.raises(ValueError):
        K.parse("fz")


def test_cut_pool_dedupes():
    pool = CutPool()
    a = make_cut(CutKind.SEC, [3, 1, 2], 2, "first")
    b = make_cut(CutKind.SEC, [1, 2, 3], 2, "same cut, other note")
    assert pool.add(a) and not pool.add(b)
    assert pool.add(make_cut(CutKind.LAC, [1, 2, 3], 2))
    assert len(pool) == 2 and pool.count(CutKind.SEC) == 1
    x = np.zeros(5)
    x[[1, 2, 3]] = 0.9
    assert pool.violated(x) == pool.cuts
    assert a.row()[0] == [1, 2, 3] and a.violation(x) == pytest.approx(0.7)


def test_fractional_point_checks_y_length():
    FractionalPoint(np.zeros(3), np.zeros(6))
    with pytest.raises(ValueError):
        FractionalPoint(np.zeros(3), np.zeros(5))
