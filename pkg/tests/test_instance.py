import os
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from alpha_mst.datasets import bundled_names, synthetic_tsplib, tsplib_suite
from alpha_mst.instance import (Instance, InstanceError, TsplibError, edge_id, format_native, parse_native,
                                parse_tsplib, read_instance, sub_instance, write_instance)

SMALL_TSP = """NAME : tiny
TYPE : TSP
COMMENT : three points
DIMENSION : 3
EDGE_WEIGHT_TYPE : EUC_2D
NODE_COORD_SECTION
1 0 0
2 3 4
3 -1.5 2e1
EOF
"""


def test_parse_small_file():
    assert parse_tsplib(SMALL_TSP) == [(0.0, 0.0), (3.0, 4.0), (-1.5, 20.0)]
    assert parse_tsplib(SMALL_TSP.encode()) == parse_tsplib(SMALL_TSP)


def test_other_sections_ignored():
    text = SMALL_TSP.replace("EOF\n", "DISPLAY_DATA_SECTION\n1 5 5\n2 6 6\n3 7 7\nTOUR_SECTION\n1\n2\n3\n-1\nEOF\n")
    assert parse_tsplib(text) == parse_tsplib(SMALL_TSP)


def test_explicit_weight_type_rejected():
    with pytest.raises(TsplibError, match="EXPLICIT") as exc:
        parse_tsplib(SMALL_TSP.replace("EUC_2D", "EXPLICIT"))
    assert exc.value.line == 5


def test_empty_and_missing_sections():
    with pytest.raises(TsplibError, match="empty"):
        parse_tsplib("NAME : x\nEDGE_WEIGHT_TYPE : EUC_2D\nNODE_COORD_SECTION\nEOF\n")
    with pytest.raises(TsplibError, match="missing"):
        parse_tsplib("NAME : x\nEDGE_WEIGHT_TYPE : EUC_2D\nEOF\n")


def test_malformed_line_reports_line_number():
    with pytest.raises(TsplibError) as exc:
        parse_tsplib(SMALL_TSP.replace("2 3 4", "2 3 four"))
    assert exc.value.line == 8
    with pytest.raises(TsplibError, match="DIMENSION"):
        parse_tsplib(SMALL_TSP.replace("DIMENSION : 3", "DIMENSION : 4"))


def test_berlin52_first_point():
    d = os.environ.get("ALPHA_MST_TSPLIB_DIR")
    path = Path(d) / "berlin52.tsp" if d else None
    if path is None or not path.exists():
        pytest.skip("berlin52.tsp not available; set ALPHA_MST_TSPLIB_DIR")
    pts = parse_tsplib(path.read_bytes())
    assert len(pts) == 52 and pts[0] == (565.0, 575.0)
    assert sub_instance(pts, 15).m == 105
    assert sub_instance(pts, 52).m == 1326


def test_edge_numbering():
    n = 6
    ids = sorted(edge_id(i, j, n) for i in range(n) for j in range(i + 1, n))
    assert ids == list(range(15))
    assert edge_id(4, 1, n) == edge_id(1, 4, n)
    inst = Instance("x", np.random.default_rng(0).random((n, 2)))
    for e, (i, j) in enumerate(inst.edges):
        assert inst.eid(i, j) == inst.eid(j, i) == e == edge_id(i, j, n)


def test_weights_full_precision():
    inst = Instance("x", [(0, 0), (1, 1), (3, 0)])
    assert inst.weights[inst.eid(0, 1)] == np.sqrt(2.0)
    assert inst.weights[inst.eid(0, 2)] == 3.0


def test_sub_instance_and_errors():
    pts = [(0, 0), (1, 0), (2, 5)]
    two = sub_instance(pts, 2)
    assert two.m == 1 and two.weights[0] == 1.0
    with pytest.raises(InstanceError):
        sub_instance(pts, 4)
    with pytest.raises(InstanceError):
        sub_instance(pts, 1)
    with pytest.raises(InstanceError, match="coincide"):
        sub_instance([(0, 0), (1, 1), (0, 0)], 3)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10_000), st.integers(2, 12))
def test_native_round_trip(seed, n):
    rng = np.random.default_rng(seed)
    inst = Instance("r", rng.normal(size=(n, 2)) * 10.0 ** rng.integers(-3, 6))
    back = parse_native(format_native(inst))
    assert np.array_equal(back.points, inst.points)
    assert np.array_equal(back.weights, inst.weights)


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 10_000))
def test_triangle_inequality(seed):
    n = 8
    inst = Instance("r", np.random.default_rng(seed).random((n, 2)))
    W = np.zeros((n, n))
    W[inst.edges[:, 0], inst.edges[:, 1]] = inst.weights
    W = W + W.T
    # W[a, c] <= W[a, b] + W[b, c]
    via = W[:, :, None] + W[None, :, :]
    direct = W[:, None, :]
    assert np.all(direct <= via * (1 + 1e-12) + 1e-15)


def test_files(tmp_path):
    tsp = tmp_path / "tiny.tsp"
    tsp.write_text(SMALL_TSP)
    assert read_instance(tsp).n == 3
    sub = read_instance(tsp, 2)
    assert sub.n == 2 and sub.name == "tiny-2"
    out = tmp_path / "tiny.amst"
    write_instance(read_instance(tsp), out)
    assert out.read_text().startswith("alpha-mst v1\nn 3\n")
    assert np.array_equal(read_instance(out).weights, read_instance(tsp).weights)


def test_bundled_suite_is_regenerable():
    suite = tsplib_suite(15)
    assert len(suite) == len(bundled_names()) >= 10
    assert all(inst.n == 15 for inst in suite)
    text = synthetic_tsplib("synth01", 52, 1)
    assert parse_tsplib(text)[:15] == [tuple(p) for p in suite[0].points.tolist()]
