"""Benchmark instance suite.

The experiments use the first ``n`` points of Euclidean TSPLIB files.  When
``ALPHA_MST_TSPLIB_DIR`` points at a directory of ``.tsp`` files those are
used; otherwise the bundled TSPLIB-format files are used.  The bundled files
are seeded synthetic point sets (integer coordinates, mix of uniform and
clustered layouts), regenerated bit-for-bit by :func:`synthetic_tsplib`.
"""
from __future__ import annotations

import os
from importlib import resources
from pathlib import Path

import numpy as np

from .instance import Instance, parse_tsplib, sub_instance

BUNDLED_SEEDS = tuple(range(1, 13))
BUNDLED_SIZE = 52


def synthetic_tsplib(name: str, n: int, seed: int) -> str:
    """TSPLIB EUC_2D text with ``n`` distinct integer points."""
    rng = np.random.default_rng(seed)
    n_clusters = int(rng.integers(0, 6))
    pts: list[tuple[int, int]] = []
    seen = set()
    centers = rng.uniform(100, 1500, size=(max(n_clusters, 1), 2))
    while len(pts) < n:
        if n_clusters and rng.random() < 0.6:
            c = centers[rng.integers(n_clusters)]
            p = np.rint(c + rng.normal(0, 120, size=2))
        else:
            p = np.rint(rng.uniform(0, 1600, size=2))
        key = (int(p[0]), int(p[1]))
        if key in seen:
            continue
        seen.add(key)
        pts.append(key)
    lines = [f"NAME : {name}", "COMMENT : seeded synthetic point set", "TYPE : TSP",
             f"DIMENSION : {n}", "EDGE_WEIGHT_TYPE : EUC_2D", "NODE_COORD_SECTION"]
    lines += [f"{k + 1} {x} {y}" for k, (x, y) in enumerate(pts)]
    lines.append("EOF")
    return "\n".join(lines) + "\n"


def bundled_names() -> list[str]:
    return [f"synth{s:02d}" for s in BUNDLED_SEEDS]


def _bundled_texts():
    root = resources.files("alpha_mst") / "data"
    for name in bundled_names():
        yield name, (root / f"{name}.tsp").read_text(encoding="utf-8")


def tsplib_suite(n: int = 15, directory=None) -> list[Instance]:
    """First-``n``-point instances of every file in the suite, sorted by name."""
    directory = directory or os.environ.get("ALPHA_MST_TSPLIB_DIR")
    out = []
    if directory:
        for path in sorted(Path(directory).glob("*.tsp")):
            try:
                pts = parse_tsplib(path.read_bytes())
            except ValueError:
                continue
            if len(pts) >= n:
                out.append(sub_instance(pts, n, name=f"{path.stem}-{n}"))
        return out
    for name, text in _bundled_texts():
        pts = parse_tsplib(text)
        out.append(sub_instance(pts, n, name=f"{name}-{n}"))
    return out


def write_bundled(directory) -> None:
    """Regenerate the bundled files."""
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    for seed, name in zip(BUNDLED_SEEDS, bundled_names()):
        (d / f"{name}.tsp").write_text(synthetic_tsplib(name, BUNDLED_SIZE, seed), encoding="utf-8")
