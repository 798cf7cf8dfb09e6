"""Euclidean instances: TSPLIB ingestion, prefix sub-instances, native text format."""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

NATIVE_HEADER = "alpha-mst v1"
EUCLIDEAN_TYPES = {"EUC_2D", "CEIL_2D"}


class InstanceError(ValueError):
    pass


class TsplibError(InstanceError):
    def __init__(self, message, line=None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


def edge_count(n: int) -> int:
    return n * (n - 1) // 2


def edge_id(i: int, j: int, n: int) -> int:
    """Position of edge {i, j} in lexicographic order of pairs (i < j)."""
    if i == j:
        raise InstanceError("loops are not edges")
    if i > j:
        i, j = j, i
    return i * n - i * (i + 1) // 2 + (j - i - 1)


@dataclass
class Instance:
    """Complete Euclidean graph on ``points``.

    Edges are numbered lexicographically: ``edges[e] = (i, j)`` with ``i < j``.
    Weights are full-precision Euclidean distances (no TSPLIB rounding).
    """

    name: str
    points: np.ndarray
    edges: np.ndarray = field(init=False, repr=False)
    edge_index: np.ndarray = field(init=False, repr=False)
    weights: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        pts = np.array(self.points, dtype=float)
        if pts.ndim != 2 or pts.shape[1] != 2:
            raise InstanceError("points must be an (n, 2) array")
        if pts.shape[0] < 2:
            raise InstanceError("an instance needs at least two points")
        if not np.all(np.isfinite(pts)):
            raise InstanceError("non-finite coordinate")
        seen = {}
        for idx, (x, y) in enumerate(pts):
            key = (float(x), float(y))
            if key in seen:
                raise InstanceError(f"points {seen[key]} and {idx} coincide at {key}")
            seen[key] = idx
        pts.setflags(write=False)
        self.points = pts
        n = pts.shape[0]
        iu, ju = np.triu_indices(n, k=1)
        self.edges = np.stack([iu, ju], axis=1)
        self.edge_index = np.full((n, n), -1, dtype=np.int64)
        self.edge_index[iu, ju] = np.arange(iu.size)
        self.edge_index[ju, iu] = np.arange(iu.size)
        d = pts[ju] - pts[iu]
        self.weights = np.hypot(d[:, 0], d[:, 1])
        for arr in (self.edges, self.edge_index, self.weights):
            arr.setflags(write=False)

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def m(self) -> int:
        return self.edges.shape[0]

    def eid(self, i: int, j: int) -> int:
        e = int(self.edge_index[i, j])
        if e < 0:
            raise InstanceError(f"no edge ({i}, {j})")
        return e

    def incident(self, i: int) -> np.ndarray:
        """Edge ids of delta(i), ordered by the other endpoint."""
        row = self.edge_index[i]
        return row[row >= 0]

    def other(self, e: int, i: int) -> int:
        u, v = self.edges[e]
        return int(v) if u == i else int(u)

    def tree_weight(self, edge_ids) -> float:
        ids = np.sort(np.asarray(list(edge_ids), dtype=np.int64))
        return float(np.sum(self.weights[ids]))


_KEY_RE = re.compile(r"^\s*([A-Z_]+)\s*:?\s*(.*?)\s*$")


def parse_tsplib(text) -> list[tuple[float, float]]:
    """Read 2D node coordinates from TSPLIB text, in file order."""
    if isinstance(text, bytes):
        text = text.decode("utf-8", errors="replace")
    lines = text.splitlines()
    weight_type = None
    dimension = None
    coords: list[tuple[float, float]] = []
    section_line = None
    in_coords = False
    skipping = False
    for lineno, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line:
            continue
        if in_coords:
            parts = line.split()
            if parts[0].upper() == "EOF" or not re.match(r"^[+-]?\d", parts[0]):
                in_coords = False
            else:
                if len(parts) != 3:
                    raise TsplibError(f"expected 'index x y', got {line!r}", lineno)
                try:
                    coords.append((float(parts[1]), float(parts[2])))
                except ValueError:
                    raise TsplibError(f"malformed coordinate {line!r}", lineno) from None
                continue
        if skipping and re.match(r"^[+-]?[\d.]", line):
            continue
        skipping = False
        upper = line.upper()
        if upper == "EOF":
            break
        if upper.startswith("NODE_COORD_SECTION"):
            if weight_type is not None and weight_type not in EUCLIDEAN_TYPES:
                raise TsplibError(f"unsupported EDGE_WEIGHT_TYPE {weight_type}", lineno)
            in_coords = True
            section_line = lineno
            continue
        m = _KEY_RE.match(line)
        if not m:
            raise TsplibError(f"unrecognised line {line!r}", lineno)
        key, value = m.group(1).upper(), m.group(2)
        if key == "EDGE_WEIGHT_TYPE":
            weight_type = value.strip().upper()
            if weight_type not in EUCLIDEAN_TYPES:
                raise TsplibError(f"unsupported EDGE_WEIGHT_TYPE {weight_type}", lineno)
        elif key == "DIMENSION":
            try:
                dimension = int(value)
            except ValueError:
                raise TsplibError(f"bad DIMENSION {value!r}", lineno) from None
        elif key.endswith("_SECTION"):
            # other sections (display data, tours) are not consumed
            skipping = True
    if section_line is None:
        raise TsplibError("missing NODE_COORD_SECTION")
    if not coords:
        raise TsplibError("empty NODE_COORD_SECTION", section_line)
    if dimension is not None and dimension != len(coords):
        raise TsplibError(f"DIMENSION {dimension} but {len(coords)} coordinates", section_line)
    return coords


def sub_instance(points, n: int, name: str = "instance") -> Instance:
    """Instance over the first ``n`` points."""
    pts = list(points)
    if not 2 <= n <= len(pts):
        raise InstanceError(f"n must be in [2, {len(pts)}], got {n}")
    return Instance(name=name, points=np.asarray(pts[:n], dtype=float))


def format_native(inst: Instance) -> str:
    out = [NATIVE_HEADER, f"n {inst.n}"]
    out += ["%.17g %.17g" % (x, y) for x, y in inst.points]
    return "\n".join(out) + "\n"


def parse_native(text: str, name: str = "instance") -> Instance:
    lines = [ln.strip() for ln in text.splitlines() if ln.strip() and not ln.lstrip().startswith("#")]
    if not lines or lines[0] != NATIVE_HEADER:
        raise InstanceError(f"missing '{NATIVE_HEADER}' header")
    parts = lines[1].split() if len(lines) > 1 else []
    if len(parts) != 2 or parts[0] != "n":
        raise InstanceError("second line must be 'n <count>'")
    n = int(parts[1])
    rows = lines[2:]
    if len(rows) != n:
        raise InstanceError(f"expected {n} coordinate lines, got {len(rows)}")
    pts = []
    for k, row in enumerate(rows, start=3):
        xy = row.split()
        if len(xy) != 2:
            raise InstanceError(f"line {k}: expected 'x y'")
        pts.append((float(xy[0]), float(xy[1])))
    return Instance(name=name, points=np.asarray(pts))


def write_instance(inst: Instance, path) -> None:
    Path(path).write_text(format_native(inst), encoding="utf-8")


def read_instance(path, n: int | None = None) -> Instance:
    """Load a ``.amst`` file or a TSPLIB ``.tsp`` file (optionally its first ``n`` points)."""
    path = Path(path)
    text = path.read_text(encoding="utf-8", errors="replace")
    if path.suffix.lower() == ".tsp" or "NODE_COORD_SECTION" in text:
        pts = parse_tsplib(text)
        k = len(pts) if n is None else n
        name = path.stem if k == len(pts) else f"{path.stem}-{k}"
        return sub_instance(pts, k, name=name)
    inst = parse_native(text, name=path.stem)
    if n is not None and n != inst.n:
        return sub_instance(inst.points, n, name=f"{path.stem}-{n}")
    return inst
