"""Formulations: variable layout, initial relaxations and the cut pool.

Variables ``0..m-1`` are the edge variables x.  The extended formulations
append one y variable per ordered arc (i, j), i != j, laid out row by row:
arc (i, j) sits at ``m + i*(n-1) + (j if j < i else j-1)``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

import numpy as np

from .linprog import LpModel, Sense


class FormulationKind(Enum):
    FX = "fx"                   # cover cuts on non-admissible subsets
    FX_PLUS = "fx+"             # lifted angular cuts
    FX_PLUSPLUS = "fx++"        # lifted angular cuts + odd cycles of the conflict graph
    FXY_STAR = "fxy*"           # arc variables without coupling rows
    FXY = "fxy"                 # arc variables with coupling rows (reference only)

    @classmethod
    def parse(cls, text: str) -> "FormulationKind":
        key = text.strip().lower().replace("plus", "+").replace("star", "*").replace("_", "")
        for kind in cls:
            if kind.value == key:
                return kind
        raise ValueError(f"unknown formulation {text!r}; choose from {[k.value for k in cls]}")

    @property
    def has_arcs(self) -> bool:
        return self in (FormulationKind.FXY, FormulationKind.FXY_STAR)


class CutKind(Enum):
    SEC = "SEC"
    LAC = "LAC"
    ODD_CYCLE = "ODD_CYCLE"


@dataclass
class FractionalPoint:
    x: np.ndarray
    y: Optional[np.ndarray] = None

    def __post_init__(self):
        self.x = np.asarray(self.x, dtype=float)
        if self.y is not None:
            self.y = np.asarray(self.y, dtype=float)
            if self.y.size != 2 * self.x.size:
                raise ValueError(f"y has {self.y.size} entries, expected {2 * self.x.size}")


def as_x(point) -> np.ndarray:
    if isinstance(point, FractionalPoint):
        return point.x
    return np.asarray(point, dtype=float)


@dataclass(frozen=True)
class Cut:
    """``sum(x[e] for e in support) <= rhs`` (all coefficients are one)."""

    kind: CutKind
    support: tuple
    rhs: int
    note: str = field(default="", compare=False)

    @property
    def key(self):
        return (self.kind, self.support, self.rhs)

    def lhs(self, x) -> float:
        x = as_x(x)
        return float(np.sum(x[list(self.support)]))

    def violation(self, x) -> float:
        return self.lhs(x) - self.rhs

    def row(self):
        """Arguments for :meth:`LpModel.add_row`."""
        return (list(self.support), [1.0] * len(self.support), Sense.LE, float(self.rhs),
                f"{self.kind.value}_{len(self.support)}")


def make_cut(kind: CutKind, edges, rhs: int, note: str = "") -> Cut:
    return Cut(kind, tuple(sorted(int(e) for e in edges)), int(rhs), note)


class CutPool:
    """Every distinct cut generated during one solve, in generation order."""

    def __init__(self):
        self._keys = set()
        self.cuts: list[Cut] = []

    def __len__(self):
        return len(self.cuts)

    def __contains__(self, cut: Cut):
        return cut.key in self._keys

    def add(self, cut: Cut) -> bool:
        if cut.key in self._keys:
            return False
        self._keys.add(cut.key)
        self.cuts.append(cut)
        return True

    def violated(self, x, tol: float = 1e-6) -> list[Cut]:
        return [c for c in self.cuts if c.violation(x) > tol]

    def count(self, kind: CutKind) -> int:
        return sum(1 for c in self.cuts if c.kind is kind)


def arc_var(i: int, j: int, n: int, m: int) -> int:
    if i == j:
        raise ValueError("no arc from a vertex to itself")
    return m + i * (n - 1) + (j if j < i else j - 1)


def build_initial_relaxation(instance, tables, kind: FormulationKind) -> LpModel:
    """LP with the cardinality row (and, for arc formulations, the static arc rows)."""
    n, m = instance.n, instance.m
    if tables.n != n:
        raise ValueError(f"tables built for n={tables.n}, instance has n={n}")
    n_vars = m + (2 * m if kind.has_arcs else 0)
    obj = np.zeros(n_vars)
    obj[:m] = instance.weights
    model = LpModel(n_vars, obj, np.zeros(n_vars), np.ones(n_vars))
    model.add_row(np.arange(m), np.ones(m), Sense.EQ, n - 1, "card")
    if not kind.has_arcs:
        return model
    for i in range(n):
        idx = [arc_var(i, j, n, m) for j in range(n) if j != i]
        model.add_row(idx, np.ones(len(idx)), Sense.EQ, 1.0, f"assign_{i}")
    for i in range(n):
        for j in range(n):
            if j == i:
                continue
            ks = np.flatnonzero(tables.covers[i, :, j])
            idx = [instance.eid(i, j)] + [arc_var(i, int(k), n, m) for k in ks]
            model.add_row(idx, [1.0] + [-1.0] * ks.size, Sense.LE, 0.0, f"sector_{i}_{j}")
    if kind is FormulationKind.FXY:
        for i in range(n):
            for j in range(n):
                if j != i:
                    model.add_row([arc_var(i, j, n, m), instance.eid(i, j)], [1.0, -1.0], Sense.LE, 0.0,
                                  f"couple_{i}_{j}")
    return model


def lpr_bound(instance, tables, kind: FormulationKind, **kwargs) -> float:
    """Root cutting-plane bound w(kind); see :func:`alpha_mst.bnc.root_relaxation`."""
    from .bnc import root_relaxation

    return root_relaxation(instance, tables, kind, **kwargs).objective
