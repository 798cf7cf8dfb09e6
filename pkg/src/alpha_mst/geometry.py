"""Angular geometry of vertex stars.

Every vertex ``i`` sees each other vertex ``j`` along a ray; the base angle of
that ray is measured counter-clockwise from the positive horizontal axis.  The
rotation angle ``rot[i, j, k]`` is the counter-clockwise turn that carries ray
``i->j`` onto ray ``i->k``.  A set of rays at ``i`` is *admissible* for an
angle ``alpha`` when some sector of ``alpha`` radians encloses all of them.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

TWO_PI = 2.0 * math.pi
ANGLE_TOL = 1e-9


class GeometryError(ValueError):
    pass


class TreeStructureError(ValueError):
    """Raised when an edge list is not a spanning tree."""


@dataclass(frozen=True)
class Alpha:
    """Sector angle stored as an exact rational multiple of pi."""

    numerator: int
    denominator: int = 1

    def __post_init__(self):
        if self.numerator <= 0 or self.denominator <= 0:
            raise GeometryError("alpha must be a positive multiple of pi")
        frac = Fraction(self.numerator, self.denominator)
        if frac > 2:
            raise GeometryError(f"alpha = {frac}pi exceeds 2pi")
        object.__setattr__(self, "numerator", frac.numerator)
        object.__setattr__(self, "denominator", frac.denominator)

    @property
    def radians(self) -> float:
        return self.numerator * math.pi / self.denominator

    @property
    def fraction(self) -> Fraction:
        return Fraction(self.numerator, self.denominator)

    @classmethod
    def parse(cls, text: str) -> "Alpha":
        """Parse ``"2/3pi"``, ``"pi/3"``, ``"pi"``, ``"3pi/2"`` and friends."""
        s = text.strip().lower().replace(" ", "").replace("*", "")
        m = re.fullmatch(r"(\d+)(?:/(\d+))?pi", s)
        if m:
            return cls(int(m.group(1)), int(m.group(2) or 1))
        m = re.fullmatch(r"(\d*)pi(?:/(\d+))?", s)
        if m:
            return cls(int(m.group(1) or 1), int(m.group(2) or 1))
        raise GeometryError(f"cannot parse alpha {text!r}; expected e.g. '2/3pi'")

    def __str__(self):
        if self.denominator == 1:
            return f"{self.numerator}pi"
        return f"{self.numerator}/{self.denominator}pi"


def base_angle(p_i: Sequence[float], p_j: Sequence[float]) -> float:
    """Counter-clockwise angle in [0, 2pi) from the horizontal axis at p_i to ray p_i->p_j."""
    dx = float(p_j[0]) - float(p_i[0])
    dy = float(p_j[1]) - float(p_i[1])
    if dx == 0.0 and dy == 0.0:
        raise GeometryError("coincident points have no direction")
    a = math.atan2(dy, dx)
    if a < 0.0:
        a += TWO_PI
    if a >= TWO_PI:
        a = 0.0
    return a


def rotation_angle(theta0_ij: float, theta0_ik: float) -> float:
    """Counter-clockwise rotation carrying ray i->j onto ray i->k, in [0, 2pi)."""
    if theta0_ik >= theta0_ij:
        return theta0_ik - theta0_ij
    return TWO_PI + theta0_ik - theta0_ij


def sector_span(angles: Iterable[float]) -> float:
    """Central angle of the smallest sector enclosing rays with the given base angles.

    Sorted-gap evaluation: the answer is ``2pi`` minus the widest cyclic gap
    between consecutive distinct rays.  Zero for fewer than two distinct rays.
    """
    a = np.unique(np.asarray(list(angles), dtype=float))
    if a.size <= 1:
        return 0.0
    widest = max(float(np.max(np.diff(a))), TWO_PI - (a[-1] - a[0]))
    return TWO_PI - widest


def is_admissible(angles: Sequence[float], alpha: float, tol: float = ANGLE_TOL) -> bool:
    if len(angles) <= 1:
        return True
    return sector_span(angles) <= alpha + tol


@dataclass(frozen=True)
class GeometryTables:
    """Angles and admissibility data for one (instance, alpha) pair.

    ``rot[i, j, k]`` is the rotation from ray i->j to ray i->k (NaN when
    ``i`` equals ``j`` or ``k``).  ``covers[i, j, k]`` is True iff an
    alpha-sector starting at ray i->j reaches ray i->k; ``k`` belongs to the
    set L_ij exactly when ``covers[i, k, j]``.
    """

    n: int
    alpha: Alpha
    theta0: np.ndarray
    rot: np.ndarray
    covers: np.ndarray
    tol: float = ANGLE_TOL
    _alpha_rad: float = field(init=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "_alpha_rad", self.alpha.radians)
        for arr in (self.theta0, self.rot, self.covers):
            arr.setflags(write=False)

    @property
    def alpha_rad(self) -> float:
        return self._alpha_rad

    def L(self, i: int, j: int) -> set[int]:
        """Vertices k (including j) whose ray reaches ray i->j within an alpha rotation."""
        return {int(k) for k in np.flatnonzero(self.covers[i, :, j])}

    def star_span(self, i: int, neighbors: Iterable[int]) -> float:
        return sector_span(self.theta0[i, list(neighbors)])

    def star_admissible(self, i: int, neighbors: Iterable[int]) -> bool:
        nb = list(neighbors)
        return is_admissible(self.theta0[i, nb], self._alpha_rad, self.tol)

    def sorted_neighbors(self, i: int, neighbors: Iterable[int]) -> list[int]:
        """Neighbors ordered by base angle, ties by vertex index."""
        return sorted(neighbors, key=lambda v: (self.theta0[i, v], v))


def build_tables(instance, alpha: Alpha, tol: float = ANGLE_TOL) -> GeometryTables:
    pts = np.asarray(instance.points, dtype=float)
    n = pts.shape[0]
    theta0 = np.zeros((n, n))
    for i in range(n):
        for j in range(n):
            if i != j:
                theta0[i, j] = base_angle(pts[i], pts[j])
    # rot[i, j, k] = theta0[i, k] - theta0[i, j], wrapped into [0, 2pi)
    diff = theta0[:, None, :] - theta0[:, :, None]
    rot = np.where(diff >= 0.0, diff, diff + TWO_PI)
    idx = np.arange(n)
    rot[idx, idx, :] = np.nan
    rot[idx, :, idx] = np.nan
    with np.errstate(invalid="ignore"):
        covers = rot <= alpha.radians + tol
    covers[idx, idx, :] = False
    covers[idx, :, idx] = False
    return GeometryTables(n=n, alpha=alpha, theta0=theta0, rot=rot, covers=covers, tol=tol)


@dataclass
class TreeCheck:
    feasible: bool
    theta: np.ndarray
    violations: list[int]


def _assert_spanning_tree(n: int, edges: Sequence[tuple[int, int]]):
    parent = list(range(n))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for u, v in edges:
        if not (0 <= u < n and 0 <= v < n) or u == v:
            raise TreeStructureError(f"invalid edge ({u}, {v})")
        ru, rv = find(u), find(v)
        if ru == rv:
            raise TreeStructureError(f"edge ({u}, {v}) closes a cycle")
        parent[ru] = rv
    if len({find(a) for a in range(n)}) != 1:
        raise TreeStructureError("edge set is disconnected")


def check_tree(edges: Sequence[tuple[int, int]], tables: GeometryTables) -> TreeCheck:
    """Angular feasibility of a spanning tree; raises TreeStructureError if not a tree."""
    n = tables.n
    edges = [(int(u), int(v)) for u, v in edges]
    _assert_spanning_tree(n, edges)
    nbrs: list[list[int]] = [[] for _ in range(n)]
    for u, v in edges:
        nbrs[u].append(v)
        nbrs[v].append(u)
    theta = np.zeros(n)
    for i in range(n):
        if len(nbrs[i]) >= 2:
            theta[i] = tables.star_span(i, nbrs[i])
    bad = [i for i in range(n) if theta[i] > tables.alpha_rad + tables.tol]
    return TreeCheck(feasible=not bad, theta=theta, violations=bad)
