"""Linear programming layer.

``LpModel`` holds a minimisation problem with bounded variables and sparse
rows.  :func:`solve` runs the embedded bounded-variable revised simplex
(dense basis inverse, composite phase 1, Harris ratio test with a Bland
fallback against stalling).  A basis returned by one solve can warm-start the
next one after rows were appended or bounds changed.  :func:`solve_highs`
delegates to scipy's HiGHS and is used for cross-checks.
"""
from __future__ import annotations

import enum
import logging
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
import scipy.sparse as sp

log = logging.getLogger(__name__)

FEAS_TOL = 1e-7
OPT_TOL = 1e-7
INT_TOL = 1e-6
PIVOT_TOL = 1e-9
REFACTOR_EVERY = 100
BLAND_AFTER = 1000

BASIC, AT_LOWER, AT_UPPER, FREE_ZERO = 0, 1, 2, 3


class LpError(RuntimeError):
    pass


class Sense(str, enum.Enum):
    LE = "<="
    GE = ">="
    EQ = "="


class LpStatus(str, enum.Enum):
    OPTIMAL = "OPTIMAL"
    INFEASIBLE = "INFEASIBLE"
    ITERATION_LIMIT = "ITERATION_LIMIT"
    UNBOUNDED = "UNBOUNDED"


@dataclass
class Row:
    indices: np.ndarray
    values: np.ndarray
    sense: Sense
    rhs: float
    name: str | None = None


@dataclass
class Basis:
    """Simplex basis over structural variables followed by one slack per row."""

    n_vars: int
    basic: np.ndarray
    status: np.ndarray

    @property
    def n_rows(self) -> int:
        return self.basic.size


@dataclass
class LpSolution:
    status: LpStatus
    objective: float
    x: np.ndarray
    duals: np.ndarray
    basis: Basis | None = None
    iterations: int = 0

    @property
    def optimal(self) -> bool:
        return self.status is LpStatus.OPTIMAL


class LpModel:
    """min c.x  s.t.  rows, lower <= x <= upper."""

    def __init__(self, n_vars: int, objective=None, lower=None, upper=None):
        self.n_vars = int(n_vars)
        self.c = np.zeros(n_vars) if objective is None else np.array(objective, dtype=float)
        self.lb = np.zeros(n_vars) if lower is None else np.array(lower, dtype=float)
        self.ub = np.full(n_vars, np.inf) if upper is None else np.array(upper, dtype=float)
        if not (self.c.shape == self.lb.shape == self.ub.shape == (self.n_vars,)):
            raise LpError("objective and bounds must have one entry per variable")
        if np.any(self.lb > self.ub):
            raise LpError("lower bound exceeds upper bound")
        self.rows: list[Row] = []
        self._matrix = None

    @property
    def n_rows(self) -> int:
        return len(self.rows)

    def _make_row(self, indices, values, sense, rhs, name=None) -> Row:
        idx = np.asarray(indices, dtype=np.int64)
        val = np.asarray(values, dtype=float)
        if idx.shape != val.shape or idx.ndim != 1:
            raise LpError("row indices and values must be matching 1-d sequences")
        if idx.size and (idx.min() < 0 or idx.max() >= self.n_vars):
            raise LpError("row references a variable out of range")
        if np.unique(idx).size != idx.size:
            raise LpError("duplicate variable in row")
        if not math.isfinite(float(rhs)):
            raise LpError("row rhs must be finite")
        return Row(idx, val, Sense(sense), float(rhs), name)

    def add_row(self, indices, values, sense, rhs, name=None) -> int:
        self.rows.append(self._make_row(indices, values, sense, rhs, name))
        self._matrix = None
        return len(self.rows) - 1

    def add_rows(self, rows: Iterable[tuple]) -> list[int]:
        """Append rows given as (indices, values, sense, rhs[, name]); all or nothing."""
        built = [self._make_row(*r) for r in rows]
        start = len(self.rows)
        self.rows.extend(built)
        self._matrix = None
        return list(range(start, len(self.rows)))

    def set_bounds(self, j: int, lower: float, upper: float) -> None:
        if lower > upper:
            raise LpError(f"inverted bounds [{lower}, {upper}] for variable {j}")
        self.lb[j] = lower
        self.ub[j] = upper

    def matrix(self) -> sp.csc_matrix:
        if self._matrix is None:
            if self.rows:
                ri = np.concatenate([np.full(r.indices.size, k) for k, r in enumerate(self.rows)])
                ci = np.concatenate([r.indices for r in self.rows])
                va = np.concatenate([r.values for r in self.rows])
            else:
                ri = ci = np.zeros(0, dtype=np.int64)
                va = np.zeros(0)
            self._matrix = sp.csc_matrix((va, (ri, ci)), shape=(self.n_rows, self.n_vars))
        return self._matrix

    def rhs(self) -> np.ndarray:
        return np.array([r.rhs for r in self.rows], dtype=float)

    def row_activity(self, x) -> np.ndarray:
        return self.matrix() @ np.asarray(x, dtype=float)

    def copy(self) -> "LpModel":
        other = LpModel(self.n_vars, self.c, self.lb, self.ub)
        other.rows = list(self.rows)
        return other

    def to_lp_text(self, var_names: Sequence[str] | None = None) -> str:
        """CPLEX-style LP text (Minimize / Subject To / Bounds / End)."""
        names = list(var_names) if var_names is not None else [f"x{j}" for j in range(self.n_vars)]

        def expr(idx, val):
            terms = []
            for j, a in zip(idx, val):
                if a == 0:
                    continue
                sign = "-" if a < 0 else "+"
                mag = abs(a)
                coef = "" if mag == 1 else f"{mag:.17g} "
                terms.append(f"{sign} {coef}{names[j]}")
            if not terms:
                return "0 " + names[0]
            text = " ".join(terms)
            return text[2:] if text.startswith("+ ") else text

        def wrap(line):
            indent = line[: len(line) - len(line.lstrip(" "))]
            out, cur = [], indent
            for tok in line.lstrip(" ").split(" "):
                if len(cur) + len(tok) + 1 > 240:
                    out.append(cur)
                    cur = "   " + tok
                else:
                    cur = f"{cur} {tok}" if cur.strip() else cur + tok
            out.append(cur)
            return "\n".join(out)

        lines = ["\\ exported by alpha_mst", "Minimize", wrap(" obj: " + expr(np.arange(self.n_vars), self.c)),
                 "Subject To"]
        for k, r in enumerate(self.rows):
            label = re_sanitize(r.name) if r.name else f"r{k}"
            lines.append(wrap(f" {label}: {expr(r.indices, r.values)} {r.sense.value} {r.rhs:.17g}"))
        lines.append("Bounds")
        for j in range(self.n_vars):
            lo, hi = self.lb[j], self.ub[j]
            lo_s = "-inf" if lo == -np.inf else f"{lo:.17g}"
            hi_s = "+inf" if hi == np.inf else f"{hi:.17g}"
            if lo == hi:
                lines.append(f" {names[j]} = {lo_s}")
            else:
                lines.append(f" {lo_s} <= {names[j]} <= {hi_s}")
        lines.append("End")
        return "\n".join(lines) + "\n"


def re_sanitize(name: str) -> str:
    return "".join(ch if ch.isalnum() or ch in "_." else "_" for ch in name)[:200]


def _slack_bounds(model: LpModel):
    nr = model.n_rows
    lo = np.zeros(nr)
    hi = np.zeros(nr)
    for k, r in enumerate(model.rows):
        if r.sense is Sense.LE:
            hi[k] = np.inf
        elif r.sense is Sense.GE:
            lo[k] = -np.inf
    return lo, hi


class _Simplex:
    """One solve of the bounded revised simplex on a model snapshot."""

    def __init__(self, model: LpModel, basis: Basis | None, max_iter: int):
        self.model = model
        self.nv = model.n_vars
        self.nr = model.n_rows
        self.N = self.nv + self.nr
        self.A = model.matrix()
        self.b = model.rhs()
        slo, shi = _slack_bounds(model)
        self.lb = np.concatenate([model.lb, slo])
        self.ub = np.concatenate([model.ub, shi])
        self.cost = np.concatenate([model.c, np.zeros(self.nr)])
        self.max_iter = max_iter
        self.iterations = 0
        self._install_basis(basis)

    # -- basis handling -------------------------------------------------
    def _nonbasic_value(self, j: int, st: int) -> tuple[int, float]:
        lo, hi = self.lb[j], self.ub[j]
        if st == AT_UPPER and np.isfinite(hi):
            return AT_UPPER, hi
        if np.isfinite(lo):
            return AT_LOWER, lo
        if np.isfinite(hi):
            return AT_UPPER, hi
        return FREE_ZERO, 0.0

    def _install_basis(self, basis: Basis | None):
        status = np.full(self.N, AT_LOWER, dtype=np.int8)
        basic = np.arange(self.nv, self.N)
        if basis is not None and basis.n_vars == self.nv and basis.n_rows <= self.nr:
            extra = np.arange(self.nv + basis.n_rows, self.N)
            basic = np.concatenate([basis.basic, extra]).astype(np.int64)
            status[: basis.status.size] = basis.status
        status[basic] = BASIC
        self.basic = basic
        self.status = status
        self.x = np.zeros(self.N)
        for j in np.flatnonzero(status != BASIC):
            st, val = self._nonbasic_value(j, status[j])
            self.status[j] = st
            self.x[j] = val
        if not self._refactor():
            log.debug("warm-start basis singular; falling back to slack basis")
            self.basic = np.arange(self.nv, self.N)
            self.status[:] = AT_LOWER
            self.status[self.basic] = BASIC
            for j in range(self.nv):
                st, val = self._nonbasic_value(j, AT_LOWER)
                self.status[j] = st
                self.x[j] = val
            if not self._refactor():
                raise LpError("slack basis is singular")

    def _column(self, j: int) -> np.ndarray:
        col = np.zeros(self.nr)
        if j < self.nv:
            s, e = self.A.indptr[j], self.A.indptr[j + 1]
            col[self.A.indices[s:e]] = self.A.data[s:e]
        else:
            col[j - self.nv] = 1.0
        return col

    def _refactor(self) -> bool:
        if self.nr == 0:
            self.Binv = np.zeros((0, 0))
            return True
        B = np.empty((self.nr, self.nr))
        for p, j in enumerate(self.basic):
            B[:, p] = self._column(j)
        try:
            Binv = np.linalg.inv(B)
        except np.linalg.LinAlgError:
            return False
        if not np.all(np.isfinite(Binv)) or np.abs(Binv).max() > 1e12:
            return False
        self.Binv = Binv
        self._recompute_xb()
        return True

    def _recompute_xb(self):
        xs = self.x.copy()
        xs[self.basic] = 0.0
        resid = self.b - (self.A @ xs[: self.nv]) - xs[self.nv:]
        self.x[self.basic] = self.Binv @ resid

    # -- pricing --------------------------------------------------------
    def _reduced_costs(self, cB: np.ndarray, phase1: bool):
        y = cB @ self.Binv
        d = np.empty(self.N)
        base = 0.0 if phase1 else self.cost[: self.nv]
        d[: self.nv] = base - self.A.T @ y
        d[self.nv:] = (0.0 if phase1 else self.cost[self.nv:]) - y
        d[self.basic] = 0.0
        return y, d

    def _eligible(self, d: np.ndarray) -> np.ndarray:
        st = self.status
        movable = self.ub > self.lb
        up = (st == AT_LOWER) & (d < -OPT_TOL) & movable
        down = (st == AT_UPPER) & (d > OPT_TOL) & movable
        free = (st == FREE_ZERO) & (np.abs(d) > OPT_TOL)
        return up | down | free

    # -- main loop ------------------------------------------------------
    def run(self) -> LpStatus:
        degenerate = 0
        since_refactor = 0
        bland = False
        while True:
            if self.iterations >= self.max_iter:
                return LpStatus.ITERATION_LIMIT
            xb = self.x[self.basic]
            lbb = self.lb[self.basic]
            ubb = self.ub[self.basic]
            below = xb < lbb - FEAS_TOL
            above = xb > ubb + FEAS_TOL
            phase1 = bool(below.any() or above.any())
            if phase1:
                cB = above.astype(float) - below.astype(float)
            else:
                cB = self.cost[self.basic]
            y, d = self._reduced_costs(cB, phase1)
            elig = self._eligible(d)
            if not elig.any():
                if since_refactor:
                    # confirm with a fresh factorisation before concluding
                    if not self._refactor():
                        raise LpError("basis became singular")
                    since_refactor = 0
                    continue
                self.y = y
                self.d = d
                return LpStatus.INFEASIBLE if phase1 else LpStatus.OPTIMAL
            cand = np.flatnonzero(elig)
            if bland:
                q = int(cand[0])
            else:
                q = int(cand[np.argmax(np.abs(d[cand]))])
            dirn = 1.0 if (self.status[q] == AT_LOWER or (self.status[q] == FREE_ZERO and d[q] < 0)) else -1.0
            col = self.Binv @ self._column(q)
            rate = -dirn * col
            step, r, target = self._ratio_test(rate, bland)
            flip = self.ub[q] - self.lb[q]
            if r < 0 and not np.isfinite(flip):
                if phase1:
                    raise LpError("phase 1 ray without a blocking variable")
                return LpStatus.UNBOUNDED
            self.iterations += 1
            if r < 0 or flip <= step:
                step = flip
                self.x[self.basic] += step * rate
                if dirn > 0:
                    self.status[q], self.x[q] = AT_UPPER, self.ub[q]
                else:
                    self.status[q], self.x[q] = AT_LOWER, self.lb[q]
            else:
                leaving = int(self.basic[r])
                self.x[self.basic] += step * rate
                self.x[q] += dirn * step
                self.x[leaving] = target
                self.status[leaving] = AT_LOWER if target == self.lb[leaving] else AT_UPPER
                self.status[q] = BASIC
                self.basic[r] = q
                piv = col[r]
                row_r = self.Binv[r] / piv
                self.Binv -= np.outer(col, row_r)
                self.Binv[r] = row_r
                since_refactor += 1
                if since_refactor >= REFACTOR_EVERY:
                    if not self._refactor():
                        raise LpError("basis became singular")
                    since_refactor = 0
            if step <= 1e-12:
                degenerate += 1
                if degenerate > BLAND_AFTER and not bland:
                    log.debug("switching to Bland's rule after %d degenerate pivots", degenerate)
                    bland = True
            else:
                degenerate = 0
                bland = False

    def _ratio_test(self, rate: np.ndarray, bland: bool):
        """Return (step, row, target value of leaving variable); row -1 if unblocked."""
        if self.nr == 0:
            return np.inf, -1, 0.0
        xb = self.x[self.basic]
        lbb = self.lb[self.basic]
        ubb = self.ub[self.basic]
        target = np.full(self.nr, np.nan)
        dec = rate < -PIVOT_TOL
        inc = rate > PIVOT_TOL
        # decreasing: infeasible-above blocks at its upper bound, feasible at its lower bound
        t = np.where(xb > ubb + FEAS_TOL, ubb, np.where(xb >= lbb - FEAS_TOL, lbb, -np.inf))
        target[dec] = t[dec]
        t = np.where(xb < lbb - FEAS_TOL, lbb, np.where(xb <= ubb + FEAS_TOL, ubb, np.inf))
        target[inc] = t[inc]
        blocking = (dec | inc) & np.isfinite(target)
        if not blocking.any():
            return np.inf, -1, 0.0
        idx = np.flatnonzero(blocking)
        rr = rate[idx]
        exact = np.maximum((target[idx] - xb[idx]) / rr, 0.0)
        if bland:
            tmin = exact.min()
            ties = idx[exact <= tmin + 1e-12]
            r = int(min(ties, key=lambda p: self.basic[p]))
            k = int(np.flatnonzero(idx == r)[0])
            return float(exact[k]), r, float(target[r])
        relaxed = (target[idx] + np.sign(rr) * FEAS_TOL - xb[idx]) / rr
        tmax = max(relaxed.min(), 0.0)
        ok = exact <= tmax
        k = int(np.flatnonzero(ok)[np.argmax(np.abs(rr[ok]))])
        r = int(idx[k])
        return float(exact[k]), r, float(target[r])


def solve(model: LpModel, warm_start: Basis | None = None, max_iter: int | None = None) -> LpSolution:
    """Solve with the embedded simplex."""
    if max_iter is None:
        max_iter = 50_000 + 50 * (model.n_vars + model.n_rows)
    if np.any(model.lb > model.ub):
        raise LpError("lower bound exceeds upper bound")
    sx = _Simplex(model, warm_start, max_iter)
    status = sx.run()
    x = np.clip(sx.x[: sx.nv], model.lb, model.ub)
    basis = Basis(sx.nv, sx.basic.copy(), sx.status.copy())
    if status is LpStatus.OPTIMAL:
        duals = sx.y.copy()
        obj = float(model.c @ x)
    else:
        duals = np.zeros(model.n_rows)
        obj = math.inf if status is LpStatus.INFEASIBLE else float(model.c @ x)
    return LpSolution(status, obj, x, duals, basis, sx.iterations)


def solve_highs(model: LpModel) -> LpSolution:
    """Delegate to scipy's HiGHS (no basis returned)."""
    from scipy.optimize import linprog

    A = model.matrix().tocsr()
    senses = [r.sense for r in model.rows]
    b = model.rhs()
    ub_rows = [k for k, s in enumerate(senses) if s is not Sense.EQ]
    eq_rows = [k for k, s in enumerate(senses) if s is Sense.EQ]
    sign = np.array([1.0 if senses[k] is Sense.LE else -1.0 for k in ub_rows])
    A_ub = A[ub_rows].multiply(sign[:, None]).tocsr() if ub_rows else None
    b_ub = b[ub_rows] * sign if ub_rows else None
    A_eq = A[eq_rows] if eq_rows else None
    b_eq = b[eq_rows] if eq_rows else None
    bounds = [(lo if np.isfinite(lo) else None, hi if np.isfinite(hi) else None) for lo, hi in zip(model.lb, model.ub)]
    res = linprog(model.c, A_ub=A_ub, b_ub=b_ub, A_eq=A_eq, b_eq=b_eq, bounds=bounds, method="highs")
    if res.status == 2:
        return LpSolution(LpStatus.INFEASIBLE, math.inf, np.zeros(model.n_vars), np.zeros(model.n_rows))
    if res.status == 3:
        return LpSolution(LpStatus.UNBOUNDED, -math.inf, np.zeros(model.n_vars), np.zeros(model.n_rows))
    if res.status != 0:
        return LpSolution(LpStatus.ITERATION_LIMIT, math.nan, np.zeros(model.n_vars), np.zeros(model.n_rows))
    duals = np.zeros(model.n_rows)
    if ub_rows:
        duals[ub_rows] = res.ineqlin.marginals * sign
    if eq_rows:
        duals[eq_rows] = res.eqlin.marginals
    return LpSolution(LpStatus.OPTIMAL, float(res.fun), np.clip(res.x, model.lb, model.ub), duals)
