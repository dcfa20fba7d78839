"""Standard-form second-order cone program data model.

A problem is  minimize c'x  subject to  A x = b,  cone memberships
||(x_i1..x_ik)|| <= x_t, and optional per-variable affine bounds.  For the
solver the bounds are realized as slack variables in the nonnegative cone
and the cone memberships as slack blocks, so the core works on the conic
form  A x = b,  G x + s = h,  s in K  with K a product of a nonnegative
orthant and second-order cones.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

STATUS_OPTIMAL = "optimal"
STATUS_INFEASIBLE = "infeasible"
STATUS_UNBOUNDED = "unbounded"
STATUS_MAX_ITERS = "max_iters"
STATUS_NUMERICAL = "numerical_failure"


class SocpError(RuntimeError):
    """Base class for solver-side failures."""


class BadProblemError(SocpError):
    """Structurally invalid problem (bad indices, NaNs, empty cones)."""


@dataclass(frozen=True)
class AffineBound:
    """One-sided affine bound on a single variable.

    sense "upper":  x[var] <= offset + sum(coef * x[j])
    sense "lower":  x[var] >= offset + sum(coef * x[j])
    """

    var: int
    sense: str
    offset: float = 0.0
    coeffs: tuple[tuple[int, float], ...] = ()

    def __post_init__(self) -> None:
        if self.sense not in ("lower", "upper"):
            raise ValueError(f"unknown bound sense {self.sense!r}")


@dataclass
class SocpProblem:
    n_vars: int
    cost: np.ndarray
    a_eq: sp.csr_matrix
    b_eq: np.ndarray
    cones: list[tuple[int, ...]] = field(default_factory=list)
    bounds: list[AffineBound] = field(default_factory=list)

    def __post_init__(self) -> None:
        self.cost = np.asarray(self.cost, dtype=float).ravel()
        self.a_eq = sp.csr_matrix(self.a_eq, dtype=float)
        if self.a_eq.shape == (1, 0) and self.n_vars:
            self.a_eq = sp.csr_matrix((0, self.n_vars))
        self.b_eq = np.asarray(self.b_eq, dtype=float).ravel()
        self.cones = [tuple(int(i) for i in cone) for cone in self.cones]
        if self.cost.size != self.n_vars:
            raise BadProblemError("cost length does not match n_vars")
        if self.a_eq.shape != (self.b_eq.size, self.n_vars):
            raise BadProblemError("equality matrix/rhs shapes are inconsistent")

    @property
    def n_eq(self) -> int:
        return self.b_eq.size


@dataclass
class SolverSettings:
    gap_tol: float = 1e-8
    feas_tol: float = 1e-8
    max_iters: int = 100

    def __post_init__(self) -> None:
        if not (self.gap_tol > 0 and self.feas_tol > 0 and self.max_iters >= 1):
            raise ValueError("solver settings must be positive")


@dataclass
class SocpSolution:
    status: str
    primal: np.ndarray | None
    dual: np.ndarray | None
    objective: float | None
    gap: float | None
    iterations: int
    slack: np.ndarray | None = None
    cone_dual: np.ndarray | None = None
    message: str = ""

    @property
    def optimal(self) -> bool:
        return self.status == STATUS_OPTIMAL


# ---------------------------------------------------------------------------
# Validation
# ---------------------------------------------------------------------------


@dataclass
class ValidationIssue:
    severity: str  # "error" | "warning"
    message: str


@dataclass
class ValidationReport:
    issues: list[ValidationIssue] = field(default_factory=list)

    def add(self, severity: str, message: str) -> None:
        self.issues.append(ValidationIssue(severity, message))

    @property
    def errors(self) -> list[ValidationIssue]:
        return [i for i in self.issues if i.severity == "error"]

    @property
    def warnings(self) -> list[ValidationIssue]:
        return [i for i in self.issues if i.severity == "warning"]

    @property
    def ok(self) -> bool:
        return not self.errors


# dense rank checks are only attempted below this row count
_RANK_CHECK_LIMIT = 500


def validate(problem: SocpProblem, rank_check: bool | None = None) -> ValidationReport:
    """Structural validation: index errors, empty cones, NaNs, rank issues.

    Duplicate equality rows are always reported (named row pairs); a dense
    rank check runs for small problems or when rank_check=True.
    """
    rep = ValidationReport()
    n = problem.n_vars

    if not np.all(np.isfinite(problem.cost)):
        rep.add("error", "cost vector contains non-finite entries")
    if not np.all(np.isfinite(problem.a_eq.data)):
        rep.add("error", "equality matrix contains non-finite entries")
    if not np.all(np.isfinite(problem.b_eq)):
        rep.add("error", "equality rhs contains non-finite entries")

    for k, cone in enumerate(problem.cones):
        if len(cone) < 2:
            rep.add("error", f"cone {k} is empty (needs a bound and one member)")
            continue
        if len(set(cone)) != len(cone):
            rep.add("error", f"cone {k} repeats a variable index")
        bad = [i for i in cone if not 0 <= i < n]
        if bad:
            rep.add("error", f"cone {k} references out-of-range index {bad[0]}")

    for k, bound in enumerate(problem.bounds):
        idxs = [bound.var] + [j for j, _ in bound.coeffs]
        bad = [i for i in idxs if not 0 <= i < n]
        if bad:
            rep.add("error", f"bound {k} references out-of-range index {bad[0]}")
        vals = [bound.offset] + [v for _, v in bound.coeffs]
        if not np.all(np.isfinite(vals)):
            rep.add("error", f"bound {k} has non-finite coefficients")

    # duplicate equality rows (exact match including rhs)
    a = problem.a_eq.tocsr()
    seen: dict[tuple, int] = {}
    for i in range(a.shape[0]):
        row = a.getrow(i)
        key = (tuple(row.indices.tolist()), tuple(row.data.tolist()), problem.b_eq[i])
        if key in seen:
            rep.add(
                "warning",
                f"equality rows {seen[key]} and {i} are exact duplicates "
                "(rank-deficient pair)",
            )
        else:
            seen[key] = i

    if rank_check is None:
        rank_check = a.shape[0] <= _RANK_CHECK_LIMIT
    if rank_check and 0 < a.shape[0] <= a.shape[1]:
        rank = np.linalg.matrix_rank(a.toarray())
        if rank < a.shape[0]:
            rep.add(
                "warning",
                f"equality matrix is rank deficient (rank {rank} of {a.shape[0]} rows)",
            )
    return rep


# ---------------------------------------------------------------------------
# Conic standard form
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ConeDims:
    l: int
    q: tuple[int, ...]

    @property
    def m(self) -> int:
        return self.l + sum(self.q)

    @property
    def degree(self) -> int:
        return self.l + len(self.q)


@dataclass
class ConeLP:
    """min c'x  s.t.  A x = b,  G x + s = h,  s in K(dims)."""

    c: np.ndarray
    a: sp.csr_matrix
    b: np.ndarray
    g: sp.csr_matrix
    h: np.ndarray
    dims: ConeDims


def standard_form(problem: SocpProblem) -> ConeLP:
    """Convert a SocpProblem to the conic form used by the interior-point core.

    Bound rows populate the nonnegative-orthant block (one slack each); each
    cone tuple becomes a slack block equal to (x_t; x_members).
    """
    n = problem.n_vars
    rows: list[int] = []
    cols: list[int] = []
    vals: list[float] = []
    h: list[float] = []
    r = 0

    for bound in problem.bounds:
        sign = 1.0 if bound.sense == "upper" else -1.0
        # upper: x_v - expr <= offset ; lower: expr - x_v <= -offset
        rows.append(r)
        cols.append(bound.var)
        vals.append(sign)
        for j, coef in bound.coeffs:
            rows.append(r)
            cols.append(j)
            vals.append(-sign * coef)
        h.append(sign * bound.offset)
        r += 1
    l_dim = r

    qsizes: list[int] = []
    for cone in problem.cones:
        for idx in cone:
            rows.append(r)
            cols.append(idx)
            vals.append(-1.0)
            h.append(0.0)
            r += 1
        qsizes.append(len(cone))

    g = sp.csr_matrix((vals, (rows, cols)), shape=(r, n))
    return ConeLP(
        c=problem.cost.copy(),
        a=problem.a_eq.tocsr(copy=True),
        b=problem.b_eq.copy(),
        g=g,
        h=np.array(h, dtype=float),
        dims=ConeDims(l_dim, tuple(qsizes)),
    )


# ---------------------------------------------------------------------------
# Presolve: fixed variables, empty/duplicate rows
# ---------------------------------------------------------------------------


@dataclass
class PresolveResult:
    status: str | None  # short-circuit status or None
    message: str = ""
    reduced: ConeLP | None = None
    keep_vars: np.ndarray | None = None  # reduced column -> original column
    fixes: list[tuple[int, float, int | None]] = field(default_factory=list)
    keep_rows: np.ndarray | None = None  # reduced eq row -> original eq row
    n_orig: int = 0
    p_orig: int = 0


_EMPTY_ROW_TOL = 1e-9


def presolve(lp: ConeLP, zero_tol: float = _EMPTY_ROW_TOL) -> PresolveResult:
    """Eliminate variables fixed by single-entry equality rows; drop empty and
    exactly duplicate rows.  Detects trivially inconsistent equalities.

    The fix list is ordered; a later fix may only have become single-entry
    after earlier substitutions, which makes dual recovery triangular when
    processed in reverse.
    """
    n = lp.c.size
    p = lp.b.size
    result = PresolveResult(status=None, n_orig=n, p_orig=p)

    a_csr = lp.a.tocsr()
    row_entries: list[dict[int, float]] = []
    for i in range(p):
        sl = slice(a_csr.indptr[i], a_csr.indptr[i + 1])
        row_entries.append(dict(zip(a_csr.indices[sl].tolist(), a_csr.data[sl].tolist())))
    col_rows: dict[int, set[int]] = {}
    for i, entries in enumerate(row_entries):
        for j in entries:
            col_rows.setdefault(j, set()).add(i)
    rhs = lp.b.astype(float).copy()

    killed = np.zeros(p, dtype=bool)
    fixed_value: dict[int, float] = {}
    worklist = deque(i for i, e in enumerate(row_entries) if len(e) <= 1)

    while worklist:
        i = worklist.popleft()
        if killed[i]:
            continue
        entries = row_entries[i]
        if len(entries) == 0:
            if abs(rhs[i]) > zero_tol:
                result.status = STATUS_INFEASIBLE
                result.message = f"equality row {i} reduces to 0 = {rhs[i]:.3e}"
                return result
            killed[i] = True
            continue
        if len(entries) > 1:
            continue
        (j, coef), = entries.items()
        if coef == 0.0:
            continue
        value = rhs[i] / coef
        fixed_value[j] = value
        result.fixes.append((j, value, i))
        killed[i] = True
        for r_other in list(col_rows.get(j, ())):
            if r_other == i or killed[r_other]:
                continue
            c_other = row_entries[r_other].pop(j, None)
            if c_other is not None:
                rhs[r_other] -= c_other * value
                if len(row_entries[r_other]) <= 1:
                    worklist.append(r_other)
        col_rows.pop(j, None)

    # duplicate detection among surviving rows
    seen: dict[tuple, int] = {}
    keep_rows: list[int] = []
    for i in range(p):
        if killed[i]:
            continue
        items = tuple(sorted(row_entries[i].items()))
        key = (items, rhs[i])
        if key in seen:
            continue
        seen[key] = i
        keep_rows.append(i)

    keep_vars = np.array([j for j in range(n) if j not in fixed_value], dtype=int)
    fix_vec = np.zeros(n)
    fix_mask = np.zeros(n, dtype=bool)
    for j, v in fixed_value.items():
        fix_vec[j] = v
        fix_mask[j] = True

    g_csc = lp.g.tocsc()
    h_new = lp.h - g_csc[:, fix_mask] @ fix_vec[fix_mask]
    g_new = g_csc[:, keep_vars].tocsr()

    col_map = {int(j): k for k, j in enumerate(keep_vars)}
    a_rows: list[int] = []
    a_cols: list[int] = []
    a_vals: list[float] = []
    b_new = []
    for new_i, i in enumerate(keep_rows):
        for j, v in row_entries[i].items():
            a_rows.append(new_i)
            a_cols.append(col_map[j])
            a_vals.append(v)
        b_new.append(rhs[i])
    a_new = sp.csr_matrix(
        (a_vals, (a_rows, a_cols)), shape=(len(keep_rows), keep_vars.size)
    )

    c_new = lp.c[keep_vars]

    # variables appearing nowhere: unbounded if they carry cost, else fix at 0
    used = np.zeros(keep_vars.size, dtype=bool)
    if a_new.nnz:
        used[np.unique(a_new.tocoo().col)] = True
    if g_new.nnz:
        used[np.unique(g_new.tocoo().col)] = True
    loose = np.where(~used)[0]
    if loose.size:
        if np.any(c_new[loose] != 0.0):
            j = int(loose[np.nonzero(c_new[loose])[0][0]])
            result.status = STATUS_UNBOUNDED
            result.message = (
                f"variable {int(keep_vars[j])} is unconstrained but has nonzero cost"
            )
            return result
        for j in loose:
            result.fixes.append((int(keep_vars[j]), 0.0, None))
        keep2 = np.where(used)[0]
        keep_vars = keep_vars[keep2]
        c_new = c_new[keep2]
        a_new = a_new.tocsc()[:, keep2].tocsr()
        g_new = g_new.tocsc()[:, keep2].tocsr()

    result.reduced = ConeLP(c_new, a_new, np.array(b_new), g_new, h_new, lp.dims)
    result.keep_vars = keep_vars
    result.keep_rows = np.array(keep_rows, dtype=int)
    return result


def reconstruct_primal(pre: PresolveResult, x_reduced: np.ndarray) -> np.ndarray:
    x = np.zeros(pre.n_orig)
    x[pre.keep_vars] = x_reduced
    for j, value, _row in pre.fixes:
        x[j] = value
    return x


def reconstruct_dual(
    lp: ConeLP, pre: PresolveResult, y_reduced: np.ndarray, z: np.ndarray
) -> np.ndarray:
    """Equality multipliers for the original rows.

    Kept rows take the reduced duals; dropped duplicate/empty rows take 0;
    fixing rows are recovered from stationarity of their fixed variable, in
    reverse elimination order (triangular by construction).
    """
    y = np.zeros(pre.p_orig)
    if pre.keep_rows is not None and pre.keep_rows.size:
        y[pre.keep_rows] = y_reduced
    resid = lp.c + lp.a.T @ y + lp.g.T @ z
    a_csr = lp.a.tocsr()
    for j, _value, row in reversed(pre.fixes):
        if row is None:
            continue
        coef = a_csr[row, j]
        if coef == 0.0:
            continue
        y_row = -resid[j] / coef
        y[row] = y_row
        sl = slice(a_csr.indptr[row], a_csr.indptr[row + 1])
        resid[a_csr.indices[sl]] += a_csr.data[sl] * y_row
    return y
