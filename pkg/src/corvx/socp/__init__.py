"""Second-order cone programming: standard form, reference interior-point
solver, presolve, validation, text dump/load, and external-solver adapters.
"""

from __future__ import annotations

import numpy as np

from corvx.socp.adapters import AdapterUnavailableError, get_adapter, register_adapter
from corvx.socp.ipm import IpmResult, solve_conelp
from corvx.socp.problem import (
    STATUS_INFEASIBLE,
    STATUS_MAX_ITERS,
    STATUS_NUMERICAL,
    STATUS_OPTIMAL,
    STATUS_UNBOUNDED,
    AffineBound,
    BadProblemError,
    ConeDims,
    ConeLP,
    PresolveResult,
    SocpProblem,
    SocpSolution,
    SolverSettings,
    ValidationReport,
    presolve,
    reconstruct_dual,
    reconstruct_primal,
    standard_form,
    validate,
)
from corvx.socp.textio import dump, dumps, load, loads

__all__ = [
    "AdapterUnavailableError",
    "AffineBound",
    "BadProblemError",
    "ConeDims",
    "ConeLP",
    "SocpProblem",
    "SocpSolution",
    "SolverSettings",
    "ValidationReport",
    "dump",
    "dumps",
    "get_adapter",
    "load",
    "loads",
    "presolve",
    "register_adapter",
    "solve",
    "solve_via_external",
    "standard_form",
    "validate",
    "STATUS_OPTIMAL",
    "STATUS_INFEASIBLE",
    "STATUS_UNBOUNDED",
    "STATUS_MAX_ITERS",
    "STATUS_NUMERICAL",
]


def _structural_check(problem: SocpProblem) -> None:
    n = problem.n_vars
    if not np.all(np.isfinite(problem.cost)):
        raise BadProblemError("cost vector contains non-finite entries")
    if problem.a_eq.nnz and not np.all(np.isfinite(problem.a_eq.data)):
        raise BadProblemError("equality matrix contains non-finite entries")
    if not np.all(np.isfinite(problem.b_eq)):
        raise BadProblemError("equality rhs contains non-finite entries")
    for cone in problem.cones:
        if len(cone) < 2 or any(not 0 <= i < n for i in cone):
            raise BadProblemError(f"malformed cone {cone}")
    for bound in problem.bounds:
        idxs = [bound.var] + [j for j, _ in bound.coeffs]
        if any(not 0 <= i < n for i in idxs):
            raise BadProblemError(f"bound references out-of-range index: {bound}")


def _run(problem: SocpProblem, settings: SolverSettings, engine) -> SocpSolution:
    _structural_check(problem)
    lp = standard_form(problem)
    pre = presolve(lp)
    if pre.status is not None:
        return SocpSolution(
            status=pre.status,
            primal=None,
            dual=None,
            objective=None,
            gap=None,
            iterations=0,
            message=f"presolve: {pre.message}",
        )
    res: IpmResult = engine(pre.reduced, settings)
    if res.status in (STATUS_OPTIMAL, STATUS_MAX_ITERS) and res.x is not None:
        x = reconstruct_primal(pre, res.x)
        z = res.z if res.z is not None else np.zeros(lp.dims.m)
        y = reconstruct_dual(lp, pre, res.y, z)
        s = lp.h - lp.g @ x
        return SocpSolution(
            status=res.status,
            primal=x,
            dual=y,
            objective=float(problem.cost @ x),
            gap=res.gap,
            iterations=res.iterations,
            slack=s,
            cone_dual=z,
            message=res.message,
        )
    return SocpSolution(
        status=res.status,
        primal=None,
        dual=None,
        objective=None,
        gap=None,
        iterations=res.iterations,
        message=res.message,
    )


def solve(problem: SocpProblem, settings: SolverSettings | None = None) -> SocpSolution:
    """Solve with the built-in interior-point method.

    Deterministic: identical inputs and settings give identical iterates.
    """
    return _run(problem, settings or SolverSettings(), solve_conelp)


def solve_via_external(
    problem: SocpProblem,
    adapter: str | object = "cvxopt",
    settings: SolverSettings | None = None,
) -> SocpSolution:
    """Solve through a registered external conic solver (no silent fallback)."""
    if isinstance(adapter, str):
        adapter = get_adapter(adapter)
    return _run(
        problem, settings or SolverSettings(), lambda lp, st: adapter.solve(lp, st)
    )
