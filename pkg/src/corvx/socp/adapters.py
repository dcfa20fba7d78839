"""Pluggable external SOCP solver adapters for cross-validation.

An adapter consumes the same presolved conic form as the built-in
interior-point method, so internal/external runs see identical data.  The
only adapter shipped here wraps cvxopt's conelp; registering others is a
matter of adding a class with the same two methods.
"""

from __future__ import annotations

import numpy as np

from corvx.socp.ipm import IpmResult
from corvx.socp.problem import (
    STATUS_INFEASIBLE,
    STATUS_MAX_ITERS,
    STATUS_NUMERICAL,
    STATUS_OPTIMAL,
    STATUS_UNBOUNDED,
    ConeLP,
    SolverSettings,
)


class AdapterUnavailableError(RuntimeError):
    """The requested external solver is not importable."""


class CvxoptConelpAdapter:
    """Adapter over cvxopt.solvers.conelp."""

    name = "cvxopt"

    @staticmethod
    def available() -> bool:
        try:
            import cvxopt  # noqa: F401
        except ImportError:
            return False
        return True

    def solve(self, lp: ConeLP, settings: SolverSettings) -> IpmResult:
        try:
            from cvxopt import matrix, solvers, spmatrix
        except ImportError as exc:
            raise AdapterUnavailableError("cvxopt is not installed") from exc

        def to_sp(mat):
            coo = mat.tocoo()
            return spmatrix(
                coo.data.tolist(),
                coo.row.tolist(),
                coo.col.tolist(),
                size=mat.shape,
            )

        dims = {"l": lp.dims.l, "q": list(lp.dims.q), "s": []}
        options = {
            "show_progress": False,
            "abstol": settings.gap_tol,
            "reltol": settings.gap_tol,
            "feastol": settings.feas_tol,
            "maxiters": settings.max_iters,
        }
        sol = solvers.conelp(
            matrix(lp.c),
            to_sp(lp.g),
            matrix(lp.h) if lp.h.size else matrix(0.0, (0, 1)),
            dims,
            to_sp(lp.a),
            matrix(lp.b) if lp.b.size else matrix(0.0, (0, 1)),
            options=options,
        )
        status_map = {
            "optimal": STATUS_OPTIMAL,
            "primal infeasible": STATUS_INFEASIBLE,
            "dual infeasible": STATUS_UNBOUNDED,
            "unknown": STATUS_MAX_ITERS,
        }
        status = status_map.get(sol["status"], STATUS_NUMERICAL)
        x = np.array(sol["x"]).ravel() if sol["x"] is not None else None
        y = np.array(sol["y"]).ravel() if sol["y"] is not None else np.zeros(0)
        z = np.array(sol["z"]).ravel() if sol["z"] is not None else None
        s = np.array(sol["s"]).ravel() if sol["s"] is not None else None
        objective = float(lp.c @ x) if (status == STATUS_OPTIMAL and x is not None) else None
        gap = float(sol["gap"]) if sol.get("gap") is not None else None
        return IpmResult(
            status,
            x,
            y if y is not None else None,
            z,
            s,
            objective,
            gap,
            int(sol.get("iterations", 0) or 0),
            message=f"cvxopt status {sol['status']}",
        )


_REGISTRY = {CvxoptConelpAdapter.name: CvxoptConelpAdapter}


def get_adapter(name: str):
    try:
        cls = _REGISTRY[name]
    except KeyError:
        raise AdapterUnavailableError(f"no adapter registered under {name!r}") from None
    if not cls.available():
        raise AdapterUnavailableError(f"adapter {name!r} is not importable")
    return cls()


def register_adapter(cls) -> None:
    _REGISTRY[cls.name] = cls
