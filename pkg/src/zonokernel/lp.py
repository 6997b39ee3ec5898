"""Standard-form linear programs and their solution.

Problems are stated as::

    minimize    c @ z
    subject to  A_ub @ z <= b_ub
                A_eq @ z == b_eq
                lower <= z <= upper

Matrices are kept in scipy sparse (CSR) form so the large kernel programs
cost memory proportional to their nonzeros. The backend is HiGHS: dual
simplex for small problems, interior point followed by crossover for large
ones. Both end on a basic solution and are deterministic for a fixed input.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
import scipy.sparse as sp
from scipy.optimize import linprog

from .tolerances import LP_TOL

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"


class LPError(RuntimeError):
    """The LP backend failed for a reason other than infeasibility/unboundedness."""


def _as_csr(M, n_cols: int) -> sp.csr_matrix:
    if M is None:
        return sp.csr_matrix((0, n_cols))
    if sp.issparse(M):
        return sp.csr_matrix(M, dtype=float)
    M = np.asarray(M, dtype=float)
    if M.size == 0:
        return sp.csr_matrix((0, n_cols))
    return sp.csr_matrix(np.atleast_2d(M))


def _bound(v, n: int, default: float) -> np.ndarray:
    """Bound vector with ``None`` entries (or ``None`` itself) meaning unbounded."""
    if v is None:
        return np.full(n, default)
    return np.array([default if x is None else x for x in np.ravel(np.asarray(v, dtype=object))],
                    dtype=float)


@dataclass(frozen=True)
class StandardLP:
    """A linear program in the standard form described in the module docstring.

    Bounds default to ``-inf``/``+inf`` (free variables).
    """

    c: np.ndarray
    A_ub: sp.csr_matrix
    b_ub: np.ndarray
    A_eq: sp.csr_matrix
    b_eq: np.ndarray
    lower: np.ndarray
    upper: np.ndarray
    var_names: Optional[Sequence[str]] = field(default=None, compare=False)

    @classmethod
    def build(cls, c, A_ub=None, b_ub=None, A_eq=None, b_eq=None,
              lower=None, upper=None, var_names=None) -> "StandardLP":
        c = np.asarray(c, dtype=float).reshape(-1)
        n = c.size
        A_ub = _as_csr(A_ub, n)
        A_eq = _as_csr(A_eq, n)
        b_ub = np.asarray([] if b_ub is None else b_ub, dtype=float).reshape(-1)
        b_eq = np.asarray([] if b_eq is None else b_eq, dtype=float).reshape(-1)
        lower = _bound(lower, n, -np.inf)
        upper = _bound(upper, n, np.inf)
        lp = cls(c, A_ub, b_ub, A_eq, b_eq, lower, upper, var_names)
        lp.check()
        return lp

    @property
    def n_vars(self) -> int:
        return self.c.size

    def check(self) -> None:
        """Raise ``ValueError`` on inconsistent dimensions or non-finite data."""
        n = self.n_vars
        if self.A_ub.shape[1] != n or self.A_eq.shape[1] != n:
            raise ValueError(f"constraint matrices must have {n} columns")
        if self.A_ub.shape[0] != self.b_ub.size:
            raise ValueError("A_ub rows and b_ub length differ")
        if self.A_eq.shape[0] != self.b_eq.size:
            raise ValueError("A_eq rows and b_eq length differ")
        if self.lower.size != n or self.upper.size != n:
            raise ValueError("bound vectors must match the variable count")
        if self.var_names is not None and len(self.var_names) != n:
            raise ValueError("var_names must match the variable count")
        for name, arr in (("c", self.c), ("b_ub", self.b_ub), ("b_eq", self.b_eq),
                          ("A_ub", self.A_ub.data), ("A_eq", self.A_eq.data)):
            if not np.all(np.isfinite(arr)):
                raise ValueError(f"{name} has non-finite entries")
        if np.any(np.isnan(self.lower)) or np.any(np.isnan(self.upper)):
            raise ValueError("bounds contain NaN")

    def residual(self, z: np.ndarray) -> float:
        """Maximum primal infeasibility of ``z`` (0 for a feasible point)."""
        r = 0.0
        if self.b_ub.size:
            r = max(r, float(np.max(self.A_ub @ z - self.b_ub, initial=0.0)))
        if self.b_eq.size:
            r = max(r, float(np.max(np.abs(self.A_eq @ z - self.b_eq))))
        r = max(r, float(np.max(self.lower - z, initial=0.0)))
        r = max(r, float(np.max(z - self.upper, initial=0.0)))
        return r


@dataclass(frozen=True)
class LPSolution:
    status: str
    z: Optional[np.ndarray]
    objective_value: float
    residual: float

    @property
    def optimal(self) -> bool:
        return self.status == OPTIMAL


_HIGHS_OPTIONS = {
    "presolve": True,
    "primal_feasibility_tolerance": 1e-9,
    "dual_feasibility_tolerance": 1e-9,
}


#: Variable count above which the interior-point path is used.
IPM_THRESHOLD = 5000


def solve_lp(lp: StandardLP, time_limit: Optional[float] = None, method: str = "auto") -> LPSolution:
    """Solve ``lp`` and report its status together with the minimizer.

    ``method`` is ``"simplex"``, ``"ipm"`` or ``"auto"`` (by problem size).

    Raises:
        ValueError: if the problem is malformed.
        LPError: if the backend stops without a definite answer.
    """
    lp.check()
    options = dict(_HIGHS_OPTIONS)
    if time_limit is not None:
        options["time_limit"] = float(time_limit)
    res = linprog(
        lp.c,
        A_ub=lp.A_ub if lp.b_ub.size else None,
        b_ub=lp.b_ub if lp.b_ub.size else None,
        A_eq=lp.A_eq if lp.b_eq.size else None,
        b_eq=lp.b_eq if lp.b_eq.size else None,
        bounds=np.column_stack([lp.lower, lp.upper]),
        method=_backend(method, lp.n_vars),
        options=options,
    )
    if res.status == 2:
        return LPSolution(INFEASIBLE, None, np.inf, np.inf)
    if res.status == 3:
        return LPSolution(UNBOUNDED, None, -np.inf, np.inf)
    if res.status != 0:
        raise LPError(f"LP backend failed (status {res.status}): {res.message}")
    z = np.asarray(res.x, dtype=float)
    resid = lp.residual(z)
    if resid > LP_TOL:
        raise LPError(f"LP solution residual {resid:.3e} exceeds {LP_TOL:.0e}")
    return LPSolution(OPTIMAL, z, float(lp.c @ z), resid)


def _backend(method: str, n_vars: int) -> str:
    if method == "auto":
        method = "ipm" if n_vars > IPM_THRESHOLD else "simplex"
    try:
        return {"simplex": "highs-ds", "ipm": "highs-ipm"}[method]
    except KeyError:
        raise ValueError(f"unknown LP method {method!r}") from None


def format_lp(lp: StandardLP) -> str:
    """Plain-text dump: one line per constraint, ``coeff*var ... <= rhs``."""
    names = list(lp.var_names) if lp.var_names is not None else [f"z{i}" for i in range(lp.n_vars)]

    def row_text(M: sp.csr_matrix, r: int) -> str:
        lo, hi = M.indptr[r], M.indptr[r + 1]
        terms = [f"{M.data[k]:+.17g}*{names[M.indices[k]]}" for k in range(lo, hi)]
        return " ".join(terms) if terms else "0"

    lines = ["minimize " + " ".join(f"{v:+.17g}*{names[i]}" for i, v in enumerate(lp.c) if v != 0.0)]
    for r in range(lp.b_ub.size):
        lines.append(f"{row_text(lp.A_ub, r)} <= {lp.b_ub[r]:.17g}")
    for r in range(lp.b_eq.size):
        lines.append(f"{row_text(lp.A_eq, r)} == {lp.b_eq[r]:.17g}")
    for i in range(lp.n_vars):
        if np.isfinite(lp.lower[i]):
            lines.append(f"-1*{names[i]} <= {-lp.lower[i]:.17g}")
        if np.isfinite(lp.upper[i]):
            lines.append(f"+1*{names[i]} <= {lp.upper[i]:.17g}")
    return "\n".join(lines) + "\n"
