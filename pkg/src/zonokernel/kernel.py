"""Kernel computation as one linear program over scaled zonotopes.

The candidate set is ``I = <alpha | G_I diag(gamma)>``. For each mode the
containment conditions of its reach sets (and, with inputs, of the input
sets ``<beta(t) | [Phi(t), G_F(t) diag(psi(t))]>``) in the constraint boxes
are collected into one LP.

Absolute values of decision-dependent generator entries are handled with
epigraph variables: ``Theta(t) >= +/-(A^t G_I Gamma + sum_s A^{t-1-s} B Phi(s))``
and ``P(t) >= +/-Phi(t)`` elementwise, with ``Theta(t) @ 1`` and ``P(t) @ 1``
standing in for the absolute row sums. Those sums only ever loosen the
constraints they appear in, so any feasible epigraph point certifies the
original conditions and ``Theta = |.|`` is always admissible.

Decision vector layout (frozen; see :class:`ProgramLayout`)::

    [alpha (dx) | gamma (nI) | beta(0..T-1) (du each) | Phi(0..T-1) (du*nI each, row-major)
     | psi(0..T-1) (nF(t) each) | Theta(1..T) (dx*nI each, row-major) | P(0..T-1) (du*nI each)]

Row layout: for t = 0..T the state rows (dx upper then dx lower, rows with an
infinite bound dropped), then per t = 1..T the Theta rows (dx*nI "+" then
dx*nI "-"), then per t = 0..T-1 the P rows ("+" then "-") and the input rows
(du upper then du lower).
"""

from __future__ import annotations

import json
import logging
import time
import warnings
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import List, Optional, Sequence

import numpy as np
import scipy.sparse as sp

from .dynamics import DiscreteAffineSystem, PolicyParams, matrix_powers, reach_sequence
from .lp import INFEASIBLE, OPTIMAL, UNBOUNDED, StandardLP, solve_lp
from .tolerances import CERT_TOL, GEOM_TOL
from .zonotope import Zonotope, box_violation

log = logging.getLogger(__name__)


class KernelMode(str, Enum):
    INVARIANT = "invariant"
    INVARIANT_DISTURBED = "invariant_disturbed"
    VIABLE = "viable"
    VIABLE_NO_FREE = "viable_no_free"
    DISCRIMINATING = "discriminating"

    @property
    def has_input(self) -> bool:
        return self in (KernelMode.VIABLE, KernelMode.VIABLE_NO_FREE, KernelMode.DISCRIMINATING)

    @property
    def has_disturbance(self) -> bool:
        return self in (KernelMode.INVARIANT_DISTURBED, KernelMode.DISCRIMINATING)

    @property
    def has_free(self) -> bool:
        return self in (KernelMode.VIABLE, KernelMode.DISCRIMINATING)


class KernelError(RuntimeError):
    """Incompatible problem/mode combination or a solver failure."""


def normalize_columns(G) -> np.ndarray:
    G = np.atleast_2d(np.asarray(G, dtype=float))
    norms = np.linalg.norm(G, axis=0)
    if np.any(norms <= GEOM_TOL):
        raise ValueError("template generators must be nonzero")
    return G / norms[None, :]


def _free_matrix(F, du: int) -> np.ndarray:
    F = np.asarray(F, dtype=float)
    if F.size == 0:
        return np.zeros((du, 0))
    if F.ndim != 2 or F.shape[0] != du:
        raise ValueError(f"free generators must have {du} rows")
    return F


@dataclass(frozen=True, eq=False)
class KernelProblem:
    """The system and template of a kernel program, plus its horizon and weights.

    ``free_generators`` is either one ``du x nF`` matrix used at every step or
    a list of ``T`` such matrices; ``None`` means the ``du x du`` identity.
    Setting ``use_phi=False`` pins the state-to-input coupling ``Phi`` to zero.
    ``phi_penalty`` is a small cost on ``sum |Phi|`` that breaks ties between
    optimal solutions in favour of the least state-to-input coupling.
    """

    system: DiscreteAffineSystem
    template: np.ndarray
    horizon: int
    free_generators: Optional[object] = None
    eta: float = 1.0
    use_phi: bool = True
    phi_penalty: float = 1e-6

    def __post_init__(self):
        if int(self.horizon) < 1:
            raise ValueError("horizon must be at least 1")
        object.__setattr__(self, "horizon", int(self.horizon))
        if not self.eta > 0:
            raise ValueError("eta must be positive")
        if self.phi_penalty < 0:
            raise ValueError("phi_penalty must be nonnegative")
        G = np.atleast_2d(np.asarray(self.template, dtype=float))
        if G.size == 0 or G.shape[1] == 0:
            raise ValueError("template must have at least one generator")
        if G.shape[0] != self.system.dx:
            raise ValueError("template rows must equal the state dimension")
        Gn = normalize_columns(G)
        if not np.allclose(Gn, G, atol=1e-12, rtol=0):
            warnings.warn("template generators rescaled to unit norm", stacklevel=3)
        Gn.setflags(write=False)
        object.__setattr__(self, "template", Gn)
        du, T = self.system.du, self.horizon
        F = self.free_generators
        if F is None:
            F = [np.eye(du) for _ in range(T)]
        elif isinstance(F, np.ndarray) or (len(F) and np.ndim(F[0]) == 1):
            F = [_free_matrix(F, du) for _ in range(T)]
        else:
            if len(F) != T:
                raise ValueError("per-step free generators must have length T")
            F = [_free_matrix(f, du) for f in F]
        object.__setattr__(self, "free_generators", F)

    @property
    def n_template(self) -> int:
        return self.template.shape[1]


@dataclass(frozen=True)
class ProgramLayout:
    """Offsets of every variable block in the LP decision vector."""

    dx: int
    nI: int
    du: int
    T: int
    nF: tuple
    use_phi: bool

    @property
    def alpha(self) -> slice:
        return slice(0, self.dx)

    @property
    def gamma(self) -> slice:
        return slice(self.dx, self.dx + self.nI)

    @property
    def _beta0(self) -> int:
        return self.dx + self.nI

    def beta(self, t: int) -> slice:
        o = self._beta0 + t * self.du
        return slice(o, o + self.du)

    @property
    def _phi0(self) -> int:
        return self._beta0 + self.T * self.du

    @property
    def _phi_size(self) -> int:
        return self.du * self.nI if self.use_phi else 0

    def phi(self, t: int) -> np.ndarray:
        """Indices of ``Phi(t)`` as a ``du x nI`` array."""
        o = self._phi0 + t * self._phi_size
        return np.arange(o, o + self._phi_size).reshape(self.du, self.nI)

    @property
    def _psi0(self) -> int:
        return self._phi0 + self.T * self._phi_size

    def psi(self, t: int) -> slice:
        o = self._psi0 + int(sum(self.nF[:t]))
        return slice(o, o + self.nF[t])

    @property
    def _theta0(self) -> int:
        return self._psi0 + int(sum(self.nF))

    def theta(self, t: int) -> np.ndarray:
        """Indices of ``Theta(t)`` (``t >= 1``) as a ``dx x nI`` array."""
        size = self.dx * self.nI
        o = self._theta0 + (t - 1) * size
        return np.arange(o, o + size).reshape(self.dx, self.nI)

    @property
    def _p0(self) -> int:
        return self._theta0 + (self.T * self.dx * self.nI if self.use_phi else 0)

    def p(self, t: int) -> np.ndarray:
        o = self._p0 + t * self._phi_size
        return np.arange(o, o + self._phi_size).reshape(self.du, self.nI)

    @property
    def n_primary(self) -> int:
        return self._theta0

    @property
    def n_vars(self) -> int:
        return self._p0 + self.T * self._phi_size

    def names(self) -> List[str]:
        names = [f"alpha[{j}]" for j in range(self.dx)] + [f"gamma[{i}]" for i in range(self.nI)]
        for t in range(self.T):
            names += [f"beta[{t}][{k}]" for k in range(self.du)]
        for t in range(self.T):
            names += [f"Phi[{t}][{k}][{i}]" for k in range(self.du) for i in range(self.nI)] if self.use_phi else []
        for t in range(self.T):
            names += [f"psi[{t}][{f}]" for f in range(self.nF[t])]
        if self.use_phi:
            for t in range(1, self.T + 1):
                names += [f"Theta[{t}][{j}][{i}]" for j in range(self.dx) for i in range(self.nI)]
            for t in range(self.T):
                names += [f"P[{t}][{k}][{i}]" for k in range(self.du) for i in range(self.nI)]
        return names


def check_mode(problem: KernelProblem, mode: KernelMode) -> None:
    sys = problem.system
    if mode == KernelMode.INVARIANT and sys.has_disturbance:
        raise KernelError("mode 'invariant' requires a system without disturbance; use 'invariant_disturbed'")
    if mode.has_input and sys.du == 0:
        raise KernelError(f"mode '{mode.value}' requires a system with control inputs")
    if mode in (KernelMode.VIABLE, KernelMode.VIABLE_NO_FREE) and sys.has_disturbance:
        raise KernelError(f"mode '{mode.value}' requires a system without disturbance")


def _layout(problem: KernelProblem, mode: KernelMode) -> ProgramLayout:
    T = problem.horizon
    du = problem.system.du if mode.has_input else 0
    nF = tuple(f.shape[1] for f in problem.free_generators) if (mode.has_free and du) else (0,) * T
    return ProgramLayout(problem.system.dx, problem.n_template, du, T, nF,
                         bool(problem.use_phi and mode.has_input))


class _Rows:
    """COO accumulator for inequality rows ``M z <= h``; round-off-sized coefficients are dropped."""

    def __init__(self):
        self.r, self.c, self.v, self.h = [], [], [], []
        self.n = 0

    def add(self, rows, cols, vals):
        rows, cols, vals = np.broadcast_arrays(np.asarray(rows), np.asarray(cols), np.asarray(vals, dtype=float))
        keep = np.abs(vals) > 1e-13
        self.r.append(rows[keep].ravel())
        self.c.append(cols[keep].ravel())
        self.v.append(vals[keep].ravel())

    def new(self, rhs) -> np.ndarray:
        rhs = np.asarray(rhs, dtype=float).reshape(-1)
        ids = np.arange(self.n, self.n + rhs.size)
        self.n += rhs.size
        self.h.append(rhs)
        return ids

    def matrix(self, n_vars: int):
        r = np.concatenate(self.r) if self.r else np.zeros(0, int)
        c = np.concatenate(self.c) if self.c else np.zeros(0, int)
        v = np.concatenate(self.v) if self.v else np.zeros(0)
        M = sp.csr_matrix((v, (r, c)), shape=(self.n, n_vars))
        h = np.concatenate(self.h) if self.h else np.zeros(0)
        return M, h


def assemble_program(problem: KernelProblem, mode) -> StandardLP:
    """Build the LP whose optimum maximizes ``1'gamma + eta * sum_t 1'psi(t)``."""
    mode = KernelMode(mode)
    check_mode(problem, mode)
    L = _layout(problem, mode)
    sys = problem.system
    dx, nI, du, T = L.dx, L.nI, L.du, L.T
    A = sys.A
    B = sys.B if du else np.zeros((dx, 0))
    G_I = problem.template
    F = problem.free_generators if du else [np.zeros((0, 0))] * T
    use_v = mode.has_disturbance and sys.has_disturbance

    Apow = matrix_powers(A, T)
    AB = [Apow[k] @ B for k in range(T)]
    TG = [Apow[t] @ G_I for t in range(T + 1)]
    drift = sys.w + (sys.C @ sys.V.center if use_v else 0.0)
    VG = sys.C @ sys.V.generators if use_v else np.zeros((dx, 0))

    rows = _Rows()
    const_center = np.zeros(dx)
    rad_v = np.zeros(dx)
    xlo, xhi = sys.X.lower, sys.X.upper
    j_idx = np.arange(dx)
    for t in range(T + 1):
        if t > 0:
            const_center = A @ const_center + drift
            rad_v = rad_v + np.abs(Apow[t - 1] @ VG).sum(axis=1)
        for sign, rhs in ((1.0, xhi - const_center - rad_v), (-1.0, -xlo + const_center - rad_v)):
            finite = np.isfinite(rhs)
            if not np.any(finite):
                continue
            jj = j_idx[finite]
            ids = rows.new(rhs[finite])
            rows.add(ids[:, None], np.arange(dx)[None, :] + L.alpha.start, sign * Apow[t][jj, :])
            for s in range(t):
                if du:
                    cols = np.arange(L.beta(s).start, L.beta(s).stop)
                    rows.add(ids[:, None], cols[None, :], sign * AB[t - 1 - s][jj, :])
                if L.nF[s]:
                    cols = np.arange(L.psi(s).start, L.psi(s).stop)
                    rows.add(ids[:, None], cols[None, :], np.abs(AB[t - 1 - s] @ F[s])[jj, :])
            if L.use_phi and t > 0:
                rows.add(ids[:, None], L.theta(t)[jj, :], 1.0)
            else:
                gcols = np.arange(L.gamma.start, L.gamma.stop)
                rows.add(ids[:, None], gcols[None, :], np.abs(TG[t])[jj, :])

    if L.use_phi:
        i_idx = np.arange(nI)
        for t in range(1, T + 1):
            theta = L.theta(t)
            # coupling[j, s, k] = (A^{t-1-s} B)[j, k]
            coupling = np.stack([AB[t - 1 - s] for s in range(t)], axis=1)
            phi_cols = np.stack([L.phi(s) for s in range(t)], axis=0)  # (t, du, nI)
            for sign in (1.0, -1.0):
                ids = rows.new(np.zeros(dx * nI)).reshape(dx, nI)
                rows.add(ids, L.gamma.start + i_idx[None, :], sign * TG[t])
                rows.add(ids, theta, -1.0)
                rows.add(ids[:, None, None, :], phi_cols[None, :, :, :],
                         sign * coupling[:, :, :, None])

    if du:
        ulo, uhi = sys.U.lower, sys.U.upper
        for t in range(T):
            if L.use_phi:
                for sign in (1.0, -1.0):
                    ids = rows.new(np.zeros(du * nI)).reshape(du, nI)
                    rows.add(ids, L.phi(t), sign)
                    rows.add(ids, L.p(t), -1.0)
            bcols = np.arange(L.beta(t).start, L.beta(t).stop)
            for sign, rhs in ((1.0, uhi), (-1.0, -ulo)):
                finite = np.isfinite(rhs)
                kk = np.arange(du)[finite]
                if kk.size == 0:
                    continue
                ids = rows.new(rhs[finite])
                rows.add(ids, bcols[kk], sign)
                if L.use_phi:
                    rows.add(ids[:, None], L.p(t)[kk, :], 1.0)
                if L.nF[t]:
                    cols = np.arange(L.psi(t).start, L.psi(t).stop)
                    rows.add(ids[:, None], cols[None, :], np.abs(F[t])[kk, :])

    n = L.n_vars
    A_ub, b_ub = rows.matrix(n)
    c = np.zeros(n)
    c[L.gamma] = -1.0
    lower = np.full(n, -np.inf)
    upper = np.full(n, np.inf)
    lower[L.gamma] = 0.0
    for t in range(T):
        c[L.psi(t)] = -problem.eta
        lower[L.psi(t)] = 0.0
        if L.use_phi:
            c[L.p(t).ravel()] = problem.phi_penalty
    lower[L._theta0:] = 0.0
    return StandardLP.build(c, A_ub, b_ub, None, None, lower, upper, var_names=L.names())


@dataclass(frozen=True)
class CertReport:
    passed: bool
    max_violation: float
    per_time_violations: List[float]
    per_time_input_violations: List[float] = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "pass": self.passed,
            "max_violation": self.max_violation,
            "per_time_violations": self.per_time_violations,
            "per_time_input_violations": self.per_time_input_violations,
        }


@dataclass(frozen=True, eq=False)
class KernelResult:
    status: str
    mode: KernelMode
    problem: KernelProblem
    alpha: Optional[np.ndarray] = None
    gamma: Optional[np.ndarray] = None
    policy: PolicyParams = field(default_factory=PolicyParams)
    objective_value: float = float("nan")
    cert: Optional[CertReport] = None
    solve_seconds: float = 0.0

    @property
    def optimal(self) -> bool:
        return self.status == OPTIMAL

    @property
    def horizon(self) -> int:
        return self.problem.horizon

    def initial_set(self) -> Zonotope:
        return Zonotope(self.alpha, self.problem.template * self.gamma[None, :])

    def effective_system(self) -> DiscreteAffineSystem:
        """The system the mode actually reasons about (disturbance dropped when unused)."""
        sys = self.problem.system
        if not self.mode.has_disturbance and sys.has_disturbance:
            return sys.without_disturbance()
        return sys

    def reach_sets(self) -> List[Zonotope]:
        pol = self.policy if self.mode.has_input else None
        return reach_sequence(self.effective_system(), self.problem.template, self.alpha,
                              self.gamma, pol, self.horizon)

    def input_set(self, t: int) -> Zonotope:
        """``<beta(t) | [Phi(t), G_F(t) diag(psi(t))]>``."""
        if not self.mode.has_input:
            raise ValueError(f"mode '{self.mode.value}' has no inputs")
        if not 0 <= t < self.horizon:
            raise IndexError(f"time {t} outside 0..{self.horizon - 1}")
        p = self.policy
        GF = p.free_generators[t] * np.asarray(p.psi[t])[None, :]
        return Zonotope(p.beta[t], np.hstack([p.Phi[t], GF]))

    def truncated(self, T: int) -> "KernelResult":
        """The same set and input law restricted to the first ``T`` steps."""
        if not 1 <= T <= self.horizon:
            raise ValueError("truncation horizon out of range")
        prob = replace(self.problem, horizon=T, free_generators=self.problem.free_generators[:T])
        p = self.policy
        pol = PolicyParams(p.beta[:T], p.Phi[:T], p.psi[:T], p.free_generators[:T]) if not p.empty else p
        return replace(self, problem=prob, policy=pol, cert=None)

    def to_json(self) -> dict:
        p = self.policy
        return {
            "status": self.status,
            "mode": self.mode.value,
            "eta": self.problem.eta,
            "T": self.horizon,
            "use_phi": self.problem.use_phi,
            "objective": self.objective_value if self.optimal else None,
            "alpha": self.alpha.tolist() if self.alpha is not None else None,
            "gamma": self.gamma.tolist() if self.gamma is not None else None,
            "beta": [np.asarray(b).tolist() for b in p.beta],
            "Phi": [np.asarray(m).tolist() for m in p.Phi],
            "psi": [np.asarray(s).tolist() for s in p.psi],
            "template": self.problem.template.T.tolist(),
            "free_generators": [np.asarray(f).T.tolist() for f in self.problem.free_generators]
            if self.mode.has_free else [],
        }


def result_from_json(obj, system: DiscreteAffineSystem) -> KernelResult:
    """Rebuild a :class:`KernelResult` against ``system``; raises ``ValueError`` on schema mismatch."""
    if not isinstance(obj, dict):
        with open(obj) as fh:
            obj = json.load(fh)
    try:
        mode = KernelMode(obj["mode"])
        T = int(obj["T"])
        template = np.asarray(obj["template"], dtype=float).T
        status = obj["status"]
    except (KeyError, TypeError) as exc:
        raise ValueError(f"malformed result file: {exc}") from exc
    if template.ndim != 2 or template.shape[0] != system.dx:
        raise ValueError("result template does not match the system state dimension")
    du = system.du
    free = [np.atleast_2d(np.asarray(f, dtype=float)).T if np.size(f) else np.zeros((du, 0))
            for f in obj.get("free_generators", [])]
    if mode.has_free and len(free) != T:
        raise ValueError("free generator list length differs from T")
    if not mode.has_free:
        free = [np.zeros((du, 0)) for _ in range(T)]
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        problem = KernelProblem(system, template, T, free, float(obj.get("eta", 1.0)),
                                bool(obj.get("use_phi", True)))
    if status != OPTIMAL:
        return KernelResult(status, mode, problem)
    alpha = np.asarray(obj["alpha"], dtype=float)
    gamma = np.asarray(obj["gamma"], dtype=float)
    if alpha.shape != (system.dx,) or gamma.shape != (template.shape[1],):
        raise ValueError("alpha/gamma shapes do not match the system and template")
    policy = PolicyParams()
    if mode.has_input:
        beta = [np.asarray(b, dtype=float).reshape(du) for b in obj["beta"]]
        Phi = [np.asarray(m, dtype=float).reshape(du, template.shape[1]) for m in obj["Phi"]]
        psi = [np.asarray(s, dtype=float).reshape(-1) for s in obj["psi"]]
        if not (len(beta) == len(Phi) == len(psi) == T):
            raise ValueError(f"policy sequences must have length T={T}")
        if any(s.size != f.shape[1] for s, f in zip(psi, free)):
            raise ValueError("psi lengths do not match the free generators")
        policy = PolicyParams(beta, Phi, psi, free)
    return KernelResult(status, mode, problem, alpha, gamma, policy, float(obj.get("objective") or 0.0))


def _unpack(problem: KernelProblem, mode: KernelMode, L: ProgramLayout, z: np.ndarray):
    alpha = z[L.alpha].copy()
    gamma = np.maximum(z[L.gamma], 0.0)
    if not mode.has_input:
        return alpha, gamma, PolicyParams()
    beta, Phi, psi, free = [], [], [], []
    for t in range(L.T):
        beta.append(z[L.beta(t)].copy())
        Phi.append(z[L.phi(t)].copy() if L.use_phi else np.zeros((L.du, L.nI)))
        psi.append(np.maximum(z[L.psi(t)], 0.0))
        free.append(problem.free_generators[t] if mode.has_free else np.zeros((L.du, 0)))
    return alpha, gamma, PolicyParams(beta, Phi, psi, free)


def solve_kernel(problem: KernelProblem, mode, time_limit: Optional[float] = None) -> KernelResult:
    """Assemble and solve, then certify the optimum. Infeasibility is a normal outcome ("no set found")."""
    mode = KernelMode(mode)
    lp = assemble_program(problem, mode)
    L = _layout(problem, mode)
    t0 = time.perf_counter()
    sol = solve_lp(lp, time_limit=time_limit)
    elapsed = time.perf_counter() - t0
    log.info("kernel LP (%s): %d vars, %d rows, %s in %.2fs", mode.value, lp.n_vars,
             lp.b_ub.size, sol.status, elapsed)
    if sol.status == INFEASIBLE:
        return KernelResult(INFEASIBLE, mode, problem, solve_seconds=elapsed)
    if sol.status == UNBOUNDED:
        raise KernelError("kernel program is unbounded; are the constraint boxes bounded?")
    alpha, gamma, policy = _unpack(problem, mode, L, sol.z)
    objective = float(gamma.sum() + problem.eta * sum(float(np.sum(s)) for s in policy.psi))
    res = KernelResult(OPTIMAL, mode, problem, alpha, gamma, policy, objective, None, elapsed)
    report = certify(problem, res)
    if not report.passed:
        log.warning("optimal kernel failed certification (violation %.3e)", report.max_violation)
    return replace(res, cert=report)


def certify(problem: KernelProblem, result: KernelResult) -> CertReport:
    """Re-check every containment condition from scratch (reach sets and input sets)."""
    if not result.optimal:
        raise ValueError("only optimal results can be certified")
    res = result if result.problem is problem else replace(result, problem=problem)
    sys = res.effective_system()
    neg = max(0.0, float(-np.min(res.gamma, initial=0.0)))
    for s in res.policy.psi:
        neg = max(neg, float(-np.min(s, initial=0.0)))
    per_t = [box_violation(R, sys.X) for R in res.reach_sets()]
    per_u = []
    if res.mode.has_input:
        per_u = [box_violation(res.input_set(t), sys.U) for t in range(res.horizon)]
    worst = max([neg] + per_t + per_u)
    return CertReport(bool(worst <= CERT_TOL), float(worst), [float(v) for v in per_t],
                      [float(v) for v in per_u])


def prune(result: KernelResult, threshold: float) -> KernelResult:
    """Drop template generators whose scaling is below ``threshold`` and re-certify.

    If the pruned result fails certification the original is returned
    unchanged (with a warning).
    """
    if not result.optimal:
        raise ValueError("only optimal results can be pruned")
    if threshold < 0:
        raise ValueError("threshold must be nonnegative")
    keep = result.gamma >= threshold
    if not np.any(keep):
        raise ValueError("pruning would remove every template generator")
    if np.all(keep):
        return result
    prob = replace(result.problem, template=result.problem.template[:, keep])
    p = result.policy
    pol = p if p.empty else PolicyParams(p.beta, [np.asarray(m)[:, keep] for m in p.Phi], p.psi,
                                         p.free_generators)
    pruned = replace(result, problem=prob, gamma=result.gamma[keep], policy=pol, cert=None)
    pruned = replace(pruned, objective_value=float(pruned.gamma.sum()
                                                   + prob.eta * sum(float(np.sum(s)) for s in pol.psi)))
    report = certify(prob, pruned)
    if not report.passed:
        warnings.warn(f"pruned result failed certification ({report.max_violation:.3e}); keeping original")
        return result
    return replace(pruned, cert=report)
