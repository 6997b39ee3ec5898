"""Certified feedback inputs from a kernel result, with closed-loop rollouts and their checks."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence, Union

import numpy as np
import scipy.sparse as sp

from .dynamics import DiscreteAffineSystem, step
from .kernel import KernelResult
from .lp import StandardLP, solve_lp
from .tolerances import FEAS_TOL, SIM_TOL
from .zonotope import IntervalBox, Zonotope, lambda_of


class LeftTubeError(ValueError):
    """The state is not in the certified reach set at this time."""


def input_zonotope(result: KernelResult, t: int) -> Zonotope:
    """Viable input set at step ``t``."""
    if not result.optimal:
        raise ValueError("result has no input law")
    return result.input_set(t)


def select_input(result: KernelResult, reach_t: Zonotope, x, t: int, u_des=None) -> np.ndarray:
    """Certified input at state ``x`` and step ``t``, as close to ``u_des`` as possible.

    The input is ``beta(t) + Phi(t) lam_I + G_F(t) diag(psi(t)) rho``, where
    ``lam`` reconstructs ``x`` in ``reach_t`` (only its leading template block
    couples to the input) and ``rho`` is free in ``[-1, 1]``. Both are picked
    by one LP minimizing ``||u - u_des||_inf``.

    Raises:
        LeftTubeError: if ``x`` is not in ``reach_t``.
    """
    p = result.policy
    x = np.asarray(x, dtype=float).reshape(-1)
    beta = np.asarray(p.beta[t], dtype=float)
    Phi = np.asarray(p.Phi[t], dtype=float)
    GF = np.asarray(p.free_generators[t]) * np.asarray(p.psi[t])[None, :]
    du, nI = Phi.shape
    n, nf = reach_t.n_generators, GF.shape[1]
    if n < nI:
        raise ValueError("reach set has fewer generators than the template")
    u_des = beta if u_des is None else np.asarray(u_des, dtype=float).reshape(du)

    # variables [lam (n), rho (nf), s]
    nv = n + nf + 1
    c = np.zeros(nv)
    c[-1] = 1.0
    # u - u_des = Phi lam_I + GF rho + (beta - u_des)
    M = sp.hstack([sp.csr_matrix(Phi), sp.csr_matrix((du, n - nI)), sp.csr_matrix(GF),
                   sp.csr_matrix((du, 1))], format="csr")
    s_col = sp.csr_matrix((np.ones(du), (np.arange(du), np.full(du, nv - 1))), shape=(du, nv))
    A_ub = sp.vstack([M - s_col, -M - s_col], format="csr")
    off = beta - u_des
    b_ub = np.concatenate([-off, off])
    A_eq = sp.hstack([sp.csr_matrix(reach_t.generators), sp.csr_matrix((x.size, nf + 1))], format="csr")
    b_eq = x - reach_t.center
    lower = np.concatenate([-np.ones(n + nf), [0.0]])
    upper = np.concatenate([np.ones(n + nf), [np.inf]])
    sol = solve_lp(StandardLP.build(c, A_ub, b_ub, A_eq, b_eq, lower, upper))
    if not sol.optimal:
        raise LeftTubeError(f"state is outside the certified reach set at t={t}")
    lam = np.clip(sol.z[:n], -1.0, 1.0)
    rho = np.clip(sol.z[n:n + nf], -1.0, 1.0)
    if np.max(np.abs(reach_t.center + reach_t.generators @ lam - x), initial=0.0) > 1e3 * FEAS_TOL:
        raise LeftTubeError(f"state is outside the certified reach set at t={t}")
    return beta + Phi @ lam[:nI] + GF @ rho


@dataclass
class Trajectory:
    states: np.ndarray
    inputs: np.ndarray
    disturbances: np.ndarray
    in_X: List[bool] = field(default_factory=list)
    in_U: List[bool] = field(default_factory=list)

    @property
    def length(self) -> int:
        return self.inputs.shape[0]

    def to_csv(self) -> str:
        dx, du, dv = self.states.shape[1], self.inputs.shape[1], self.disturbances.shape[1]
        buf = io.StringIO()
        wr = csv.writer(buf, lineterminator="\n")
        wr.writerow(["t"] + [f"x{i + 1}" for i in range(dx)] + [f"u{i + 1}" for i in range(du)]
                    + [f"v{i + 1}" for i in range(dv)] + ["in_X", "in_U"])
        for t in range(self.states.shape[0]):
            last = t == self.length
            u = [""] * du if last else [repr(float(a)) for a in self.inputs[t]]
            v = [""] * dv if last else [repr(float(a)) for a in self.disturbances[t]]
            in_x = int(self.in_X[t]) if self.in_X else ""
            in_u = "" if last or not self.in_U else int(self.in_U[t])
            wr.writerow([t] + [repr(float(a)) for a in self.states[t]] + u + v + [in_x, in_u])
        return buf.getvalue()


DisturbanceSource = Union[str, Callable[[int, np.random.Generator], np.ndarray]]


def _disturbance(sys: DiscreteAffineSystem, source: DisturbanceSource, t: int,
                 rng: np.random.Generator) -> np.ndarray:
    if sys.V is None or source == "none":
        return np.zeros(sys.dv) if sys.V is None else sys.V.center.copy()
    if callable(source):
        return np.asarray(source(t, rng), dtype=float)
    nv = sys.V.n_generators
    if source == "random":
        mu = rng.uniform(-1.0, 1.0, nv)
    elif source == "corner":
        mu = rng.choice([-1.0, 1.0], nv)
    else:
        raise ValueError(f"unknown disturbance source {source!r}")
    return sys.V.center + sys.V.generators @ mu


def simulate(sys: DiscreteAffineSystem, result: KernelResult, x0, u_des=None,
             disturbance: DisturbanceSource = "none", T: Optional[int] = None,
             rng: Optional[np.random.Generator] = None) -> Trajectory:
    """Closed-loop rollout under the certified input law.

    ``u_des`` is ``None`` (track ``beta``), a constant vector, a ``(T, du)``
    array, or a callable ``u_des(t, x)``. ``disturbance`` is ``"none"``
    (center of ``V``), ``"random"`` (uniform coefficients), ``"corner"``
    (coefficients in ``{-1, 1}``) or a callable ``(t, rng) -> v``.
    """
    rng = np.random.default_rng(0) if rng is None else rng
    T = result.horizon if T is None else int(T)
    if T > result.horizon:
        raise ValueError("simulation horizon exceeds the certified horizon")
    x0 = np.asarray(x0, dtype=float).reshape(-1)
    if lambda_of(x0, result.initial_set()) is None:
        raise ValueError("initial state is outside the computed set")
    reach = result.reach_sets()
    has_input = result.mode.has_input
    du = sys.du if has_input else 0
    xs, us, vs = [x0], [], []
    for t in range(T):
        x = xs[-1]
        if has_input:
            if callable(u_des):
                target = u_des(t, x)
            elif u_des is None:
                target = None
            else:
                ud = np.asarray(u_des, dtype=float)
                target = ud[t] if ud.ndim == 2 else ud
            u = select_input(result, reach[t], x, t, target)
        else:
            u = np.zeros(sys.du)
        v = _disturbance(sys, disturbance if result.mode.has_disturbance else "none", t, rng)
        us.append(u)
        vs.append(v)
        xs.append(step(sys, x, u, v))
    traj = Trajectory(np.array(xs).reshape(T + 1, sys.dx), np.array(us).reshape(T, sys.du),
                      np.array(vs).reshape(T, sys.dv))
    rep = validate(traj, sys.X, sys.U if du else None)
    traj.in_X, traj.in_U = rep.in_X, rep.in_U
    return traj


@dataclass
class ValidationReport:
    passed: bool
    in_X: List[bool]
    in_U: List[bool]
    state_margins: List[float]
    input_margins: List[float]
    first_violation: Optional[int] = None

    @property
    def worst_state_margin(self) -> float:
        return min(self.state_margins, default=np.inf)

    @property
    def worst_input_margin(self) -> float:
        return min(self.input_margins, default=np.inf)


def _margin(x: np.ndarray, box: IntervalBox) -> float:
    return float(min(np.min(x - box.lower), np.min(box.upper - x)))


def validate(traj: Trajectory, X: IntervalBox, U: Optional[IntervalBox] = None,
             tol: float = SIM_TOL) -> ValidationReport:
    """Per-step containment of states in ``X`` and inputs in ``U`` (margins are signed)."""
    sm = [_margin(x, X) for x in traj.states]
    im = [_margin(u, U) for u in traj.inputs] if U is not None and traj.inputs.shape[1] else []
    in_x = [m >= -tol for m in sm]
    in_u = [m >= -tol for m in im] if im else [True] * traj.inputs.shape[0]
    bad = [t for t in range(len(in_x)) if not in_x[t] or (t < len(in_u) and not in_u[t])]
    return ValidationReport(not bad, in_x, in_u, sm, im, bad[0] if bad else None)
