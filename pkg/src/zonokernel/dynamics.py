"""Discrete-time affine systems ``x+ = A x + B u + C v + w`` and their reach sets."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import List, Optional, Sequence

import numpy as np
from scipy.linalg import expm

from .zonotope import IntervalBox, Zonotope


def _mat(M, rows: int) -> np.ndarray:
    if M is None:
        return np.zeros((rows, 0))
    M = np.asarray(M, dtype=float)
    if M.size == 0:
        return np.zeros((rows, 0))
    return np.atleast_2d(M)


def _vec(v, n: int) -> np.ndarray:
    if v is None:
        return np.zeros(n)
    return np.asarray(v, dtype=float).reshape(-1)


@dataclass(frozen=True, eq=False)
class DiscreteAffineSystem:
    """Dynamics matrices plus the state box ``X``, input box ``U`` and disturbance set ``V``.

    ``B`` and ``C`` may have zero columns; ``U`` is ``None`` when there are no
    inputs and ``V`` is ``None`` when there is no disturbance.
    """

    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    w: np.ndarray
    X: IntervalBox
    U: Optional[IntervalBox] = None
    V: Optional[Zonotope] = None

    def __post_init__(self):
        A = np.atleast_2d(np.asarray(self.A, dtype=float))
        dx = A.shape[0]
        if A.shape != (dx, dx):
            raise ValueError(f"A must be square, got {A.shape}")
        B, C, w = _mat(self.B, dx), _mat(self.C, dx), _vec(self.w, dx)
        if B.shape[0] != dx or C.shape[0] != dx or w.size != dx:
            raise ValueError("B, C and w must have one row per state")
        for name, M in (("A", A), ("B", B), ("C", C), ("w", w)):
            if not np.all(np.isfinite(M)):
                raise ValueError(f"{name} has non-finite entries")
        if self.X.dim != dx:
            raise ValueError("state box dimension mismatch")
        du, dv = B.shape[1], C.shape[1]
        U = self.U
        if du and (U is None or U.dim != du):
            raise ValueError("input box must match the input dimension")
        if not du:
            U = None
        V = self.V
        if dv and (V is None or V.dim != dv):
            raise ValueError("disturbance zonotope must match the disturbance dimension")
        if not dv and V is not None and V.dim != 0:
            raise ValueError("disturbance set given without a disturbance matrix")
        if not dv:
            V = None
        for name, val in (("A", A), ("B", B), ("C", C), ("w", w), ("U", U), ("V", V)):
            if isinstance(val, np.ndarray):
                val = val.copy()
                val.setflags(write=False)
            object.__setattr__(self, name, val)

    @property
    def dx(self) -> int:
        return self.A.shape[0]

    @property
    def du(self) -> int:
        return self.B.shape[1]

    @property
    def dv(self) -> int:
        return self.C.shape[1]

    @property
    def has_disturbance(self) -> bool:
        return self.V is not None

    def without_disturbance(self) -> "DiscreteAffineSystem":
        return DiscreteAffineSystem(self.A, self.B, np.zeros((self.dx, 0)), self.w, self.X, self.U, None)

    def with_disturbance(self, C, V: Zonotope) -> "DiscreteAffineSystem":
        return DiscreteAffineSystem(self.A, self.B, C, self.w, self.X, self.U, V)

    def to_json(self) -> dict:
        obj = {
            "A": self.A.tolist(),
            "B": self.B.tolist(),
            "C": self.C.tolist(),
            "w": self.w.tolist(),
            "x_lo": self.X.lower.tolist(),
            "x_hi": self.X.upper.tolist(),
            "u_lo": self.U.lower.tolist() if self.U is not None else [],
            "u_hi": self.U.upper.tolist() if self.U is not None else [],
            "continuous": False,
        }
        if self.V is not None:
            obj["V"] = self.V.to_json()
        return obj


@dataclass(frozen=True, eq=False)
class ContinuousAffineSystem:
    """``dx/dt = A x + B u + C v + w`` with constraint sets and a sampling period ``dt``."""

    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    w: np.ndarray
    dt: float
    X: Optional[IntervalBox] = None
    U: Optional[IntervalBox] = None
    V: Optional[Zonotope] = None

    def __post_init__(self):
        if not (np.isfinite(self.dt) and self.dt > 0):
            raise ValueError("time step must be positive")
        A = np.atleast_2d(np.asarray(self.A, dtype=float))
        dx = A.shape[0]
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "B", _mat(self.B, dx))
        object.__setattr__(self, "C", _mat(self.C, dx))
        object.__setattr__(self, "w", _vec(self.w, dx))


def discretize(csys: ContinuousAffineSystem, X: Optional[IntervalBox] = None) -> DiscreteAffineSystem:
    """Zero-order-hold discretization through one exponential of an augmented matrix.

    ``expm([[A, M], [0, 0]] dt) = [[e^{A dt}, (int_0^dt e^{As} ds) M], [0, I]]`` with
    ``M = [B C w]`` yields every discrete matrix at once.
    """
    A, B, C, w = csys.A, csys.B, csys.C, csys.w
    for name, M in (("A", A), ("B", B), ("C", C), ("w", w)):
        if not np.all(np.isfinite(M)):
            raise ValueError(f"continuous {name} has non-finite entries")
    dx, du, dv = A.shape[0], B.shape[1], C.shape[1]
    M = np.hstack([B, C, w.reshape(-1, 1)])
    k = M.shape[1]
    aug = np.zeros((dx + k, dx + k))
    aug[:dx, :dx] = A
    aug[:dx, dx:] = M
    E = expm(aug * csys.dt)
    Ad = E[:dx, :dx]
    Md = E[:dx, dx:]
    X = X if X is not None else csys.X
    if X is None:
        X = IntervalBox(np.full(dx, -np.inf), np.full(dx, np.inf))
    return DiscreteAffineSystem(Ad, Md[:, :du], Md[:, du:du + dv], Md[:, -1], X, csys.U, csys.V)


def step(sys: DiscreteAffineSystem, x, u=None, v=None) -> np.ndarray:
    x = np.asarray(x, dtype=float).reshape(-1)
    u = np.zeros(0) if u is None else np.asarray(u, dtype=float).reshape(-1)
    v = np.zeros(0) if v is None else np.asarray(v, dtype=float).reshape(-1)
    if x.size != sys.dx or u.size != sys.du or v.size != sys.dv:
        raise ValueError("state/input/disturbance dimension mismatch")
    return sys.A @ x + sys.B @ u + sys.C @ v + sys.w


@dataclass(frozen=True, eq=False)
class PolicyParams:
    """Per-step input parameters: center ``beta``, state coupling ``Phi``, free scaling ``psi``.

    Lists are indexed by time ``t = 0..T-1``. ``free_generators[t]`` is the
    fixed ``du x nF`` matrix whose columns ``psi[t]`` scales.
    """

    beta: List[np.ndarray] = field(default_factory=list)
    Phi: List[np.ndarray] = field(default_factory=list)
    psi: List[np.ndarray] = field(default_factory=list)
    free_generators: List[np.ndarray] = field(default_factory=list)

    def __post_init__(self):
        T = len(self.beta)
        if not (len(self.Phi) == len(self.psi) == len(self.free_generators) == T):
            raise ValueError("policy sequences must all have length T")
        for t in range(T):
            if np.any(np.asarray(self.psi[t]) < 0):
                raise ValueError(f"psi({t}) has negative entries")

    @property
    def horizon(self) -> int:
        return len(self.beta)

    @property
    def empty(self) -> bool:
        return not self.beta


def matrix_powers(A: np.ndarray, T: int) -> List[np.ndarray]:
    """``[A^0, A^1, ..., A^T]`` computed incrementally."""
    P = [np.eye(A.shape[0])]
    for _ in range(T):
        P.append(A @ P[-1])
    return P


def reach_sequence(sys: DiscreteAffineSystem, template, alpha, gamma,
                   policy: Optional[PolicyParams], T: int) -> List[Zonotope]:
    """Reach sets ``R_0 .. R_T`` of the scaled template under the parameterized input law.

    Generator blocks are ordered ``[template | free-input F_0..F_{t-1} |
    disturbance, oldest first]``; the input policy is ignored when ``None`` or
    empty, in which case ``B`` plays no role.
    """
    template = np.atleast_2d(np.asarray(template, dtype=float))
    alpha = np.asarray(alpha, dtype=float).reshape(-1)
    gamma = np.asarray(gamma, dtype=float).reshape(-1)
    if template.shape[0] != sys.dx or alpha.size != sys.dx or gamma.size != template.shape[1]:
        raise ValueError("template, alpha and gamma dimensions must match the system")
    if np.any(gamma < 0):
        raise ValueError("generator scalings must be nonnegative")
    use_input = policy is not None and not policy.empty
    if use_input and policy.horizon < T:
        raise ValueError("policy horizon shorter than requested reach horizon")
    if use_input and sys.du == 0:
        raise ValueError("policy given for a system without inputs")

    A, B, C, w = sys.A, sys.B, sys.C, sys.w
    drift = w + (C @ sys.V.center if sys.V is not None else 0.0)
    VG = C @ sys.V.generators if sys.V is not None else np.zeros((sys.dx, 0))

    center = alpha.copy()
    lead = template * gamma[None, :]
    free_blocks: List[np.ndarray] = []
    dist_blocks: List[np.ndarray] = []
    out = [Zonotope(center, lead)]
    for s in range(T):
        center = A @ center + drift
        lead = A @ lead
        free_blocks = [A @ F for F in free_blocks]
        dist_blocks = [A @ D for D in dist_blocks]
        if use_input:
            center = center + B @ policy.beta[s]
            lead = lead + B @ np.asarray(policy.Phi[s], dtype=float)
            GF = np.asarray(policy.free_generators[s], dtype=float).reshape(sys.du, -1)
            free_blocks.append(B @ (GF * np.asarray(policy.psi[s], dtype=float)[None, :]))
        if sys.V is not None:
            dist_blocks.append(VG)
        out.append(Zonotope(center, np.hstack([lead, *free_blocks, *dist_blocks])))
    return out


def load_system(obj) -> DiscreteAffineSystem:
    """Build a system from the JSON schema (a dict, or a path to a JSON file).

    Continuous systems (``"continuous": true``) are discretized at ``"dt"``.
    """
    if not isinstance(obj, dict):
        with open(obj) as fh:
            obj = json.load(fh)
    A = np.atleast_2d(np.asarray(obj["A"], dtype=float))
    dx = A.shape[0]
    B = _mat(obj.get("B"), dx)
    C = _mat(obj.get("C"), dx)
    w = _vec(obj.get("w"), dx)
    X = IntervalBox(obj["x_lo"], obj["x_hi"])
    U = IntervalBox(obj["u_lo"], obj["u_hi"]) if B.shape[1] else None
    Vobj = obj.get("V")
    if isinstance(Vobj, list):
        raise ValueError("time-varying disturbance sets are not supported")
    V = Zonotope.from_json(Vobj) if Vobj else None
    if obj.get("continuous", False):
        if "dt" not in obj:
            raise ValueError("continuous system requires dt")
        return discretize(ContinuousAffineSystem(A, B, C, w, float(obj["dt"]), X, U, V))
    return DiscreteAffineSystem(A, B, C, w, X, U, V)
