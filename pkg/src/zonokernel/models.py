"""Built-in example systems and template-generator recipes."""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import Dict, Sequence, Tuple

import numpy as np

from .dynamics import ContinuousAffineSystem, DiscreteAffineSystem, discretize
from .zonotope import IntervalBox, Zonotope


def rotation_system(disturbance: bool = False, dt: float = 0.2) -> DiscreteAffineSystem:
    """Planar rotation ``dx/dt = [[0, -1], [1, 0]] x`` sampled at ``dt``, ``X = [-1, 1]^2``.

    With ``disturbance=True`` an additive ``v`` in ``0.05 * [-1, 1]^2`` enters
    through the identity.
    """
    C = np.eye(2) if disturbance else None
    V = Zonotope(np.zeros(2), 0.05 * np.eye(2)) if disturbance else None
    csys = ContinuousAffineSystem(np.array([[0.0, -1.0], [1.0, 0.0]]), None, C, None, dt,
                                  IntervalBox(-np.ones(2), np.ones(2)), None, V)
    return discretize(csys)


def double_integrator_continuous(dt: float = 0.1) -> ContinuousAffineSystem:
    return ContinuousAffineSystem(np.array([[0.0, 1.0], [0.0, 0.0]]), np.array([[0.0], [1.0]]),
                                  None, None, dt, IntervalBox(-np.ones(2), np.ones(2)),
                                  IntervalBox([-1.0], [1.0]))


def double_integrator_system(dt: float = 0.1) -> DiscreteAffineSystem:
    """Double integrator at ``dt = 0.1`` with ``X = [-1, 1]^2`` and ``U = [-1, 1]``."""
    return discretize(double_integrator_continuous(dt))


@dataclass(frozen=True)
class QuadrotorParams:
    """Planar quadrotor constants; ``u1_bar`` defaults to the hover thrust ``g / K``."""

    K: float = 0.89 / 1.4
    d0: float = 70.0
    d1: float = 17.0
    n0: float = 55.0
    g: float = 9.81
    x5_bar: float = 0.0
    u1_bar: float = None

    def __post_init__(self):
        if not (self.K > 0 and self.n0 > 0 and self.g > 0):
            raise ValueError("K, n0 and g must be positive")
        if self.u1_bar is None:
            object.__setattr__(self, "u1_bar", self.g / self.K)


QUAD_X_LO = np.array([-1.7, 0.3, -0.8, -1.0, -np.pi / 12, -np.pi / 2])
QUAD_X_HI = np.array([1.7, 2.0, 0.8, 1.0, np.pi / 12, np.pi / 2])
QUAD_U1_SPAN = 1.5
QUAD_U2_SPAN = np.pi / 12


def quadrotor_nonlinear_rhs(x, u, p: QuadrotorParams = QuadrotorParams()) -> np.ndarray:
    """Right-hand side of the longitudinal model; ``u = (thrust, desired roll)`` in absolute units."""
    x = np.asarray(x, dtype=float)
    u1, u2 = u
    return np.array([
        x[2],
        x[3],
        u1 * p.K * np.sin(x[4]),
        -p.g + u1 * p.K * np.cos(x[4]),
        x[5],
        -p.d0 * x[4] - p.d1 * x[5] + p.n0 * u2,
    ])


def quadrotor_linearized(p: QuadrotorParams = QuadrotorParams()) -> ContinuousAffineSystem:
    """Linearization about roll ``x5_bar`` and thrust ``u1_bar``.

    The first input is the thrust *deviation* ``u1 - u1_bar`` (the drift term
    already carries ``K u1_bar``); the second is the desired roll. The
    linearization error enters rows 3 and 4 (``x3``, ``x4``) through ``C``.
    """
    c5, s5 = np.cos(p.x5_bar), np.sin(p.x5_bar)
    Ku = p.K * p.u1_bar
    A = np.zeros((6, 6))
    A[0, 2] = 1.0
    A[1, 3] = 1.0
    A[2, 4] = Ku * c5
    A[3, 4] = -Ku * s5
    A[4, 5] = 1.0
    A[5, 4] = -p.d0
    A[5, 5] = -p.d1
    B = np.zeros((6, 2))
    B[2, 0] = p.K * s5
    B[3, 0] = p.K * c5
    B[5, 1] = p.n0
    C = np.zeros((6, 2))
    C[2, 0] = 1.0
    C[3, 1] = 1.0
    # f(x_bar, u_bar) - A x_bar; equals (0, 0, 0, K u1_bar - g, 0, 0) at x5_bar = 0
    w = np.array([0.0, 0.0, Ku * s5 - Ku * c5 * p.x5_bar, Ku * c5 - p.g + Ku * s5 * p.x5_bar, 0.0, 0.0])
    X = IntervalBox(QUAD_X_LO, QUAD_X_HI)
    U = IntervalBox([-QUAD_U1_SPAN, -QUAD_U2_SPAN + p.x5_bar], [QUAD_U1_SPAN, QUAD_U2_SPAN + p.x5_bar])
    return ContinuousAffineSystem(A, B, C, w, 0.05, X, U)


def quadrotor_errors(p: QuadrotorParams, x5, u1) -> Tuple[np.ndarray, np.ndarray]:
    """Nonlinear minus linearized ``dx3/dt`` and ``dx4/dt`` (depend only on ``x5`` and absolute ``u1``)."""
    x5 = np.asarray(x5, dtype=float)
    u1 = np.asarray(u1, dtype=float)
    lin = quadrotor_linearized(p)
    du1 = u1 - p.u1_bar
    lin3 = lin.A[2, 4] * x5 + lin.B[2, 0] * du1 + lin.w[2]
    lin4 = lin.A[3, 4] * x5 + lin.B[3, 0] * du1 + lin.w[3]
    e3 = u1 * p.K * np.sin(x5) - lin3
    e4 = -p.g + u1 * p.K * np.cos(x5) - lin4
    return e3, e4


def quadrotor_error_bounds(p: QuadrotorParams = QuadrotorParams(), x5_range=None, u1_range=None,
                           grid_n: int = 401, dilation: float = 0.1) -> Dict[str, object]:
    """Grid-maximized linearization error intervals and the dilated disturbance rectangle.

    Returns a dict with ``"x3"`` and ``"x4"`` intervals (``(lo, hi)``) and
    ``"V"``, the error rectangle scaled about its center by ``1 + dilation``
    as a two-generator zonotope. Grid maximization is not a rigorous bound.
    """
    if x5_range is None:
        x5_range = (-np.pi / 12, np.pi / 12)
    if u1_range is None:
        u1_range = (p.u1_bar - QUAD_U1_SPAN, p.u1_bar + QUAD_U1_SPAN)
    if grid_n < 2:
        raise ValueError("grid_n must be at least 2")
    if x5_range[0] > x5_range[1] or u1_range[0] > u1_range[1]:
        raise ValueError("empty range")
    X5, U1 = np.meshgrid(np.linspace(*x5_range, grid_n), np.linspace(*u1_range, grid_n))
    e3, e4 = quadrotor_errors(p, X5, U1)
    lo = np.array([e3.min(), e4.min()])
    hi = np.array([e3.max(), e4.max()])
    center = 0.5 * (lo + hi)
    half = 0.5 * (hi - lo) * (1.0 + dilation)
    return {"x3": (float(lo[0]), float(hi[0])), "x4": (float(lo[1]), float(hi[1])),
            "V": Zonotope(center, np.diag(half))}


def quadrotor_system(p: QuadrotorParams = QuadrotorParams(), dt: float = 0.05,
                     grid_n: int = 401) -> DiscreteAffineSystem:
    """Discrete linearized quadrotor with the dilated linearization-error disturbance set."""
    csys = quadrotor_linearized(p)
    V = quadrotor_error_bounds(p, grid_n=grid_n)["V"]
    csys = ContinuousAffineSystem(csys.A, csys.B, csys.C, csys.w, dt, csys.X, csys.U, V)
    return discretize(csys)


# ---------------------------------------------------------------------------
# template generators

def _unit_columns(G: np.ndarray) -> np.ndarray:
    return G / np.linalg.norm(G, axis=0)[None, :]


def axes(d: int) -> np.ndarray:
    return np.eye(d)


def half_circle_fan(k: int) -> np.ndarray:
    """``k`` planar unit vectors at angles ``j * pi / k``."""
    ang = np.pi * np.arange(k) / k
    return np.vstack([np.cos(ang), np.sin(ang)])


def quadrant_fan(k: int) -> np.ndarray:
    """``k`` planar unit vectors in the north-west quadrant, starting at ``(0, 1)``."""
    ang = np.pi / 2 + np.pi * np.arange(k) / (2 * k)
    return np.vstack([np.cos(ang), np.sin(ang)])


def _pair(d: int, dims: Tuple[int, int]) -> Tuple[int, int]:
    a, b = int(dims[0]), int(dims[1])
    if a == b or not (0 <= a < d and 0 <= b < d):
        raise ValueError(f"invalid coordinate pair {dims} for dimension {d}")
    return a, b


def pair_fan(d: int, dims: Tuple[int, int], k: int) -> np.ndarray:
    """North-west fan strictly between the axes of coordinates ``dims`` (first = horizontal)."""
    a, b = _pair(d, dims)
    if k < 1:
        raise ValueError("fan size must be positive")
    ang = np.pi / 2 + np.pi * np.arange(1, k + 1) / (2 * (k + 1))
    G = np.zeros((d, k))
    G[a] = np.cos(ang)
    G[b] = np.sin(ang)
    return G


def diagonal_pair(d: int, dims: Tuple[int, int]) -> np.ndarray:
    a, b = _pair(d, dims)
    G = np.zeros((d, 2))
    G[a] = [1.0, -1.0]
    G[b] = [1.0, 1.0]
    return G / np.sqrt(2.0)


def random_unit(d: int, n: int, seed: int = 0) -> np.ndarray:
    G = np.random.default_rng(seed).standard_normal((d, n))
    return _unit_columns(G)


#: Coordinate pairs of the quadrotor that behave like double integrators.
QUAD_FAN_PAIRS = ((0, 2), (1, 3), (2, 4), (4, 5))


def quadrotor_basis(fan_size: int = 5) -> np.ndarray:
    """Axes, fans on the double-integrator-like pairs, diagonals elsewhere (48 columns)."""
    blocks = [axes(6)]
    for pair in combinations(range(6), 2):
        if pair in QUAD_FAN_PAIRS:
            blocks.append(pair_fan(6, pair, fan_size))
        else:
            blocks.append(diagonal_pair(6, pair))
    return np.hstack(blocks)


def generator_basis(spec) -> np.ndarray:
    """Build a template from a spec string such as ``"half_circle_fan:9"``.

    Recognized forms: ``axes:d``, ``half_circle_fan:k``, ``quadrant_fan:k``,
    ``pair_fan:d:a:b:k``, ``diagonal_pair:d:a:b``, ``random_unit:d:n[:seed]``,
    ``quadrotor`` and ``+``-joined combinations of these.
    """
    if not isinstance(spec, str):
        raise ValueError(f"invalid generator spec {spec!r}")
    parts = [p.strip() for p in spec.split("+")]
    if len(parts) > 1:
        return np.hstack([generator_basis(p) for p in parts])
    name, *args = spec.split(":")
    try:
        ints = [int(a) for a in args]
        if name == "axes" and len(ints) == 1:
            G = axes(*ints)
        elif name == "half_circle_fan" and len(ints) == 1:
            G = half_circle_fan(*ints)
        elif name == "quadrant_fan" and len(ints) == 1:
            G = quadrant_fan(*ints)
        elif name == "pair_fan" and len(ints) == 4:
            G = pair_fan(ints[0], (ints[1], ints[2]), ints[3])
        elif name == "diagonal_pair" and len(ints) == 3:
            G = diagonal_pair(ints[0], (ints[1], ints[2]))
        elif name == "random_unit" and len(ints) in (2, 3):
            G = random_unit(*ints)
        elif name == "quadrotor" and not ints:
            G = quadrotor_basis()
        else:
            raise ValueError
    except (ValueError, IndexError):
        raise ValueError(f"invalid generator spec {spec!r}") from None
    if G.shape[1] == 0 or G.shape[0] == 0:
        raise ValueError(f"generator spec {spec!r} produced no generators")
    return G
