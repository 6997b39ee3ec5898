"""Zonotopes in generator representation and axis-aligned boxes.

A zonotope ``<c | G>`` is the set ``{c + G @ lam : -1 <= lam <= 1}`` where
column ``i`` of ``G`` is the i-th generator. Everything here is a pure
function of immutable values.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np
import scipy.sparse as sp

from .lp import StandardLP, solve_lp
from .tolerances import FEAS_TOL, GEOM_TOL


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class Zonotope:
    """Center ``c`` (shape ``(d,)``) and generator matrix ``G`` (shape ``(d, n)``)."""

    center: np.ndarray
    generators: np.ndarray

    def __init__(self, center, generators=None):
        c = np.asarray(center, dtype=float).reshape(-1)
        if generators is None:
            G = np.zeros((c.size, 0))
        else:
            G = np.asarray(generators, dtype=float)
            if G.ndim == 1:
                G = G.reshape(c.size, -1) if G.size else np.zeros((c.size, 0))
        if G.ndim != 2 or G.shape[0] != c.size:
            raise ValueError(f"generator matrix shape {G.shape} does not match center dimension {c.size}")
        if not (np.all(np.isfinite(c)) and np.all(np.isfinite(G))):
            raise ValueError("zonotope entries must be finite")
        object.__setattr__(self, "center", _frozen(c))
        object.__setattr__(self, "generators", _frozen(G))

    @property
    def dim(self) -> int:
        return self.center.size

    @property
    def n_generators(self) -> int:
        return self.generators.shape[1]

    def radius(self) -> np.ndarray:
        """Per-coordinate half-width ``|G| @ 1``."""
        return np.abs(self.generators).sum(axis=1)

    def to_json(self) -> dict:
        return {"center": self.center.tolist(), "generators": self.generators.T.tolist()}

    @classmethod
    def from_json(cls, obj: dict) -> "Zonotope":
        c = np.asarray(obj["center"], dtype=float)
        gens = obj.get("generators", [])
        G = np.asarray(gens, dtype=float).T if len(gens) else np.zeros((c.size, 0))
        return cls(c, G)

    def __repr__(self) -> str:
        return f"Zonotope(dim={self.dim}, n_generators={self.n_generators})"


@dataclass(frozen=True, eq=False)
class IntervalBox:
    """Elementwise bounds ``lower <= x <= upper``."""

    lower: np.ndarray
    upper: np.ndarray

    def __init__(self, lower, upper):
        lo = np.asarray(lower, dtype=float).reshape(-1)
        hi = np.asarray(upper, dtype=float).reshape(-1)
        if lo.shape != hi.shape:
            raise ValueError("box bounds must have equal length")
        if np.any(np.isnan(lo)) or np.any(np.isnan(hi)):
            raise ValueError("box bounds must not be NaN")
        if np.any(lo > hi):
            raise ValueError("box lower bound exceeds upper bound")
        object.__setattr__(self, "lower", _frozen(lo))
        object.__setattr__(self, "upper", _frozen(hi))

    @property
    def dim(self) -> int:
        return self.lower.size

    @property
    def center(self) -> np.ndarray:
        return 0.5 * (self.lower + self.upper)

    @property
    def half_width(self) -> np.ndarray:
        return 0.5 * (self.upper - self.lower)

    def contains_point(self, x, tol: float = 0.0) -> bool:
        x = np.asarray(x, dtype=float)
        return bool(np.all(x >= self.lower - tol) and np.all(x <= self.upper + tol))

    def as_zonotope(self) -> Zonotope:
        return Zonotope(self.center, np.diag(self.half_width))

    def __repr__(self) -> str:
        return f"IntervalBox(lower={self.lower.tolist()}, upper={self.upper.tolist()})"


def interval_hull(Z: Zonotope) -> IntervalBox:
    r = Z.radius()
    return IntervalBox(Z.center - r, Z.center + r)


def linear_map(M, Z: Zonotope) -> Zonotope:
    M = np.atleast_2d(np.asarray(M, dtype=float))
    if M.shape[1] != Z.dim:
        raise ValueError(f"map with {M.shape[1]} columns cannot act on dimension {Z.dim}")
    return Zonotope(M @ Z.center, M @ Z.generators)


def concatenate(Z: Zonotope, center_shift=None, extra=None) -> Zonotope:
    """Shift the center and append generator columns (Minkowski sum with ``<shift | extra>``)."""
    shift = np.zeros(Z.dim) if center_shift is None else np.asarray(center_shift, dtype=float).reshape(-1)
    if shift.size != Z.dim:
        raise ValueError("center shift dimension mismatch")
    if extra is None:
        extra = np.zeros((Z.dim, 0))
    extra = np.asarray(extra, dtype=float)
    if extra.size == 0:
        extra = np.zeros((Z.dim, 0))
    if extra.ndim != 2 or extra.shape[0] != Z.dim:
        raise ValueError("extra generator block must have one row per dimension")
    return Zonotope(Z.center + shift, np.hstack([Z.generators, extra]))


def scale(template, gamma, alpha) -> Zonotope:
    """The zonotope ``<alpha | template @ diag(gamma)>``."""
    template = np.atleast_2d(np.asarray(template, dtype=float))
    gamma = np.asarray(gamma, dtype=float).reshape(-1)
    if gamma.size != template.shape[1]:
        raise ValueError("gamma length must equal the template generator count")
    if np.any(gamma < 0):
        raise ValueError("generator scalings must be nonnegative")
    return Zonotope(alpha, template * gamma[None, :])


def contained_in_box(Z: Zonotope, B: IntervalBox, tol: float = 0.0) -> bool:
    if Z.dim != B.dim:
        raise ValueError("zonotope and box dimensions differ")
    r = Z.radius()
    return bool(np.all(Z.center - r >= B.lower - tol) and np.all(Z.center + r <= B.upper + tol))


def box_violation(Z: Zonotope, B: IntervalBox) -> float:
    """Largest amount by which ``Z`` sticks out of ``B`` (<= 0 when contained)."""
    if Z.dim != B.dim:
        raise ValueError("zonotope and box dimensions differ")
    if Z.dim == 0:
        return 0.0
    r = Z.radius()
    return float(max(np.max(B.lower - (Z.center - r)), np.max(Z.center + r - B.upper)))


def lambda_of(x, Z: Zonotope) -> Optional[np.ndarray]:
    """Generator coefficients of ``x`` in ``Z``, or ``None`` if ``x`` is outside.

    Among all valid coefficient vectors the one of least infinity norm is
    returned, which makes the choice canonical.
    """
    x = np.asarray(x, dtype=float).reshape(-1)
    if x.size != Z.dim:
        raise ValueError("point and zonotope dimensions differ")
    d, n = Z.dim, Z.n_generators
    if not contained_in_box(Zonotope(x), interval_hull(Z), tol=FEAS_TOL):
        return None
    if n == 0:
        return np.zeros(0) if np.max(np.abs(x - Z.center), initial=0.0) <= FEAS_TOL else None
    # variables [lam (n), s]; minimize s subject to G lam = x - c, |lam_i| <= s <= 1
    c = np.zeros(n + 1)
    c[-1] = 1.0
    eye = sp.identity(n, format="csr")
    col = sp.csr_matrix(-np.ones((n, 1)))
    A_ub = sp.vstack([sp.hstack([eye, col]), sp.hstack([-eye, col])], format="csr")
    A_eq = sp.hstack([sp.csr_matrix(Z.generators), sp.csr_matrix((d, 1))], format="csr")
    lower = np.concatenate([-np.ones(n), [0.0]])
    upper = np.concatenate([np.ones(n), [1.0 + FEAS_TOL]])
    lp = StandardLP.build(c, A_ub, np.zeros(2 * n), A_eq, x - Z.center, lower, upper)
    sol = solve_lp(lp)
    if not sol.optimal:
        return None
    lam = np.clip(sol.z[:n], -1.0, 1.0)
    if np.max(np.abs(Z.center + Z.generators @ lam - x)) > FEAS_TOL:
        return None
    return lam


def _merge_parallel(P: np.ndarray) -> np.ndarray:
    """Orient 2-D generators into the upper half plane, sort by angle, merge parallel ones."""
    norms = np.hypot(P[0], P[1])
    scale_ref = max(float(np.max(norms, initial=0.0)), 1.0)
    keep = norms > GEOM_TOL * scale_ref
    P, norms = P[:, keep].copy(), norms[keep]
    if P.shape[1] == 0:
        return P
    P[1, np.abs(P[1]) <= GEOM_TOL * norms] = 0.0
    flip = (P[1] < 0) | ((P[1] == 0) & (P[0] < 0))
    P = np.where(flip[None, :], -P, P)
    order = np.argsort(np.arctan2(P[1], P[0]), kind="stable")
    P = P[:, order]
    merged = [P[:, 0].copy()]
    for k in range(1, P.shape[1]):
        g = merged[-1]
        cross = g[0] * P[1, k] - g[1] * P[0, k]
        if abs(cross) <= GEOM_TOL * np.hypot(*g) * np.hypot(*P[:, k]):
            merged[-1] = g + P[:, k]
        else:
            merged.append(P[:, k].copy())
    return np.column_stack(merged)


def project_polygon(Z: Zonotope, dims: Tuple[int, int] = (0, 1)) -> List[Tuple[float, float]]:
    """Vertices of the projection of ``Z`` onto two coordinates, counter-clockwise.

    A degenerate (segment) projection yields its two endpoints; a point
    projection yields a single vertex.
    """
    i, j = (int(dims[0]), int(dims[1]))
    if i == j or not (0 <= i < Z.dim and 0 <= j < Z.dim):
        raise ValueError(f"invalid projection axes {dims} for dimension {Z.dim}")
    c = Z.center[[i, j]]
    P = _merge_parallel(Z.generators[[i, j], :])
    if P.shape[1] == 0:
        return [(float(c[0]), float(c[1]))]
    # start at the vertex minimizing the sweep direction, then walk the edges
    v = c - P.sum(axis=1)
    verts = [v.copy()]
    for k in range(P.shape[1]):
        v = v + 2 * P[:, k]
        verts.append(v.copy())
    for k in range(P.shape[1] - 1):
        v = v - 2 * P[:, k]
        verts.append(v.copy())
    if P.shape[1] == 1:
        verts = verts[:2]
    return [(float(a), float(b)) for a, b in verts]


def polygon_area(vertices: Sequence[Tuple[float, float]]) -> float:
    """Signed shoelace area (positive for counter-clockwise order)."""
    if len(vertices) < 3:
        return 0.0
    V = np.asarray(vertices, dtype=float)
    x, y = V[:, 0], V[:, 1]
    return 0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))


def zonogon_area(Z: Zonotope, dims: Tuple[int, int] = (0, 1)) -> float:
    """Area of the 2-D projection via ``4 * sum_{i<j} |det[p_i p_j]|``."""
    P = Z.generators[list(dims), :]
    cross = np.abs(np.outer(P[0], P[1]) - np.outer(P[1], P[0]))
    return 2.0 * float(cross.sum())
