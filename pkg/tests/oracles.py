"""Independent reference computations shared by the unit and acceptance suites."""

import numpy as np

from zonokernel.dynamics import DiscreteAffineSystem
from zonokernel.zonotope import IntervalBox


def tiny_program(rng, mode):
    """A random symmetric tiny instance (alpha = beta = 0 is optimal by symmetry and convexity)."""
    dx = 2
    if mode == "invariant":
        nI, T, du = int(rng.integers(1, 4)), int(rng.integers(1, 4)), 0
    else:
        nI, T = [(2, 1), (1, 2), (1, 3)][int(rng.integers(0, 3))]
        du = 1
    A = rng.standard_normal((dx, dx)) * 0.7
    B = rng.standard_normal((dx, du)) * 0.6 if du else None
    hx = rng.uniform(0.5, 1.5, dx)
    X = IntervalBox(-hx, hx)
    U = None
    if du:
        hw = rng.uniform(0.3, 1.0, du)
        U = IntervalBox(-hw, hw)
    sys = DiscreteAffineSystem(A, B, None, None, X, U)
    G = rng.standard_normal((dx, nI))
    G /= np.linalg.norm(G, axis=0)
    return sys, G, T


def _feasible(sys, G, T, pts):
    """Original absolute-value containment conditions, vectorized over grid points.

    ``pts`` columns are ``[gamma (nI) | Phi(0) (du*nI) | ... | Phi(T-1)]``.
    """
    dx, nI, du = sys.dx, G.shape[1], sys.du
    gamma = pts[:, :nI]
    Phi = pts[:, nI:].reshape(len(pts), T, du, nI) if du else None
    ok = np.all(gamma >= 0, axis=1)
    hw_x = sys.X.upper
    At = np.eye(dx)
    for t in range(T + 1):
        M = np.einsum("ji,ni->nji", At @ G, gamma)
        if du:
            for s in range(t):
                AB = np.linalg.matrix_power(sys.A, t - 1 - s) @ sys.B
                M = M + np.einsum("jk,nki->nji", AB, Phi[:, s])
        ok &= np.all(np.abs(M).sum(axis=2) <= hw_x + 1e-12, axis=1)
        At = sys.A @ At
    if du:
        for t in range(T):
            ok &= np.all(np.abs(Phi[:, t]).sum(axis=2) <= sys.U.upper + 1e-12, axis=1)
    return ok


def grid_optimum(sys, G, T, budget=6000, rounds=14, bisections=22):
    """Best ``1'gamma`` over a zooming grid of ``(gamma, Phi)`` directions.

    The feasible set is convex and contains the origin, so along each grid
    direction the largest feasible multiple is found by bisection. Every
    returned value is attained by a feasible point, hence a lower bound.
    """
    nI, du = G.shape[1], sys.du
    k = nI + T * du * nI
    points = int(min(41, max(9, budget ** (1.0 / k))))
    scale = np.concatenate([np.full(nI, 4 * np.max(sys.X.upper)),
                            np.full(T * du * nI, 2 * np.max(sys.U.upper) if du else 0.0)])
    lo = np.concatenate([np.zeros(nI), -np.ones(k - nI)])
    hi = np.ones(k)
    best_val, best_dir = 0.0, None
    for _ in range(rounds):
        axes = [np.linspace(a, b, points) for a, b in zip(lo, hi)]
        D = np.stack(np.meshgrid(*axes, indexing="ij"), -1).reshape(-1, k)
        D = D[D[:, :nI].sum(axis=1) > 0] * scale
        s_lo, s_hi = np.zeros(len(D)), np.ones(len(D))
        for _ in range(bisections):
            mid = 0.5 * (s_lo + s_hi)
            ok = _feasible(sys, G, T, D * mid[:, None])
            s_lo = np.where(ok, mid, s_lo)
            s_hi = np.where(ok, s_hi, mid)
        vals = s_lo * D[:, :nI].sum(axis=1)
        i = int(np.argmax(vals))
        if vals[i] >= best_val:
            best_val, best_dir = float(vals[i]), D[i] / scale
        if best_dir is None:
            break
        half = (hi - lo) / 4
        lo = np.maximum(best_dir - half, np.concatenate([np.zeros(nI), -np.ones(k - nI)]))
        hi = np.minimum(best_dir + half, 1.0)
    return best_val
