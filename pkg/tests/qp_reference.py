"""Dense reference solver for the soft-margin dual, used only by tests.

Projected-gradient ascent with an exact Euclidean projection onto
{0 <= a <= C, y @ a = 0}; independent of the production solver.
"""
import numpy as np


def project_box_simplex(v, y, cost):
    """Exact projection of v onto {0 <= a <= C, y @ a = 0}.

    The projection is clip(v - nu*y, 0, C) for the multiplier nu making the
    constraint residual zero; the residual is piecewise linear and
    nonincreasing in nu, so nu is found by interpolating across its kinks.
    """
    v = np.asarray(v, dtype=float)
    y = np.asarray(y, dtype=float)
    if not ((y > 0).any() and (y < 0).any()):
        raise ValueError("projection needs both label signs")
    kinks = np.sort(np.concatenate([
        np.where(y > 0, v - cost, -v),
        np.where(y > 0, v, cost - v),
    ]))
    residuals = np.clip(v[None, :] - kinks[:, None] * y[None, :], 0.0, cost) @ y
    nu = float(np.interp(0.0, residuals[::-1], kinks[::-1]))
    return np.clip(v - nu * y, 0.0, cost)


def reference_dual_solution(gram, y, cost, iterations=60_000):
    """Projected-gradient ascent on the dual with a fixed 1/L step."""
    y = np.asarray(y, dtype=float)
    quad = np.outer(y, y) * np.asarray(gram, dtype=float)
    lipschitz = max(float(np.linalg.eigvalsh(quad).max()), 1e-9)
    alpha = np.zeros(len(y))
    for _ in range(iterations):
        grad = 1.0 - quad @ alpha
        nxt = project_box_simplex(alpha + grad / lipschitz, y, cost)
        if np.max(np.abs(nxt - alpha)) < 1e-14:
            alpha = nxt
            break
        alpha = nxt
    return alpha


def dual_objective(alpha, gram, y):
    ay = alpha * y
    return float(alpha.sum() - 0.5 * ay @ gram @ ay)
