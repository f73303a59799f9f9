"""Finite-difference stencils, differentiation matrices, and a small
two-point boundary-value solver on uniform vertical grids.

Weights come from Fornberg's recursion, so boundary rows automatically
get one-sided stencils of the same formal order as the interior.
"""
from __future__ import annotations

from functools import lru_cache

import numpy as np


def fd_weights(nodes, x0: float, m: int) -> np.ndarray:
    """Weights approximating the m-th derivative at x0 from the given nodes.

    Fornberg's algorithm; exact for polynomials of degree len(nodes) - 1.
    """
    nodes = np.asarray(nodes, dtype=float)
    n = nodes.size
    if m >= n:
        raise ValueError("need more nodes than the derivative order")
    c = np.zeros((n, m + 1))
    c[0, 0] = 1.0
    c1 = 1.0
    c4 = nodes[0] - x0
    for i in range(1, n):
        mn = min(i, m)
        c2 = 1.0
        c5 = c4
        c4 = nodes[i] - x0
        for j in range(i):
            c3 = nodes[i] - nodes[j]
            c2 *= c3
            for s in range(mn, 0, -1):
                c[i, s] = c1 * (s * c[i - 1, s - 1] - c5 * c[i - 1, s]) / c2
            c[i, 0] = -c1 * c5 * c[i - 1, 0] / c2
            for s in range(mn, 0, -1):
                c[j, s] = (c4 * c[j, s] - s * c[j, s - 1]) / c3
            c[j, 0] = c4 * c[j, 0] / c3
        c1 = c2
    return c[:, m]


@lru_cache(maxsize=64)
def diff_matrix(n: int, h: float, deriv: int, order: int = 4) -> np.ndarray:
    """Dense n x n differentiation matrix on a uniform grid of spacing h.

    Interior rows use centered stencils; rows too close to an endpoint
    use shifted stencils of the same order.
    """
    if order not in (2, 4):
        raise ValueError("order must be 2 or 4")
    if deriv not in (1, 2):
        raise ValueError("only first and second derivatives are built")
    width_c = order + 1 if deriv == 1 else (3 if order == 2 else 5)
    width_b = deriv + order
    half = width_c // 2
    D = np.zeros((n, n))
    x = np.arange(n, dtype=float) * h
    for i in range(n):
        if half <= i < n - half:
            lo = i - half
            w = width_c
        else:
            lo = min(max(0, i - width_b // 2), n - width_b)
            w = width_b
        sl = slice(lo, lo + w)
        D[i, sl] = fd_weights(x[sl], x[i], deriv)
    return D


def solve_two_point(kappa_sq: float, rhs, domain=(0.0, 1.0), n: int = 513,
                    order: int = 4) -> tuple[np.ndarray, np.ndarray]:
    """Solve w'' - kappa_sq * w = rhs with w = 0 at both endpoints.

    ``rhs`` is a callable of y or an array of samples on the uniform
    grid.  Returns (y, w) including the endpoint zeros.
    """
    lo, hi = float(domain[0]), float(domain[1])
    y = np.linspace(lo, hi, n)
    h = (hi - lo) / (n - 1)
    f = np.asarray(rhs(y) if callable(rhs) else rhs, dtype=float)
    if f.shape != y.shape:
        raise ValueError("rhs samples must match the grid")
    D2 = diff_matrix(n, h, 2, order)
    A = D2[1:-1, 1:-1] - kappa_sq * np.eye(n - 2)
    w = np.zeros(n)
    w[1:-1] = np.linalg.solve(A, f[1:-1])
    return y, w


def derivative_at_start(y: np.ndarray, w: np.ndarray, order: int = 4) -> float:
    """One-sided derivative estimate at y[0] of matching order."""
    width = order + 1
    wts = fd_weights(y[:width], y[0], 1)
    return float(wts @ w[:width])
