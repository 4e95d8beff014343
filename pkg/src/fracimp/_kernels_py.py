"""Pure-NumPy fallback for the hot convolution kernels.

Same contracts as the compiled ``_kernels`` extension; selected by
``fracimp.kernels`` when the extension is unavailable.
"""

from __future__ import annotations

import math

import numpy as np


def rl_weights(n: int, beta: float, h: float):
    """Product-trapezoid weight tables for a uniform grid of spacing h.

    For lag d = k - j (panel [j, j+1] seen from node k) the exact moments of
    the kernel (t_k - s)^(beta-1) against the linear hat functions are

        a[d] -> weight of the panel's left  value g[k-d]
        b[d] -> weight of the panel's right value g[k-d+1]
    """
    d = np.arange(1, n + 1, dtype=np.float64)
    m0 = h**beta * (d**beta - (d - 1.0) ** beta) / beta
    m1 = h ** (beta + 1.0) * (d ** (beta + 1.0) - (d - 1.0) ** (beta + 1.0)) / (beta + 1.0)
    a = (m1 - (d - 1.0) * h * m0) / h
    b = (d * h * m0 - m1) / h
    return a, b


def rl_all_nodes(g: np.ndarray, beta: float, h: float) -> np.ndarray:
    """Riemann-Liouville integral of order beta of piecewise-linear g
    at every node of a uniform grid (spacing h), W[0] = 0.
    """
    g = np.ascontiguousarray(g, dtype=np.float64)
    n = g.shape[0] - 1
    if n < 1:
        return np.zeros_like(g)
    a, b = rl_weights(n, beta, h)
    a0 = np.concatenate(([0.0], a))
    b0 = np.concatenate(([0.0], b))
    w = np.convolve(g, a0)[: n + 1] + np.convolve(g[1:], b0)[: n + 1]
    w[0] = 0.0
    return w / math.gamma(beta)


def l1_all_nodes(g: np.ndarray, alpha: float, h: float) -> np.ndarray:
    """L1-scheme Caputo derivative of order alpha of g at every node
    of a uniform grid (spacing h), D[0] = 0.
    """
    g = np.ascontiguousarray(g, dtype=np.float64)
    n = g.shape[0] - 1
    if n < 1:
        return np.zeros_like(g)
    d = np.arange(1, n + 1, dtype=np.float64)
    c = d ** (1.0 - alpha) - (d - 1.0) ** (1.0 - alpha)
    c0 = np.concatenate(([0.0], c))
    full = np.convolve(np.diff(g), c0)
    out = np.zeros(n + 1)
    out[1:] = full[1 : n + 1]
    return out * h**-alpha / math.gamma(2.0 - alpha)
