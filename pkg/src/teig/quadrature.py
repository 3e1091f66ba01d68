"""Gauss rules used by the boundary element assembly."""
from __future__ import annotations

from functools import lru_cache

import numpy as np
from scipy.linalg import eigh_tridiagonal


@lru_cache(maxsize=None)
def gauss_legendre01(q: int) -> tuple[np.ndarray, np.ndarray]:
    """q-point Gauss-Legendre rule on [0, 1]."""
    x, w = np.polynomial.legendre.leggauss(q)
    x, w = 0.5 * (x + 1.0), 0.5 * w
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


@lru_cache(maxsize=None)
def gauss_log01(q: int) -> tuple[np.ndarray, np.ndarray]:
    """q-point Gauss rule for the weight -ln(u) on [0, 1].

    Exact for polynomials of degree <= 2q-1 times -ln(u). Recurrence
    coefficients come from the Stieltjes procedure applied to a fine
    discretization of the weight (Gauss-Legendre on panels graded
    geometrically towards the singular endpoint), then Golub-Welsch.
    """
    xg, wg = np.polynomial.legendre.leggauss(24)
    edges = np.concatenate([[0.0], 2.0 ** np.arange(-60, 1, dtype=float)])
    a, b = edges[:-1], edges[1:]
    nodes = (0.5 * (b - a)[:, None] * (xg + 1.0) + a[:, None]).ravel()
    weights = (0.5 * (b - a)[:, None] * wg).ravel() * -np.log(nodes)

    alpha = np.zeros(q)
    beta = np.zeros(q)
    p_prev = np.zeros_like(nodes)
    p = np.ones_like(nodes)
    norm_prev = 1.0
    for j in range(q):
        norm = np.dot(weights, p * p)
        alpha[j] = np.dot(weights, nodes * p * p) / norm
        beta[j] = norm / norm_prev if j else norm
        p_next = (nodes - alpha[j]) * p - (beta[j] if j else 0.0) * p_prev
        p_prev, p, norm_prev = p, p_next, norm
    x, v = eigh_tridiagonal(alpha, np.sqrt(beta[1:]))
    w = beta[0] * v[0, :] ** 2
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def quadratic_shape(xi):
    """Lagrange basis on nodes -1, 0, 1; returns array (..., 3)."""
    xi = np.asarray(xi, dtype=float)
    return np.stack([0.5 * xi * (xi - 1.0), 1.0 - xi * xi, 0.5 * xi * (xi + 1.0)], axis=-1)
