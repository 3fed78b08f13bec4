"""Quadrature rules on the reference triangle and unit interval.

Triangle rules return barycentric points with weights normalized to sum to
one, so an integral over a physical element is `area * sum(w_q * f(x_q))`.
The named low-order rules (centroid, 3-point, 7-point) cover the polynomial
terms of the discretization exactly; arbitrary degrees for data terms and
verification come from a collapsed Gauss-Legendre product rule.
"""

from __future__ import annotations

import numpy as np

_SQRT15 = np.sqrt(15.0)

# Degree-5 rule: centroid plus two symmetric 3-point orbits.
_P7_A = (6.0 - _SQRT15) / 21.0
_P7_B = (6.0 + _SQRT15) / 21.0
_P7_WA = (155.0 - _SQRT15) / 1200.0
_P7_WB = (155.0 + _SQRT15) / 1200.0


def gauss_legendre_01(n: int) -> tuple[np.ndarray, np.ndarray]:
    """n-point Gauss-Legendre rule on [0, 1]; weights sum to 1."""
    if n < 1:
        raise ValueError("need at least one quadrature point")
    x, w = np.polynomial.legendre.leggauss(n)
    return 0.5 * (x + 1.0), 0.5 * w


def edge_rule(degree: int) -> tuple[np.ndarray, np.ndarray]:
    """Gauss rule on [0, 1] exact for polynomials up to `degree`."""
    return gauss_legendre_01(max(1, (degree + 2) // 2))


def _orbit3(a: float) -> np.ndarray:
    return np.array([[a, a, 1 - 2 * a], [a, 1 - 2 * a, a], [1 - 2 * a, a, a]])


def _collapsed_rule(degree: int) -> tuple[np.ndarray, np.ndarray]:
    # Duffy map of a tensor Gauss rule; the Jacobian (1-v) raises the degree
    # in one direction by one, hence the +3 margin in the point count.
    n = (degree + 3) // 2
    u, wu = gauss_legendre_01(n)
    v, wv = gauss_legendre_01(n)
    uu, vv = np.meshgrid(u, v, indexing="ij")
    lam2 = (uu * (1.0 - vv)).ravel()
    lam3 = vv.ravel()
    lam1 = 1.0 - lam2 - lam3
    w = (np.outer(wu, wv * (1.0 - v)).ravel()) * 2.0
    return np.column_stack([lam1, lam2, lam3]), w


def triangle_rule(degree: int) -> tuple[np.ndarray, np.ndarray]:
    """Barycentric points (nq, 3) and weights (nq,) exact for `degree`."""
    if degree < 0:
        raise ValueError("quadrature degree must be nonnegative")
    if degree <= 1:
        return np.array([[1.0, 1.0, 1.0]]) / 3.0, np.array([1.0])
    if degree == 2:
        return _orbit3(0.5), np.full(3, 1.0 / 3.0)
    if degree <= 5:
        pts = np.vstack([np.full((1, 3), 1.0 / 3.0), _orbit3(_P7_A), _orbit3(_P7_B)])
        w = np.concatenate([[9.0 / 40.0], np.full(3, _P7_WA), np.full(3, _P7_WB)])
        return pts, w
    return _collapsed_rule(degree)
