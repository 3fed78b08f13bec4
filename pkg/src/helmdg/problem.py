"""Manufactured Helmholtz problems: exact solution, source, boundary data.

`HelmholtzProblem` is the radial benchmark on the hexagon: a cylindrical
standing wave normalized so the Robin boundary data is consistent with the
exact solution.  `PlaneWaveProblem` supplies a homogeneous-source solution
for domains with Dirichlet (sound-soft) edges, exercising inhomogeneous
Dirichlet data through the same interface.

Every evaluator is vectorized: points are (..., 2) arrays and results have
the matching leading shape.  Both problems are immutable after construction.
"""

from __future__ import annotations

import numpy as np

from .specfun import bessel_j0, bessel_j1, sinc_scaled

_CENTER_RADIUS = 1e-12


def _as_points(p) -> tuple[np.ndarray, tuple[int, ...]]:
    arr = np.asarray(p, dtype=float)
    if arr.shape[-1] != 2:
        raise ValueError("points must have a trailing dimension of 2")
    lead = arr.shape[:-1]
    return arr.reshape(-1, 2), lead


def _as_normals(normal, pts_shape: tuple[int, ...]) -> np.ndarray:
    nrm = np.asarray(normal, dtype=float)
    if nrm.ndim == 1:
        return np.broadcast_to(nrm, pts_shape)
    return nrm.reshape(-1, 2)


class HelmholtzProblem:
    """Radial standing-wave solution u(r) = cos(kr)/k - c J0(kr).

    The complex constant c = e^{ik} / (k (J0(k) + i J1(k))) makes the wave
    consistent with the absorbing boundary data g = du/dn + i k u on the unit
    hexagon; the source is the regularized kernel sin(kr)/r.
    """

    def __init__(self, k: float):
        if not np.isfinite(k) or k <= 0.0:
            raise ValueError("wave number k must be finite and positive")
        self.k = float(k)
        denom = bessel_j0(self.k) + 1j * bessel_j1(self.k)
        if abs(denom) <= 1e-8:
            raise ValueError(f"J0(k) + i J1(k) nearly vanishes at k={k}")
        self.c = complex(np.exp(1j * self.k) / (self.k * denom))

    def _radius(self, pts: np.ndarray) -> np.ndarray:
        return np.hypot(pts[:, 0], pts[:, 1])

    def exact_u(self, p) -> np.ndarray | complex:
        pts, lead = _as_points(p)
        r = self._radius(pts)
        kr = self.k * r
        val = np.cos(kr) / self.k - self.c * bessel_j0(kr)
        return complex(val[0]) if lead == () else val.reshape(lead)

    def radial_derivative(self, r) -> np.ndarray:
        kr = self.k * np.asarray(r, dtype=float)
        return -np.sin(kr) + self.c * self.k * bessel_j1(kr)

    def exact_grad(self, p) -> np.ndarray:
        """Gradient of the exact solution; zero at the center (radial field)."""
        pts, lead = _as_points(p)
        r = self._radius(pts)
        safe = np.maximum(r, _CENTER_RADIUS)
        dudr = self.radial_derivative(r)
        grad = (dudr / safe)[:, None] * pts
        grad[r < _CENTER_RADIUS] = 0.0
        return grad.reshape(lead + (2,))

    def source(self, p) -> np.ndarray | float:
        pts, lead = _as_points(p)
        val = sinc_scaled(self.k, self._radius(pts))
        return float(val[0]) if lead == () else val.reshape(lead)

    def robin_data(self, p, normal) -> np.ndarray | complex:
        """g = du/dn + i k u for unit outward normals `normal`."""
        pts, lead = _as_points(p)
        nrm = _as_normals(normal, pts.shape)
        grad = self.exact_grad(pts)
        u = np.atleast_1d(self.exact_u(pts))
        val = (grad * nrm).sum(axis=1) + 1j * self.k * u
        return complex(val[0]) if lead == () else val.reshape(lead)

    def dirichlet_data(self, p) -> np.ndarray | complex:
        return self.exact_u(p)

    @property
    def has_dirichlet_data(self) -> bool:
        return False


class PlaneWaveProblem:
    """Plane wave u = exp(i k d.x), d = (cos theta, sin theta).

    The Helmholtz residual vanishes identically (f = 0), so the problem is
    driven purely by boundary data; the Dirichlet trace is nonzero, which
    exercises weak imposition of inhomogeneous sound-soft data.
    """

    def __init__(self, k: float, theta: float = 0.0):
        if not np.isfinite(k) or k <= 0.0:
            raise ValueError("wave number k must be finite and positive")
        self.k = float(k)
        self.direction = np.array([np.cos(theta), np.sin(theta)])

    def exact_u(self, p) -> np.ndarray | complex:
        pts, lead = _as_points(p)
        val = np.exp(1j * self.k * (pts @ self.direction))
        return complex(val[0]) if lead == () else val.reshape(lead)

    def exact_grad(self, p) -> np.ndarray:
        pts, lead = _as_points(p)
        u = np.exp(1j * self.k * (pts @ self.direction))
        grad = 1j * self.k * u[:, None] * self.direction[None, :]
        return grad.reshape(lead + (2,))

    def source(self, p) -> np.ndarray | float:
        pts, lead = _as_points(p)
        return 0.0 if lead == () else np.zeros(lead)

    def robin_data(self, p, normal) -> np.ndarray | complex:
        pts, lead = _as_points(p)
        nrm = _as_normals(normal, pts.shape)
        u = np.atleast_1d(self.exact_u(pts))
        val = 1j * self.k * ((nrm @ self.direction) + 1.0) * u
        return complex(val[0]) if lead == () else val.reshape(lead)

    def dirichlet_data(self, p) -> np.ndarray | complex:
        return self.exact_u(p)

    @property
    def has_dirichlet_data(self) -> bool:
        return True
