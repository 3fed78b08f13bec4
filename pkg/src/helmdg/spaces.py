"""Discrete spaces on a triangulation and coefficient fields living in them.

`DGSpace` is elementwise-linear and discontinuous: three degrees of freedom
per element, one per corner, with disjoint supports across elements.
`FEMSpace` is the conforming vertex-based linear space, with vertices on
Dirichlet edges constrained to the boundary data.

Both expose the same `(ne, 3)` element-to-DOF map so assembly and error
integration share one code path.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .mesh import Mesh


def element_basis_gradients(mesh: Mesh) -> np.ndarray:
    """Constant gradients of the three corner basis functions, (ne, 3, 2).

    grad(lambda_l) = rot90(p_{l+2} - p_{l+1}) / (2 area), with rot90 the
    counterclockwise quarter turn.
    """
    p = mesh.points[mesh.triangles]  # (ne, 3, 2)
    opp = p[:, [2, 0, 1], :] - p[:, [1, 2, 0], :]  # p_{l+2} - p_{l+1}
    rot = np.stack([-opp[..., 1], opp[..., 0]], axis=-1)
    return rot / (2.0 * mesh.areas)[:, None, None]


@dataclass
class DGSpace:
    mesh: Mesh

    tag = "DG"

    @property
    def ndof(self) -> int:
        return 3 * self.mesh.num_elements

    @cached_property
    def element_dofs(self) -> np.ndarray:
        return np.arange(self.ndof, dtype=np.int64).reshape(-1, 3)

    @cached_property
    def gradients(self) -> np.ndarray:
        return element_basis_gradients(self.mesh)


@dataclass
class FEMSpace:
    mesh: Mesh
    dirichlet_mask: np.ndarray  # (nv,) bool; True where the value is constrained

    tag = "FEM"

    @property
    def ndof(self) -> int:
        return self.mesh.num_vertices

    @cached_property
    def element_dofs(self) -> np.ndarray:
        return self.mesh.triangles

    @cached_property
    def gradients(self) -> np.ndarray:
        return element_basis_gradients(self.mesh)

    @cached_property
    def free_dofs(self) -> np.ndarray:
        return np.flatnonzero(~self.dirichlet_mask)

    @property
    def num_free(self) -> int:
        return int(self.free_dofs.shape[0])


def make_fem_space(mesh: Mesh) -> FEMSpace:
    mask = np.zeros(mesh.num_vertices, dtype=bool)
    if mesh.dirichlet_edges.size:
        mask[mesh.edge_v0[mesh.dirichlet_edges]] = True
        mask[mesh.edge_v1[mesh.dirichlet_edges]] = True
    return FEMSpace(mesh, mask)


@dataclass
class SolutionField:
    """Coefficient vector tagged with the space it lives in."""

    space: DGSpace | FEMSpace
    coeffs: np.ndarray  # (ndof,) complex

    def __post_init__(self):
        self.coeffs = np.asarray(self.coeffs, dtype=np.complex128)
        if self.coeffs.shape != (self.space.ndof,):
            raise ValueError(
                f"coefficient vector has shape {self.coeffs.shape}, "
                f"expected ({self.space.ndof},)"
            )

    def element_values(self) -> np.ndarray:
        """Corner values per element, (ne, 3)."""
        return self.coeffs[self.space.element_dofs]

    def element_gradients(self) -> np.ndarray:
        """Constant per-element gradient vectors, (ne, 2)."""
        return np.einsum("el,elx->ex", self.element_values(), self.space.gradients)


def fe_interpolate(problem, space: FEMSpace) -> SolutionField:
    """Vertex interpolant of the exact solution."""
    return SolutionField(space, np.atleast_1d(problem.exact_u(space.mesh.points)))


def fem_to_dg(field: SolutionField) -> SolutionField:
    """Inject a conforming field into the DG space (same pointwise function)."""
    if not isinstance(field.space, FEMSpace):
        raise ValueError("expected a FEM-space field")
    dg = DGSpace(field.space.mesh)
    return SolutionField(dg, field.element_values().ravel())


def evaluate_field(field: SolutionField, points: np.ndarray, tol: float = 1e-12) -> np.ndarray:
    """Evaluate the field at arbitrary points (nan outside the mesh).

    Brute-force barycentric location, vectorized over elements and chunked
    over query points; on inter-element edges the lowest-labeled containing
    element wins, which matters only for discontinuous fields.
    """
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    mesh = field.space.mesh
    tri_pts = mesh.points[mesh.triangles]  # (ne, 3, 2)
    vals = field.element_values()
    grads = field.space.gradients
    out = np.full(pts.shape[0], np.nan, dtype=np.complex128)
    chunk = max(1, int(2e6 // max(1, mesh.num_elements)))
    for s in range(0, pts.shape[0], chunk):
        q = pts[s:s + chunk]  # (nq, 2)
        # lambda_l(x) = 1 + grad_l . (x - p_l), affine with unit value at p_l
        diff = q[None, :, None, :] - tri_pts[:, None, :, :]  # (ne, nq, 3, 2)
        bary = 1.0 + np.einsum("elx,eqlx->eql", grads, diff)
        inside = (bary >= -tol).all(axis=2)  # (ne, nq)
        elem = np.where(inside.any(axis=0), inside.argmax(axis=0), -1)
        hit = elem >= 0
        if hit.any():
            lam = bary[elem[hit], np.arange(q.shape[0])[hit]]
            out[s + np.flatnonzero(hit)] = np.einsum("ql,ql->q", lam, vals[elem[hit]])
    return out
