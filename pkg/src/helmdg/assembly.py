"""Assembly of the penalized DG sesquilinear form and the conforming system.

The DG form applied to trial u and test v (second argument conjugated) is

    sum_K (grad u, grad v)_K
  - sum_{e in interior+Dirichlet} ( <{du/dn_e}, [v]>_e + sigma <[u], {dv/dn_e}>_e )
  + sum_{e in interior+Dirichlet} (zeta0 / h_e) <[u], [v]>_e
  + sum_{e in interior}            zeta1 * h_e  <[du/dn_e], [dv/dn_e]>_e
  + sum_{e in interior+Dirichlet} (zetaB / h_e) <[du/dt_e], [dv/dt_e]>_e

with zeta = i * gamma for each penalty family, and on Dirichlet edges jump
and average both collapse to the single trace.  The full Helmholtz system is
A = A_form - k^2 M + i k B with M the mass matrix and B the Robin boundary
mass matrix; the right-hand side is (f, v) + <g, v> on the Robin boundary
plus, for nonzero Dirichlet data, the consistent weak-imposition terms.

Everything is assembled from vectorized per-edge-group blocks; all traces of
linear basis functions on an edge are represented by their two endpoint
values, for which the product integrals are exact closed forms.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .linalg import SparseComplexMatrix
from .mesh import Mesh
from .quadrature import edge_rule, triangle_rule
from .spaces import DGSpace, FEMSpace, SolutionField

# endpoint-value Gram matrix of the two linear hat functions on an edge,
# scaled by the edge length at use sites
_EDGE_GRAM = np.array([[2.0, 1.0], [1.0, 2.0]]) / 6.0
_MASS_PATTERN = np.array([[2.0, 1.0, 1.0], [1.0, 2.0, 1.0], [1.0, 1.0, 2.0]]) / 12.0

DEFAULT_VOLUME_DEGREE = 5
DEFAULT_EDGE_DEGREE = 7  # 4-point Gauss


@dataclass(frozen=True)
class PenaltyConfig:
    """Penalty multipliers: zeta = i * gamma per family, plus the symmetry knob.

    gamma values may be complex; the induced zeta then has the general
    rotated phase used to damp pollution.  Norm weights are |gamma|.
    """

    gamma0: complex = 1.0
    gamma1: complex = 0.1
    beta1: complex = 1.0
    sigma: float = 1.0
    name: str = "custom"

    @property
    def zeta0(self) -> complex:
        return 1j * complex(self.gamma0)

    @property
    def zeta1(self) -> complex:
        return 1j * complex(self.gamma1)

    @property
    def zetaB(self) -> complex:
        return 1j * complex(self.beta1)

    @property
    def weight0(self) -> float:
        return abs(complex(self.gamma0))

    @property
    def weight1(self) -> float:
        return abs(complex(self.gamma1))

    @property
    def weightB(self) -> float:
        return abs(complex(self.beta1))

    @staticmethod
    def preset_a(k: float, h: float) -> "PenaltyConfig":
        """gamma1 = 0.1, gamma0 = (k^2 h)^(2/3) gamma1^(1/3), beta1 = 1."""
        gamma1 = 0.1
        return PenaltyConfig(
            gamma0=(k * k * h) ** (2.0 / 3.0) * gamma1 ** (1.0 / 3.0),
            gamma1=gamma1,
            beta1=1.0,
            name="A",
        )

    @staticmethod
    def preset_b() -> "PenaltyConfig":
        """zeta1 = -0.07 + 0.01i (i.e. gamma1 = 0.01 + 0.07i), gamma0 = 100, beta1 = 1."""
        return PenaltyConfig(gamma0=100.0, gamma1=0.01 + 0.07j, beta1=1.0, name="B")


def penalty_for(preset: str, k: float, h: float) -> PenaltyConfig:
    if preset.upper() == "A":
        return PenaltyConfig.preset_a(k, h)
    if preset.upper() == "B":
        return PenaltyConfig.preset_b()
    raise ValueError(f"unknown penalty preset {preset!r}")


# ---------------------------------------------------------------------------
# edge trace tables
# ---------------------------------------------------------------------------
def _side_traces(space, idx: np.ndarray, side: str):
    """(dofs, endpoint-value table, normal-deriv, tangential-deriv) per edge.

    The endpoint-value table T has T[e, l, p] = value of local basis l of the
    side element at edge endpoint p (v0 or v1); it is 0/1 because the basis
    is nodal.  Normal and tangential derivatives of each local basis are
    constants.
    """
    mesh = space.mesh
    elems = (mesh.edge_plus if side == "plus" else mesh.edge_minus)[idx]
    loc = (mesh.edge_plus_loc if side == "plus" else mesh.edge_minus_loc)[idx]
    n_e = idx.size
    table = np.zeros((n_e, 3, 2))
    ar = np.arange(n_e)
    table[ar, loc[:, 0], 0] = 1.0
    table[ar, loc[:, 1], 1] = 1.0
    dofs = space.element_dofs[elems]
    grads = space.gradients[elems]
    dn = np.einsum("elx,ex->el", grads, mesh.edge_normal[idx])
    dt = np.einsum("elx,ex->el", grads, mesh.edge_tangent[idx])
    return dofs, table, dn, dt


def _edge_pair_tables(space, idx: np.ndarray):
    """Stacked plus/minus trace tables for interior edges (6 dofs per edge)."""
    dofs_p, t_p, dn_p, dt_p = _side_traces(space, idx, "plus")
    dofs_m, t_m, dn_m, dt_m = _side_traces(space, idx, "minus")
    dofs = np.concatenate([dofs_p, dofs_m], axis=1)
    jump_vals = np.concatenate([t_p, -t_m], axis=1)
    avg_dn = np.concatenate([0.5 * dn_p, 0.5 * dn_m], axis=1)
    jump_dn = np.concatenate([dn_p, -dn_m], axis=1)
    jump_dt = np.concatenate([dt_p, -dt_m], axis=1)
    return dofs, jump_vals, avg_dn, jump_dn, jump_dt


def _block_triplets(dofs: np.ndarray, blocks: np.ndarray):
    """(rows, cols, values) for per-edge/element square blocks."""
    nd = dofs.shape[1]
    rows = np.broadcast_to(dofs[:, :, None], (dofs.shape[0], nd, nd))
    cols = np.broadcast_to(dofs[:, None, :], (dofs.shape[0], nd, nd))
    return rows.ravel(), cols.ravel(), blocks.ravel()


# ---------------------------------------------------------------------------
# bilinear forms
# ---------------------------------------------------------------------------
def _volume_stiffness_triplets(space):
    grads = space.gradients
    blocks = np.einsum("eix,ejx->eij", grads, grads) * space.mesh.areas[:, None, None]
    return _block_triplets(space.element_dofs, blocks.astype(np.complex128))


def _edge_form_triplets(space, penalty: PenaltyConfig):
    """All edge terms of the DG form: flux couplings and the three penalties."""
    mesh = space.mesh
    out = []
    idx = mesh.interior_edges
    if idx.size:
        h = mesh.edge_length[idx]
        dofs, jv, avg_dn, jn, jt = _edge_pair_tables(space, idx)
        jump_int = 0.5 * h[:, None] * (jv[..., 0] + jv[..., 1])
        blocks = -(
            np.einsum("ei,ej->eij", jump_int, avg_dn)
            + penalty.sigma * np.einsum("ei,ej->eij", avg_dn, jump_int)
        ).astype(np.complex128)
        gram = np.einsum("eip,pq,ejq->eij", jv, _EDGE_GRAM, jv) * h[:, None, None]
        blocks += penalty.zeta0 * gram / h[:, None, None]
        blocks += penalty.zeta1 * (h * h)[:, None, None] * np.einsum("ei,ej->eij", jn, jn)
        blocks += penalty.zetaB * np.einsum("ei,ej->eij", jt, jt)
        out.append(_block_triplets(dofs, blocks))
    idx = mesh.dirichlet_edges
    if idx.size:
        h = mesh.edge_length[idx]
        dofs, tv, dn, dt = _side_traces(space, idx, "plus")
        trace_int = 0.5 * h[:, None] * (tv[..., 0] + tv[..., 1])
        blocks = -(
            np.einsum("ei,ej->eij", trace_int, dn)
            + penalty.sigma * np.einsum("ei,ej->eij", dn, trace_int)
        ).astype(np.complex128)
        gram = np.einsum("eip,pq,ejq->eij", tv, _EDGE_GRAM, tv) * h[:, None, None]
        blocks += penalty.zeta0 * gram / h[:, None, None]
        blocks += penalty.zetaB * np.einsum("ei,ej->eij", dt, dt)
        out.append(_block_triplets(dofs, blocks))
    return out


def _mass_triplets(space):
    blocks = _MASS_PATTERN[None, :, :] * space.mesh.areas[:, None, None]
    return _block_triplets(space.element_dofs, blocks.astype(np.complex128))


def _robin_boundary_triplets(space):
    mesh = space.mesh
    idx = mesh.robin_edges
    if not idx.size:
        return []
    h = mesh.edge_length[idx]
    dofs, tv, _, _ = _side_traces(space, idx, "plus")
    blocks = np.einsum("eip,pq,ejq->eij", tv, _EDGE_GRAM, tv) * h[:, None, None]
    return [_block_triplets(dofs, blocks.astype(np.complex128))]


def _matrix_from_triplet_groups(n: int, groups) -> SparseComplexMatrix:
    mat = SparseComplexMatrix(n)
    for rows, cols, vals in groups:
        mat.add_entries(rows, cols, vals)
    return mat.compress()


def assemble_ah(space: DGSpace, penalty: PenaltyConfig) -> SparseComplexMatrix:
    """Matrix of the penalized DG form, M[i][j] = form(basis_j, basis_i)."""
    groups = [_volume_stiffness_triplets(space)] + _edge_form_triplets(space, penalty)
    return _matrix_from_triplet_groups(space.ndof, groups)


def assemble_mass(space) -> SparseComplexMatrix:
    """L2 mass matrix (DG: block diagonal; FEM: vertex-coupled)."""
    return _matrix_from_triplet_groups(space.ndof, [_mass_triplets(space)])


def assemble_robin_boundary(space) -> SparseComplexMatrix:
    """Boundary mass matrix over the Robin part of the boundary."""
    return _matrix_from_triplet_groups(space.ndof, _robin_boundary_triplets(space))


def assemble_fem_stiffness(space: FEMSpace) -> SparseComplexMatrix:
    return _matrix_from_triplet_groups(space.ndof, [_volume_stiffness_triplets(space)])


# ---------------------------------------------------------------------------
# load vectors
# ---------------------------------------------------------------------------
def _element_quad_points(mesh: Mesh, bary: np.ndarray) -> np.ndarray:
    return np.einsum("qv,evx->eqx", bary, mesh.points[mesh.triangles])


def volume_load(space, func, quad_degree: int = DEFAULT_VOLUME_DEGREE) -> np.ndarray:
    """(func, basis_i) over the domain by triangle quadrature."""
    mesh = space.mesh
    bary, w = triangle_rule(quad_degree)
    pts = _element_quad_points(mesh, bary)
    vals = np.asarray(func(pts.reshape(-1, 2))).reshape(mesh.num_elements, -1)
    contrib = np.einsum("eq,q,qv->ev", vals, w, bary) * mesh.areas[:, None]
    out = np.zeros(space.ndof, dtype=np.complex128)
    np.add.at(out, space.element_dofs, contrib)
    return out


def _edge_quad_geometry(mesh: Mesh, idx: np.ndarray, degree: int):
    t, w = edge_rule(degree)
    p0 = mesh.points[mesh.edge_v0[idx]]
    p1 = mesh.points[mesh.edge_v1[idx]]
    pts = (1.0 - t)[None, :, None] * p0[:, None, :] + t[None, :, None] * p1[:, None, :]
    return t, w, pts


def robin_load(space, func, edge_degree: int = DEFAULT_EDGE_DEGREE) -> np.ndarray:
    """<func(x, n), basis_i> over the Robin boundary by Gauss quadrature."""
    mesh = space.mesh
    out = np.zeros(space.ndof, dtype=np.complex128)
    idx = mesh.robin_edges
    if not idx.size:
        return out
    t, w, pts = _edge_quad_geometry(mesh, idx, edge_degree)
    normals = np.repeat(mesh.edge_normal[idx], t.size, axis=0)
    gvals = np.asarray(func(pts.reshape(-1, 2), normals)).reshape(idx.size, t.size)
    dofs, tv, _, _ = _side_traces(space, idx, "plus")
    trace_at_t = tv[:, :, 0][:, :, None] * (1.0 - t)[None, None, :] \
        + tv[:, :, 1][:, :, None] * t[None, None, :]
    contrib = np.einsum("eq,q,elq->el", gvals, w, trace_at_t) * mesh.edge_length[idx][:, None]
    np.add.at(out, dofs, contrib)
    return out


def dirichlet_data_load(
    space: DGSpace, problem, penalty: PenaltyConfig, edge_degree: int = DEFAULT_EDGE_DEGREE
) -> np.ndarray:
    """Weak-imposition terms for nonzero Dirichlet data on sound-soft edges.

    r(v) = -sigma <u_D, dv/dn> + (zeta0/h) <u_D, v> + (zetaB/h) <du_D/dt, dv/dt>.
    Zero when the problem has no Dirichlet data or the mesh no such edges.
    """
    mesh = space.mesh
    out = np.zeros(space.ndof, dtype=np.complex128)
    idx = mesh.dirichlet_edges
    if not idx.size or not problem.has_dirichlet_data:
        return out
    t, w, pts = _edge_quad_geometry(mesh, idx, edge_degree)
    h = mesh.edge_length[idx]
    ud = np.asarray(problem.dirichlet_data(pts.reshape(-1, 2))).reshape(idx.size, t.size)
    grad = problem.exact_grad(pts.reshape(-1, 2)).reshape(idx.size, t.size, 2)
    dt_ud = np.einsum("eqx,ex->eq", grad, mesh.edge_tangent[idx])
    dofs, tv, dn, dtau = _side_traces(space, idx, "plus")
    trace_at_t = tv[:, :, 0][:, :, None] * (1.0 - t)[None, None, :] \
        + tv[:, :, 1][:, :, None] * t[None, None, :]
    int_ud = np.einsum("eq,q->e", ud, w) * h
    int_ud_trace = np.einsum("eq,q,elq->el", ud, w, trace_at_t) * h[:, None]
    int_dt_ud = np.einsum("eq,q->e", dt_ud, w) * h
    contrib = (
        -penalty.sigma * int_ud[:, None] * dn
        + (penalty.zeta0 / h)[:, None] * int_ud_trace
        + (penalty.zetaB / h)[:, None] * int_dt_ud[:, None] * dtau
    )
    np.add.at(out, dofs, contrib)
    return out


def assemble_rhs(
    space,
    problem,
    penalty: PenaltyConfig | None = None,
    quad_degree: int = DEFAULT_VOLUME_DEGREE,
    edge_degree: int = DEFAULT_EDGE_DEGREE,
) -> np.ndarray:
    rhs = volume_load(space, problem.source, quad_degree)
    rhs += robin_load(space, problem.robin_data, edge_degree)
    if penalty is not None and isinstance(space, DGSpace):
        rhs += dirichlet_data_load(space, problem, penalty, edge_degree)
    return rhs


def assemble_full_system(
    space: DGSpace,
    problem,
    penalty: PenaltyConfig,
    quad_degree: int = DEFAULT_VOLUME_DEGREE,
    edge_degree: int = DEFAULT_EDGE_DEGREE,
) -> tuple[SparseComplexMatrix, np.ndarray]:
    """Helmholtz DG system: (form - k^2 mass + i k Robin, load vector)."""
    k = problem.k
    groups = [_volume_stiffness_triplets(space)]
    groups += _edge_form_triplets(space, penalty)
    r, c, v = _mass_triplets(space)
    groups.append((r, c, -(k * k) * v))
    for r, c, v in _robin_boundary_triplets(space):
        groups.append((r, c, 1j * k * v))
    matrix = _matrix_from_triplet_groups(space.ndof, groups)
    rhs = assemble_rhs(space, problem, penalty, quad_degree, edge_degree)
    return matrix, rhs


def assemble_fem_system(
    space: FEMSpace,
    problem,
    quad_degree: int = DEFAULT_VOLUME_DEGREE,
    edge_degree: int = DEFAULT_EDGE_DEGREE,
) -> tuple[SparseComplexMatrix, np.ndarray]:
    """Conforming P1 Galerkin system with Dirichlet rows eliminated.

    Returns the system restricted to free vertices; constrained vertices are
    lifted by the Dirichlet data (zero for sound-soft problems), and the
    coupling moves to the right-hand side.
    """
    k = problem.k
    groups = [_volume_stiffness_triplets(space)]
    r, c, v = _mass_triplets(space)
    groups.append((r, c, -(k * k) * v))
    for r, c, v in _robin_boundary_triplets(space):
        groups.append((r, c, 1j * k * v))
    rhs = volume_load(space, problem.source, quad_degree)
    rhs += robin_load(space, problem.robin_data, edge_degree)

    free = space.free_dofs
    if free.size == space.ndof:
        return _matrix_from_triplet_groups(space.ndof, groups), rhs

    new_index = np.full(space.ndof, -1, dtype=np.int64)
    new_index[free] = np.arange(free.size)
    boundary_values = np.zeros(space.ndof, dtype=np.complex128)
    constrained = np.flatnonzero(space.dirichlet_mask)
    boundary_values[constrained] = np.atleast_1d(
        problem.dirichlet_data(space.mesh.points[constrained])
    )
    reduced = SparseComplexMatrix(free.size)
    rhs_free = rhs[free].copy()
    for rows, cols, vals in groups:
        row_free = ~space.dirichlet_mask[rows]
        col_free = ~space.dirichlet_mask[cols]
        keep = row_free & col_free
        reduced.add_entries(new_index[rows[keep]], new_index[cols[keep]], vals[keep])
        lift = row_free & ~col_free
        if lift.any():
            np.add.at(
                rhs_free,
                new_index[rows[lift]],
                -vals[lift] * boundary_values[cols[lift]],
            )
    return reduced.compress(), rhs_free


def expand_fem_solution(space: FEMSpace, problem, x_free: np.ndarray) -> SolutionField:
    """Scatter a reduced FEM solve back to the full vertex vector."""
    coeffs = np.zeros(space.ndof, dtype=np.complex128)
    coeffs[space.free_dofs] = x_free
    constrained = np.flatnonzero(space.dirichlet_mask)
    if constrained.size:
        coeffs[constrained] = np.atleast_1d(
            problem.dirichlet_data(space.mesh.points[constrained])
        )
    return SolutionField(space, coeffs)


# ---------------------------------------------------------------------------
# elliptic projection and consistency probe
# ---------------------------------------------------------------------------
def _flux_jump_load(space: DGSpace, problem, edge_degree: int) -> np.ndarray:
    """-<du/dn_e, [basis_i]> over interior and Dirichlet edges, exact u."""
    mesh = space.mesh
    out = np.zeros(space.ndof, dtype=np.complex128)
    idx = mesh.interior_edges
    if idx.size:
        t, w, pts = _edge_quad_geometry(mesh, idx, edge_degree)
        grad = problem.exact_grad(pts.reshape(-1, 2)).reshape(idx.size, t.size, 2)
        dudn = np.einsum("eqx,ex->eq", grad, mesh.edge_normal[idx])
        dofs, jv, _, _, _ = _edge_pair_tables(space, idx)
        jump_at_t = jv[:, :, 0][:, :, None] * (1.0 - t)[None, None, :] \
            + jv[:, :, 1][:, :, None] * t[None, None, :]
        contrib = -np.einsum("eq,q,elq->el", dudn, w, jump_at_t) \
            * mesh.edge_length[idx][:, None]
        np.add.at(out, dofs, contrib)
    idx = mesh.dirichlet_edges
    if idx.size:
        t, w, pts = _edge_quad_geometry(mesh, idx, edge_degree)
        grad = problem.exact_grad(pts.reshape(-1, 2)).reshape(idx.size, t.size, 2)
        dudn = np.einsum("eqx,ex->eq", grad, mesh.edge_normal[idx])
        dofs, tv, _, _ = _side_traces(space, idx, "plus")
        trace_at_t = tv[:, :, 0][:, :, None] * (1.0 - t)[None, None, :] \
            + tv[:, :, 1][:, :, None] * t[None, None, :]
        contrib = -np.einsum("eq,q,elq->el", dudn, w, trace_at_t) \
            * mesh.edge_length[idx][:, None]
        np.add.at(out, dofs, contrib)
    return out


def _grad_pairing_load(space: DGSpace, problem, quad_degree: int) -> np.ndarray:
    """(grad u, grad basis_i)_K summed over elements, exact u."""
    mesh = space.mesh
    bary, w = triangle_rule(quad_degree)
    pts = _element_quad_points(mesh, bary)
    grad = problem.exact_grad(pts.reshape(-1, 2)).reshape(mesh.num_elements, w.size, 2)
    contrib = np.einsum("eqx,q,elx->el", grad, w, space.gradients) * mesh.areas[:, None]
    out = np.zeros(space.ndof, dtype=np.complex128)
    np.add.at(out, space.element_dofs, contrib)
    return out


def _robin_trace_load(space, problem, edge_degree: int) -> np.ndarray:
    """<u, basis_i> over the Robin boundary, exact u."""
    return robin_load(space, lambda p, n: problem.exact_u(p), edge_degree)


def elliptic_projection_rhs(
    problem,
    space: DGSpace,
    penalty: PenaltyConfig,
    quad_degree: int = DEFAULT_VOLUME_DEGREE,
    edge_degree: int = DEFAULT_EDGE_DEGREE,
) -> np.ndarray:
    """Right-hand side defining the projection of the exact solution.

    The projection solves (form + i k Robin) u_tilde = this vector; for
    smooth u the interior penalty terms drop and only the flux pairing,
    gradient pairing, Robin trace, and (if any) Dirichlet data terms remain.
    """
    rhs = _grad_pairing_load(space, problem, quad_degree)
    rhs += _flux_jump_load(space, problem, edge_degree)
    rhs += 1j * problem.k * _robin_trace_load(space, problem, edge_degree)
    rhs += dirichlet_data_load(space, problem, penalty, edge_degree)
    return rhs


def elliptic_projection_matrix(space: DGSpace, penalty: PenaltyConfig, k: float) -> SparseComplexMatrix:
    groups = [_volume_stiffness_triplets(space)]
    groups += _edge_form_triplets(space, penalty)
    for r, c, v in _robin_boundary_triplets(space):
        groups.append((r, c, 1j * k * v))
    return _matrix_from_triplet_groups(space.ndof, groups)


def consistency_residual(
    problem,
    space: DGSpace,
    penalty: PenaltyConfig,
    quad_degree: int = 7,
    edge_degree: int = 7,
) -> tuple[float, np.ndarray]:
    """Scaled weak-form residual of the exact solution over all DG basis functions.

    Exact in exact arithmetic; what remains measures quadrature error, so it
    must shrink when h or the quadrature degree is refined.  Returns
    (max scaled residual, raw residual vector).
    """
    k = problem.k
    form_u = _grad_pairing_load(space, problem, quad_degree) \
        + _flux_jump_load(space, problem, edge_degree)
    robin_u = _robin_trace_load(space, problem, edge_degree)
    mass_u = volume_load(space, problem.exact_u, quad_degree)
    load = volume_load(space, problem.source, quad_degree) \
        + robin_load(space, problem.robin_data, edge_degree)
    residual = form_u - k * k * mass_u + 1j * k * robin_u - load
    scale = np.max(
        np.abs(form_u) + k * k * np.abs(mass_u) + k * np.abs(robin_u) + np.abs(load)
    )
    return float(np.max(np.abs(residual)) / scale), residual
