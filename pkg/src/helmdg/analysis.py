"""Norms, error measures, and the verification identities of the method.

The broken H1 seminorm sums elementwise gradient L2 norms; the DG norm adds
the penalty-weighted jump terms (function values on interior+Dirichlet
edges, normal derivatives on interior edges, tangential derivatives on
interior+Dirichlet edges).  For complex penalty multipliers the norm weights
are the moduli |gamma|.

Also here: elementwise weighted integration-by-parts identities used as
exactness oracles for piecewise-linear fields, the discrete real/imaginary
energy balance of a solved system, and the computable stability-constant
bound.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .assembly import (
    PenaltyConfig,
    _edge_quad_geometry,
    assemble_ah,
    assemble_mass,
    assemble_rhs,
    assemble_robin_boundary,
)
from .mesh import Mesh
from .quadrature import triangle_rule
from .spaces import DGSpace, SolutionField

_MASS_PATTERN = np.array([[2.0, 1.0, 1.0], [1.0, 2.0, 1.0], [1.0, 1.0, 2.0]]) / 12.0


@dataclass(frozen=True)
class ErrorReport:
    k: float
    h: float
    preset: str
    h1_semi_error: float
    dg_error: float
    l2_error: float
    exact_h1_semi: float
    exact_l2: float

    @property
    def rel_h1_semi(self) -> float:
        return self.h1_semi_error / self.exact_h1_semi

    @property
    def rel_dg(self) -> float:
        return self.dg_error / self.exact_h1_semi

    @property
    def rel_l2(self) -> float:
        return self.l2_error / self.exact_l2


def _element_quad(mesh: Mesh, quad_degree: int):
    bary, w = triangle_rule(quad_degree)
    pts = np.einsum("qv,evx->eqx", bary, mesh.points[mesh.triangles])
    return bary, w, pts


def _field_parts(field: SolutionField | None):
    if field is None:
        return None, None
    return field.element_values(), field.element_gradients()


def h1_seminorm_sq(field: SolutionField | None, problem, mesh: Mesh, quad_degree: int = 5) -> float:
    """Integral of |grad u_exact - grad u_h|^2; either part may be absent."""
    _, grads = _field_parts(field)
    if problem is None:
        if field is None:
            return 0.0
        return float(np.sum(mesh.areas * (np.abs(grads) ** 2).sum(axis=1)))
    _, w, pts = _element_quad(mesh, quad_degree)
    gexact = problem.exact_grad(pts.reshape(-1, 2)).reshape(mesh.num_elements, w.size, 2)
    diff = gexact if field is None else gexact - grads[:, None, :]
    sq = (np.abs(diff) ** 2).sum(axis=2)
    return float(np.sum(np.einsum("eq,q->e", sq, w) * mesh.areas))


def l2_sq(field: SolutionField | None, problem, mesh: Mesh, quad_degree: int = 5) -> float:
    vals, _ = _field_parts(field)
    if problem is None:
        if field is None:
            return 0.0
        quad = np.einsum("ei,ij,ej->e", np.conj(vals), _MASS_PATTERN, vals).real
        return float(np.sum(quad * mesh.areas))
    bary, w, pts = _element_quad(mesh, quad_degree)
    uexact = np.atleast_1d(problem.exact_u(pts.reshape(-1, 2))).reshape(mesh.num_elements, w.size)
    if field is not None:
        uexact = uexact - np.einsum("el,ql->eq", vals, bary)
    return float(np.sum(np.einsum("eq,q->e", np.abs(uexact) ** 2, w) * mesh.areas))


def broken_h1_seminorm_error(field: SolutionField, problem, quad_degree: int = 5) -> float:
    return float(np.sqrt(h1_seminorm_sq(field, problem, field.space.mesh, quad_degree)))


def broken_h1_seminorm(field: SolutionField) -> float:
    return float(np.sqrt(h1_seminorm_sq(field, None, field.space.mesh)))


def exact_h1_seminorm(problem, mesh: Mesh, quad_degree: int = 5) -> float:
    return float(np.sqrt(h1_seminorm_sq(None, problem, mesh, quad_degree)))


def l2_error(field: SolutionField, problem, quad_degree: int = 5) -> float:
    return float(np.sqrt(l2_sq(field, problem, field.space.mesh, quad_degree)))


def l2_norm(field: SolutionField) -> float:
    return float(np.sqrt(l2_sq(field, None, field.space.mesh)))


def exact_l2_norm(problem, mesh: Mesh, quad_degree: int = 5) -> float:
    return float(np.sqrt(l2_sq(None, problem, mesh, quad_degree)))


# ---------------------------------------------------------------------------
# jump terms
# ---------------------------------------------------------------------------
def _segment_norm_sq(a: np.ndarray, b: np.ndarray, h: np.ndarray) -> np.ndarray:
    """Integral of |p|^2 over an edge for linear p with endpoint values a, b."""
    return h / 3.0 * (np.abs(a) ** 2 + np.abs(b) ** 2 + (a * np.conj(b)).real)


def _edge_endpoint_values(field: SolutionField, idx: np.ndarray, side: str) -> tuple[np.ndarray, np.ndarray]:
    mesh = field.space.mesh
    elems = (mesh.edge_plus if side == "plus" else mesh.edge_minus)[idx]
    loc = (mesh.edge_plus_loc if side == "plus" else mesh.edge_minus_loc)[idx]
    vals = field.element_values()[elems]
    ar = np.arange(idx.size)
    return vals[ar, loc[:, 0]], vals[ar, loc[:, 1]]


def jump_quadratic_forms(field: SolutionField, problem=None, edge_degree: int = 7):
    """Raw jump energies (q0, q1, qB): value, normal-derivative, tangential.

    q0 = sum over interior+Dirichlet edges of (1/h)||[v]||^2, q1 = sum over
    interior edges of h ||[dv/dn]||^2, qB the tangential analogue of q0.
    With a `problem`, Dirichlet-edge traces measure (data - field) instead
    of the bare field trace, so exact fields contribute nothing anywhere.
    """
    mesh = field.space.mesh
    grads = field.element_gradients()
    q0 = q1 = qb = 0.0
    idx = mesh.interior_edges
    if idx.size:
        h = mesh.edge_length[idx]
        a_p, b_p = _edge_endpoint_values(field, idx, "plus")
        a_m, b_m = _edge_endpoint_values(field, idx, "minus")
        q0 = float(np.sum(_segment_norm_sq(a_p - a_m, b_p - b_m, h) / h))
        gp, gm = grads[mesh.edge_plus[idx]], grads[mesh.edge_minus[idx]]
        jn = np.einsum("ex,ex->e", gp - gm, mesh.edge_normal[idx].astype(complex))
        jt = np.einsum("ex,ex->e", gp - gm, mesh.edge_tangent[idx].astype(complex))
        q1 = float(np.sum(h * h * np.abs(jn) ** 2))
        qb = float(np.sum(np.abs(jt) ** 2))
    idx = mesh.dirichlet_edges
    if idx.size:
        h = mesh.edge_length[idx]
        if problem is None:
            a, b = _edge_endpoint_values(field, idx, "plus")
            q0 += float(np.sum(_segment_norm_sq(a, b, h) / h))
            gt = np.einsum("ex,ex->e", grads[mesh.edge_plus[idx]],
                           mesh.edge_tangent[idx].astype(complex))
            qb += float(np.sum(np.abs(gt) ** 2))
        else:
            t, w, pts = _edge_quad_geometry(mesh, idx, edge_degree)
            ud = np.atleast_1d(problem.dirichlet_data(pts.reshape(-1, 2))).reshape(idx.size, t.size)
            a, b = _edge_endpoint_values(field, idx, "plus")
            trace = a[:, None] * (1.0 - t)[None, :] + b[:, None] * t[None, :]
            q0 += float(np.sum(np.einsum("eq,q->e", np.abs(ud - trace) ** 2, w)))
            gext = problem.exact_grad(pts.reshape(-1, 2)).reshape(idx.size, t.size, 2)
            tan = mesh.edge_tangent[idx]
            dt_exact = np.einsum("eqx,ex->eq", gext, tan)
            dt_field = np.einsum("ex,ex->e", grads[mesh.edge_plus[idx]], tan.astype(complex))
            qb += float(np.sum(np.einsum("eq,q->e", np.abs(dt_exact - dt_field[:, None]) ** 2, w)))
    return q0, q1, qb


def flux_jump_pairing(field: SolutionField) -> complex:
    """Sum over interior+Dirichlet edges of <{dv/dn_e}, [v]>_e."""
    mesh = field.space.mesh
    grads = field.element_gradients()
    total = 0.0 + 0.0j
    idx = mesh.interior_edges
    if idx.size:
        h = mesh.edge_length[idx]
        a_p, b_p = _edge_endpoint_values(field, idx, "plus")
        a_m, b_m = _edge_endpoint_values(field, idx, "minus")
        avg_dn = 0.5 * np.einsum(
            "ex,ex->e",
            grads[mesh.edge_plus[idx]] + grads[mesh.edge_minus[idx]],
            mesh.edge_normal[idx].astype(complex),
        )
        jump_int = 0.5 * h * np.conj((a_p - a_m) + (b_p - b_m))
        total += complex(np.sum(avg_dn * jump_int))
    idx = mesh.dirichlet_edges
    if idx.size:
        h = mesh.edge_length[idx]
        a, b = _edge_endpoint_values(field, idx, "plus")
        dn = np.einsum("ex,ex->e", grads[mesh.edge_plus[idx]],
                       mesh.edge_normal[idx].astype(complex))
        total += complex(np.sum(dn * 0.5 * h * np.conj(a + b)))
    return total


def dg_norm_error(field: SolutionField, problem, penalty: PenaltyConfig,
                  quad_degree: int = 5) -> float:
    """Full DG norm of (exact - field); the exact part contributes no jumps."""
    base = h1_seminorm_sq(field, problem, field.space.mesh, quad_degree)
    q0, q1, qb = jump_quadratic_forms(field, problem)
    return float(np.sqrt(base + penalty.weight0 * q0 + penalty.weight1 * q1
                         + penalty.weightB * qb))


def dg_norm(field: SolutionField, penalty: PenaltyConfig) -> float:
    """DG norm of the field itself."""
    base = h1_seminorm_sq(field, None, field.space.mesh)
    q0, q1, qb = jump_quadratic_forms(field, None)
    return float(np.sqrt(base + penalty.weight0 * q0 + penalty.weight1 * q1
                         + penalty.weightB * qb))


def compute_error_report(field: SolutionField, problem, penalty: PenaltyConfig,
                         quad_degree: int = 5, preset: str | None = None) -> ErrorReport:
    mesh = field.space.mesh
    return ErrorReport(
        k=problem.k,
        h=mesh.h,
        preset=preset or penalty.name,
        h1_semi_error=broken_h1_seminorm_error(field, problem, quad_degree),
        dg_error=dg_norm_error(field, problem, penalty, quad_degree),
        l2_error=l2_error(field, problem, quad_degree),
        exact_h1_semi=exact_h1_seminorm(problem, mesh, quad_degree),
        exact_l2=exact_l2_norm(problem, mesh, quad_degree),
    )


# ---------------------------------------------------------------------------
# integral identity oracles
# ---------------------------------------------------------------------------
@dataclass
class RellichResiduals:
    """Per-element and per-edge residuals of the weighted identities."""

    volume_value: np.ndarray      # d||v||^2 + 2 Re (v, a.grad v) - boundary, per element
    volume_value_scale: np.ndarray
    volume_gradient: np.ndarray   # (d-2)||grad v||^2 + 2 Re(grad v, grad(a.grad v)) - boundary
    volume_gradient_scale: np.ndarray
    edge_decomposition: np.ndarray        # per interior+Dirichlet edge
    edge_decomposition_scale: np.ndarray


def rellich_identity_residuals(field: SolutionField, center=(0.0, 0.0)) -> RellichResiduals:
    """Residuals of the elementwise weighted integration-by-parts identities.

    All three identities are exact for piecewise-linear fields and the
    quadrature below is exact for the integrands, so residuals are rounding
    noise; they validate orientation, jump, and average conventions.
    """
    mesh = field.space.mesh
    x0 = np.asarray(center, dtype=float)
    vals = field.element_values()
    grads = field.element_gradients()
    tri_pts = mesh.points[mesh.triangles]

    # volume-value identity, d = 2
    norm_sq = np.einsum("ei,ij,ej->e", np.conj(vals), _MASS_PATTERN, vals).real * mesh.areas
    bary, w = triangle_rule(2)
    pts = np.einsum("qv,evx->eqx", bary, tri_pts)
    vq = np.einsum("el,ql->eq", vals, bary)
    alpha_dot_g = np.einsum("eqx,ex->eq", pts - x0, np.conj(grads))
    pair = np.einsum("eq,eq,q->e", vq, alpha_dot_g, w) * mesh.areas
    boundary_val = np.zeros(mesh.num_elements)
    boundary_grad = np.zeros(mesh.num_elements)
    gnorm_sq = (np.abs(grads) ** 2).sum(axis=1)
    for l in range(3):
        pa = tri_pts[:, l]
        pb = tri_pts[:, (l + 1) % 3]
        d = pb - pa
        length = np.hypot(d[:, 0], d[:, 1])
        n_out = np.column_stack([d[:, 1], -d[:, 0]]) / length[:, None]
        alpha_n = ((0.5 * (pa + pb) - x0) * n_out).sum(axis=1)
        va, vb = vals[:, l], vals[:, (l + 1) % 3]
        boundary_val += alpha_n * _segment_norm_sq(va, vb, length)
        boundary_grad += alpha_n * length * gnorm_sq
    res1 = 2.0 * norm_sq + 2.0 * pair.real - boundary_val
    scale1 = 2.0 * norm_sq + 2.0 * np.abs(pair) + np.abs(boundary_val)

    # volume-gradient identity: grad(a . grad v) = grad v for linear fields
    res2 = 2.0 * mesh.areas * gnorm_sq - boundary_grad
    scale2 = 2.0 * mesh.areas * gnorm_sq + np.abs(boundary_grad)

    # edge decomposition identity on interior + Dirichlet edges
    idx = np.concatenate([mesh.interior_edges, mesh.dirichlet_edges])
    res3 = np.zeros(idx.size)
    scale3 = np.zeros(idx.size)
    if idx.size:
        is_interior = np.zeros(idx.size, dtype=bool)
        is_interior[: mesh.interior_edges.size] = True
        h = mesh.edge_length[idx]
        n = mesh.edge_normal[idx]
        tau = mesh.edge_tangent[idx]
        mid = 0.5 * (mesh.points[mesh.edge_v0[idx]] + mesh.points[mesh.edge_v1[idx]]) - x0
        gp = grads[mesh.edge_plus[idx]]
        gm = np.where(is_interior[:, None], grads[mesh.edge_minus[idx]], gp)
        g_jump = np.where(is_interior[:, None], gp - gm, gp)
        g_avg = np.where(is_interior[:, None], 0.5 * (gp + gm), gp)
        avg_dn = np.einsum("ex,ex->e", g_avg, n.astype(complex))
        avg_dt = np.einsum("ex,ex->e", g_avg, tau.astype(complex))
        jump_dt = np.einsum("ex,ex->e", g_jump, tau.astype(complex))
        alpha_n = (mid * n).sum(axis=1)
        alpha_tau = (mid * tau).sum(axis=1)
        lhs1 = avg_dn * np.einsum("ex,ex->e", mid.astype(complex), np.conj(g_jump)) * h
        lhs2 = alpha_n * h * np.einsum("ex,ex->e", g_avg, np.conj(g_jump))
        rhs = (alpha_tau * avg_dn - alpha_n * avg_dt) * h * np.conj(jump_dt)
        res = lhs1 - lhs2 - rhs
        res3 = np.abs(res)
        scale3 = np.abs(lhs1) + np.abs(lhs2) + np.abs(rhs)
    return RellichResiduals(res1, scale1, res2, scale2, res3, scale3)


@dataclass
class EnergyIdentityResiduals:
    real_residual: float
    imag_residual: float
    scale: float


def discrete_energy_identities(
    field: SolutionField, problem, penalty: PenaltyConfig,
    quad_degree: int = 5, edge_degree: int = 7,
) -> EnergyIdentityResiduals:
    """Re/Im balance of the solved variational equation tested with u_h itself."""
    if not isinstance(field.space, DGSpace):
        raise ValueError("energy identities are defined for the DG solution")
    space = field.space
    k = problem.k
    u = field.coeffs
    form = assemble_ah(space, penalty)
    mass = assemble_mass(space)
    robin = assemble_robin_boundary(space)
    quad = np.vdot(u, form.matvec(u)) - k * k * np.vdot(u, mass.matvec(u)) \
        + 1j * k * np.vdot(u, robin.matvec(u))
    load = assemble_rhs(space, problem, penalty, quad_degree, edge_degree)
    rhs = np.vdot(u, load)
    scale = abs(quad) + abs(rhs)
    return EnergyIdentityResiduals(
        real_residual=abs((quad - rhs).real),
        imag_residual=abs((quad - rhs).imag),
        scale=float(scale),
    )


def theoretical_csta(mesh: Mesh, penalty: PenaltyConfig, k: float) -> float:
    """Computable stability-constant bound for real positive penalty parameters."""
    for name, val in (("gamma0", penalty.gamma0), ("gamma1", penalty.gamma1),
                      ("beta1", penalty.beta1)):
        c = complex(val)
        if c.imag != 0.0 or c.real <= 0.0:
            raise ValueError(f"stability bound undefined: {name} must be real positive")
    g0 = complex(penalty.gamma0).real
    g1 = complex(penalty.gamma1).real
    b1 = complex(penalty.beta1).real
    bound = 1.0 / k + 1.0 / k**2
    if mesh.dirichlet_edges.size:
        h = mesh.edge_length[mesh.dirichlet_edges]
        term = 1.0 / g0 + g0 / h + np.sqrt(g0 / b1) + 1.0 / b1
        bound += float(term.max()) / k**2
    if mesh.interior_edges.size:
        h = mesh.edge_length[mesh.interior_edges]
        term = (k * k + 1.0) / g0 + np.sqrt(g0 / g1) / h + np.sqrt(g0 / b1) + 1.0 / b1
        bound += float(term.max()) / k**2
    return bound
