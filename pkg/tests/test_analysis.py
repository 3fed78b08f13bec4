import numpy as np
import pytest

from helmdg import (
    DGSpace,
    HelmholtzProblem,
    PenaltyConfig,
    SolutionField,
    broken_h1_seminorm,
    broken_h1_seminorm_error,
    compute_error_report,
    dg_norm_error,
    discrete_energy_identities,
    exact_h1_seminorm,
    exact_l2_norm,
    fe_interpolate,
    fem_to_dg,
    l2_error,
    l2_norm,
    make_fem_space,
    rellich_identity_residuals,
    relabel_elements,
    theoretical_csta,
)
from helmdg.analysis import dg_norm
from helmdg.experiments import solve_dg

from conftest import hexagon, square_hole
from oracles import loglog_slope


def random_dg_field(space, rng):
    return SolutionField(
        space, rng.standard_normal(space.ndof) + 1j * rng.standard_normal(space.ndof)
    )


def test_interpolant_of_linear_has_zero_error():
    mesh = hexagon(3)

    class Linear:
        k = 1.0
        has_dirichlet_data = False

        def exact_u(self, p):
            pts = np.asarray(p, dtype=float).reshape(-1, 2)
            return 0.5 - pts[:, 0] + 2.0 * pts[:, 1] + 0j

        def exact_grad(self, p):
            pts = np.asarray(p, dtype=float).reshape(-1, 2)
            return np.tile(np.array([-1.0, 2.0], dtype=complex), (pts.shape[0], 1))

    problem = Linear()
    interp = fe_interpolate(problem, make_fem_space(mesh))
    assert broken_h1_seminorm_error(interp, problem) <= 1e-13


def test_zero_field_errors_equal_exact_norms():
    mesh = hexagon(4)
    problem = HelmholtzProblem(6.0)
    space = DGSpace(mesh)
    zero = SolutionField(space, np.zeros(space.ndof, dtype=complex))
    assert broken_h1_seminorm_error(zero, problem) == pytest.approx(
        exact_h1_seminorm(problem, mesh), rel=1e-13
    )
    assert l2_error(zero, problem) == pytest.approx(exact_l2_norm(problem, mesh), rel=1e-13)


def test_interpolant_h1_slope_minus_one():
    problem = HelmholtzProblem(5.0)
    hs, errs = [], []
    for m in (4, 8, 16, 32):
        mesh = hexagon(m)
        interp = fe_interpolate(problem, make_fem_space(mesh))
        hs.append(mesh.h)
        errs.append(broken_h1_seminorm_error(interp, problem)
                    / exact_h1_seminorm(problem, mesh))
    assert loglog_slope([1 / h for h in hs], errs) == pytest.approx(-1.0, abs=0.1)


def test_interpolant_l2_slope_minus_two():
    problem = HelmholtzProblem(5.0)
    errs = []
    for m in (4, 8, 16, 32):
        mesh = hexagon(m)
        errs.append(l2_error(fe_interpolate(problem, make_fem_space(mesh)), problem))
    assert loglog_slope([4.0, 8.0, 16.0, 32.0], errs) == pytest.approx(-2.0, abs=0.15)


def test_dg_solution_l2_slope():
    problem = HelmholtzProblem(5.0)
    errs = []
    for m in (4, 8, 16, 32):
        mesh = hexagon(m)
        field, _ = solve_dg(mesh, problem, PenaltyConfig.preset_a(5.0, mesh.h))
        errs.append(l2_error(field, problem))
    slope = loglog_slope([4.0, 8.0, 16.0, 32.0], errs)
    assert -2.2 <= slope <= -1.5


def test_conforming_field_has_no_jump_contribution():
    # a conforming field has no function-value or tangential-derivative
    # jumps; its piecewise gradient still jumps in the normal direction, so
    # the norms coincide exactly when the normal-derivative family is off
    mesh = hexagon(4)
    problem = HelmholtzProblem(8.0)
    interp = fe_interpolate(problem, make_fem_space(mesh))
    injected = fem_to_dg(interp)
    from helmdg.analysis import jump_quadratic_forms

    q0, q1, qb = jump_quadratic_forms(injected)
    assert q0 <= 1e-26 and qb <= 1e-26
    assert q1 > 0.0
    no_normal_family = PenaltyConfig(gamma0=10.0, gamma1=0.0, beta1=2.0)
    dg_err = dg_norm_error(injected, problem, no_normal_family)
    h1_err = broken_h1_seminorm_error(injected, problem)
    assert dg_err == pytest.approx(h1_err, rel=1e-13)
    # with the normal-derivative family on, the square of the norm splits
    # into exactly the seminorm part plus the weighted jump energy
    penalty = PenaltyConfig.preset_a(8.0, mesh.h)
    full = dg_norm_error(injected, problem, penalty)
    assert full**2 == pytest.approx(h1_err**2 + penalty.weight1 * q1, rel=1e-12)


def test_dg_norm_error_dominates_seminorm(rng):
    mesh = hexagon(3)
    problem = HelmholtzProblem(6.0)
    penalty = PenaltyConfig.preset_a(6.0, mesh.h)
    for _ in range(5):
        field = random_dg_field(DGSpace(mesh), rng)
        assert dg_norm_error(field, problem, penalty) >= \
            broken_h1_seminorm_error(field, problem) - 1e-14


def test_dg_error_within_factor_three_of_seminorm():
    mesh = hexagon(20)
    problem = HelmholtzProblem(10.0)
    penalty = PenaltyConfig.preset_a(10.0, mesh.h)
    field, _ = solve_dg(mesh, problem, penalty)
    dg_err = dg_norm_error(field, problem, penalty)
    h1_err = broken_h1_seminorm_error(field, problem)
    assert np.isfinite(dg_err)
    assert dg_err <= 3.0 * h1_err


def test_error_report_consistency():
    mesh = hexagon(8)
    problem = HelmholtzProblem(5.0)
    penalty = PenaltyConfig.preset_a(5.0, mesh.h)
    field, _ = solve_dg(mesh, problem, penalty)
    report = compute_error_report(field, problem, penalty)
    assert report.rel_h1_semi == pytest.approx(report.h1_semi_error / report.exact_h1_semi)
    assert report.rel_l2 == pytest.approx(report.l2_error / report.exact_l2)
    assert report.dg_error >= report.h1_semi_error
    assert report.preset == "A" and report.k == 5.0 and report.h == mesh.h


def test_error_norms_invariant_under_relabeling(rng):
    mesh = hexagon(3)
    problem = HelmholtzProblem(7.0)
    penalty = PenaltyConfig.preset_a(7.0, mesh.h)
    space = DGSpace(mesh)
    field = random_dg_field(space, rng)
    perm = rng.permutation(mesh.num_elements)
    permuted_mesh = relabel_elements(mesh, perm)
    coeffs = field.coeffs.reshape(-1, 3)[perm].ravel()
    permuted_field = SolutionField(DGSpace(permuted_mesh), coeffs)
    for fn in (lambda f: broken_h1_seminorm_error(f, problem),
               lambda f: dg_norm_error(f, problem, penalty),
               lambda f: l2_error(f, problem),
               lambda f: dg_norm(f, penalty),
               broken_h1_seminorm,
               l2_norm):
        assert fn(permuted_field) == pytest.approx(fn(field), rel=1e-13)


def test_rellich_residuals_vanish_for_p1_fields(rng):
    for m in (2, 4):
        mesh = hexagon(m)
        space = DGSpace(mesh)
        for _ in range(10):
            res = rellich_identity_residuals(random_dg_field(space, rng))
            assert np.all(np.abs(res.volume_value) <= 1e-12 * np.maximum(res.volume_value_scale, 1e-30))
            assert np.all(np.abs(res.volume_gradient) <= 1e-12 * np.maximum(res.volume_gradient_scale, 1e-30))
            assert np.all(res.edge_decomposition <= 1e-12 * np.maximum(res.edge_decomposition_scale, 1e-30))


def test_rellich_on_dirichlet_edges(rng):
    mesh = square_hole(3)
    space = DGSpace(mesh)
    res = rellich_identity_residuals(random_dg_field(space, rng))
    assert res.edge_decomposition.size == mesh.interior_edges.size + mesh.dirichlet_edges.size
    assert np.all(res.edge_decomposition <= 1e-12 * np.maximum(res.edge_decomposition_scale, 1e-30))


def test_rellich_constant_field_reduces_to_divergence_theorem():
    mesh = hexagon(2)
    space = DGSpace(mesh)
    ones = SolutionField(space, np.ones(space.ndof, dtype=complex))
    res = rellich_identity_residuals(ones)
    # d ||1||_K^2 = 2 |K| must equal the boundary integral of alpha . n
    assert np.all(np.abs(res.volume_value) <= 1e-13)
    tri_pts = mesh.points[mesh.triangles]
    for e in range(mesh.num_elements):
        boundary = 0.0
        for l in range(3):
            pa, pb = tri_pts[e, l], tri_pts[e, (l + 1) % 3]
            d = pb - pa
            normal = np.array([d[1], -d[0]])
            boundary += float(0.5 * (pa + pb) @ normal)
        assert boundary == pytest.approx(2.0 * mesh.areas[e], rel=1e-12)


def test_energy_identities_on_solved_system():
    mesh = hexagon(8)
    problem = HelmholtzProblem(5.0)
    penalty = PenaltyConfig.preset_a(5.0, mesh.h)
    field, _ = solve_dg(mesh, problem, penalty)
    res = discrete_energy_identities(field, problem, penalty)
    assert res.real_residual <= 1e-6 * res.scale
    assert res.imag_residual <= 1e-6 * res.scale


def test_energy_identities_zero_data():
    mesh = hexagon(4)

    class Silent:
        k = 10.0
        has_dirichlet_data = False

        def source(self, p):
            return np.zeros(np.asarray(p).reshape(-1, 2).shape[0])

        def robin_data(self, p, n):
            return np.zeros(np.asarray(p).reshape(-1, 2).shape[0], dtype=complex)

    problem = Silent()
    penalty = PenaltyConfig(gamma0=1.0, gamma1=0.1, beta1=1.0)
    field, _ = solve_dg(mesh, problem, penalty)
    assert l2_norm(field) <= 1e-10
    res = discrete_energy_identities(field, problem, penalty)
    assert res.real_residual <= 1e-12
    assert res.imag_residual <= 1e-12


def test_jump_energy_balance_nonnegative():
    # imaginary part of the solved energy balance: jump energies plus the
    # boundary term match the data term, so the data term cannot be negative
    mesh = hexagon(6)
    problem = HelmholtzProblem(7.0)
    penalty = PenaltyConfig(gamma0=1.0, gamma1=0.1, beta1=1.0)
    field, _ = solve_dg(mesh, problem, penalty)
    from helmdg.analysis import jump_quadratic_forms
    from helmdg.assembly import assemble_rhs, assemble_robin_boundary

    q0, q1, qb = jump_quadratic_forms(field)
    robin = assemble_robin_boundary(field.space)
    boundary = np.vdot(field.coeffs, robin.matvec(field.coeffs)).real
    jump_energy = 1.0 * q0 + 0.1 * q1 + 1.0 * qb + problem.k * boundary
    load = assemble_rhs(field.space, problem, penalty)
    data = np.vdot(field.coeffs, load).imag
    assert jump_energy >= -1e-12
    assert jump_energy == pytest.approx(data, rel=1e-6)


def test_reported_errors_quadrature_independent():
    # doubling the quadrature degree must not move reported errors by more
    # than 1%, confirming the default degree resolves the oscillation
    mesh = hexagon(10)
    problem = HelmholtzProblem(10.0)
    penalty = PenaltyConfig.preset_a(10.0, mesh.h)
    field, _ = solve_dg(mesh, problem, penalty)
    for fn in (lambda d: broken_h1_seminorm_error(field, problem, d),
               lambda d: dg_norm_error(field, problem, penalty, d),
               lambda d: l2_error(field, problem, d)):
        base, refined = fn(5), fn(10)
        assert abs(refined - base) <= 0.01 * base


def test_csta_bound_hexagon_no_dirichlet_term():
    mesh = hexagon(4)
    k = 10.0
    penalty = PenaltyConfig(gamma0=2.0, gamma1=0.5, beta1=1.0)
    bound = theoretical_csta(mesh, penalty, k)
    h = mesh.h
    interior = (k * k + 1.0) / 2.0 + np.sqrt(2.0 / 0.5) / h + np.sqrt(2.0) + 1.0
    expected = 1.0 / k + 1.0 / k**2 + interior / k**2
    assert bound == pytest.approx(expected, rel=1e-12)


def test_csta_bound_includes_dirichlet_edges():
    mesh = square_hole(3)
    penalty = PenaltyConfig(gamma0=2.0, gamma1=0.5, beta1=1.0)
    k = 5.0
    with_d = theoretical_csta(mesh, penalty, k)
    h = float(mesh.edge_length[mesh.dirichlet_edges].max())
    d_term = (1.0 / 2.0 + 2.0 / h + np.sqrt(2.0) + 1.0) / k**2
    hexa = hexagon(3)
    assert with_d > theoretical_csta(hexa, penalty, k) - 1.0  # sanity: finite
    assert with_d == pytest.approx(
        theoretical_csta_without_dirichlet(mesh, penalty, k) + d_term, rel=1e-12
    )


def theoretical_csta_without_dirichlet(mesh, penalty, k):
    interior_h = mesh.edge_length[mesh.interior_edges]
    term = ((k * k + 1.0) / 2.0 + np.sqrt(2.0 / 0.5) / interior_h
            + np.sqrt(2.0) + 1.0).max()
    return 1.0 / k + 1.0 / k**2 + float(term) / k**2


def test_csta_monotone_in_gamma1():
    mesh = hexagon(4)
    k = 10.0
    bounds = [theoretical_csta(mesh, PenaltyConfig(gamma0=1.0, gamma1=g, beta1=1.0), k)
              for g in (0.05, 0.1, 0.5, 2.0)]
    assert all(b1 >= b2 for b1, b2 in zip(bounds, bounds[1:]))


def test_csta_preset_a_large_k_scaling():
    mesh = hexagon(20)
    h = mesh.h
    for k in (1e2, 1e4):
        penalty = PenaltyConfig.preset_a(k, h)
        bound = theoretical_csta(mesh, penalty, k)
        predicted = 1.0 / k + (k * k * h) ** (-2.0 / 3.0) * 0.1 ** (-1.0 / 3.0)
        assert 0.5 * predicted <= bound <= 20.0 * predicted


def test_csta_rejects_degenerate_parameters():
    mesh = hexagon(2)
    with pytest.raises(ValueError):
        theoretical_csta(mesh, PenaltyConfig(gamma0=0.0, gamma1=0.1, beta1=1.0), 5.0)
    with pytest.raises(ValueError):
        theoretical_csta(mesh, PenaltyConfig.preset_b(), 5.0)  # complex gamma1
