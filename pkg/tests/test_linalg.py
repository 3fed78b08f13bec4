import numpy as np
import pytest

from helmdg import (
    DGSpace,
    HelmholtzProblem,
    IterationError,
    PenaltyConfig,
    SingularSystemError,
    SparseComplexMatrix,
    assemble_full_system,
    rcm_order,
    solve,
)

from conftest import hexagon


def identity_matrix(n: int) -> SparseComplexMatrix:
    return SparseComplexMatrix.from_triplets(
        n, np.arange(n), np.arange(n), np.ones(n, dtype=complex)
    )


def random_well_conditioned(rng, n: int) -> SparseComplexMatrix:
    mat = SparseComplexMatrix(n)
    mat.add_entries(np.arange(n), np.arange(n),
                    2.0 + rng.uniform(0.5, 1.5, n) + 1j * rng.uniform(-0.5, 0.5, n))
    nnz = 4 * n
    mat.add_entries(rng.integers(0, n, nnz), rng.integers(0, n, nnz),
                    0.05 * (rng.standard_normal(nnz) + 1j * rng.standard_normal(nnz)))
    return mat.compress()


def test_identity_solve_exact():
    n = 5
    b = np.arange(1, n + 1, dtype=complex) * (1 + 2j)
    x, report = solve(identity_matrix(n), b, method="dense")
    assert np.array_equal(x, b)
    assert report.residual == 0.0


def test_two_by_two_hand_inverted():
    mat = SparseComplexMatrix.from_triplets(2, [0, 1], [0, 1], [1j, 2.0])
    x, _ = solve(mat, np.array([1.0, 2.0], dtype=complex))
    assert x[0] == pytest.approx(-1j, abs=1e-15)
    assert x[1] == pytest.approx(1.0, abs=1e-15)


def test_band_and_dense_agree_on_random_system(rng):
    mat = random_well_conditioned(rng, 50)
    b = rng.standard_normal(50) + 1j * rng.standard_normal(50)
    x_dense, _ = solve(mat, b, method="dense")
    x_band, rep = solve(mat, b, method="band")
    assert rep.method == "band"
    assert np.linalg.norm(x_dense - x_band) <= 1e-10 * np.linalg.norm(x_dense)
    x_sparse, _ = solve(mat, b, method="sparse")
    assert np.linalg.norm(x_dense - x_sparse) <= 1e-10 * np.linalg.norm(x_dense)


def test_compression_sums_duplicates_and_drops_zeros():
    mat = SparseComplexMatrix(2)
    mat.add_entries([0, 0, 1, 1], [1, 1, 0, 0], [1.0, 2.5, 1.0, -1.0])
    mat.add_entries([0], [0], [4.0])
    mat.compress()
    dense = mat.to_dense()
    assert dense[0, 1] == 3.5
    assert dense[1, 0] == 0.0
    assert mat.nnz == 2  # the cancelled entry is gone


def test_index_validation():
    mat = SparseComplexMatrix(3)
    with pytest.raises(ValueError):
        mat.add_entries([3], [0], [1.0])
    with pytest.raises(ValueError):
        SparseComplexMatrix(0)


def test_matvec_matches_dense(rng):
    mat = random_well_conditioned(rng, 23)
    x = rng.standard_normal(23) + 1j * rng.standard_normal(23)
    assert np.allclose(mat.matvec(x), mat.to_dense() @ x, atol=1e-13)


def test_rcm_on_diagonal_matrix():
    mat = identity_matrix(6)
    perm = rcm_order(mat)
    assert sorted(perm.tolist()) == list(range(6))
    assert mat.bandwidth(perm) == 0


def test_rcm_recovers_chain_bandwidth(rng):
    n = 40
    shuffle = rng.permutation(n)
    mat = SparseComplexMatrix(n)
    mat.add_entries(np.arange(n), np.arange(n), np.full(n, 2.0 + 0j))
    chain = np.arange(n - 1)
    mat.add_entries(shuffle[chain], shuffle[chain + 1], np.ones(n - 1, dtype=complex))
    mat.add_entries(shuffle[chain + 1], shuffle[chain], np.ones(n - 1, dtype=complex))
    mat.compress()
    assert mat.bandwidth(rcm_order(mat)) == 1


def test_rcm_reduces_dg_system_bandwidth():
    mesh = hexagon(8)
    space = DGSpace(mesh)
    problem = HelmholtzProblem(5.0)
    matrix, _ = assemble_full_system(space, problem, PenaltyConfig.preset_a(5.0, mesh.h))
    before = matrix.bandwidth()
    after = matrix.bandwidth(rcm_order(matrix))
    assert after < before


def test_permuted_solve_equals_direct(rng):
    mat = random_well_conditioned(rng, 60)
    b = rng.standard_normal(60) + 1j * rng.standard_normal(60)
    x_direct, _ = solve(mat, b, method="dense")
    perm = rcm_order(mat)
    inv = np.empty(60, dtype=int)
    inv[perm] = np.arange(60)
    dense = mat.to_dense()
    x_perm = np.linalg.solve(dense[np.ix_(perm, perm)], b[perm])
    x_back = np.empty(60, dtype=complex)
    x_back[perm] = x_perm
    assert np.linalg.norm(x_back - x_direct) <= 1e-10 * np.linalg.norm(x_direct)


def test_singular_matrix_raises():
    mat = SparseComplexMatrix.from_triplets(2, [0, 0, 1, 1], [0, 1, 0, 1],
                                            [1.0, 2.0, 2.0, 4.0])
    with pytest.raises(SingularSystemError):
        solve(mat, np.array([1.0, 1.0], dtype=complex), method="dense")


def test_empty_row_raises():
    mat = SparseComplexMatrix.from_triplets(3, [0, 1], [0, 1], [1.0, 1.0])
    with pytest.raises(SingularSystemError):
        solve(mat, np.ones(3, dtype=complex))


def test_zero_rhs_returns_zero_solution():
    mesh = hexagon(2)
    space = DGSpace(mesh)
    matrix, _ = assemble_full_system(space, HelmholtzProblem(3.0),
                                     PenaltyConfig.preset_a(3.0, mesh.h))
    x, report = solve(matrix, np.zeros(space.ndof, dtype=complex))
    assert np.linalg.norm(x) <= 1e-12
    assert report.residual <= 1e-12


def test_gmres_converges_with_ilu0():
    mesh = hexagon(4)
    space = DGSpace(mesh)
    problem = HelmholtzProblem(5.0)
    matrix, rhs = assemble_full_system(space, problem, PenaltyConfig.preset_a(5.0, mesh.h))
    x_direct, _ = solve(matrix, rhs, method="dense")
    x, report = solve(matrix, rhs, method="gmres")
    assert report.method == "gmres"
    assert report.iterations is not None and report.iterations >= 1
    assert report.residual <= 1e-8
    assert np.linalg.norm(x - x_direct) <= 1e-6 * np.linalg.norm(x_direct)


def test_gmres_nonconvergence_reports_best_residual():
    mesh = hexagon(6)
    space = DGSpace(mesh)
    problem = HelmholtzProblem(20.0)
    matrix, rhs = assemble_full_system(space, problem, PenaltyConfig.preset_a(20.0, mesh.h))
    with pytest.raises(IterationError) as err:
        solve(matrix, rhs, method="gmres", gmres_restart=2, gmres_max_restarts=1)
    assert err.value.best_residual > 0.0


def test_report_contents_and_residual_enforcement(rng):
    mat = random_well_conditioned(rng, 30)
    b = rng.standard_normal(30) + 1j * rng.standard_normal(30)
    _, report = solve(mat, b, method="band")
    assert report.bandwidth_after is not None
    assert report.wall_time >= 0.0
    assert report.residual <= 1e-8


def test_matrix_dump_format(tmp_path):
    mat = SparseComplexMatrix.from_triplets(2, [0, 1], [1, 0], [1 + 2j, -3.0])
    target = tmp_path / "matrix.txt"
    mat.dump(target)
    lines = target.read_text().strip().splitlines()
    assert lines[0].split() == ["0", "1", "1", "2"]
    assert lines[1].split() == ["1", "0", "-3", "0"]


def test_unknown_method_rejected():
    with pytest.raises(ValueError):
        solve(identity_matrix(2), np.zeros(2, dtype=complex), method="qr")
