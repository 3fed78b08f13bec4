"""Interior-penalty DG and conforming P1 solvers for the 2D Helmholtz
equation with absorbing (Robin) and sound-soft (Dirichlet) boundaries,
plus the experiment harness that drives the high-wave-number studies."""

from .analysis import (
    ErrorReport,
    broken_h1_seminorm,
    broken_h1_seminorm_error,
    compute_error_report,
    dg_norm,
    dg_norm_error,
    discrete_energy_identities,
    exact_h1_seminorm,
    exact_l2_norm,
    l2_error,
    l2_norm,
    rellich_identity_residuals,
    theoretical_csta,
)
from .assembly import (
    PenaltyConfig,
    assemble_ah,
    assemble_fem_system,
    assemble_full_system,
    assemble_mass,
    assemble_robin_boundary,
    assemble_rhs,
    consistency_residual,
    elliptic_projection_matrix,
    elliptic_projection_rhs,
    expand_fem_solution,
    penalty_for,
)
from .linalg import (
    IterationError,
    SingularSystemError,
    SolveReport,
    SparseComplexMatrix,
    rcm_order,
    solve,
)
from .mesh import (
    Edge,
    EdgeKind,
    Element,
    Mesh,
    MeshTopologyError,
    Point2,
    build_hexagon_mesh,
    build_square_with_hole_mesh,
    classify_edges,
    mesh_from_arrays,
    relabel_elements,
    write_mesh_dump,
)
from .problem import HelmholtzProblem, PlaneWaveProblem
from .spaces import (
    DGSpace,
    FEMSpace,
    SolutionField,
    evaluate_field,
    fe_interpolate,
    fem_to_dg,
    make_fem_space,
)
from .specfun import bessel_j0, bessel_j1, sinc_scaled

__version__ = "0.1.0"
