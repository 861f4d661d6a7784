"""chillwave: energy-stable second-order time stepping for the
Cahn-Hilliard equation on a 2-D Legendre-Galerkin spectral discretization,
with an experiment harness for dissipation, conservation, and convergence
studies."""

from .errors import (
    ChillwaveError,
    MeanNotZero,
    NonFinite,
    QuadratureError,
    SingularSystem,
    SolveFailed,
)
from .potential import (
    PotentialSpec,
    lipschitz_bound,
    potential_deriv,
    potential_second_deriv,
    potential_value,
    second_derivative_bound,
)
from .spectral1d import (
    Basis1D,
    assemble_basis,
    backward_transform_1d,
    forward_transform_1d,
    gauss_legendre,
    legendre_values,
)
from .field2d import (
    Field,
    NodalGrid,
    from_nodal,
    h1_seminorm_sq,
    hminus1_norm,
    inner_hminus1,
    inner_l2,
    inv_neumann_laplacian,
    mean_value,
    nonlinear_projection,
    norm_l2,
    read_snapshot,
    to_nodal,
    write_snapshot,
)
from .timestepping import (
    SchemeParams,
    State,
    StepOperator,
    bdf2_smallstep_threshold,
    bootstrap_first_step,
    build_step_operator,
    evolve_first_order,
    step,
    sufficient_stabilizers,
)
from .diagnostics import (
    EnergyTrace,
    TraceRow,
    energy_eps,
    error_norms,
    modified_energy,
    stability_verdict,
)
from .harness import (
    ConvergenceRow,
    RunConfig,
    SweepConfig,
    SweepResult,
    convergence_study,
    default_ladder,
    generate_phi0,
    prepare_phi1,
    run_simulation,
    splitmix64,
    sweep_min_stabilizer,
)

__version__ = "0.1.0"
