"""pauliflow: pseudo-spectral solver for coupled Pauli spinor-field systems.

Simulates a 2-spinor under the magnetic Schrodinger Hamiltonian with
self-consistent scalar and vector potentials on a periodic box, in either
the Coulomb-gauged (Darwin) or Lorenz-gauged (Poisswell) closure, with an
optional dissipative regularization whose energy decay and charge
conservation are certified by a built-in diagnostics suite.
"""

from .grid import (
    Grid,
    ScalarField,
    VectorField,
    make_grid,
    l2_norm,
    derivative,
    gradient,
    divergence,
    curl,
    inv_neg_laplacian,
    leray_project,
    sobolev_norm,
    spectral_restrict,
    apply_dealias,
)
from .spinor import SIGMA, SpinorField, sigma_dot, inner_product, charge_density, spin_density
from .magnetics import (
    magnetic_gradient,
    sigma_magnetic_gradient,
    magnetic_laplacian,
    spin_magnetic_laplacian,
    current_density,
)
from .fields import (
    GaugeKind,
    ASolveOptions,
    ASolveResult,
    NonConvergence,
    solve_V,
    solve_A,
    a_equation_residual,
    gauge_residual,
    EllipticEstimateReport,
    elliptic_estimate_report,
)
from .evolution import (
    StepScheme,
    SimState,
    make_state,
    apply_H,
    expectation_H,
    expectation_H_via_fields,
    charge,
    energy,
    regularized_rhs,
    step,
    evolve,
    EvolveResult,
    epsilon_sweep,
    SweepReport,
    h1_bound_check,
    H1BoundReport,
    PicardNonConvergence,
    BlowUpGuardTriggered,
)
from .diagnostics import (
    DiagnosticsRecord,
    records_to_csv,
    continuity_residual,
    dissipation_residual,
    IdentityReport,
    identity_suite,
)
from .snapshot import SnapshotError, write_snapshot, read_snapshot
from .initial_data import InitialDataSpec, make_initial_data
from .config import (
    ConfigError,
    MissingKeyError,
    ConfigTypeError,
    InvariantViolation,
    RunConfig,
    GateOptions,
    parse_config,
    load_config,
    resolved_config_text,
)

__version__ = "0.1.0"
