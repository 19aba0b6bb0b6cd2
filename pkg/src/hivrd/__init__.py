"""Virus dynamics in a heterogeneous 2D periodic environment.

Numerical library for the three-component within-host model (target cells,
infected cells, diffusing virions) on the periodic square: the principal
eigenvalue that decides whether infection can establish, the monotone solver
for the positive steady state, IMEX time integration with invariant-region
monitoring, Fourier-mode stability of the constant-coefficient infected
state, and the homogenized limit of rapidly alternating source/sink media.
"""

from .dynamics import (
    EvolveConfig,
    InvariantRegion,
    State,
    Trajectory,
    dt_max,
    dt_max_scalar,
    evolve,
    evolve_scalar,
    inoculum_state,
    invariant_region,
    phase_portrait,
    step,
)
from .eigen import EigenResult, instability_eigenvalue, lambda0, lambda_curve, principal_eigen
from .grid import (
    GridSpec,
    ScalarField,
    helmholtz_solve,
    l2_norm,
    laplacian,
    mean,
    rayleigh_quotient,
    read_field_csv,
    sup_norm,
    write_field_csv,
)
from .homogenize import (
    HomogStudy,
    UnitCell,
    cell_mean,
    convergence_study,
    homogenized_limit,
    tile,
)
from .model import (
    EquilibriumTriple,
    ModelParams,
    classify_sites,
    infected_equilibrium_constant,
    infected_from_V,
    params_from_r0,
    reproductive_ratio,
    uninfected_equilibrium,
)
from .scenario import random_r0_field
from .stability import (
    ModeStability,
    StabilityReport,
    characteristic_cubic,
    mode_eigenvalues,
    mode_matrix_roots,
    routh_hurwitz,
    stability_report,
)
from .steady import (
    SteadyResult,
    lower_solution,
    monotone_iterate,
    steady_residual,
    upper_solution,
)

__version__ = "0.1.0"
