"""Covariant measurements on two parallel or antiparallel spins.

Collective and LOCC measurement classes, their optimal fidelities, and
eigenvalue / Monte Carlo cross-checks.
"""

from .covariant import (
    CovariantSeed,
    DesignError,
    DiscretePOVM,
    MeasurementClass,
    discretize,
    is_admissible,
    numeric_admissibility,
    oriented_element,
    outcome_density,
    seed_operator,
)
from .fidelity import (
    FidelitySpec,
    average_fidelity,
    average_fidelity_by_quadrature,
    named_spec,
    project_legendre,
)
from .montecarlo import SimulationReport, estimate_fidelity, estimate_locc_strategy
from .operators import (
    Rotation,
    TwoSpinOperator,
    antiparallel_state,
    eigenvalues,
    make_operator,
    parallel_state,
    partial_spin_flip,
    rotate_operator,
    to_dense,
    trace_pair,
)
from .optimize import Optimum, brute_force_optimum, optimize

__version__ = "0.1.0"
