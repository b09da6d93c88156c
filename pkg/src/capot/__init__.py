"""Capacity-constrained optimal transport on discretized domains.

Solves sup ∬ h s over joint densities 0 <= h <= hbar with prescribed
marginals, minimizes the dual functional over potential pairs, certifies
joint optimality through the duality gap and complementary slackness, and
reproduces classical optimal transport in the large-capacity limit.
"""

from .dual import (
    CoercivityDiagnostics,
    DualPotentials,
    DualSolveResult,
    coercivity_diagnostics,
    eval_I,
    minimize_dual,
    normalize,
    subgradient_I,
)
from .errors import (
    CapotError,
    CoercivityError,
    DimensionMismatch,
    InfeasibleError,
    InputError,
    InvalidPlanError,
    IterationLimitError,
    TooLargeError,
)
from .feasibility import FeasibilityCertificate, brute_force_levin, check_feasibility
from .grid import (
    Axis,
    Kernel,
    Marginal,
    Problem,
    TransportPlan,
    builtin_surplus,
    integrate_surplus,
    validate_plan,
)
from .instances import generate_instance
from .kernels import BACKEND_NAME as kernel_backend
from .limit import SweepPoint, SweepResult, limit_sweep, min_capacity_level, solve_unconstrained
from .oracle import brute_force_primal
from .primal import PrimalSolution, StructureReport, solve_primal, support_structure
from .verify import SlacknessReport, verify_slackness, weak_duality_gap

__version__ = "0.1.0"
