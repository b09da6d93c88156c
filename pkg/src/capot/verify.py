"""Optimality certificates: duality gap and complementary slackness.

A plan h and potentials (u, v) are jointly optimal exactly when the gap
I(u,v) - ∬ h s vanishes, equivalently when the sign conditions

    s + u + v <= 0  where h = 0,
    s + u + v  = 0  where 0 < h < hbar,
    s + u + v >= 0  where h = hbar

hold cell by cell. Discretely every cell has positive weight, so the
check is exact rather than up-to-null-sets. Cell classes use a band
relative to the per-cell capacity (tol * hbar_ij), since capacities vary
across cells.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dual import DualPotentials, eval_I
from .grid import Problem, TransportPlan, integrate_surplus, validate_plan

__all__ = ["SlacknessReport", "weak_duality_gap", "verify_slackness"]


@dataclass(frozen=True)
class SlacknessReport:
    gap: float
    n_zero_ok: int
    n_mid_ok: int
    n_sat_ok: int
    violations: tuple  # (i, j, cell_class, s_ij + u_i + v_j)
    max_violation: float
    optimal: bool


def weak_duality_gap(plan: TransportPlan, potentials: DualPotentials,
                     problem: Problem) -> float:
    """I(u,v) - ∬ h s; non-negative for every feasible plan and any potentials."""
    validate_plan(problem, plan)
    return eval_I(potentials, problem) - integrate_surplus(plan, problem)


def verify_slackness(plan: TransportPlan, potentials: DualPotentials,
                     problem: Problem, tol: float = 1e-6) -> SlacknessReport:
    """Classify every cell and check its sign condition at tolerance tol.

    Classes: h <= tol*hbar is "zero", h >= (1-tol)*hbar is "saturated"
    (zero wins where hbar = 0), the rest is "middle". optimal means every
    cell passes and the duality gap is <= tol.
    """
    gap = weak_duality_gap(plan, potentials, problem)
    h = plan.values
    hb = problem.hbar.values
    sigma = problem.s.values + potentials.u[:, None] + potentials.v[None, :]

    zero = h <= tol * hb
    saturated = (h >= (1.0 - tol) * hb) & ~zero
    middle = ~zero & ~saturated
    # Violation magnitude per class; a cell passes when it is <= tol.
    excess = np.where(
        zero, np.maximum(sigma, 0.0),
        np.where(middle, np.abs(sigma), np.maximum(-sigma, 0.0)),
    )
    ok = excess <= tol

    names = np.where(zero, "zero", np.where(middle, "middle", "saturated"))
    violations = tuple(
        (int(i), int(j), str(names[i, j]), float(sigma[i, j]))
        for i, j in zip(*np.nonzero(~ok))
    )
    return SlacknessReport(
        gap=float(gap),
        n_zero_ok=int((zero & ok).sum()),
        n_mid_ok=int((middle & ok).sum()),
        n_sat_ok=int((saturated & ok).sum()),
        violations=violations,
        max_violation=float(excess.max(initial=0.0)),
        optimal=bool(ok.all() and gap <= tol),
    )
