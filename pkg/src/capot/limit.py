"""Large-capacity limit: recover classical optimal transport as hbar -> ∞.

With the flat capacity hbar ≡ k the dual functional obeys the exact
identity ∬[s+u+v]_+ dxdy = (I_k(u,v) + ∫uf + ∫vg)/k, so along a sweep of
growing k the positive-part mass of the potentials decays like 1/k and
the limit potentials satisfy s+u+v <= 0 — the admissibility constraint of
the unconstrained dual. The sweep solves primal and dual at each k and
records everything needed to observe this.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dual import DualPotentials, minimize_dual
from .errors import InputError
from .grid import Kernel, Marginal, Problem, TransportPlan
from .primal import solve_primal

__all__ = ["SweepPoint", "SweepResult", "solve_unconstrained", "limit_sweep", "min_capacity_level"]


@dataclass(frozen=True)
class SweepPoint:
    k: float
    primal_value: float
    dual_value: float
    mean_uf: float
    mean_vg: float
    pos_part_mass: float  # ∬ [s + u_k + v_k]_+ dxdy (plain volume, no capacity factor)
    plan_distance: float  # weighted L1 distance to the unconstrained optimal plan
    potential_l1: float  # ||u_k||_1 + ||v_k||_1, weighted
    dual_gap: float


@dataclass(frozen=True)
class SweepResult:
    points: tuple
    unconstrained_value: float
    unconstrained_plan: TransportPlan
    eta: float
    mean_bound: float  # (unconstrained_value + eta ||s||_1 ||f⊗g||_∞) / (eta - 1)


def min_capacity_level(f: Marginal, g: Marginal) -> float:
    """Smallest admissible sweep capacity: max of the product density plus one."""
    return float(np.max(np.outer(f.density, g.density))) + 1.0


def solve_unconstrained(f: Marginal, g: Marginal, s: Kernel):
    """Classical optimal transport between f and g.

    Same transportation simplex, with the per-cell capacity set to the
    total mass so it never binds. Returns (plan, value, potentials); the
    potentials satisfy s+u+v <= 0 everywhere with equality on the support
    of the plan.
    """
    mass_f = float(f.density @ f.axis.weights)
    mass_g = float(g.density @ g.axis.weights)
    if abs(mass_f - mass_g) > 1e-9:
        raise InputError(f"marginal masses differ: {mass_f!r} vs {mass_g!r}")
    cw = np.outer(f.axis.weights, g.axis.weights)
    hbar = Kernel(mass_f / cw, "capacity")
    problem = Problem(x=f, y=g, hbar=hbar, s=s, eta=2.0)
    sol = solve_primal(problem)
    pots = DualPotentials.from_data(
        sol.u, sol.v, f.density, f.axis.weights, g.density, g.axis.weights
    )
    return sol.plan, sol.value, pots


def limit_sweep(f: Marginal, g: Marginal, s: Kernel, ks=None, *,
                dual_tol: float = 1e-6, dual_max_iter: int = 50_000) -> SweepResult:
    """Solve the capacity-constrained problem at hbar ≡ k for each k and compare.

    Every k must be at least K = max(f⊗g)+1, which keeps a strict margin
    eta = K/(K-1) > 1 above the product witness at every level; the
    default grid is K*{1, 2, 4, ..., 2^8}, geometric so the 1/k decay
    shows up evenly on a log scale. Points are reported in increasing k
    order.
    """
    level = min_capacity_level(f, g)
    if ks is None:
        ks = [level * 2.0**p for p in range(9)]
    ks = sorted(float(k) for k in ks)
    if not ks:
        raise InputError("need at least one capacity level")
    if ks[0] < level - 1e-12:
        raise InputError(f"capacity level {ks[0]} is below the admissible floor {level}")
    eta = level / (level - 1.0)

    plan_inf, value_inf, _ = solve_unconstrained(f, g, s)
    wx, wy = f.axis.weights, g.axis.weights
    cw = np.outer(wx, wy)

    points = []
    for k in ks:
        problem = Problem(
            x=f, y=g, hbar=Kernel(np.full((f.cell_count, g.cell_count), k), "capacity"),
            s=s, eta=eta,
        )
        primal = solve_primal(problem)
        dual = minimize_dual(
            problem, target_value=primal.value, tol=dual_tol, max_iter=dual_max_iter
        )
        u, v = dual.potentials.u, dual.potentials.v
        sigma = s.values + u[:, None] + v[None, :]
        points.append(SweepPoint(
            k=k,
            primal_value=primal.value,
            dual_value=dual.value,
            mean_uf=dual.potentials.mean_uf,
            mean_vg=dual.potentials.mean_vg,
            pos_part_mass=float(np.sum(np.maximum(sigma, 0.0) * cw)),
            plan_distance=float(np.sum(np.abs(primal.plan.values - plan_inf.values) * cw)),
            potential_l1=float(np.abs(u) @ wx + np.abs(v) @ wy),
            dual_gap=float(dual.gap),
        ))

    norm_s = float(np.sum(np.abs(s.values) * cw))
    sup_fg = float(np.max(np.outer(f.density, g.density)))
    return SweepResult(
        points=tuple(points),
        unconstrained_value=value_inf,
        unconstrained_plan=plan_inf,
        eta=eta,
        mean_bound=(value_inf + eta * norm_s * sup_fg) / (eta - 1.0),
    )
