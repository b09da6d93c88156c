"""The dual side: evaluate and minimize the convex functional

    I(u, v) = ∬ [s + u + v]_+ hbar dxdy - ∫ u f dx - ∫ v g dy,

whose infimum over potential pairs equals the primal optimum. I is
piecewise linear and invariant under (u, v) -> (u+k, v-k), so descent is
run on the normalized subspace where the weighted means ∫uf and ∫vg
agree; the shift is projected out after every step.

Also computes the coercivity diagnostics: the mean bound (valid given a
witness density h with hbar >= eta*h) and the oscillation bound (valid
given hbar >= eps*f⊗g), which are theorems and double as self-checks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import kernels
from .errors import CoercivityError, DimensionMismatch, InputError
from .feasibility import check_feasibility
from .grid import Problem, TransportPlan

__all__ = [
    "DualPotentials",
    "DualSolveResult",
    "CoercivityDiagnostics",
    "eval_I",
    "subgradient_I",
    "normalize",
    "minimize_dual",
    "coercivity_diagnostics",
]


@dataclass(frozen=True)
class DualPotentials:
    """A pair of potentials together with their weighted means ∫uf and ∫vg."""

    u: np.ndarray
    v: np.ndarray
    mean_uf: float
    mean_vg: float

    def __post_init__(self):
        for name in ("u", "v"):
            arr = np.array(getattr(self, name), dtype=float, copy=True)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @staticmethod
    def from_data(u, v, f, wx, g, wy) -> "DualPotentials":
        u = np.asarray(u, dtype=float)
        v = np.asarray(v, dtype=float)
        return DualPotentials(u, v, float((u * f) @ wx), float((v * g) @ wy))

    @staticmethod
    def build(u, v, problem: Problem) -> "DualPotentials":
        u = np.asarray(u, dtype=float)
        v = np.asarray(v, dtype=float)
        if u.shape != (problem.m,) or v.shape != (problem.n,):
            raise DimensionMismatch("potential lengths must match the grid")
        return DualPotentials.from_data(u, v, problem.f, problem.wx, problem.g, problem.wy)

    @staticmethod
    def zeros(problem: Problem) -> "DualPotentials":
        return DualPotentials.build(np.zeros(problem.m), np.zeros(problem.n), problem)


@dataclass(frozen=True)
class DualSolveResult:
    potentials: DualPotentials
    value: float  # best I(u,v) seen
    gap: Optional[float]  # value - target, when a primal target was supplied
    iterations: int
    converged: bool
    eta_feasible: bool  # attainment hypothesis: polytope non-empty at capacity hbar/eta
    trace: Optional[tuple] = None  # (value, DualPotentials) per iterate, when requested


@dataclass(frozen=True)
class CoercivityDiagnostics:
    """Numbers entering the mean and oscillation bounds, plus the bounds themselves.

    mean_upper is None when no witness density exists at capacity hbar/eta
    (the mean bound needs one); the oscillation fields are always filled.
    eps_prime = min(eps, min f, min g) feeds the composite potential-norm
    bound ||u||_1 <= (|mean_uf| + sigma_u)/eps_prime; those fields are
    None when eps_prime = 0 (some marginal cell has zero density). The
    inequalities are asserted by check(), which raises CoercivityError on
    violation: they are theorems whenever their hypotheses hold, so a
    violation means an implementation bug.
    """

    eta: float
    eps: float
    eps_prime: float
    I_value: float
    mean_sum: float
    mean_lower: float
    mean_upper: Optional[float]
    sigma_u: float
    osc_lhs_u: float
    osc_rhs_u: float
    sigma_v: float
    osc_lhs_v: float
    osc_rhs_v: float
    norm_u: float  # ||u||_1, weighted
    norm_v: float
    norm_bound_u: Optional[float]
    norm_bound_v: Optional[float]

    def check(self, slack: float = 1e-9) -> None:
        tol = slack * (1.0 + abs(self.I_value) + abs(self.mean_sum))
        if self.mean_lower > self.mean_sum + tol:
            raise CoercivityError(
                f"mean bound failed: -I = {self.mean_lower} > {self.mean_sum}", self
            )
        if self.mean_upper is not None and self.mean_sum > self.mean_upper + tol:
            raise CoercivityError(
                f"mean bound failed: {self.mean_sum} > upper {self.mean_upper}", self
            )
        if self.eps > 0:
            for lhs, rhs, side in (
                (self.osc_lhs_u, self.osc_rhs_u, "u"),
                (self.osc_lhs_v, self.osc_rhs_v, "v"),
            ):
                if lhs > rhs + tol:
                    raise CoercivityError(
                        f"oscillation bound failed on {side}: {lhs} > {rhs}", self
                    )
        for norm, bound, side in (
            (self.norm_u, self.norm_bound_u, "u"),
            (self.norm_v, self.norm_bound_v, "v"),
        ):
            if bound is not None and norm > bound + tol * (1.0 + abs(bound)):
                raise CoercivityError(
                    f"norm bound failed on {side}: {norm} > {bound}", self
                )


def _check_dims(potentials: DualPotentials, problem: Problem):
    if potentials.u.shape != (problem.m,) or potentials.v.shape != (problem.n,):
        raise DimensionMismatch("potential lengths must match the grid")


def eval_I(potentials: DualPotentials, problem: Problem) -> float:
    """Value of the dual functional at the given potentials."""
    _check_dims(potentials, problem)
    return kernels.eval_dual(
        problem.s.values, problem.hbar.values, problem.wx, problem.wy,
        problem.f, problem.g, potentials.u, potentials.v,
    )


def subgradient_I(potentials: DualPotentials, problem: Problem):
    """A subgradient of I at (u, v), selecting the strict-positivity indicator at kinks."""
    _check_dims(potentials, problem)
    du = np.empty(problem.m)
    dv = np.empty(problem.n)
    kernels.eval_dual_with_subgrad(
        problem.s.values, problem.hbar.values, problem.wx, problem.wy,
        problem.f, problem.g, potentials.u, potentials.v, du, dv,
    )
    return du, dv


def normalize(potentials: DualPotentials, problem: Problem) -> DualPotentials:
    """Shift (u, v) -> (u-k, v+k) so the weighted means agree; I is unchanged."""
    _check_dims(potentials, problem)
    k = 0.5 * (potentials.mean_uf - potentials.mean_vg)
    if k == 0.0:
        return potentials
    return DualPotentials.build(potentials.u - k, potentials.v + k, problem)


def minimize_dual(
    problem: Problem,
    *,
    max_iter: int = 50_000,
    tol: float = 1e-6,
    target_value: Optional[float] = None,
    trace: bool = False,
) -> DualSolveResult:
    """Projected subgradient descent on the normalized subspace.

    With a primal target the Polyak step (I_t - target)/|d_t|^2 is used on
    a deflected direction d_t = g_t + beta_t d_{t-1} (beta_t zeroes any
    backtracking component, the Camerini-Fratta-Maffioli rule: plain
    subgradient steps zig-zag and stall on piecewise-linear objectives);
    convergence means best-gap <= tol. Without a target the schedule is
    (1+max|s|)/sqrt(t) on the raw subgradient and the run stops at the
    1e-10 step floor or at max_iter. Requires strictly positive
    marginals. The attainment hypothesis (a plan fitting under hbar/eta)
    is probed and reported, not enforced: when it fails the descent still
    runs and converged is judged purely from the gap.
    """
    if max_iter < 1:
        raise InputError("max_iter must be >= 1")
    if not (problem.x.strictly_positive and problem.y.strictly_positive):
        raise InputError("dual solve requires strictly positive marginal densities")
    eta_feasible = check_feasibility(problem, 1.0 / problem.eta).feasible

    s, hb = problem.s.values, problem.hbar.values
    wx, wy, f, g = problem.wx, problem.wy, problem.f, problem.g
    u = np.zeros(problem.m)
    v = np.zeros(problem.n)
    du = np.empty(problem.m)
    dv = np.empty(problem.n)
    prev_du = np.zeros(problem.m)
    prev_dv = np.zeros(problem.n)

    base_step = 1.0 + float(np.max(np.abs(s)))
    deflect = 1.5
    best_value = math.inf
    best_uv = (u.copy(), v.copy())
    history = [] if trace else None
    converged = False
    floor_reached = False
    iterations = 0

    for it in range(1, max_iter + 1):
        value = kernels.eval_dual_with_subgrad(s, hb, wx, wy, f, g, u, v, du, dv)
        iterations = it
        if history is not None:
            history.append((value, DualPotentials.build(u, v, problem)))
        if value < best_value:
            best_value = value
            best_uv = (u.copy(), v.copy())

        if target_value is not None and best_value - target_value <= tol:
            converged = True
            break
        if target_value is not None:
            prev2 = float(prev_du @ prev_du + prev_dv @ prev_dv)
            if prev2 > 0.0:
                beta = max(0.0, -deflect * float(prev_du @ du + prev_dv @ dv) / prev2)
                du += beta * prev_du
                dv += beta * prev_dv
        gnorm2 = float(du @ du + dv @ dv)
        if gnorm2 <= 1e-300:
            # Exact (deflected) subgradient zero: at the minimum of I.
            converged = target_value is None or best_value - target_value <= tol
            floor_reached = True
            break
        if target_value is not None:
            step = max(value - target_value, 0.0) / gnorm2
        else:
            step = base_step / math.sqrt(it)
        if step < 1e-10:
            floor_reached = True
            break
        u -= step * du
        v -= step * dv
        prev_du[:] = du
        prev_dv[:] = dv
        k = 0.5 * (float((u * f) @ wx) - float((v * g) @ wy))
        u -= k
        v += k

    if target_value is None:
        converged = floor_reached
        gap = None
    else:
        gap = best_value - target_value
        converged = gap <= tol

    return DualSolveResult(
        potentials=DualPotentials.build(*best_uv, problem),
        value=best_value,
        gap=gap,
        iterations=iterations,
        converged=converged,
        eta_feasible=eta_feasible,
        trace=tuple(history) if history is not None else None,
    )


def coercivity_diagnostics(
    potentials: DualPotentials,
    problem: Problem,
    witness: Optional[TransportPlan] = None,
    check: bool = True,
) -> CoercivityDiagnostics:
    """Evaluate the mean and oscillation bounds at the given potentials.

    The witness is a density with the problem's marginals fitting under
    hbar/eta; by default it is taken from the max-flow check at that
    scale (pass one in to amortize across many evaluations). eps is the
    largest admissible constant with hbar >= eps*f⊗g, capped at 1.
    """
    _check_dims(potentials, problem)
    value = eval_I(potentials, problem)
    muf, mvg = potentials.mean_uf, potentials.mean_vg
    cw = problem.cell_weights

    if witness is None:
        cert = check_feasibility(problem, 1.0 / problem.eta)
        witness = cert.plan if cert.feasible else None
    mean_upper = None
    if witness is not None:
        norm_eta_hs = problem.eta * float(
            np.sum(np.abs(witness.values * problem.s.values) * cw)
        )
        mean_upper = (value + norm_eta_hs) / (problem.eta - 1.0)

    fg = np.outer(problem.f, problem.g)
    mask = fg > 0
    eps = float(min(1.0, (problem.hbar.values[mask] / fg[mask]).min())) if mask.any() else 0.0
    eps_prime = float(min(eps, problem.f.min(), problem.g.min()))

    norm_sfg = float(np.sum(np.abs(problem.s.values * fg) * cw))
    sigma_u = float(np.abs(potentials.u * problem.f - muf) @ problem.wx)
    sigma_v = float(np.abs(potentials.v * problem.g - mvg) @ problem.wy)
    osc_rhs = value + norm_sfg + abs(muf) + abs(mvg)
    norm_u = float(np.abs(potentials.u) @ problem.wx)
    norm_v = float(np.abs(potentials.v) @ problem.wy)

    diag = CoercivityDiagnostics(
        eta=problem.eta,
        eps=eps,
        eps_prime=eps_prime,
        I_value=value,
        mean_sum=muf + mvg,
        mean_lower=-value,
        mean_upper=mean_upper,
        sigma_u=sigma_u,
        osc_lhs_u=eps / 6.0 * sigma_u,
        osc_rhs_u=osc_rhs,
        sigma_v=sigma_v,
        osc_lhs_v=eps / 6.0 * sigma_v,
        osc_rhs_v=osc_rhs,
        norm_u=norm_u,
        norm_v=norm_v,
        norm_bound_u=(abs(muf) + sigma_u) / eps_prime if eps_prime > 0 else None,
        norm_bound_v=(abs(mvg) + sigma_v) / eps_prime if eps_prime > 0 else None,
    )
    if check:
        diag.check()
    return diag
