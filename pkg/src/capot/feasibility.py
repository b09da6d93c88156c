"""Feasibility of the transport polytope via max-flow, with certificates.

The polytope of plans 0 <= h <= scale*hbar with marginals (f, g) is
non-empty exactly when a bipartite flow network carries one unit of flow:

    source -> x_i         capacity f_i * wx_i
    x_i    -> y_j         capacity scale * hbar_ij * wx_i * wy_j
    y_j    -> sink        capacity g_j * wy_j

By max-flow/min-cut this is equivalent to the rectangle condition

    f(A) + g(B) <= 1 + scale * ∬_{A×B} hbar      for all A ⊂ X, B ⊂ Y,

and a minimum cut with value < 1 yields a violating rectangle: A is the
source-side row set and B the complement of the source-side column set.
Either way the caller gets a constructive witness: a feasible plan (the
flow rescaled to a density) or a rectangle with positive deficit.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import TooLargeError
from .grid import Problem, TransportPlan

__all__ = ["FeasibilityCertificate", "check_feasibility", "brute_force_levin"]

# Residual capacities below this are treated as exhausted.
FLOW_TOL = 1e-12
# Max-flow value within this of 1 counts as feasible.
FEAS_TOL = 1e-9


@dataclass(frozen=True)
class FeasibilityCertificate:
    """Outcome of a feasibility check: a plan, or a deficit-positive rectangle.

    ``deficit`` is f(A) + g(B) - 1 - scale*∬_{A×B} hbar for the returned
    rectangle, i.e. the amount by which the rectangle condition fails at
    the capacity level actually checked.
    """

    feasible: bool
    scale: float
    plan: Optional[TransportPlan] = None
    rectangle: Optional[tuple] = None  # (A row indices, B column indices)
    deficit: Optional[float] = None

    def __post_init__(self):
        if self.feasible and self.rectangle is not None:
            raise ValueError("feasible certificate cannot carry a rectangle")
        if not self.feasible and (self.rectangle is None or self.plan is not None):
            raise ValueError("infeasible certificate must carry a rectangle and no plan")


def _push_relabel(cap: np.ndarray, source: int, sink: int) -> tuple[float, np.ndarray]:
    """Highest-label push-relabel with the gap heuristic on a dense capacity matrix.

    Returns (flow value, flow matrix). Real capacities; residuals below
    FLOW_TOL count as saturated, which bounds the work on float data.
    """
    nv = cap.shape[0]
    flow = np.zeros_like(cap)
    height = np.zeros(nv, dtype=int)
    excess = np.zeros(nv)
    height[source] = nv

    # Saturate all source arcs.
    for v in range(nv):
        if cap[source, v] > FLOW_TOL:
            flow[source, v] = cap[source, v]
            flow[v, source] = -cap[source, v]
            excess[v] += cap[source, v]
            excess[source] -= cap[source, v]

    max_height = 2 * nv + 1
    buckets = [[] for _ in range(max_height + 1)]
    in_bucket = np.zeros(nv, dtype=bool)
    height_count = np.zeros(max_height + 2, dtype=int)
    for v in range(nv):
        height_count[height[v]] += 1

    def activate(v):
        if v != source and v != sink and excess[v] > FLOW_TOL and not in_bucket[v]:
            buckets[height[v]].append(v)
            in_bucket[v] = True

    for v in range(nv):
        activate(v)
    highest = max((height[v] for v in range(nv) if in_bucket[v]), default=-1)

    while highest >= 0:
        if not buckets[highest]:
            highest -= 1
            continue
        u = buckets[highest].pop()
        in_bucket[u] = False
        if excess[u] <= FLOW_TOL:
            continue
        # Push to admissible neighbours.
        for v in range(nv):
            if excess[u] <= FLOW_TOL:
                break
            residual = cap[u, v] - flow[u, v]
            if residual > FLOW_TOL and height[u] == height[v] + 1:
                send = min(excess[u], residual)
                flow[u, v] += send
                flow[v, u] -= send
                excess[u] -= send
                excess[v] += send
                activate(v)
                highest = max(highest, height[v])
        if excess[u] > FLOW_TOL:
            # Relabel; apply the gap heuristic when a level empties.
            old = height[u]
            min_h = min(
                (height[v] for v in range(nv) if cap[u, v] - flow[u, v] > FLOW_TOL),
                default=max_height,
            )
            new = min(min_h + 1, max_height)
            height_count[old] -= 1
            if height_count[old] == 0 and old < nv:
                for w in range(nv):
                    if w != source and old < height[w] < nv:
                        height_count[height[w]] -= 1
                        height[w] = nv + 1
                        height_count[nv + 1] += 1
            height[u] = new
            height_count[new] += 1
            if height[u] < max_height:
                activate(u)
                highest = max(highest, height[u])
        highest = min(highest, max_height)
        while highest >= 0 and not buckets[highest]:
            highest -= 1

    return float(excess[sink]), flow


def check_feasibility(problem: Problem, scale: float = 1.0) -> FeasibilityCertificate:
    """Decide whether any plan fits under scale*hbar with the prescribed marginals.

    scale=1 checks the polytope itself; scale=1/eta checks the strict
    margin required for dual attainment. Feasible certificates carry the
    max-flow plan rescaled to a density; infeasible ones a rectangle whose
    deficit equals 1 - maxflow.
    """
    if not scale > 0:
        raise ValueError("scale must be positive")
    m, n = problem.m, problem.n
    nv = m + n + 2
    source, sink = 0, nv - 1
    rows = np.arange(1, m + 1)
    cols = np.arange(m + 1, m + n + 1)

    cap = np.zeros((nv, nv))
    cap[source, rows] = problem.f * problem.wx
    cap[np.ix_(rows, cols)] = scale * problem.hbar.values * problem.cell_weights
    cap[cols, sink] = problem.g * problem.wy

    value, flow = _push_relabel(cap, source, sink)

    if value >= 1.0 - FEAS_TOL:
        h = flow[np.ix_(rows, cols)] / problem.cell_weights
        plan = TransportPlan(np.maximum(h, 0.0))
        return FeasibilityCertificate(feasible=True, scale=scale, plan=plan)

    # Min cut: rows/columns reachable from the source in the residual graph.
    reach = np.zeros(nv, dtype=bool)
    reach[source] = True
    stack = [source]
    while stack:
        u = stack.pop()
        for v in range(nv):
            if not reach[v] and cap[u, v] - flow[u, v] > FLOW_TOL:
                reach[v] = True
                stack.append(v)
    a_idx = np.where(reach[rows])[0]
    b_idx = np.where(~reach[cols])[0]
    deficit = _rect_deficit(problem, scale, a_idx, b_idx)
    return FeasibilityCertificate(
        feasible=False, scale=scale,
        rectangle=(tuple(int(i) for i in a_idx), tuple(int(j) for j in b_idx)),
        deficit=deficit,
    )


def _rect_deficit(problem: Problem, scale: float, a_idx, b_idx) -> float:
    """f(A) + g(B) - 1 - scale*∬_{A×B} hbar, all weighted sums."""
    a_idx = np.asarray(a_idx, dtype=int)
    b_idx = np.asarray(b_idx, dtype=int)
    fa = float(np.sum(problem.f[a_idx] * problem.wx[a_idx]))
    gb = float(np.sum(problem.g[b_idx] * problem.wy[b_idx]))
    block = problem.hbar.values[np.ix_(a_idx, b_idx)] * np.outer(
        problem.wx[a_idx], problem.wy[b_idx]
    )
    return fa + gb - 1.0 - scale * float(np.sum(block))


def brute_force_levin(problem: Problem, scale: float = 1.0) -> FeasibilityCertificate:
    """Oracle: maximize the rectangle deficit over every A ⊂ X, B ⊂ Y.

    Enumerates all 2^m row subsets; for each, the best column subset is
    exact because the deficit is separable per column (include column j
    iff its margin g_j*wy_j - scale*Σ_{i∈A} hbar_ij*wx_i*wy_j is
    positive), so the search covers all 2^m * 2^n rectangles. Requires
    m, n <= 12. A feasible verdict carries no plan — this check is
    deliberately independent of the flow solver.
    """
    m, n = problem.m, problem.n
    if m > 12 or n > 12:
        raise TooLargeError(f"rectangle enumeration requires m, n <= 12, got ({m}, {n})")
    if not scale > 0:
        raise ValueError("scale must be positive")

    fmass = problem.f * problem.wx
    gmass = problem.g * problem.wy
    hmass = scale * problem.hbar.values * problem.cell_weights  # (m, n)

    # DP over bitmasks: f(A) and the per-column capacity sums of A.
    size = 1 << m
    fa = np.zeros(size)
    colsum = np.zeros((size, n))
    for a in range(1, size):
        low = (a & -a).bit_length() - 1
        prev = a & (a - 1)
        fa[a] = fa[prev] + fmass[low]
        colsum[a] = colsum[prev] + hmass[low]

    margins = gmass[None, :] - colsum  # (size, n)
    deficits = fa + np.sum(np.maximum(margins, 0.0), axis=1) - 1.0
    best_a = int(np.argmax(deficits))
    best = float(deficits[best_a])

    if best <= FEAS_TOL:
        return FeasibilityCertificate(feasible=True, scale=scale)
    a_idx = tuple(i for i in range(m) if best_a >> i & 1)
    b_idx = tuple(j for j in range(n) if margins[best_a, j] > 0)
    return FeasibilityCertificate(
        feasible=False, scale=scale, rectangle=(a_idx, b_idx),
        deficit=_rect_deficit(problem, scale, a_idx, b_idx),
    )
