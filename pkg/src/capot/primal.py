"""Primal solver: bounded-variable transportation simplex on the weighted grid.

The LP is solved in mass coordinates z_ij = h_ij * wx_i * wy_j with
supplies a_i = f_i*wx_i, demands b_j = g_j*wy_j and upper bounds
cap_ij = hbar_ij*wx_i*wy_j, minimizing cost c = -s per unit mass. The
basis is a spanning tree of the bipartite grid; node potentials (pi, rho)
satisfy c_ij = pi_i + rho_j on basic cells, so the reduced cost is

    r_ij = -s_ij - pi_i - rho_j = -(s_ij + u_i + v_j)   with u := pi, v := rho.

Nonbasic-at-zero cells need r >= 0 (s+u+v <= 0) and nonbasic-at-capacity
cells r <= 0 (s+u+v >= 0), which is exactly the complementary slackness
sign structure, so the returned potentials are optimal dual potentials.

Start: northwest-corner staircase when no capacity blocks it; otherwise an
extended grid with one artificial row and column (big-M costs) whose star
basis is always feasible.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InfeasibleError, IterationLimitError
from .grid import Problem, TransportPlan, integrate_surplus

__all__ = ["PrimalSolution", "StructureReport", "solve_primal", "support_structure"]

_SNAP = 1e-13  # flows this close to a bound are snapped onto it


@dataclass(frozen=True)
class PrimalSolution:
    plan: TransportPlan
    value: float
    u: np.ndarray  # row potentials (simplex duals; minimize the dual functional)
    v: np.ndarray  # column potentials
    basis_cells: tuple
    iterations: int


@dataclass(frozen=True)
class StructureReport:
    """Cell counts of the zero / saturated / strictly-between partition, plus the saturated set."""

    count_zero: int
    count_saturated: int
    count_fractional: int
    W_mask: np.ndarray

    def __post_init__(self):
        self.W_mask.setflags(write=False)


class _TreeSimplex:
    """Network simplex for the bounded transportation problem.

    Dense desk-scale implementation: adjacency, potentials and reduced
    costs are rebuilt per pivot, which keeps the state trivially
    consistent at O(M*N) per pivot.
    """

    def __init__(self, cost, cap, supply, demand):
        self.cost = np.asarray(cost, dtype=float)
        self.cap = np.asarray(cap, dtype=float)
        self.a = np.asarray(supply, dtype=float)
        self.b = np.asarray(demand, dtype=float)
        self.M, self.N = self.cost.shape
        self.z = np.zeros_like(self.cost)
        # status: 0 nonbasic at lower, 1 nonbasic at upper, 2 basic
        self.status = np.zeros_like(self.cost, dtype=np.int8)
        self.enter_tol = 1e-11 * (1.0 + float(np.max(np.abs(self.cost))))
        self.iterations = 0

    # -- starting bases ---------------------------------------------------

    def northwest_start(self) -> bool:
        """Staircase basis ignoring capacities; False if any cap blocks it."""
        ra, rb = self.a.copy(), self.b.copy()
        i = j = 0
        cells = []
        while True:
            t = min(ra[i], rb[j])
            if t > self.cap[i, j] + 1e-15:
                self.z[:] = 0.0
                return False
            cells.append((i, j))
            self.z[i, j] = t
            ra[i] -= t
            rb[j] -= t
            if i == self.M - 1 and j == self.N - 1:
                break
            if (ra[i] <= rb[j] and i < self.M - 1) or j == self.N - 1:
                i += 1
            else:
                j += 1
        for c in cells:
            self.status[c] = 2
        return True

    # -- tree machinery ---------------------------------------------------
    # Nodes: rows 0..M-1, columns M..M+N-1.

    def _adjacency(self):
        adj = [[] for _ in range(self.M + self.N)]
        for i, j in zip(*np.nonzero(self.status == 2)):
            i, j = int(i), int(j)
            adj[i].append((self.M + j, i, j))
            adj[self.M + j].append((i, i, j))
        return adj

    def _potentials(self, adj):
        pi = np.zeros(self.M)
        rho = np.zeros(self.N)
        seen = np.zeros(self.M + self.N, dtype=bool)
        seen[0] = True
        stack = [0]
        while stack:
            node = stack.pop()
            for other, i, j in adj[node]:
                if seen[other]:
                    continue
                seen[other] = True
                if other >= self.M:
                    rho[j] = self.cost[i, j] - pi[i]
                else:
                    pi[i] = self.cost[i, j] - rho[j]
                stack.append(other)
        if not seen.all():
            raise IterationLimitError("basis tree lost connectivity (internal bug)")
        return pi, rho

    def _tree_path(self, adj, start, goal):
        """Basic cells along the tree path start -> goal."""
        parent = {start: (None, None)}
        stack = [start]
        while stack:
            node = stack.pop()
            if node == goal:
                break
            for other, i, j in adj[node]:
                if other not in parent:
                    parent[other] = (node, (i, j))
                    stack.append(other)
        cells = []
        node = goal
        while parent[node][0] is not None:
            prev, cell = parent[node]
            cells.append(cell)
            node = prev
        cells.reverse()
        return cells

    # -- pivoting -----------------------------------------------------------

    def optimize(self, pivot_cap=None):
        """Pivot to optimality; returns the final node potentials."""
        if pivot_cap is None:
            pivot_cap = 1000 + 200 * self.M * self.N
        bland = False
        degenerate_run = 0
        bland_after = 10 * (self.M + self.N)

        while True:
            if self.iterations >= pivot_cap:
                raise IterationLimitError(
                    f"transportation simplex exceeded {pivot_cap} pivots"
                )
            adj = self._adjacency()
            pi, rho = self._potentials(adj)
            red = self.cost - pi[:, None] - rho[None, :]
            viol = np.where(
                self.status == 0, -red, np.where(self.status == 1, red, 0.0)
            )
            if viol.max() <= self.enter_tol:
                return pi, rho
            if bland:
                flat = int(np.flatnonzero(viol.ravel() > self.enter_tol)[0])
            else:
                flat = int(np.argmax(viol.ravel()))
            ei, ej = divmod(flat, self.N)

            theta = self._apply_pivot(adj, ei, ej, bland)
            self.iterations += 1
            if theta <= _SNAP:
                degenerate_run += 1
                if degenerate_run >= bland_after:
                    bland = True
            else:
                degenerate_run = 0

    def _apply_pivot(self, adj, ei, ej, bland):
        sigma = 1.0 if self.status[ei, ej] == 0 else -1.0
        path = self._tree_path(adj, self.M + ej, ei)
        # Around the cycle the entering cell moves by +sigma; walking the
        # tree path from the entering column back to the entering row, the
        # basic cells alternate -sigma, +sigma, -sigma, ...
        cycle = [((ei, ej), sigma)]
        sign = -sigma
        for cell in path:
            cycle.append((cell, sign))
            sign = -sign

        rooms = [
            self.cap[cell] - self.z[cell] if sgn > 0 else self.z[cell]
            for cell, sgn in cycle[1:]
        ]
        theta = min(rooms, default=np.inf)
        span = self.cap[ei, ej]
        if span <= theta:
            # Bound flip: the entering cell crosses its whole range.
            for cell, sgn in cycle:
                self.z[cell] += sgn * span
            self._snap(cycle)
            self.status[ei, ej] = 1 - self.status[ei, ej]
            return span

        blockers = [k for k, room in enumerate(rooms) if room <= theta + _SNAP]
        if bland:
            leave_k = min(blockers, key=lambda k: cycle[k + 1][0][0] * self.N + cycle[k + 1][0][1])
        else:
            leave_k = blockers[0]
        leaving, lsign = cycle[leave_k + 1]

        theta = max(theta, 0.0)
        for cell, sgn in cycle:
            self.z[cell] += sgn * theta
        self._snap(cycle)
        self.status[ei, ej] = 2
        self.status[leaving] = 0 if lsign < 0 else 1
        return theta

    def _snap(self, cycle):
        for cell, _ in cycle:
            if self.z[cell] < _SNAP:
                self.z[cell] = 0.0
            elif self.z[cell] > self.cap[cell] - _SNAP:
                self.z[cell] = self.cap[cell]


def _component_labels(adj, n_nodes):
    comp = [-1] * n_nodes
    label = 0
    for s in range(n_nodes):
        if comp[s] >= 0:
            continue
        comp[s] = label
        stack = [s]
        while stack:
            node = stack.pop()
            for other, _, _ in adj[node]:
                if comp[other] < 0:
                    comp[other] = label
                    stack.append(other)
        label += 1
    return comp


def _evict_artificial_basics(sx, m, n):
    """Swap zero-flow artificial basic cells for reduced-cost-zero real cells.

    Keeps big-M terms out of the reported potentials whenever a zero-cost
    reconnection exists. An artificial cell with no admissible replacement
    stays basic; the resulting potentials are large but still optimal.
    """
    for _ in range(m + n):
        adj = sx._adjacency()
        pi, rho = sx._potentials(adj)
        red = sx.cost - pi[:, None] - rho[None, :]
        swapped = False
        candidates = [
            (int(i), int(j))
            for i, j in zip(*np.nonzero(sx.status == 2))
            if (i == m) != (j == n) and sx.z[i, j] <= 1e-12
        ]
        for target in candidates:
            sx.status[target] = 0
            comp = _component_labels(sx._adjacency(), sx.M + sx.N)
            for ri in range(m):
                if swapped:
                    break
                for rj in range(n):
                    if sx.status[ri, rj] == 2 or comp[ri] == comp[sx.M + rj]:
                        continue
                    if abs(red[ri, rj]) <= 1e-9:
                        sx.status[ri, rj] = 2
                        swapped = True
                        break
            if swapped:
                break
            sx.status[target] = 2  # no replacement; this arc is load-bearing
        if not swapped:
            return


def _solve_masses(cost, cap, a, b, big_m):
    """Solve the mass-form LP; returns (z, pi, rho, basic_mask, iterations)."""
    sx = _TreeSimplex(cost, cap, a, b)
    if sx.northwest_start():
        pi, rho = sx.optimize()
        return sx.z, pi, rho, sx.status == 2, sx.iterations

    # Extended grid: one artificial row and column, star basis.
    m, n = cost.shape
    total = float(a.sum())
    cost_x = np.full((m + 1, n + 1), big_m)
    cost_x[:m, :n] = cost
    cost_x[m, n] = 0.0
    cap_x = np.full((m + 1, n + 1), total)
    cap_x[:m, :n] = cap
    a_x = np.append(a, total)
    b_x = np.append(b, total)

    sx = _TreeSimplex(cost_x, cap_x, a_x, b_x)
    sx.z[:m, n] = a
    sx.z[m, :n] = b
    sx.status[:m, n] = 2
    sx.status[m, :n] = 2
    sx.status[m, n] = 2
    sx.optimize()

    stranded = float(sx.z[:m, n].sum() + sx.z[m, :n].sum())
    if stranded > 1e-9:
        raise InfeasibleError(f"artificial arcs still carry {stranded:.3e} mass")
    _evict_artificial_basics(sx, m, n)
    pi, rho = sx._potentials(sx._adjacency())
    return sx.z[:m, :n], pi[:m], rho[:n], sx.status[:m, :n] == 2, sx.iterations


def solve_primal(problem: Problem) -> PrimalSolution:
    """Maximize the weighted surplus over the capacity-constrained polytope.

    Returns a vertex plan together with the simplex node potentials, which
    satisfy the complementary slackness sign conditions against the plan.
    Raises InfeasibleError (with the certificate) on empty polytopes, and
    IterationLimitError if pivoting cycles past its cap.
    """
    cw = problem.cell_weights
    a = problem.f * problem.wx
    b = problem.g * problem.wy
    b = b * (a.sum() / b.sum())
    cap = problem.hbar.values * cw
    cost = -problem.s.values
    big_m = 2.0 * (1.0 + float(np.max(np.abs(problem.s.values)))) * (problem.m + problem.n)

    try:
        z, pi, rho, basic, iters = _solve_masses(cost, cap, a, b, big_m)
    except InfeasibleError:
        from .feasibility import check_feasibility

        cert = check_feasibility(problem, 1.0)
        detail = f"rectangle deficit {cert.deficit}" if not cert.feasible else "borderline"
        raise InfeasibleError(f"no feasible plan: {detail}", certificate=cert) from None

    h = np.minimum(np.maximum(z / cw, 0.0), problem.hbar.values)
    plan = TransportPlan(h)
    basis = tuple((int(i), int(j)) for i, j in zip(*np.nonzero(basic)))
    return PrimalSolution(
        plan=plan,
        value=integrate_surplus(plan, problem),
        u=pi.copy(),
        v=rho.copy(),
        basis_cells=basis,
        iterations=iters,
    )


def support_structure(plan: TransportPlan, problem: Problem, tol: float = 1e-9) -> StructureReport:
    """Partition cells into {h=0}, {h=hbar} and the strictly-between remainder.

    Cells with hbar=0 land in the zero class. W_mask marks the saturated
    set, the candidate support of a bang-bang optimizer.
    """
    h = plan.values
    hb = problem.hbar.values
    zero = np.abs(h) <= tol
    saturated = (np.abs(h - hb) <= tol) & ~zero
    fractional = ~zero & ~saturated
    return StructureReport(
        count_zero=int(zero.sum()),
        count_saturated=int(saturated.sum()),
        count_fractional=int(fractional.sum()),
        W_mask=saturated,
    )
