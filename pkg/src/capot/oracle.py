"""Exact-rational LP oracle for the primal optimum.

Solves the same bounded-variable transportation LP as the float solver,
but by a completely different route: a dense two-phase tableau simplex
over ``fractions.Fraction`` with Bland's rule. Inputs are rounded to
rationals with denominator 10^12 first, so the optimum is exact for the
rounded data and within ~1e-12 of the float instance's optimum. The
transportation incidence matrix is totally unimodular, so tableau entries
stay small rationals and nothing blows up.

Intended purely as a test oracle at desk scale (m*n <= 64); the solver of
record is capot.primal.
"""

from __future__ import annotations

from fractions import Fraction


from .errors import InfeasibleError, IterationLimitError, TooLargeError
from .grid import Problem

__all__ = ["brute_force_primal"]

_DEN = 10**12


def _rat(x: float) -> Fraction:
    return Fraction(round(float(x) * _DEN), _DEN)


class _BoundedSimplex:
    """Dense tableau simplex, minimization, variables in [0, ub], Bland's rule."""

    def __init__(self, A, b, ub):
        self.nrows = len(A)
        self.nstruct = len(A[0])
        self.ncols = self.nstruct + self.nrows  # structurals + one artificial per row
        zero, one = Fraction(0), Fraction(1)
        self.tab = [
            [A[r][k] for k in range(self.nstruct)]
            + [one if r == q else zero for q in range(self.nrows)]
            for r in range(self.nrows)
        ]
        self.ub = list(ub) + [None] * self.nrows  # None = unbounded above
        self.basis = [self.nstruct + r for r in range(self.nrows)]
        self.at_upper = [False] * self.ncols
        self.is_basic = [k >= self.nstruct for k in range(self.ncols)]
        self.xb = [b[r] for r in range(self.nrows)]  # b >= 0 by construction

    def _reduced_costs(self, cost):
        cb = [cost[self.basis[r]] for r in range(self.nrows)]
        red = list(cost)
        for r in range(self.nrows):
            if cb[r] == 0:
                continue
            row = self.tab[r]
            for k in range(self.ncols):
                if row[k] != 0:
                    red[k] -= cb[r] * row[k]
        return red

    def minimize(self, cost, fixed=()):
        """Run Bland-rule pivots to optimality for the given cost vector."""
        fixed = set(fixed)
        cap = 2000 * (self.nrows + self.ncols)
        for _ in range(cap):
            red = self._reduced_costs(cost)
            enter = -1
            for k in range(self.ncols):
                if self.is_basic[k] or k in fixed:
                    continue
                if (not self.at_upper[k] and red[k] < 0) or (self.at_upper[k] and red[k] > 0):
                    enter = k
                    break
            if enter < 0:
                return
            self._pivot(enter)
        raise IterationLimitError("rational simplex exceeded its pivot cap")

    def _pivot(self, enter):
        sigma = -1 if self.at_upper[enter] else 1
        col = [self.tab[r][enter] for r in range(self.nrows)]

        theta = self.ub[enter]  # moving across the whole span flips the bound
        leave_row = -1
        for r in range(self.nrows):
            d = sigma * col[r]
            if d > 0:
                limit = self.xb[r] / d
            elif d < 0 and self.ub[self.basis[r]] is not None:
                limit = (self.ub[self.basis[r]] - self.xb[r]) / (-d)
            else:
                continue
            # Bland tie-break: smallest basic variable index leaves.
            if theta is None or limit < theta or (
                limit == theta and leave_row >= 0
                and self.basis[r] < self.basis[leave_row]
            ):
                theta, leave_row = limit, r
        if theta is None:
            raise IterationLimitError("unbounded direction in a bounded LP (internal bug)")

        for r in range(self.nrows):
            self.xb[r] -= theta * sigma * col[r]

        if leave_row < 0:
            self.at_upper[enter] = not self.at_upper[enter]
            return

        leaving = self.basis[leave_row]
        d = sigma * col[leave_row]
        self.is_basic[leaving] = False
        self.at_upper[leaving] = d < 0  # hit its upper bound, else dropped to zero
        self.is_basic[enter] = True
        self.at_upper[enter] = False
        self.basis[leave_row] = enter
        self.xb[leave_row] = (self.ub[enter] - theta) if sigma < 0 else theta

        piv = self.tab[leave_row][enter]
        prow = [x / piv for x in self.tab[leave_row]]
        self.tab[leave_row] = prow
        for r in range(self.nrows):
            if r == leave_row:
                continue
            factor = self.tab[r][enter]
            if factor != 0:
                row = self.tab[r]
                self.tab[r] = [row[k] - factor * prow[k] for k in range(self.ncols)]

    def solution(self):
        x = [self.ub[k] if self.at_upper[k] else Fraction(0) for k in range(self.ncols)]
        for r in range(self.nrows):
            x[self.basis[r]] = self.xb[r]
        return x


def brute_force_primal(problem: Problem) -> float:
    """Exact LP optimum of sup ∬ h s over the capacity-constrained polytope."""
    m, n = problem.m, problem.n
    if m * n > 64:
        raise TooLargeError(f"rational oracle requires m*n <= 64, got {m * n}")

    wx = [_rat(w) for w in problem.wx]
    wy = [_rat(w) for w in problem.wy]
    a = [_rat(problem.f[i]) * wx[i] for i in range(m)]
    b = [_rat(problem.g[j]) * wy[j] for j in range(n)]
    total_a, total_b = sum(a), sum(b)
    if total_a == 0 or total_b == 0:
        raise InfeasibleError("zero total mass")
    b = [x * total_a / total_b for x in b]  # exact rebalance; system stays consistent

    nvar = m * n
    cap = [_rat(problem.hbar.values[i, j]) * wx[i] * wy[j]
           for i in range(m) for j in range(n)]
    surplus = [_rat(problem.s.values[i, j]) for i in range(m) for j in range(n)]

    zero, one = Fraction(0), Fraction(1)
    A = []
    for i in range(m):
        A.append([one if k // n == i else zero for k in range(nvar)])
    for j in range(n):
        A.append([one if k % n == j else zero for k in range(nvar)])
    rhs = a + b

    sx = _BoundedSimplex(A, rhs, cap)

    # Phase 1: drive the artificials to zero.
    phase1 = [zero] * nvar + [one] * sx.nrows
    sx.minimize(phase1)
    infeas = sum(sx.xb[r] for r in range(sx.nrows) if sx.basis[r] >= nvar)
    if infeas > Fraction(1, 10**9):
        raise InfeasibleError(f"instance infeasible (phase-1 residual {float(infeas):.3e})")

    # Phase 2: maximize surplus (minimize its negation); artificials stay pinned.
    for k in range(nvar, sx.ncols):
        sx.ub[k] = Fraction(0)
    phase2 = [-c for c in surplus] + [zero] * sx.nrows
    sx.minimize(phase2, fixed=range(nvar, sx.ncols))

    x = sx.solution()
    value = sum(surplus[k] * x[k] for k in range(nvar))
    return float(value)
