"""Shared instance builders for the test suite."""

import dataclasses

import numpy as np

from capot import (
    Axis,
    Kernel,
    Marginal,
    Problem,
    TransportPlan,
    builtin_surplus,
    solve_primal,
)
from capot.instances import generate_instance

# Exact optimum of the 3x3 product-surplus instance below, from the
# rational oracle: plan [[2,1,0],[1,1,1],[0,1,2]], value 97/324.
PRODUCT_3X3_VALUE = 97.0 / 324.0

ANTIDIAG = np.array([[0.0, 1.0], [1.0, 0.0]])


def tiny_saturated() -> Problem:
    """2x2 uniform grid, hbar ≡ 1: total capacity mass is exactly 1, so the
    constant plan h ≡ 1 is the only feasible point."""
    x = Axis.uniform(2)
    return Problem(
        x=Marginal(x, np.ones(2)),
        y=Marginal(x, np.ones(2)),
        hbar=Kernel(np.ones((2, 2)), "capacity"),
        s=Kernel(ANTIDIAG, "surplus"),
        eta=2.0,
    )


def tiny_antidiagonal() -> Problem:
    """2x2 uniform grid, hbar ≡ 2, antidiagonal surplus; optimum parks all
    mass on the antidiagonal at capacity, value 1."""
    x = Axis.uniform(2)
    return Problem(
        x=Marginal(x, np.ones(2)),
        y=Marginal(x, np.ones(2)),
        hbar=Kernel(2.0 * np.ones((2, 2)), "capacity"),
        s=Kernel(ANTIDIAG, "surplus"),
        eta=2.0,
    )


def product_3x3() -> Problem:
    """3x3 uniform grid, product surplus x*y, hbar ≡ 2."""
    x = Axis.uniform(3)
    return Problem(
        x=Marginal(x, np.ones(3)),
        y=Marginal(x, np.ones(3)),
        hbar=Kernel(2.0 * np.ones((3, 3)), "capacity"),
        s=builtin_surplus("product", x, x),
        eta=2.0,
    )


def random_problem(m, n, seed, kind="random_feasible") -> Problem:
    return generate_instance(kind, m, n, seed)


def random_feasible_plans(problem: Problem, rng, count: int):
    """Random points of the feasible polytope: convex mixtures of vertex
    plans obtained under random surplus directions."""
    vertices = []
    for _ in range(4):
        s = Kernel(rng.normal(0.0, 1.0, (problem.m, problem.n)), "surplus")
        vertices.append(solve_primal(dataclasses.replace(problem, s=s)).plan.values)
    plans = []
    for _ in range(count):
        theta = rng.dirichlet(np.ones(len(vertices)))
        plans.append(TransportPlan(sum(t * v for t, v in zip(theta, vertices))))
    return plans
