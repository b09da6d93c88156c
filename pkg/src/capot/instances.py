"""Seeded test-instance generators."""

from __future__ import annotations

import numpy as np

from .errors import InputError
from .feasibility import check_feasibility
from .grid import Axis, Kernel, Marginal, Problem, builtin_surplus

__all__ = ["generate_instance", "GENERATOR_KINDS"]

GENERATOR_KINDS = ("uniform_product_cap", "random_feasible", "random_tight")


def _random_density(rng, m: int) -> np.ndarray:
    # Positive, bounded away from zero, normalized against uniform weights.
    raw = rng.gamma(2.0, 1.0, m) + 0.3
    return raw / (raw.mean())


def generate_instance(kind: str, m: int, n: int, seed: int, eta: float = 2.0) -> Problem:
    """Build a named family member.

    uniform_product_cap: uniform marginals with hbar ≡ 1 — total capacity
      mass exactly 1, so the product plan is the only feasible one.
    random_feasible: random positive marginals; hbar = eta*(f⊗g) + slack,
      so the product plan fits under hbar/eta with room to spare.
    random_tight: a random_feasible capacity rescaled by bisection until
      the polytope is at the edge of emptiness (max-flow = 1 exactly).
    """
    if m < 1 or n < 1:
        raise InputError("instance dimensions must be positive")
    rng = np.random.default_rng(seed)

    if kind == "uniform_product_cap":
        x, y = Axis.uniform(m), Axis.uniform(n)
        return Problem(
            x=Marginal(x, np.ones(m)),
            y=Marginal(y, np.ones(n)),
            hbar=Kernel(np.ones((m, n)), "capacity"),
            s=builtin_surplus("product", x, y),
            eta=eta,
        )

    if kind == "random_feasible":
        x, y = Axis.uniform(m), Axis.uniform(n)
        f = Marginal(x, _random_density(rng, m))
        g = Marginal(y, _random_density(rng, n))
        fg = np.outer(f.density, g.density)
        hbar = eta * fg + rng.uniform(0.1, 1.0, (m, n))
        s = rng.normal(0.0, 1.0, (m, n))
        return Problem(x=f, y=g, hbar=Kernel(hbar, "capacity"), s=Kernel(s, "surplus"), eta=eta)

    if kind == "random_tight":
        base = generate_instance("random_feasible", m, n, seed, eta)

        def feasible_at(scale: float) -> bool:
            shrunk = Problem(
                x=base.x, y=base.y,
                hbar=Kernel(scale * base.hbar.values, "capacity"),
                s=base.s, eta=base.eta,
            )
            return check_feasibility(shrunk, 1.0).feasible

        lo, hi = 0.0, 1.0
        for _ in range(80):
            mid = 0.5 * (lo + hi)
            if feasible_at(mid):
                hi = mid
            else:
                lo = mid
        # Tiny pad keeps the instance on the feasible side of float noise
        # while any 0.999 shrink is still infeasible.
        return Problem(
            x=base.x, y=base.y,
            hbar=Kernel(hi * (1.0 + 1e-6) * base.hbar.values, "capacity"),
            s=base.s, eta=base.eta,
        )

    raise InputError(f"unknown instance kind {kind!r}; expected one of {GENERATOR_KINDS}")
