"""Problem data model: weighted grids, marginal densities, kernels, transport plans.

Conventions used throughout the package:

- Each axis is a finite partition of a unit-volume set into cells with
  positive volumes (weights) summing to 1; a cell is represented by its
  midpoint coordinate.
- Marginals and plans are stored as *densities* (mass per unit volume),
  never as masses.  Every integral therefore carries explicit cell
  weights: the discrete form of ``∬ h s dx dy`` is
  ``sum_ij h[i,j] * s[i,j] * wx[i] * wy[j]``.
- Kernels (the capacity bound and the surplus) are sampled at cell
  midpoints, not cell-averaged.  The sign convention is to *maximize*
  surplus, i.e. ``s = -cost``.

All types are immutable after construction (arrays are frozen), so values
can be shared freely across threads.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, InputError, InvalidPlanError

__all__ = [
    "Axis",
    "Marginal",
    "Kernel",
    "Problem",
    "TransportPlan",
    "integrate_surplus",
    "builtin_surplus",
    "validate_plan",
]

BUILTIN_SURPLUS_NAMES = ("product", "neg_sq_dist")


def _frozen(a, dtype=float) -> np.ndarray:
    out = np.array(a, dtype=dtype, copy=True)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class Axis:
    """One 1-D discretized axis: positive cell volumes summing to 1, plus midpoints."""

    weights: np.ndarray
    midpoints: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "weights", _frozen(self.weights))
        object.__setattr__(self, "midpoints", _frozen(self.midpoints))
        w, x = self.weights, self.midpoints
        if w.ndim != 1 or x.ndim != 1 or len(w) != len(x) or len(w) == 0:
            raise InputError("axis weights and midpoints must be equal-length 1-D arrays")
        if not np.all(np.isfinite(w)) or np.any(w <= 0):
            raise InputError("axis weights must be positive and finite")
        if abs(w.sum() - 1.0) > 1e-12:
            raise InputError(f"axis weights must sum to 1, got {w.sum()!r}")
        if not np.all(np.isfinite(x)):
            raise InputError("axis midpoints must be finite")

    @property
    def cell_count(self) -> int:
        return len(self.weights)

    @staticmethod
    def uniform(m: int) -> "Axis":
        """m equal cells on [0, 1]: weights 1/m, midpoints (i + 1/2)/m."""
        if m < 1:
            raise InputError("cell count must be positive")
        return Axis(np.full(m, 1.0 / m), (np.arange(m) + 0.5) / m)


@dataclass(frozen=True)
class Marginal:
    """A probability density on an axis: density[i] >= 0 and sum(density * weights) = 1."""

    axis: Axis
    density: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "density", _frozen(self.density))
        d = self.density
        if d.shape != (self.axis.cell_count,):
            raise DimensionMismatch("marginal density length must match its axis")
        if not np.all(np.isfinite(d)) or np.any(d < 0):
            raise InputError("marginal density must be non-negative and finite")
        mass = float(d @ self.axis.weights)
        if abs(mass - 1.0) > 1e-9:
            raise InputError(f"marginal must integrate to 1, got {mass!r}")

    @property
    def cell_count(self) -> int:
        return self.axis.cell_count

    @property
    def strictly_positive(self) -> bool:
        return bool(np.all(self.density > 0))

    @staticmethod
    def uniform(m: int) -> "Marginal":
        return Marginal(Axis.uniform(m), np.ones(m))


@dataclass(frozen=True)
class Kernel:
    """A function of (x_i, y_j) sampled at midpoints: either a capacity bound or a surplus."""

    values: np.ndarray
    kind: str

    def __post_init__(self):
        object.__setattr__(self, "values", _frozen(np.atleast_2d(self.values)))
        v = self.values
        if self.kind not in ("capacity", "surplus"):
            raise InputError(f"unknown kernel kind {self.kind!r}")
        if v.ndim != 2:
            raise InputError("kernel values must form a matrix")
        if not np.all(np.isfinite(v)):
            raise InputError("kernel values must be finite")
        if self.kind == "capacity" and np.any(v < 0):
            raise InputError("capacity kernel must be non-negative")

    @property
    def shape(self):
        return self.values.shape


@dataclass(frozen=True)
class Problem:
    """A discretized capacity-constrained transport instance.

    ``eta > 1`` is the strict-feasibility margin used by the dual solver's
    attainment hypothesis and by the coercivity diagnostics; it is part of
    the instance data, not of any particular solve.
    """

    x: Marginal
    y: Marginal
    hbar: Kernel
    s: Kernel
    eta: float = 2.0

    def __post_init__(self):
        shape = (self.x.cell_count, self.y.cell_count)
        if self.hbar.kind != "capacity":
            raise InputError("hbar must be a capacity kernel")
        if self.s.kind != "surplus":
            raise InputError("s must be a surplus kernel")
        if self.hbar.shape != shape or self.s.shape != shape:
            raise DimensionMismatch(
                f"kernel shapes {self.hbar.shape}, {self.s.shape} do not match grid {shape}"
            )
        if not (np.isfinite(self.eta) and self.eta > 1):
            raise InputError("eta must be a finite real > 1")

    # Short accessors; every module spells integrals with these.
    @property
    def m(self) -> int:
        return self.x.cell_count

    @property
    def n(self) -> int:
        return self.y.cell_count

    @property
    def wx(self) -> np.ndarray:
        return self.x.axis.weights

    @property
    def wy(self) -> np.ndarray:
        return self.y.axis.weights

    @property
    def f(self) -> np.ndarray:
        return self.x.density

    @property
    def g(self) -> np.ndarray:
        return self.y.density

    @property
    def cell_weights(self) -> np.ndarray:
        """Outer product wx ⊗ wy: the volume of each grid cell."""
        return np.outer(self.wx, self.wy)


@dataclass(frozen=True)
class TransportPlan:
    """A joint density h with 0 <= h (capacity and marginal checks live in validate_plan)."""

    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "values", _frozen(np.atleast_2d(self.values)))
        v = self.values
        if v.ndim != 2:
            raise InvalidPlanError("plan values must form a matrix")
        if not np.all(np.isfinite(v)):
            raise InvalidPlanError("plan values must be finite")
        if np.any(v < -1e-9):
            raise InvalidPlanError("plan values must be non-negative")

    @property
    def shape(self):
        return self.values.shape


def validate_plan(problem: Problem, plan: TransportPlan, cap_tol: float = 1e-9,
                  marginal_tol: float = 1e-8) -> None:
    """Raise InvalidPlanError unless plan lies in the feasible polytope of problem.

    Checks 0 <= h <= hbar per cell (within cap_tol) and both marginals
    (within marginal_tol).
    """
    h = plan.values
    if h.shape != (problem.m, problem.n):
        raise DimensionMismatch(f"plan shape {h.shape} does not match grid "
                                f"({problem.m}, {problem.n})")
    over = h - problem.hbar.values
    if over.max(initial=-np.inf) > cap_tol:
        i, j = np.unravel_index(int(np.argmax(over)), h.shape)
        raise InvalidPlanError(f"plan exceeds capacity at cell ({i}, {j}) by {over[i, j]:.3e}")
    row = h @ problem.wy
    col = problem.wx @ h
    row_err = float(np.max(np.abs(row - problem.f)))
    col_err = float(np.max(np.abs(col - problem.g)))
    if row_err > marginal_tol or col_err > marginal_tol:
        raise InvalidPlanError(
            f"plan marginals off by (x: {row_err:.3e}, y: {col_err:.3e}), tol {marginal_tol:g}"
        )


def integrate_surplus(plan: TransportPlan, problem: Problem) -> float:
    """Weighted surplus integral of a plan: sum_ij h_ij s_ij wx_i wy_j."""
    if plan.shape != (problem.m, problem.n):
        raise DimensionMismatch(f"plan shape {plan.shape} does not match grid "
                                f"({problem.m}, {problem.n})")
    return float(np.sum(plan.values * problem.s.values * problem.cell_weights))


def builtin_surplus(name: str, x: Axis, y: Axis) -> Kernel:
    """Named surplus kernels evaluated at axis midpoints.

    ``product``      s_ij = x_i * y_j
    ``neg_sq_dist``  s_ij = -(x_i - y_j)^2 / 2
    """
    xi = x.midpoints[:, None]
    yj = y.midpoints[None, :]
    if name == "product":
        return Kernel(xi * yj, "surplus")
    if name == "neg_sq_dist":
        return Kernel(-0.5 * (xi - yj) ** 2, "surplus")
    raise InputError(f"unknown builtin surplus {name!r}; expected one of {BUILTIN_SURPLUS_NAMES}")
