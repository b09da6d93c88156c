import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from capot import (
    Axis,
    DimensionMismatch,
    InputError,
    InvalidPlanError,
    Kernel,
    Marginal,
    Problem,
    TransportPlan,
    builtin_surplus,
    integrate_surplus,
    validate_plan,
)
from helpers import tiny_saturated, random_problem


class TestAxis:
    def test_uniform(self):
        ax = Axis.uniform(4)
        assert ax.cell_count == 4
        np.testing.assert_allclose(ax.weights, 0.25)
        np.testing.assert_allclose(ax.midpoints, [0.125, 0.375, 0.625, 0.875])

    def test_weights_must_sum_to_one(self):
        with pytest.raises(InputError):
            Axis(np.array([0.5, 0.4]), np.array([0.25, 0.75]))

    def test_weights_must_be_positive(self):
        with pytest.raises(InputError):
            Axis(np.array([1.0, 0.0]), np.array([0.25, 0.75]))

    def test_immutable(self):
        ax = Axis.uniform(3)
        with pytest.raises(ValueError):
            ax.weights[0] = 2.0


class TestMarginal:
    def test_mass_enforced(self):
        with pytest.raises(InputError):
            Marginal(Axis.uniform(2), np.array([1.0, 0.5]))

    def test_negative_rejected(self):
        with pytest.raises(InputError):
            Marginal(Axis.uniform(2), np.array([2.5, -0.5]))

    def test_strictly_positive_flag(self):
        assert Marginal(Axis.uniform(2), np.ones(2)).strictly_positive
        assert not Marginal(Axis.uniform(2), np.array([2.0, 0.0])).strictly_positive


class TestKernel:
    def test_capacity_rejects_negative(self):
        with pytest.raises(InputError):
            Kernel(np.array([[1.0, -0.1]]), "capacity")

    def test_rejects_non_finite(self):
        with pytest.raises(InputError):
            Kernel(np.array([[np.inf]]), "surplus")

    def test_unknown_kind(self):
        with pytest.raises(InputError):
            Kernel(np.ones((1, 1)), "cost")


class TestProblem:
    def test_dimension_mismatch(self):
        x = Marginal(Axis.uniform(2), np.ones(2))
        with pytest.raises(DimensionMismatch):
            Problem(x=x, y=x, hbar=Kernel(np.ones((2, 3)), "capacity"),
                    s=Kernel(np.ones((2, 2)), "surplus"))

    def test_eta_must_exceed_one(self):
        x = Marginal(Axis.uniform(2), np.ones(2))
        with pytest.raises(InputError):
            Problem(x=x, y=x, hbar=Kernel(np.ones((2, 2)), "capacity"),
                    s=Kernel(np.ones((2, 2)), "surplus"), eta=1.0)


class TestIntegrateSurplus:
    def test_unique_plan_value(self):
        prob = tiny_saturated()
        plan = TransportPlan(np.ones((2, 2)))
        assert integrate_surplus(plan, prob) == pytest.approx(0.5, abs=1e-15)

    def test_equals_surplus_mean_for_uniform_grid(self):
        prob = tiny_saturated()
        plan = TransportPlan(np.ones((2, 2)))
        assert integrate_surplus(plan, prob) == pytest.approx(
            prob.s.values.mean(), abs=1e-15
        )

    def test_zero_surplus(self):
        prob = tiny_saturated()
        prob_zero = Problem(x=prob.x, y=prob.y, hbar=prob.hbar,
                            s=Kernel(np.zeros((2, 2)), "surplus"), eta=2.0)
        assert integrate_surplus(TransportPlan(np.ones((2, 2))), prob_zero) == 0.0

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatch):
            integrate_surplus(TransportPlan(np.ones((3, 2))), tiny_saturated())

    @settings(max_examples=50, deadline=None)
    @given(alpha=st.floats(0.0, 10.0), seed=st.integers(0, 10**6))
    def test_scaling_linearity(self, alpha, seed):
        prob = random_problem(3, 4, seed % 100)
        rng = np.random.default_rng(seed)
        h = rng.uniform(0.0, 1.0, (3, 4))
        base = integrate_surplus(TransportPlan(h), prob)
        scaled = integrate_surplus(TransportPlan(alpha * h), prob)
        assert scaled == pytest.approx(alpha * base, rel=1e-12, abs=1e-12)


class TestBuiltinSurplus:
    def test_product_two_cells(self):
        ax = Axis.uniform(2)
        kern = builtin_surplus("product", ax, ax)
        np.testing.assert_allclose(
            kern.values, [[1 / 16, 3 / 16], [3 / 16, 9 / 16]], atol=1e-15
        )

    def test_product_three_cells_corner(self):
        ax = Axis.uniform(3)
        kern = builtin_surplus("product", ax, ax)
        assert kern.values[0, 2] == pytest.approx(5 / 36, abs=1e-15)

    def test_neg_sq_dist_diagonal(self):
        ax = Axis.uniform(5)
        kern = builtin_surplus("neg_sq_dist", ax, ax)
        np.testing.assert_allclose(np.diag(kern.values), 0.0, atol=1e-15)
        assert np.all(kern.values <= 0)

    def test_unknown_name(self):
        ax = Axis.uniform(2)
        with pytest.raises(InputError):
            builtin_surplus("squared", ax, ax)


class TestValidatePlan:
    def test_good_plan(self):
        validate_plan(tiny_saturated(), TransportPlan(np.ones((2, 2))))

    def test_capacity_violation(self):
        with pytest.raises(InvalidPlanError):
            validate_plan(tiny_saturated(), TransportPlan(1.5 * np.ones((2, 2))))

    def test_marginal_violation(self):
        bad = np.array([[2.0, 0.0], [0.0, 1.0]])
        with pytest.raises(InvalidPlanError):
            validate_plan(tiny_saturated(), TransportPlan(bad))

    def test_negative_plan_rejected_at_construction(self):
        with pytest.raises(InvalidPlanError):
            TransportPlan(np.array([[-0.5, 1.0], [1.0, 1.0]]))
