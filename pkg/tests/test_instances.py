import numpy as np
import pytest

from capot import InputError, check_feasibility, validate_plan
from capot.instances import generate_instance


class TestUniformProductCap:
    def test_matches_saturated_family(self):
        prob = generate_instance("uniform_product_cap", 2, 2, seed=0)
        np.testing.assert_allclose(prob.hbar.values, 1.0)
        np.testing.assert_allclose(prob.f, 1.0)
        np.testing.assert_allclose(prob.g, 1.0)
        cert = check_feasibility(prob, 1.0)
        assert cert.feasible
        # total capacity mass is 1, so the plan is forced to saturate
        np.testing.assert_allclose(cert.plan.values, 1.0, atol=1e-9)


class TestRandomFeasible:
    @pytest.mark.parametrize("seed", range(100))
    def test_strict_margin_holds_across_seeds(self, seed):
        prob = generate_instance("random_feasible", 8, 8, seed=seed)
        cert = check_feasibility(prob, 1.0 / prob.eta)
        assert cert.feasible
        validate_plan(prob, cert.plan, cap_tol=1e-9)

    def test_marginals_strictly_positive(self):
        prob = generate_instance("random_feasible", 6, 5, seed=7)
        assert prob.x.strictly_positive and prob.y.strictly_positive


class TestRandomTight:
    @pytest.mark.parametrize("seed", [1, 2])
    def test_on_the_feasibility_edge(self, seed):
        import dataclasses

        from capot import Kernel

        prob = generate_instance("random_tight", 4, 4, seed=seed)
        assert check_feasibility(prob, 1.0).feasible
        shrunk = dataclasses.replace(
            prob, hbar=Kernel(0.999 * prob.hbar.values, "capacity")
        )
        assert not check_feasibility(shrunk, 1.0).feasible


class TestGeneratorContract:
    def test_unknown_kind(self):
        with pytest.raises(InputError):
            generate_instance("adversarial", 3, 3, seed=0)

    def test_deterministic_given_seed(self):
        a = generate_instance("random_feasible", 5, 5, seed=42)
        b = generate_instance("random_feasible", 5, 5, seed=42)
        np.testing.assert_array_equal(a.hbar.values, b.hbar.values)
        np.testing.assert_array_equal(a.s.values, b.s.values)
        np.testing.assert_array_equal(a.f, b.f)
