import math

import numpy as np
import pytest

from conftest import make_affine_problem
from fracimp.analysis import HolderExponents, theta_threshold_basic
from fracimp.errors import DomainError
from fracimp.grids import Grid, PiecewiseFunction, SampledFunction
from fracimp.problem import Partition, StabilityConfig, build_grid
from fracimp.registry import (
    example51_candidate_fns,
    example51_hypothesis,
    example51_phi,
    example51_problem,
)
from fracimp.solver import SolverConfig, solve_picard_staged
from fracimp.special import mittag_leffler
from fracimp.ulam import certify, check_h4, residual_profile, residual_uncertainty


@pytest.fixture(scope="module")
def example51_solution():
    problem = example51_problem()
    hyp = example51_hypothesis()
    grid = build_grid(problem.partition, 96)
    config = SolverConfig(theta=46.25 * 1.05, grid_density=96)
    x, trace = solve_picard_staged(problem, config, hypothesis=hyp, grid=grid)
    assert trace.converged
    return problem, hyp, grid, config, x


class TestCheckH4:
    def test_unit_phi(self):
        alpha, T = 0.6, 3.0
        grid = Grid.uniform(0.0, T, 1024)
        phi = SampledFunction(grid, np.ones(1025))
        # I^alpha 1 = tau^alpha/Gamma(1+alpha) exactly under the quadrature,
        # so the grid ratio peaks at T
        assert check_h4(phi, alpha) == pytest.approx(
            T**alpha / math.gamma(1.0 + alpha), rel=1e-12
        )

    def test_mittag_leffler_ratio(self):
        # I^alpha E_alpha(tau^alpha) = E_alpha(tau^alpha) - 1 term by term,
        # so the minimal grid constant is 1 - 1/E_alpha(T^alpha) < 1
        alpha, T = 2.0 / 3.0, 3.0
        grid = Grid.uniform(0.0, T, 2048)
        vals = np.array([mittag_leffler(alpha, t**alpha) for t in grid.nodes])
        got = check_h4(SampledFunction(grid, vals), alpha)
        expected = 1.0 - 1.0 / mittag_leffler(alpha, T**alpha)
        assert got == pytest.approx(expected, rel=1e-4)
        assert got <= 1.0 + 1e-6  # the declared constant 1 is valid

    def test_worked_example_phi(self):
        grid = Grid.uniform(0.0, 3.0, 2048)
        vals = np.asarray(example51_phi(grid.nodes), dtype=np.float64)
        got = check_h4(SampledFunction(grid, vals), 2.0 / 3.0)
        assert got <= 1.0 + 1e-6
        assert got == pytest.approx(0.96666, abs=2e-4)

    def test_decreasing_phi_rejected(self):
        grid = Grid.uniform(0.0, 1.0, 32)
        with pytest.raises(DomainError):
            check_h4(SampledFunction(grid, 1.0 - grid.nodes), 0.5)

    def test_zero_phi_with_positive_integral_rejected(self):
        grid = Grid.uniform(0.0, 1.0, 32)
        vals = np.zeros(33)
        vals[:1] = 0.0
        # nondecreasing but zero everywhere: integral is zero, fine
        assert check_h4(SampledFunction(grid, vals), 0.5) == 0.0


class TestResidualProfile:
    def test_solver_fixed_point(self, example51_solution):
        problem, hyp, grid, config, x = example51_solution
        prof = residual_profile(problem, x)
        assert prof.impulse_sups[0] <= 1e-8
        assert max(prof.differential_sups) <= 5e-3

    def test_candidate_state(self, example51_solution):
        problem, _, grid, _, _ = example51_solution
        y = PiecewiseFunction.from_segment_callables(grid, example51_candidate_fns())
        prof = residual_profile(problem, y)
        # the analytical bounds carried by the worked example
        assert prof.differential_sups[0] <= 4.5495
        assert prof.differential_sups[1] <= 2.8361
        assert prof.impulse_sups[0] <= 1e-8
        # frozen measured values (stable in the grid density)
        assert prof.differential_sups[0] == pytest.approx(0.61031, abs=1e-3)
        assert prof.differential_sups[1] == pytest.approx(0.57348, abs=1e-3)

    def test_epsilon_for_phi(self, example51_solution):
        problem, _, grid, _, _ = example51_solution
        y = PiecewiseFunction.from_segment_callables(grid, example51_candidate_fns())
        cfg = StabilityConfig(psi=0.0, phi=example51_phi)
        prof = residual_profile(problem, y, cfg)
        assert not prof.impulse_exact_required
        assert prof.epsilon_for_phi == pytest.approx(0.116, abs=5e-3)
        assert prof.epsilon_for_phi <= 1.0  # candidate admissible at epsilon = 1

    def test_zero_psi_with_impulse_defect_flagged(self, example51_solution):
        problem, _, grid, _, _ = example51_solution
        bad = [lambda t: np.asarray(t, float), lambda t: np.asarray(t, float), lambda t: np.asarray(t, float)]
        y = PiecewiseFunction.from_segment_callables(grid, bad)  # impulse branch violated
        cfg = StabilityConfig(psi=0.0, phi=example51_phi)
        prof = residual_profile(problem, y, cfg)
        assert prof.impulse_exact_required
        assert prof.epsilon_for_phi is None

    def test_trivial_fixed_point_zero_residual(self):
        zero2 = lambda t, x: np.zeros_like(np.asarray(t, dtype=float))
        zero3 = lambda t, x, v: np.zeros_like(np.asarray(t, dtype=float))
        from fracimp.problem import ImpulsiveProblem

        problem = ImpulsiveProblem(0.6, 0.6, Partition((1.0,), ()), zero3, zero2, (), 0.0)
        grid = build_grid(problem.partition, 32)
        y = PiecewiseFunction.constant(grid, 0.0)
        prof = residual_profile(problem, y)
        assert prof.differential_sups[0] == pytest.approx(0.0, abs=1e-14)

    def test_uncertainty_band(self, example51_solution):
        problem, _, _, _, _ = example51_solution
        prof, band = residual_uncertainty(
            problem, example51_candidate_fns(), density_hi=96, density_lo=48
        )
        assert len(band["differential"]) == 2
        assert all(b < 0.05 for b in band["differential"])


class TestCertify:
    def test_fixed_point_certifies_itself(self, example51_solution):
        problem, hyp, grid, config, x = example51_solution
        cfg = StabilityConfig(psi=0.0, phi=example51_phi, c_phi=1.0)
        report = certify(
            problem,
            hyp,
            x,
            cfg,
            theta=config.theta,
            exponents=HolderExponents(2.0, 2.0),
            solution=x,
        )
        assert report.bound_satisfied
        assert report.epsilon <= 1e-2
        # x = y: the margin is the bound itself at its smallest node
        assert report.worst_margin == pytest.approx(report.constant_used * 2.8361, rel=1e-2)

    def test_worked_example_candidate_generalized_bound(self, example51_solution):
        problem, hyp, grid, config, x = example51_solution
        y = PiecewiseFunction.from_segment_callables(grid, example51_candidate_fns())
        cfg = StabilityConfig(
            psi=0.0, phi=example51_phi, c_phi=1.0, mode="generalized-buhr", constant_override=1.0
        )
        report = certify(
            problem,
            hyp,
            y,
            cfg,
            theta=config.theta,
            exponents=HolderExponents(2.0, 2.0),
            solver_config=config,
            solution=x,
        )
        assert report.bound_satisfied  # |y - x| e^(-theta tau) <= phi(tau) everywhere
        assert report.constant_used == 1.0
        assert report.constant > 1.0  # computed constant is a (large) upper bound
        assert report.c_phi == 1.0
        assert report.worst_margin >= 0.0

    def test_buh_mode_small_problem(self, rng):
        problem, hyp = make_affine_problem(rng, m=1)
        thr = theta_threshold_basic(problem.partition, hyp, problem.alpha, problem.beta)
        theta = max(2.0, 8.0 * thr)
        config = SolverConfig(theta=theta, grid_density=48, impulse_quadrature="trapezoid")
        grid = build_grid(problem.partition, 48)
        x, trace = solve_picard_staged(problem, config, hypothesis=hyp, grid=grid)
        assert trace.converged
        # perturb the solution slightly: a genuine near-solution
        y = PiecewiseFunction(
            grid, [v + 1e-4 * np.sin(seg.nodes) for seg, v in zip(grid.segments, x.segment_values)]
        )
        report = certify(
            problem,
            hyp,
            y,
            StabilityConfig(psi=1.0, phi=lambda t: np.ones_like(np.asarray(t, float))),
            mode="buh",
            theta=theta,
            exponents=HolderExponents(2.0, 2.0),
            solver_config=config,
        )
        # c_phi for flat phi is T^alpha/Gamma(1+alpha)
        expected_cphi = problem.partition.T**problem.alpha / math.gamma(1 + problem.alpha)
        assert report.c_phi == pytest.approx(expected_cphi, rel=1e-12)
        assert report.epsilon > 0.0
        assert report.bound_satisfied

    def test_generalized_mode_requires_unit_admissibility(self, example51_solution):
        # shrinking phi makes the candidate's admissible epsilon exceed 1:
        # the unit-size hypothesis system fails, so certification must too,
        # even when an inflated constant keeps the raw margin positive
        problem, hyp, grid, config, x = example51_solution
        y = PiecewiseFunction.from_segment_callables(grid, example51_candidate_fns())
        tiny_phi = lambda t: 1e-3 * np.asarray(example51_phi(t))
        cfg = StabilityConfig(
            psi=0.0, phi=tiny_phi, c_phi=1.0, mode="generalized-buhr", constant_override=1e6
        )
        report = certify(
            problem,
            hyp,
            y,
            cfg,
            theta=config.theta,
            exponents=HolderExponents(2.0, 2.0),
            solver_config=config,
            solution=x,
        )
        assert report.epsilon > 1.0
        assert report.worst_margin > 0.0  # the inflated bound itself holds
        assert not report.bound_satisfied  # but the mode's hypotheses fail

    def test_enlarging_epsilon_never_breaks_bound(self, example51_solution):
        # bound monotonicity: scaling the same report's epsilon up only
        # increases the bound, so satisfaction is monotone in epsilon
        problem, hyp, grid, config, x = example51_solution
        y = PiecewiseFunction.from_segment_callables(grid, example51_candidate_fns())
        cfg = StabilityConfig(psi=0.0, phi=example51_phi, c_phi=1.0, mode="buhr")
        report = certify(
            problem,
            hyp,
            y,
            cfg,
            theta=config.theta,
            exponents=HolderExponents(2.0, 2.0),
            solver_config=config,
            solution=x,
        )
        if report.bound_satisfied:
            assert report.worst_margin >= -1e-9
