"""Shared fixtures and builders for the test suite."""

import numpy as np
import pytest

from fracimp.problem import HypothesisData, ImpulsiveProblem, Partition

# filled by the acceptance tests; echoed after the run so the per-criterion
# lines survive output capture
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def make_affine_problem(rng, m=None, max_const=0.8):
    """Random problem with affine f, h, h_i, so the true Lipschitz constants
    are the absolute coefficients."""
    if m is None:
        m = int(rng.integers(0, 3))
    # breakpoints: tau_1 <= sigma_1 <= tau_2 ... < T, spaced away from zero
    points = np.sort(rng.uniform(0.4, 2.8, size=2 * m + 1))
    tau_points = tuple(points[0::2])
    sigma_points = tuple(points[1::2])
    alpha = float(rng.uniform(0.55, 0.95))
    beta = float(rng.uniform(0.55, 0.95))
    c0, c1, c2 = rng.uniform(-max_const, max_const, size=3)
    d0, d1 = rng.uniform(-max_const, max_const, size=2)
    imp_coeffs = [tuple(rng.uniform(-max_const, max_const, size=2)) for _ in range(m)]

    def f(t, x, v, c0=c0, c1=c1, c2=c2):
        return c0 + c1 * np.asarray(x) + c2 * np.asarray(v) + 0.0 * np.asarray(t)

    def h(t, x, d0=d0, d1=d1):
        return d0 + d1 * np.asarray(x) + 0.0 * np.asarray(t)

    def make_imp(e0, e1):
        return lambda t, x: e0 + e1 * np.asarray(x) + 0.0 * np.asarray(t)

    problem = ImpulsiveProblem(
        alpha=alpha,
        beta=beta,
        partition=Partition(tau_points, sigma_points),
        f=f,
        h=h,
        impulse_maps=tuple(make_imp(e0, e1) for e0, e1 in imp_coeffs),
        x0=float(rng.uniform(-1, 1)),
    )
    hyp = HypothesisData(
        M_f=abs(c1),
        N_f=abs(c2),
        K_h=abs(d1),
        L_h=tuple(abs(e1) for _, e1 in imp_coeffs),
    )
    return problem, hyp


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
