"""Built-in problems.

``example51`` is the package's worked reference problem: orders 2/3, one
impulse interval on (1, 2] inside the horizon [0, 3], trigonometric forcing
with a known candidate state and declared Lipschitz constants.  All of its
functions are hard-coded here (with equivalent expression strings for the
config round trip) so command-line runs cannot drift via config typos.
"""

from __future__ import annotations

import math

import numpy as np

from .problem import HypothesisData, ImpulsiveProblem, Partition
from .special import mittag_leffler

__all__ = ["REGISTRY", "lookup", "example51_problem", "example51_candidate_fns", "example51_phi"]

_G13 = math.gamma(1.0 / 3.0)
_G43 = math.gamma(4.0 / 3.0)

# residual scale constants of the worked example (see its analysis report)
EXAMPLE51_DIFF_BOUND_FIRST = 4.5495
EXAMPLE51_DIFF_BOUND_LAST = 2.8361
EXAMPLE51_PHI_SCALE = 2.8361
EXAMPLE51_THETA_REFERENCE = 46.2473


def example51_g(t):
    t = np.asarray(t, dtype=np.float64)
    first = 9.0 / (2.0 * _G13) * np.maximum(t, 0.0) ** (4.0 / 3.0) - 0.25
    last = 9.0 / (2.0 * _G13) * np.maximum(t - 2.0, 0.0) ** (4.0 / 3.0) - (
        math.cos(4.0) + math.sin(4.0)
    ) / (4.0 * math.exp(4.0))
    return np.where(t <= 1.0, first, np.where(t <= 2.0, 0.0, last))


def example51_f(t, x, v):
    t = np.asarray(t, dtype=np.float64)
    return example51_g(t) + np.exp(-(t**2)) / 4.0 * (np.sin(x) + np.cos(x)) + v


def example51_h(t, x):
    t = np.asarray(t, dtype=np.float64)
    return t * np.exp(-(t**2)) * np.sin(x)


def example51_h1(t, x):
    t = np.asarray(t, dtype=np.float64)
    x = np.asarray(x, dtype=np.float64)
    return (
        (1.0 / _G43)
        * t
        * np.maximum(t - 1.0, 0.0) ** (1.0 / 3.0)
        / (t - 4.0)
        * ((np.abs(x) - 3.0) / (np.abs(x) + 1.0))
    )


def example51_phi(t):
    t = np.asarray(t, dtype=np.float64)
    flat = np.array(
        [EXAMPLE51_PHI_SCALE * mittag_leffler(2.0 / 3.0, v ** (2.0 / 3.0)) for v in np.atleast_1d(t).ravel()]
    )
    return flat.reshape(t.shape) if t.ndim else float(flat[0])


def example51_problem() -> ImpulsiveProblem:
    return ImpulsiveProblem(
        alpha=2.0 / 3.0,
        beta=2.0 / 3.0,
        partition=Partition(tau_points=(1.0, 3.0), sigma_points=(2.0,)),
        f=example51_f,
        h=example51_h,
        impulse_maps=(example51_h1,),
        x0=0.0,
    )


def example51_hypothesis() -> HypothesisData:
    return HypothesisData(M_f=0.5, N_f=1.0, K_h=3.0, L_h=(4.0 / _G43,))


def example51_candidate_fns():
    """Per-segment callables of the candidate state: tau on the differential
    segments, tau - 1 on the impulse segment."""
    ident = lambda t: np.asarray(t, dtype=np.float64)
    shifted = lambda t: np.asarray(t, dtype=np.float64) - 1.0
    return [ident, shifted, ident]


# expression-language equivalents, used by config serialization round trips
_EXAMPLE51_EXPRESSIONS = {
    "f": (
        "piecewise(tau <= 1 : 9/(2*gamma(1/3))*tau^(4/3) - 1/4, "
        "tau <= 2 : 0, "
        "tau <= 3 : 9/(2*gamma(1/3))*(tau-2)^(4/3) - (cos(4)+sin(4))/(4*exp(4)))"
        " + exp(-tau^2)/4*(sin(x)+cos(x)) + v"
    ),
    "h": "tau/exp(tau^2)*sin(x)",
    "h1": "1/gamma(4/3) * tau*(tau-1)^(1/3)/(tau-4) * ((abs(x)-3)/(abs(x)+1))",
    "phi": "2.8361*mittag_leffler(2/3; tau^(2/3))",
}


def _sqrt_problem() -> ImpulsiveProblem:
    """No impulses, order 1/2, unit forcing: solution tau^(1/2)/Gamma(3/2)."""
    return ImpulsiveProblem(
        alpha=0.5,
        beta=0.5,
        partition=Partition(tau_points=(1.0,)),
        f=lambda t, x, v: np.ones_like(np.asarray(t, dtype=np.float64)),
        h=lambda t, x: np.zeros_like(np.asarray(t, dtype=np.float64)),
        impulse_maps=(),
        x0=0.0,
    )


REGISTRY = {
    "example51.f": example51_f,
    "example51.h": example51_h,
    "example51.h1": example51_h1,
    "example51.phi": example51_phi,
    "example51.g": example51_g,
    "sqrt_halforder.f": lambda t, x, v: np.ones_like(np.asarray(t, dtype=np.float64)),
    "sqrt_halforder.h": lambda t, x: np.zeros_like(np.asarray(t, dtype=np.float64)),
}


def lookup(name: str):
    """Resolve a registry function reference (the part after '@')."""
    if name not in REGISTRY:
        raise KeyError(f"unknown registry function {name!r}")
    return REGISTRY[name]


def example51_expressions() -> dict:
    return dict(_EXAMPLE51_EXPRESSIONS)
