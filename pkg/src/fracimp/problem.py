"""Problem data: partition, right-hand sides, hypothesis constants, sampling.

The interval layout follows the two-phase pattern: the state obeys the
fractional differential equation on (sigma_i, tau_{i+1}] and is prescribed
implicitly through a fractional integral of the impulse map on
(tau_i, sigma_i].
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, StructuralError
from .grids import DIFFERENTIAL, IMPULSE, ProblemGrid, Segment

__all__ = [
    "Partition",
    "BranchTag",
    "validate_partition",
    "classify",
    "ImpulsiveProblem",
    "HypothesisData",
    "StabilityConfig",
    "build_grid",
    "SamplingConfig",
    "LipschitzEstimate",
    "estimate_lipschitz",
]


@dataclass(frozen=True)
class Partition:
    """Breakpoints 0 < tau_1 <= sigma_1 <= tau_2 < ... <= sigma_m < tau_{m+1} = T.

    ``tau_points`` holds tau_1..tau_{m+1} (the last entry is T) and
    ``sigma_points`` holds sigma_1..sigma_m.
    """

    tau_points: tuple
    sigma_points: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "tau_points", tuple(float(t) for t in self.tau_points))
        object.__setattr__(self, "sigma_points", tuple(float(s) for s in self.sigma_points))
        if len(self.tau_points) != len(self.sigma_points) + 1:
            raise StructuralError(
                "tau_points must hold one more entry than sigma_points (tau_1..tau_{m+1})"
            )

    @property
    def m(self) -> int:
        return len(self.sigma_points)

    @property
    def T(self) -> float:
        return self.tau_points[-1]

    def differential_interval(self, i: int):
        """(sigma_i, tau_{i+1}] as a pair; sigma_0 = 0."""
        left = 0.0 if i == 0 else self.sigma_points[i - 1]
        return left, self.tau_points[i]

    def impulse_interval(self, i: int):
        """(tau_i, sigma_i] as a pair, i >= 1."""
        return self.tau_points[i - 1], self.sigma_points[i - 1]


def validate_partition(p: Partition):
    """None when the ordering chain holds, else the first violated relation."""
    m = p.m
    if not p.tau_points[0] > 0:
        return "0 < tau_1 fails"
    for i in range(1, m + 1):
        if not p.tau_points[i - 1] <= p.sigma_points[i - 1]:
            return f"tau_{i} <= sigma_{i} fails"
        if i < m:
            if not p.sigma_points[i - 1] <= p.tau_points[i]:
                return f"sigma_{i} <= tau_{i + 1} fails"
        else:
            if not p.sigma_points[i - 1] < p.tau_points[i]:
                return f"sigma_{m} < tau_{m + 1} fails"
        if not p.tau_points[i - 1] < p.tau_points[i]:
            return f"tau_{i} < tau_{i + 1} fails"
    return None


@dataclass(frozen=True)
class BranchTag:
    kind: str  # "differential" | "impulse"
    index: int


def classify(p: Partition, tau: float) -> BranchTag:
    """Unique half-open interval of (0, T] containing tau."""
    if not (0.0 < tau <= p.T):
        raise DomainError(f"tau={tau} outside (0, {p.T}]")
    # differential intervals (sigma_i, tau_{i+1}]
    for i in range(p.m + 1):
        left, right = p.differential_interval(i)
        if left < tau <= right:
            return BranchTag(DIFFERENTIAL, i)
    for i in range(1, p.m + 1):
        left, right = p.impulse_interval(i)
        if left < tau <= right:
            return BranchTag(IMPULSE, i)
    raise DomainError(f"tau={tau} not classified; invalid partition?")


@dataclass(frozen=True)
class ImpulsiveProblem:
    """Full problem datum for the impulsive fractional Volterra equation.

    ``f(tau, x, v)`` is the differential right-hand side (v is the running
    Volterra integral of h), ``h(tau, x)`` the Volterra integrand and
    ``impulse_maps[i-1]`` the map h_i driving the state on (tau_i, sigma_i].
    All three must be pure and accept NumPy arrays elementwise.
    """

    alpha: float
    beta: float
    partition: Partition
    f: object
    h: object
    impulse_maps: tuple
    x0: float

    def __post_init__(self):
        object.__setattr__(self, "impulse_maps", tuple(self.impulse_maps))
        if not (0.0 < self.alpha < 1.0):
            raise DomainError(f"alpha must lie in (0, 1), got {self.alpha}")
        if not (0.0 < self.beta < 1.0):
            raise DomainError(f"beta must lie in (0, 1), got {self.beta}")
        violation = validate_partition(self.partition)
        if violation is not None:
            raise StructuralError(f"invalid partition: {violation}")
        if len(self.impulse_maps) != self.partition.m:
            raise StructuralError(
                f"expected {self.partition.m} impulse maps, got {len(self.impulse_maps)}"
            )


@dataclass(frozen=True)
class HypothesisData:
    """Lipschitz/growth constants for the contraction analysis.

    ``variant`` is "basic" for plain Lipschitz constants or "weighted" when
    f and the impulse maps carry power weights tau^gamma_f and tau^gamma_imp.
    """

    M_f: float
    N_f: float
    K_h: float
    L_h: tuple
    variant: str = "basic"
    gamma_f: float = 0.0
    gamma_imp: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "L_h", tuple(float(v) for v in self.L_h))
        for name in ("M_f", "N_f", "K_h"):
            if getattr(self, name) < 0:
                raise DomainError(f"{name} must be nonnegative")
        if any(v < 0 for v in self.L_h):
            raise DomainError("impulse Lipschitz constants must be nonnegative")
        if self.variant not in ("basic", "weighted"):
            raise DomainError(f"unknown hypothesis variant {self.variant!r}")


@dataclass(frozen=True)
class StabilityConfig:
    """Perturbation data (epsilon, psi, phi) for the stability inequalities.

    ``phi`` is a nonnegative nondecreasing callable on [0, T]; ``c_phi`` may
    be a declared constant or None for "compute from the grid".
    ``constant_override`` replaces the computed stability constant in the
    certified bound when set (e.g. a sharper constant known externally).
    """

    epsilon: float = 1.0
    psi: float = 0.0
    phi: object = None
    c_phi: float | None = None
    mode: str = "generalized-buhr"
    constant_override: float | None = None

    def __post_init__(self):
        if not self.epsilon > 0:
            raise DomainError("epsilon must be positive")
        if self.psi < 0:
            raise DomainError("psi must be nonnegative")
        if self.mode not in ("buh", "generalized-buh", "buhr", "generalized-buhr"):
            raise DomainError(f"unknown stability mode {self.mode!r}")


def build_grid(partition: Partition, density: int = 512) -> ProblemGrid:
    """Uniform-per-segment grid, ``density`` panels per unit length.

    Breakpoints tau_i, sigma_i are always nodes; every segment gets at least
    8 panels; degenerate (zero-length) impulse segments carry a single node.
    """
    if density < 1:
        raise DomainError("density must be >= 1")
    segs = []

    def _nodes(left, right):
        if right - left < 1e-14:
            return np.array([left])
        n = max(8, int(round(density * (right - left))))
        return np.linspace(left, right, n + 1)

    left, right = partition.differential_interval(0)
    segs.append(Segment(DIFFERENTIAL, 0, _nodes(left, right)))
    for i in range(1, partition.m + 1):
        il, ir = partition.impulse_interval(i)
        segs.append(Segment(IMPULSE, i, _nodes(il, ir)))
        dl, dr = partition.differential_interval(i)
        segs.append(Segment(DIFFERENTIAL, i, _nodes(dl, dr)))
    return ProblemGrid(tuple(segs))


@dataclass(frozen=True)
class SamplingConfig:
    """Sampling box and effort for the empirical Lipschitz estimator."""

    x_low: float = -10.0
    x_high: float = 10.0
    v_low: float = -10.0
    v_high: float = 10.0
    n_random: int = 2000
    n_tau: int = 61
    n_x_lattice: int = 41
    near_delta: float = 1e-6
    seed: int = 0


@dataclass(frozen=True)
class LipschitzEstimate:
    """Maximum observed difference quotients; lower bounds on the true constants."""

    M_f: float
    N_f: float
    K_h: float
    L_h: tuple
    kind: str = "empirical-lower-bound"

    def as_hypothesis(self) -> HypothesisData:
        return HypothesisData(self.M_f, self.N_f, self.K_h, self.L_h)


def _slope_sup(fn, taus, xs, pairs, delta):
    """Max |fn(t, x) - fn(t, y)| / |x - y| over near pairs (lattice) and far pairs."""
    best = 0.0
    for t in taus:
        fx = np.asarray([fn(t, x) for x in xs], dtype=float)
        fxd = np.asarray([fn(t, x + delta) for x in xs], dtype=float)
        best = max(best, float(np.max(np.abs(fxd - fx))) / delta)
        for x, y in pairs:
            if abs(x - y) < 1e-12:
                continue
            best = max(best, abs(fn(t, x) - fn(t, y)) / abs(x - y))
    return best


def estimate_lipschitz(problem: ImpulsiveProblem, config: SamplingConfig = SamplingConfig()) -> LipschitzEstimate:
    """Empirical Lipschitz constants by sampled difference quotients.

    Near pairs (x, x + delta) on a lattice chase the local slope supremum;
    random far pairs guard against missed global behaviour.  The estimates
    are lower bounds on the true constants by construction, up to the
    rounding floor of the quotients themselves (~1e-8 relative for the
    default delta).
    """
    rng = np.random.default_rng(config.seed)
    p = problem.partition
    taus = np.linspace(0.0, p.T, config.n_tau)
    # make sure interval endpoints participate: the suprema often sit there
    taus = np.unique(np.concatenate([taus, p.tau_points, p.sigma_points, [0.0]]))
    xs = np.concatenate(
        [
            np.linspace(config.x_low, config.x_high, config.n_x_lattice),
            [0.0, 0.5, -0.5, math.pi / 4, -math.pi / 4],
        ]
    )
    far = [
        (rng.uniform(config.x_low, config.x_high), rng.uniform(config.x_low, config.x_high))
        for _ in range(config.n_random)
    ]
    vs = np.concatenate(
        [np.linspace(config.v_low, config.v_high, 9), [0.0]]
    )

    m_f = _slope_sup(lambda t, x: problem.f(t, x, 0.0), taus, xs, far, config.near_delta)
    # slope in the Volterra argument, x held on a small lattice
    n_f = 0.0
    for xf in (-1.0, 0.0, 1.0):
        n_f = max(
            n_f,
            _slope_sup(lambda t, v, _x=xf: problem.f(t, _x, v), taus, vs, far, config.near_delta),
        )
    k_h = _slope_sup(problem.h, taus, xs, far, config.near_delta)
    l_h = []
    for i in range(1, p.m + 1):
        left, right = p.impulse_interval(i)
        t_imp = np.unique(np.concatenate([np.linspace(left, right, config.n_tau), [right]]))
        # impulse maps may be singular at the open left endpoint; sample inside
        t_imp = t_imp[t_imp > left]
        l_h.append(_slope_sup(problem.impulse_maps[i - 1], t_imp, xs, far, config.near_delta))
    return LipschitzEstimate(m_f, n_f, k_h, tuple(l_h))
