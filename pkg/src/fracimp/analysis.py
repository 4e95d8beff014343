"""Contraction constants, weight thresholds and the stability constant.

Three variants of the basic contraction constant are exposed because the
per-interval Volterra term admits two historical shapes; the ``standard``
variant is the one the Hoelder-bound derivation actually yields and is the
default everywhere.  See the variant table in :func:`contraction_constant_basic`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .errors import DomainError, NoThresholdError, ThetaTooSmallError
from .problem import HypothesisData, Partition
from .special import PowerIntegralArgs, weighted_power_integral

__all__ = [
    "HolderExponents",
    "WeightedBounds",
    "AnalysisReport",
    "holder_kernel_bound",
    "contraction_constant_basic",
    "theta_threshold_basic",
    "choose_holder_exponents",
    "weighted_bounds",
    "contraction_constant_weighted",
    "theta_threshold_weighted",
    "StabilityDenominators",
    "stability_constant",
    "BASIC_VARIANTS",
]

BASIC_VARIANTS = ("standard", "coupled", "coupled-low")


@dataclass(frozen=True)
class HolderExponents:
    """Conjugate exponent pairs used by the weighted bounds.

    ``p`` (with conjugate ``p_conj``) feeds the differential-branch kernel,
    ``p1``/``p1_conj`` the impulse-branch kernel.  Admissibility requires
    p(alpha-1)+1 > 0, p*gamma_f > p(1-alpha)-1 and the mirrored conditions
    with (p1, beta, gamma_imp).
    """

    p: float
    p1: float

    def __post_init__(self):
        if not (self.p > 1 and self.p1 > 1):
            raise DomainError("Hoelder exponents must exceed 1")

    @property
    def p_conj(self) -> float:
        return self.p / (self.p - 1.0)

    @property
    def p1_conj(self) -> float:
        return self.p1 / (self.p1 - 1.0)

    def validate(self, alpha: float, beta: float, gamma_f: float, gamma_imp: float) -> None:
        checks = [
            (self.p * (alpha - 1.0) + 1.0 > 0, f"p(alpha-1)+1 > 0 fails at p={self.p}"),
            (
                self.p * gamma_f > self.p * (1.0 - alpha) - 1.0,
                f"p*gamma_f > p(1-alpha)-1 fails at p={self.p}",
            ),
            (self.p1 * (beta - 1.0) + 1.0 > 0, f"p1(beta-1)+1 > 0 fails at p1={self.p1}"),
            (
                self.p1 * gamma_imp > self.p1 * (1.0 - beta) - 1.0,
                f"p1*gamma_imp > p1(1-beta)-1 fails at p1={self.p1}",
            ),
        ]
        for ok, msg in checks:
            if not ok:
                raise DomainError(msg)


@dataclass(frozen=True)
class WeightedBounds:
    """Beta-function bounds on the weighted kernel integrals."""

    omega1: float
    omega2: float


@dataclass
class AnalysisReport:
    """Contraction constants with their per-interval decomposition."""

    L: float | None = None
    L1: float | None = None
    per_interval_terms: list = field(default_factory=list)
    theta_used: float = 0.0
    theta_threshold: float | None = None
    variant: str = "standard"
    exponents: HolderExponents | None = None
    bounds: WeightedBounds | None = None

    def to_dict(self) -> dict:
        return {
            "L": self.L,
            "L1": self.L1,
            "per_interval_terms": [
                {"impulse": t[0], "state": t[1], "volterra": t[2]} for t in self.per_interval_terms
            ],
            "theta_used": self.theta_used,
            "theta_threshold": self.theta_threshold,
            "variant": self.variant,
            "exponents": None
            if self.exponents is None
            else {
                "p": self.exponents.p,
                "p_conj": self.exponents.p_conj,
                "p1": self.exponents.p1,
                "p1_conj": self.exponents.p1_conj,
            },
            "bounds": None
            if self.bounds is None
            else {"omega1": self.bounds.omega1, "omega2": self.bounds.omega2},
        }


def holder_kernel_bound(order: float, theta: float, interval_length: float) -> float:
    """Cauchy-Schwarz bound on int (tau-s)^(order-1) e^(theta s) ds over an
    interval, divided by e^(theta tau):

        length^(order-1/2) / sqrt(2*order-1) / sqrt(2*theta)

    Valid for order in (1/2, 1]; degenerates at order <= 1/2.
    """
    if not (0.5 < order <= 1.0):
        raise DomainError(f"kernel bound requires order in (1/2, 1], got {order}")
    if not (theta > 0 and interval_length > 0):
        raise DomainError("theta and interval_length must be positive")
    return interval_length ** (order - 0.5) / math.sqrt(2.0 * order - 1.0) / math.sqrt(2.0 * theta)


def _interval_lengths(partition: Partition):
    diff = [partition.differential_interval(i) for i in range(partition.m + 1)]
    imp = [partition.impulse_interval(i) for i in range(1, partition.m + 1)]
    return (
        [right - left for left, right in diff],
        [right - left for left, right in imp],
    )


def _basic_terms(partition, hyp, alpha, beta, theta, variant):
    if variant not in BASIC_VARIANTS:
        raise DomainError(f"unknown variant {variant!r}; choose from {BASIC_VARIANTS}")
    diff_len, imp_len = _interval_lengths(partition)
    ga, ga1, gb = math.gamma(alpha), math.gamma(alpha + 1.0), math.gamma(beta)
    root2t = math.sqrt(2.0 * theta)
    terms = []
    for i in range(partition.m + 1):
        li = diff_len[i]
        if i >= 1 and imp_len[i - 1] > 0:
            impulse = (
                hyp.L_h[i - 1]
                / gb
                * imp_len[i - 1] ** (beta - 0.5)
                / math.sqrt(2.0 * beta - 1.0)
                / root2t
            )
        elif i >= 1:
            impulse = 0.0  # degenerate impulse interval contributes nothing
        else:
            impulse = 0.0
        state = 0.0
        volterra = 0.0
        if li > 0:
            state = hyp.M_f / ga * li ** (alpha - 0.5) / math.sqrt(2.0 * alpha - 1.0) / root2t
            vol_const = hyp.N_f * hyp.K_h
            exponent, root = alpha + 0.5, math.sqrt(2.0 * alpha + 1.0)
            if variant in ("coupled", "coupled-low") and i >= 1:
                vol_const = hyp.N_f * hyp.L_h[i - 1]
            if variant == "coupled-low":
                exponent, root = alpha, math.sqrt(2.0 * alpha)
            volterra = vol_const / ga1 * li**exponent / root / root2t
        terms.append((impulse, state, volterra))
    return terms


def contraction_constant_basic(
    partition: Partition,
    hyp: HypothesisData,
    alpha: float,
    beta: float,
    theta: float,
    variant: str = "standard",
) -> AnalysisReport:
    """Contraction constant L(theta) = max over intervals of the three-term sum
    (impulse + state + Volterra), every term scaling as (2*theta)^(-1/2).

    Variants of the Volterra term on interval i:
      standard     N_f*K_h     * len^(alpha+1/2) / sqrt(2a+1)   (kernel-bound derivation)
      coupled      N_f*L_h[i]  * len^(alpha+1/2) / sqrt(2a+1)   (impulse constant reused, i>=1)
      coupled-low  N_f*L_h[i]  * len^alpha       / sqrt(2a)     (as above with lowered exponent)
    """
    if not (0.5 < alpha < 1.0 and 0.5 < beta < 1.0):
        raise DomainError("basic contraction constant requires alpha, beta in (1/2, 1)")
    if hyp.variant != "basic":
        raise DomainError("basic contraction constant requires basic hypothesis data")
    if not theta > 0:
        raise DomainError("theta must be positive")
    terms = _basic_terms(partition, hyp, alpha, beta, theta, variant)
    L = max(sum(t) for t in terms)
    thr = theta_threshold_basic(partition, hyp, alpha, beta, variant)
    return AnalysisReport(
        L=L, per_interval_terms=terms, theta_used=theta, theta_threshold=thr, variant=variant
    )


def theta_threshold_basic(
    partition: Partition, hyp: HypothesisData, alpha: float, beta: float, variant: str = "standard"
) -> float:
    """Smallest weight above which L(theta) < 1.

    Every term of L carries the factor (2*theta)^(-1/2), so with
    A = L evaluated at theta = 1/2 (factor removed) the threshold is A^2/2.
    """
    if not (0.5 < alpha < 1.0 and 0.5 < beta < 1.0):
        raise DomainError("basic threshold requires alpha, beta in (1/2, 1)")
    terms = _basic_terms(partition, hyp, alpha, beta, 0.5, variant)
    A = max(sum(t) for t in terms)
    return A * A / 2.0


def choose_holder_exponents(
    alpha: float, beta: float, gamma_f: float = 0.0, gamma_imp: float = 0.0, slack: float = 0.1
) -> HolderExponents:
    """Smallest exponents on a [1.01, 10] scan satisfying all four
    admissibility inequalities with the given absolute margin."""
    def scan(order, gamma):
        p = 1.01
        while p <= 10.0:
            if (
                p * (order - 1.0) + 1.0 >= slack
                and p * gamma + 1.0 - p * (1.0 - order) >= slack
            ):
                return p
            p += 0.01
        raise DomainError(
            f"no admissible Hoelder exponent in [1.01, 10] for order={order}, gamma={gamma}"
        )

    return HolderExponents(scan(alpha, gamma_f), scan(beta, gamma_imp))


def weighted_bounds(
    partition: Partition,
    alpha: float,
    beta: float,
    gamma_f: float,
    gamma_imp: float,
    exponents: HolderExponents,
) -> WeightedBounds:
    """omega_1, omega_2: Beta-function bounds on the weighted kernel integrals
    over the full horizon (Hoelder-power kernels against the power weights)."""
    T = partition.T
    w1 = weighted_power_integral(
        PowerIntegralArgs(alpha_exp=1.0, p=exponents.p, beta_exp=alpha, gamma_exp=gamma_f + 1.0, tau=T)
    ) ** (1.0 / exponents.p)
    w2 = weighted_power_integral(
        PowerIntegralArgs(alpha_exp=1.0, p=exponents.p1, beta_exp=beta, gamma_exp=gamma_imp + 1.0, tau=T)
    ) ** (1.0 / exponents.p1)
    return WeightedBounds(w1, w2)


def _weighted_terms(partition, hyp, alpha, beta, theta, exponents, bounds):
    diff_len, imp_len = _interval_lengths(partition)
    ga, ga1, gb = math.gamma(alpha), math.gamma(alpha + 1.0), math.gamma(beta)
    root2t = math.sqrt(2.0 * theta)
    dstar = (theta * exponents.p_conj) ** (1.0 / exponents.p_conj)
    istar = (theta * exponents.p1_conj) ** (1.0 / exponents.p1_conj)
    terms = []
    for i in range(partition.m + 1):
        li = diff_len[i]
        impulse = 0.0
        if i >= 1 and imp_len[i - 1] > 0:
            impulse = hyp.L_h[i - 1] * bounds.omega2 / (gb * istar)
        state = 0.0
        volterra = 0.0
        if li > 0:
            state = bounds.omega1 * hyp.M_f / (ga * dstar)
            volterra = (
                hyp.N_f * hyp.K_h / ga1 * li ** (alpha + 0.5) / math.sqrt(2.0 * alpha + 1.0) / root2t
            )
        terms.append((impulse, state, volterra))
    return terms


def contraction_constant_weighted(
    partition: Partition,
    hyp: HypothesisData,
    alpha: float,
    beta: float,
    theta: float,
    exponents: HolderExponents,
) -> AnalysisReport:
    """Weighted-variant contraction constant L1(theta), valid for any
    alpha, beta in (0, 1) under the power-weighted Lipschitz hypotheses."""
    if not (0.0 < alpha < 1.0 and 0.0 < beta < 1.0):
        raise DomainError("weighted contraction constant requires alpha, beta in (0, 1)")
    if not theta > 0:
        raise DomainError("theta must be positive")
    exponents.validate(alpha, beta, hyp.gamma_f, hyp.gamma_imp)
    bounds = weighted_bounds(partition, alpha, beta, hyp.gamma_f, hyp.gamma_imp, exponents)
    terms = _weighted_terms(partition, hyp, alpha, beta, theta, exponents, bounds)
    L1 = max(sum(t) for t in terms)
    return AnalysisReport(
        L1=L1,
        per_interval_terms=terms,
        theta_used=theta,
        variant="weighted",
        exponents=exponents,
        bounds=bounds,
    )


def theta_threshold_weighted(
    partition: Partition,
    hyp: HypothesisData,
    alpha: float,
    beta: float,
    exponents: HolderExponents,
    lo: float = 1e-6,
    hi: float = 1e12,
) -> float:
    """Bisection for the weight at which L1 crosses 1 (L1 is strictly
    decreasing in theta term by term)."""
    def L1(theta):
        return contraction_constant_weighted(partition, hyp, alpha, beta, theta, exponents).L1

    if all(c == 0 for c in (hyp.M_f, hyp.N_f * hyp.K_h, *hyp.L_h)):
        return 0.0
    if L1(hi) >= 1.0:
        raise NoThresholdError(
            f"L1({hi}) = {L1(hi)} >= 1; no contraction threshold inside the bracket"
        )
    if L1(lo) < 1.0:
        return lo
    a, b = lo, hi
    for _ in range(200):
        mid = math.sqrt(a * b)  # geometric bisection over 18 decades
        if L1(mid) >= 1.0:
            a = mid
        else:
            b = mid
        if b / a < 1.0 + 1e-12:
            break
    return b


@dataclass(frozen=True)
class StabilityDenominators:
    """1 - (contraction pieces) entering the stability constant, per interval."""

    first: float
    impulse: tuple
    mixed: tuple


def stability_constant(
    partition: Partition,
    hyp: HypothesisData,
    alpha: float,
    beta: float,
    theta: float,
    exponents: HolderExponents,
    c_phi: float,
    psi: float,
):
    """Stability constant of the certified bound: the three-part sum

        c_phi/(1 - D_first) + sum_i psi/(1 - D_impulse_i)
                            + sum_i (1 + c_phi)/(1 - D_mixed_i)

    where the D's are the per-interval weighted contraction pieces.  Raises
    ``ThetaTooSmallError`` naming the interval when a denominator is
    non-positive.  Returns ``(constant, StabilityDenominators)``.
    """
    if not (0.0 < alpha < 1.0 and 0.0 < beta < 1.0):
        raise DomainError("stability constant requires alpha, beta in (0, 1)")
    exponents.validate(alpha, beta, hyp.gamma_f, hyp.gamma_imp)
    bounds = weighted_bounds(partition, alpha, beta, hyp.gamma_f, hyp.gamma_imp, exponents)
    terms = _weighted_terms(partition, hyp, alpha, beta, theta, exponents, bounds)
    d_first = terms[0][1] + terms[0][2]
    if 1.0 - d_first <= 0:
        raise ThetaTooSmallError(
            f"denominator 1 - {d_first:.6g} <= 0 on differential interval 0 at theta={theta}",
            "differential",
            0,
            1.0 - d_first,
        )
    imp_denoms = []
    mix_denoms = []
    for i in range(1, partition.m + 1):
        impulse, state, volterra = terms[i]
        if 1.0 - impulse <= 0:
            raise ThetaTooSmallError(
                f"denominator 1 - {impulse:.6g} <= 0 on impulse interval {i} at theta={theta}",
                "impulse",
                i,
                1.0 - impulse,
            )
        mixed = impulse + state + volterra
        if 1.0 - mixed <= 0:
            raise ThetaTooSmallError(
                f"denominator 1 - {mixed:.6g} <= 0 on differential interval {i} at theta={theta}",
                "differential",
                i,
                1.0 - mixed,
            )
        imp_denoms.append(1.0 - impulse)
        mix_denoms.append(1.0 - mixed)
    constant = c_phi / (1.0 - d_first)
    constant += sum(psi / d for d in imp_denoms)
    constant += sum((1.0 + c_phi) / d for d in mix_denoms)
    return constant, StabilityDenominators(1.0 - d_first, tuple(imp_denoms), tuple(mix_denoms))
