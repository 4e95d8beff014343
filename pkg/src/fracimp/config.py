"""Sectioned key=value problem configuration: parse, validate, serialize.

The format is line-oriented: ``[section]`` headers, ``key = value`` pairs,
full-line ``#`` comments.  Scalar values are expressions without variables
(so ``2/3`` and ``4/gamma(4/3)`` are exact), arrays are ``[expr, expr]``,
function values are either expression text (in the variables the slot
expects) or ``@name`` registry references.  Unknown sections or keys are
rejected.  ``serialize`` emits canonical text that re-parses to an equal
configuration, field by field.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

from .errors import ConfigError, ExpressionError
from .expressions import parse_expression
from .problem import HypothesisData, ImpulsiveProblem, Partition, StabilityConfig
from .registry import lookup
from .solver import SolverConfig

__all__ = ["ProblemConfig", "parse_config", "parse_config_file", "serialize_config"]

_FUNCTION_VARS = {
    "f": ("tau", "x", "v"),
    "h": ("tau", "x"),
    "impulse": ("tau", "x"),
    "phi": ("tau",),
}

_SECTIONS = {
    "problem": {"alpha", "beta", "tau_points", "sigma_points", "x0", "f", "h"},
    "hypothesis": {"M_f", "N_f", "K_h", "L_h", "variant", "gamma_f", "gamma_imp", "p", "p1"},
    "solver": {"theta", "tolerance", "max_iterations", "grid_density", "impulse_quadrature"},
    "stability": {"epsilon", "psi", "phi", "c_phi", "mode", "constant_override"},
}


@dataclass(frozen=True)
class ProblemConfig:
    """Parsed configuration; function slots keep their source text."""

    alpha: float
    beta: float
    tau_points: tuple
    sigma_points: tuple
    x0: float
    f_src: str
    h_src: str
    impulse_srcs: tuple
    # hypothesis (None when the section is absent)
    hyp_M_f: float | None = None
    hyp_N_f: float | None = None
    hyp_K_h: float | None = None
    hyp_L_h: tuple | None = None
    hyp_variant: str = "basic"
    hyp_gamma_f: float = 0.0
    hyp_gamma_imp: float = 0.0
    hyp_p: float | None = None
    hyp_p1: float | None = None
    # solver
    theta: float | None = None
    tolerance: float = 1e-10
    max_iterations: int = 200
    grid_density: int = 512
    impulse_quadrature: str = "adaptive"
    # stability
    epsilon: float = 1.0
    psi: float = 0.0
    phi_src: str | None = None
    c_phi: float | None = None
    mode: str = "generalized-buhr"
    constant_override: float | None = None

    # --- builders --------------------------------------------------------

    def _function(self, src: str, slot: str):
        if src.startswith("@"):
            try:
                return lookup(src[1:])
            except KeyError as exc:
                raise ConfigError(str(exc)) from exc
        try:
            expr = parse_expression(src, _FUNCTION_VARS[slot])
        except ExpressionError as exc:
            raise ConfigError(f"bad {slot} expression: {exc}") from exc
        return expr.as_function(_FUNCTION_VARS[slot])

    def build_problem(self) -> ImpulsiveProblem:
        return ImpulsiveProblem(
            alpha=self.alpha,
            beta=self.beta,
            partition=Partition(self.tau_points, self.sigma_points),
            f=self._function(self.f_src, "f"),
            h=self._function(self.h_src, "h"),
            impulse_maps=tuple(self._function(s, "impulse") for s in self.impulse_srcs),
            x0=self.x0,
        )

    def build_hypothesis(self) -> HypothesisData | None:
        if self.hyp_M_f is None:
            return None
        return HypothesisData(
            M_f=self.hyp_M_f,
            N_f=self.hyp_N_f,
            K_h=self.hyp_K_h,
            L_h=self.hyp_L_h or (),
            variant=self.hyp_variant,
            gamma_f=self.hyp_gamma_f,
            gamma_imp=self.hyp_gamma_imp,
        )

    def build_solver_config(self, **overrides) -> SolverConfig:
        kwargs = dict(
            theta=self.theta,
            tolerance=self.tolerance,
            max_iterations=self.max_iterations,
            grid_density=self.grid_density,
            impulse_quadrature=self.impulse_quadrature,
        )
        kwargs.update(overrides)
        return SolverConfig(**kwargs)

    def build_stability_config(self) -> StabilityConfig:
        phi = self._function(self.phi_src, "phi") if self.phi_src else None
        return StabilityConfig(
            epsilon=self.epsilon,
            psi=self.psi,
            phi=phi,
            c_phi=self.c_phi,
            mode=self.mode,
            constant_override=self.constant_override,
        )

    def with_overrides(self, **kwargs) -> "ProblemConfig":
        return replace(self, **kwargs)


def _eval_scalar(text: str, where: str) -> float:
    try:
        value = parse_expression(text, variables=())(**{})
    except ExpressionError as exc:
        raise ConfigError(f"bad numeric value for {where}: {exc}") from exc
    return float(value)


def _eval_array(text: str, where: str) -> tuple:
    text = text.strip()
    if not (text.startswith("[") and text.endswith("]")):
        raise ConfigError(f"{where} expects an array literal [a, b, ...]")
    inner = text[1:-1].strip()
    if not inner:
        return ()
    return tuple(_eval_scalar(part, where) for part in _split_top_level(inner))


def _split_top_level(text: str):
    """Split on commas not nested inside parentheses."""
    parts, depth, start = [], 0, 0
    for i, ch in enumerate(text):
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        elif ch == "," and depth == 0:
            parts.append(text[start:i].strip())
            start = i + 1
    parts.append(text[start:].strip())
    return parts


def parse_config(text: str) -> ProblemConfig:
    sections: dict = {}
    current = None
    top: dict = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if line.startswith("[") and line.endswith("]"):
            current = line[1:-1].strip()
            if current not in _SECTIONS:
                raise ConfigError(f"unknown section [{current}] at line {lineno}")
            if current in sections:
                raise ConfigError(f"duplicate section [{current}] at line {lineno}")
            sections[current] = {}
            continue
        if "=" not in line:
            raise ConfigError(f"expected key = value at line {lineno}: {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if current is None:
            top[key] = value
            continue
        allowed = _SECTIONS[current]
        if not (key in allowed or (current == "problem" and key.startswith("impulse_"))):
            raise ConfigError(f"unknown key {key!r} in section [{current}] at line {lineno}")
        if key in sections[current]:
            raise ConfigError(f"duplicate key {key!r} in section [{current}] at line {lineno}")
        sections[current][key] = value

    for key in top:
        if key != "schema_version":
            raise ConfigError(f"unknown top-level key {key!r}")
    if "problem" not in sections:
        raise ConfigError("missing required section [problem]")

    prob = sections["problem"]
    for required in ("alpha", "beta", "tau_points", "x0", "f", "h"):
        if required not in prob:
            raise ConfigError(f"missing required key {required!r} in [problem]")
    tau_points = _eval_array(prob["tau_points"], "tau_points")
    sigma_points = _eval_array(prob.get("sigma_points", "[]"), "sigma_points")
    m = len(sigma_points)
    impulse_srcs = []
    for i in range(1, m + 1):
        key = f"impulse_{i}"
        if key not in prob:
            raise ConfigError(f"missing {key!r}: one impulse map per sigma point")
        impulse_srcs.append(prob[key])
    extra = [k for k in prob if k.startswith("impulse_") and int(k.split("_")[1]) > m]
    if extra:
        raise ConfigError(f"impulse map(s) {extra} exceed the number of sigma points")

    kwargs = dict(
        alpha=_eval_scalar(prob["alpha"], "alpha"),
        beta=_eval_scalar(prob["beta"], "beta"),
        tau_points=tau_points,
        sigma_points=sigma_points,
        x0=_eval_scalar(prob["x0"], "x0"),
        f_src=prob["f"],
        h_src=prob["h"],
        impulse_srcs=tuple(impulse_srcs),
    )

    hyp = sections.get("hypothesis")
    if hyp is not None:
        for required in ("M_f", "N_f", "K_h", "L_h"):
            if required not in hyp:
                raise ConfigError(f"missing required key {required!r} in [hypothesis]")
        kwargs.update(
            hyp_M_f=_eval_scalar(hyp["M_f"], "M_f"),
            hyp_N_f=_eval_scalar(hyp["N_f"], "N_f"),
            hyp_K_h=_eval_scalar(hyp["K_h"], "K_h"),
            hyp_L_h=_eval_array(hyp["L_h"], "L_h"),
            hyp_variant=hyp.get("variant", "basic"),
            hyp_gamma_f=_eval_scalar(hyp.get("gamma_f", "0"), "gamma_f"),
            hyp_gamma_imp=_eval_scalar(hyp.get("gamma_imp", "0"), "gamma_imp"),
            hyp_p=None if "p" not in hyp else _eval_scalar(hyp["p"], "p"),
            hyp_p1=None if "p1" not in hyp else _eval_scalar(hyp["p1"], "p1"),
        )

    sol = sections.get("solver", {})
    if sol:
        theta_text = sol.get("theta", "auto")
        kwargs.update(
            theta=None if theta_text == "auto" else _eval_scalar(theta_text, "theta"),
            tolerance=_eval_scalar(sol.get("tolerance", "1e-10"), "tolerance"),
            max_iterations=int(_eval_scalar(sol.get("max_iterations", "200"), "max_iterations")),
            grid_density=int(_eval_scalar(sol.get("grid_density", "512"), "grid_density")),
            impulse_quadrature=sol.get("impulse_quadrature", "adaptive"),
        )

    stab = sections.get("stability", {})
    if stab:
        c_phi_text = stab.get("c_phi", "auto")
        kwargs.update(
            epsilon=_eval_scalar(stab.get("epsilon", "1"), "epsilon"),
            psi=_eval_scalar(stab.get("psi", "0"), "psi"),
            phi_src=stab.get("phi"),
            c_phi=None if c_phi_text == "auto" else _eval_scalar(c_phi_text, "c_phi"),
            mode=stab.get("mode", "generalized-buhr"),
            constant_override=None
            if "constant_override" not in stab
            else _eval_scalar(stab["constant_override"], "constant_override"),
        )

    config = ProblemConfig(**kwargs)
    config.build_problem()  # validate early: partitions, expressions, registry refs
    return config


def parse_config_file(path) -> ProblemConfig:
    with open(path) as fh:
        return parse_config(fh.read())


def _fmt(x: float) -> str:
    return f"{float(x):.17g}"


def serialize_config(config: ProblemConfig) -> str:
    """Canonical config text; parse(serialize(c)) equals c field by field."""
    lines = ["schema_version = 1", "", "[problem]"]
    lines.append(f"alpha = {_fmt(config.alpha)}")
    lines.append(f"beta = {_fmt(config.beta)}")
    lines.append(f"tau_points = [{', '.join(_fmt(t) for t in config.tau_points)}]")
    lines.append(f"sigma_points = [{', '.join(_fmt(s) for s in config.sigma_points)}]")
    lines.append(f"x0 = {_fmt(config.x0)}")
    lines.append(f"f = {config.f_src}")
    lines.append(f"h = {config.h_src}")
    for i, src in enumerate(config.impulse_srcs, start=1):
        lines.append(f"impulse_{i} = {src}")
    if config.hyp_M_f is not None:
        lines += ["", "[hypothesis]"]
        lines.append(f"M_f = {_fmt(config.hyp_M_f)}")
        lines.append(f"N_f = {_fmt(config.hyp_N_f)}")
        lines.append(f"K_h = {_fmt(config.hyp_K_h)}")
        lines.append(f"L_h = [{', '.join(_fmt(v) for v in (config.hyp_L_h or ()))}]")
        lines.append(f"variant = {config.hyp_variant}")
        lines.append(f"gamma_f = {_fmt(config.hyp_gamma_f)}")
        lines.append(f"gamma_imp = {_fmt(config.hyp_gamma_imp)}")
        if config.hyp_p is not None:
            lines.append(f"p = {_fmt(config.hyp_p)}")
        if config.hyp_p1 is not None:
            lines.append(f"p1 = {_fmt(config.hyp_p1)}")
    lines += ["", "[solver]"]
    lines.append(f"theta = {'auto' if config.theta is None else _fmt(config.theta)}")
    lines.append(f"tolerance = {_fmt(config.tolerance)}")
    lines.append(f"max_iterations = {config.max_iterations}")
    lines.append(f"grid_density = {config.grid_density}")
    lines.append(f"impulse_quadrature = {config.impulse_quadrature}")
    lines += ["", "[stability]"]
    lines.append(f"epsilon = {_fmt(config.epsilon)}")
    lines.append(f"psi = {_fmt(config.psi)}")
    if config.phi_src is not None:
        lines.append(f"phi = {config.phi_src}")
    lines.append(f"c_phi = {'auto' if config.c_phi is None else _fmt(config.c_phi)}")
    lines.append(f"mode = {config.mode}")
    if config.constant_override is not None:
        lines.append(f"constant_override = {_fmt(config.constant_override)}")
    return "\n".join(lines) + "\n"
