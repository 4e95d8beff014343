"""Command-line front end.

    fracimp solve    --config problem.cfg --out results/
    fracimp analyze  --config problem.cfg --out results/
    fracimp certify  --config problem.cfg --out results/
    fracimp example51 --out results/

Exit codes: 0 all requested checks pass, 2 configuration errors,
3 numerical failures.  JSON artifacts carry ``schema_version`` and floats
rounded to 17 significant digits; curves go to CSV.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import analysis as ana
from . import ulam
from .config import ProblemConfig, parse_config_file
from .errors import ConfigError, FracimpError
from .grids import PiecewiseFunction
from .problem import SamplingConfig, build_grid, estimate_lipschitz
from .registry import (
    EXAMPLE51_DIFF_BOUND_FIRST,
    EXAMPLE51_DIFF_BOUND_LAST,
    EXAMPLE51_THETA_REFERENCE,
    example51_candidate_fns,
)
from .solver import solve_picard_staged

SCHEMA_VERSION = 1


def _round17(obj):
    if isinstance(obj, float):
        return float(f"{obj:.17g}")
    if isinstance(obj, dict):
        return {k: _round17(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round17(v) for v in obj]
    if isinstance(obj, np.floating):
        return float(f"{float(obj):.17g}")
    return obj


def _write_json(path: Path, payload: dict) -> None:
    payload = dict(payload)
    payload["schema_version"] = SCHEMA_VERSION
    with open(path, "w") as fh:
        json.dump(_round17(payload), fh, indent=2, sort_keys=True)
        fh.write("\n")


def _write_solution_csv(path: Path, x: PiecewiseFunction) -> None:
    with open(path, "w") as fh:
        fh.write("tau,value,segment_index,branch_tag\n")
        for i, (seg, vals) in enumerate(zip(x.grid.segments, x.segment_values)):
            tag = f"{seg.kind}:{seg.index}"
            for t, v in zip(seg.nodes, vals):
                fh.write(f"{t:.17g},{v:.17g},{i},{tag}\n")


def example51_config() -> ProblemConfig:
    """The built-in reference problem, registry-backed so it cannot drift."""
    return ProblemConfig(
        alpha=2.0 / 3.0,
        beta=2.0 / 3.0,
        tau_points=(1.0, 3.0),
        sigma_points=(2.0,),
        x0=0.0,
        f_src="@example51.f",
        h_src="@example51.h",
        impulse_srcs=("@example51.h1",),
        hyp_M_f=0.5,
        hyp_N_f=1.0,
        hyp_K_h=3.0,
        hyp_L_h=(4.0 / math.gamma(4.0 / 3.0),),
        hyp_p=2.0,
        hyp_p1=2.0,
        theta=46.25 * 1.05,
        tolerance=1e-10,
        max_iterations=200,
        grid_density=512,
        impulse_quadrature="adaptive",
        epsilon=1.0,
        psi=0.0,
        phi_src="@example51.phi",
        c_phi=1.0,
        mode="generalized-buhr",
        constant_override=1.0,
    )


def sqrt_halforder_config() -> ProblemConfig:
    """No impulses, order 1/2, unit forcing; solution tau^(1/2)/Gamma(3/2)."""
    return ProblemConfig(
        alpha=0.5,
        beta=0.5,
        tau_points=(1.0,),
        sigma_points=(),
        x0=0.0,
        f_src="@sqrt_halforder.f",
        h_src="@sqrt_halforder.h",
        impulse_srcs=(),
        theta=1.0,
    )


BUILTIN_CONFIGS = {
    "example51": example51_config,
    "sqrt_halforder": sqrt_halforder_config,
}


def _apply_overrides(config: ProblemConfig, args) -> ProblemConfig:
    overrides = {}
    if args.grid_density is not None:
        overrides["grid_density"] = args.grid_density
    if args.theta is not None:
        overrides["theta"] = args.theta
    return config.with_overrides(**overrides) if overrides else config


def _analysis_payload(config: ProblemConfig, problem, hyp):
    theta = config.theta if config.theta is not None else 1.0
    payload = {"theta": theta, "variants": {}}
    basic_ok = 0.5 < problem.alpha < 1.0 and 0.5 < problem.beta < 1.0 and hyp.variant == "basic"
    if basic_ok:
        for variant in ana.BASIC_VARIANTS:
            rep = ana.contraction_constant_basic(
                problem.partition, hyp, problem.alpha, problem.beta, theta, variant
            )
            payload["variants"][variant] = rep.to_dict()
    exps = ana.HolderExponents(config.hyp_p, config.hyp_p1) if config.hyp_p else None
    if exps is None:
        exps = ana.choose_holder_exponents(
            problem.alpha, problem.beta, hyp.gamma_f, hyp.gamma_imp
        )
    wrep = ana.contraction_constant_weighted(
        problem.partition, hyp, problem.alpha, problem.beta, theta, exps
    )
    wrep.theta_threshold = ana.theta_threshold_weighted(
        problem.partition, hyp, problem.alpha, problem.beta, exps
    )
    payload["variants"]["weighted"] = wrep.to_dict()
    if basic_ok:
        L = payload["variants"]["standard"]["L"]
    else:
        L = wrep.L1
    payload["contraction_at_theta"] = L
    payload["contractive"] = bool(L < 1.0)
    return payload


def cmd_solve(config: ProblemConfig, out: Path, json_only: bool) -> int:
    problem = config.build_problem()
    hyp = config.build_hypothesis()
    x, trace = solve_picard_staged(problem, config.build_solver_config(), hypothesis=hyp)
    if not json_only:
        _write_solution_csv(out / "solution.csv", x)
    _write_json(
        out / "trace.json",
        {
            "steps_pb": trace.steps_pb,
            "steps_sup": trace.steps_sup,
            "observed_ratio": trace.observed_ratio,
            "converged": trace.converged,
            "iterations": trace.iterations,
            "theta": trace.theta,
        },
    )
    return 0 if trace.converged else 3


def cmd_analyze(config: ProblemConfig, out: Path, json_only: bool) -> int:
    problem = config.build_problem()
    hyp = config.build_hypothesis()
    if hyp is None:
        raise ConfigError("analyze needs a [hypothesis] section")
    payload = _analysis_payload(config, problem, hyp)
    _write_json(out / "analysis.json", payload)
    return 0 if payload["contractive"] else 3


def cmd_certify(config: ProblemConfig, out: Path, json_only: bool) -> int:
    problem = config.build_problem()
    hyp = config.build_hypothesis()
    if hyp is None:
        raise ConfigError("certify needs a [hypothesis] section")
    stab = config.build_stability_config()
    theta = config.theta if config.theta is not None else 1.0
    solver_cfg = config.build_solver_config(theta=theta)
    x, trace = solve_picard_staged(problem, solver_cfg, hypothesis=hyp)
    exps = (
        ana.HolderExponents(config.hyp_p, config.hyp_p1)
        if config.hyp_p
        else None
    )
    report = ulam.certify(
        problem,
        hyp,
        x,
        stab,
        theta=theta,
        exponents=exps,
        solver_config=solver_cfg,
        solution=x,
    )
    if not json_only:
        _write_solution_csv(out / "solution.csv", x)
    _write_json(out / "stability.json", report.to_dict())
    return 0 if report.bound_satisfied else 3


def cmd_example51(out: Path, json_only: bool, args) -> int:
    config = _apply_overrides(example51_config(), args)
    problem = config.build_problem()
    hyp = config.build_hypothesis()
    solver_cfg = config.build_solver_config()
    theta = solver_cfg.theta

    checks = []

    def check(name, value, reference, passed):
        checks.append(
            {"name": name, "value": value, "reference": reference, "passed": bool(passed)}
        )

    # declared Lipschitz constants vs sampled estimates (lower bounds)
    est = estimate_lipschitz(problem, SamplingConfig(n_random=500, n_tau=41))
    declared = {"M_f": hyp.M_f, "N_f": hyp.N_f, "K_h": hyp.K_h, "L_h1": hyp.L_h[0]}
    sampled = {"M_f": est.M_f, "N_f": est.N_f, "K_h": est.K_h, "L_h1": est.L_h[0]}
    for key in declared:
        # the 1e-8 slack is the difference-quotient rounding floor
        check(
            f"lipschitz_{key}_below_declared",
            sampled[key],
            declared[key],
            sampled[key] <= declared[key] * (1 + 1e-8),
        )

    # contraction constants at the reference weight, all variants side by side
    theta_check = 48.6
    payload = _analysis_payload(config.with_overrides(theta=theta_check), problem, hyp)
    L_standard = payload["variants"]["standard"]["L"]
    L_coupled = payload["variants"]["coupled"]["L"]
    check("L_standard_at_48.6_below_1", L_standard, 1.0, L_standard < 1.0)
    check("L_coupled_at_48.6_below_1", L_coupled, 1.0, L_coupled < 1.0)
    thr = payload["variants"]["coupled"]["theta_threshold"]
    check(
        "theta_threshold_coupled_in_band",
        thr,
        EXAMPLE51_THETA_REFERENCE,
        39.0 <= thr <= 54.0,
    )

    # candidate residuals with a two-density refinement band
    profile, band = ulam.residual_uncertainty(
        problem,
        example51_candidate_fns(),
        density_hi=solver_cfg.grid_density,
        density_lo=max(32, solver_cfg.grid_density // 2),
        config=config.build_stability_config(),
    )
    for i, bound in enumerate((EXAMPLE51_DIFF_BOUND_FIRST, EXAMPLE51_DIFF_BOUND_LAST)):
        sup = profile.differential_sups[i]
        check(
            f"candidate_differential_residual_{i}",
            sup,
            bound,
            sup <= bound + band["differential"][i],
        )
    imp = profile.impulse_sups[0]
    check("candidate_impulse_residual", imp, 1e-8, imp <= 1e-8)

    # comparison-function condition: the declared constant 1 must be valid
    grid_nodes = np.linspace(0.0, problem.partition.T, 2049)
    from .grids import Grid, SampledFunction

    phi_fn = config.build_stability_config().phi
    c_min = ulam.check_h4(
        SampledFunction(Grid(grid_nodes), np.asarray(phi_fn(grid_nodes), dtype=np.float64)),
        problem.alpha,
    )
    check("c_phi_declared_1_valid", c_min, 1.0, c_min <= 1.0 + 1e-6)

    # solve and certify the generalized bound with the declared constant
    grid = build_grid(problem.partition, solver_cfg.grid_density)
    x, trace = solve_picard_staged(problem, solver_cfg, hypothesis=hyp, grid=grid)
    check("solver_converged", trace.iterations, solver_cfg.max_iterations, trace.converged)
    y = PiecewiseFunction.from_segment_callables(grid, example51_candidate_fns())
    report = ulam.certify(
        problem,
        hyp,
        y,
        config.build_stability_config(),
        theta=theta,
        exponents=ana.HolderExponents(config.hyp_p, config.hyp_p1),
        solver_config=solver_cfg,
        solution=x,
    )
    check("certified_bound_holds", report.worst_margin, 0.0, report.bound_satisfied)

    if not json_only:
        _write_solution_csv(out / "solution.csv", x)
    trace.to_json(out / "trace.json")
    _write_json(out / "analysis.json", payload)
    _write_json(out / "stability.json", report.to_dict())
    all_passed = all(c["passed"] for c in checks)
    _write_json(out / "summary.json", {"checks": checks, "all_passed": all_passed})
    for c in checks:
        status = "PASS" if c["passed"] else "FAIL"
        print(f"[{status}] {c['name']}: value={c['value']:.6g} reference={c['reference']:.6g}")
    return 0 if all_passed else 3


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fracimp",
        description="Solve and certify impulsive fractional Volterra integrodifferential problems",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("solve", "analyze", "certify", "example51"):
        p = sub.add_parser(name)
        if name != "example51":
            p.add_argument("--config", required=True, help="problem configuration file")
        p.add_argument("--out", default=".", help="output directory")
        p.add_argument("--grid-density", type=int, default=None, help="panels per unit length")
        p.add_argument("--theta", type=float, default=None, help="Bielecki weight override")
        p.add_argument("--json-only", action="store_true", help="emit JSON artifacts only")
    return parser


def run(argv=None) -> int:
    args = build_parser().parse_args(argv)
    out = Path(args.out)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        print(f"error: cannot create output directory: {exc}", file=sys.stderr)
        return 2
    try:
        if args.command == "example51":
            return cmd_example51(out, args.json_only, args)
        config = _apply_overrides(parse_config_file(args.config), args)
        if args.command == "solve":
            return cmd_solve(config, out, args.json_only)
        if args.command == "analyze":
            return cmd_analyze(config, out, args.json_only)
        return cmd_certify(config, out, args.json_only)
    except (ConfigError, OSError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except FracimpError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
