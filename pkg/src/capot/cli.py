"""Command-line surface.

Subcommands: feasible, solve, dual, verify, sweep, generate. Reports are
JSON on stdout (and optionally a file via --report). Exit codes:

    0  success / optimal / converged
    1  input error (bad file, bad flags)
    2  instance infeasible
    3  tolerance or optimality not reached
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass
from typing import Optional


from . import io, kernels
from .dual import coercivity_diagnostics, minimize_dual
from .errors import CapotError, InfeasibleError, InputError
from .feasibility import brute_force_levin, check_feasibility
from .grid import validate_plan
from .instances import GENERATOR_KINDS, generate_instance
from .limit import limit_sweep
from .oracle import brute_force_primal
from .primal import solve_primal, support_structure
from .verify import verify_slackness

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_INFEASIBLE = 2
EXIT_NOT_OPTIMAL = 3


@dataclass
class RunConfig:
    command: str
    input_path: Optional[str] = None
    tol: float = 1e-6
    max_iter: int = 50_000
    oracle: bool = False
    seed: int = 0
    report_path: Optional[str] = None
    scale: float = 1.0
    plan_path: Optional[str] = None
    potentials_path: Optional[str] = None
    plan_out: Optional[str] = None
    target_from_primal: bool = False
    ks: tuple = ()
    kind: str = "random_feasible"
    m: int = 4
    n: int = 4
    eta: float = 2.0
    out_path: Optional[str] = None

    def __post_init__(self):
        if not self.tol > 0:
            raise InputError("tol must be positive")
        if self.max_iter < 1:
            raise InputError("max_iter must be positive")


def _emit(report: dict, config: RunConfig) -> None:
    text = json.dumps(report, indent=2)
    print(text)
    if config.report_path:
        with open(config.report_path, "w") as fh:
            fh.write(text + "\n")


def _cmd_feasible(config: RunConfig) -> int:
    problem = io.load_problem(config.input_path)
    checker = brute_force_levin if config.oracle else check_feasibility
    cert = checker(problem, config.scale)
    report = {"feasible": cert.feasible, "scale": config.scale}
    if not cert.feasible:
        report["deficit"] = cert.deficit
        report["rectangle"] = {"A": list(cert.rectangle[0]), "B": list(cert.rectangle[1])}
    _emit(report, config)
    return EXIT_OK if cert.feasible else EXIT_INFEASIBLE


def _cmd_solve(config: RunConfig) -> int:
    problem = io.load_problem(config.input_path)
    try:
        sol = solve_primal(problem)
    except InfeasibleError as exc:
        report = {"feasible": False, "error": str(exc)}
        cert = exc.certificate
        if cert is not None and not cert.feasible:
            report["deficit"] = cert.deficit
            report["rectangle"] = {"A": list(cert.rectangle[0]), "B": list(cert.rectangle[1])}
        _emit(report, config)
        return EXIT_INFEASIBLE
    structure = support_structure(sol.plan, problem, tol=config.tol)
    report = {
        "value": sol.value,
        "iterations": sol.iterations,
        "counts": {
            "zero": structure.count_zero,
            "saturated": structure.count_saturated,
            "fractional": structure.count_fractional,
        },
        "potentials": {"u": sol.u.tolist(), "v": sol.v.tolist()},
    }
    if config.oracle:
        oracle_value = brute_force_primal(problem)
        report["oracle_value"] = oracle_value
        report["oracle_abs_diff"] = abs(sol.value - oracle_value)
    if config.plan_out:
        io.save_matrix_csv(sol.plan.values, config.plan_out)
        report["plan_csv"] = config.plan_out
    _emit(report, config)
    return EXIT_OK


def _cmd_dual(config: RunConfig) -> int:
    problem = io.load_problem(config.input_path)
    target = None
    if config.target_from_primal:
        target = solve_primal(problem).value
    result = minimize_dual(
        problem, max_iter=config.max_iter, tol=config.tol, target_value=target
    )
    diag = coercivity_diagnostics(result.potentials, problem, check=False)
    report = {
        "value": result.value,
        "gap": result.gap,
        "iterations": result.iterations,
        "converged": result.converged,
        "eta_feasible": result.eta_feasible,
        "potentials": {
            "u": result.potentials.u.tolist(),
            "v": result.potentials.v.tolist(),
        },
        "coercivity": {
            "eta": diag.eta,
            "eps": diag.eps,
            "eps_prime": diag.eps_prime,
            "I_value": diag.I_value,
            "mean_sum": diag.mean_sum,
            "mean_lower": diag.mean_lower,
            "mean_upper": diag.mean_upper,
            "sigma_u": diag.sigma_u,
            "osc_lhs_u": diag.osc_lhs_u,
            "osc_rhs_u": diag.osc_rhs_u,
            "sigma_v": diag.sigma_v,
            "osc_lhs_v": diag.osc_lhs_v,
            "osc_rhs_v": diag.osc_rhs_v,
            "norm_u": diag.norm_u,
            "norm_v": diag.norm_v,
            "norm_bound_u": diag.norm_bound_u,
            "norm_bound_v": diag.norm_bound_v,
        },
    }
    _emit(report, config)
    return EXIT_OK if result.converged else EXIT_NOT_OPTIMAL


def _cmd_verify(config: RunConfig) -> int:
    problem = io.load_problem(config.input_path)
    plan = io.load_plan(config.plan_path)
    potentials = io.load_potentials(config.potentials_path, problem)
    validate_plan(problem, plan)
    report = verify_slackness(plan, potentials, problem, tol=config.tol)
    _emit({
        "gap": report.gap,
        "n_zero_ok": report.n_zero_ok,
        "n_mid_ok": report.n_mid_ok,
        "n_sat_ok": report.n_sat_ok,
        "max_violation": report.max_violation,
        "violations": [
            {"i": i, "j": j, "class": cls, "s_plus_u_plus_v": sig}
            for i, j, cls, sig in report.violations
        ],
        "optimal": report.optimal,
    }, config)
    return EXIT_OK if report.optimal else EXIT_NOT_OPTIMAL


def _cmd_sweep(config: RunConfig) -> int:
    problem = io.load_problem(config.input_path)
    result = limit_sweep(
        problem.x, problem.y, problem.s, config.ks or None,
        dual_tol=config.tol, dual_max_iter=config.max_iter,
    )
    _emit({
        "unconstrained_value": result.unconstrained_value,
        "eta": result.eta,
        "mean_bound": result.mean_bound,
        "points": [
            {
                "k": p.k,
                "primal_value": p.primal_value,
                "dual_value": p.dual_value,
                "mean_uf": p.mean_uf,
                "mean_vg": p.mean_vg,
                "pos_part_mass": p.pos_part_mass,
                "plan_distance": p.plan_distance,
                "potential_l1": p.potential_l1,
                "dual_gap": p.dual_gap,
            }
            for p in result.points
        ],
    }, config)
    return EXIT_OK


def _cmd_generate(config: RunConfig) -> int:
    problem = generate_instance(config.kind, config.m, config.n, config.seed, config.eta)
    if config.out_path:
        io.save_problem(problem, config.out_path)
        print(json.dumps({"written": config.out_path, "kind": config.kind,
                          "m": config.m, "n": config.n, "seed": config.seed}))
    else:
        print(json.dumps(io.problem_to_dict(problem), indent=2))
    return EXIT_OK


_DISPATCH = {
    "feasible": _cmd_feasible,
    "solve": _cmd_solve,
    "dual": _cmd_dual,
    "verify": _cmd_verify,
    "sweep": _cmd_sweep,
    "generate": _cmd_generate,
}


def run(config: RunConfig) -> int:
    kernels.thread_cap()  # validate CAPOT_THREADS early
    try:
        return _DISPATCH[config.command](config)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except InfeasibleError as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except CapotError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


def _parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="capot",
        description="Capacity-constrained optimal transport solver and verifier",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, with_report=True):
        p.add_argument("--input", required=True, help="problem JSON file")
        p.add_argument("--tol", type=float, default=1e-6)
        if with_report:
            p.add_argument("--report", default=None, help="also write the JSON report here")

    p = sub.add_parser("feasible", help="check the polytope is non-empty")
    common(p)
    p.add_argument("--scale", type=float, default=1.0,
                   help="capacity scale factor (1/eta probes the strict margin)")
    p.add_argument("--oracle", action="store_true",
                   help="use exhaustive rectangle enumeration instead of max-flow")

    p = sub.add_parser("solve", help="solve the primal LP")
    common(p)
    p.add_argument("--plan", dest="plan_out", default=None, help="write the plan as CSV")
    p.add_argument("--oracle", action="store_true",
                   help="also solve with the exact rational oracle and report the difference")

    p = sub.add_parser("dual", help="minimize the dual functional")
    common(p)
    p.add_argument("--target-from-primal", action="store_true",
                   help="solve the primal first and use its value as the Polyak target")
    p.add_argument("--max-iter", type=int, default=50_000)

    p = sub.add_parser("verify", help="check optimality of a (plan, potentials) pair")
    common(p)
    p.add_argument("--plan", dest="plan_path", required=True, help="plan CSV file")
    p.add_argument("--potentials", dest="potentials_path", required=True,
                   help="potentials JSON file with fields u, v")

    p = sub.add_parser("sweep", help="capacity sweep toward the unconstrained limit")
    common(p)
    p.add_argument("--ks", default=None,
                   help="comma-separated capacity levels; default K*{1,2,...,256} "
                        "with K = max(f*g)+1")
    p.add_argument("--max-iter", type=int, default=50_000)

    p = sub.add_parser("generate", help="write a seeded test instance")
    p.add_argument("--kind", choices=GENERATOR_KINDS, default="random_feasible")
    p.add_argument("-m", type=int, default=4)
    p.add_argument("-n", type=int, default=4)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--eta", type=float, default=2.0)
    p.add_argument("--out", dest="out_path", default=None, help="output problem JSON path")

    return parser


def main(argv=None) -> int:
    try:
        args = _parser().parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code not in (0, None) else 0

    try:
        fields = dict(
            command=args.command,
            input_path=getattr(args, "input", None),
            tol=getattr(args, "tol", 1e-6),
            max_iter=getattr(args, "max_iter", 50_000),
            oracle=getattr(args, "oracle", False),
            seed=getattr(args, "seed", 0),
            report_path=getattr(args, "report", None),
            scale=getattr(args, "scale", 1.0),
            plan_path=getattr(args, "plan_path", None),
            potentials_path=getattr(args, "potentials_path", None),
            plan_out=getattr(args, "plan_out", None),
            target_from_primal=getattr(args, "target_from_primal", False),
            kind=getattr(args, "kind", "random_feasible"),
            m=getattr(args, "m", 4),
            n=getattr(args, "n", 4),
            eta=getattr(args, "eta", 2.0),
            out_path=getattr(args, "out_path", None),
        )
        if args.command == "sweep" and args.ks is not None:
            fields["ks"] = tuple(float(tok) for tok in args.ks.split(",") if tok.strip())
        config = RunConfig(**fields)
    except (InputError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT

    return run(config)


if __name__ == "__main__":
    sys.exit(main())
