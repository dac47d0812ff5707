"""Command-line front end.

Exit status is 0 on success, 2 for unreadable or invalid input and 3 when
a solver hits its iteration cap. Errors are reported as a JSON object on
standard error.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import io
from .annealing import AnnealConfig, ExperimentSpec, Schedule, anneal, convergence_profile, first_move_acceptance, grid_rows
from .errors import InputError, NonConvergence, ValidationError
from .homophily import cograduation_index, connect, homophily_coupling
from .tables import Coupling, cost_of
from .transport import exact_kcost
from .trivariate import homophily3

EXIT_OK, EXIT_INPUT, EXIT_SOLVER = 0, 2, 3


def _need_cost(problem):
    if problem.cost is None:
        raise InputError("cost", "missing (give a matrix or one of 'euclidean', 'sqrt')")
    return problem.cost


def _two_margins(problem, command):
    if len(problem.margins) != 2:
        raise InputError("zeta", f"'{command}' takes exactly two margins")
    return problem.mu, problem.nu


def cmd_solve(args):
    problem = io.read_problem(args.input)
    mu, nu = _two_margins(problem, "solve")
    sol = exact_kcost(mu, nu, _need_cost(problem))
    if args.format == "csv":
        return io.matrix_csv(sol.coupling.table)
    return io.dumps_json(sol.to_json())


def _anneal_config(args) -> AnnealConfig:
    obj = io.read_json(args.config) if args.config else {}
    try:
        cfg = AnnealConfig.from_json(obj)
    except ValidationError as exc:
        raise InputError("config", str(exc)) from None
    changes = {}
    if args.seed is not None:
        changes["seed"] = args.seed
    if args.schedule is not None:
        changes["schedule"] = Schedule.named(args.schedule)
    if changes:
        cfg = AnnealConfig(**{**cfg.__dict__, **changes})
    return cfg


def cmd_anneal(args):
    problem = io.read_problem(args.input)
    mu, nu = _two_margins(problem, "anneal")
    cost = _need_cost(problem)
    cfg = _anneal_config(args)
    report = anneal(mu, nu, cfg, cost)
    out = {"config": cfg.to_json(), **report.to_json()}
    if args.with_exact:
        exact = exact_kcost(mu, nu, cost)
        out["exact"] = exact.value
        out["gap"] = report.cost - exact.value
    if args.format == "csv":
        return io.matrix_csv(report.coupling.table)
    return io.dumps_json(out)


def cmd_homophily(args):
    problem = io.read_problem(args.input)
    mu, nu = _two_margins(problem, "homophily")
    g = homophily_coupling(mu, nu)
    if args.format == "csv":
        return io.matrix_csv(g.table)
    out = {"coupling": g.table.tolist()}
    if problem.cost is not None:
        out["cost"] = cost_of(g, problem.cost)
    return io.dumps_json(out)


def cmd_homophily3(args):
    problem = io.read_problem(args.input)
    if len(problem.margins) != 3:
        raise InputError("zeta", "missing (three margins are required)")
    g = homophily3(*problem.margins)
    if args.format == "csv":
        return io.slices_csv(g.table)
    return io.dumps_json({"slices": io.slices_json(g.table)})


def cmd_gini(args):
    sample = io.read_sample(args.input)
    m_min, m_max = cograduation_index(sample)
    if args.format == "csv":
        return io.rows_csv([{"M_min": m_min, "M_max": m_max, "N": len(sample)}])
    return io.dumps_json({"M_max": m_max, "M_min": m_min, "N": len(sample)})


def cmd_connect(args):
    a = io.read_table(args.input)
    b = io.read_table(args.target)
    try:
        ga, gb = Coupling.from_table(a), Coupling.from_table(b)
    except ValidationError as exc:
        raise InputError("coupling", str(exc)) from None
    path = connect(ga, gb)
    if args.format == "csv":
        rows = [{"x1": m.indices[0], "x2": m.indices[1], "y1": m.indices[2], "y2": m.indices[3], "alpha": a}
                for m, a in path.steps]
        return io.rows_csv(rows) if rows else "x1,x2,y1,y2,alpha\n"
    return io.dumps_json(path.to_json())


_SPEC_FIELDS = {"table", "ns", "log10_tau0", "tau0_grid", "B_grid", "replicates", "window", "seed",
                "tau0_by_n", "workers", "schedule", "threshold"}


def _experiment_spec(obj: dict, args) -> tuple[ExperimentSpec, str]:
    extra = set(obj) - _SPEC_FIELDS
    if extra:
        raise InputError("config", f"unknown fields {sorted(extra)}")
    kw = {}
    for key in ("ns", "B_grid"):
        if key in obj:
            kw[key] = tuple(int(v) for v in obj[key])
    if "log10_tau0" in obj:
        kw["tau0_grid"] = tuple(10.0 ** float(v) for v in obj["log10_tau0"])
    elif "tau0_grid" in obj:
        kw["tau0_grid"] = tuple(float(v) for v in obj["tau0_grid"])
    for key in ("replicates", "window", "seed", "workers"):
        if key in obj:
            kw[key] = int(obj[key])
    if "threshold" in obj:
        kw["threshold"] = float(obj["threshold"])
    if "tau0_by_n" in obj:
        kw["tau0_by_n"] = {int(k): float(v) for k, v in obj["tau0_by_n"].items()}
    if "schedule" in obj:
        kw["schedule"] = Schedule(**obj["schedule"]) if isinstance(obj["schedule"], dict) else Schedule.named(obj["schedule"])
    if args.schedule is not None:
        kw["schedule"] = Schedule.named(args.schedule)
    if args.seed is not None:
        kw["seed"] = args.seed
    table = str(obj.get("table", "both"))
    if table not in ("1", "2", "both"):
        raise InputError("table", f"expected 1, 2 or 'both', got {table!r}")
    try:
        return ExperimentSpec(**kw), table
    except (ValidationError, TypeError, ValueError) as exc:
        raise InputError("config", str(exc)) from None


def cmd_tables(args):
    obj = io.read_json(args.config) if args.config else {}
    spec, which = _experiment_spec(obj, args)
    result = {}
    if which in ("1", "both"):
        acc = first_move_acceptance(spec)
        result["first_move_acceptance"] = grid_rows(acc, ("n", "tau0", "acceptance"))
    if which in ("2", "both"):
        prof = convergence_profile(spec)
        result["accepted_proportion"] = grid_rows(prof, ("n", "B", "proportion"))
    if args.format == "json":
        return io.dumps_json(result)
    return "\n".join(io.rows_csv(rows) for rows in result.values())


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="tablemoves", description="Discrete optimal transport with table moves.")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("json", "csv"), default="json")
    common.add_argument("--out", metavar="FILE", help="write output here instead of standard output")
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, func, help_, need_input=True):
        sp = sub.add_parser(name, parents=[common], help=help_)
        if need_input:
            sp.add_argument("--input", metavar="FILE", required=True)
        sp.set_defaults(func=func)
        return sp

    add("solve", cmd_solve, "exact optimal coupling and its cost")
    sp = add("anneal", cmd_anneal, "simulated annealing run")
    sp.add_argument("--config", metavar="FILE")
    sp.add_argument("--seed", type=int)
    sp.add_argument("--schedule", choices=("geom95", "geom99", "harmonic", "log"))
    sp.add_argument("--with-exact", action="store_true", help="also solve exactly and report the gap")
    add("homophily", cmd_homophily, "maximal-homophily coupling of two margins")
    add("homophily3", cmd_homophily3, "maximal-homophily table of three margins")
    add("gini", cmd_gini, "co-graduation index of a paired sample")
    sp = add("connect", cmd_connect, "basic-move path between two couplings")
    sp.add_argument("--target", metavar="FILE", required=True)
    sp = add("tables", cmd_tables, "acceptance experiments over a grid", need_input=False)
    sp.add_argument("--config", metavar="FILE")
    sp.add_argument("--seed", type=int)
    sp.add_argument("--schedule", choices=("geom95", "geom99", "harmonic", "log"))
    return p


def _fail(code: int, exc: Exception) -> int:
    err = {"error": type(exc).__name__, "message": str(exc)}
    if isinstance(exc, InputError):
        err["field"] = exc.field
    sys.stderr.write(json.dumps(err, sort_keys=True) + "\n")
    return code


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        text = args.func(args)
    except NonConvergence as exc:
        return _fail(EXIT_SOLVER, exc)
    except (ValidationError, ValueError, TypeError, KeyError) as exc:
        return _fail(EXIT_INPUT, exc)
    if not text.endswith("\n"):
        text += "\n"
    if args.out:
        try:
            Path(args.out).write_text(text, encoding="utf-8")
        except OSError as exc:
            return _fail(EXIT_INPUT, InputError("out", f"cannot write {args.out}: {exc.strerror}"))
    else:
        sys.stdout.write(text)
    return EXIT_OK


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
