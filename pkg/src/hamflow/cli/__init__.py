"""``hamflow`` command line: run, verify and list scenarios."""
from __future__ import annotations

import argparse
import copy
import csv
import json
import sys
from concurrent.futures import ThreadPoolExecutor
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from hamflow import __version__
from hamflow.cli.builtins import BUILTINS
from hamflow.cli.checks import POINTWISE, REGISTRY, Context, validate_checks
from hamflow.cli.scenario import ConfigError, Scenario, load_scenario
from hamflow.errors import HamflowError
from hamflow.mechanics import integrate_hamilton, integrate_newtonian, FundamentalForm

EXIT_OK, EXIT_ERROR, EXIT_CHECK_FAILED = 0, 1, 2


def resolve_scenario(ref: str) -> Scenario:
    path = Path(ref)
    if not path.exists() and ref in BUILTINS:
        return Scenario.from_dict(copy.deepcopy(BUILTINS[ref]))
    if not path.exists():
        raise ConfigError(f"{ref}: no such file or built-in scenario")
    return load_scenario(path)


def integrate(scenario: Scenario):
    s = scenario
    obj = s.system_object
    t0, x0 = s.initial["t0"], s.initial["x"]
    if s.system_kind == "normal_form":
        return integrate_hamilton(obj, (t0, x0, s.initial["p"]), s.run["t1"], s.run["h"])
    phi = FundamentalForm.from_lagrangian(obj) if s.system_kind == "lagrangian" else obj
    return integrate_newtonian(phi, (t0, x0, s.initial["v"]), s.run["t1"], s.run["h"])


def write_trajectory(path: Path, scenario: Scenario, traj) -> None:
    header = ["t", *scenario.chart.x_names, *scenario.chart.fiber_names]
    columns = [traj.times[:, None], traj.states]
    if scenario.system_kind == "normal_form":
        header.append("H")
        columns.append(traj.along(scenario.system_object.H)[:, None])
    table = np.hstack(columns)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in table:
            writer.writerow([f"{v:.17g}" for v in row])


def run_checks(ctx: Context, names, jobs: int = 1) -> list[dict]:
    def one(name):
        chk = REGISTRY[name]
        tol = ctx.scenario.tolerance(name, chk.tolerance)
        measured, details = chk.func(ctx)
        entry = {"name": name, "status": "pass" if measured <= tol else "fail",
                 "measured": float(measured), "tolerance": tol}
        if details:
            entry["details"] = {k: (float(v) if isinstance(v, (float, np.floating)) else v)
                                for k, v in details.items()}
        return entry

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(one, names))
    return [one(n) for n in names]


def make_report(scenario: Scenario, checks: list[dict], trajectory: str | None) -> dict:
    return {
        "scenario": scenario.name,
        "tool_version": __version__,
        "seed": scenario.seed,
        "trajectory": trajectory,
        "checks": checks,
        "timestamp": datetime.now(timezone.utc).isoformat(timespec="seconds"),
    }


def _status(checks) -> int:
    return EXIT_OK if all(c["status"] == "pass" for c in checks) else EXIT_CHECK_FAILED


def _print_summary(report, stream):
    for c in report["checks"]:
        print(f"{c['status'].upper():4}  {c['name']:<24} measured={c['measured']:.3e}  tol={c['tolerance']:.1e}",
              file=stream)


def cmd_run(args) -> int:
    scenario = resolve_scenario(args.config)
    validate_checks(scenario)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    traj = integrate(scenario)
    traj_path = out / f"{scenario.name}_trajectory.csv"
    write_trajectory(traj_path, scenario, traj)
    checks = run_checks(Context(scenario, traj), scenario.checks, args.jobs)
    # relative to the report so identical runs give identical reports
    report = make_report(scenario, checks, traj_path.name)
    (out / f"{scenario.name}_report.json").write_text(json.dumps(report, indent=2) + "\n")
    _print_summary(report, sys.stdout)
    return _status(checks)


DEFAULT_VERIFY = {
    "normal_form": ["canonical_relations", "poisson_identities", "bracket_decomposition", "symbolic_derivatives"],
    "lagrangian": ["canonical_relations", "legendre_roundtrip", "symbolic_derivatives"],
    "fundamental_form": ["canonical_relations", "symbolic_derivatives"],
}


def cmd_verify(args) -> int:
    scenario = resolve_scenario(args.config)
    validate_checks(scenario)
    names = [c for c in scenario.checks if REGISTRY[c].kind == POINTWISE]
    if not names:
        names = DEFAULT_VERIFY[scenario.system_kind]
    checks = run_checks(Context(scenario), names, args.jobs)
    report = make_report(scenario, checks, None)
    print(json.dumps(report, indent=2))
    _print_summary(report, sys.stderr)
    return _status(checks)


def cmd_list(args) -> int:
    for name, spec in BUILTINS.items():
        print(f"{name}\t{spec['description']}")
    return EXIT_OK


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_ERROR)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="hamflow", description="Generalized Hamiltonian mechanics scenarios.")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    run = sub.add_parser("run", help="integrate a scenario and run its checks")
    run.add_argument("config", help="scenario JSON file or built-in name")
    run.add_argument("--out", required=True, help="output directory")
    run.add_argument("--jobs", type=int, default=1, help="run checks concurrently")
    run.set_defaults(func=cmd_run)
    verify = sub.add_parser("verify", help="run pointwise checks without integration")
    verify.add_argument("config", help="scenario JSON file or built-in name")
    verify.add_argument("--jobs", type=int, default=1)
    verify.set_defaults(func=cmd_verify)
    lst = sub.add_parser("list", help="list built-in scenarios")
    lst.set_defaults(func=cmd_list)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command is None:
        parser.print_usage(sys.stderr)
        return EXIT_ERROR
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"hamflow: config error: {exc}", file=sys.stderr)
    except (HamflowError, ArithmeticError, ValueError, OSError) as exc:
        print(f"hamflow: error: {exc}", file=sys.stderr)
    return EXIT_ERROR
