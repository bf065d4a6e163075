"""Command-line front end: run scenarios, list the catalog, verify invariants.

Exit codes: 0 success, 1 usage error, 2 invariant-check failure,
3 integration failure.
"""

from __future__ import annotations

import argparse
import json
import sys

from .errors import CavityChemError, ScenarioError, StabilityError
from .runner import run_scenario, run_sweep, verify, write_csv
from .scenarios import SCENARIO_IDS, build_scenario, describe_scenarios, parse_state_literal

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_INVARIANT = 2
EXIT_INTEGRATION = 3


def _parse_set(pairs):
    overrides = {}
    for pair in pairs or ():
        if "=" not in pair:
            raise ScenarioError(f"--set expects key=value, got {pair!r}")
        key, raw = pair.split("=", 1)
        try:
            overrides[key] = json.loads(raw)
        except json.JSONDecodeError:
            overrides[key] = raw
    return overrides


def _load_config(ref: str):
    """A scenario reference is a built-in id or a path to a JSON document."""
    if ref in SCENARIO_IDS:
        return {"scenario": ref}
    try:
        with open(ref) as fh:
            doc = json.load(fh)
    except FileNotFoundError:
        raise ScenarioError(f"unknown scenario {ref!r} and no such config file") from None
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"config file {ref!r} is not valid JSON: {exc}") from None
    if "scenario" not in doc:
        raise ScenarioError("config file must name a 'scenario'")
    return doc


def cmd_run(args) -> int:
    doc = _load_config(args.scenario)
    overrides = dict(doc.get("params", {}))
    overrides.update(_parse_set(args.set))
    sid = doc["scenario"]

    t_final = args.t_max if args.t_max is not None else doc.get("t_final")
    samples = args.samples if args.samples is not None else doc.get("samples")
    dt = args.dt if args.dt is not None else doc.get("dt")
    integrator = args.integrator if args.integrator is not None else doc.get("integrator")

    try:
        if sid == "bottleneck-sweep":
            trajectory, report = run_sweep(overrides or None)
        else:
            scenario = build_scenario(sid, overrides or None)
            initial = None
            if "initial_state" in doc:
                initial = parse_state_literal(scenario.space, doc["initial_state"])
            trajectory, report = run_scenario(
                scenario,
                t_final=t_final,
                samples=samples,
                dt=dt,
                integrator=integrator,
                initial_state=initial,
            )
    except StabilityError as exc:
        print(f"integration failure: {exc}", file=sys.stderr)
        return EXIT_INTEGRATION
    if args.out:
        write_csv(trajectory, args.out)
        print(f"wrote {args.out}")
    print(report.text())
    return EXIT_OK if report.passed else EXIT_INVARIANT


def cmd_list(_args) -> int:
    print(describe_scenarios())
    return EXIT_OK


def cmd_verify(args) -> int:
    report = verify(args.suite)
    print(report.text())
    return EXIT_OK if report.passed else EXIT_INVARIANT


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cavitychem",
        description="finite-dimensional cavity models of artificial chemistry",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run a scenario by id or config file")
    p_run.add_argument("scenario", help="built-in id or JSON config path")
    p_run.add_argument("--set", action="append", metavar="KEY=VALUE", help="override a scenario parameter")
    p_run.add_argument("--out", help="CSV output path")
    p_run.add_argument("--dt", type=float, help="integrator step (fixed-step integrator only)")
    p_run.add_argument("--t-max", type=float, dest="t_max", help="final time")
    p_run.add_argument("--samples", type=int, help="number of sample intervals")
    p_run.add_argument("--integrator", choices=("rk4", "exact", "expm"), help="evolver override")
    p_run.set_defaults(func=cmd_run)

    p_list = sub.add_parser("list", help="list built-in scenarios")
    p_list.set_defaults(func=cmd_list)

    p_verify = sub.add_parser("verify", help="run property-check suites")
    p_verify.add_argument("suite", choices=("darkstates", "dynamics", "all"), nargs="?", default="all")
    p_verify.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except StabilityError as exc:
        print(f"integration failure: {exc}", file=sys.stderr)
        return EXIT_INTEGRATION
    except (ScenarioError, CavityChemError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
