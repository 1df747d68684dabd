"""Command-line entry point: ``amcost <command> --scenario FILE [options]``."""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from . import costing, lifecycle
from .scenario import (ScenarioError, bundled_path, compare_scenario, comparison_text, emit_report,
                       load_scenario, run_sweep, sweep_csv)
from .packer import pack_mixed, pack_single

OUTPUT_DIR_ENV = "AMCOST_OUTPUT_DIR"


def _counts(text: str) -> list[int]:
    """Parse ``"1-13"`` or ``"1,4,9"`` into a sorted list of counts."""
    out: set[int] = set()
    try:
        for chunk in text.split(","):
            if "-" in chunk:
                lo, hi = (int(x) for x in chunk.split("-", 1))
                out.update(range(lo, hi + 1))
            elif chunk.strip():
                out.add(int(chunk))
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid count range {text!r}") from None
    if not out or min(out) < 1:
        raise argparse.ArgumentTypeError(f"counts must be >= 1: {text!r}")
    return sorted(out)


def _scenario_path(text: str) -> Path:
    path = Path(text)
    if path.exists():
        return path
    shipped = bundled_path(text)
    if shipped.exists():
        return shipped
    raise ScenarioError(f"scenario file not found: {text}")


def _output(path: str | None) -> Path | None:
    if path is None:
        return None
    out = Path(path)
    base = os.environ.get(OUTPUT_DIR_ENV)
    if base and not out.is_absolute():
        out = Path(base) / out
    return out


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="amcost", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    def command(name: str, help: str) -> argparse.ArgumentParser:
        p = sub.add_parser(name, help=help, description=help)
        p.add_argument("--scenario", required=True, help="scenario file (or the name of a bundled one)")
        return p

    p = command("pack", "pack the build volume and write a build manifest")
    p.add_argument("--mode", choices=("single", "mixed"), default="mixed")
    p.add_argument("--count", type=int, default=4, help="number of required parts (default: 4)")
    p.add_argument("--out", help="manifest path (JSON); stdout if omitted")

    p = command("sweep", "cost one build per blower count")
    p.add_argument("--mode", choices=("fixture", "single", "mixed"), default="fixture")
    p.add_argument("--section", choices=("single", "mixed"), help="fixture mode: restrict to one table section")
    p.add_argument("--counts", type=_counts, help="e.g. 1-13 or 1,4,9")
    p.add_argument("--jobs", type=int, default=1, help="parallel sweep workers (output is identical)")
    p.add_argument("--out", help="CSV path; stdout if omitted")

    p = command("cost", "price a single build configuration")
    p.add_argument("--v", type=float, required=True, help="volume fraction of the part (0, 1]")
    p.add_argument("--vbuild", type=float, required=True, help="deposited build volume, cm3")
    p.add_argument("--tbuild", type=float, required=True, help="build time, h")
    p.add_argument("--layers", type=int, help="layer count (default: from the part height)")

    p = command("breakdown", "per-unit cost breakdown of one configuration")
    p.add_argument("--section", choices=("single", "mixed"), default="mixed")
    p.add_argument("--count", type=int, help="fixture row to decompose (default: scenario reference count)")
    p.add_argument("--v", type=float)
    p.add_argument("--vbuild", type=float)
    p.add_argument("--tbuild", type=float)

    p = command("compare", "compare AM against the conventional route")
    p.add_argument("--mode", choices=("fixture", "packed"), default="fixture")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out", help="summary path; stdout if omitted")
    p.add_argument("--format", choices=("text", "csv"), default="text")

    command("lifecycle", "use-phase energy savings and value share")
    return parser


def _write(text: str, out: Path | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        out.parent.mkdir(parents=True, exist_ok=True)
        out.write_text(text, encoding="utf-8")


def dispatch(args: argparse.Namespace) -> int:
    scenario = load_scenario(_scenario_path(args.scenario))
    cmd = args.command

    if cmd == "pack":
        kw = dict(layer_thickness=scenario.layer_thickness, resolution=scenario.resolution)
        if args.mode == "single":
            build = pack_single(scenario.part, args.count, scenario.build_volume, **kw)
        else:
            build = pack_mixed([(scenario.part, args.count)], scenario.basket, scenario.build_volume, **kw)
        _write(json.dumps(build.manifest(), indent=2, sort_keys=True) + "\n", _output(args.out))

    elif cmd == "sweep":
        if args.section and args.mode != "fixture":
            raise ValueError("--section only applies to --mode fixture")
        rows = run_sweep(scenario, args.mode, args.counts, section=args.section, jobs=args.jobs)
        _write(sweep_csv(rows), _output(args.out))

    elif cmd == "cost":
        n = args.layers if args.layers is not None else scenario.n_layers
        c_build = costing.build_cost(scenario.profile, args.vbuild, args.tbuild)
        c_unit = costing.unit_cost(args.v, c_build, scenario.profile)
        c_total = costing.total_unit_cost(args.v, c_build, scenario.profile, scenario.failure, n)
        print(f"C_Build = {c_build:.2f}")
        print(f"C_Unit = {c_unit:.2f}")
        print(f"C_Total = {c_total:.2f}")
        print(f"n_layers = {n}")

    elif cmd == "breakdown":
        explicit = (args.v, args.vbuild, args.tbuild)
        if any(x is not None for x in explicit):
            if any(x is None for x in explicit) or args.count is not None:
                raise ValueError("give all of --v/--vbuild/--tbuild, or --count")
            v, V, T = explicit
        else:
            count = args.count or scenario.reference_count
            rows = [r for r in scenario.fixture_rows() if r.mode == args.section and r.count == count]
            if not rows:
                raise ValueError(f"no {args.section} fixture row with count {count}")
            v, V, T = rows[0].v, rows[0].V_Build, rows[0].T_Build
        bd = costing.breakdown(v, V, T, scenario.profile, scenario.failure, scenario.n_layers)
        for name in costing.COMPONENTS:
            print(f"{name:<20} {getattr(bd, name):9.2f}  {100 * bd.shares[name]:5.1f}%")
        print(f"{'C_Unit':<20} {bd.C_Unit:9.2f}")
        print(f"{'C_Total':<20} {bd.C_Total:9.2f}")

    elif cmd == "compare":
        report = compare_scenario(scenario, "fixture" if args.mode == "fixture" else "mixed", jobs=args.jobs)
        out = _output(args.out)
        if out is None:
            _write(sweep_csv(report.rows) if args.format == "csv" else comparison_text(report), None)
        else:
            out.parent.mkdir(parents=True, exist_ok=True)
            emit_report(report, out, args.format)

    elif cmd == "lifecycle":
        if scenario.use_phase is None:
            raise ValueError("scenario has no [use_phase] section")
        life = lifecycle.evaluate(scenario.use_phase)
        print(f"S_Energy = {life.S_Energy:.2f}")
        print(f"DS_Energy = {life.DS_Energy:.2f}")
        if scenario.conventional and scenario.fixture_path is not None:
            report = compare_scenario(scenario)
            print(f"delta = {report.reference_delta:.2f}")
            print(f"theta = {100 * report.theta:.2f}%")
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return dispatch(args)
    except (ValueError, OSError) as exc:
        print(f"amcost {args.command}: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
