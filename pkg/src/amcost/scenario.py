"""Scenario files, cost sweeps, the AM vs conventional comparison and reports.

A scenario is a TOML file with the sections ``[profile]``, ``[failure]``,
``[build_volume]``, ``[time_model]``, ``[fixture]``, ``[parts]``,
``[[basket]]``, ``[use_phase]``, ``[comparison]`` and ``[[conventional]]``.
Relative paths are resolved against the scenario file's directory.
"""

from __future__ import annotations

import csv
import io
import math
import statistics
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import cached_property
from importlib import resources
from pathlib import Path
from typing import Iterable, Literal, Sequence

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from . import costing, lifecycle
from .costing import FailureModel, ProcessProfile
from .geometry import MeshError, PartSpec, load_mesh
from .lifecycle import LifecycleResult, UsePhaseScenario
from .packer import (DEFAULT_LAYER_THICKNESS, DEFAULT_RESOLUTION, BuildVolume, PackingError,
                     compute_layers, pack_mixed, pack_single)
from .timemodel import Calibration, TimeModelParams, calibrate, estimate_build_time

CSV_COLUMNS = ("mode", "count", "v_pct", "V_build_cm3", "T_build_h", "dep_rate_cm3_h",
               "C_build", "C_unit", "C_total")

SweepMode = Literal["single", "mixed", "fixture"]


class ScenarioError(ValueError):
    pass


def bundled_path(name: str) -> Path:
    """Path of a data file shipped with the package (e.g. ``blower.scenario``)."""
    return Path(str(resources.files("amcost") / "data" / name))


# --------------------------------------------------------------------------
# records

@dataclass(frozen=True)
class ConventionalCostRecord:
    batch_size: int
    unit_cost: float
    component_shares: tuple[tuple[str, str, float], ...] = ()

    def __post_init__(self):
        if not self.unit_cost > 0:
            raise ValueError(f"conventional unit_cost must be > 0, got {self.unit_cost}")
        if self.batch_size < 1:
            raise ValueError("conventional batch_size must be >= 1")
        if self.component_shares:
            total = sum(s[2] for s in self.component_shares)
            # published shares are rounded; keep them verbatim
            if abs(total - 100.0) > 0.5:
                raise ValueError(f"batch {self.batch_size}: component shares sum to {total:.2f}%, not 100%")


@dataclass(frozen=True)
class SweepRow:
    mode: str
    count: int
    v: float
    V_Build: float
    T_Build: float
    C_Build: float
    C_Unit: float
    C_Total: float

    @property
    def deposition_rate(self) -> float:
        return self.V_Build / self.T_Build if self.T_Build > 0 else 0.0

    def csv_record(self) -> list[str]:
        return [self.mode, str(self.count), f"{100 * self.v:.2f}", f"{self.V_Build:.2f}",
                f"{self.T_Build:.2f}", f"{self.deposition_rate:.2f}", f"{self.C_Build:.2f}",
                f"{self.C_Unit:.2f}", f"{self.C_Total:.2f}"]


def read_fixture(path) -> list[SweepRow]:
    """Read a Table-4 style CSV (``#`` lines are provenance comments)."""
    path = Path(path)
    try:
        lines = [ln for ln in path.read_text(encoding="utf-8").splitlines() if ln and not ln.startswith("#")]
    except OSError as exc:
        raise ScenarioError(f"cannot read fixture {path}: {exc}") from exc
    reader = csv.DictReader(lines)
    if tuple(reader.fieldnames or ()) != CSV_COLUMNS:
        raise ScenarioError(f"{path}: expected columns {', '.join(CSV_COLUMNS)}")
    rows = []
    for rec in reader:
        rows.append(SweepRow(rec["mode"], int(rec["count"]), float(rec["v_pct"]) / 100.0,
                             float(rec["V_build_cm3"]), float(rec["T_build_h"]), float(rec["C_build"]),
                             float(rec["C_unit"]), float(rec["C_total"])))
    return rows


# --------------------------------------------------------------------------
# scenario

@dataclass
class Scenario:
    profile: ProcessProfile
    failure: FailureModel
    build_volume: BuildVolume
    required: list[PartSpec]
    basket: list[PartSpec]
    layer_thickness: float = DEFAULT_LAYER_THICKNESS
    resolution: float = DEFAULT_RESOLUTION
    time_params: TimeModelParams | None = None
    calibrate_on: str | None = "single"
    fixture_path: Path | None = None
    use_phase: UsePhaseScenario | None = None
    conventional: list[ConventionalCostRecord] = field(default_factory=list)
    reference_count: int = 4

    @property
    def part(self) -> PartSpec:
        """The part being costed (first required part)."""
        if not self.required:
            raise ScenarioError("scenario has no required part")
        return self.required[0]

    @property
    def n_layers(self) -> int:
        """Layer count of the costed part; it is the tallest part in every build."""
        return compute_layers(self.part.height, self.layer_thickness)

    def fixture_rows(self) -> list[SweepRow]:
        if self.fixture_path is None:
            raise ScenarioError("scenario has no [fixture] table")
        return read_fixture(self.fixture_path)

    @cached_property
    def calibration(self) -> Calibration | None:
        if self.time_params is not None or self.calibrate_on is None:
            return None
        rows = [r for r in self.fixture_rows() if r.mode == self.calibrate_on]
        return calibrate([(self.n_layers, r.V_Build, r.T_Build) for r in rows])

    def time_model(self) -> TimeModelParams:
        if self.time_params is not None:
            return self.time_params
        if self.calibration is None:
            raise ScenarioError("no [time_model] parameters and no calibration source")
        return self.calibration.params


def _section(doc: dict, name: str, required: bool = True) -> dict | None:
    sec = doc.get(name)
    if sec is None:
        if required:
            raise ScenarioError(f"missing section [{name}]")
        return None
    if not isinstance(sec, dict):
        raise ScenarioError(f"[{name}] must be a table")
    return sec


def _num(sec: dict, section: str, key: str, default=None, positive: bool = False) -> float | None:
    if key not in sec:
        if default is None:
            raise ScenarioError(f"[{section}] missing key {key!r}")
        return default
    value = sec[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
        raise ScenarioError(f"[{section}] {key}: expected a number, got {value!r}")
    if value < 0 or (positive and value == 0):
        raise ScenarioError(f"[{section}] {key}: must be {'> 0' if positive else '>= 0'}, got {value}")
    return float(value)


def _opt(sec: dict, section: str, key: str) -> float | None:
    return _num(sec, section, key) if key in sec else None


def _build(section: str, factory, *args, **kwargs):
    try:
        return factory(*args, **kwargs)
    except (ValueError, MeshError) as exc:
        if isinstance(exc, ScenarioError):
            raise
        raise ScenarioError(f"[{section}] {exc}") from exc


def load_scenario(path) -> Scenario:
    """Parse and validate a scenario file.

    Raises:
        ScenarioError: missing file, key or section, or any invariant violation
            (the message names the section and field).
    """
    path = Path(path)
    try:
        doc = tomllib.loads(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise ScenarioError(f"cannot read scenario {path}: {exc}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise ScenarioError(f"{path}: {exc}") from exc
    base = path.parent

    p = _section(doc, "profile")
    profile = _build("profile", ProcessProfile,
                     p_material=_num(p, "profile", "p_material_eur_per_cm3"),
                     c_setup_labour=_num(p, "profile", "c_setup_labour_eur"),
                     indirect_rate=_num(p, "profile", "indirect_rate_eur_per_h"),
                     energy_rate=_num(p, "profile", "energy_rate_eur_per_h"),
                     labour_rate=_num(p, "profile", "labour_rate_eur_per_h"),
                     t_process=_num(p, "profile", "t_process_min") / 60.0,
                     production_overhead_rate=_opt(p, "profile", "production_overhead_rate_eur_per_h"),
                     admin_overhead_rate=_opt(p, "profile", "admin_overhead_rate_eur_per_h"),
                     machine_cost_rate=_opt(p, "profile", "machine_cost_rate_eur_per_h"),
                     machine_utilisation=_opt(p, "profile", "machine_utilisation"),
                     annual_operating_hours=_opt(p, "profile", "annual_operating_hours"),
                     energy_price=_opt(p, "profile", "energy_price_eur_per_mj"),
                     energy_consumption_rate=_opt(p, "profile", "energy_consumption_mj_per_h"))

    f = _section(doc, "failure")
    setup_in_failure = bool(f.get("setup_in_failure", True))
    if "p_constant" in f and "mean_layers_to_failure" in f:
        raise ScenarioError("[failure] give either p_constant or mean_layers_to_failure, not both")
    if "mean_layers_to_failure" in f:
        failure = _build("failure", FailureModel.from_mean_layers,
                         _num(f, "failure", "mean_layers_to_failure", positive=True), setup_in_failure)
    else:
        failure = _build("failure", FailureModel, _num(f, "failure", "p_constant"), setup_in_failure)

    b = _section(doc, "build_volume")
    bv = _build("build_volume", BuildVolume,
                x=_num(b, "build_volume", "x_mm", 250.0, positive=True),
                y=_num(b, "build_volume", "y_mm", 250.0, positive=True),
                z=_num(b, "build_volume", "z_mm", 215.0, positive=True),
                spacing=_num(b, "build_volume", "spacing_mm", 5.0))
    layer = _num(b, "build_volume", "layer_thickness_mm", DEFAULT_LAYER_THICKNESS, positive=True)
    resolution = _num(b, "build_volume", "resolution_mm", DEFAULT_RESOLUTION, positive=True)

    tm = _section(doc, "time_model", required=False) or {}
    time_params = None
    if "t_layer_s" in tm or "melt_rate_cm3_per_h" in tm:
        time_params = _build("time_model", TimeModelParams,
                             _num(tm, "time_model", "t_layer_s", positive=True),
                             _num(tm, "time_model", "melt_rate_cm3_per_h", positive=True))
    calibrate_on = tm.get("calibrate_on", "single")
    if calibrate_on not in ("single", "mixed"):
        raise ScenarioError(f"[time_model] calibrate_on: expected 'single' or 'mixed', got {calibrate_on!r}")

    fx = _section(doc, "fixture", required=False)
    fixture_path = None
    if fx is not None:
        fixture_path = _resolve(base, fx.get("table", ""), "fixture", "table")

    parts = _section(doc, "parts")
    unit = parts.get("unit", "mm")
    required = [_load_part(base, spec, unit, "required", "parts.required") for spec in parts.get("required", [])]
    if not required:
        raise ScenarioError("[parts] at least one [[parts.required]] entry is needed")
    basket = [_load_part(base, spec, unit, "reference", "basket") for spec in doc.get("basket", [])]
    for part in required + basket:
        if part.height > bv.z or part.footprint[0] > bv.x or part.footprint[1] > bv.y:
            raise ScenarioError(f"part {part.name!r} does not fit inside the build volume")

    u = _section(doc, "use_phase", required=False)
    use_phase = None
    if u is not None:
        use_phase = _build("use_phase", UsePhaseScenario,
                           power_conventional=_num(u, "use_phase", "power_conventional_w"),
                           power_am=_num(u, "use_phase", "power_am_w"),
                           annual_hours=_num(u, "use_phase", "annual_hours", positive=True),
                           lifetime_hours=_num(u, "use_phase", "lifetime_hours"),
                           k=_num(u, "use_phase", "k_years"),
                           use_energy_price=_num(u, "use_phase", "use_energy_price_eur_per_mj"),
                           r=_num(u, "use_phase", "discount_rate"),
                           throughput_high=_opt(u, "use_phase", "throughput_high_per_h"),
                           throughput_low=_opt(u, "use_phase", "throughput_low_per_h"))

    conventional = []
    for i, rec in enumerate(doc.get("conventional", [])):
        sec = f"conventional.{i}"
        shares = tuple((str(s.get("label", "")), str(s.get("process", "")), _num(s, sec, "percent"))
                       for s in rec.get("shares", []))
        conventional.append(_build(sec, ConventionalCostRecord, int(_num(rec, sec, "batch_size", positive=True)),
                                   _num(rec, sec, "unit_cost_eur", positive=True), shares))

    cmp_sec = _section(doc, "comparison", required=False) or {}
    reference_count = int(_num(cmp_sec, "comparison", "reference_count", 4, positive=True))

    return Scenario(profile=profile, failure=failure, build_volume=bv, required=required, basket=basket,
                    layer_thickness=layer, resolution=resolution, time_params=time_params,
                    calibrate_on=calibrate_on, fixture_path=fixture_path, use_phase=use_phase,
                    conventional=conventional, reference_count=reference_count)


def _resolve(base: Path, rel, section: str, key: str) -> Path:
    if not isinstance(rel, str) or not rel:
        raise ScenarioError(f"[{section}] {key}: expected a file path")
    path = (base / rel).resolve()
    if not path.exists():
        raise ScenarioError(f"[{section}] {key}: file not found: {path}")
    return path


def _load_part(base: Path, spec: dict, unit: str, role: str, section: str) -> PartSpec:
    path = _resolve(base, spec.get("path"), section, "path")
    mesh = _build(section, load_mesh, path, unit=spec.get("unit", unit), name=spec.get("name"))
    volume = _opt(spec, section, "deposited_volume_cm3")
    return _build(section, PartSpec.from_mesh, mesh, role=role, deposited_volume=volume)


# --------------------------------------------------------------------------
# sweeps

def cost_row(scenario: Scenario, mode: str, count: int, v: float, V_Build: float, T_Build: float) -> SweepRow:
    """Price one build configuration with the scenario's profile and failure model."""
    C_Build = costing.build_cost(scenario.profile, V_Build, T_Build)
    C_Unit = costing.unit_cost(v, C_Build, scenario.profile)
    C_Total = costing.total_unit_cost(v, C_Build, scenario.profile, scenario.failure, scenario.n_layers)
    return SweepRow(mode, count, v, V_Build, T_Build, C_Build, C_Unit, C_Total)


def _packed_row(scenario: Scenario, mode: str, count: int) -> SweepRow:
    part = scenario.part
    kw = dict(layer_thickness=scenario.layer_thickness, resolution=scenario.resolution)
    if mode == "single":
        build = pack_single(part, count, scenario.build_volume, **kw)
        if build.truncated:
            raise PackingError(f"only {len(build.instances)} of {count} {part.name!r} fit the build volume")
    else:
        build = pack_mixed([(part, count)], scenario.basket, scenario.build_volume, **kw)
    T = estimate_build_time(build, scenario.time_model())
    v = costing.volume_fraction(part.deposited_volume, build.V_Build)
    C_Build = costing.build_cost(scenario.profile, build.V_Build, T)
    return SweepRow(mode, count, v, build.V_Build, T, C_Build,
                    costing.unit_cost(v, C_Build, scenario.profile),
                    costing.total_unit_cost(v, C_Build, scenario.profile, scenario.failure, build.n_layers))


def run_sweep(scenario: Scenario, mode: SweepMode, counts: Iterable[int] | None = None,
              section: str | None = None, jobs: int = 1) -> list[SweepRow]:
    """Cost one build per blower count.

    In ``fixture`` mode the (v, V_Build, T_Build) columns come from the
    scenario's fixture table (optionally restricted to `section`) and only
    the cost columns are computed. ``single`` and ``mixed`` pack the build
    and estimate its time first. Rows are ordered by (mode, count);
    ``jobs`` > 1 evaluates rows in parallel with identical results.
    """
    wanted = None if counts is None else set(counts)
    if mode == "fixture":
        rows = [r for r in scenario.fixture_rows()
                if (section is None or r.mode == section) and (wanted is None or r.count in wanted)]
        out = [cost_row(scenario, r.mode, r.count, r.v, r.V_Build, r.T_Build) for r in rows]
        return sorted(out, key=lambda r: (r.mode, r.count))
    if mode not in ("single", "mixed"):
        raise ValueError(f"unknown sweep mode {mode!r}")
    todo = sorted(wanted) if wanted is not None else list(range(1, 21 if mode == "single" else 14))
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(lambda n: _packed_row(scenario, mode, n), todo))
    return [_packed_row(scenario, mode, n) for n in todo]


# --------------------------------------------------------------------------
# comparison

@dataclass(frozen=True)
class ComparisonReport:
    rows: tuple[SweepRow, ...]
    savings: dict[int, dict[int, float]]  # batch size -> count -> saving fraction (mixed rows)
    savings_envelope: tuple[float, float]
    overstatement: dict[int, float]  # count -> C_Total_single / C_Total_mixed - 1
    mean_overstatement: float
    min_cost_mixed: SweepRow
    min_cost_single: SweepRow
    specific_cost_mixed: float
    specific_cost_single: float
    reference_count: int
    reference_C_Total: float
    conventional_low_cost: float
    reference_delta: float
    reference_saving: float
    lifecycle: LifecycleResult | None = None
    theta: float | None = None


def savings(C_Total: float, conventional_cost: float) -> float:
    return 1.0 - C_Total / conventional_cost


def compare(sweep_mixed: Sequence[SweepRow], sweep_single: Sequence[SweepRow],
            conventional: Sequence[ConventionalCostRecord], part_volume: float,
            lifecycle_result: LifecycleResult | None = None, reference_count: int = 4) -> ComparisonReport:
    """Contrast mixed and blower-only AM costs with the conventional route.

    Savings are taken for every mixed row against every conventional batch
    size; the envelope is their min and max. Overstatement is computed for
    counts present in both sweeps. The reference configuration
    (`reference_count` blowers in a mixed build) is compared with the
    cheapest conventional record, which also feeds the value share.
    """
    if not sweep_mixed or not sweep_single:
        raise ValueError("both sweeps must be non-empty")
    if not conventional:
        raise ValueError("no conventional cost records")
    sav = {rec.batch_size: {r.count: savings(r.C_Total, rec.unit_cost) for r in sweep_mixed}
           for rec in conventional}
    flat = [s for per in sav.values() for s in per.values()]
    single_by_count = {r.count: r for r in sweep_single}
    over = {r.count: single_by_count[r.count].C_Total / r.C_Total - 1.0
            for r in sweep_mixed if r.count in single_by_count}
    if not over:
        raise ValueError("sweeps share no blower count")
    best_mixed = min(sweep_mixed, key=lambda r: (r.C_Total, r.count))
    best_single = min(sweep_single, key=lambda r: (r.C_Total, r.count))
    ref = {r.count: r for r in sweep_mixed}.get(reference_count)
    if ref is None:
        raise ValueError(f"reference count {reference_count} missing from the mixed sweep")
    low = min(rec.unit_cost for rec in conventional)
    delta = low - ref.C_Total
    theta = None
    if lifecycle_result is not None:
        theta = lifecycle.value_share(low, ref.C_Total, lifecycle_result.DS_Energy)
    rows = tuple(sorted([*sweep_mixed, *sweep_single], key=lambda r: (r.mode, r.count)))
    return ComparisonReport(
        rows=rows, savings=sav, savings_envelope=(min(flat), max(flat)), overstatement=over,
        mean_overstatement=statistics.fmean(over.values()),
        min_cost_mixed=best_mixed, min_cost_single=best_single,
        specific_cost_mixed=costing.specific_cost(best_mixed.C_Total, part_volume),
        specific_cost_single=costing.specific_cost(best_single.C_Total, part_volume),
        reference_count=reference_count, reference_C_Total=ref.C_Total, conventional_low_cost=low,
        reference_delta=delta, reference_saving=savings(ref.C_Total, low),
        lifecycle=lifecycle_result, theta=theta)


def compare_scenario(scenario: Scenario, mode: SweepMode = "fixture", jobs: int = 1) -> ComparisonReport:
    if mode == "fixture":
        rows = run_sweep(scenario, "fixture")
        mixed = [r for r in rows if r.mode == "mixed"]
        single = [r for r in rows if r.mode == "single"]
    else:
        mixed = run_sweep(scenario, "mixed", jobs=jobs)
        single = run_sweep(scenario, "single", jobs=jobs)
    life = lifecycle.evaluate(scenario.use_phase) if scenario.use_phase is not None else None
    return compare(mixed, single, scenario.conventional, scenario.part.deposited_volume, life,
                   scenario.reference_count)


# --------------------------------------------------------------------------
# reports

def sweep_csv(rows: Sequence[SweepRow]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for row in sorted(rows, key=lambda r: (r.mode, r.count)):
        writer.writerow(row.csv_record())
    return buf.getvalue()


def comparison_text(report: ComparisonReport) -> str:
    """Comparison summary as ``key = value`` lines grouped in ``[sections]``."""
    out = ["[comparison]"]
    lo, hi = report.savings_envelope
    out.append(f"savings_envelope_pct = [{100 * lo:.1f}, {100 * hi:.1f}]")
    for batch in sorted(report.savings):
        per = report.savings[batch]
        out.append(f"savings_vs_batch_{batch}_pct = [" + ", ".join(f"{100 * per[c]:.1f}" for c in sorted(per)) + "]")
    out.append("overstatement_pct = [" + ", ".join(
        f"{100 * report.overstatement[c]:.1f}" for c in sorted(report.overstatement)) + "]")
    out.append(f"mean_overstatement_pct = {100 * report.mean_overstatement:.1f}")
    out.append(f"min_cost_mixed = {{ count = {report.min_cost_mixed.count}, C_total = {report.min_cost_mixed.C_Total:.2f} }}")
    out.append(f"min_cost_single = {{ count = {report.min_cost_single.count}, C_total = {report.min_cost_single.C_Total:.2f} }}")
    out.append(f"specific_cost_mixed_eur_per_cm3 = {report.specific_cost_mixed:.2f}")
    out.append(f"specific_cost_single_eur_per_cm3 = {report.specific_cost_single:.2f}")
    out.append(f"reference_count = {report.reference_count}")
    out.append(f"reference_C_total = {report.reference_C_Total:.2f}")
    out.append(f"conventional_low_cost = {report.conventional_low_cost:.2f}")
    out.append(f"reference_delta = {report.reference_delta:.2f}")
    out.append(f"reference_saving_pct = {100 * report.reference_saving:.1f}")
    if report.lifecycle is not None:
        life = report.lifecycle
        out.append("")
        out.append("[lifecycle]")
        out.append(f"S_Energy = {life.S_Energy:.2f}")
        out.append(f"DS_Energy = {life.DS_Energy:.2f}")
        out.append(f"discount_rate = {life.r:g}")
        out.append(f"k_years = {life.k:g}")
        if report.theta is not None:
            out.append(f"theta_pct = {100 * report.theta:.2f}")
    return "\n".join(out) + "\n"


def emit_report(report: ComparisonReport | Sequence[SweepRow], path, format: str = "csv") -> Path:
    """Write the sweep table (``csv``) or the comparison summary (``text``) to `path`."""
    rows = report.rows if isinstance(report, ComparisonReport) else tuple(report)
    if format == "csv":
        payload = sweep_csv(rows)
    elif format == "text":
        if not isinstance(report, ComparisonReport):
            raise ValueError("text format needs a ComparisonReport")
        payload = comparison_text(report)
    else:
        raise ValueError(f"unknown report format {format!r}")
    path = Path(path)
    try:
        path.write_text(payload, encoding="utf-8")
    except OSError as exc:
        raise OSError(f"cannot write report to {path}: {exc}") from exc
    return path
