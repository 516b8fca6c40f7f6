"""Command-line entry point: generate, ingest/cache, report, serve.

Exit codes: 0 success, 1 I/O failure, 2 validation error (with a
machine-readable error list on stderr). Data goes to stdout, diagnostics to
stderr.
"""

from __future__ import annotations

import argparse
import os
import sys
from datetime import date
from pathlib import Path

from . import __version__, compare, jsonio, metrics
from .cache import read_cache, write_cache
from .errors import GridlensError
from .gen import GenConfig, generate
from .ingest import load_scenario
from .metrics import CATEGORY_ORDER, KpiReport
from .model import ScenarioStore, load_manifest


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except GridlensError as exc:
        _emit_errors([exc])
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def _emit_errors(errors) -> None:
    doc = {"errors": [{"code": e.code, "message": str(e)} for e in errors]}
    sys.stderr.write(jsonio.dumps(doc))


def _build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="gridlens", description=__doc__)
    p.add_argument("--version", action="version", version=f"gridlens {__version__}")
    sub = p.add_subparsers(required=True, metavar="command")

    g = sub.add_parser("gen", help="generate a synthetic scenario file set")
    g.add_argument("--seed", type=int, default=1)
    g.add_argument("--agents", type=int, default=126)
    g.add_argument("--start", type=date.fromisoformat, default=date(2025, 1, 1))
    g.add_argument("--end", type=date.fromisoformat, default=date(2026, 1, 1),
                   help="exclusive end date")
    g.add_argument("--capacity-kw", type=float, default=450.0)
    g.add_argument("--timezone", default="Europe/Copenhagen")
    g.add_argument("--scenario-id", default="")
    g.add_argument("--inject-dst-bug", action="store_true")
    g.add_argument("--out", required=True, type=Path)
    g.set_defaults(func=_cmd_gen)

    i = sub.add_parser("ingest", help="validate a scenario and write its cache")
    i.add_argument("--manifest", required=True, type=Path)
    i.add_argument("--cache", required=True, type=Path)
    i.set_defaults(func=_cmd_ingest)

    r = sub.add_parser("report", help="print the KPI report (and diffs vs a reference)")
    src = r.add_mutually_exclusive_group(required=True)
    src.add_argument("--manifest", type=Path)
    src.add_argument("--cache", type=Path)
    r.add_argument("--ref", type=Path, help="reference scenario (manifest .toml or cache file)")
    r.add_argument("--format", choices=("json", "text"), default="json")
    r.set_defaults(func=_cmd_report)

    s = sub.add_parser("serve", help="serve the HTTP/JSON API")
    s.add_argument("--scenario", action="append", default=[], type=Path,
                   help="manifest .toml or cache file; repeatable")
    s.add_argument("--ref", type=Path, help="reference scenario registered at startup")
    s.add_argument("--host", default=os.environ.get("GRIDLENS_HOST", "127.0.0.1"))
    s.add_argument("--port", type=int, default=int(os.environ.get("GRIDLENS_PORT", "8800")))
    s.add_argument("--static", type=Path, default=None, help="directory of built UI assets")
    s.set_defaults(func=_cmd_serve)
    return p


def _cmd_gen(args) -> int:
    config = GenConfig(
        seed=args.seed,
        n_agents=args.agents,
        start_date=args.start,
        end_date=args.end,
        timezone_name=args.timezone,
        scenario_id=args.scenario_id,
        transformer_capacity_kw=args.capacity_kw,
        inject_dst_bug=args.inject_dst_bug,
    )
    manifest_path = generate(config, args.out)
    print(manifest_path)
    return 0


def _load_store(path: Path) -> ScenarioStore:
    if path.suffix == ".toml":
        return load_scenario(load_manifest(path))
    return read_cache(path)


def _cmd_ingest(args) -> int:
    store = load_scenario(load_manifest(args.manifest))
    write_cache(store, args.cache)
    ti = store.time_index
    print(f"scenario {store.manifest.scenario_id}: OK")
    print(f"  agents           {store.n_agents}")
    print(f"  timestamps       {ti.count} ({ti.start.isoformat()} .. {ti.end.isoformat()})")
    print(f"  events           {len(store.events)}")
    print(f"  energy checksum  {jsonio.fmt_float(store.energy_checksum_kwh)} kWh")
    print(f"  cache            {args.cache}")
    return 0


def _cmd_report(args) -> int:
    store = _load_store(args.manifest or args.cache)
    report = metrics.kpi_report(store)
    ref_report = None
    if args.ref is not None:
        ref_report = metrics.kpi_report(_load_store(args.ref))

    if args.format == "json":
        if ref_report is None:
            doc = jsonio.kpi_report_doc(report)
        else:
            doc = jsonio.diff_report_doc(report, ref_report, compare.diff_kpis(report, ref_report))
        sys.stdout.write(jsonio.dumps(doc))
    else:
        _print_text_report(store, report, ref_report)
    return 0


def _print_text_report(store: ScenarioStore, report: KpiReport, ref: KpiReport | None) -> None:
    ti = store.time_index
    zone = store.zone
    print(
        f"Scenario {report.scenario_id}  "
        f"{ti.start.astimezone(zone).isoformat()} .. {ti.end.astimezone(zone).isoformat()}  "
        f"({store.n_agents} agents, {store.manifest.timezone_name})"
    )
    print()

    diffs = {d.kpi: d for d in compare.diff_kpis(report, ref)} if ref else {}

    def line(label: str, kpi: str, value, unit: str = "") -> None:
        if value is None:
            text = f"undefined ({report.reasons.get(kpi, 'not defined')})"
        elif isinstance(value, float):
            text = jsonio.fmt_float(value) + (f" {unit}" if unit else "")
        else:
            text = f"{value}" + (f" {unit}" if unit else "")
        suffix = ""
        d = diffs.get(kpi)
        if d is not None:
            if d.pct_diff is not None:
                suffix = f"  ({d.pct_diff:+.1f}% vs ref)"
            else:
                suffix = f"  ({d.marker} vs ref)"
        print(f"  {label:<24}{text}{suffix}")

    line("Overload duration", "overload_duration_hours", report.overload_duration_hours, "h")
    first = report.first_overload.astimezone(zone).isoformat() if report.first_overload else "none"
    line("First overload", "first_overload", first)
    line("Load factor", "load_factor", report.load_factor)
    line("Coincidence factor", "coincidence_factor", report.coincidence_factor)
    line("Dissatisfaction events", "dissatisfaction_count", report.dissatisfaction_count)
    line("Avg charging cost", "avg_charging_cost", report.avg_charging_cost, "DKK/kWh")
    line("Avg CO2", "avg_co2", report.avg_co2, "kg/kWh")
    line("DSO tariff revenue", "dso_tariff_revenue", report.dso_tariff_revenue, "DKK")
    print()
    classes = "  |  ".join(
        f"{cat.value} {report.overload_class_minutes[cat]}" for cat in CATEGORY_ORDER[1:]
    )
    print(f"  Overload minutes        {classes}")
    line("Critical share", "critical_share", report.critical_share)


def _cmd_serve(args) -> int:
    from .server import ScenarioRegistry, serve

    registry = ScenarioRegistry()
    for path in args.scenario:
        scenario_id = registry.load_and_add(path)
        print(f"registered {scenario_id} from {path}", file=sys.stderr)
    if args.ref is not None:
        ref_id = registry.load_and_add(args.ref)
        registry.default_reference_id = ref_id
        print(f"reference scenario: {ref_id}", file=sys.stderr)
    print(f"listening on http://{args.host}:{args.port}", file=sys.stderr)
    serve(registry, args.host, args.port, args.static)
    return 0


if __name__ == "__main__":
    sys.exit(main())
