"""Independent brute-force reference for every KPI, straight loops over CSV
rows. No numpy, no engine code paths: thresholds, window math and summations
are written out longhand here so the engine can be checked against a second,
dumb implementation. Only the JSON *formatter* is shared with the package so
number rendering cannot diverge.

Run as a script to print the golden KPI document for a scenario directory:

    python tests/oracle.py path/to/scenario_dir
"""

from __future__ import annotations

import csv
import math
import sys
from datetime import datetime
from pathlib import Path

EPSILON_PCT = 0.5

CATEGORIES = ("none", "normal_cyclic", "long_time_emergency", "short_time_emergency", "critical")


def classify(ratio: float) -> str:
    if ratio <= 1.0:
        return "none"
    if ratio <= 1.5:
        return "normal_cyclic"
    if ratio <= 1.8:
        return "long_time_emergency"
    if ratio <= 2.0:
        return "short_time_emergency"
    return "critical"


def read_csv_rows(path: Path) -> tuple[list[str], list[list[str]]]:
    with open(path, newline="", encoding="utf-8") as f:
        reader = csv.reader(f)
        header = next(reader)
        return header, list(reader)


def iter_csv_rows(path: Path):
    """Stream rows one at a time (year-long wide files never fit in RAM
    as Python string lists)."""
    with open(path, newline="", encoding="utf-8") as f:
        reader = csv.reader(f)
        next(reader)
        yield from reader


def read_manifest(path: Path) -> dict[str, str]:
    out = {}
    for line in path.read_text(encoding="utf-8").splitlines():
        if "=" in line:
            key, _, value = line.partition("=")
            out[key.strip()] = value.strip().strip('"')
    return out


def oracle_kpis(scenario_dir: Path) -> dict:
    """All headline KPIs plus per-minute totals and charging counts."""
    scenario_dir = Path(scenario_dir)
    manifest = read_manifest(scenario_dir / "scenario.toml")

    agents_header, agent_rows = read_csv_rows(scenario_dir / manifest.get("agents", "agents.csv"))
    agent_ids = [r[0] for r in agent_rows]
    target = {r[0]: float(r[6]) for r in agent_rows}
    n = len(agent_ids)

    timestamps = []
    spot = []
    tariff = []
    co2 = []
    cap = []
    for r in iter_csv_rows(scenario_dir / manifest.get("system", "system.csv")):
        timestamps.append(r[0])
        spot.append(float(r[1]))
        tariff.append(float(r[2]))
        co2.append(float(r[3]))
        cap.append(float(r[4]))
    count = len(timestamps)

    totals = []
    ev_totals = []
    charging_counts = []
    per_agent_peak = [0.0] * n
    base_rows = iter_csv_rows(scenario_dir / manifest.get("baseload", "baseload.csv"))
    ev_rows = iter_csv_rows(scenario_dir / manifest.get("ev_load", "ev_load.csv"))
    for b_row, e_row in zip(base_rows, ev_rows):
        total = 0.0
        ev_total = 0.0
        charging = 0
        for a in range(n):
            b = float(b_row[a + 1])
            e = float(e_row[a + 1])
            s = b + e
            total += s
            ev_total += e
            if e > 0.0:
                charging += 1
            if s > per_agent_peak[a]:
                per_agent_peak[a] = s
        totals.append(total)
        ev_totals.append(ev_total)
        charging_counts.append(charging)
    assert len(totals) == count

    # overload classification, minute by minute
    class_minutes = {c: 0 for c in CATEGORIES}
    first_overload_row = None
    for t in range(count):
        c = classify(totals[t] / cap[t])
        class_minutes[c] += 1
        if c != "none" and first_overload_row is None:
            first_overload_row = t
    overloaded = count - class_minutes["none"]
    duration_hours = overloaded / 60.0
    first_overload = timestamps[first_overload_row] if first_overload_row is not None else None
    critical_share = class_minutes["critical"] / overloaded if overloaded else None

    peak = max(totals)
    lf = math.fsum(totals) / count / peak if peak > 0 else None
    cf = peak / math.fsum(per_agent_peak) if all(p > 0 for p in per_agent_peak) else None

    energy = math.fsum(e / 60.0 for e in ev_totals)
    cost = math.fsum(ev_totals[t] / 60.0 * (spot[t] + tariff[t]) for t in range(count))
    co2_sum = math.fsum(ev_totals[t] / 60.0 * co2[t] for t in range(count))
    revenue = math.fsum(totals[t] / 60.0 * tariff[t] for t in range(count))
    avg_cost = cost / energy if energy > 0 else None
    avg_co2 = co2_sum / energy if energy > 0 else None

    _, event_rows = read_csv_rows(scenario_dir / manifest.get("events", "events.csv"))
    dissatisfaction = []
    for r in event_rows:
        if r[2] == "departure" and float(r[3]) < target[r[0]] - EPSILON_PCT:
            dissatisfaction.append({"agent_id": r[0], "timestamp": r[1], "soc_pct": float(r[3])})

    reasons = {}
    if lf is None:
        reasons["load_factor"] = "zero peak"
    if cf is None:
        reasons["coincidence_factor"] = "zero per-agent peak"
    if avg_cost is None:
        reasons["avg_charging_cost"] = "no EV charging energy in scenario"
        reasons["avg_co2"] = "no EV charging energy in scenario"
    if critical_share is None:
        reasons["critical_share"] = "no overloaded minutes"

    return {
        "scenario_id": manifest["scenario_id"],
        "timezone": manifest.get("timezone", "Europe/Copenhagen"),
        "count": count,
        "totals": totals,
        "ev_totals": ev_totals,
        "charging_counts": charging_counts,
        "per_agent_peak": per_agent_peak,
        "dissatisfaction": dissatisfaction,
        "kpis": {
            "overload_duration_hours": duration_hours,
            "first_overload": first_overload,
            "load_factor": lf,
            "coincidence_factor": cf,
            "dissatisfaction_count": len(dissatisfaction),
            "avg_charging_cost": avg_cost,
            "avg_co2": avg_co2,
            "dso_tariff_revenue": revenue,
            "overload_class_minutes": dict(class_minutes),
            "critical_share": critical_share,
        },
        "reasons": reasons,
    }


def golden_kpi_doc(scenario_dir: Path) -> str:
    """KPI document bytes as the CLI must print them (shared formatter)."""
    from gridlens.jsonio import dumps

    result = oracle_kpis(scenario_dir)
    first = result["kpis"]["first_overload"]
    doc = {
        "schema_version": 1,
        "scenario_id": result["scenario_id"],
        "kpis": {
            **result["kpis"],
            "first_overload": datetime.fromisoformat(first) if first else None,
        },
        "reasons": dict(sorted(result["reasons"].items())),
    }
    return dumps(doc)


if __name__ == "__main__":
    sys.stdout.write(golden_kpi_doc(Path(sys.argv[1])))
