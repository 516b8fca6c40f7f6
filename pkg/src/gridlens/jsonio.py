"""Deterministic JSON rendering for reports and API responses.

The stdlib encoder reprs floats with up to 17 digits, which makes output
bytes depend on summation order noise. This serializer renders floats with
exactly 9 significant digits (the report schema's precision), preserves key
insertion order, and is shared by the CLI, the HTTP server and the golden
files, so identical values always produce identical bytes.
"""

from __future__ import annotations

import math
from datetime import date, datetime
from typing import Any

from .compare import KpiDiff
from .metrics import CATEGORY_ORDER, KpiReport
from .model import ScenarioStore
from .query import (
    AgentDetail,
    DownsampledSeries,
    EventBins,
    HeatmapDay,
    MapMetricResult,
)

SIGNIFICANT_DIGITS = 9


def fmt_float(v: float) -> str:
    if math.isnan(v) or math.isinf(v):
        raise ValueError(f"non-finite number {v!r} cannot be serialized")
    if v == int(v) and abs(v) < 1e15:
        return f"{int(v)}.0"
    return format(v, f".{SIGNIFICANT_DIGITS}g")


def dumps(obj: Any, indent: int = 2) -> str:
    """Render ``obj`` (dict/list/str/numbers/bools/None/datetime) as JSON."""
    pieces: list[str] = []
    _write(obj, pieces, indent, 0)
    return "".join(pieces) + "\n"


def _write(obj: Any, out: list[str], indent: int, level: int) -> None:
    pad = " " * (indent * (level + 1))
    end_pad = " " * (indent * level)
    if obj is None:
        out.append("null")
    elif obj is True:
        out.append("true")
    elif obj is False:
        out.append("false")
    elif isinstance(obj, str):
        out.append(_escape(obj))
    elif isinstance(obj, int):
        out.append(str(obj))
    elif isinstance(obj, float):
        out.append(fmt_float(obj))
    elif isinstance(obj, (datetime, date)):
        out.append(_escape(obj.isoformat()))
    elif isinstance(obj, dict):
        if not obj:
            out.append("{}")
            return
        out.append("{\n")
        for i, (k, v) in enumerate(obj.items()):
            out.append(f"{pad}{_escape(str(k))}: ")
            _write(v, out, indent, level + 1)
            out.append(",\n" if i < len(obj) - 1 else "\n")
        out.append(end_pad + "}")
    elif isinstance(obj, (list, tuple)):
        if not len(obj):
            out.append("[]")
            return
        out.append("[\n")
        for i, v in enumerate(obj):
            out.append(pad)
            _write(v, out, indent, level + 1)
            out.append(",\n" if i < len(obj) - 1 else "\n")
        out.append(end_pad + "]")
    else:
        # numpy scalars and similar
        if hasattr(obj, "item"):
            _write(obj.item(), out, indent, level)
        else:
            raise TypeError(f"cannot serialize {type(obj).__name__}")


_ESCAPES = {'"': '\\"', "\\": "\\\\", "\n": "\\n", "\r": "\\r", "\t": "\\t"}


def _escape(s: str) -> str:
    parts = ['"']
    for ch in s:
        if ch in _ESCAPES:
            parts.append(_ESCAPES[ch])
        elif ord(ch) < 0x20:
            parts.append(f"\\u{ord(ch):04x}")
        else:
            parts.append(ch)
    parts.append('"')
    return "".join(parts)


# -- document builders -----------------------------------------------------


def kpi_report_doc(report: KpiReport) -> dict:
    return {
        "schema_version": KpiReport.SCHEMA_VERSION,
        "scenario_id": report.scenario_id,
        "kpis": {
            "overload_duration_hours": report.overload_duration_hours,
            "first_overload": report.first_overload,
            "load_factor": report.load_factor,
            "coincidence_factor": report.coincidence_factor,
            "dissatisfaction_count": report.dissatisfaction_count,
            "avg_charging_cost": report.avg_charging_cost,
            "avg_co2": report.avg_co2,
            "dso_tariff_revenue": report.dso_tariff_revenue,
            "overload_class_minutes": {
                cat.value: report.overload_class_minutes[cat] for cat in CATEGORY_ORDER
            },
            "critical_share": report.critical_share,
        },
        "reasons": dict(sorted(report.reasons.items())),
    }


def diff_report_doc(test: KpiReport, ref: KpiReport, diffs: list[KpiDiff]) -> dict:
    return {
        "schema_version": KpiReport.SCHEMA_VERSION,
        "scenario_id": test.scenario_id,
        "reference_id": ref.scenario_id,
        "kpis": {
            d.kpi: {
                "test": d.test,
                "ref": d.ref,
                "pct_diff": d.pct_diff,
                **({"marker": d.marker} if d.marker else {}),
            }
            for d in diffs
        },
        "reasons": {
            "test": dict(sorted(test.reasons.items())),
            "ref": dict(sorted(ref.reasons.items())),
        },
    }


def series_doc(s: DownsampledSeries) -> dict:
    return {
        "variable": s.variable,
        "scope": s.scope,
        "from": s.window_start,
        "to": s.window_end,
        "buckets": [
            {
                "t_start": b.t_start,
                "min": b.min,
                "max": b.max,
                "mean": b.mean,
                "count": b.count,
            }
            for b in s.buckets
        ],
    }


def heatmap_doc(h: HeatmapDay) -> dict:
    return {
        "local_date": h.local_date,
        "agent_ids": h.agent_ids,
        "bin_starts": h.bin_starts,
        "bin_minutes": h.bin_minutes,
        "matrix": [[float(v) for v in row] for row in h.matrix],
    }


def event_bins_doc(e: EventBins) -> dict:
    return {
        "bin_width_minutes": e.bin_width_minutes,
        "bins": [
            {
                "t_start": b.t_start,
                "arrival_count": b.arrival_count,
                "departure_count": b.departure_count,
                "arrival_agent_ids": b.arrival_agent_ids,
                "departure_agent_ids": b.departure_agent_ids,
            }
            for b in e.bins
        ],
    }


def map_metric_doc(m: MapMetricResult, store: ScenarioStore) -> dict:
    return {
        "metric": m.metric,
        "from": m.window_start,
        "to": m.window_end,
        "stats": {
            "sum": m.stats["sum"],
            "max": m.stats["max"],
            "mean": m.stats["mean"],
            "min": m.stats["min"],
        },
        "agents": [
            {
                "agent_id": agent_id,
                "latitude": store.agents[i].latitude,
                "longitude": store.agents[i].longitude,
                "value": float(m.values[i]),
            }
            for i, agent_id in enumerate(m.agent_ids)
        ],
    }


def agent_detail_doc(d: AgentDetail) -> dict:
    return {
        "agent_id": d.agent_id,
        "charging": series_doc(d.charging),
        "baseload": series_doc(d.baseload),
        "soc": series_doc(d.soc),
        "markers": [
            {
                "timestamp": m.timestamp,
                "kind": m.kind,
                "soc_pct": m.soc_pct,
                "trip_distance_km": m.trip_distance_km,
            }
            for m in d.markers
        ],
        "daily_distance_km": [{"local_date": day, "km": km} for day, km in d.daily_distance_km],
        "dissatisfaction_days": d.dissatisfaction_days,
    }
