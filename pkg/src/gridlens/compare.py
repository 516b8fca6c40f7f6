"""Reference-scenario comparison: percentage KPI diffs and paired overlays.

Sign convention: positive means the test scenario exceeds the reference.
Zero-reference and non-numeric cases are explicit markers, never infinities,
so serialized diffs stay JSON- and UI-safe.
"""

from __future__ import annotations

from dataclasses import dataclass
from datetime import datetime
from typing import Optional, Union

from .errors import SchemaMismatch, WindowMismatch
from .metrics import CATEGORY_ORDER, KpiReport
from .model import ScenarioStore
from .query import DownsampledSeries, series_window

#: marker values for pct_diff when a percentage is not defined
UNDEFINED_ZERO_REF = "undefined_zero_reference"
INCOMPARABLE = "incomparable"


@dataclass(frozen=True)
class KpiDiff:
    kpi: str
    test: Union[float, int, str, None]
    ref: Union[float, int, str, None]
    pct_diff: Optional[float]
    marker: Optional[str] = None  # set iff pct_diff is None


def _pct(test: float, ref: float) -> tuple[Optional[float], Optional[str]]:
    if ref == 0.0:
        if test == 0.0:
            return 0.0, None
        return None, UNDEFINED_ZERO_REF
    return 100.0 * (test - ref) / ref, None


def diff_kpis(test: KpiReport, ref: KpiReport) -> list[KpiDiff]:
    """One diff per KPI, overload classes flattened to dotted names."""
    if test.SCHEMA_VERSION != ref.SCHEMA_VERSION:
        raise SchemaMismatch("KPI reports use different schema versions")

    out: list[KpiDiff] = []

    def numeric(name: str, t, r) -> None:
        if t is None or r is None:
            out.append(KpiDiff(name, t, r, None, INCOMPARABLE))
            return
        pct, marker = _pct(float(t), float(r))
        out.append(KpiDiff(name, t, r, pct, marker))

    numeric("overload_duration_hours", test.overload_duration_hours, ref.overload_duration_hours)

    t_first = test.first_overload.isoformat() if test.first_overload else None
    r_first = ref.first_overload.isoformat() if ref.first_overload else None
    if test.first_overload == ref.first_overload:  # same instant (or both absent)
        out.append(KpiDiff("first_overload", t_first, r_first, 0.0))
    else:
        out.append(KpiDiff("first_overload", t_first, r_first, None, INCOMPARABLE))

    numeric("load_factor", test.load_factor, ref.load_factor)
    numeric("coincidence_factor", test.coincidence_factor, ref.coincidence_factor)
    numeric("dissatisfaction_count", test.dissatisfaction_count, ref.dissatisfaction_count)
    numeric("avg_charging_cost", test.avg_charging_cost, ref.avg_charging_cost)
    numeric("avg_co2", test.avg_co2, ref.avg_co2)
    numeric("dso_tariff_revenue", test.dso_tariff_revenue, ref.dso_tariff_revenue)
    for cat in CATEGORY_ORDER:
        numeric(
            f"overload_class_minutes.{cat.value}",
            test.overload_class_minutes[cat],
            ref.overload_class_minutes[cat],
        )
    numeric("critical_share", test.critical_share, ref.critical_share)
    return out


@dataclass(frozen=True)
class PairedSeries:
    test: DownsampledSeries
    ref: DownsampledSeries


def overlay_series(
    test_store: ScenarioStore,
    ref_store: ScenarioStore,
    variable: str,
    scope: str,
    start: datetime,
    end: datetime,
    buckets: int,
) -> PairedSeries:
    """The same downsampled window from two stores, bucket-aligned.

    Both stores must cover [start, end) and share minute-grid phase;
    otherwise the bucket boundaries could not match and WindowMismatch is
    raised.
    """
    for name, store in (("test", test_store), ("ref", ref_store)):
        ti = store.time_index
        if start < ti.start or end > ti.end:
            raise WindowMismatch(
                f"{name} scenario {store.manifest.scenario_id!r} does not cover "
                f"[{start.isoformat()}, {end.isoformat()})"
            )
    phase_t = int(test_store.time_index.start.timestamp()) % 60
    phase_r = int(ref_store.time_index.start.timestamp()) % 60
    if phase_t != phase_r:
        raise WindowMismatch("scenario minute grids are phase-shifted; buckets cannot align")

    pair = PairedSeries(
        test=series_window(test_store, variable, scope, start, end, buckets),
        ref=series_window(ref_store, variable, scope, start, end, buckets),
    )
    return pair
