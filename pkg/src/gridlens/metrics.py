"""Grid-impact KPIs: overload classification, load/coincidence factors,
dissatisfaction detection, charging cost, CO2 intensity and tariff revenue.

Definitions are exact and oracle-checkable:

* per-minute load ratio = total load / transformer capacity at that minute;
* loading categories follow the IEC 60076-7 bands with right-closed
  boundaries: none <= 100% < normal cyclic <= 150% < long-time emergency
  <= 180% < short-time emergency <= 200% < critical;
* load factor = mean / peak of the total load series;
* coincidence factor = system peak / sum of individual agent peaks;
* cost and CO2 KPIs are weighted by EV charging energy; DSO tariff revenue
  covers total consumption (baseload + EV).

Final scalar reductions use compensated summation (``math.fsum``) so results
are bit-stable regardless of internal chunking.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from datetime import datetime
from enum import Enum
from typing import Optional

import numpy as np

from .errors import NoChargingEnergy, NonFinite, ZeroPeak
from .model import DEPARTURE, STEP, ScenarioStore

MINUTES_PER_HOUR = 60.0
HOURS_PER_MINUTE = 1.0 / 60.0

#: default dissatisfaction tolerance, percent points
DEFAULT_EPSILON_PCT = 0.5


class OverloadCategory(Enum):
    NONE = "none"
    NORMAL_CYCLIC = "normal_cyclic"
    LONG_TIME_EMERGENCY = "long_time_emergency"
    SHORT_TIME_EMERGENCY = "short_time_emergency"
    CRITICAL = "critical"


CATEGORY_ORDER = tuple(OverloadCategory)

# Right-closed upper bounds of the first four bands, as load ratios.
_BAND_EDGES = np.array([1.0, 1.5, 1.8, 2.0])


def classify_ratio(ratio: float) -> OverloadCategory:
    """Map a load ratio to its loading category (boundaries right-closed)."""
    if not math.isfinite(ratio):
        raise NonFinite(f"load ratio must be finite, got {ratio!r}")
    return CATEGORY_ORDER[int(np.searchsorted(_BAND_EDGES, ratio, side="left"))]


def classify_ratios(ratios: np.ndarray) -> np.ndarray:
    """Vectorized :func:`classify_ratio`; returns category ordinals (0..4)."""
    if not np.isfinite(ratios).all():
        raise NonFinite("load ratio series contains non-finite values")
    return np.searchsorted(_BAND_EDGES, ratios, side="left")


def total_load_series(store: ScenarioStore) -> np.ndarray:
    """Per-minute total load, kW: sum of baseload and EV load over agents."""
    return store.baseload_total_kw + store.ev_total_kw


def load_factor(series: np.ndarray) -> float:
    """Mean over peak of a load series; ZeroPeak when the peak is 0."""
    if len(series) == 0:
        raise ZeroPeak("load factor of an empty series")
    peak = float(np.max(series))
    if peak == 0.0:
        raise ZeroPeak("load factor undefined: peak load is 0")
    return math.fsum(series) / len(series) / peak


def coincidence_factor(store: ScenarioStore) -> float:
    """System peak over the sum of per-agent peaks of (baseload + EV) load."""
    peaks = store.per_agent_peak_kw
    if (peaks == 0.0).any():
        idx = int(np.flatnonzero(peaks == 0.0)[0])
        raise ZeroPeak(f"agent {store.agents[idx].agent_id} has zero peak load")
    system_peak = float(np.max(total_load_series(store)))
    return system_peak / math.fsum(peaks)


@dataclass(frozen=True)
class OverloadSegment:
    """A maximal run of consecutive minutes with load ratio > 1."""

    start: datetime
    end: datetime  # exclusive
    peak_ratio: float
    minutes_per_category: dict[OverloadCategory, int]


@dataclass(frozen=True)
class OverloadAnalysis:
    segments: list[OverloadSegment]
    duration_hours: float
    first_overload: Optional[datetime]
    class_minutes: dict[OverloadCategory, int]
    critical_share: Optional[float]


def overload_analysis(store: ScenarioStore) -> OverloadAnalysis:
    """Classify every minute and extract maximal overload segments."""
    ratio = total_load_series(store) / store.system["transformer_capacity_kw"]
    cats = classify_ratios(ratio)
    counts = np.bincount(cats, minlength=len(CATEGORY_ORDER))
    class_minutes = {c: int(counts[i]) for i, c in enumerate(CATEGORY_ORDER)}

    overloaded = cats > 0
    n_overloaded = int(overloaded.sum())
    duration_hours = n_overloaded / MINUTES_PER_HOUR
    first = None
    if n_overloaded:
        first = store.time_index.at(int(np.flatnonzero(overloaded)[0]))

    segments: list[OverloadSegment] = []
    if n_overloaded:
        flags = overloaded.astype(np.int8)
        edges = np.flatnonzero(np.diff(flags))
        starts = edges[flags[edges] == 0] + 1
        ends = edges[flags[edges] == 1] + 1
        if flags[0]:
            starts = np.insert(starts, 0, 0)
        if flags[-1]:
            ends = np.append(ends, len(flags))
        for s, e in zip(starts, ends):
            seg_counts = np.bincount(cats[s:e], minlength=len(CATEGORY_ORDER))
            segments.append(
                OverloadSegment(
                    start=store.time_index.at(int(s)),
                    end=store.time_index.start + STEP * int(e),
                    peak_ratio=float(np.max(ratio[s:e])),
                    minutes_per_category={
                        c: int(seg_counts[i]) for i, c in enumerate(CATEGORY_ORDER) if i > 0
                    },
                )
            )

    critical_share = None
    if n_overloaded:
        critical_share = class_minutes[OverloadCategory.CRITICAL] / n_overloaded
    return OverloadAnalysis(segments, duration_hours, first, class_minutes, critical_share)


@dataclass(frozen=True)
class DissatisfactionEvent:
    agent_id: str
    departure: datetime
    soc_at_departure_pct: float
    soc_target_pct: float
    deficit_pct: float


def detect_dissatisfaction(
    store: ScenarioStore, epsilon_pct: float = DEFAULT_EPSILON_PCT
) -> list[DissatisfactionEvent]:
    """Departures whose recorded SoC undershoots the agent's target by more
    than ``epsilon_pct`` percent points."""
    ev = store.events
    targets = np.array([a.soc_target_pct for a in store.agents])
    dep = ev.kind == DEPARTURE
    deficit = targets[ev.agent_idx] - ev.soc_pct
    hits = np.flatnonzero(dep & (deficit > epsilon_pct))
    return [
        DissatisfactionEvent(
            agent_id=store.agents[ev.agent_idx[i]].agent_id,
            departure=store.time_index.at(int(ev.minute[i])),
            soc_at_departure_pct=float(ev.soc_pct[i]),
            soc_target_pct=float(targets[ev.agent_idx[i]]),
            deficit_pct=float(deficit[i]),
        )
        for i in hits
    ]


@dataclass(frozen=True)
class CostCo2Revenue:
    avg_charging_cost_dkk_per_kwh: float
    avg_co2_kg_per_kwh: float
    dso_tariff_revenue_dkk: float


def cost_co2_revenue(store: ScenarioStore) -> CostCo2Revenue:
    """Energy-weighted charging cost and CO2, and total DSO tariff revenue.

    Raises :class:`NoChargingEnergy` (carrying the still-valid revenue) when
    the scenario contains no EV charging energy at all.
    """
    tariff = store.system["dso_tariff_dkk_per_kwh"]
    price = store.system["spot_price_dkk_per_kwh"] + tariff
    ev = store.ev_total_kw
    revenue = math.fsum((store.baseload_total_kw + ev) * tariff) * HOURS_PER_MINUTE
    energy_kwh = math.fsum(ev) * HOURS_PER_MINUTE
    if energy_kwh == 0.0:
        raise NoChargingEnergy("no EV charging energy in scenario", revenue=revenue)
    cost = math.fsum(ev * price) * HOURS_PER_MINUTE
    co2 = math.fsum(ev * store.system["co2_kg_per_kwh"]) * HOURS_PER_MINUTE
    return CostCo2Revenue(cost / energy_kwh, co2 / energy_kwh, revenue)


@dataclass(frozen=True)
class KpiReport:
    """The eight System Overview headline KPIs plus the loading-category
    distribution. Undefined KPIs hold ``None`` with the reason in
    ``reasons`` (never silent zeros)."""

    scenario_id: str
    overload_duration_hours: float
    first_overload: Optional[datetime]
    load_factor: Optional[float]
    coincidence_factor: Optional[float]
    dissatisfaction_count: int
    avg_charging_cost: Optional[float]
    avg_co2: Optional[float]
    dso_tariff_revenue: float
    overload_class_minutes: dict[OverloadCategory, int]
    critical_share: Optional[float]
    reasons: dict[str, str]

    SCHEMA_VERSION = 1


def kpi_report(store: ScenarioStore, epsilon_pct: float = DEFAULT_EPSILON_PCT) -> KpiReport:
    """Assemble every System Overview KPI over the full scenario window."""
    reasons: dict[str, str] = {}
    analysis = overload_analysis(store)

    lf: Optional[float]
    try:
        lf = load_factor(total_load_series(store))
    except ZeroPeak as exc:
        lf = None
        reasons["load_factor"] = str(exc)
    cf: Optional[float]
    try:
        cf = coincidence_factor(store)
    except ZeroPeak as exc:
        cf = None
        reasons["coincidence_factor"] = str(exc)

    try:
        ccr = cost_co2_revenue(store)
        avg_cost: Optional[float] = ccr.avg_charging_cost_dkk_per_kwh
        avg_co2: Optional[float] = ccr.avg_co2_kg_per_kwh
        revenue = ccr.dso_tariff_revenue_dkk
    except NoChargingEnergy as exc:
        avg_cost = avg_co2 = None
        revenue = exc.revenue
        reasons["avg_charging_cost"] = str(exc)
        reasons["avg_co2"] = str(exc)

    if analysis.critical_share is None:
        reasons["critical_share"] = "no overloaded minutes"

    # KPI cards are read in scenario-local time
    first = analysis.first_overload
    if first is not None:
        first = first.astimezone(store.zone)

    return KpiReport(
        scenario_id=store.manifest.scenario_id,
        overload_duration_hours=analysis.duration_hours,
        first_overload=first,
        load_factor=lf,
        coincidence_factor=cf,
        dissatisfaction_count=len(detect_dissatisfaction(store, epsilon_pct)),
        avg_charging_cost=avg_cost,
        avg_co2=avg_co2,
        dso_tariff_revenue=revenue,
        overload_class_minutes=analysis.class_minutes,
        critical_share=analysis.critical_share,
        reasons=reasons,
    )
