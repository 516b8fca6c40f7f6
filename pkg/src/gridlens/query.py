"""Read-only chart queries over an immutable store.

Series windows are downsampled into per-bucket {min, max, mean, count}
aggregates rather than decimated, so capacity-threshold spikes survive at
any zoom level. All windows are half-open [from, to); all operations are
pure reads and safe for unlimited concurrent callers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from datetime import date, datetime
from typing import Optional

import numpy as np

from .errors import (
    BadBucketCount,
    DateOutOfRange,
    EmptyWindow,
    UnknownMetric,
    UnknownVariable,
)
from .metrics import DEFAULT_EPSILON_PCT, detect_dissatisfaction
from .model import ARRIVAL, STEP, ScenarioStore

AGGREGATE = "aggregate"

#: variables servable by series_window; soc additionally requires agent scope
SERIES_VARIABLES = (
    "total_load",
    "ev_load",
    "baseload",
    "soc",
    "spot_price",
    "dso_tariff",
    "total_price",
    "co2",
    "charging_ev_count",
    "transformer_capacity",
)

MAP_METRICS = (
    "total_expenses_dkk",
    "ev_energy_kwh",
    "dissatisfaction_count",
    "peak_load_kw",
    "avg_daily_distance_km",
)


@dataclass(frozen=True)
class Bucket:
    t_start: datetime
    min: float
    max: float
    mean: float
    count: int


@dataclass(frozen=True)
class DownsampledSeries:
    variable: str
    scope: str
    window_start: datetime
    window_end: datetime
    buckets: list[Bucket]


def resolve_window(store: ScenarioStore, start: datetime, end: datetime) -> tuple[int, int]:
    i0, i1 = store.time_index.clip_window(start, end)
    if i1 <= i0:
        raise EmptyWindow(
            f"window [{start.isoformat()}, {end.isoformat()}) contains no scenario minutes"
        )
    return i0, i1


def _series_values(store: ScenarioStore, variable: str, scope: str) -> np.ndarray:
    system = store.system
    if scope != AGGREGATE:
        i = store.agent_pos(scope)
        per_agent = {
            "total_load": lambda: store.baseload_kw[i] + store.ev_load_kw[i],
            "ev_load": lambda: store.ev_load_kw[i],
            "baseload": lambda: store.baseload_kw[i],
            "soc": lambda: store.soc_pct[i],
        }
        if variable not in per_agent:
            raise UnknownVariable(f"variable {variable!r} has no per-agent form")
        return per_agent[variable]()
    aggregate = {
        "total_load": lambda: store.baseload_total_kw + store.ev_total_kw,
        "ev_load": lambda: store.ev_total_kw,
        "baseload": lambda: store.baseload_total_kw,
        "spot_price": lambda: system["spot_price_dkk_per_kwh"],
        "dso_tariff": lambda: system["dso_tariff_dkk_per_kwh"],
        "total_price": lambda: system["spot_price_dkk_per_kwh"] + system["dso_tariff_dkk_per_kwh"],
        "co2": lambda: system["co2_kg_per_kwh"],
        "charging_ev_count": lambda: store.charging_count.astype(np.float64),
        "transformer_capacity": lambda: system["transformer_capacity_kw"],
    }
    if variable == "soc":
        raise UnknownVariable("soc requires an agent scope")
    if variable not in aggregate:
        raise UnknownVariable(f"unknown series variable {variable!r}")
    return aggregate[variable]()


def downsample(values: np.ndarray, window_start: datetime, buckets: int) -> list[Bucket]:
    """Bucket a minute-resolution series into {min, max, mean, count} tiles.

    Buckets tile the window in order without overlap (near-equal sizes when
    the length does not divide evenly). Means conserve the raw sum and the
    bucket extremes preserve the raw extremes, so no spike is lost.
    """
    n = len(values)
    if n == 0:
        raise EmptyWindow("cannot downsample an empty window")
    if not 1 <= buckets <= n:
        raise BadBucketCount(f"bucket count {buckets} outside [1, {n}]")
    edges = (np.arange(buckets, dtype=np.int64) * n) // buckets
    counts = np.diff(edges, append=n)
    mins = np.minimum.reduceat(values, edges)
    maxs = np.maximum.reduceat(values, edges)
    means = np.add.reduceat(values, edges) / counts
    return [
        Bucket(
            t_start=window_start + STEP * int(edges[b]),
            min=float(mins[b]),
            max=float(maxs[b]),
            mean=float(means[b]),
            count=int(counts[b]),
        )
        for b in range(buckets)
    ]


def series_window(
    store: ScenarioStore,
    variable: str,
    scope: str = AGGREGATE,
    start: Optional[datetime] = None,
    end: Optional[datetime] = None,
    buckets: Optional[int] = None,
) -> DownsampledSeries:
    """Downsample one variable over [start, end) into ``buckets`` buckets.

    ``variable`` may carry an inline agent scope as ``"soc:<agent_id>"``.
    With ``buckets`` equal to the window length the buckets are the raw
    samples (min = max = mean, count 1).
    """
    if ":" in variable:
        variable, _, scope = variable.partition(":")
    if variable not in SERIES_VARIABLES:
        raise UnknownVariable(f"unknown series variable {variable!r}")
    start = start if start is not None else store.time_index.start
    end = end if end is not None else store.time_index.end
    i0, i1 = resolve_window(store, start, end)
    n = i1 - i0
    if buckets is None:
        buckets = min(n, 1000)
    values = _series_values(store, variable, scope)[i0:i1]
    t0 = store.time_index.at(i0)
    return DownsampledSeries(
        variable=variable,
        scope=scope,
        window_start=t0,
        window_end=store.time_index.start + STEP * i1,
        buckets=downsample(values, t0, buckets),
    )


@dataclass(frozen=True)
class HeatmapDay:
    local_date: date
    agent_ids: list[str]
    bin_starts: list[datetime]
    bin_minutes: list[int]
    #: mean kW per (agent, bin)
    matrix: np.ndarray


def heatmap_day(store: ScenarioStore, local_date: date, column_bins: Optional[int] = None) -> HeatmapDay:
    """Per-agent mean EV charging load over one local calendar day.

    DST-affected days cover 1380 or 1500 minutes and the columns reflect
    that. Default binning is one column per minute.
    """
    i0, i1 = store.time_index.local_day_window(local_date, store.zone)
    n = i1 - i0
    if n <= 0:
        raise DateOutOfRange(f"{local_date.isoformat()} is outside the scenario range")
    if column_bins is None:
        column_bins = n
    if not 1 <= column_bins <= n:
        raise BadBucketCount(f"column bins {column_bins} outside [1, {n}]")

    edges = (np.arange(column_bins, dtype=np.int64) * n) // column_bins
    counts = np.diff(edges, append=n)
    block = store.ev_load_kw[:, i0:i1]
    sums = np.add.reduceat(block, edges, axis=1)
    matrix = sums / counts

    t0 = store.time_index.at(i0)
    return HeatmapDay(
        local_date=local_date,
        agent_ids=[a.agent_id for a in store.agents],
        bin_starts=[t0 + STEP * int(e) for e in edges],
        bin_minutes=[int(c) for c in counts],
        matrix=matrix,
    )


@dataclass(frozen=True)
class EventBin:
    t_start: datetime
    arrival_count: int
    departure_count: int
    arrival_agent_ids: list[str]
    departure_agent_ids: list[str]


@dataclass(frozen=True)
class EventBins:
    bin_width_minutes: int
    bins: list[EventBin]


def event_bins(store: ScenarioStore, start: datetime, end: datetime, bin_width_minutes: int) -> EventBins:
    """Arrival/departure counts (with agent id lists) per time bin."""
    if bin_width_minutes < 1 or bin_width_minutes != int(bin_width_minutes):
        raise BadBucketCount(f"bin width must be a whole minute count >= 1, got {bin_width_minutes}")
    i0, i1 = resolve_window(store, start, end)
    n_bins = math.ceil((i1 - i0) / bin_width_minutes)
    t0 = store.time_index.at(i0)

    arr_ids: list[list[str]] = [[] for _ in range(n_bins)]
    dep_ids: list[list[str]] = [[] for _ in range(n_bins)]
    ev = store.events
    for row in ev.in_window(i0, i1):
        b = int((ev.minute[row] - i0) // bin_width_minutes)
        target = arr_ids if ev.kind[row] == ARRIVAL else dep_ids
        target[b].append(store.agents[ev.agent_idx[row]].agent_id)

    bins = [
        EventBin(
            t_start=t0 + STEP * (b * bin_width_minutes),
            arrival_count=len(arr_ids[b]),
            departure_count=len(dep_ids[b]),
            arrival_agent_ids=arr_ids[b],
            departure_agent_ids=dep_ids[b],
        )
        for b in range(n_bins)
    ]
    return EventBins(bin_width_minutes=bin_width_minutes, bins=bins)


def charging_agents_at(store: ScenarioStore, t: datetime) -> list[dict]:
    """Agents with strictly positive EV load at grid instant ``t``."""
    i = store.time_index.index_of(t)
    col = store.ev_load_kw[:, i]
    hits = np.flatnonzero(col > 0.0)
    return [
        {"agent_id": store.agents[a].agent_id, "ev_load_kw": float(col[a])}
        for a in hits
    ]


@dataclass(frozen=True)
class MapMetricResult:
    metric: str
    window_start: datetime
    window_end: datetime
    agent_ids: list[str]
    values: np.ndarray
    stats: dict[str, float]  # {sum, max, mean, min}


def map_metric(store: ScenarioStore, metric: str, start: datetime, end: datetime) -> MapMetricResult:
    """Per-agent value of one spatial-map metric over [start, end)."""
    if metric not in MAP_METRICS:
        raise UnknownMetric(f"unknown map metric {metric!r}")
    i0, i1 = resolve_window(store, start, end)
    full = i0 == 0 and i1 == store.time_index.count
    n = store.n_agents

    if metric == "total_expenses_dkk":
        if full:
            values = store.per_agent_expenses_dkk.copy()
        else:
            price = (
                store.system["spot_price_dkk_per_kwh"][i0:i1]
                + store.system["dso_tariff_dkk_per_kwh"][i0:i1]
            )
            values = np.array(
                [
                    (store.baseload_kw[a, i0:i1] + store.ev_load_kw[a, i0:i1]).dot(price)
                    for a in range(n)
                ]
            ) / 60.0
    elif metric == "ev_energy_kwh":
        if full:
            values = store.per_agent_ev_energy_kwh.copy()
        else:
            values = store.ev_load_kw[:, i0:i1].sum(axis=1) / 60.0
    elif metric == "peak_load_kw":
        if full:
            values = store.per_agent_peak_kw.copy()
        else:
            values = np.array(
                [np.max(store.baseload_kw[a, i0:i1] + store.ev_load_kw[a, i0:i1]) for a in range(n)]
            )
    elif metric == "dissatisfaction_count":
        values = np.zeros(n)
        for event in detect_dissatisfaction(store, DEFAULT_EPSILON_PCT):
            idx = store.agent_index[event.agent_id]
            m = store.time_index.index_of(event.departure)
            if i0 <= m < i1:
                values[idx] += 1.0
    else:  # avg_daily_distance_km
        n_days = len(store.time_index.local_dates(store.zone, i0, i1))
        values = np.zeros(n)
        ev = store.events
        for row in ev.in_window(i0, i1):
            if ev.kind[row] == ARRIVAL:
                values[ev.agent_idx[row]] += ev.distance_km[row]
        values /= n_days

    stats = {
        "sum": math.fsum(values),
        "max": float(np.max(values)),
        "mean": math.fsum(values) / n,
        "min": float(np.min(values)),
    }
    return MapMetricResult(
        metric=metric,
        window_start=store.time_index.at(i0),
        window_end=store.time_index.start + STEP * i1,
        agent_ids=[a.agent_id for a in store.agents],
        values=values,
        stats=stats,
    )


@dataclass(frozen=True)
class EventMarker:
    timestamp: datetime
    kind: str  # departure | arrival
    soc_pct: float
    trip_distance_km: Optional[float]


@dataclass(frozen=True)
class AgentDetail:
    """Everything the Consumer Analysis drill-down view needs for one agent."""

    agent_id: str
    charging: DownsampledSeries
    baseload: DownsampledSeries
    soc: DownsampledSeries
    markers: list[EventMarker]
    daily_distance_km: list[tuple[date, float]]
    dissatisfaction_days: list[date]


def agent_detail(
    store: ScenarioStore,
    agent_id: str,
    start: Optional[datetime] = None,
    end: Optional[datetime] = None,
    buckets: Optional[int] = None,
) -> AgentDetail:
    """Charging/baseload/SoC series, event markers, daily driving distance
    and dissatisfaction-day flags for one agent."""
    idx = store.agent_pos(agent_id)
    start = start if start is not None else store.time_index.start
    end = end if end is not None else store.time_index.end
    i0, i1 = resolve_window(store, start, end)

    ev = store.events
    markers: list[EventMarker] = []
    distance_by_day: dict[date, float] = {}
    zone = store.zone
    for row in ev.in_window(i0, i1):
        if ev.agent_idx[row] != idx:
            continue
        ts = store.time_index.at(int(ev.minute[row]))
        arriving = ev.kind[row] == ARRIVAL
        markers.append(
            EventMarker(
                timestamp=ts,
                kind="arrival" if arriving else "departure",
                soc_pct=float(ev.soc_pct[row]),
                trip_distance_km=float(ev.distance_km[row]) if arriving else None,
            )
        )
        if arriving:
            d = ts.astimezone(zone).date()
            distance_by_day[d] = distance_by_day.get(d, 0.0) + float(ev.distance_km[row])

    flagged = sorted(
        {
            e.departure.astimezone(zone).date()
            for e in detect_dissatisfaction(store, DEFAULT_EPSILON_PCT)
            if e.agent_id == agent_id and i0 <= store.time_index.index_of(e.departure) < i1
        }
    )
    return AgentDetail(
        agent_id=agent_id,
        charging=series_window(store, "ev_load", agent_id, start, end, buckets),
        baseload=series_window(store, "baseload", agent_id, start, end, buckets),
        soc=series_window(store, "soc", agent_id, start, end, buckets),
        markers=markers,
        daily_distance_km=sorted(distance_by_day.items()),
        dissatisfaction_days=flagged,
    )
