"""Deterministic synthetic scenario generator.

Produces the full CSV file set for a configurable consumer population with
one commute trip per day, double-peak baseload profiles, a daily price
sinusoid with a night trough, and greedy cheapest-minute smart charging.
Shared cheap night minutes cluster the charging of the whole population,
which is what produces transformer overloads in the default configuration.

An opt-in scheduling defect can be injected: the scheduler reads departure
wall-clock times in a fixed UTC+1 "schedule clock" while the simulation runs
in true local time. Between the spring and autumn DST transitions the
scheduled window then extends one hour past the real departure, and planned
charging minutes at or after the true departure are dropped. Agents whose
cheapest-minute selection abuts departure (window-saturating days) leave
under-charged, producing dissatisfaction events only on local dates on or
after the spring transition.

Determinism: every agent draws from its own PCG64 substream spawned from the
config seed, so output files are byte-identical across runs regardless of
generation order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from datetime import date, datetime, timedelta, timezone
from pathlib import Path
from zoneinfo import ZoneInfo

import numpy as np
import pandas as pd

from . import csvout
from .errors import InfeasibleConfig
from .model import (
    ARRIVAL,
    DEPARTURE,
    STEP_SECONDS,
    AgentMeta,
    ScenarioManifest,
    TimeIndex,
    write_manifest,
)

_ROUND_DECIMALS = 9


@dataclass(frozen=True)
class EvModel:
    name: str
    battery_kwh: float
    charger_kw: float
    kwh_per_km: float


DEFAULT_EV_CATALOG = (
    EvModel("city_40", battery_kwh=40.0, charger_kw=3.7, kwh_per_km=0.16),
    EvModel("mid_60", battery_kwh=60.0, charger_kw=7.4, kwh_per_km=0.18),
    EvModel("large_77", battery_kwh=77.0, charger_kw=11.0, kwh_per_km=0.20),
)


@dataclass(frozen=True)
class GenConfig:
    seed: int = 1
    n_agents: int = 126
    start_date: date = date(2025, 1, 1)
    end_date: date = date(2026, 1, 1)  # exclusive
    timezone_name: str = "Europe/Copenhagen"
    scenario_id: str = ""  # default derived from the seed
    transformer_capacity_kw: float = 450.0

    # price model: daily sinusoid with a pre-dawn trough plus seeded noise.
    # The trough sits late (05:00) so the cheap band runs right up to the
    # morning departures, which is what clusters charging against them.
    price_base_dkk: float = 1.10
    price_amplitude_dkk: float = 0.45
    price_trough_hour: float = 5.0
    price_noise_dkk: float = 0.02

    # DSO tariff bands by local hour (night / day / evening peak)
    tariff_night_dkk: float = 0.15
    tariff_day_dkk: float = 0.45
    tariff_peak_dkk: float = 1.05

    co2_base_kg: float = 0.16
    co2_amplitude_kg: float = 0.07
    co2_trough_hour: float = 4.0
    co2_noise_kg: float = 0.008

    # commute trip model (minutes after local midnight)
    depart_mean_min: float = 450.0
    depart_std_min: float = 45.0
    arrive_mean_min: float = 1020.0
    arrive_std_min: float = 60.0
    distance_log_mu: float = math.log(35.0)
    distance_log_sigma: float = 0.5
    weekend_stay_home_prob: float = 0.6
    weekend_distance_factor: float = 2.5
    weekend_depart_mean_min: float = 600.0
    weekend_arrive_mean_min: float = 1200.0
    weekend_spread_min: float = 90.0

    # double-peak household baseload
    baseload_night_kw: float = 0.12
    baseload_morning_kw: float = 0.70
    baseload_evening_kw: float = 1.10
    baseload_noise_kw: float = 0.03

    ev_catalog: tuple[EvModel, ...] = DEFAULT_EV_CATALOG
    soc_target_pct: float = 90.0
    inject_dst_bug: bool = False

    def resolved_id(self) -> str:
        return self.scenario_id or f"seed-{self.seed}"

    def validate(self) -> None:
        if self.end_date <= self.start_date:
            raise InfeasibleConfig("end_date must be after start_date")
        if self.n_agents < 1:
            raise InfeasibleConfig("n_agents must be >= 1")
        for name in ("depart_std_min", "arrive_std_min", "distance_log_sigma",
                     "price_noise_dkk", "co2_noise_kg", "baseload_noise_kw",
                     "weekend_spread_min"):
            if getattr(self, name) < 0:
                raise InfeasibleConfig(f"{name} must be >= 0")
        if not 0.0 <= self.weekend_stay_home_prob <= 1.0:
            raise InfeasibleConfig("weekend_stay_home_prob must lie in [0, 1]")
        if self.transformer_capacity_kw <= 0:
            raise InfeasibleConfig("transformer capacity must be > 0")
        if not self.ev_catalog:
            raise InfeasibleConfig("EV catalog must not be empty")
        if not 0.0 < self.soc_target_pct <= 100.0:
            raise InfeasibleConfig("soc_target_pct must lie in (0, 100]")
        factor = max(1.0, self.weekend_distance_factor)
        for m in self.ev_catalog:
            if min(m.battery_kwh, m.charger_kw, m.kwh_per_km) <= 0:
                raise InfeasibleConfig(f"EV model {m.name}: all specs must be > 0")
            median_kwh = math.exp(self.distance_log_mu) * factor * m.kwh_per_km
            if median_kwh > 0.85 * m.battery_kwh:
                raise InfeasibleConfig(
                    f"EV model {m.name}: typical daily distance energy {median_kwh:.1f} kWh "
                    f"exceeds usable battery capacity"
                )


# -- charging schedule ------------------------------------------------------


def smart_charge_schedule(
    window_prices: np.ndarray, need_kwh: float, charger_kw: float
) -> tuple[np.ndarray, np.ndarray]:
    """Pick charging minutes within one home window, cheapest first.

    Selects the ceil(need / per-minute energy) cheapest minutes, ties broken
    by earlier timestamp; a too-short window is used in full and the
    shortfall surfaces as a low departure SoC. Returns (ascending minute
    offsets into the window, kW to apply in each). All full minutes run at
    charger power; the chronologically last minute tops up the remainder.
    """
    if need_kwh <= 0.0 or len(window_prices) == 0:
        return np.empty(0, dtype=np.int64), np.empty(0)
    per_min_kwh = charger_kw / 60.0
    k = math.ceil(need_kwh / per_min_kwh - 1e-12)
    if k >= len(window_prices):
        chosen = np.arange(len(window_prices), dtype=np.int64)
    else:
        order = np.lexsort((np.arange(len(window_prices)), window_prices))
        chosen = np.sort(order[:k])
    loads = np.full(len(chosen), charger_kw)
    full_energy = len(chosen) * per_min_kwh
    if full_energy >= need_kwh:
        remainder = need_kwh - (len(chosen) - 1) * per_min_kwh
        loads[-1] = remainder * 60.0
    return chosen, loads


def apply_dst_bug(
    minutes: np.ndarray, loads: np.ndarray, true_departure_offset: int
) -> tuple[np.ndarray, np.ndarray]:
    """Drop scheduled minutes at or past the true departure.

    The buggy scheduler plans against a window whose end was read in fixed
    UTC+1, so in summer the plan extends past the real departure; the car is
    gone, and those minutes never execute.
    """
    keep = minutes < true_departure_offset
    return minutes[keep], loads[keep]


# -- generation --------------------------------------------------------------


@dataclass
class _Trip:
    day: date
    depart_idx: int
    arrive_idx: int
    depart_sched_idx: int  # equals depart_idx unless the DST bug shifts it
    distance_km: float


def generate(config: GenConfig, out_dir: str | Path) -> Path:
    """Write the scenario file set plus manifest; returns the manifest path.

    Emitted files always pass ingest validation; identical config and seed
    produce byte-identical output.
    """
    config.validate()
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    zone = ZoneInfo(config.timezone_name)

    time_index = _build_time_index(config, zone)
    count = time_index.count
    local_hours, weekend = _local_calendar(time_index, zone)

    seq = np.random.SeedSequence(config.seed)
    sys_rng = np.random.Generator(np.random.PCG64(seq.spawn(1)[0]))
    agent_seeds = seq.spawn(config.n_agents)

    system = _system_series(config, sys_rng, local_hours, count)
    price = system["spot_price_dkk_per_kwh"] + system["dso_tariff_dkk_per_kwh"]

    day_list = _day_table(config)

    agents: list[AgentMeta] = []
    baseload = np.empty((config.n_agents, count))
    ev_load = np.zeros((config.n_agents, count))
    soc = np.empty((config.n_agents, count))
    ev_rows: list[tuple[int, int, int, float, float]] = []

    for a in range(config.n_agents):
        rng = np.random.Generator(np.random.PCG64(agent_seeds[a]))
        meta, model = _agent_meta(config, rng, a)
        agents.append(meta)
        baseload[a] = _baseload_profile(config, rng, local_hours, weekend)
        trips = _sample_trips(config, rng, model, day_list, time_index, zone, count)
        _simulate_agent(config, model, trips, price, count,
                        ev_load[a], soc[a], ev_rows, a)

    np.round(baseload, _ROUND_DECIMALS, out=baseload)
    np.round(ev_load, _ROUND_DECIMALS, out=ev_load)
    np.round(soc, _ROUND_DECIMALS, out=soc)

    _write_files(config, out_dir, time_index, zone, agents, baseload, ev_load, soc, system, ev_rows)
    return out_dir / "scenario.toml"


def _build_time_index(config: GenConfig, zone: ZoneInfo) -> TimeIndex:
    s, e = config.start_date, config.end_date
    start_local = datetime(s.year, s.month, s.day, tzinfo=zone)
    end_local = datetime(e.year, e.month, e.day, tzinfo=zone)
    count = int((end_local.astimezone(timezone.utc) - start_local.astimezone(timezone.utc)).total_seconds()) // STEP_SECONDS
    return TimeIndex(start_local.astimezone(timezone.utc), count)


def _local_calendar(time_index: TimeIndex, zone: ZoneInfo) -> tuple[np.ndarray, np.ndarray]:
    idx = pd.DatetimeIndex(time_index.timestamps_ns(), tz="UTC").tz_convert(zone)
    hours = idx.hour.to_numpy() + idx.minute.to_numpy() / 60.0
    weekend = idx.dayofweek.to_numpy() >= 5
    return hours, weekend


def _system_series(config, rng, local_hours, count) -> dict[str, np.ndarray]:
    two_pi = 2.0 * math.pi
    spot = (
        config.price_base_dkk
        - config.price_amplitude_dkk * np.cos(two_pi * (local_hours - config.price_trough_hour) / 24.0)
        + rng.normal(0.0, config.price_noise_dkk, count)
    )
    np.clip(spot, 0.05, None, out=spot)
    co2 = (
        config.co2_base_kg
        - config.co2_amplitude_kg * np.cos(two_pi * (local_hours - config.co2_trough_hour) / 24.0)
        + rng.normal(0.0, config.co2_noise_kg, count)
    )
    np.clip(co2, 0.02, None, out=co2)
    tariff = np.select(
        [local_hours < 6.0, local_hours < 17.0, local_hours < 21.0],
        [config.tariff_night_dkk, config.tariff_day_dkk, config.tariff_peak_dkk],
        default=config.tariff_day_dkk,
    )
    return {
        "spot_price_dkk_per_kwh": np.round(spot, _ROUND_DECIMALS),
        "dso_tariff_dkk_per_kwh": tariff,
        "co2_kg_per_kwh": np.round(co2, _ROUND_DECIMALS),
        "transformer_capacity_kw": np.full(count, float(config.transformer_capacity_kw)),
    }


def _day_table(config) -> list[date]:
    days = []
    d = config.start_date
    while d < config.end_date:
        days.append(d)
        d += timedelta(days=1)
    return days


def _agent_meta(config, rng, a) -> tuple[AgentMeta, EvModel]:
    model = config.ev_catalog[int(rng.integers(len(config.ev_catalog)))]
    # clustered around the Strib 10/0.4 kV grid area
    lat = 55.538 + rng.normal(0.0, 0.004)
    lon = 9.766 + rng.normal(0.0, 0.006)
    meta = AgentMeta(
        agent_id=f"A{a + 1:03d}",
        latitude=round(float(lat), 6),
        longitude=round(float(lon), 6),
        battery_capacity_kwh=model.battery_kwh,
        charger_power_kw=model.charger_kw,
        consumption_kwh_per_km=model.kwh_per_km,
        soc_target_pct=config.soc_target_pct,
    )
    return meta, model


def _baseload_profile(config, rng, local_hours, weekend) -> np.ndarray:
    scale = rng.uniform(0.6, 1.6)
    morning = np.exp(-0.5 * ((local_hours - 7.5) / 1.3) ** 2)
    evening = np.exp(-0.5 * ((local_hours - 18.5) / 1.9) ** 2)
    profile = (
        config.baseload_night_kw
        + config.baseload_morning_kw * morning
        + config.baseload_evening_kw * evening
    ) * scale
    profile = profile * np.where(weekend, 1.1, 1.0)
    profile += rng.normal(0.0, config.baseload_noise_kw, len(local_hours))
    return np.clip(profile, 0.0, None)


def _local_to_index(time_index: TimeIndex, zone: ZoneInfo, day: date, minute_local: int) -> int:
    naive = datetime(day.year, day.month, day.day) + timedelta(minutes=minute_local)
    instant = naive.replace(tzinfo=zone).astimezone(timezone.utc)
    return int((instant - time_index.start).total_seconds()) // STEP_SECONDS


def _schedule_clock_index(time_index: TimeIndex, zone: ZoneInfo, day: date, minute_local: int) -> int:
    """Index the buggy scheduler uses: wall clock read as fixed UTC+1."""
    naive = datetime(day.year, day.month, day.day) + timedelta(minutes=minute_local)
    instant = (naive - timedelta(hours=1)).replace(tzinfo=timezone.utc)
    return int((instant - time_index.start).total_seconds()) // STEP_SECONDS


def _sample_trips(config, rng, model, day_list, time_index, zone, count) -> list[_Trip]:
    trips: list[_Trip] = []
    for day in day_list:
        is_weekend = day.weekday() >= 5
        if is_weekend and rng.random() < config.weekend_stay_home_prob:
            continue
        if is_weekend:
            dep = _clip_normal(rng, config.weekend_depart_mean_min, config.weekend_spread_min, 480, 780)
            arr = _clip_normal(rng, config.weekend_arrive_mean_min, config.weekend_spread_min, 900, 1410)
            dist = rng.lognormal(config.distance_log_mu, config.distance_log_sigma) * config.weekend_distance_factor
        else:
            dep = _clip_normal(rng, config.depart_mean_min, config.depart_std_min, 300, 660)
            arr = _clip_normal(rng, config.arrive_mean_min, config.arrive_std_min, 780, 1380)
            dist = rng.lognormal(config.distance_log_mu, config.distance_log_sigma)
        arr = max(arr, dep + 120)
        dep_idx = _local_to_index(time_index, zone, day, dep)
        arr_idx = _local_to_index(time_index, zone, day, arr)
        if dep_idx < 0 or arr_idx >= count or arr_idx <= dep_idx:
            continue
        sched_idx = (
            _schedule_clock_index(time_index, zone, day, dep)
            if config.inject_dst_bug
            else dep_idx
        )
        trips.append(_Trip(day, dep_idx, arr_idx, min(sched_idx, count), float(dist)))

    # Feasibility clamps: each trip's recharge must fit the following home
    # window with headroom, and must never run the battery down.
    per_min_kwh = model.charger_kw / 60.0
    for i, trip in enumerate(trips):
        window_end = trips[i + 1].depart_idx if i + 1 < len(trips) else count
        window_minutes = window_end - trip.arrive_idx
        max_kwh = 0.95 * per_min_kwh * window_minutes
        max_km_window = max_kwh / model.kwh_per_km
        max_km_battery = 0.85 * model.battery_kwh / model.kwh_per_km
        trip.distance_km = round(min(trip.distance_km, max_km_window, max_km_battery), _ROUND_DECIMALS)
    return trips


def _clip_normal(rng, mean, std, lo, hi) -> int:
    return int(round(min(max(rng.normal(mean, std), lo), hi)))


def _simulate_agent(config, model, trips, price, count, ev_row, soc_row, ev_rows, agent_pos) -> None:
    """Fill one agent's EV load and SoC traces and append its events.

    SoC is the state at the start of each minute; it rises only in charging
    minutes and drops only across a trip (applied at the arrival minute).
    """
    battery = model.battery_kwh
    target = config.soc_target_pct
    soc_now = target
    window_start = 0

    def charge_window(h0: int, h1: int, sched_end: int, true_end: int) -> float:
        """Charge within [h0, sched_end), executing only before true_end."""
        nonlocal soc_now
        need_kwh = max(0.0, (target - soc_now) / 100.0 * battery)
        minutes, loads = smart_charge_schedule(price[h0:sched_end], need_kwh, model.charger_kw)
        if sched_end > true_end:
            minutes, loads = apply_dst_bug(minutes, loads, true_end - h0)
        soc_row[h0:h1] = soc_now
        if len(minutes):
            delta_pct = loads / 60.0 / battery * 100.0
            steps = np.zeros(h1 - h0)
            steps[minutes] = delta_pct
            soc_row[h0:h1] = soc_now + np.concatenate(([0.0], np.cumsum(steps)[:-1]))
            ev_row[h0 + minutes] = loads
            soc_now = min(100.0, soc_now + float(np.sum(delta_pct)))
        return soc_now

    for trip in trips:
        dep_soc = charge_window(window_start, trip.depart_idx, trip.depart_sched_idx, trip.depart_idx)
        ev_rows.append((agent_pos, trip.depart_idx, DEPARTURE, dep_soc, math.nan))
        soc_row[trip.depart_idx : trip.arrive_idx] = dep_soc
        soc_now = dep_soc - trip.distance_km * model.kwh_per_km / battery * 100.0
        ev_rows.append((agent_pos, trip.arrive_idx, ARRIVAL, soc_now, trip.distance_km))
        window_start = trip.arrive_idx
    charge_window(window_start, count, count, count)


def _write_files(config, out_dir, time_index, zone, agents, baseload, ev_load, soc, system, ev_rows) -> None:
    iso = csvout.iso_local_timestamps(time_index, zone)
    agent_ids = [a.agent_id for a in agents]

    csvout.write_agents_csv(out_dir / "agents.csv", agents)
    csvout.write_system_csv(out_dir / "system.csv", iso, system)
    csvout.write_wide_csv(out_dir / "baseload.csv", iso, agent_ids, baseload)
    csvout.write_wide_csv(out_dir / "ev_load.csv", iso, agent_ids, ev_load)
    csvout.write_wide_csv(out_dir / "soc.csv", iso, agent_ids, soc)

    ev_rows = sorted(ev_rows, key=lambda r: (r[1], r[2], r[0]))
    csvout.write_events_csv(
        out_dir / "events.csv",
        agent_ids,
        np.array([r[0] for r in ev_rows], dtype=np.int64),
        np.array([r[1] for r in ev_rows], dtype=np.int64),
        iso,
        np.array([r[2] for r in ev_rows], dtype=np.int64),
        np.round(np.array([r[3] for r in ev_rows]), _ROUND_DECIMALS),
        np.array([r[4] for r in ev_rows]),
    )

    manifest = ScenarioManifest(
        scenario_id=config.resolved_id(),
        root_path=out_dir,
        timezone_name=config.timezone_name,
    )
    write_manifest(manifest, out_dir / "scenario.toml")
