"""Deterministic in-memory scenario builders shared across the test suite.

``make_store`` assembles a store straight from small arrays for hand-oracle
tests. ``build_http_store`` is the fixed 3-agent, one-day scenario behind
the HTTP golden files: every value is plain arithmetic (no RNG), totals hit
all four overload bands at capacity 11 kW, agent A001 departs under target
(one dissatisfaction event), and agent C003 has no trips at all.
"""

from __future__ import annotations

from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from gridlens import csvout
from gridlens.model import (
    ARRIVAL,
    DEPARTURE,
    AgentMeta,
    EventLog,
    ScenarioManifest,
    ScenarioStore,
    TimeIndex,
    write_manifest,
)

DEFAULT_START = "2025-01-01T00:00:00+01:00"


def make_agent(agent_id: str, battery=60.0, charger=7.4, rate=0.18, target=90.0,
               lat=55.54, lon=9.77) -> AgentMeta:
    return AgentMeta(
        agent_id=agent_id,
        latitude=lat,
        longitude=lon,
        battery_capacity_kwh=battery,
        charger_power_kw=charger,
        consumption_kwh_per_km=rate,
        soc_target_pct=target,
    )


def make_store(
    baseload,
    ev_load,
    soc=None,
    agents=None,
    capacity=100.0,
    spot=1.0,
    tariff=0.0,
    co2=0.2,
    events=(),
    start: str = DEFAULT_START,
    timezone_name: str = "Europe/Copenhagen",
    scenario_id: str = "fixture",
) -> ScenarioStore:
    """Store from per-agent load rows; scalars broadcast to full columns.

    ``events`` rows are (agent_pos, minute, kind, soc_pct, distance_km).
    """
    baseload = np.atleast_2d(np.asarray(baseload, dtype=np.float64))
    ev_load = np.atleast_2d(np.asarray(ev_load, dtype=np.float64))
    n, count = baseload.shape
    if soc is None:
        soc = np.full((n, count), 50.0)
    soc = np.atleast_2d(np.asarray(soc, dtype=np.float64))
    if agents is None:
        agents = [make_agent(f"A{i + 1:03d}") for i in range(n)]

    def column(v):
        return np.full(count, float(v)) if np.isscalar(v) else np.asarray(v, dtype=np.float64)

    if events:
        ev = EventLog(
            np.array([e[0] for e in events], dtype=np.int32),
            np.array([e[1] for e in events], dtype=np.int64),
            np.array([e[2] for e in events], dtype=np.uint8),
            np.array([e[3] for e in events], dtype=np.float64),
            np.array([e[4] if len(e) > 4 else np.nan for e in events], dtype=np.float64),
        )
    else:
        ev = EventLog.empty()

    manifest = ScenarioManifest(scenario_id=scenario_id, root_path=Path("."), timezone_name=timezone_name)
    return ScenarioStore(
        manifest=manifest,
        time_index=TimeIndex(datetime.fromisoformat(start), count),
        agents=list(agents),
        baseload_kw=baseload,
        ev_load_kw=ev_load,
        soc_pct=soc,
        system={
            "spot_price_dkk_per_kwh": column(spot),
            "dso_tariff_dkk_per_kwh": column(tariff),
            "co2_kg_per_kwh": column(co2),
            "transformer_capacity_kw": column(capacity),
        },
        events=ev,
    )


def write_store_csvs(store: ScenarioStore, out_dir: Path) -> Path:
    """Write a store back out as the canonical CSV file set plus manifest."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    iso = csvout.iso_local_timestamps(store.time_index, store.zone)
    agent_ids = [a.agent_id for a in store.agents]
    csvout.write_agents_csv(out_dir / "agents.csv", store.agents)
    csvout.write_system_csv(out_dir / "system.csv", iso, store.system)
    csvout.write_wide_csv(out_dir / "baseload.csv", iso, agent_ids, store.baseload_kw)
    csvout.write_wide_csv(out_dir / "ev_load.csv", iso, agent_ids, store.ev_load_kw)
    csvout.write_wide_csv(out_dir / "soc.csv", iso, agent_ids, store.soc_pct)
    ev = store.events
    csvout.write_events_csv(
        out_dir / "events.csv", agent_ids, ev.agent_idx, ev.minute, iso,
        ev.kind, ev.soc_pct, ev.distance_km,
    )
    manifest = ScenarioManifest(
        scenario_id=store.manifest.scenario_id,
        root_path=out_dir,
        timezone_name=store.manifest.timezone_name,
    )
    write_manifest(manifest, out_dir / "scenario.toml")
    return out_dir / "scenario.toml"


# -- the fixed HTTP/golden scenario ------------------------------------------

HTTP_START = "2025-06-10T00:00:00+02:00"  # CEST day, 1440 minutes
HTTP_CAPACITY = 11.0


def build_http_store(scenario_id: str = "fix3") -> ScenarioStore:
    count = 1440
    t = np.arange(count)

    a1 = make_agent("A001", battery=40.0, charger=3.7, rate=0.16, target=90.0, lat=55.54, lon=9.76)
    b2 = make_agent("B002", battery=60.0, charger=7.4, rate=0.18, target=90.0, lat=55.545, lon=9.77)
    c3 = make_agent("C003", battery=77.0, charger=11.0, rate=0.20, target=85.0, lat=55.55, lon=9.78)

    ev = np.zeros((3, count))
    ev[0, 0:180] = 3.7
    ev[0, 1320:1410] = 3.7
    ev[1, 60:240] = 7.4
    ev[1, 1290:1380] = 7.4
    ev[2, 1290:1410] = 11.0

    base = np.zeros((3, count))
    base[0, :] = 0.5
    base[1, :] = 1.0
    base[2, :] = 0.4 + 0.6 * ((t >= 1020) & (t < 1320)) + 1.5 * ((t >= 1320) & (t < 1380))

    # SoC follows charging arithmetic, with the trip drop at the arrival minute
    soc = np.empty((3, count))
    for i, (meta, start_soc) in enumerate(((a1, 34.25), (b2, 53.0), (c3, 60.0))):
        gain = np.concatenate(([0.0], np.cumsum(ev[i] / 60.0 / meta.battery_capacity_kwh * 100.0)[:-1]))
        soc[i] = start_soc + gain
    soc[0, 450:1030] = 62.0          # away, flat at departure SoC
    soc[0, 1030:] = 55.6 + np.concatenate(
        ([0.0], np.cumsum(ev[0, 1030:] / 60.0 / 40.0 * 100.0)[:-1])
    )
    soc[1, 480:1050] = 90.0
    soc[1, 1050:] = 81.0 + np.concatenate(
        ([0.0], np.cumsum(ev[1, 1050:] / 60.0 / 60.0 * 100.0)[:-1])
    )

    spot = np.where((t >= 480) & (t < 1200), 1.5, 0.7)
    tariff = np.select([t < 360, t < 1020, t < 1260], [0.2, 0.5, 1.0], default=0.5)
    co2 = np.where((t >= 600) & (t < 1080), 0.2, 0.1)

    events = [
        (0, 450, DEPARTURE, 62.0, np.nan),   # under target 90 -> dissatisfaction
        (1, 480, DEPARTURE, 90.0, np.nan),
        (0, 1030, ARRIVAL, 55.6, 16.0),
        (1, 1050, ARRIVAL, 81.0, 30.0),
    ]
    return make_store(
        baseload=base,
        ev_load=ev,
        soc=soc,
        agents=[a1, b2, c3],
        capacity=HTTP_CAPACITY,
        spot=spot,
        tariff=tariff,
        co2=co2,
        events=events,
        start=HTTP_START,
        scenario_id=scenario_id,
    )
