"""Writers for the canonical scenario CSV schema.

Used by the synthetic generator and by test fixtures. Floats are rendered
with shortest-roundtrip formatting via pyarrow, so written files parse back
to bit-identical values and reruns are byte-identical.
"""

from __future__ import annotations

from pathlib import Path
from zoneinfo import ZoneInfo

import numpy as np
import pandas as pd
import pyarrow as pa
import pyarrow.csv as pacsv

from .model import AGENTS_COLUMNS, DEPARTURE, SYSTEM_COLUMNS, AgentMeta, TimeIndex

# The canonical schema never needs quoting (no commas/quotes in ids or
# timestamps). pyarrow always quotes header cells, so the header line is
# written by hand and only data rows go through the arrow writer.
_WRITE_OPTIONS = pacsv.WriteOptions(include_header=False, quoting_style="none")


def _write_table(path: Path, table: pa.Table) -> None:
    with open(path, "wb") as f:
        f.write((",".join(table.column_names) + "\n").encode("utf-8"))
        pacsv.write_csv(table, f, _WRITE_OPTIONS)


def iso_local_timestamps(time_index: TimeIndex, zone: ZoneInfo) -> list[str]:
    """ISO-8601 strings with offset, in the given zone, for every grid minute."""
    idx = pd.DatetimeIndex(time_index.timestamps_ns(), tz="UTC").tz_convert(zone)
    # offsets are piecewise constant (DST transitions), so format runs in bulk
    local_naive = idx.tz_localize(None)
    offsets_min = ((local_naive - idx.tz_convert("UTC").tz_localize(None)) // pd.Timedelta(minutes=1)).to_numpy()
    out: list[str] = []
    start = 0
    while start < len(idx):
        end = start
        while end < len(idx) and offsets_min[end] == offsets_min[start]:
            end += 1
        off = int(offsets_min[start])
        sign = "+" if off >= 0 else "-"
        suffix = f"{sign}{abs(off) // 60:02d}:{abs(off) % 60:02d}"
        out.extend(s + suffix for s in local_naive[start:end].strftime("%Y-%m-%dT%H:%M:%S"))
        start = end
    return out


def write_agents_csv(path: Path, agents: list[AgentMeta]) -> None:
    table = pa.table(
        {
            "agent_id": pa.array([a.agent_id for a in agents]),
            "latitude": pa.array([a.latitude for a in agents], pa.float64()),
            "longitude": pa.array([a.longitude for a in agents], pa.float64()),
            "battery_capacity_kwh": pa.array([a.battery_capacity_kwh for a in agents], pa.float64()),
            "charger_power_kw": pa.array([a.charger_power_kw for a in agents], pa.float64()),
            "consumption_kwh_per_km": pa.array([a.consumption_kwh_per_km for a in agents], pa.float64()),
            "soc_target_pct": pa.array([a.soc_target_pct for a in agents], pa.float64()),
        }
    )
    assert table.column_names == list(AGENTS_COLUMNS)
    _write_table(path, table)


def write_system_csv(path: Path, timestamps_iso: list[str], system: dict[str, np.ndarray]) -> None:
    cols: dict[str, pa.Array] = {"timestamp": pa.array(timestamps_iso)}
    for name in SYSTEM_COLUMNS:
        cols[name] = pa.array(np.ascontiguousarray(system[name], dtype=np.float64))
    _write_table(path, pa.table(cols))


def write_wide_csv(path: Path, timestamps_iso: list[str], agent_ids: list[str], block: np.ndarray) -> None:
    """Write one wide per-agent file; ``block`` has shape (n_agents, n_minutes)."""
    cols: dict[str, pa.Array] = {"timestamp": pa.array(timestamps_iso)}
    for i, agent_id in enumerate(agent_ids):
        cols[agent_id] = pa.array(np.ascontiguousarray(block[i], dtype=np.float64))
    _write_table(path, pa.table(cols))


def write_events_csv(
    path: Path,
    agent_ids: list[str],
    agent_idx: np.ndarray,
    minute: np.ndarray,
    timestamps_iso: list[str],
    kind: np.ndarray,
    soc_pct: np.ndarray,
    distance_km: np.ndarray,
) -> None:
    """Write events; rows must already be ordered. Departure distances are blank."""
    dist = [None if kind[i] == DEPARTURE else float(distance_km[i]) for i in range(len(kind))]
    table = pa.table(
        {
            "agent_id": pa.array([agent_ids[i] for i in agent_idx]),
            "timestamp": pa.array([timestamps_iso[m] for m in minute]),
            "event": pa.array(["departure" if k == DEPARTURE else "arrival" for k in kind]),
            "soc_pct": pa.array(np.ascontiguousarray(soc_pct, dtype=np.float64)),
            "trip_distance_km": pa.array(dist, pa.float64()),
        }
    )
    _write_table(path, table)
