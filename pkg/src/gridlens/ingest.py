"""CSV file-set parsing and validation into a :class:`ScenarioStore`.

Wide per-agent files (baseload, ev_load, soc) are streamed batch-wise with
pyarrow so peak memory stays near the final store size even for year-long,
hundred-agent scenarios. Validation is strict: malformed or empty numeric
cells, off-grid timestamps, range violations and event-order violations are
hard errors, never imputed.
"""

from __future__ import annotations

from datetime import timezone
from pathlib import Path

import numpy as np
import pandas as pd
import pyarrow as pa
import pyarrow.csv as pacsv

from .errors import (
    EmptyScenario,
    EventOrderError,
    MissingFile,
    RangeError,
    SchemaMismatch,
    TimeGridError,
)
from .model import (
    AGENTS_COLUMNS,
    ARRIVAL,
    DEPARTURE,
    EVENTS_COLUMNS,
    SYSTEM_COLUMNS,
    AgentMeta,
    EventLog,
    ScenarioManifest,
    ScenarioStore,
    TimeIndex,
)

STEP_NS = 60 * 1_000_000_000
_BLOCK_SIZE = 32 << 20


def load_scenario(manifest: ScenarioManifest) -> ScenarioStore:
    """Parse, validate and assemble one scenario's CSV file set.

    The six files named by the manifest must follow the canonical schema
    (UTF-8, comma separated, header row, ISO-8601 timestamps with offset).
    Returns an immutable store; the total simulated-energy checksum is
    recorded on it for later integrity checks.
    """
    manifest.validate()
    agents = read_agents_csv(manifest.path("agents"))
    agent_ids = [a.agent_id for a in agents]

    time_index, system = read_system_csv(manifest.path("system"))
    expected_ns = time_index.timestamps_ns()

    baseload = _read_wide(manifest.path("baseload"), agent_ids, expected_ns, low=0.0)
    ev_load = _read_wide(manifest.path("ev_load"), agent_ids, expected_ns, low=0.0)
    soc = _read_wide(manifest.path("soc"), agent_ids, expected_ns, low=0.0, high=100.0)

    events = read_events_csv(manifest.path("events"), agent_ids, time_index)

    # Streaming validation above already enforced the store invariants with
    # file row/column context, so skip the store's own whole-array re-scan.
    return ScenarioStore(
        manifest=manifest,
        time_index=time_index,
        agents=agents,
        baseload_kw=baseload,
        ev_load_kw=ev_load,
        soc_pct=soc,
        system=system,
        events=events,
        validate=False,
    )


def read_agents_csv(path: Path) -> list[AgentMeta]:
    df = _read_small_csv(path, list(AGENTS_COLUMNS), dtypes={"agent_id": str})
    if len(df) == 0:
        raise EmptyScenario(f"{path.name}: scenario has no agents")
    agents = []
    for row in df.itertuples(index=False):
        for fieldname, value in zip(AGENTS_COLUMNS[1:], row[1:]):
            if not np.isfinite(value):
                raise RangeError(f"{path.name}: agent {row.agent_id}: {fieldname} is empty or non-finite")
        meta = AgentMeta(
            agent_id=row.agent_id,
            latitude=float(row.latitude),
            longitude=float(row.longitude),
            battery_capacity_kwh=float(row.battery_capacity_kwh),
            charger_power_kw=float(row.charger_power_kw),
            consumption_kwh_per_km=float(row.consumption_kwh_per_km),
            soc_target_pct=float(row.soc_target_pct),
        )
        meta.validate()
        agents.append(meta)
    ids = [a.agent_id for a in agents]
    if len(set(ids)) != len(ids):
        dup = next(i for i in ids if ids.count(i) > 1)
        raise SchemaMismatch(f"{path.name}: duplicate agent_id {dup!r}")
    return agents


def read_system_csv(path: Path) -> tuple[TimeIndex, dict[str, np.ndarray]]:
    """Parse system.csv; its timestamp column defines the scenario grid."""
    df = _read_small_csv(path, ["timestamp", *SYSTEM_COLUMNS], dtypes={"timestamp": str})
    if len(df) == 0:
        raise TimeGridError(f"{path.name}: no timestamps")
    ns = _parse_timestamps(df["timestamp"].to_numpy(), path.name)
    steps = np.diff(ns)
    bad = np.flatnonzero(steps != STEP_NS)
    if len(bad):
        r = int(bad[0])
        step_s = steps[r] / 1e9
        kind = "duplicate timestamp" if step_s == 0 else (
            "non-increasing timestamp" if step_s < 0 else f"step of {step_s:g} s"
        )
        raise TimeGridError(f"{path.name} row {r + 3}: {kind} (expected uniform 60 s grid)")
    start = pd.Timestamp(ns[0], unit="ns", tz="UTC").to_pydatetime().astimezone(timezone.utc)
    time_index = TimeIndex(start, len(ns))
    system = {}
    for name in SYSTEM_COLUMNS:
        col = df[name].to_numpy(dtype=np.float64)
        if not np.isfinite(col).all():
            r = int(np.flatnonzero(~np.isfinite(col))[0])
            raise RangeError(f"{path.name} row {r + 2}, column {name}: empty or non-finite value")
        system[name] = col
    if (system["transformer_capacity_kw"] <= 0).any():
        r = int(np.flatnonzero(system["transformer_capacity_kw"] <= 0)[0])
        raise RangeError(f"{path.name} row {r + 2}: transformer_capacity_kw must be > 0")
    return time_index, system


def read_events_csv(path: Path, agent_ids: list[str], time_index: TimeIndex) -> EventLog:
    df = _read_small_csv(
        path,
        list(EVENTS_COLUMNS),
        dtypes={"agent_id": str, "timestamp": str, "event": str},
    )
    if len(df) == 0:
        return EventLog.empty()
    pos = {a: i for i, a in enumerate(agent_ids)}
    unknown = [a for a in df["agent_id"] if a not in pos]
    if unknown:
        raise SchemaMismatch(f"{path.name}: unknown agent_id {unknown[0]!r}")
    agent_idx = df["agent_id"].map(pos).to_numpy(dtype=np.int32)

    kinds_txt = df["event"].to_numpy()
    kind = np.where(kinds_txt == "departure", DEPARTURE, np.where(kinds_txt == "arrival", ARRIVAL, -1))
    if (kind < 0).any():
        r = int(np.flatnonzero(kind < 0)[0])
        raise SchemaMismatch(
            f"{path.name} row {r + 2}: event must be 'departure' or 'arrival', got {kinds_txt[r]!r}"
        )

    ns = _parse_timestamps(df["timestamp"].to_numpy(), path.name)
    off = ns - time_index.timestamps_ns()[0]
    minute = off // STEP_NS
    misaligned = (off % STEP_NS != 0) | (minute < 0) | (minute >= time_index.count)
    if misaligned.any():
        r = int(np.flatnonzero(misaligned)[0])
        raise TimeGridError(
            f"{path.name} row {r + 2}: timestamp {df['timestamp'].iloc[r]} is not on the scenario's 60 s grid"
        )

    soc = df["soc_pct"].to_numpy(dtype=np.float64)
    if (~np.isfinite(soc)).any():
        r = int(np.flatnonzero(~np.isfinite(soc))[0])
        raise RangeError(f"{path.name} row {r + 2}: soc_pct is empty or non-finite")
    if ((soc < 0) | (soc > 100)).any():
        r = int(np.flatnonzero((soc < 0) | (soc > 100))[0])
        raise RangeError(f"{path.name} row {r + 2}: soc_pct {soc[r]} outside [0, 100]")

    dist = df["trip_distance_km"].to_numpy(dtype=np.float64)
    dep = kind == DEPARTURE
    if (~np.isnan(dist[dep])).any():
        r = int(np.flatnonzero(dep & ~np.isnan(dist))[0])
        raise SchemaMismatch(f"{path.name} row {r + 2}: departure rows must leave trip_distance_km empty")
    arr_missing = ~dep & np.isnan(dist)
    if arr_missing.any():
        r = int(np.flatnonzero(arr_missing)[0])
        raise SchemaMismatch(f"{path.name} row {r + 2}: arrival rows require trip_distance_km")
    if np.nanmin(dist, initial=0.0) < 0:
        r = int(np.flatnonzero(dist < 0)[0])
        raise RangeError(f"{path.name} row {r + 2}: trip_distance_km must be >= 0")

    _check_alternation(path.name, agent_ids, agent_idx, minute, kind)
    return EventLog(agent_idx, minute.astype(np.int64), kind.astype(np.uint8), soc, dist)


def _check_alternation(fname, agent_ids, agent_idx, minute, kind) -> None:
    """Per agent, events must alternate departure/arrival in time order.

    A leading arrival and a trailing departure are both allowed.
    """
    order = np.lexsort((kind, minute, agent_idx))
    a, m, k = agent_idx[order], minute[order], kind[order]
    same_agent = a[1:] == a[:-1]
    same_kind = k[1:] == k[:-1]
    viol = np.flatnonzero(same_agent & same_kind)
    if len(viol):
        i = int(viol[0])
        what = "departures" if k[i] == DEPARTURE else "arrivals"
        raise EventOrderError(
            f"{fname}: agent {agent_ids[a[i]]}: two consecutive {what} "
            f"(minutes {m[i]} and {m[i + 1]})"
        )


# -- wide file streaming -------------------------------------------------


def _read_wide(
    path: Path,
    agent_ids: list[str],
    expected_ns: np.ndarray,
    low: float,
    high: float | None = None,
) -> np.ndarray:
    name = path.name
    _check_header(path, ["timestamp", *agent_ids])
    n, count = len(agent_ids), len(expected_ns)
    out = np.empty((n, count), dtype=np.float64)

    convert = pacsv.ConvertOptions(
        column_types={"timestamp": pa.string(), **{a: pa.float64() for a in agent_ids}}
    )
    ts_chunks: list[pa.Array] = []
    row0 = 0
    try:
        with pacsv.open_csv(
            path,
            read_options=pacsv.ReadOptions(block_size=_BLOCK_SIZE),
            convert_options=convert,
        ) as reader:
            for batch in reader:
                rows = batch.num_rows
                if row0 + rows > count:
                    raise TimeGridError(
                        f"{name}: {row0 + rows}+ rows, expected {count} (grid mismatch with system.csv)"
                    )
                ts_chunks.append(batch.column(0))
                for j in range(n):
                    col = batch.column(j + 1)
                    if col.null_count:
                        r = int(np.flatnonzero(col.is_null().to_numpy(zero_copy_only=False))[0])
                        raise SchemaMismatch(
                            f"{name} row {row0 + r + 2}, column {agent_ids[j]}: empty cell"
                        )
                    vals = col.to_numpy()
                    _check_range(vals, name, agent_ids[j], row0, low, high)
                    out[j, row0 : row0 + rows] = vals
                row0 += rows
    except pa.ArrowInvalid as exc:
        raise SchemaMismatch(f"{name}: {exc}") from exc
    if row0 != count:
        raise TimeGridError(f"{name}: {row0} rows, expected {count} (grid mismatch with system.csv)")

    ts = pa.chunked_array(ts_chunks).to_pandas()
    ns = _parse_timestamps(ts.to_numpy(), name)
    if not np.array_equal(ns, expected_ns):
        r = int(np.flatnonzero(ns != expected_ns)[0])
        raise TimeGridError(
            f"{name} row {r + 2}: timestamp differs from the system.csv grid "
            f"(gap, duplicate or off-grid step)"
        )
    return out


def _check_range(vals, fname, col_name, row0, low, high) -> None:
    finite = np.isfinite(vals)
    if not finite.all():
        r = int(np.flatnonzero(~finite)[0])
        raise RangeError(f"{fname} row {row0 + r + 2}, column {col_name}: non-finite value")
    if (vals < low).any():
        r = int(np.flatnonzero(vals < low)[0])
        raise RangeError(
            f"{fname} row {row0 + r + 2}, column {col_name}: value {vals[r]} below {low}"
        )
    if high is not None and (vals > high).any():
        r = int(np.flatnonzero(vals > high)[0])
        raise RangeError(
            f"{fname} row {row0 + r + 2}, column {col_name}: value {vals[r]} above {high}"
        )


# -- shared helpers -------------------------------------------------------


def _check_header(path: Path, expected: list[str]) -> None:
    if not path.is_file():
        raise MissingFile(f"file not found: {path}")
    with open(path, "rb") as f:
        first = f.readline().decode("utf-8", errors="replace").rstrip("\r\n")
    got = first.split(",")
    if got != expected:
        raise SchemaMismatch(
            f"{path.name}: header mismatch: expected {','.join(expected)!r}, got {first!r}"
        )


def _read_small_csv(path: Path, expected_cols: list[str], dtypes: dict) -> pd.DataFrame:
    _check_header(path, expected_cols)
    try:
        df = pd.read_csv(path, dtype=dtypes)
    except ValueError as exc:
        raise SchemaMismatch(f"{path.name}: {exc}") from exc
    return df


def _parse_timestamps(values: np.ndarray, fname: str) -> np.ndarray:
    try:
        parsed = pd.to_datetime(pd.Series(values), utc=True, format="ISO8601")
    except (ValueError, TypeError) as exc:
        raise SchemaMismatch(f"{fname}: unparseable timestamp: {exc}") from exc
    if parsed.isna().any():
        r = int(np.flatnonzero(parsed.isna().to_numpy())[0])
        raise SchemaMismatch(f"{fname} row {r + 2}: empty or unparseable timestamp")
    return parsed.to_numpy(dtype="datetime64[ns]").astype(np.int64)
