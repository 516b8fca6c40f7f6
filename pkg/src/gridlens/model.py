"""Core data model: manifest, time index, agent metadata, events, store.

A :class:`ScenarioStore` is the immutable columnar form of one simulation
scenario. Load series are held as float64 arrays of shape
``(n_agents, n_minutes)`` with the agent axis first, so per-agent drill-down
slices are contiguous; system series are plain ``(n_minutes,)`` columns.
All timestamps are UTC internally; the manifest timezone is only consulted
for local-day operations (heatmaps, daily distances) and text round-trips.
"""

from __future__ import annotations

import math
import sys
from dataclasses import dataclass
from datetime import date, datetime, timedelta, timezone
from hashlib import blake2b
from pathlib import Path
from typing import Iterator, Optional
from zoneinfo import ZoneInfo

import numpy as np

from .errors import (
    EmptyScenario,
    MissingFile,
    OffGridTimestamp,
    RangeError,
    SchemaMismatch,
    TimeGridError,
)

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

STEP_SECONDS = 60
STEP = timedelta(seconds=STEP_SECONDS)

MANIFEST_FILE_KEYS = ("agents", "system", "baseload", "ev_load", "soc", "events")

#: system.csv value columns, in file order
SYSTEM_COLUMNS = (
    "spot_price_dkk_per_kwh",
    "dso_tariff_dkk_per_kwh",
    "co2_kg_per_kwh",
    "transformer_capacity_kw",
)

AGENTS_COLUMNS = (
    "agent_id",
    "latitude",
    "longitude",
    "battery_capacity_kwh",
    "charger_power_kw",
    "consumption_kwh_per_km",
    "soc_target_pct",
)

EVENTS_COLUMNS = ("agent_id", "timestamp", "event", "soc_pct", "trip_distance_km")

DEPARTURE = 0
ARRIVAL = 1


@dataclass(frozen=True)
class ScenarioManifest:
    """Locates one scenario's file set and names its timezone."""

    scenario_id: str
    root_path: Path
    timezone_name: str = "Europe/Copenhagen"
    agents: str = "agents.csv"
    system: str = "system.csv"
    baseload: str = "baseload.csv"
    ev_load: str = "ev_load.csv"
    soc: str = "soc.csv"
    events: str = "events.csv"

    def path(self, key: str) -> Path:
        return self.root_path / getattr(self, key)

    @property
    def zone(self) -> ZoneInfo:
        return ZoneInfo(self.timezone_name)

    def validate(self) -> None:
        if not self.scenario_id:
            raise SchemaMismatch("manifest: scenario_id must be non-empty")
        try:
            self.zone
        except Exception as exc:
            raise SchemaMismatch(f"manifest: unknown timezone {self.timezone_name!r}") from exc
        for key in MANIFEST_FILE_KEYS:
            p = self.path(key)
            if not p.is_file():
                raise MissingFile(f"manifest file {key!r} not found: {p}")


def load_manifest(path: str | Path) -> ScenarioManifest:
    """Parse a scenario manifest (TOML key=value text)."""
    path = Path(path)
    if not path.is_file():
        raise MissingFile(f"manifest not found: {path}")
    try:
        data = tomllib.loads(path.read_text(encoding="utf-8"))
    except tomllib.TOMLDecodeError as exc:
        raise SchemaMismatch(f"manifest {path}: {exc}") from exc
    if "scenario_id" not in data:
        raise SchemaMismatch(f"manifest {path}: missing scenario_id")
    kwargs = {"scenario_id": str(data["scenario_id"]), "root_path": path.parent}
    if "timezone" in data:
        kwargs["timezone_name"] = str(data["timezone"])
    for key in MANIFEST_FILE_KEYS:
        if key in data:
            kwargs[key] = str(data[key])
    manifest = ScenarioManifest(**kwargs)
    manifest.validate()
    return manifest


def write_manifest(manifest: ScenarioManifest, path: str | Path) -> None:
    lines = [
        f'scenario_id = "{manifest.scenario_id}"',
        f'timezone = "{manifest.timezone_name}"',
    ]
    for key in MANIFEST_FILE_KEYS:
        lines.append(f'{key} = "{getattr(manifest, key)}"')
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


class TimeIndex:
    """Uniform 60 s time grid: ``start + i * 60s`` for ``0 <= i < count``."""

    __slots__ = ("start", "count", "_ns")

    def __init__(self, start: datetime, count: int):
        if start.tzinfo is None:
            raise TimeGridError("time index start must be timezone-aware")
        if count < 1:
            raise TimeGridError("time index must contain at least one timestamp")
        self.start = start.astimezone(timezone.utc)
        self.count = int(count)
        self._ns = int(self.start.timestamp() * 1_000_000_000)

    @property
    def end(self) -> datetime:
        """First instant past the grid (exclusive)."""
        return self.start + STEP * self.count

    def __len__(self) -> int:
        return self.count

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, TimeIndex)
            and self.start == other.start
            and self.count == other.count
        )

    def __repr__(self) -> str:
        return f"TimeIndex(start={self.start.isoformat()}, count={self.count})"

    def at(self, i: int) -> datetime:
        if not 0 <= i < self.count:
            raise IndexError(f"minute index {i} out of range [0, {self.count})")
        return self.start + STEP * int(i)

    def index_of(self, t: datetime) -> int:
        """Exact grid index of ``t``; OffGridTimestamp if not on the grid."""
        if t.tzinfo is None:
            raise OffGridTimestamp(f"naive timestamp {t.isoformat()} (offset required)")
        delta = (t.astimezone(timezone.utc) - self.start).total_seconds()
        i, rem = divmod(delta, STEP_SECONDS)
        if rem != 0.0:
            raise OffGridTimestamp(f"{t.isoformat()} is not on the 60 s grid")
        i = int(i)
        if not 0 <= i < self.count:
            raise OffGridTimestamp(f"{t.isoformat()} is outside the scenario range")
        return i

    def clip_window(self, start: datetime, end: datetime) -> tuple[int, int]:
        """Half-open [start, end) mapped to grid indices [i0, i1).

        Grid minutes whose timestamp lies in the window are included; the
        bounds need not be on the grid.
        """
        if start.tzinfo is None or end.tzinfo is None:
            raise OffGridTimestamp("window bounds must carry a UTC offset")
        s = (start.astimezone(timezone.utc) - self.start).total_seconds()
        e = (end.astimezone(timezone.utc) - self.start).total_seconds()
        i0 = max(0, math.ceil(s / STEP_SECONDS))
        i1 = min(self.count, math.ceil(e / STEP_SECONDS))
        return i0, i1

    def timestamps_ns(self) -> np.ndarray:
        """int64 epoch nanoseconds for every grid minute."""
        return self._ns + np.arange(self.count, dtype=np.int64) * (STEP_SECONDS * 1_000_000_000)

    def local_day_window(self, day: date, zone: ZoneInfo) -> tuple[int, int]:
        """Grid index window [i0, i1) covered by the local calendar day.

        DST-affected days span 1380 or 1500 minutes; the window is clipped
        to the scenario range.
        """
        midnight = datetime(day.year, day.month, day.day, tzinfo=zone)
        nxt = day + timedelta(days=1)
        next_midnight = datetime(nxt.year, nxt.month, nxt.day, tzinfo=zone)
        return self.clip_window(midnight, next_midnight)

    def local_dates(self, zone: ZoneInfo, i0: int = 0, i1: Optional[int] = None) -> list[date]:
        """Distinct local calendar dates touched by grid window [i0, i1)."""
        if i1 is None:
            i1 = self.count
        if i1 <= i0:
            return []
        out: list[date] = []
        d = self.at(i0).astimezone(zone).date()
        while True:
            out.append(d)
            nxt = d + timedelta(days=1)
            boundary = datetime(nxt.year, nxt.month, nxt.day, tzinfo=zone)
            j0, _ = self.clip_window(boundary, self.end)
            if j0 >= i1:
                return out
            d = nxt


@dataclass(frozen=True)
class AgentMeta:
    """Static per-consumer record: location, EV specs, charging target."""

    agent_id: str
    latitude: float
    longitude: float
    battery_capacity_kwh: float
    charger_power_kw: float
    consumption_kwh_per_km: float
    soc_target_pct: float

    def validate(self) -> None:
        if not self.agent_id:
            raise SchemaMismatch("agent_id must be non-empty")
        if not -90.0 <= self.latitude <= 90.0:
            raise RangeError(f"agent {self.agent_id}: latitude {self.latitude} outside [-90, 90]")
        if not -180.0 <= self.longitude <= 180.0:
            raise RangeError(f"agent {self.agent_id}: longitude {self.longitude} outside [-180, 180]")
        if not self.battery_capacity_kwh > 0:
            raise RangeError(f"agent {self.agent_id}: battery capacity must be > 0")
        if not self.charger_power_kw > 0:
            raise RangeError(f"agent {self.agent_id}: charger power must be > 0")
        if not self.consumption_kwh_per_km > 0:
            raise RangeError(f"agent {self.agent_id}: consumption rate must be > 0")
        if not 0.0 <= self.soc_target_pct <= 100.0:
            raise RangeError(f"agent {self.agent_id}: SoC target outside [0, 100]")


class EventLog:
    """Columnar departure/arrival log, ordered by (timestamp, agent).

    ``kind`` is 0 for departure, 1 for arrival. ``distance_km`` is NaN on
    departure rows (absent by contract).
    """

    __slots__ = ("agent_idx", "minute", "kind", "soc_pct", "distance_km")

    def __init__(
        self,
        agent_idx: np.ndarray,
        minute: np.ndarray,
        kind: np.ndarray,
        soc_pct: np.ndarray,
        distance_km: np.ndarray,
    ):
        n = len(agent_idx)
        if not (len(minute) == len(kind) == len(soc_pct) == len(distance_km) == n):
            raise ValueError("event log columns must share one length")
        order = np.lexsort((agent_idx, kind, minute))
        self.agent_idx = np.ascontiguousarray(agent_idx[order], dtype=np.int32)
        self.minute = np.ascontiguousarray(minute[order], dtype=np.int64)
        self.kind = np.ascontiguousarray(kind[order], dtype=np.uint8)
        self.soc_pct = np.ascontiguousarray(soc_pct[order], dtype=np.float64)
        self.distance_km = np.ascontiguousarray(distance_km[order], dtype=np.float64)
        for a in (self.agent_idx, self.minute, self.kind, self.soc_pct, self.distance_km):
            a.setflags(write=False)

    def __len__(self) -> int:
        return len(self.minute)

    def for_agent(self, idx: int) -> np.ndarray:
        """Row positions of one agent's events, in time order."""
        return np.flatnonzero(self.agent_idx == idx)

    def in_window(self, i0: int, i1: int) -> np.ndarray:
        """Row positions of events with minute in [i0, i1)."""
        return np.flatnonzero((self.minute >= i0) & (self.minute < i1))

    @staticmethod
    def empty() -> "EventLog":
        z = np.zeros(0)
        return EventLog(z.astype(np.int32), z.astype(np.int64), z.astype(np.uint8), z, z)


class ScenarioStore:
    """Immutable columnar store of one scenario.

    Construction validates shapes and value ranges and freezes all arrays;
    afterwards the store is safe for unlimited concurrent readers. A handful
    of whole-scenario aggregates (per-minute totals, charging counts,
    per-agent peaks and full-window energy/expense sums) are precomputed so
    that dashboard queries stay fast on year-long stores.
    """

    def __init__(
        self,
        manifest: ScenarioManifest,
        time_index: TimeIndex,
        agents: list[AgentMeta],
        baseload_kw: np.ndarray,
        ev_load_kw: np.ndarray,
        soc_pct: np.ndarray,
        system: dict[str, np.ndarray],
        events: EventLog,
        validate: bool = True,
    ):
        self.manifest = manifest
        self.time_index = time_index
        self.agents = list(agents)
        self.baseload_kw = np.ascontiguousarray(baseload_kw, dtype=np.float64)
        self.ev_load_kw = np.ascontiguousarray(ev_load_kw, dtype=np.float64)
        self.soc_pct = np.ascontiguousarray(soc_pct, dtype=np.float64)
        self.system = {k: np.ascontiguousarray(v, dtype=np.float64) for k, v in system.items()}
        self.events = events
        self._digest: Optional[str] = None

        if validate:
            self._validate()
        for arr in (self.baseload_kw, self.ev_load_kw, self.soc_pct, *self.system.values()):
            arr.setflags(write=False)

        self.agent_index = {a.agent_id: i for i, a in enumerate(self.agents)}
        self._finalize()

    # - validation ------------------------------------------------------

    def _validate(self) -> None:
        n, count = len(self.agents), self.time_index.count
        if n == 0:
            raise EmptyScenario("scenario has no agents")
        ids = [a.agent_id for a in self.agents]
        if len(set(ids)) != n:
            raise SchemaMismatch("duplicate agent_id in agents list")
        for a in self.agents:
            a.validate()
        for name, arr in (
            ("baseload", self.baseload_kw),
            ("ev_load", self.ev_load_kw),
            ("soc", self.soc_pct),
        ):
            if arr.shape != (n, count):
                raise SchemaMismatch(
                    f"{name} shape {arr.shape} does not match ({n} agents, {count} minutes)"
                )
        if set(self.system) != set(SYSTEM_COLUMNS):
            raise SchemaMismatch(f"system columns {sorted(self.system)} != {sorted(SYSTEM_COLUMNS)}")
        for name, col in self.system.items():
            if col.shape != (count,):
                raise SchemaMismatch(f"system column {name} length {len(col)} != {count}")
            if not np.isfinite(col).all():
                raise RangeError(f"system column {name} contains non-finite values")
        _check_block(self.baseload_kw, "baseload", low=0.0)
        _check_block(self.ev_load_kw, "ev_load", low=0.0)
        _check_block(self.soc_pct, "soc", low=0.0, high=100.0)
        if not (self.system["transformer_capacity_kw"] > 0).all():
            raise RangeError("transformer capacity must be > 0 at every timestamp")
        if len(self.events):
            if self.events.agent_idx.max(initial=-1) >= n or self.events.agent_idx.min(initial=0) < 0:
                raise SchemaMismatch("event references unknown agent index")
            if self.events.minute.min(initial=0) < 0 or self.events.minute.max(initial=-1) >= count:
                raise TimeGridError("event timestamp outside scenario range")

    # - derived aggregates ----------------------------------------------

    def _finalize(self) -> None:
        self.baseload_total_kw = self.baseload_kw.sum(axis=0)
        self.ev_total_kw = self.ev_load_kw.sum(axis=0)
        self.charging_count = (self.ev_load_kw > 0.0).sum(axis=0).astype(np.int32)

        n = len(self.agents)
        peaks = np.empty(n)
        ev_energy = np.empty(n)
        expenses = np.empty(n)
        price = self.system["spot_price_dkk_per_kwh"] + self.system["dso_tariff_dkk_per_kwh"]
        for i in range(n):
            total = self.baseload_kw[i] + self.ev_load_kw[i]
            peaks[i] = total.max() if len(total) else 0.0
            ev_energy[i] = self.ev_load_kw[i].sum() / 60.0
            expenses[i] = total.dot(price) / 60.0
        self.per_agent_peak_kw = peaks
        self.per_agent_ev_energy_kwh = ev_energy
        self.per_agent_expenses_dkk = expenses
        for arr in (
            self.baseload_total_kw,
            self.ev_total_kw,
            self.charging_count,
            self.per_agent_peak_kw,
            self.per_agent_ev_energy_kwh,
            self.per_agent_expenses_dkk,
        ):
            arr.setflags(write=False)

        # Simulated-energy checksum recorded at construction; recomputable
        # from the store at any time (integrity invariant).
        self.energy_checksum_kwh = self.compute_energy_checksum()

    def compute_energy_checksum(self) -> float:
        """Total simulated energy, kWh: sum of all loads times 1/60 h."""
        return float(self.baseload_total_kw.sum() + self.ev_total_kw.sum()) / 60.0

    # - accessors ---------------------------------------------------------

    @property
    def n_agents(self) -> int:
        return len(self.agents)

    @property
    def zone(self) -> ZoneInfo:
        return self.manifest.zone

    def agent_pos(self, agent_id: str) -> int:
        try:
            return self.agent_index[agent_id]
        except KeyError:
            raise_unknown_agent(agent_id)

    def iter_load_blocks(self) -> Iterator[tuple[str, np.ndarray]]:
        yield "baseload_kw", self.baseload_kw
        yield "ev_load_kw", self.ev_load_kw
        yield "soc_pct", self.soc_pct

    def content_digest(self) -> str:
        """blake2b digest over all column data and metadata (hex).

        Used as the HTTP strong cache validator and for whole-store value
        equality checks. Computed lazily; idempotent, so a benign race
        between concurrent readers only duplicates work.
        """
        if self._digest is None:
            h = blake2b(digest_size=20)
            h.update(self.manifest.scenario_id.encode())
            h.update(self.manifest.timezone_name.encode())
            h.update(f"{self.time_index.start.isoformat()}|{self.time_index.count}".encode())
            for a in self.agents:
                h.update(repr(a).encode())
            for _, block in self.iter_load_blocks():
                for row in block:
                    h.update(row)
            for name in SYSTEM_COLUMNS:
                h.update(self.system[name])
            ev = self.events
            for col in (ev.agent_idx, ev.minute, ev.kind, ev.soc_pct, ev.distance_km):
                h.update(col)
            self._digest = h.hexdigest()
        return self._digest

    def nbytes(self) -> int:
        total = sum(b.nbytes for _, b in self.iter_load_blocks())
        total += sum(c.nbytes for c in self.system.values())
        ev = self.events
        total += sum(c.nbytes for c in (ev.agent_idx, ev.minute, ev.kind, ev.soc_pct, ev.distance_km))
        return total

    def value_equal(self, other: "ScenarioStore") -> bool:
        if self.manifest.scenario_id != other.manifest.scenario_id:
            return False
        if self.manifest.timezone_name != other.manifest.timezone_name:
            return False
        if self.time_index != other.time_index or self.agents != other.agents:
            return False
        for (_, a), (_, b) in zip(self.iter_load_blocks(), other.iter_load_blocks()):
            if not np.array_equal(a, b):
                return False
        for name in SYSTEM_COLUMNS:
            if not np.array_equal(self.system[name], other.system[name]):
                return False
        ev, ov = self.events, other.events
        return all(
            np.array_equal(x, y, equal_nan=True)
            for x, y in (
                (ev.agent_idx, ov.agent_idx),
                (ev.minute, ov.minute),
                (ev.kind, ov.kind),
                (ev.soc_pct, ov.soc_pct),
                (ev.distance_km, ov.distance_km),
            )
        )


def raise_unknown_agent(agent_id: str):
    from .errors import UnknownAgent

    raise UnknownAgent(f"unknown agent {agent_id!r}")


def _check_block(arr: np.ndarray, name: str, low: float, high: Optional[float] = None) -> None:
    # row-chunked scan keeps temporaries small on year-long stores
    for i in range(arr.shape[0]):
        row = arr[i]
        if not np.isfinite(row).all():
            j = int(np.flatnonzero(~np.isfinite(row))[0])
            raise RangeError(f"{name}: non-finite value for agent {i} at minute {j}")
        if (row < low).any():
            j = int(np.flatnonzero(row < low)[0])
            raise RangeError(f"{name}: value {row[j]} below {low} for agent {i} at minute {j}")
        if high is not None and (row > high).any():
            j = int(np.flatnonzero(row > high)[0])
            raise RangeError(f"{name}: value {row[j]} above {high} for agent {i} at minute {j}")
