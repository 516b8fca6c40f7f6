from datetime import date
from pathlib import Path

import numpy as np
import pytest

from gridlens import GenConfig, generate, load_manifest, load_scenario
from gridlens.csvout import iso_local_timestamps
from gridlens.errors import (
    EmptyScenario,
    EventOrderError,
    MissingFile,
    RangeError,
    SchemaMismatch,
    TimeGridError,
)
from gridlens.model import ARRIVAL, DEPARTURE

from fixtures import make_store, write_store_csvs


@pytest.fixture()
def scenario_dir(tmp_path, small_scenario_dir):
    """Mutable copy of the generated 5-agent scenario."""
    import shutil

    dst = tmp_path / "scn"
    shutil.copytree(small_scenario_dir, dst)
    return dst


def _edit(path: Path, fn):
    lines = path.read_text().splitlines()
    path.write_text("\n".join(fn(lines)) + "\n")


def _load(scenario_dir):
    return load_scenario(load_manifest(scenario_dir / "scenario.toml"))


class TestLoadScenario:
    def test_well_formed_counts(self, small_scenario_dir, small_store):
        # independent row count straight from the files
        for name in ("baseload", "ev_load", "soc", "system"):
            n_lines = sum(1 for _ in open(small_scenario_dir / f"{name}.csv"))
            assert n_lines == 2880 + 1
        header = open(small_scenario_dir / "baseload.csv").readline().rstrip("\n").split(",")
        assert len(header) == 1 + 5
        assert small_store.time_index.count == 2880
        assert small_store.n_agents == 5
        for _, block in small_store.iter_load_blocks():
            assert block.shape == (5, 2880)

    def test_missing_file(self, scenario_dir):
        (scenario_dir / "soc.csv").unlink()
        with pytest.raises(MissingFile):
            _load(scenario_dir)

    def test_missing_agent_column(self, scenario_dir):
        def drop_last_col(lines):
            return [",".join(line.split(",")[:-1]) for line in lines]

        _edit(scenario_dir / "baseload.csv", drop_last_col)
        with pytest.raises(SchemaMismatch):
            _load(scenario_dir)

    def test_off_grid_event_timestamp(self, scenario_dir):
        def shift(lines):
            parts = lines[1].split(",")
            parts[1] = parts[1].replace(":00+", ":30+")
            lines[1] = ",".join(parts)
            return lines

        _edit(scenario_dir / "events.csv", shift)
        with pytest.raises(TimeGridError):
            _load(scenario_dir)

    def test_negative_load_cell(self, scenario_dir):
        def corrupt(lines):
            parts = lines[5].split(",")
            parts[2] = "-0.4"
            lines[5] = ",".join(parts)
            return lines

        _edit(scenario_dir / "baseload.csv", corrupt)
        with pytest.raises(RangeError) as err:
            _load(scenario_dir)
        # row/column context for the CLI error listing
        assert "row 6" in str(err.value)
        assert "A002" in str(err.value)

    def test_soc_above_100(self, scenario_dir):
        def corrupt(lines):
            parts = lines[3].split(",")
            parts[1] = "140.5"
            lines[3] = ",".join(parts)
            return lines

        _edit(scenario_dir / "soc.csv", corrupt)
        with pytest.raises(RangeError):
            _load(scenario_dir)

    def test_empty_cell_is_hard_error(self, scenario_dir):
        def corrupt(lines):
            parts = lines[2].split(",")
            parts[1] = ""
            lines[2] = ",".join(parts)
            return lines

        _edit(scenario_dir / "ev_load.csv", corrupt)
        with pytest.raises((SchemaMismatch, RangeError)):
            _load(scenario_dir)

    def test_nan_text_is_hard_error(self, scenario_dir):
        def corrupt(lines):
            parts = lines[2].split(",")
            parts[1] = "NaN"
            lines[2] = ",".join(parts)
            return lines

        _edit(scenario_dir / "ev_load.csv", corrupt)
        with pytest.raises((SchemaMismatch, RangeError)):
            _load(scenario_dir)

    def test_non_positive_capacity(self, scenario_dir):
        def corrupt(lines):
            parts = lines[10].split(",")
            parts[4] = "0"
            lines[10] = ",".join(parts)
            return lines

        _edit(scenario_dir / "system.csv", corrupt)
        with pytest.raises(RangeError):
            _load(scenario_dir)

    def test_time_grid_gap(self, scenario_dir):
        _edit(scenario_dir / "system.csv", lambda lines: lines[:100] + lines[101:])
        with pytest.raises(TimeGridError):
            _load(scenario_dir)

    def test_time_grid_duplicate(self, scenario_dir):
        _edit(scenario_dir / "system.csv", lambda lines: lines[:100] + [lines[99]] + lines[100:])
        with pytest.raises(TimeGridError):
            _load(scenario_dir)

    def test_wide_file_grid_mismatch(self, scenario_dir):
        _edit(scenario_dir / "baseload.csv", lambda lines: lines[:-1])
        with pytest.raises(TimeGridError):
            _load(scenario_dir)

    def test_consecutive_departures(self, scenario_dir):
        def corrupt(lines):
            first_dep = next(l for l in lines[1:] if ",departure," in l)
            parts = first_dep.split(",")
            parts[1] = parts[1].replace("T0", "T1", 1)
            return lines + [",".join(parts)]

        _edit(scenario_dir / "events.csv", corrupt)
        with pytest.raises(EventOrderError):
            _load(scenario_dir)

    def test_departure_with_distance(self, scenario_dir):
        def corrupt(lines):
            i, line = next((i, l) for i, l in enumerate(lines) if ",departure," in l)
            lines[i] = line + "12.5"
            return lines

        _edit(scenario_dir / "events.csv", corrupt)
        with pytest.raises(SchemaMismatch):
            _load(scenario_dir)

    def test_arrival_without_distance(self, scenario_dir):
        def corrupt(lines):
            i, line = next((i, l) for i, l in enumerate(lines) if ",arrival," in l)
            parts = line.split(",")
            parts[4] = ""
            lines[i] = ",".join(parts)
            return lines

        _edit(scenario_dir / "events.csv", corrupt)
        with pytest.raises(SchemaMismatch):
            _load(scenario_dir)

    def test_unknown_event_kind(self, scenario_dir):
        def corrupt(lines):
            lines[1] = lines[1].replace("departure", "teleport").replace("arrival", "teleport")
            return lines

        _edit(scenario_dir / "events.csv", corrupt)
        with pytest.raises(SchemaMismatch):
            _load(scenario_dir)

    def test_empty_agent_set(self, scenario_dir):
        _edit(scenario_dir / "agents.csv", lambda lines: lines[:1])
        with pytest.raises(EmptyScenario):
            _load(scenario_dir)

    def test_leading_arrival_and_trailing_departure_allowed(self, tmp_path):
        store = make_store(
            baseload=[[1.0] * 300],
            ev_load=[[0.0] * 300],
            events=[
                (0, 10, ARRIVAL, 80.0, 25.0),   # away at scenario start
                (0, 100, DEPARTURE, 90.0, np.nan),
                (0, 200, ARRIVAL, 84.0, 20.0),
                (0, 290, DEPARTURE, 88.0, np.nan),  # still away at scenario end
            ],
        )
        manifest_path = write_store_csvs(store, tmp_path / "scn")
        loaded = load_scenario(load_manifest(manifest_path))
        assert len(loaded.events) == 4


class TestChecksumAndRoundTrip:
    def test_energy_checksum_recomputable(self, small_store):
        assert small_store.energy_checksum_kwh == small_store.compute_energy_checksum()

    def test_timestamp_text_round_trip(self, small_scenario_dir, small_store):
        # formatting the internal UTC grid back in the manifest timezone
        # reproduces the input text exactly
        rendered = iso_local_timestamps(small_store.time_index, small_store.zone)
        raw = [line.split(",", 1)[0] for line in open(small_scenario_dir / "system.csv")][1:]
        assert rendered == raw

    def test_timestamp_round_trip_across_dst(self, tmp_path):
        cfg = GenConfig(seed=3, n_agents=2, start_date=date(2025, 3, 29), end_date=date(2025, 4, 1))
        generate(cfg, tmp_path / "dst")
        store = load_scenario(load_manifest(tmp_path / "dst" / "scenario.toml"))
        assert store.time_index.count == 3 * 1440 - 60
        rendered = iso_local_timestamps(store.time_index, store.zone)
        raw = [line.split(",", 1)[0] for line in open(tmp_path / "dst" / "system.csv")][1:]
        assert rendered == raw
        assert "2025-03-30T01:59:00+01:00" in rendered
        assert "2025-03-30T03:00:00+02:00" in rendered
        assert not any(ts.startswith("2025-03-30T02:") for ts in rendered)

    def test_store_invariants_on_accepted_files(self, small_store):
        # everything load_scenario accepts satisfies the store invariants
        for _, block in small_store.iter_load_blocks():
            assert np.isfinite(block).all()
        assert (small_store.baseload_kw >= 0).all()
        assert (small_store.ev_load_kw >= 0).all()
        assert ((small_store.soc_pct >= 0) & (small_store.soc_pct <= 100)).all()
        assert (small_store.system["transformer_capacity_kw"] > 0).all()

    def test_http_fixture_round_trips(self, tmp_path, http_store):
        manifest_path = write_store_csvs(http_store, tmp_path / "fix3")
        loaded = load_scenario(load_manifest(manifest_path))
        assert loaded.value_equal(http_store)
