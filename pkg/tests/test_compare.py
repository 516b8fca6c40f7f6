from dataclasses import replace

import numpy as np
import pytest

from gridlens.compare import INCOMPARABLE, UNDEFINED_ZERO_REF, diff_kpis, overlay_series
from gridlens.errors import WindowMismatch
from gridlens.metrics import kpi_report
from gridlens.model import STEP

from fixtures import make_store


def _reports(small_store):
    return kpi_report(small_store), kpi_report(small_store)


class TestDiffKpis:
    def test_self_diff_all_defined_zero(self, small_store):
        test, ref = _reports(small_store)
        for d in diff_kpis(test, ref):
            if d.pct_diff is not None:
                assert d.pct_diff == 0.0
            else:
                # self-diff markers can only come from undefined KPIs
                assert d.marker in (UNDEFINED_ZERO_REF, INCOMPARABLE)
                assert d.test == d.ref

    def test_plus_sixteen_percent(self, small_store):
        test, ref = _reports(small_store)
        test = replace(test, dso_tariff_revenue=116.0)
        ref = replace(ref, dso_tariff_revenue=100.0)
        d = {x.kpi: x for x in diff_kpis(test, ref)}["dso_tariff_revenue"]
        assert d.pct_diff == pytest.approx(16.0, rel=1e-12)

    def test_zero_reference_marker(self, small_store):
        test, ref = _reports(small_store)
        test = replace(test, overload_duration_hours=3.0)
        ref = replace(ref, overload_duration_hours=0.0)
        d = {x.kpi: x for x in diff_kpis(test, ref)}["overload_duration_hours"]
        assert d.pct_diff is None
        assert d.marker == UNDEFINED_ZERO_REF

    def test_undefined_side_incomparable(self, small_store):
        test, ref = _reports(small_store)
        test = replace(test, load_factor=None)
        d = {x.kpi: x for x in diff_kpis(test, ref)}["load_factor"]
        assert d.pct_diff is None
        assert d.marker == INCOMPARABLE

    def test_one_diff_per_kpi(self, small_store):
        test, ref = _reports(small_store)
        names = [d.kpi for d in diff_kpis(test, ref)]
        assert len(names) == len(set(names))
        for expected in (
            "overload_duration_hours",
            "first_overload",
            "load_factor",
            "coincidence_factor",
            "dissatisfaction_count",
            "avg_charging_cost",
            "avg_co2",
            "dso_tariff_revenue",
            "critical_share",
            "overload_class_minutes.critical",
        ):
            assert expected in names

    def test_antisymmetry(self, small_store):
        test, ref = _reports(small_store)
        test = replace(test, dso_tariff_revenue=137.5, load_factor=0.25)
        ref = replace(ref, dso_tariff_revenue=110.0, load_factor=0.4)
        fwd = {x.kpi: x for x in diff_kpis(test, ref)}
        bwd = {x.kpi: x for x in diff_kpis(ref, test)}
        for kpi in ("dso_tariff_revenue", "load_factor"):
            d = fwd[kpi].pct_diff
            assert bwd[kpi].pct_diff == pytest.approx(100.0 * (-d) / (100.0 + d), rel=1e-9)


class TestOverlaySeries:
    def test_same_store_identical(self, small_store):
        ti = small_store.time_index
        pair = overlay_series(small_store, small_store, "total_load", "aggregate",
                              ti.start, ti.end, 48)
        assert pair.test == pair.ref

    def test_zero_ev_reference_overlay(self):
        rng = np.random.default_rng(1)
        base = rng.uniform(0, 2, (2, 200))
        test = make_store(baseload=base, ev_load=rng.uniform(0, 5, (2, 200)), scenario_id="t")
        ref = make_store(baseload=base, ev_load=np.zeros((2, 200)), scenario_id="r")
        pair = overlay_series(test, ref, "ev_load", "aggregate",
                              test.time_index.start, test.time_index.end, 20)
        assert all(b.max == 0.0 and b.mean == 0.0 for b in pair.ref.buckets)
        assert any(b.max > 0 for b in pair.test.buckets)

    def test_bucket_boundaries_identical(self):
        rng = np.random.default_rng(2)
        test = make_store(baseload=rng.uniform(0, 2, (1, 500)), ev_load=np.zeros((1, 500)))
        ref = make_store(baseload=rng.uniform(0, 2, (1, 700)), ev_load=np.zeros((1, 700)))
        start = test.time_index.at(100)
        end = test.time_index.start + STEP * 450
        pair = overlay_series(test, ref, "baseload", "aggregate", start, end, 37)
        for bt, br in zip(pair.test.buckets, pair.ref.buckets):
            assert bt.t_start == br.t_start
            assert bt.count == br.count

    def test_window_mismatch(self):
        test = make_store(baseload=[[1.0] * 100], ev_load=[[0.0] * 100])
        ref = make_store(baseload=[[1.0] * 50], ev_load=[[0.0] * 50])
        with pytest.raises(WindowMismatch):
            overlay_series(test, ref, "baseload", "aggregate",
                           test.time_index.start, test.time_index.end, 10)

    def test_phase_shifted_grids_rejected(self):
        test = make_store(baseload=[[1.0] * 100], ev_load=[[0.0] * 100])
        shifted = make_store(
            baseload=[[1.0] * 100],
            ev_load=[[0.0] * 100],
            start="2025-01-01T00:00:30+01:00",
        )
        with pytest.raises(WindowMismatch):
            overlay_series(test, shifted, "baseload", "aggregate",
                           test.time_index.at(10), test.time_index.at(50), 5)
