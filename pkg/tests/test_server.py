import threading
from pathlib import Path

import pytest
from starlette.testclient import TestClient

from gridlens.server import ScenarioRegistry, create_app

from fixtures import build_http_store, write_store_csvs
from oracle import oracle_kpis

GOLDEN_DIR = Path(__file__).parent / "goldens" / "http"

#: endpoint golden cases: (golden name, request path)
GOLDEN_CASES = [
    ("scenarios", "/api/scenarios"),
    ("kpis", "/api/scenarios/fix3/kpis"),
    ("kpis_self_ref", "/api/scenarios/fix3/kpis?ref=fix3"),
    ("series_total_load", "/api/scenarios/fix3/series?var=total_load&buckets=24"),
    ("series_soc_agent", "/api/scenarios/fix3/series?var=soc&scope=A001&buckets=12"),
    ("series_overlay", "/api/scenarios/fix3/series?var=ev_load&buckets=6&ref=fix3"),
    ("heatmap", "/api/scenarios/fix3/heatmap?date=2025-06-10&bins=24"),
    ("events", "/api/scenarios/fix3/events?bin=360"),
    ("charging", "/api/scenarios/fix3/charging?at=2025-06-10T01:30:00%2B02:00"),
    ("map_ev_energy", "/api/scenarios/fix3/map?metric=ev_energy_kwh"),
    ("agent_detail", "/api/scenarios/fix3/agents/A001?buckets=6"),
    ("err_unknown_scenario", "/api/scenarios/nope/kpis"),
    ("err_unknown_agent", "/api/scenarios/fix3/agents/ghost"),
    ("err_bad_from", "/api/scenarios/fix3/series?var=total_load&from=yesterday"),
    ("err_window_outside", "/api/scenarios/fix3/series?var=total_load&from=2030-01-01T00:00:00%2B00:00&to=2030-01-02T00:00:00%2B00:00"),
    ("err_bad_buckets", "/api/scenarios/fix3/series?var=total_load&buckets=999999"),
    ("err_unknown_variable", "/api/scenarios/fix3/series?var=entropy"),
]

EXPECTED_STATUS = {
    "err_unknown_scenario": 404,
    "err_unknown_agent": 404,
    "err_bad_from": 400,
    "err_window_outside": 422,
    "err_bad_buckets": 400,
    "err_unknown_variable": 400,
}


@pytest.fixture(scope="module")
def client(http_store):
    registry = ScenarioRegistry()
    registry.add(http_store)
    return TestClient(create_app(registry))


class TestContract:
    def test_empty_registry_lists_nothing(self):
        empty = TestClient(create_app(ScenarioRegistry()))
        r = empty.get("/api/scenarios")
        assert r.status_code == 200
        assert r.json() == []

    def test_scenario_listing(self, client):
        entries = client.get("/api/scenarios").json()
        assert [e["id"] for e in entries] == ["fix3"]
        assert entries[0]["agents"] == 3
        assert entries[0]["timezone"] == "Europe/Copenhagen"

    def test_kpi_key_set(self, client):
        doc = client.get("/api/scenarios/fix3/kpis").json()
        assert set(doc["kpis"]) == {
            "overload_duration_hours",
            "first_overload",
            "load_factor",
            "coincidence_factor",
            "dissatisfaction_count",
            "avg_charging_cost",
            "avg_co2",
            "dso_tariff_revenue",
            "overload_class_minutes",
            "critical_share",
        }

    def test_kpis_match_independent_oracle(self, client, http_store, tmp_path):
        manifest = write_store_csvs(http_store, tmp_path / "fix3")
        expected = oracle_kpis(manifest.parent)["kpis"]
        got = client.get("/api/scenarios/fix3/kpis").json()["kpis"]
        assert got["overload_duration_hours"] == expected["overload_duration_hours"] == 4.0
        assert got["first_overload"] == expected["first_overload"] == "2025-06-10T01:00:00+02:00"
        assert got["dissatisfaction_count"] == expected["dissatisfaction_count"] == 1
        assert got["critical_share"] == expected["critical_share"] == 0.25
        assert got["coincidence_factor"] == 1.0
        assert got["overload_class_minutes"] == expected["overload_class_minutes"] == {
            "none": 1200,
            "normal_cyclic": 120,
            "long_time_emergency": 30,
            "short_time_emergency": 30,
            "critical": 60,
        }
        for name in ("load_factor", "avg_charging_cost", "avg_co2", "dso_tariff_revenue"):
            # wire values carry 9 significant digits, so allow the rounding quantum
            assert got[name] == pytest.approx(expected[name], rel=5e-9)

    def test_self_ref_diffs_are_zero(self, client):
        doc = client.get("/api/scenarios/fix3/kpis?ref=fix3").json()
        assert doc["reference_id"] == "fix3"
        for kpi, diff in doc["kpis"].items():
            if diff["pct_diff"] is not None:
                assert diff["pct_diff"] == 0.0, kpi

    def test_charging_consistency(self, client):
        doc = client.get("/api/scenarios/fix3/charging", params={"at": "2025-06-10T01:30:00+02:00"}).json()
        assert doc["agents"] == [
            {"agent_id": "A001", "ev_load_kw": 3.7},
            {"agent_id": "B002", "ev_load_kw": 7.4},
        ]
        counts = client.get(
            "/api/scenarios/fix3/series",
            params={"var": "charging_ev_count", "from": "2025-06-10T01:30:00+02:00",
                    "to": "2025-06-10T01:31:00+02:00", "buckets": 1},
        ).json()
        assert counts["buckets"][0]["mean"] == len(doc["agents"])

    def test_map_includes_coordinates(self, client):
        doc = client.get("/api/scenarios/fix3/map?metric=peak_load_kw").json()
        assert set(doc["stats"]) == {"sum", "max", "mean", "min"}
        for agent in doc["agents"]:
            assert {"agent_id", "latitude", "longitude", "value"} == set(agent)

    def test_idempotent_reads_and_etag(self, client):
        a = client.get("/api/scenarios/fix3/series?var=total_load&buckets=48")
        b = client.get("/api/scenarios/fix3/series?var=total_load&buckets=48")
        assert a.content == b.content
        assert a.headers["etag"] == b.headers["etag"]
        assert a.headers["etag"].startswith('"')

    def test_charging_off_grid_and_outside(self, client):
        r = client.get("/api/scenarios/fix3/charging", params={"at": "2025-06-10T01:30:30+02:00"})
        assert r.status_code == 400
        r = client.get("/api/scenarios/fix3/charging", params={"at": "2031-01-01T00:00:00+02:00"})
        assert r.status_code == 422

    def test_heatmap_bad_date(self, client):
        assert client.get("/api/scenarios/fix3/heatmap?date=June").status_code == 400
        assert client.get("/api/scenarios/fix3/heatmap?date=2031-06-10").status_code == 422

    def test_error_body_shape(self, client):
        doc = client.get("/api/scenarios/nope/kpis").json()
        assert set(doc) == {"code", "message"}


@pytest.mark.parametrize("name,url", GOLDEN_CASES, ids=[c[0] for c in GOLDEN_CASES])
def test_endpoint_golden(client, name, url):
    response = client.get(url)
    assert response.status_code == EXPECTED_STATUS.get(name, 200)
    golden = GOLDEN_DIR / f"{name}.json"
    assert response.content == golden.read_bytes(), f"body drifted from goldens/http/{name}.json"


class TestRegistration:
    def test_post_register_and_duplicate(self, tmp_path, http_store):
        manifest = write_store_csvs(http_store, tmp_path / "fix3disk")
        registry = ScenarioRegistry()
        client = TestClient(create_app(registry))
        r = client.post("/api/scenarios", json={"manifest": str(manifest)})
        assert r.status_code == 200
        assert r.json() == {"id": "fix3"}
        assert [e["id"] for e in client.get("/api/scenarios").json()] == ["fix3"]
        r = client.post("/api/scenarios", json={"manifest": str(manifest)})
        assert r.status_code == 409

    def test_post_bad_body(self):
        client = TestClient(create_app(ScenarioRegistry()))
        assert client.post("/api/scenarios", content=b"not json").status_code == 400
        assert client.post("/api/scenarios", json={}).status_code == 400

    def test_post_missing_manifest_path(self, tmp_path):
        client = TestClient(create_app(ScenarioRegistry()))
        r = client.post("/api/scenarios", json={"manifest": str(tmp_path / "void.toml")})
        assert r.status_code == 422

    def test_concurrent_duplicate_posts_linearizable(self, tmp_path, http_store):
        manifest = write_store_csvs(http_store, tmp_path / "race")
        registry = ScenarioRegistry()
        app = create_app(registry)
        barrier = threading.Barrier(2)
        results = []

        def post():
            client = TestClient(app)
            barrier.wait()
            results.append(client.post("/api/scenarios", json={"manifest": str(manifest)}).status_code)

        threads = [threading.Thread(target=post) for _ in range(2)]
        for t in threads:
            t.start()
        for t in threads:
            t.join()
        assert sorted(results) == [200, 409]

    def test_reads_unaffected_by_registration(self, http_store, tmp_path):
        registry = ScenarioRegistry()
        registry.add(http_store)
        client = TestClient(create_app(registry))
        before = client.get("/api/scenarios/fix3/kpis").content
        other = write_store_csvs(build_http_store("other"), tmp_path / "other")
        assert client.post("/api/scenarios", json={"manifest": str(other)}).status_code == 200
        assert client.get("/api/scenarios/fix3/kpis").content == before
