"""Record real server responses for the UI test suite.

Spins the backend in-process against the deterministic 3-agent fixture
scenario and captures every route the dashboard touches into
tests/fixtures/, plus a routes.json manifest mapping normalized URLs to
files. Rerun after a backend wire-format change:

    cd frontend && python scripts/record_fixtures.py
"""

from __future__ import annotations

import json
import sys
from pathlib import Path
from urllib.parse import urlsplit, parse_qsl

HERE = Path(__file__).resolve().parent
REPO = HERE.parent.parent
sys.path.insert(0, str(REPO / "tests"))

from starlette.testclient import TestClient  # noqa: E402

from gridlens.server import ScenarioRegistry, create_app  # noqa: E402
from fixtures import build_http_store  # noqa: E402

ROUTES = [
    "/api/scenarios",
    "/api/scenarios/fix3/kpis",
    "/api/scenarios/fix3/kpis?ref=fix3",
    "/api/scenarios/fix3/series?var=total_load&buckets=600",
    "/api/scenarios/fix3/series?var=total_load&buckets=600&ref=fix3",
    "/api/scenarios/fix3/series?var=transformer_capacity&buckets=1",
    "/api/scenarios/fix3/series?var=baseload&buckets=600",
    "/api/scenarios/fix3/series?var=ev_load&buckets=600",
    "/api/scenarios/fix3/series?var=total_price&buckets=600",
    "/api/scenarios/fix3/series?var=charging_ev_count&buckets=240",
    "/api/scenarios/fix3/series?var=charging_ev_count&buckets=500",
    "/api/scenarios/fix3/series?var=baseload&buckets=500",
    "/api/scenarios/fix3/series?var=spot_price&buckets=500",
    "/api/scenarios/fix3/series?var=dso_tariff&buckets=500",
    "/api/scenarios/fix3/series?var=total_price&buckets=500",
    "/api/scenarios/fix3/series?var=co2&buckets=500",
    "/api/scenarios/fix3/series?var=ev_load&scope=A001&buckets=1000&ref=fix3",
    "/api/scenarios/fix3/heatmap?date=2025-06-10&bins=288",
    "/api/scenarios/fix3/heatmap?date=2025-06-10&bins=24",
    "/api/scenarios/fix3/events?bin=60",
    "/api/scenarios/fix3/charging?at=2025-06-09T23:30:00%2B00:00",
    "/api/scenarios/fix3/map?metric=total_expenses_dkk",
    "/api/scenarios/fix3/map?metric=ev_energy_kwh",
    "/api/scenarios/fix3/agents/A001?buckets=1000",
]


def normalize(url: str) -> str:
    parts = urlsplit(url)
    params = sorted(parse_qsl(parts.query))
    query = "&".join(f"{k}={v}" for k, v in params)
    return parts.path + ("?" + query if query else "")


def main() -> None:
    registry = ScenarioRegistry()
    registry.add(build_http_store())
    client = TestClient(create_app(registry))
    out_dir = HERE.parent / "tests" / "fixtures"
    out_dir.mkdir(parents=True, exist_ok=True)

    manifest = {}
    for i, url in enumerate(ROUTES):
        response = client.get(url)
        assert response.status_code == 200, (url, response.status_code, response.text)
        name = f"r{i:02d}.json"
        (out_dir / name).write_bytes(response.content)
        manifest[normalize(url)] = name
        print(f"{name}  {url}")
    (out_dir / "routes.json").write_text(json.dumps(manifest, indent=2) + "\n")


if __name__ == "__main__":
    main()
