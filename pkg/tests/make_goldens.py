"""Regenerate the committed HTTP golden response bodies.

Run after an intentional wire-format change, then review the diff:

    python tests/make_goldens.py
"""

from __future__ import annotations

from starlette.testclient import TestClient

from gridlens.server import ScenarioRegistry, create_app

from fixtures import build_http_store
from test_server import GOLDEN_CASES, GOLDEN_DIR


def main() -> None:
    registry = ScenarioRegistry()
    registry.add(build_http_store())
    client = TestClient(create_app(registry))
    GOLDEN_DIR.mkdir(parents=True, exist_ok=True)
    for name, url in GOLDEN_CASES:
        response = client.get(url)
        (GOLDEN_DIR / f"{name}.json").write_bytes(response.content)
        print(f"{name}: {response.status_code} {len(response.content)} bytes")


if __name__ == "__main__":
    main()
