"""HTTP/JSON API over a registry of immutable scenario stores.

Routes are pure functions of (store, params); repeated identical GETs return
byte-identical bodies, with a strong ETag derived from the store content
digest. Registration is linearizable: duplicate POSTs race to a single
reservation under a lock, and ingestion itself runs outside the lock so
reads of already-registered scenarios never block.
"""

from __future__ import annotations

import threading
from datetime import datetime, timezone
from pathlib import Path
from typing import Optional

from starlette.applications import Starlette
from starlette.requests import Request
from starlette.responses import Response
from starlette.routing import Mount, Route
from starlette.staticfiles import StaticFiles

from . import compare, jsonio, metrics, query
from .cache import read_cache
from .errors import (
    BadBucketCount,
    DateOutOfRange,
    DuplicateScenario,
    EmptyWindow,
    GridlensError,
    MissingFile,
    OffGridTimestamp,
    UnknownAgent,
    UnknownMetric,
    UnknownVariable,
    WindowMismatch,
)
from .ingest import load_scenario
from .model import ScenarioStore, load_manifest

MAX_BUCKETS_PER_REQUEST = 10_000

_STATUS = {
    UnknownAgent: 404,
    UnknownVariable: 400,
    UnknownMetric: 400,
    BadBucketCount: 400,
    OffGridTimestamp: 400,
    EmptyWindow: 422,
    DateOutOfRange: 422,
    WindowMismatch: 422,
    DuplicateScenario: 409,
    MissingFile: 422,
}


class ApiError(Exception):
    def __init__(self, status: int, code: str, message: str):
        super().__init__(message)
        self.status = status
        self.code = code
        self.message = message


class ScenarioRegistry:
    """Thread-safe map scenario_id -> immutable store."""

    def __init__(self):
        self._stores: dict[str, ScenarioStore] = {}
        self._pending: set[str] = set()
        self._lock = threading.Lock()
        self.default_reference_id: Optional[str] = None

    def ids(self) -> list[str]:
        with self._lock:
            return sorted(self._stores)

    def get(self, scenario_id: str) -> Optional[ScenarioStore]:
        with self._lock:
            return self._stores.get(scenario_id)

    def add(self, store: ScenarioStore) -> str:
        scenario_id = store.manifest.scenario_id
        self._reserve(scenario_id)
        self._commit(scenario_id, store)
        return scenario_id

    def load_and_add(self, path: str | Path) -> str:
        """Register the scenario at ``path`` (manifest .toml or cache file).

        The id is reserved first so concurrent duplicate registrations fail
        fast with exactly one winner.
        """
        path = Path(path)
        if path.suffix == ".toml":
            manifest = load_manifest(path)
            scenario_id = manifest.scenario_id
            self._reserve(scenario_id)
            try:
                store = load_scenario(manifest)
            except BaseException:
                self._abort(scenario_id)
                raise
            self._commit(scenario_id, store)
        else:
            store = read_cache(path)
            scenario_id = self.add(store)
        return scenario_id

    def _reserve(self, scenario_id: str) -> None:
        with self._lock:
            if scenario_id in self._stores or scenario_id in self._pending:
                raise DuplicateScenario(f"scenario {scenario_id!r} is already registered")
            self._pending.add(scenario_id)

    def _commit(self, scenario_id: str, store: ScenarioStore) -> None:
        with self._lock:
            self._pending.discard(scenario_id)
            self._stores[scenario_id] = store

    def _abort(self, scenario_id: str) -> None:
        with self._lock:
            self._pending.discard(scenario_id)


# -- request helpers ---------------------------------------------------------


def _json_response(doc, status: int = 200, etag: Optional[str] = None) -> Response:
    headers = {}
    if etag:
        headers["ETag"] = etag
    return Response(
        jsonio.dumps(doc),
        status_code=status,
        media_type="application/json",
        headers=headers,
    )


def _error(status: int, code: str, message: str) -> Response:
    return _json_response({"code": code, "message": message}, status=status)


def _store_or_404(registry: ScenarioRegistry, scenario_id: str) -> ScenarioStore:
    store = registry.get(scenario_id)
    if store is None:
        raise ApiError(404, "unknown_scenario", f"scenario {scenario_id!r} is not registered")
    return store


def _parse_instant(raw: str, param: str) -> datetime:
    try:
        t = datetime.fromisoformat(raw.replace("Z", "+00:00"))
    except ValueError:
        raise ApiError(400, "bad_param", f"{param}: not an ISO-8601 timestamp: {raw!r}")
    if t.tzinfo is None:
        raise ApiError(400, "bad_param", f"{param}: timestamp must carry a UTC offset: {raw!r}")
    return t


def _window_params(request: Request, store: ScenarioStore) -> tuple[datetime, datetime]:
    q = request.query_params
    start = _parse_instant(q["from"], "from") if "from" in q else store.time_index.start
    end = _parse_instant(q["to"], "to") if "to" in q else store.time_index.end
    return start, end


def _int_param(request: Request, name: str, default: Optional[int]) -> Optional[int]:
    raw = request.query_params.get(name)
    if raw is None:
        return default
    try:
        return int(raw)
    except ValueError:
        raise ApiError(400, "bad_param", f"{name}: not an integer: {raw!r}")


def _bucket_param(request: Request, name: str = "buckets") -> Optional[int]:
    buckets = _int_param(request, name, None)
    if buckets is not None and buckets > MAX_BUCKETS_PER_REQUEST:
        raise ApiError(
            400, "bad_param", f"{name}: {buckets} exceeds the per-request cap of {MAX_BUCKETS_PER_REQUEST}"
        )
    return buckets


def _ref_store(request: Request, registry: ScenarioRegistry) -> Optional[ScenarioStore]:
    ref_id = request.query_params.get("ref") or registry.default_reference_id
    if "ref" in request.query_params and not request.query_params["ref"]:
        ref_id = None
    if ref_id is None:
        return None
    return _store_or_404(registry, ref_id)


# -- app ----------------------------------------------------------------------


def create_app(registry: ScenarioRegistry, static_dir: Optional[Path] = None) -> Starlette:
    def handler(fn):
        async def wrapped(request: Request) -> Response:
            try:
                return fn(request)
            except ApiError as exc:
                return _error(exc.status, exc.code, exc.message)
            except GridlensError as exc:
                status = _STATUS.get(type(exc), 400)
                return _error(status, exc.code, str(exc))

        return wrapped

    def list_scenarios(request: Request) -> Response:
        doc = []
        for scenario_id in registry.ids():
            store = registry.get(scenario_id)
            doc.append(
                {
                    "id": scenario_id,
                    "agents": store.n_agents,
                    "start": store.time_index.start,
                    "end": store.time_index.end,
                    "timezone": store.manifest.timezone_name,
                }
            )
        return _json_response(doc)

    async def register_scenario(request: Request) -> Response:
        try:
            body = await request.json()
        except Exception:
            return _error(400, "bad_param", "request body must be a JSON object")
        path = body.get("manifest") or body.get("cache")
        if not isinstance(path, str) or not path:
            return _error(400, "bad_param", "body requires a 'manifest' or 'cache' path")
        try:
            scenario_id = registry.load_and_add(path)
        except GridlensError as exc:
            status = _STATUS.get(type(exc), 422)
            return _error(status, exc.code, str(exc))
        if body.get("reference"):
            registry.default_reference_id = scenario_id
        return _json_response({"id": scenario_id})

    def kpis(request: Request) -> Response:
        store = _store_or_404(registry, request.path_params["scenario_id"])
        report = metrics.kpi_report(store)
        ref = _ref_store(request, registry)
        if ref is None:
            doc = jsonio.kpi_report_doc(report)
        else:
            ref_report = metrics.kpi_report(ref)
            doc = jsonio.diff_report_doc(report, ref_report, compare.diff_kpis(report, ref_report))
        return _json_response(doc, etag=f'"{store.content_digest()}"')

    def series(request: Request) -> Response:
        store = _store_or_404(registry, request.path_params["scenario_id"])
        var = request.query_params.get("var")
        if not var:
            raise ApiError(400, "bad_param", "missing required parameter 'var'")
        scope = request.query_params.get("scope", query.AGGREGATE)
        start, end = _window_params(request, store)
        buckets = _bucket_param(request)
        ref = _ref_store(request, registry)
        if ref is None:
            doc = jsonio.series_doc(query.series_window(store, var, scope, start, end, buckets))
        else:
            n = store.time_index.clip_window(start, end)
            b = buckets if buckets is not None else min(1000, max(1, n[1] - n[0]))
            pair = compare.overlay_series(store, ref, var, scope, start, end, b)
            doc = {"test": jsonio.series_doc(pair.test), "ref": jsonio.series_doc(pair.ref)}
        return _json_response(doc, etag=f'"{store.content_digest()}"')

    def heatmap(request: Request) -> Response:
        store = _store_or_404(registry, request.path_params["scenario_id"])
        raw = request.query_params.get("date")
        if not raw:
            raise ApiError(400, "bad_param", "missing required parameter 'date'")
        try:
            day = datetime.strptime(raw, "%Y-%m-%d").date()
        except ValueError:
            raise ApiError(400, "bad_param", f"date: not a YYYY-MM-DD date: {raw!r}")
        bins = _bucket_param(request, "bins")
        doc = jsonio.heatmap_doc(query.heatmap_day(store, day, bins))
        return _json_response(doc, etag=f'"{store.content_digest()}"')

    def events(request: Request) -> Response:
        store = _store_or_404(registry, request.path_params["scenario_id"])
        start, end = _window_params(request, store)
        width = _int_param(request, "bin", 60)
        doc = jsonio.event_bins_doc(query.event_bins(store, start, end, width))
        return _json_response(doc, etag=f'"{store.content_digest()}"')

    def charging(request: Request) -> Response:
        store = _store_or_404(registry, request.path_params["scenario_id"])
        raw = request.query_params.get("at")
        if not raw:
            raise ApiError(400, "bad_param", "missing required parameter 'at'")
        t = _parse_instant(raw, "at")
        ti = store.time_index
        if not ti.start <= t.astimezone(timezone.utc) < ti.end:
            raise ApiError(422, "empty_window", f"at: {raw} is outside the scenario range")
        doc = {"at": t, "agents": query.charging_agents_at(store, t)}
        return _json_response(doc, etag=f'"{store.content_digest()}"')

    def map_metric(request: Request) -> Response:
        store = _store_or_404(registry, request.path_params["scenario_id"])
        metric = request.query_params.get("metric")
        if not metric:
            raise ApiError(400, "bad_param", "missing required parameter 'metric'")
        start, end = _window_params(request, store)
        doc = jsonio.map_metric_doc(query.map_metric(store, metric, start, end), store)
        return _json_response(doc, etag=f'"{store.content_digest()}"')

    def agent_detail(request: Request) -> Response:
        store = _store_or_404(registry, request.path_params["scenario_id"])
        agent_id = request.path_params["agent_id"]
        start, end = _window_params(request, store)
        buckets = _bucket_param(request)
        detail = query.agent_detail(store, agent_id, start, end, buckets)
        doc = jsonio.agent_detail_doc(detail)
        return _json_response(doc, etag=f'"{store.content_digest()}"')

    routes = [
        Route("/api/scenarios", handler(list_scenarios), methods=["GET"]),
        Route("/api/scenarios", register_scenario, methods=["POST"]),
        Route("/api/scenarios/{scenario_id}/kpis", handler(kpis)),
        Route("/api/scenarios/{scenario_id}/series", handler(series)),
        Route("/api/scenarios/{scenario_id}/heatmap", handler(heatmap)),
        Route("/api/scenarios/{scenario_id}/events", handler(events)),
        Route("/api/scenarios/{scenario_id}/charging", handler(charging)),
        Route("/api/scenarios/{scenario_id}/map", handler(map_metric)),
        Route("/api/scenarios/{scenario_id}/agents/{agent_id}", handler(agent_detail)),
    ]
    if static_dir is not None and Path(static_dir).is_dir():
        routes.append(Mount("/", app=StaticFiles(directory=static_dir, html=True)))
    return Starlette(routes=routes)


def serve(
    registry: ScenarioRegistry,
    host: str,
    port: int,
    static_dir: Optional[Path] = None,
) -> None:
    import uvicorn

    uvicorn.run(create_app(registry, static_dir), host=host, port=port, log_level="warning")
