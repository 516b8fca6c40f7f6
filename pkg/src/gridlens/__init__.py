"""gridlens: post-simulation analytics for EV home-charging scenarios.

Ingests year-long, minute-resolution per-agent simulation CSVs into an
immutable columnar store, computes grid-impact KPIs (transformer overload
classification, load/coincidence factors, charging cost and CO2, DSO tariff
revenue, dissatisfaction events), serves drill-down chart queries over HTTP,
compares scenarios against a reference, and bundles a deterministic
synthetic scenario generator.
"""

__version__ = "0.1.0"

from .cache import read_cache, write_cache
from .compare import diff_kpis, overlay_series
from .errors import GridlensError
from .gen import GenConfig, generate
from .ingest import load_scenario
from .metrics import (
    OverloadCategory,
    classify_ratio,
    coincidence_factor,
    detect_dissatisfaction,
    kpi_report,
    load_factor,
    overload_analysis,
    total_load_series,
)
from .model import AgentMeta, ScenarioManifest, ScenarioStore, TimeIndex, load_manifest
from .query import (
    agent_detail,
    charging_agents_at,
    event_bins,
    heatmap_day,
    map_metric,
    series_window,
)

__all__ = [
    "__version__",
    "AgentMeta",
    "GenConfig",
    "GridlensError",
    "OverloadCategory",
    "ScenarioManifest",
    "ScenarioStore",
    "TimeIndex",
    "agent_detail",
    "charging_agents_at",
    "classify_ratio",
    "coincidence_factor",
    "detect_dissatisfaction",
    "diff_kpis",
    "event_bins",
    "generate",
    "heatmap_day",
    "kpi_report",
    "load_factor",
    "load_manifest",
    "load_scenario",
    "map_metric",
    "overlay_series",
    "overload_analysis",
    "read_cache",
    "series_window",
    "total_load_series",
    "write_cache",
]
