/**
 * Typed client for the gridlens JSON API.
 *
 * Every fetch family carries a request sequence number: when windows change
 * faster than responses arrive, stale responses resolve to null and are
 * dropped by the caller instead of overwriting newer data.
 */

export interface ScenarioInfo {
  id: string;
  agents: number;
  start: string;
  end: string;
  timezone: string;
}

export interface Bucket {
  t_start: string;
  min: number;
  max: number;
  mean: number;
  count: number;
}

export interface Series {
  variable: string;
  scope: string;
  from: string;
  to: string;
  buckets: Bucket[];
}

export interface PairedSeries {
  test: Series;
  ref: Series;
}

export interface KpiValues {
  overload_duration_hours: number;
  first_overload: string | null;
  load_factor: number | null;
  coincidence_factor: number | null;
  dissatisfaction_count: number;
  avg_charging_cost: number | null;
  avg_co2: number | null;
  dso_tariff_revenue: number;
  overload_class_minutes: Record<string, number>;
  critical_share: number | null;
}

export interface KpiReport {
  schema_version: number;
  scenario_id: string;
  kpis: KpiValues;
  reasons: Record<string, string>;
}

export interface KpiDiffEntry {
  test: unknown;
  ref: unknown;
  pct_diff: number | null;
  marker?: string;
}

export interface KpiDiffReport {
  schema_version: number;
  scenario_id: string;
  reference_id: string;
  kpis: Record<string, KpiDiffEntry>;
  reasons: { test: Record<string, string>; ref: Record<string, string> };
}

export interface HeatmapDay {
  local_date: string;
  agent_ids: string[];
  bin_starts: string[];
  bin_minutes: number[];
  matrix: number[][];
}

export interface EventBin {
  t_start: string;
  arrival_count: number;
  departure_count: number;
  arrival_agent_ids: string[];
  departure_agent_ids: string[];
}

export interface EventBins {
  bin_width_minutes: number;
  bins: EventBin[];
}

export interface ChargingAgent {
  agent_id: string;
  ev_load_kw: number;
}

export interface ChargingAt {
  at: string;
  agents: ChargingAgent[];
}

export interface MapAgent {
  agent_id: string;
  latitude: number;
  longitude: number;
  value: number;
}

export interface MapMetricResult {
  metric: string;
  from: string;
  to: string;
  stats: { sum: number; max: number; mean: number; min: number };
  agents: MapAgent[];
}

export interface EventMarker {
  timestamp: string;
  kind: "departure" | "arrival";
  soc_pct: number;
  trip_distance_km: number | null;
}

export interface AgentDetail {
  agent_id: string;
  charging: Series;
  baseload: Series;
  soc: Series;
  markers: EventMarker[];
  daily_distance_km: { local_date: string; km: number }[];
  dissatisfaction_days: string[];
}

export interface ApiError {
  code: string;
  message: string;
}

export class ApiFailure extends Error {
  constructor(public readonly error: ApiError, public readonly status: number) {
    super(`${error.code}: ${error.message}`);
  }
}

type ErrorListener = (failure: ApiFailure) => void;

export class ApiClient {
  private sequences = new Map<string, number>();
  private errorListeners: ErrorListener[] = [];

  constructor(private readonly base: string = "") {}

  onError(listener: ErrorListener): void {
    this.errorListeners.push(listener);
  }

  /**
   * GET a JSON document. `channel` groups requests that supersede each
   * other (e.g. the overview series chart); a response that is no longer
   * the channel's newest resolves to null.
   */
  async get<T>(path: string, params?: Record<string, string>, channel?: string): Promise<T | null> {
    let url = this.base + path;
    if (params && Object.keys(params).length > 0) {
      url += "?" + new URLSearchParams(params).toString();
    }
    let seq = 0;
    if (channel) {
      seq = (this.sequences.get(channel) ?? 0) + 1;
      this.sequences.set(channel, seq);
    }
    const response = await fetch(url);
    if (channel && this.sequences.get(channel) !== seq) {
      return null; // superseded while in flight
    }
    if (!response.ok) {
      let error: ApiError;
      try {
        error = (await response.json()) as ApiError;
      } catch {
        error = { code: `http_${response.status}`, message: response.statusText };
      }
      const failure = new ApiFailure(error, response.status);
      for (const listener of this.errorListeners) listener(failure);
      throw failure;
    }
    return (await response.json()) as T;
  }

  scenarios(): Promise<ScenarioInfo[] | null> {
    return this.get<ScenarioInfo[]>("/api/scenarios");
  }

  kpis(id: string): Promise<KpiReport | null> {
    return this.get<KpiReport>(`/api/scenarios/${id}/kpis`);
  }

  kpisVsRef(id: string, ref: string): Promise<KpiDiffReport | null> {
    return this.get<KpiDiffReport>(`/api/scenarios/${id}/kpis`, { ref });
  }

  series(
    id: string,
    variable: string,
    options: { scope?: string; from?: string; to?: string; buckets?: number; ref?: string } = {},
    channel?: string,
  ): Promise<Series | PairedSeries | null> {
    const params: Record<string, string> = { var: variable };
    if (options.scope) params.scope = options.scope;
    if (options.from) params.from = options.from;
    if (options.to) params.to = options.to;
    if (options.buckets) params.buckets = String(options.buckets);
    if (options.ref) params.ref = options.ref;
    return this.get(`/api/scenarios/${id}/series`, params, channel);
  }

  heatmap(id: string, date: string, bins?: number): Promise<HeatmapDay | null> {
    const params: Record<string, string> = { date };
    if (bins) params.bins = String(bins);
    return this.get<HeatmapDay>(`/api/scenarios/${id}/heatmap`, params, "heatmap");
  }

  events(id: string, binMinutes: number, from?: string, to?: string): Promise<EventBins | null> {
    const params: Record<string, string> = { bin: String(binMinutes) };
    if (from) params.from = from;
    if (to) params.to = to;
    return this.get<EventBins>(`/api/scenarios/${id}/events`, params, "events");
  }

  chargingAt(id: string, at: string): Promise<ChargingAt | null> {
    return this.get<ChargingAt>(`/api/scenarios/${id}/charging`, { at });
  }

  mapMetric(id: string, metric: string, from?: string, to?: string): Promise<MapMetricResult | null> {
    const params: Record<string, string> = { metric };
    if (from) params.from = from;
    if (to) params.to = to;
    return this.get<MapMetricResult>(`/api/scenarios/${id}/map`, params, "map");
  }

  agentDetail(id: string, agentId: string, buckets?: number): Promise<AgentDetail | null> {
    const params: Record<string, string> = {};
    if (buckets) params.buckets = String(buckets);
    return this.get<AgentDetail>(`/api/scenarios/${id}/agents/${agentId}`, params, "agent");
  }
}
