/**
 * System Overview: KPI cards (with percentage-diff badges against the
 * reference), the consumer map with selection statistics, the transformer
 * load chart with the capacity threshold, and the combined load / price /
 * charging-count chart whose bars drill down to the map.
 */

import {
  ApiClient,
  KpiDiffEntry,
  KpiReport,
  KpiDiffReport,
  MapAgent,
  PairedSeries,
  Series,
} from "../api";
import { SeriesChart } from "../charts/core";
import { AgentMap } from "../charts/map";
import { fmtDiffBadge, fmtNumber } from "../format";
import { Store } from "../state";
import { exportButton, sectionHeader } from "./common";

export const KPI_CARDS: { key: string; label: string; unit: string }[] = [
  { key: "overload_duration_hours", label: "Overload duration", unit: "h" },
  { key: "first_overload", label: "First overload", unit: "" },
  { key: "load_factor", label: "Load factor", unit: "" },
  { key: "coincidence_factor", label: "Coincidence factor", unit: "" },
  { key: "dissatisfaction_count", label: "Dissatisfaction events", unit: "" },
  { key: "avg_charging_cost", label: "Avg charging cost", unit: "DKK/kWh" },
  { key: "avg_co2", label: "Avg CO2", unit: "kg/kWh" },
  { key: "dso_tariff_revenue", label: "DSO tariff revenue", unit: "DKK" },
];

export const MAP_METRICS = [
  "total_expenses_dkk",
  "ev_energy_kwh",
  "dissatisfaction_count",
  "peak_load_kw",
  "avg_daily_distance_km",
];

export class OverviewView {
  readonly el: HTMLElement;
  private cards!: HTMLElement;
  private statsLine!: HTMLElement;
  private detailTable!: HTMLElement;
  private map!: AgentMap;
  private loadChart!: SeriesChart;
  private combinedChart!: SeriesChart;
  private timeZone = "Europe/Copenhagen";

  constructor(
    private readonly api: ApiClient,
    private readonly store: Store,
  ) {
    this.el = document.createElement("section");
    this.el.className = "view overview";
    this.build();
  }

  private build(): void {
    this.cards = document.createElement("div");
    this.cards.className = "kpi-cards";
    this.el.appendChild(this.cards);

    const row = document.createElement("div");
    row.className = "row";
    this.el.appendChild(row);

    const mapPanel = document.createElement("div");
    mapPanel.className = "panel";
    row.appendChild(mapPanel);
    const mapHeader = sectionHeader("Consumer map");
    mapPanel.appendChild(mapHeader);
    const metricSelect = document.createElement("select");
    metricSelect.className = "map-metric";
    for (const metric of MAP_METRICS) {
      const opt = document.createElement("option");
      opt.value = metric;
      opt.textContent = metric;
      metricSelect.appendChild(opt);
    }
    metricSelect.addEventListener("change", () => {
      this.store.update({ mapMetric: metricSelect.value });
      void this.refreshMap();
    });
    mapHeader.appendChild(metricSelect);
    this.statsLine = document.createElement("div");
    this.statsLine.className = "stats-line";
    mapPanel.appendChild(this.statsLine);
    this.map = new AgentMap(mapPanel, {
      onSelect: (agent) => this.showAgentDetail(agent),
    });
    mapHeader.appendChild(exportButton(() => this.map.exportSvg(), "map.svg"));
    this.detailTable = document.createElement("div");
    this.detailTable.className = "agent-detail-table";
    mapPanel.appendChild(this.detailTable);

    const chartsPanel = document.createElement("div");
    chartsPanel.className = "panel grow";
    row.appendChild(chartsPanel);

    const loadHeader = sectionHeader("Transformer load");
    chartsPanel.appendChild(loadHeader);
    this.loadChart = new SeriesChart(chartsPanel, {
      yLabel: "kW",
      threshold: { value: 0, label: "capacity" },
      timeZone: this.timeZone,
    });
    loadHeader.appendChild(exportButton(() => this.loadChart.exportSvg(), "transformer-load.svg"));

    const combinedHeader = sectionHeader("Load, price and charging EVs");
    chartsPanel.appendChild(combinedHeader);
    this.combinedChart = new SeriesChart(chartsPanel, {
      yLabel: "kW / EVs",
      yLabelRight: "DKK/kWh",
      timeZone: this.timeZone,
      onBarClick: (point) => void this.drillDownCharging(point.x),
    });
    combinedHeader.appendChild(
      exportButton(() => this.combinedChart.exportSvg(), "load-price-charging.svg"),
    );
  }

  setPublicationMode(on: boolean): void {
    this.loadChart.setPublicationMode(on);
    this.combinedChart.setPublicationMode(on);
    this.map.setPublicationMode(on);
  }

  async refresh(timeZone: string): Promise<void> {
    this.timeZone = timeZone;
    await Promise.all([this.refreshKpis(), this.refreshMap(), this.refreshCharts()]);
  }

  private scenario(): string | null {
    return this.store.get().scenarioId;
  }

  async refreshKpis(): Promise<void> {
    const id = this.scenario();
    if (!id) return;
    const ref = this.store.get().referenceId;
    this.cards.textContent = "";
    if (ref) {
      const doc = await this.api.kpisVsRef(id, ref);
      if (!doc) return;
      for (const card of KPI_CARDS) {
        this.cards.appendChild(renderDiffCard(card, doc.kpis[card.key], doc.reasons.test[card.key]));
      }
    } else {
      const doc = await this.api.kpis(id);
      if (!doc) return;
      for (const card of KPI_CARDS) {
        const value = (doc.kpis as unknown as Record<string, unknown>)[card.key];
        this.cards.appendChild(renderCard(card, value, doc.reasons[card.key]));
      }
    }
  }

  private async refreshMap(): Promise<void> {
    const id = this.scenario();
    if (!id) return;
    const metric = this.store.get().mapMetric;
    const result = await this.api.mapMetric(id, metric);
    if (!result) return;
    this.map.setData(result.agents);
    const s = result.stats;
    this.statsLine.textContent =
      `Statistics on selection: Sum: ${fmtNumber(s.sum)} | Max: ${fmtNumber(s.max)} | ` +
      `Mean: ${fmtNumber(s.mean)} | Min: ${fmtNumber(s.min)}`;
  }

  private async refreshCharts(): Promise<void> {
    const id = this.scenario();
    if (!id) return;
    const ref = this.store.get().referenceId ?? undefined;
    const buckets = 600;

    const [total, capacity, baseload, ev, price, charging] = await Promise.all([
      this.api.series(id, "total_load", { buckets, ref }, "ov-total"),
      this.api.series(id, "transformer_capacity", { buckets: 1 }, "ov-cap"),
      this.api.series(id, "baseload", { buckets }, "ov-base"),
      this.api.series(id, "ev_load", { buckets }, "ov-ev"),
      this.api.series(id, "total_price", { buckets }, "ov-price"),
      this.api.series(id, "charging_ev_count", { buckets: 240 }, "ov-charging"),
    ]);
    if (!total || !capacity || !baseload || !ev || !price || !charging) return;

    const capValue = (capacity as Series).buckets[0].max;
    this.loadChart.setThreshold(capValue, `capacity ${fmtNumber(capValue)} kW`);
    const loadSeries = [];
    let totalSeries: Series;
    if (ref && "test" in (total as PairedSeries)) {
      const pair = total as PairedSeries;
      totalSeries = pair.test;
      loadSeries.push(seriesSpec(pair.test, "total load", "#1565c0", "line"));
      loadSeries.push({ ...seriesSpec(pair.ref, "reference", "#90a4ae", "line"), dashed: true });
    } else {
      totalSeries = total as Series;
      loadSeries.push(seriesSpec(totalSeries, "total load", "#1565c0", "line"));
    }
    this.loadChart.setData(loadSeries);

    this.combinedChart.setData([
      seriesSpec(charging as Series, "charging EVs", "#8d6e63", "bar"),
      seriesSpec(baseload as Series, "baseload", "#2e7d32", "line"),
      seriesSpec(ev as Series, "EV load", "#ef6c00", "line"),
      seriesSpec(totalSeries, "total", "#1565c0", "line"),
      { ...seriesSpec(price as Series, "price", "#6a1b9a", "line"), axis: "right" as const },
    ]);
  }

  /** Clicking a charging-count bar highlights those consumers on the map. */
  async drillDownCharging(xMs: number): Promise<void> {
    const id = this.scenario();
    if (!id) return;
    const at = new Date(xMs).toISOString().replace(".000Z", "+00:00");
    const result = await this.api.chargingAt(id, at);
    if (!result) return;
    this.map.setHighlight(result.agents.map((a) => a.agent_id));
    this.detailTable.textContent = "";
    const note = document.createElement("div");
    note.className = "drill-note";
    note.textContent = `${result.agents.length} charging at ${at}`;
    this.detailTable.appendChild(note);
  }

  private showAgentDetail(agent: MapAgent): void {
    this.map.setSelected(agent.agent_id);
    this.detailTable.textContent = "";
    const table = document.createElement("table");
    for (const [label, value] of [
      ["agent", agent.agent_id],
      ["latitude", String(agent.latitude)],
      ["longitude", String(agent.longitude)],
      ["value", String(agent.value)],
    ]) {
      const tr = document.createElement("tr");
      const th = document.createElement("th");
      th.textContent = label;
      const td = document.createElement("td");
      td.textContent = value;
      tr.append(th, td);
      table.appendChild(tr);
    }
    this.detailTable.appendChild(table);
    const open = document.createElement("button");
    open.className = "open-consumer";
    open.textContent = "Open in Consumer Analysis";
    open.addEventListener("click", () => {
      this.store.update({ page: "consumer", agentId: agent.agent_id });
    });
    this.detailTable.appendChild(open);
  }
}

export function seriesSpec(
  series: Series,
  label: string,
  color: string,
  kind: "line" | "step" | "bar",
) {
  return {
    label,
    color,
    kind,
    points: series.buckets.map((b) => ({ x: Date.parse(b.t_start), y: b.mean })),
  };
}

function renderCard(
  card: { key: string; label: string; unit: string },
  value: unknown,
  reason?: string,
): HTMLElement {
  const el = document.createElement("div");
  el.className = "kpi-card";
  el.setAttribute("data-kpi", card.key);
  const label = document.createElement("div");
  label.className = "kpi-label";
  label.textContent = card.label;
  const val = document.createElement("div");
  val.className = "kpi-value";
  val.textContent = displayValue(value, card.unit, reason);
  el.append(label, val);
  return el;
}

function renderDiffCard(
  card: { key: string; label: string; unit: string },
  diff: KpiDiffEntry | undefined,
  reason?: string,
): HTMLElement {
  const el = renderCard(card, diff?.test ?? null, reason);
  const badge = document.createElement("span");
  badge.className = "diff-badge";
  badge.textContent = diff ? fmtDiffBadge(diff.pct_diff, diff.marker) : "n/a";
  if (diff?.pct_diff !== null && diff?.pct_diff !== undefined) {
    badge.classList.add(diff.pct_diff > 0 ? "up" : diff.pct_diff < 0 ? "down" : "flat");
  }
  el.appendChild(badge);
  return el;
}

function displayValue(value: unknown, unit: string, reason?: string): string {
  if (value === null || value === undefined) {
    return reason ? `undefined (${reason})` : "undefined";
  }
  if (typeof value === "number") {
    return unit ? `${fmtNumber(value)} ${unit}` : fmtNumber(value);
  }
  return String(value);
}

export type { KpiReport, KpiDiffReport };
