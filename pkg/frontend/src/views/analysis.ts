/**
 * System Analysis: charging-EV count, baseload, price breakdown and CO2
 * time series, the daily charging heatmap with a date picker, the
 * arrival/departure bars with hoverable agent-id lists, and the
 * loading-band distribution chart.
 */

import { ApiClient, EventBins, Series } from "../api";
import { CategoryBars, SeriesChart } from "../charts/core";
import { HeatmapChart } from "../charts/heatmap";
import { Store } from "../state";
import { exportButton, sectionHeader } from "./common";
import { seriesSpec } from "./overview";

const BAND_LABELS: Record<string, string> = {
  normal_cyclic: "normal cyclic",
  long_time_emergency: "long-time emergency",
  short_time_emergency: "short-time emergency",
  critical: "critical",
};
const BAND_COLORS = ["#fbc02d", "#f57c00", "#e64a19", "#b71c1c"];

export class AnalysisView {
  readonly el: HTMLElement;
  private chargingChart!: SeriesChart;
  private baseloadChart!: SeriesChart;
  private priceChart!: SeriesChart;
  private co2Chart!: SeriesChart;
  private heatmap!: HeatmapChart;
  private eventsChart!: SeriesChart;
  private bandChart!: CategoryBars;
  private datePicker!: HTMLInputElement;
  private binsSelect!: HTMLSelectElement;

  constructor(
    private readonly api: ApiClient,
    private readonly store: Store,
  ) {
    this.el = document.createElement("section");
    this.el.className = "view analysis";
    this.build();
  }

  private build(): void {
    const grid = document.createElement("div");
    grid.className = "chart-grid";
    this.el.appendChild(grid);

    const make = (title: string, options: ConstructorParameters<typeof SeriesChart>[1]) => {
      const panel = document.createElement("div");
      panel.className = "panel";
      grid.appendChild(panel);
      const header = sectionHeader(title);
      panel.appendChild(header);
      const chart = new SeriesChart(panel, { width: 560, height: 220, ...options });
      header.appendChild(exportButton(() => chart.exportSvg(), `${title.toLowerCase().replace(/\s+/g, "-")}.svg`));
      return chart;
    };

    this.chargingChart = make("Charging EVs", { yLabel: "EVs" });
    this.baseloadChart = make("Baseload", { yLabel: "kW" });
    this.priceChart = make("Price breakdown", { yLabel: "DKK/kWh" });
    this.co2Chart = make("CO2 intensity", { yLabel: "kg/kWh" });

    const heatPanel = document.createElement("div");
    heatPanel.className = "panel";
    this.el.appendChild(heatPanel);
    const heatHeader = sectionHeader("Daily charging heatmap");
    heatPanel.appendChild(heatHeader);
    this.datePicker = document.createElement("input");
    this.datePicker.type = "date";
    this.datePicker.addEventListener("change", () => void this.refreshHeatmap());
    heatHeader.appendChild(this.datePicker);
    this.binsSelect = document.createElement("select");
    for (const [label, value] of [["5 min", "288"], ["1 min", "1440"], ["15 min", "96"], ["1 h", "24"]]) {
      const opt = document.createElement("option");
      opt.value = value;
      opt.textContent = label;
      this.binsSelect.appendChild(opt);
    }
    this.binsSelect.addEventListener("change", () => void this.refreshHeatmap());
    heatHeader.appendChild(this.binsSelect);
    this.heatmap = new HeatmapChart(heatPanel);
    heatHeader.appendChild(exportButton(() => this.heatmap.exportSvg(), "heatmap.svg"));

    const eventsPanel = document.createElement("div");
    eventsPanel.className = "panel";
    this.el.appendChild(eventsPanel);
    const eventsHeader = sectionHeader("Arrivals and departures");
    eventsPanel.appendChild(eventsHeader);
    this.eventsChart = new SeriesChart(eventsPanel, { yLabel: "events/bin" });
    eventsHeader.appendChild(exportButton(() => this.eventsChart.exportSvg(), "arrivals-departures.svg"));

    const bandPanel = document.createElement("div");
    bandPanel.className = "panel";
    this.el.appendChild(bandPanel);
    const bandHeader = sectionHeader("Transformer loading bands");
    bandPanel.appendChild(bandHeader);
    this.bandChart = new CategoryBars(bandPanel, "overloaded minutes", 560, 240);
    bandHeader.appendChild(exportButton(() => this.bandChart.exportSvg(), "loading-bands.svg"));
  }

  setPublicationMode(on: boolean): void {
    for (const chart of [this.chargingChart, this.baseloadChart, this.priceChart, this.co2Chart, this.eventsChart]) {
      chart.setPublicationMode(on);
    }
    this.heatmap.setPublicationMode(on);
    this.bandChart.setPublicationMode(on);
  }

  async refresh(_timeZone: string, scenarioStart: string): Promise<void> {
    const id = this.store.get().scenarioId;
    if (!id) return;
    if (!this.datePicker.value) {
      this.datePicker.value = scenarioStart.slice(0, 10);
    }
    await Promise.all([
      this.refreshSeries(id),
      this.refreshHeatmap(),
      this.refreshEvents(id),
      this.refreshBands(id),
    ]);
  }

  private async refreshSeries(id: string): Promise<void> {
    const buckets = 500;
    const [charging, baseload, spot, tariff, total, co2] = await Promise.all([
      this.api.series(id, "charging_ev_count", { buckets }, "an-charging"),
      this.api.series(id, "baseload", { buckets }, "an-base"),
      this.api.series(id, "spot_price", { buckets }, "an-spot"),
      this.api.series(id, "dso_tariff", { buckets }, "an-tariff"),
      this.api.series(id, "total_price", { buckets }, "an-total-price"),
      this.api.series(id, "co2", { buckets }, "an-co2"),
    ]);
    if (!charging || !baseload || !spot || !tariff || !total || !co2) return;
    this.chargingChart.setData([seriesSpec(charging as Series, "charging EVs", "#8d6e63", "step")]);
    this.baseloadChart.setData([seriesSpec(baseload as Series, "baseload", "#2e7d32", "line")]);
    this.priceChart.setData([
      seriesSpec(spot as Series, "spot", "#1565c0", "line"),
      seriesSpec(tariff as Series, "DSO tariff", "#6a1b9a", "step"),
      seriesSpec(total as Series, "total", "#c62828", "line"),
    ]);
    this.co2Chart.setData([seriesSpec(co2 as Series, "CO2", "#00695c", "line")]);
  }

  private async refreshHeatmap(): Promise<void> {
    const id = this.store.get().scenarioId;
    if (!id || !this.datePicker.value) return;
    const data = await this.api.heatmap(id, this.datePicker.value, Number(this.binsSelect.value));
    if (data) this.heatmap.setData(data);
  }

  private async refreshEvents(id: string): Promise<void> {
    const bins = await this.api.events(id, 60);
    if (!bins) return;
    this.eventsChart.setData(eventSeries(bins));
  }

  private async refreshBands(id: string): Promise<void> {
    const report = await this.api.kpis(id);
    if (!report) return;
    const classes = report.kpis.overload_class_minutes;
    const keys = Object.keys(BAND_LABELS);
    this.bandChart.setData(
      keys.map((k) => BAND_LABELS[k]),
      keys.map((k) => classes[k]),
      BAND_COLORS,
    );
  }
}

/** Arrival/departure bars, nudged half a bin apart, with agent-id hover lists. */
export function eventSeries(bins: EventBins) {
  const offset = (bins.bin_width_minutes * 60 * 1000) / 4;
  return [
    {
      label: "arrivals",
      color: "#2e7d32",
      kind: "bar" as const,
      points: bins.bins.map((b) => ({ x: Date.parse(b.t_start) - offset, y: b.arrival_count })),
      titles: bins.bins.map((b) => b.arrival_agent_ids.join(", ")),
    },
    {
      label: "departures",
      color: "#c62828",
      kind: "bar" as const,
      points: bins.bins.map((b) => ({ x: Date.parse(b.t_start) + offset, y: b.departure_count })),
      titles: bins.bins.map((b) => b.departure_agent_ids.join(", ")),
    },
  ];
}
