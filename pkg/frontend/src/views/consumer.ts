/**
 * Consumer Analysis: agent drill-down with charging schedule (departure and
 * arrival markers, optional reference overlay), baseload, daily driving
 * distance bars, and the SoC chart where every datapoint of a
 * dissatisfaction day carries a red cross.
 */

import { AgentDetail, ApiClient, PairedSeries } from "../api";
import { MarkerSpec, SeriesChart } from "../charts/core";
import { localDate } from "../format";
import { Store } from "../state";
import { exportButton, sectionHeader } from "./common";
import { seriesSpec } from "./overview";

export class ConsumerView {
  readonly el: HTMLElement;
  private input!: HTMLInputElement;
  private datalist!: HTMLDataListElement;
  private chargingChart!: SeriesChart;
  private baseloadChart!: SeriesChart;
  private distanceChart!: SeriesChart;
  private socChart!: SeriesChart;
  private timeZone = "Europe/Copenhagen";
  private lastDetail: AgentDetail | null = null;

  constructor(
    private readonly api: ApiClient,
    private readonly store: Store,
  ) {
    this.el = document.createElement("section");
    this.el.className = "view consumer";
    this.build();
  }

  private build(): void {
    const controls = document.createElement("div");
    controls.className = "consumer-controls";
    const label = document.createElement("label");
    label.textContent = "Agent id: ";
    this.input = document.createElement("input");
    this.input.setAttribute("list", "agent-ids");
    this.input.placeholder = "A001";
    this.datalist = document.createElement("datalist");
    this.datalist.id = "agent-ids";
    const go = document.createElement("button");
    go.textContent = "Load";
    go.addEventListener("click", () => {
      this.store.update({ agentId: this.input.value.trim() });
      void this.refresh(this.timeZone);
    });
    label.appendChild(this.input);
    controls.append(label, this.datalist, go);
    this.el.appendChild(controls);

    const make = (title: string, yLabel: string) => {
      const panel = document.createElement("div");
      panel.className = "panel";
      this.el.appendChild(panel);
      const header = sectionHeader(title);
      panel.appendChild(header);
      const chart = new SeriesChart(panel, { yLabel, timeZone: this.timeZone, height: 220 });
      header.appendChild(exportButton(() => chart.exportSvg(), `${title.toLowerCase().replace(/\s+/g, "-")}.svg`));
      return chart;
    };
    this.chargingChart = make("Charging schedule", "kW");
    this.baseloadChart = make("Baseload", "kW");
    this.distanceChart = make("Daily driving distance", "km");
    this.socChart = make("State of charge", "%");
  }

  setPublicationMode(on: boolean): void {
    for (const chart of [this.chargingChart, this.baseloadChart, this.distanceChart, this.socChart]) {
      chart.setPublicationMode(on);
    }
  }

  setAgentOptions(agentIds: string[]): void {
    this.datalist.textContent = "";
    for (const id of agentIds) {
      const opt = document.createElement("option");
      opt.value = id;
      this.datalist.appendChild(opt);
    }
  }

  detail(): AgentDetail | null {
    return this.lastDetail;
  }

  async refresh(timeZone: string): Promise<void> {
    this.timeZone = timeZone;
    const { scenarioId, agentId, referenceId } = this.store.get();
    if (!scenarioId || !agentId) return;
    this.input.value = agentId;

    const detail = await this.api.agentDetail(scenarioId, agentId, 1000);
    if (!detail) return;
    this.lastDetail = detail;

    const markers: MarkerSpec[] = detail.markers.map((m) => ({
      x: Date.parse(m.timestamp),
      glyph: m.kind === "departure" ? "triangle-up" : "triangle-down",
      color: m.kind === "departure" ? "#ef6c00" : "#2e7d32",
      label: `${m.kind} @ ${m.timestamp} (SoC ${m.soc_pct}%` +
        (m.trip_distance_km !== null ? `, ${m.trip_distance_km} km)` : ")"),
    }));

    const chargingSeries = [seriesSpec(detail.charging, "charging", "#ef6c00", "step")];
    if (referenceId) {
      const overlay = await this.api.series(
        scenarioId,
        "ev_load",
        { scope: agentId, buckets: 1000, ref: referenceId },
        "consumer-overlay",
      );
      if (overlay && "ref" in (overlay as PairedSeries)) {
        chargingSeries.push({
          ...seriesSpec((overlay as PairedSeries).ref, "reference", "#90a4ae", "step"),
          dashed: true,
        } as ReturnType<typeof seriesSpec> & { dashed: boolean });
      }
    }
    this.chargingChart.setData(chargingSeries, markers);
    this.baseloadChart.setData([seriesSpec(detail.baseload, "baseload", "#2e7d32", "step")]);

    this.distanceChart.setData([
      {
        label: "km/day",
        color: "#5e35b1",
        kind: "bar",
        points: detail.daily_distance_km.map((d) => ({
          x: Date.parse(d.local_date + "T12:00:00Z"),
          y: d.km,
        })),
      },
    ]);

    const flagged = new Set(detail.dissatisfaction_days);
    const socSpec = seriesSpec(detail.soc, "SoC", "#1565c0", "step");
    const crosses: MarkerSpec[] = [];
    for (const bucket of detail.soc.buckets) {
      if (flagged.has(localDate(bucket.t_start, this.timeZone))) {
        crosses.push({
          x: Date.parse(bucket.t_start),
          y: bucket.mean,
          glyph: "cross",
          color: "#d50000",
          label: `dissatisfaction day ${localDate(bucket.t_start, this.timeZone)}`,
        });
      }
    }
    this.socChart.setData([socSpec], crosses);
  }
}
