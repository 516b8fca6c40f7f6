/**
 * Spatial scatter of consumers, color-coded by the selected metric.
 *
 * Plain coordinate projection (no tile server needed): longitude/latitude
 * are scaled into the viewport with a cos(latitude) aspect correction.
 * Supports click selection and an externally driven highlight set (the
 * charging-bar drill-down).
 */

import type { MapAgent } from "../api";

const SVG_NS = "http://www.w3.org/2000/svg";

export interface MapOptions {
  width?: number;
  height?: number;
  onSelect?: (agent: MapAgent) => void;
}

export class AgentMap {
  readonly svg: SVGSVGElement;
  private agents: MapAgent[] = [];
  private highlighted = new Set<string>();
  private selected: string | null = null;
  private publication = false;
  private readonly width: number;
  private readonly height: number;

  constructor(container: HTMLElement, private readonly options: MapOptions = {}) {
    this.width = options.width ?? 520;
    this.height = options.height ?? 420;
    this.svg = document.createElementNS(SVG_NS, "svg");
    this.svg.setAttribute("viewBox", `0 0 ${this.width} ${this.height}`);
    this.svg.setAttribute("class", "chart map");
    container.appendChild(this.svg);
  }

  setData(agents: MapAgent[]): void {
    this.agents = agents;
    this.render();
  }

  /** Highlight exactly this agent set (e.g. agents charging at time t). */
  setHighlight(agentIds: string[]): void {
    this.highlighted = new Set(agentIds);
    this.render();
  }

  highlightCount(): number {
    return this.svg.querySelectorAll("[data-highlighted='true']").length;
  }

  setSelected(agentId: string | null): void {
    this.selected = agentId;
    this.render();
  }

  setPublicationMode(on: boolean): void {
    this.publication = on;
    this.render();
  }

  exportSvg(): string {
    return `<?xml version="1.0" encoding="UTF-8"?>\n` + new XMLSerializer().serializeToString(this.svg);
  }

  private render(): void {
    this.svg.textContent = "";
    if (!this.agents.length) return;
    const pad = 26;
    const lats = this.agents.map((a) => a.latitude);
    const lons = this.agents.map((a) => a.longitude);
    const latMid = (Math.min(...lats) + Math.max(...lats)) / 2;
    const aspect = Math.cos((latMid * Math.PI) / 180);
    const lonSpan = Math.max(1e-9, Math.max(...lons) - Math.min(...lons)) * aspect;
    const latSpan = Math.max(1e-9, Math.max(...lats) - Math.min(...lats));
    const scale = Math.min((this.width - 2 * pad) / lonSpan, (this.height - 2 * pad) / latSpan);
    const x = (lon: number) => pad + (lon - Math.min(...lons)) * aspect * scale;
    const y = (lat: number) => this.height - pad - (lat - Math.min(...lats)) * scale;

    const values = this.agents.map((a) => a.value);
    const vMin = Math.min(...values);
    const vMax = Math.max(...values);
    const radius = this.publication ? 9 : 6;

    for (const agent of this.agents) {
      const frac = vMax > vMin ? (agent.value - vMin) / (vMax - vMin) : 0.5;
      const dot = document.createElementNS(SVG_NS, "circle");
      dot.setAttribute("cx", x(agent.longitude).toFixed(2));
      dot.setAttribute("cy", y(agent.latitude).toFixed(2));
      dot.setAttribute("r", String(this.highlighted.has(agent.agent_id) ? radius * 1.4 : radius));
      dot.setAttribute("fill", valueColor(frac));
      dot.setAttribute("stroke", this.strokeFor(agent.agent_id));
      dot.setAttribute("stroke-width", this.strokeWidthFor(agent.agent_id));
      dot.setAttribute("data-agent", agent.agent_id);
      dot.setAttribute("data-highlighted", String(this.highlighted.has(agent.agent_id)));
      dot.setAttribute("class", "map-dot");
      const title = document.createElementNS(SVG_NS, "title");
      title.textContent = `${agent.agent_id}: ${agent.value}`;
      dot.appendChild(title);
      dot.addEventListener("click", () => this.options.onSelect?.(agent));
      this.svg.appendChild(dot);
    }
  }

  private strokeFor(agentId: string): string {
    if (agentId === this.selected) return "#1a237e";
    if (this.highlighted.has(agentId)) return "#00c853";
    return "#555";
  }

  private strokeWidthFor(agentId: string): string {
    if (agentId === this.selected) return "3";
    if (this.highlighted.has(agentId)) return "2.5";
    return "0.8";
  }
}

/** blue -> yellow -> red value ramp */
export function valueColor(frac: number): string {
  const f = Math.min(1, Math.max(0, frac));
  const r = Math.round(40 + 215 * f);
  const g = Math.round(90 + 130 * (1 - Math.abs(f - 0.5) * 2));
  const b = Math.round(200 - 170 * f);
  return `rgb(${r},${g},${b})`;
}
