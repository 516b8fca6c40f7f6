/** Per-agent daily charging heatmap rendered as SVG cells. */

import type { HeatmapDay } from "../api";

const SVG_NS = "http://www.w3.org/2000/svg";

export interface HeatmapOptions {
  width?: number;
  height?: number;
}

export class HeatmapChart {
  readonly svg: SVGSVGElement;
  private publication = false;
  private data: HeatmapDay | null = null;
  private readonly width: number;
  private readonly height: number;

  constructor(container: HTMLElement, options: HeatmapOptions = {}) {
    this.width = options.width ?? 860;
    this.height = options.height ?? 420;
    this.svg = document.createElementNS(SVG_NS, "svg");
    this.svg.setAttribute("viewBox", `0 0 ${this.width} ${this.height}`);
    this.svg.setAttribute("class", "chart heatmap");
    container.appendChild(this.svg);
  }

  setData(data: HeatmapDay): void {
    this.data = data;
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
    if (!this.data) return;
    const fontSize = this.publication ? 15 : 10;
    const left = this.publication ? 64 : 52;
    const top = 22;
    const bottom = 26;
    const right = 54;
    const innerW = this.width - left - right;
    const innerH = this.height - top - bottom;
    const { agent_ids, matrix, bin_starts, bin_minutes, local_date } = this.data;
    const rows = agent_ids.length;
    const cols = bin_starts.length;
    const totalMinutes = bin_minutes.reduce((a, b) => a + b, 0);

    let maxVal = 0;
    for (const row of matrix) for (const v of row) if (v > maxVal) maxVal = v;

    const rowH = innerH / rows;
    let xCursor = left;
    const colX: number[] = [];
    const colW: number[] = [];
    for (let c = 0; c < cols; c++) {
      const w = (bin_minutes[c] / totalMinutes) * innerW;
      colX.push(xCursor);
      colW.push(w);
      xCursor += w;
    }

    for (let r = 0; r < rows; r++) {
      for (let c = 0; c < cols; c++) {
        const v = matrix[r][c];
        if (v <= 0) continue; // empty cells keep the background
        const cell = document.createElementNS(SVG_NS, "rect");
        cell.setAttribute("x", colX[c].toFixed(2));
        cell.setAttribute("y", (top + r * rowH).toFixed(2));
        cell.setAttribute("width", Math.max(colW[c], 0.4).toFixed(2));
        cell.setAttribute("height", Math.max(rowH, 0.4).toFixed(2));
        cell.setAttribute("fill", heatColor(v / maxVal));
        cell.setAttribute("data-cell", `${agent_ids[r]}:${c}`);
        const title = document.createElementNS(SVG_NS, "title");
        title.textContent = `${agent_ids[r]} @ ${bin_starts[c]}: ${v.toFixed(2)} kW`;
        cell.appendChild(title);
        this.svg.appendChild(cell);
      }
    }

    const labelEvery = Math.max(1, Math.ceil(rows / Math.floor(innerH / (fontSize + 2))));
    for (let r = 0; r < rows; r += labelEvery) {
      this.label(agent_ids[r], left - 4, top + r * rowH + rowH / 2 + fontSize / 3, fontSize, "end");
    }
    const tickEvery = Math.max(1, Math.floor(cols / 8));
    for (let c = 0; c < cols; c += tickEvery) {
      const t = new Date(bin_starts[c]);
      this.label(
        t.toLocaleTimeString("en-GB", { hour: "2-digit", minute: "2-digit" }),
        colX[c],
        this.height - 8,
        fontSize,
        "middle",
      );
    }
    this.label(`${local_date} (max ${maxVal.toFixed(1)} kW)`, left, 14, fontSize, "start");
    this.legend(left + innerW + 10, top, innerH, maxVal, fontSize);
  }

  private legend(x: number, top: number, height: number, maxVal: number, fontSize: number): void {
    const steps = 24;
    for (let i = 0; i < steps; i++) {
      const cell = document.createElementNS(SVG_NS, "rect");
      cell.setAttribute("x", String(x));
      cell.setAttribute("y", (top + ((steps - 1 - i) / steps) * height).toFixed(2));
      cell.setAttribute("width", "12");
      cell.setAttribute("height", (height / steps + 0.5).toFixed(2));
      cell.setAttribute("fill", heatColor(i / (steps - 1)));
      this.svg.appendChild(cell);
    }
    this.label(maxVal.toFixed(1), x + 16, top + fontSize, fontSize, "start");
    this.label("0", x + 16, top + height, fontSize, "start");
  }

  private label(text: string, x: number, y: number, fontSize: number, anchor: string): void {
    const node = document.createElementNS(SVG_NS, "text");
    node.setAttribute("x", String(x));
    node.setAttribute("y", String(y));
    node.setAttribute("font-size", String(fontSize));
    node.setAttribute("text-anchor", anchor);
    node.setAttribute("fill", "#333");
    node.setAttribute("font-family", "sans-serif");
    node.textContent = text;
    this.svg.appendChild(node);
  }
}

/** white -> amber -> red ramp */
export function heatColor(frac: number): string {
  const f = Math.min(1, Math.max(0, frac));
  const r = Math.round(255 - 25 * f);
  const g = Math.round(244 - 170 * f);
  const b = Math.round(235 - 200 * f);
  return `rgb(${r},${g},${b})`;
}
