/**
 * Hand-rolled SVG chart engine: step/line/bar series over a time axis, a
 * capacity threshold line, event markers and day-flag glyphs, wheel zoom
 * and drag pan, per-chart SVG export, and a publication mode that only
 * touches presentation attributes (fonts, stroke widths), never data.
 *
 * Rendering straight to SVG keeps the export path trivial: the exported
 * document is the live chart markup, so it always carries exactly the
 * point count that is on screen.
 */

const SVG_NS = "http://www.w3.org/2000/svg";

export interface Point {
  x: number; // epoch milliseconds
  y: number;
}

export interface SeriesSpec {
  label: string;
  color: string;
  points: Point[];
  kind: "line" | "step" | "bar";
  dashed?: boolean;
  /** secondary y-axis (e.g. price on a load chart) */
  axis?: "left" | "right";
  /** per-point hover text (e.g. agent id lists on event bars) */
  titles?: string[];
}

export interface MarkerSpec {
  x: number;
  y?: number;
  glyph: "triangle-up" | "triangle-down" | "cross";
  color: string;
  label: string;
}

export interface ChartOptions {
  width?: number;
  height?: number;
  yLabel?: string;
  yLabelRight?: string;
  threshold?: { value: number; label: string; color?: string };
  onBarClick?: (point: Point) => void;
  timeZone?: string;
}

interface Layout {
  left: number;
  right: number;
  top: number;
  bottom: number;
  fontSize: number;
  strokeWidth: number;
}

export class SeriesChart {
  readonly svg: SVGSVGElement;
  private series: SeriesSpec[] = [];
  private markers: MarkerSpec[] = [];
  private publication = false;
  private xDomain: [number, number] | null = null;
  private fullDomain: [number, number] = [0, 1];
  private dragAnchor: number | null = null;
  private readonly width: number;
  private readonly height: number;

  constructor(container: HTMLElement, private readonly options: ChartOptions = {}) {
    this.width = options.width ?? 860;
    this.height = options.height ?? 260;
    this.svg = document.createElementNS(SVG_NS, "svg");
    this.svg.setAttribute("viewBox", `0 0 ${this.width} ${this.height}`);
    this.svg.setAttribute("class", "chart");
    container.appendChild(this.svg);
    this.bindInteraction();
  }

  setData(series: SeriesSpec[], markers: MarkerSpec[] = []): void {
    this.series = series;
    this.markers = markers;
    const xs = series.flatMap((s) => (s.points.length ? [s.points[0].x, s.points[s.points.length - 1].x] : []));
    if (xs.length) {
      this.fullDomain = [Math.min(...xs), Math.max(...xs) + 1];
    }
    this.render();
  }

  setPublicationMode(on: boolean): void {
    this.publication = on;
    this.render();
  }

  setThreshold(value: number, label: string): void {
    this.options.threshold = { value, label };
    this.render();
  }

  resetZoom(): void {
    this.xDomain = null;
    this.render();
  }

  /** Serialized standalone SVG document of exactly what is on screen. */
  exportSvg(): string {
    return `<?xml version="1.0" encoding="UTF-8"?>\n` + new XMLSerializer().serializeToString(this.svg);
  }

  pointCount(): number {
    return this.svg.querySelectorAll("[data-point]").length;
  }

  private layout(): Layout {
    const publication = this.publication;
    return {
      left: 58,
      right: this.options.yLabelRight ? 54 : 16,
      top: 14,
      bottom: 34,
      fontSize: publication ? 16 : 11,
      strokeWidth: publication ? 2.8 : 1.4,
    };
  }

  private domain(): [number, number] {
    return this.xDomain ?? this.fullDomain;
  }

  private bindInteraction(): void {
    this.svg.addEventListener("wheel", (event) => {
      event.preventDefault();
      const [lo, hi] = this.domain();
      const frac = this.eventFraction(event);
      const factor = event.deltaY < 0 ? 0.8 : 1.25;
      const pivot = lo + frac * (hi - lo);
      const newLo = pivot - (pivot - lo) * factor;
      const newHi = pivot + (hi - pivot) * factor;
      const [flo, fhi] = this.fullDomain;
      this.xDomain = [Math.max(flo, newLo), Math.min(fhi, newHi)];
      this.render();
    });
    this.svg.addEventListener("mousedown", (event) => {
      this.dragAnchor = this.eventFraction(event);
    });
    this.svg.addEventListener("mousemove", (event) => {
      if (this.dragAnchor === null) return;
      const [lo, hi] = this.domain();
      const span = hi - lo;
      const shift = (this.dragAnchor - this.eventFraction(event)) * span;
      const [flo, fhi] = this.fullDomain;
      let newLo = lo + shift;
      let newHi = hi + shift;
      if (newLo < flo) {
        newLo = flo;
        newHi = flo + span;
      }
      if (newHi > fhi) {
        newHi = fhi;
        newLo = fhi - span;
      }
      this.xDomain = [newLo, newHi];
      this.dragAnchor = this.eventFraction(event);
      this.render();
    });
    for (const evt of ["mouseup", "mouseleave"]) {
      this.svg.addEventListener(evt, () => {
        this.dragAnchor = null;
      });
    }
  }

  private eventFraction(event: MouseEvent): number {
    const rect = this.svg.getBoundingClientRect();
    const width = rect.width || this.width;
    const layout = this.layout();
    const inner = Math.max(1, width - layout.left - layout.right);
    return Math.min(1, Math.max(0, (event.clientX - rect.left - layout.left) / inner));
  }

  private render(): void {
    const layout = this.layout();
    const [lo, hi] = this.domain();
    const innerW = this.width - layout.left - layout.right;
    const innerH = this.height - layout.top - layout.bottom;
    const visible = this.series.map((s) => ({
      spec: s,
      points: s.points.filter((p) => p.x >= lo && p.x <= hi),
    }));

    const leftYs: number[] = [];
    const rightYs: number[] = [];
    for (const { spec, points } of visible) {
      const target = spec.axis === "right" ? rightYs : leftYs;
      for (const p of points) target.push(p.y);
    }
    if (this.options.threshold) leftYs.push(this.options.threshold.value);
    const yScaleL = niceScale(leftYs);
    const yScaleR = niceScale(rightYs);

    const x = (v: number) => layout.left + ((v - lo) / (hi - lo)) * innerW;
    const yL = (v: number) => layout.top + innerH - ((v - yScaleL.min) / (yScaleL.max - yScaleL.min)) * innerH;
    const yR = (v: number) => layout.top + innerH - ((v - yScaleR.min) / (yScaleR.max - yScaleR.min)) * innerH;

    this.svg.textContent = "";
    this.drawAxes(layout, lo, hi, yScaleL, yScaleR, x, yL, yR, innerW, innerH);

    for (const { spec, points } of visible) {
      const y = spec.axis === "right" ? yR : yL;
      if (spec.kind === "bar") {
        this.drawBars(spec, points, x, y, layout, innerH);
      } else {
        this.drawPath(spec, points, x, y, layout);
      }
    }

    if (this.options.threshold) {
      const t = this.options.threshold;
      const line = this.el("line", {
        x1: layout.left,
        x2: layout.left + innerW,
        y1: yL(t.value),
        y2: yL(t.value),
        stroke: t.color ?? "#c62828",
        "stroke-width": layout.strokeWidth,
        "stroke-dasharray": "7 4",
        class: "threshold",
      });
      this.svg.appendChild(line);
      this.text(t.label, layout.left + innerW - 4, yL(t.value) - 4, layout.fontSize, {
        anchor: "end",
        fill: t.color ?? "#c62828",
      });
    }

    for (const marker of this.markers) {
      if (marker.x < lo || marker.x > hi) continue;
      this.drawMarker(marker, x, yL, layout, innerH);
    }

    this.drawLegend(layout);
  }

  private drawAxes(
    layout: Layout,
    lo: number,
    hi: number,
    yScaleL: Scale,
    yScaleR: Scale,
    x: (v: number) => number,
    yL: (v: number) => number,
    yR: (v: number) => number,
    innerW: number,
    innerH: number,
  ): void {
    const axisColor = "#888";
    this.svg.appendChild(
      this.el("rect", {
        x: layout.left,
        y: layout.top,
        width: innerW,
        height: innerH,
        fill: "none",
        stroke: axisColor,
        "stroke-width": 1,
      }),
    );
    for (const tick of yScaleL.ticks) {
      const ty = yL(tick);
      this.svg.appendChild(
        this.el("line", {
          x1: layout.left, x2: layout.left + innerW, y1: ty, y2: ty,
          stroke: "#e4e4e4", "stroke-width": 1,
        }),
      );
      this.text(formatTick(tick), layout.left - 6, ty + 3, layout.fontSize, { anchor: "end" });
    }
    if (this.options.yLabelRight) {
      for (const tick of yScaleR.ticks) {
        this.text(formatTick(tick), layout.left + innerW + 6, yR(tick) + 3, layout.fontSize, {
          anchor: "start",
        });
      }
    }
    for (const tick of timeTicks(lo, hi, 6)) {
      const tx = x(tick);
      this.svg.appendChild(
        this.el("line", {
          x1: tx, x2: tx, y1: layout.top + innerH, y2: layout.top + innerH + 4,
          stroke: axisColor, "stroke-width": 1,
        }),
      );
      this.text(formatTime(tick, hi - lo, this.options.timeZone), tx, layout.top + innerH + 16, layout.fontSize, {
        anchor: "middle",
      });
    }
    if (this.options.yLabel) {
      this.text(this.options.yLabel, 12, layout.top + 2, layout.fontSize, { anchor: "start" });
    }
    if (this.options.yLabelRight) {
      this.text(this.options.yLabelRight, this.width - 4, layout.top + 2, layout.fontSize, {
        anchor: "end",
      });
    }
  }

  private drawPath(
    spec: SeriesSpec,
    points: Point[],
    x: (v: number) => number,
    y: (v: number) => number,
    layout: Layout,
  ): void {
    if (!points.length) return;
    const parts: string[] = [];
    points.forEach((p, i) => {
      const px = x(p.x).toFixed(2);
      const py = y(p.y).toFixed(2);
      if (i === 0) {
        parts.push(`M${px},${py}`);
      } else if (spec.kind === "step") {
        parts.push(`H${px}`, `V${py}`);
      } else {
        parts.push(`L${px},${py}`);
      }
    });
    const path = this.el("path", {
      d: parts.join(" "),
      fill: "none",
      stroke: spec.color,
      "stroke-width": layout.strokeWidth,
      "data-series": spec.label,
    });
    if (spec.dashed) path.setAttribute("stroke-dasharray", "5 4");
    this.svg.appendChild(path);
    // invisible per-point anchors keep the on-screen point count inspectable
    for (const p of points) {
      this.svg.appendChild(
        this.el("circle", {
          cx: x(p.x), cy: y(p.y), r: Math.max(1, layout.strokeWidth * 0.9),
          fill: spec.color, "fill-opacity": points.length > 400 ? 0 : 0.9,
          "data-point": spec.label,
        }),
      );
    }
  }

  private drawBars(
    spec: SeriesSpec,
    points: Point[],
    x: (v: number) => number,
    y: (v: number) => number,
    layout: Layout,
    innerH: number,
  ): void {
    if (!points.length) return;
    const step = points.length > 1 ? x(points[1].x) - x(points[0].x) : 18;
    const barW = Math.max(1.5, Math.min(26, step * 0.8));
    const y0 = layout.top + innerH;
    points.forEach((p, index) => {
      const bar = this.el("rect", {
        x: x(p.x) - barW / 2,
        y: Math.min(y(p.y), y0),
        width: barW,
        height: Math.abs(y0 - y(p.y)),
        fill: spec.color,
        "fill-opacity": 0.75,
        "data-point": spec.label,
        "data-x": p.x,
        class: this.options.onBarClick ? "bar clickable" : "bar",
      });
      if (this.options.onBarClick) {
        bar.addEventListener("click", () => this.options.onBarClick!(p));
      }
      if (spec.titles && spec.titles[index]) {
        const title = document.createElementNS(SVG_NS, "title");
        title.textContent = spec.titles[index];
        bar.appendChild(title);
      }
      this.svg.appendChild(bar);
    });
  }

  private drawMarker(
    marker: MarkerSpec,
    x: (v: number) => number,
    y: (v: number) => number,
    layout: Layout,
    innerH: number,
  ): void {
    const mx = x(marker.x);
    const my = marker.y !== undefined ? y(marker.y) : layout.top + 10;
    const size = this.publication ? 7 : 4.5;
    let shape: SVGElement;
    if (marker.glyph === "cross") {
      shape = this.el("path", {
        d: `M${mx - size},${my - size} L${mx + size},${my + size} M${mx - size},${my + size} L${mx + size},${my - size}`,
        stroke: marker.color,
        "stroke-width": this.publication ? 2.4 : 1.6,
        fill: "none",
      });
    } else {
      const dir = marker.glyph === "triangle-up" ? -1 : 1;
      const base = marker.y !== undefined ? my : layout.top + innerH;
      shape = this.el("path", {
        d: `M${mx},${base + dir * size * 1.6} L${mx - size},${base} L${mx + size},${base} Z`,
        fill: marker.color,
      });
    }
    shape.setAttribute("data-marker", marker.glyph);
    const title = document.createElementNS(SVG_NS, "title");
    title.textContent = marker.label;
    shape.appendChild(title);
    this.svg.appendChild(shape);
  }

  private drawLegend(layout: Layout): void {
    let lx = layout.left + 8;
    for (const s of this.series) {
      if (!s.label) continue;
      this.svg.appendChild(
        this.el("rect", { x: lx, y: 4, width: 10, height: 4, fill: s.color }),
      );
      this.text(s.label, lx + 14, 9, layout.fontSize, { anchor: "start" });
      lx += 22 + measure(s.label, layout.fontSize);
    }
  }

  private el(tag: string, attrs: Record<string, string | number>): SVGElement {
    const node = document.createElementNS(SVG_NS, tag);
    for (const [key, value] of Object.entries(attrs)) {
      node.setAttribute(key, String(value));
    }
    return node;
  }

  private text(
    content: string,
    x: number,
    y: number,
    fontSize: number,
    opts: { anchor?: string; fill?: string } = {},
  ): SVGElement {
    const node = this.el("text", {
      x, y,
      "font-size": fontSize,
      "text-anchor": opts.anchor ?? "start",
      fill: opts.fill ?? "#333",
      "font-family": "sans-serif",
    });
    node.textContent = content;
    this.svg.appendChild(node);
    return node;
  }
}

/** Categorical bar chart (e.g. loading-band distribution). */
export class CategoryBars {
  readonly svg: SVGSVGElement;
  private labels: string[] = [];
  private values: number[] = [];
  private colors: string[] = [];
  private publication = false;
  private readonly width: number;
  private readonly height: number;

  constructor(container: HTMLElement, private readonly yLabel: string, width = 420, height = 260) {
    this.width = width;
    this.height = height;
    this.svg = document.createElementNS(SVG_NS, "svg");
    this.svg.setAttribute("viewBox", `0 0 ${width} ${height}`);
    this.svg.setAttribute("class", "chart");
    container.appendChild(this.svg);
  }

  setData(labels: string[], values: number[], colors: string[]): void {
    this.labels = labels;
    this.values = values;
    this.colors = colors;
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
    const fontSize = this.publication ? 16 : 11;
    const left = 56;
    const top = 14;
    const bottom = 42;
    const innerW = this.width - left - 12;
    const innerH = this.height - top - bottom;
    const maxV = Math.max(1, ...this.values);
    const slot = innerW / Math.max(1, this.values.length);
    this.values.forEach((v, i) => {
      const h = (v / maxV) * innerH;
      const bar = document.createElementNS(SVG_NS, "rect");
      bar.setAttribute("x", (left + i * slot + slot * 0.15).toFixed(2));
      bar.setAttribute("y", (top + innerH - h).toFixed(2));
      bar.setAttribute("width", (slot * 0.7).toFixed(2));
      bar.setAttribute("height", h.toFixed(2));
      bar.setAttribute("fill", this.colors[i] ?? "#1976d2");
      bar.setAttribute("data-point", this.labels[i]);
      this.svg.appendChild(bar);
      this.textNode(String(v), left + i * slot + slot / 2, top + innerH - h - 4, fontSize, "middle");
      this.textNode(this.labels[i], left + i * slot + slot / 2, this.height - 22, fontSize, "middle");
    });
    this.textNode(this.yLabel, 8, top, fontSize, "start");
    const axis = document.createElementNS(SVG_NS, "line");
    axis.setAttribute("x1", String(left));
    axis.setAttribute("x2", String(left + innerW));
    axis.setAttribute("y1", String(top + innerH));
    axis.setAttribute("y2", String(top + innerH));
    axis.setAttribute("stroke", "#888");
    this.svg.appendChild(axis);
  }

  private textNode(content: string, x: number, y: number, fontSize: number, anchor: string): void {
    const node = document.createElementNS(SVG_NS, "text");
    node.setAttribute("x", String(x));
    node.setAttribute("y", String(y));
    node.setAttribute("font-size", String(fontSize));
    node.setAttribute("text-anchor", anchor);
    node.setAttribute("fill", "#333");
    node.setAttribute("font-family", "sans-serif");
    node.textContent = content;
    this.svg.appendChild(node);
  }
}

interface Scale {
  min: number;
  max: number;
  ticks: number[];
}

function niceScale(values: number[]): Scale {
  if (!values.length) return { min: 0, max: 1, ticks: [0, 0.5, 1] };
  let lo = Math.min(...values, 0);
  let hi = Math.max(...values);
  if (hi === lo) hi = lo + 1;
  const span = hi - lo;
  const step = niceStep(span / 4);
  lo = Math.floor(lo / step) * step;
  hi = Math.ceil(hi / step) * step;
  const ticks: number[] = [];
  for (let v = lo; v <= hi + step / 2; v += step) ticks.push(roundTo(v, step));
  return { min: lo, max: hi, ticks };
}

function niceStep(raw: number): number {
  const pow = Math.pow(10, Math.floor(Math.log10(Math.max(raw, 1e-12))));
  const frac = raw / pow;
  const nice = frac <= 1 ? 1 : frac <= 2 ? 2 : frac <= 5 ? 5 : 10;
  return nice * pow;
}

function roundTo(v: number, step: number): number {
  const decimals = Math.max(0, -Math.floor(Math.log10(step)) + 1);
  return Number(v.toFixed(decimals));
}

function timeTicks(lo: number, hi: number, n: number): number[] {
  const ticks: number[] = [];
  const step = (hi - lo) / (n + 1);
  for (let i = 1; i <= n; i++) ticks.push(lo + i * step);
  return ticks;
}

function formatTick(v: number): string {
  if (Math.abs(v) >= 100000) return v.toExponential(1);
  return String(v);
}

export function formatTime(ms: number, spanMs: number, timeZone?: string): string {
  const date = new Date(ms);
  const opts: Intl.DateTimeFormatOptions = timeZone ? { timeZone } : {};
  if (spanMs <= 36 * 3600 * 1000) {
    return date.toLocaleTimeString("en-GB", { ...opts, hour: "2-digit", minute: "2-digit" });
  }
  if (spanMs <= 40 * 86400 * 1000) {
    return date.toLocaleDateString("en-GB", { ...opts, month: "short", day: "numeric" });
  }
  return date.toLocaleDateString("en-GB", { ...opts, year: "numeric", month: "short" });
}

function measure(text: string, fontSize: number): number {
  return text.length * fontSize * 0.62;
}
