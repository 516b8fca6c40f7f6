/**
 * Display-only formatting. Every number shown in the UI is one API field
 * rendered as text; no KPI arithmetic happens here (axis scaling lives in
 * the chart engine).
 */

export function fmtNumber(value: number, maxDecimals = 3): string {
  if (!Number.isFinite(value)) return String(value);
  const abs = Math.abs(value);
  const decimals = abs >= 1000 ? 1 : abs >= 10 ? 2 : maxDecimals;
  return value.toLocaleString("en-GB", {
    minimumFractionDigits: 0,
    maximumFractionDigits: decimals,
  });
}

export function fmtDiffBadge(pctDiff: number | null, marker?: string): string {
  if (pctDiff === null || pctDiff === undefined) {
    return marker === "undefined_zero_reference" ? "ref 0" : "n/a";
  }
  const sign = pctDiff > 0 ? "+" : "";
  return `${sign}${pctDiff.toLocaleString("en-GB", { maximumFractionDigits: 1 })}%`;
}

/** Local calendar date (YYYY-MM-DD) of an ISO instant in an IANA zone. */
export function localDate(iso: string, timeZone: string): string {
  const parts = new Intl.DateTimeFormat("en-CA", {
    timeZone,
    year: "numeric",
    month: "2-digit",
    day: "2-digit",
  }).formatToParts(new Date(iso));
  const get = (type: string) => parts.find((p) => p.type === type)?.value ?? "";
  return `${get("year")}-${get("month")}-${get("day")}`;
}

export function localTimeLabel(iso: string, timeZone: string): string {
  return new Date(iso).toLocaleString("en-GB", {
    timeZone,
    year: "numeric",
    month: "short",
    day: "numeric",
    hour: "2-digit",
    minute: "2-digit",
  });
}
