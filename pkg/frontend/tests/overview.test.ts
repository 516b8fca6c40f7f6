/**
 * System Overview against the seeded server fixture: the eight KPI cards
 * render with diff badges, every displayed number traces to one API field,
 * and clicking a charging-count bar highlights exactly the agents the
 * /charging endpoint returns.
 */

import { afterEach, beforeEach, describe, expect, it, vi } from "vitest";

import { ApiClient, ChargingAt, KpiDiffReport } from "../src/api";
import { createApp, App } from "../src/main";
import { KPI_CARDS } from "../src/views/overview";
import { fixtureJson, installFetch, settle } from "./harness";

describe("system overview", () => {
  let app: App;

  beforeEach(async () => {
    installFetch();
    document.body.innerHTML = '<div id="root"></div>';
    app = createApp(document.getElementById("root")!, new ApiClient());
    await settle();
  });

  afterEach(() => {
    vi.unstubAllGlobals();
  });

  it("renders exactly the eight KPI cards", () => {
    const cards = document.querySelectorAll(".kpi-card");
    expect(cards.length).toBe(8);
    const keys = [...cards].map((c) => c.getAttribute("data-kpi"));
    expect(keys).toEqual(KPI_CARDS.map((c) => c.key));
  });

  it("shows diff badges for every card when a reference is selected", async () => {
    app.store.update({ referenceId: "fix3" });
    await app.refresh();
    await settle();
    const badges = document.querySelectorAll(".kpi-card .diff-badge");
    expect(badges.length).toBe(8);
    // the reference is the scenario itself, so every defined diff reads 0%
    const fixture = fixtureJson<KpiDiffReport>("/api/scenarios/fix3/kpis?ref=fix3");
    for (const card of KPI_CARDS) {
      const badge = document.querySelector(`[data-kpi="${card.key}"] .diff-badge`)!;
      if (fixture.kpis[card.key].pct_diff !== null) {
        expect(badge.textContent).toBe("0%");
      }
    }
  });

  it("KPI card values come verbatim from the API response", async () => {
    const doc = fixtureJson<{ kpis: Record<string, unknown> }>("/api/scenarios/fix3/kpis");
    const count = document.querySelector('[data-kpi="dissatisfaction_count"] .kpi-value')!;
    expect(count.textContent).toBe(String(doc.kpis.dissatisfaction_count));
    const first = document.querySelector('[data-kpi="first_overload"] .kpi-value')!;
    expect(first.textContent).toBe(doc.kpis.first_overload);
  });

  it("renders the map statistics line from the stats field", () => {
    const stats = document.querySelector(".stats-line")!;
    expect(stats.textContent).toContain("Sum:");
    expect(stats.textContent).toContain("Max:");
    expect(stats.textContent).toContain("Mean:");
    expect(stats.textContent).toContain("Min:");
  });

  it("charging bar click highlights exactly the agents from /charging", async () => {
    const expected = fixtureJson<ChargingAt>(
      "/api/scenarios/fix3/charging?at=" + encodeURIComponent("2025-06-09T23:30:00+00:00"),
    );
    // the on-screen bar at 2025-06-09T23:30Z (01:30 local) in the
    // 240-bucket charging-count series
    const x = Date.parse("2025-06-09T23:30:00+00:00");
    const bar = document.querySelector(`rect.clickable[data-x="${x}"]`) as SVGElement;
    expect(bar).toBeTruthy();
    bar.dispatchEvent(new MouseEvent("click"));
    await settle();
    const highlighted = [...document.querySelectorAll('[data-highlighted="true"]')].map((el) =>
      el.getAttribute("data-agent"),
    );
    expect(highlighted.sort()).toEqual(expected.agents.map((a) => a.agent_id).sort());
    expect(highlighted.length).toBe(expected.agents.length);
    expect(document.querySelector(".drill-note")!.textContent).toContain(
      `${expected.agents.length} charging`,
    );
  });

  it("clicking a map point opens the detail table and can jump to consumer analysis", async () => {
    const dot = document.querySelector('[data-agent="A001"]') as SVGElement;
    dot.dispatchEvent(new MouseEvent("click"));
    await settle();
    expect(document.querySelector(".agent-detail-table table")).toBeTruthy();
    const open = document.querySelector(".open-consumer") as HTMLButtonElement;
    open.click();
    expect(app.store.get().page).toBe("consumer");
    expect(app.store.get().agentId).toBe("A001");
  });

  it("transformer load chart carries the capacity threshold line", () => {
    expect(document.querySelector(".threshold")).toBeTruthy();
  });
});
