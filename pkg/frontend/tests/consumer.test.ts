/**
 * Consumer Analysis against the seeded server fixture: the SoC chart marks
 * exactly the dissatisfaction days the API reports, and event markers
 * mirror the agent's departure/arrival records.
 */

import { afterEach, beforeEach, describe, expect, it, vi } from "vitest";

import { AgentDetail, ApiClient } from "../src/api";
import { createApp, App } from "../src/main";
import { localDate } from "../src/format";
import { fixtureJson, installFetch, settle } from "./harness";

describe("consumer analysis", () => {
  let app: App;

  beforeEach(async () => {
    installFetch();
    document.body.innerHTML = '<div id="root"></div>';
    app = createApp(document.getElementById("root")!, new ApiClient());
    await settle();
    app.store.update({ page: "consumer", agentId: "A001" });
    await settle();
  });

  afterEach(() => {
    vi.unstubAllGlobals();
  });

  it("marks exactly the dissatisfaction days reported by the API", () => {
    const detail = fixtureJson<AgentDetail>("/api/scenarios/fix3/agents/A001?buckets=1000");
    expect(detail.dissatisfaction_days).toEqual(["2025-06-10"]);
    const flagged = new Set(detail.dissatisfaction_days);
    const expectedCrossCount = detail.soc.buckets.filter((b) =>
      flagged.has(localDate(b.t_start, "Europe/Copenhagen")),
    ).length;
    const crosses = document.querySelectorAll('[data-marker="cross"]');
    expect(crosses.length).toBe(expectedCrossCount);
    expect(expectedCrossCount).toBeGreaterThan(0);

    // every cross labels a flagged day, none others
    for (const cross of crosses) {
      const label = cross.querySelector("title")!.textContent!;
      expect(label).toContain("2025-06-10");
    }
  });

  it("draws departure and arrival markers for the agent's events", () => {
    const detail = fixtureJson<AgentDetail>("/api/scenarios/fix3/agents/A001?buckets=1000");
    const ups = document.querySelectorAll('[data-marker="triangle-up"]');
    const downs = document.querySelectorAll('[data-marker="triangle-down"]');
    expect(ups.length).toBe(detail.markers.filter((m) => m.kind === "departure").length);
    expect(downs.length).toBe(detail.markers.filter((m) => m.kind === "arrival").length);
  });

  it("renders daily distance bars straight from the API values", () => {
    const detail = fixtureJson<AgentDetail>("/api/scenarios/fix3/agents/A001?buckets=1000");
    expect(app.consumer.detail()?.daily_distance_km).toEqual(detail.daily_distance_km);
  });

  it("overlays the reference charging series when a reference is set", async () => {
    app.store.update({ referenceId: "fix3" });
    await app.consumer.refresh("Europe/Copenhagen");
    await settle();
    const overlay = document.querySelectorAll('[data-series="reference"]');
    expect(overlay.length).toBe(1);
  });
});
