/**
 * Test harness: a fetch stub that serves the recorded backend responses
 * (captured from the real seeded server by scripts/record_fixtures.py),
 * keyed by normalized path + sorted query string.
 */

import { readFileSync, readdirSync } from "node:fs";
import { dirname, join } from "node:path";
import { fileURLToPath } from "node:url";
import { vi } from "vitest";

const FIXTURE_DIR = join(dirname(fileURLToPath(import.meta.url)), "fixtures");

const routes: Record<string, string> = JSON.parse(
  readFileSync(join(FIXTURE_DIR, "routes.json"), "utf-8"),
);

const bodies = new Map<string, string>();
for (const file of readdirSync(FIXTURE_DIR)) {
  if (file !== "routes.json") bodies.set(file, readFileSync(join(FIXTURE_DIR, file), "utf-8"));
}

export function normalizeUrl(url: string): string {
  const u = new URL(url, "http://fixture");
  const params = [...u.searchParams.entries()].sort(([a], [b]) => (a < b ? -1 : a > b ? 1 : 0));
  const query = params.map(([k, v]) => `${k}=${v}`).join("&");
  return u.pathname + (query ? `?${query}` : "");
}

export function fixtureJson<T>(url: string): T {
  const key = normalizeUrl(url);
  const file = routes[key];
  if (!file) throw new Error(`no fixture recorded for ${key}`);
  return JSON.parse(bodies.get(file)!) as T;
}

export interface FetchLog {
  urls: string[];
}

/** Install the fixture-backed fetch; returns a log of requested URLs. */
export function installFetch(): FetchLog {
  const log: FetchLog = { urls: [] };
  vi.stubGlobal(
    "fetch",
    vi.fn(async (url: string) => {
      const key = normalizeUrl(String(url));
      log.urls.push(key);
      const file = routes[key];
      if (!file) {
        return new Response(
          JSON.stringify({ code: "unknown_fixture", message: `no fixture for ${key}` }),
          { status: 404, headers: { "content-type": "application/json" } },
        );
      }
      return new Response(bodies.get(file)!, {
        status: 200,
        headers: { "content-type": "application/json" },
      });
    }),
  );
  return log;
}

export function flushAsync(): Promise<void> {
  return new Promise((resolve) => setTimeout(resolve, 0));
}

/** Drain the microtask/timer queue a few times so chained fetches settle. */
export async function settle(rounds = 8): Promise<void> {
  for (let i = 0; i < rounds; i++) await flushAsync();
}
