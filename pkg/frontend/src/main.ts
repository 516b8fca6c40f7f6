/**
 * Application shell: scenario/reference pickers, the three coordinated
 * views (System Overview, System Analysis, Consumer Analysis) and the
 * publication-mode toggle.
 */

import { ApiClient, ScenarioInfo } from "./api";
import { BannerArea } from "./banners";
import { Store } from "./state";
import { AnalysisView } from "./views/analysis";
import { ConsumerView } from "./views/consumer";
import { OverviewView } from "./views/overview";
import "./style.css";

export interface App {
  store: Store;
  overview: OverviewView;
  analysis: AnalysisView;
  consumer: ConsumerView;
  refresh: () => Promise<void>;
}

const PAGES = [
  ["overview", "System Overview"],
  ["analysis", "System Analysis"],
  ["consumer", "Consumer Analysis"],
] as const;

export function createApp(root: HTMLElement, api: ApiClient): App {
  const store = new Store();
  const banners = new BannerArea(root);
  api.onError((failure) => banners.show(failure));

  const topbar = document.createElement("header");
  topbar.className = "topbar";
  root.appendChild(topbar);

  const title = document.createElement("div");
  title.className = "brand";
  title.textContent = "gridlens";
  topbar.appendChild(title);

  const tabs = document.createElement("nav");
  tabs.className = "tabs";
  topbar.appendChild(tabs);
  for (const [page, label] of PAGES) {
    const tab = document.createElement("button");
    tab.className = "tab";
    tab.setAttribute("data-page", page);
    tab.textContent = label;
    tab.addEventListener("click", () => store.update({ page }));
    tabs.appendChild(tab);
  }

  const scenarioSelect = document.createElement("select");
  scenarioSelect.className = "scenario-select";
  scenarioSelect.addEventListener("change", () => {
    store.update({ scenarioId: scenarioSelect.value || null, agentId: null });
    void refresh();
  });
  const refSelect = document.createElement("select");
  refSelect.className = "ref-select";
  refSelect.addEventListener("change", () => {
    store.update({ referenceId: refSelect.value || null });
    void refresh();
  });
  const pubToggle = document.createElement("label");
  pubToggle.className = "pub-toggle";
  const pubBox = document.createElement("input");
  pubBox.type = "checkbox";
  pubBox.addEventListener("change", () => {
    store.update({ publicationMode: pubBox.checked });
    overview.setPublicationMode(pubBox.checked);
    analysis.setPublicationMode(pubBox.checked);
    consumer.setPublicationMode(pubBox.checked);
  });
  pubToggle.append(pubBox, document.createTextNode(" publication mode"));
  topbar.append(labelled("scenario", scenarioSelect), labelled("reference", refSelect), pubToggle);

  const overview = new OverviewView(api, store);
  const analysis = new AnalysisView(api, store);
  const consumer = new ConsumerView(api, store);
  root.append(overview.el, analysis.el, consumer.el);

  let scenarios: ScenarioInfo[] = [];

  function currentScenario(): ScenarioInfo | undefined {
    return scenarios.find((s) => s.id === store.get().scenarioId);
  }

  function showPage(): void {
    const page = store.get().page;
    overview.el.style.display = page === "overview" ? "" : "none";
    analysis.el.style.display = page === "analysis" ? "" : "none";
    consumer.el.style.display = page === "consumer" ? "" : "none";
    for (const tab of tabs.querySelectorAll(".tab")) {
      tab.classList.toggle("active", tab.getAttribute("data-page") === page);
    }
  }

  async function refresh(): Promise<void> {
    const info = currentScenario();
    if (!info) return;
    const zone = info.timezone;
    const page = store.get().page;
    if (page === "overview") await overview.refresh(zone);
    if (page === "analysis") await analysis.refresh(zone, info.start);
    if (page === "consumer") await consumer.refresh(zone);
  }

  store.subscribe(() => {
    showPage();
  });
  store.subscribe((state) => {
    // map-click navigation into Consumer Analysis pre-selects the agent
    if (state.page === "consumer" && state.agentId) void consumer.refresh(currentScenario()?.timezone ?? "UTC");
  });

  async function boot(): Promise<void> {
    const listed = await api.scenarios();
    if (!listed) return;
    scenarios = listed;
    scenarioSelect.textContent = "";
    for (const s of scenarios) {
      const opt = document.createElement("option");
      opt.value = s.id;
      opt.textContent = `${s.id} (${s.agents} agents)`;
      scenarioSelect.appendChild(opt);
    }
    refSelect.textContent = "";
    refSelect.appendChild(document.createElement("option"));
    for (const s of scenarios) {
      const opt = document.createElement("option");
      opt.value = s.id;
      opt.textContent = s.id;
      refSelect.appendChild(opt);
    }
    if (scenarios.length) {
      store.update({ scenarioId: scenarios[0].id });
      const map = await api.mapMetric(scenarios[0].id, "ev_energy_kwh");
      if (map) consumer.setAgentOptions(map.agents.map((a) => a.agent_id));
      await refresh();
    }
    showPage();
  }
  void boot();

  return { store, overview, analysis, consumer, refresh };
}

function labelled(text: string, el: HTMLElement): HTMLElement {
  const label = document.createElement("label");
  label.className = "labelled";
  label.append(document.createTextNode(text + " "), el);
  return label;
}

if (typeof document !== "undefined" && document.getElementById("app")) {
  createApp(document.getElementById("app")!, new ApiClient());
}
