/** Dashboard view state with change notification. */

export type Page = "overview" | "analysis" | "consumer";

export interface ViewState {
  page: Page;
  scenarioId: string | null;
  referenceId: string | null;
  windowFrom: string | null; // ISO instants; null = whole scenario
  windowTo: string | null;
  agentId: string | null;
  mapMetric: string;
  publicationMode: boolean;
}

type Listener = (state: ViewState) => void;

export class Store {
  private state: ViewState = {
    page: "overview",
    scenarioId: null,
    referenceId: null,
    windowFrom: null,
    windowTo: null,
    agentId: null,
    mapMetric: "total_expenses_dkk",
    publicationMode: false,
  };
  private listeners: Listener[] = [];

  get(): ViewState {
    return this.state;
  }

  update(patch: Partial<ViewState>): void {
    this.state = { ...this.state, ...patch };
    for (const listener of this.listeners) listener(this.state);
  }

  subscribe(listener: Listener): void {
    this.listeners.push(listener);
  }
}
