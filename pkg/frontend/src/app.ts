/** Console controller: one live session, server-authoritative, no optimism.
 *
 * The app polls the event stream, re-renders the human's view whenever the
 * engine acts, and submits only actions the server itself offered.  A failed
 * poll flips a visible stale indicator instead of guessing at state.
 */

import { ApiClient, ApiError, type FetchLike } from "./api.js";
import {
  appendFeed,
  el,
  renderBanner,
  renderExecuted,
  renderLastEngine,
  renderMenu,
  renderQuestion,
  renderWorlds,
  setStale,
} from "./render.js";
import type {
  EventRecord,
  PendingQuestion,
  SessionStatus,
  SessionSummary,
  WireAction,
} from "./types.js";

export interface AppOptions {
  fetchFn?: FetchLike;
  /** Poll interval in ms; 0 disables the timer so tests can drive pollOnce(). */
  pollMs?: number;
  defaultServer?: string;
}

const BUILTIN_SCENARIOS = ["case1", "case1_ordering", "case2", "case3"];

export class ConsoleApp {
  private client: ApiClient | null = null;
  private sessionId: string | null = null;
  private human = "";
  private lastSeq = 0;
  private inflight = false;
  private status: SessionStatus = "running";
  private pending: PendingQuestion | null = null;
  private candidates: WireAction[] = [];
  private lastEngineEvent: EventRecord | null = null;
  private lastEngineExplain: EventRecord | null = null;
  private timer: ReturnType<typeof setTimeout> | null = null;

  // Skeleton references (built in constructor).
  private readonly serverInput: HTMLInputElement;
  private readonly scenarioSelect: HTMLSelectElement;
  private readonly humanInput: HTMLInputElement;
  private readonly engineSelect: HTMLSelectElement;
  private readonly seedInput: HTMLInputElement;
  private readonly attachInput: HTMLInputElement;
  private readonly sessionLabel: HTMLElement;
  private readonly banner: HTMLElement;
  private readonly staleIndicator: HTMLElement;
  private readonly errorBox: HTMLElement;
  private readonly errorText: HTMLElement;
  private readonly questionPanel: HTMLElement;
  private readonly menuPanel: HTMLElement;
  private readonly lastEnginePanel: HTMLElement;
  private readonly feedList: HTMLElement;
  private readonly worldsPanel: HTMLElement;
  private readonly executedPanel: HTMLElement;

  constructor(
    private readonly root: HTMLElement,
    private readonly opts: AppOptions = {},
  ) {
    root.replaceChildren();

    const connect = el("section", "connect");
    connect.id = "connect-panel";
    this.serverInput = el("input");
    this.serverInput.id = "server-url";
    this.serverInput.value = opts.defaultServer ?? "http://127.0.0.1:8000";
    this.scenarioSelect = el("select");
    this.scenarioSelect.id = "scenario-select";
    for (const name of BUILTIN_SCENARIOS) {
      const option = el("option", undefined, name);
      option.value = name;
      this.scenarioSelect.append(option);
    }
    this.humanInput = el("input");
    this.humanInput.id = "human-agent";
    this.humanInput.value = "H";
    this.engineSelect = el("select");
    this.engineSelect.id = "engine-select";
    for (const engine of ["epike", "pike"]) {
      const option = el("option", undefined, engine);
      option.value = engine;
      this.engineSelect.append(option);
    }
    this.seedInput = el("input");
    this.seedInput.id = "seed";
    this.seedInput.type = "number";
    this.seedInput.value = "0";
    const startButton = el("button", "primary", "start session");
    startButton.id = "start-session";
    startButton.addEventListener("click", () => void this.startSession());
    this.attachInput = el("input");
    this.attachInput.id = "attach-id";
    this.attachInput.placeholder = "existing session id";
    const attachButton = el("button", undefined, "attach");
    attachButton.id = "attach-session";
    attachButton.addEventListener("click", () => void this.attachSession());
    connect.append(
      labelled("server", this.serverInput),
      labelled("scenario", this.scenarioSelect),
      labelled("play as", this.humanInput),
      labelled("engine", this.engineSelect),
      labelled("seed", this.seedInput),
      startButton,
      labelled("or", this.attachInput),
      attachButton,
    );

    const statusBar = el("header", "statusbar");
    this.sessionLabel = el("span", "session-label", "no session");
    this.sessionLabel.id = "session-label";
    this.banner = el("span", "banner running");
    this.banner.id = "banner";
    this.staleIndicator = el(
      "span",
      "stale",
      "connection lost — showing stale state",
    );
    this.staleIndicator.id = "stale";
    this.staleIndicator.hidden = true;
    statusBar.append(this.sessionLabel, this.banner, this.staleIndicator);

    this.errorBox = el("div", "error-box");
    this.errorBox.id = "error-box";
    this.errorBox.hidden = true;
    this.errorText = el("span", "error-text");
    this.errorText.id = "error-text";
    const refreshButton = el("button", undefined, "refresh view");
    refreshButton.id = "refresh-view";
    refreshButton.addEventListener("click", () => {
      this.errorBox.hidden = true;
      void this.refreshView();
    });
    this.errorBox.append(this.errorText, refreshButton);

    this.questionPanel = el("section", "question");
    this.questionPanel.id = "question";
    this.questionPanel.hidden = true;

    const columns = el("section", "columns");
    const actionsColumn = el("div", "column");
    actionsColumn.append(el("h2", undefined, "your actions"));
    this.menuPanel = el("div", "menu");
    this.menuPanel.id = "menu";
    actionsColumn.append(this.menuPanel);

    const activityColumn = el("div", "column");
    activityColumn.append(el("h2", undefined, "activity"));
    this.lastEnginePanel = el("div", "last-engine");
    this.lastEnginePanel.id = "last-engine";
    this.feedList = el("ol", "feed");
    this.feedList.id = "feed";
    activityColumn.append(this.lastEnginePanel, this.feedList);

    const beliefColumn = el("div", "column");
    beliefColumn.append(el("h2", undefined, "your worlds"));
    this.worldsPanel = el("div", "worlds");
    this.worldsPanel.id = "worlds";
    beliefColumn.append(this.worldsPanel, el("h2", undefined, "executed"));
    this.executedPanel = el("div", "executed");
    this.executedPanel.id = "executed";
    beliefColumn.append(this.executedPanel);
    columns.append(actionsColumn, activityColumn, beliefColumn);

    root.append(connect, statusBar, this.errorBox, this.questionPanel, columns);
    renderLastEngine(this.lastEnginePanel, null);
  }

  // -- session lifecycle -----------------------------------------------------

  async startSession(): Promise<void> {
    const client = new ApiClient(this.serverInput.value, this.opts.fetchFn);
    try {
      const summary = await client.createSession({
        builtin: this.scenarioSelect.value,
        human: this.humanInput.value,
        engine: this.engineSelect.value,
        seed: Number(this.seedInput.value) || 0,
      });
      await this.enter(client, summary);
    } catch (err) {
      this.showError(err);
    }
  }

  async attachSession(): Promise<void> {
    const client = new ApiClient(this.serverInput.value, this.opts.fetchFn);
    try {
      const summary = await client.summary(this.attachInput.value.trim());
      await this.enter(client, summary);
    } catch (err) {
      this.showError(err);
    }
  }

  private async enter(client: ApiClient, summary: SessionSummary): Promise<void> {
    this.stopTimer();
    this.client = client;
    this.sessionId = summary.id;
    this.human = summary.human;
    this.lastSeq = 0;
    this.status = summary.status;
    this.pending = summary.pending_question;
    this.lastEngineEvent = null;
    this.lastEngineExplain = null;
    this.feedList.replaceChildren();
    this.errorBox.hidden = true;
    this.sessionLabel.textContent = `${summary.name} · session ${summary.id} · playing ${summary.human}`;
    await this.pollOnce();
    await this.refreshView();
    this.schedule();
  }

  // -- polling ----------------------------------------------------------------

  /** One event-stream poll; returns true when new events arrived. */
  async pollOnce(): Promise<boolean> {
    if (!this.client || !this.sessionId) return false;
    try {
      const response = await this.client.events(this.sessionId, this.lastSeq);
      setStale(this.staleIndicator, false);
      this.status = response.status;
      this.pending = response.pending_question;
      this.absorbEvents(response.events);
      this.lastSeq = Math.max(this.lastSeq, response.seq);
      if (response.events.length > 0) {
        await this.refreshView();
        return true;
      }
      this.renderStatus();
      return false;
    } catch {
      setStale(this.staleIndicator, true);
      return false;
    }
  }

  private schedule(): void {
    const pollMs = this.opts.pollMs ?? 800;
    if (pollMs <= 0) return;
    if (this.status !== "running") return;
    this.timer = setTimeout(() => {
      void this.pollOnce().finally(() => this.schedule());
    }, pollMs);
  }

  private stopTimer(): void {
    if (this.timer !== null) {
      clearTimeout(this.timer);
      this.timer = null;
    }
  }

  // -- acting -------------------------------------------------------------------

  async submit(action: WireAction): Promise<void> {
    if (this.inflight || !this.client || !this.sessionId) return;
    this.inflight = true;
    this.renderInteractive();
    try {
      const response = await this.client.act(this.sessionId, {
        kind: action.kind,
        payload: action.payload,
        ...(action.askee !== undefined ? { askee: action.askee } : {}),
        ...(action.answered !== undefined ? { answered: action.answered } : {}),
      });
      this.errorBox.hidden = true;
      this.status = response.status;
      this.absorbEvents(response.events);
      this.inflight = false;
      await this.refreshView();
      if (this.status !== "running") this.stopTimer();
    } catch (err) {
      this.inflight = false;
      this.showError(err);
      this.renderInteractive();
    }
  }

  // -- rendering ------------------------------------------------------------------

  /** Re-fetch the whole human view and paint every panel from it. */
  async refreshView(): Promise<void> {
    if (!this.client || !this.sessionId) return;
    try {
      const view = await this.client.view(this.sessionId);
      setStale(this.staleIndicator, false);
      this.status = view.status;
      this.pending = view.pending_question;
      this.candidates = view.candidates;
      this.lastSeq = Math.max(this.lastSeq, view.seq);
      renderWorlds(this.worldsPanel, view.worlds);
      renderExecuted(this.executedPanel, view.executed);
      this.renderInteractive();
      this.renderStatus();
    } catch {
      setStale(this.staleIndicator, true);
    }
  }

  private absorbEvents(events: EventRecord[]): void {
    appendFeed(this.feedList, events, this.human);
    for (const event of events) {
      this.lastSeq = Math.max(this.lastSeq, event.seq);
      if (event.actor !== this.human) {
        this.lastEngineEvent = event;
        if (event.kind === "explain") this.lastEngineExplain = event;
      }
    }
    renderLastEngine(this.lastEnginePanel, this.lastEngineEvent);
  }

  private renderInteractive(): void {
    renderMenu(this.menuPanel, this.candidates, this.inflight, (action) =>
      void this.submit(action),
    );
    renderQuestion(this.questionPanel, this.pending, this.inflight, (answer) =>
      void this.submit(answer),
    );
  }

  private renderStatus(): void {
    renderBanner(
      this.banner,
      this.status,
      this.lastEngineExplain ? this.lastEngineExplain.payload : null,
    );
  }

  private showError(err: unknown): void {
    const detail =
      err instanceof ApiError ? err.message : `unexpected error: ${String(err)}`;
    this.errorText.textContent = detail;
    this.errorBox.hidden = false;
  }
}

function labelled(text: string, control: HTMLElement): HTMLElement {
  const wrapper = el("label", "field");
  wrapper.append(el("span", "field-name", text), control);
  return wrapper;
}

export function mountApp(root: HTMLElement, opts: AppOptions = {}): ConsoleApp {
  return new ConsoleApp(root, opts);
}
