/** Pure DOM rendering from service payloads.
 *
 * Everything shown is data the service sent — formula payloads are rendered
 * verbatim in their canonical text form, and no function here re-derives
 * feasibility, beliefs, or menus on the client side.
 */

import type {
  EventRecord,
  PendingQuestion,
  SessionStatus,
  WireAction,
  WorldView,
} from "./types.js";

export function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

/** One-line label for an action, quoting the canonical payload text. */
export function describeAction(action: WireAction): string {
  switch (action.kind) {
    case "execute":
      return `execute ${action.payload}`;
    case "intent":
      return `announce intent ${action.payload}`;
    case "ask":
      return `ask ${action.askee ?? "?"}: ${action.payload}`;
    case "explain": {
      const base = `explain ${action.payload}`;
      return action.answered ? `${base} — answer: ${action.answered}` : base;
    }
    default:
      return `${action.kind} ${action.payload}`;
  }
}

const KIND_HEADINGS: Record<string, string> = {
  execute: "Execute",
  explain: "Explain",
  intent: "Announce intent",
  ask: "Ask",
};

/** Action menu: one button per server-offered candidate, nothing else. */
export function renderMenu(
  container: HTMLElement,
  candidates: WireAction[],
  disabled: boolean,
  onSubmit: (action: WireAction) => void,
): void {
  container.replaceChildren();
  const byKind = new Map<string, WireAction[]>();
  for (const candidate of candidates) {
    const group = byKind.get(candidate.kind) ?? [];
    group.push(candidate);
    byKind.set(candidate.kind, group);
  }
  for (const [kind, group] of byKind) {
    const section = el("div", "menu-group");
    section.append(el("h3", "menu-heading", KIND_HEADINGS[kind] ?? kind));
    for (const candidate of group) {
      const button = el("button", "candidate", describeAction(candidate));
      button.dataset["kind"] = candidate.kind;
      button.dataset["payload"] = candidate.payload;
      if (candidate.askee) button.dataset["askee"] = candidate.askee;
      button.disabled = disabled;
      button.addEventListener("click", () => onSubmit(candidate));
      section.append(button);
    }
    container.append(section);
  }
  if (candidates.length === 0) {
    container.append(
      el("p", "menu-empty", "No actions available right now — the engine may move next."),
    );
  }
}

const ANSWER_LABELS: Array<{ label: string; answered: string }> = [
  { label: "yes", answered: "yes" },
  { label: "no", answered: "no" },
  { label: "unsure", answered: "unknown" },
];

/** Pending question panel.
 *
 * All three reply buttons are shown, but only the reply the service offered
 * (the one consistent with the played agent's beliefs — agents cannot lie)
 * is enabled; clicking it posts that canonical answer action.
 */
export function renderQuestion(
  container: HTMLElement,
  pending: PendingQuestion | null,
  disabled: boolean,
  onAnswer: (answer: WireAction) => void,
): void {
  container.replaceChildren();
  if (!pending) {
    container.hidden = true;
    return;
  }
  container.hidden = false;
  container.append(
    el("p", "question-text", `${pending.asker} asks: ${pending.payload}`),
  );
  const answer = pending.answer;
  const row = el("div", "answer-row");
  for (const { label, answered } of ANSWER_LABELS) {
    const button = el("button", "answer", label);
    button.dataset["answered"] = answered;
    const offered = answer !== null && answer.answered === answered;
    button.disabled = disabled || !offered;
    if (!offered) {
      button.title = "not consistent with your agent's current beliefs";
    } else {
      button.addEventListener("click", () => onAnswer(answer));
    }
    row.append(button);
  }
  container.append(row);
}

/** The played agent's designated worlds with their feasible subplans. */
export function renderWorlds(container: HTMLElement, worlds: WorldView[]): void {
  container.replaceChildren();
  for (const world of worlds) {
    const card = el("div", "world-card");
    const header = el("div", "world-header", `world ${world.id}`);
    if (world.most_plausible) {
      header.append(el("span", "world-badge", "most plausible"));
    }
    card.append(header);
    if (world.subplans.length === 0) {
      card.append(el("p", "subplan-empty", "no feasible subplans"));
    } else {
      const list = el("ul", "subplan-list");
      for (const subplan of world.subplans) {
        const text = Object.keys(subplan)
          .sort()
          .map((variable) => `${variable}=${subplan[variable]}`)
          .join(", ");
        list.append(el("li", "subplan", text));
      }
      card.append(list);
    }
    container.append(card);
  }
}

/** Append any events newer than what the feed already shows. */
export function appendFeed(
  list: HTMLElement,
  events: EventRecord[],
  human: string,
): void {
  const seen = new Set(
    Array.from(list.children).map((child) => (child as HTMLElement).dataset["seq"]),
  );
  for (const event of events) {
    const key = String(event.seq);
    if (seen.has(key)) continue;
    const item = el(
      "li",
      event.actor === human ? "feed-entry human" : "feed-entry engine",
      `#${event.seq} ${event.actor}: ${describeAction(event)}`,
    );
    item.dataset["seq"] = key;
    list.append(item);
    seen.add(key);
  }
}

export function renderBanner(
  banner: HTMLElement,
  status: SessionStatus,
  failureExplanation: string | null,
): void {
  banner.className = `banner ${status}`;
  if (status === "running") {
    banner.textContent = "running";
  } else if (status === "success") {
    banner.textContent = "task completed — success";
  } else {
    banner.textContent = failureExplanation
      ? `task failed — ${failureExplanation}`
      : "task failed";
  }
}

export function renderExecuted(container: HTMLElement, executed: string[]): void {
  container.replaceChildren();
  for (const tp of executed) {
    container.append(el("span", "chip", tp));
  }
  if (executed.length === 0) {
    container.append(el("span", "chip-empty", "nothing executed yet"));
  }
}

export function renderLastEngine(
  container: HTMLElement,
  event: EventRecord | null,
): void {
  container.textContent = event
    ? `last engine action: ${event.actor} — ${describeAction(event)}`
    : "last engine action: —";
}

export function setStale(indicator: HTMLElement, stale: boolean): void {
  indicator.hidden = !stale;
}
