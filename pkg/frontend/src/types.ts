/** Wire-level payloads exchanged with the session service. */

export type ActionKind = "execute" | "explain" | "intent" | "ask" | "noop";

export type SessionStatus = "running" | "success" | "failure";

export interface WireAction {
  kind: ActionKind;
  actor: string;
  payload: string;
  askee?: string;
  answered?: string;
}

export interface EventRecord extends WireAction {
  seq: number;
}

export interface PendingQuestion {
  asker: string;
  payload: string;
  seq: number;
  /** The one reply consistent with the played agent's current beliefs. */
  answer: WireAction | null;
}

export interface WorldView {
  id: string;
  most_plausible: boolean;
  subplans: Record<string, string>[];
}

export interface SessionSummary {
  id: string;
  name: string;
  agents: string[];
  human: string;
  status: SessionStatus;
  seq: number;
  pending_question: PendingQuestion | null;
}

export interface SessionView extends SessionSummary {
  executed: string[];
  worlds: WorldView[];
  candidates: WireAction[];
}

export interface ActRequest {
  kind: ActionKind;
  payload: string;
  askee?: string;
  answered?: string;
}

export interface ActResponse {
  applied_seq: number;
  events: EventRecord[];
  status: SessionStatus;
}

export interface EventsResponse {
  events: EventRecord[];
  seq: number;
  status: SessionStatus;
  pending_question: PendingQuestion | null;
}

export interface CreateSessionBody {
  builtin?: string;
  scenario?: unknown;
  human: string;
  engine?: string;
  seed?: number;
  iteration_cap?: number;
  horizon?: number;
}
