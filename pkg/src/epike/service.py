"""HTTP session service for interactive plan execution.

One endpoint family per concern: create a session from a scenario with one
agent handed to a human, fetch the human's current epistemic view (designated
worlds with their feasible subplans, the candidate-action menu, any question
waiting for an answer), submit a human action, page through the event stream,
and close the session.

Every non-human agent runs a live engine session inside the service. After
session creation and after every applied action the service runs one engine
poll cycle — exactly the round-based polling of the offline execution loop —
so engine reactions (adaptations, explanations, questions) land in the event
stream before the next fetch. The service is a local tool: no authentication,
state lives in process memory.
"""

from __future__ import annotations

import threading
import uuid
from typing import Mapping, Optional

from fastapi import FastAPI, HTTPException
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field

from . import planlib as pl
from .actions import (
    KIND_ASK,
    KIND_EXECUTE,
    KIND_EXPLAIN,
    KIND_INTENT,
    KIND_NOOP,
    PointedAction,
    wire_decode,
    wire_encode,
)
from .baseline import PikeSession
from .errors import EpikeError, ScenarioError
from .executor import AgentSession, candidate_actions
from .harness import (
    AGENT_KIND_BASELINE,
    AGENT_KIND_ENGINE,
    Scenario,
    apply_action_to_ground,
    builtin_scenario_path,
    load_scenario,
    scenario_from_json,
    validate_scenario,
)
from .kb import kb_consistent

#: Hard cap on engine actions applied by a single poll cycle, so a
#: pathological scenario cannot wedge the service in an endless exchange.
CYCLE_CAP = 100

HUMAN_MENU_KINDS = (KIND_EXECUTE, KIND_INTENT, KIND_EXPLAIN, KIND_ASK)

STATUS_RUNNING = "running"
STATUS_SUCCESS = "success"
STATUS_FAILURE = "failure"


class CreateSessionRequest(BaseModel):
    scenario: Optional[dict] = None
    builtin: Optional[str] = None
    human: str
    engine: str = AGENT_KIND_ENGINE
    seed: int = 0
    iteration_cap: int = Field(default=1000, ge=1)
    horizon: int = Field(default=3, ge=1)
    time_budget_ms: Optional[float] = Field(default=None, gt=0)


class ActRequest(BaseModel):
    kind: str
    payload: str = ""
    askee: Optional[str] = None
    answered: Optional[str] = None


class InteractiveSession:
    """Server-side state of one interactive run."""

    def __init__(self, scenario: Scenario, human: str, request: CreateSessionRequest):
        if human not in scenario.agents:
            raise ScenarioError(f"human agent {human!r} is not one of {list(scenario.agents)}")
        if request.engine not in (AGENT_KIND_ENGINE, AGENT_KIND_BASELINE):
            raise ScenarioError(
                f"engine kind must be {AGENT_KIND_ENGINE!r} or {AGENT_KIND_BASELINE!r},"
                f" got {request.engine!r}"
            )
        self.id = uuid.uuid4().hex[:12]
        self.scenario = scenario
        self.human = human
        self.lock = threading.Lock()
        self.events: list[dict] = []
        self.history: list[str] = []
        self.ground_kb = scenario.ground_kb()
        self.pending_question: Optional[dict] = None
        self.closed = False

        budgets = dict(
            iteration_cap=request.iteration_cap,
            time_budget_ms=request.time_budget_ms,
            horizon=request.horizon,
        )
        self.sessions: dict[str, AgentSession] = {}
        for i, agent in enumerate(scenario.agents):
            cls = AgentSession
            if agent != human and request.engine == AGENT_KIND_BASELINE:
                cls = PikeSession
            self.sessions[agent] = cls(
                agent,
                scenario.initial_for(agent),
                scenario.lib,
                seed=request.seed + i,
                **budgets,
            )
        # Scripted roles are not honored interactively: the human plays their
        # part, and every other agent runs live.
        self.engine_cycle()

    # -- helpers ---------------------------------------------------------------

    @property
    def seq(self) -> int:
        return len(self.events)

    def status(self) -> str:
        if not kb_consistent(self.ground_kb):
            return STATUS_FAILURE
        if pl.success_holds(self.ground_kb, self.scenario.lib) and all(
            s.believes_common_success() for s in self.sessions.values()
        ):
            return STATUS_SUCCESS
        return STATUS_RUNNING

    def _engines(self) -> list[str]:
        return [a for a in self.scenario.agents if a != self.human]

    def _apply(self, act: PointedAction, actor: str) -> dict:
        """Apply one action to the ground truth and broadcast it to everyone."""
        self.ground_kb = apply_action_to_ground(self.ground_kb, self.scenario.lib, act, self.history)
        record = dict(wire_encode(act))
        record["seq"] = self.seq + 1
        record["actor"] = actor
        self.events.append(record)

        reactions: dict[str, Optional[PointedAction]] = {}
        for agent in self.scenario.agents:
            reactions[agent] = self.sessions[agent].on_observe(act, record["seq"])

        if act.kind == KIND_ASK and act.askee == self.human:
            # The human's session computes the canonical truthful reply; the
            # UI offers it alongside the ordinary menu until it is submitted.
            answer = reactions[self.human]
            self.pending_question = {
                "asker": act.actor,
                "payload": act.payload,
                "seq": record["seq"],
                "answer": wire_encode(answer) if answer is not None else None,
            }
        elif act.kind == KIND_EXPLAIN and act.actor == self.human:
            self.pending_question = None
        return reactions

    def engine_cycle(
        self, proposals: Optional[Mapping[str, Optional[PointedAction]]] = None
    ) -> list[dict]:
        """Let the engines act until they all settle; returns appended events.

        ``proposals`` carries decisions already computed by the observation
        broadcast that triggered this cycle; without them every engine is
        asked afresh. Each applied action is broadcast to all sessions and
        the returned reactions seed the next iteration, mirroring the
        round-based polling of the offline loop (engines in listing order,
        first proposal wins).
        """
        start = self.seq
        engines = self._engines()
        if proposals is None:
            proposals = {a: self.sessions[a].decide() for a in engines}
        for _ in range(CYCLE_CAP):
            act, actor = None, ""
            for agent in engines:
                proposal = proposals.get(agent)
                if proposal is not None and proposal.kind != KIND_NOOP:
                    act, actor = proposal, agent
                    break
            if act is None:
                break
            reactions = self._apply(act, actor)
            proposals = {a: reactions[a] for a in engines}
        return self.events[start:]

    # -- views -----------------------------------------------------------------

    def summary(self) -> dict:
        return {
            "id": self.id,
            "name": self.scenario.name,
            "agents": list(self.scenario.agents),
            "human": self.human,
            "status": self.status(),
            "seq": self.seq,
            "pending_question": self.pending_question,
        }

    def view(self) -> dict:
        session = self.sessions[self.human]
        state = session.state
        min_ids = state.model.min_set(self.human, state.designated)
        worlds = []
        for world in state.model.worlds:
            if world.id not in state.designated:
                continue
            subplans = [sp.as_dict() for sp in pl.feasible_subplans(world.kb, self.scenario.lib)]
            worlds.append(
                {"id": world.id, "most_plausible": world.id in min_ids, "subplans": subplans}
            )
        menu = candidate_actions(state, self.human, HUMAN_MENU_KINDS, self.scenario.lib)
        return {
            **self.summary(),
            "executed": list(self.history),
            "worlds": worlds,
            "candidates": [wire_encode(a) for a in menu],
        }

    def act(self, request: ActRequest) -> dict:
        record = {"kind": request.kind, "actor": self.human, "payload": request.payload}
        if request.askee is not None:
            record["askee"] = request.askee
        if request.answered is not None:
            record["answered"] = request.answered
        try:
            action = wire_decode(record, self.scenario.lib)
        except EpikeError as err:
            raise ScenarioError(f"undecodable action: {err}") from err
        if action.actor != self.human:
            raise ScenarioError(f"action actor {action.actor!r} is not the human agent {self.human!r}")
        if action.kind == KIND_NOOP:
            raise ScenarioError("submitting noop has no effect; fetch the view instead")
        self._check_on_menu(action)
        # A menu execution may still contradict the ground truth (the human's
        # beliefs can be wrong); it is allowed through on purpose, because an
        # inconsistent ground KB is exactly how a run earns its failure verdict.
        applied_at = self.seq + 1
        reactions = self._apply(action, self.human)
        self.engine_cycle({a: reactions[a] for a in self._engines()})
        return {
            "applied_seq": applied_at,
            "events": self.events[applied_at - 1 :],
            "status": self.status(),
        }

    def _check_on_menu(self, action: PointedAction) -> None:
        """Only actions from the human's own candidate menu are accepted.

        This keeps every agent session able to reconcile what it observes:
        the menu never offers an announcement its sender does not believe, so
        an off-menu (e.g. false) explanation cannot strand another session
        with zero surviving worlds mid-broadcast. ``answered`` tags are
        ignored in the comparison so a UI may label replies to questions.
        """
        offers = candidate_actions(
            self.sessions[self.human].state, self.human, HUMAN_MENU_KINDS, self.scenario.lib
        )
        menu = [(a.kind, a.payload, a.askee) for a in offers]
        if self.pending_question and self.pending_question.get("answer"):
            answer = self.pending_question["answer"]
            menu.append((answer["kind"], answer["payload"], answer.get("askee")))
        if (action.kind, action.payload, action.askee) in menu:
            return
        raise ScenarioError(
            f"action {action.kind}:{action.payload!r} is not on the current candidate menu"
        )


def _load_request_scenario(request: CreateSessionRequest) -> Scenario:
    if (request.scenario is None) == (request.builtin is None):
        raise ScenarioError("provide exactly one of 'scenario' (inline object) or 'builtin' (name)")
    if request.builtin is not None:
        return load_scenario(builtin_scenario_path(request.builtin))
    scenario = scenario_from_json(request.scenario)
    validate_scenario(scenario)
    return scenario


def create_app() -> FastAPI:
    app = FastAPI(title="epike session service", version="1.0")
    # The browser console is served as static files from anywhere (or opened
    # straight from disk); the service is a local, unauthenticated tool, so
    # cross-origin requests are simply allowed.
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )
    sessions: dict[str, InteractiveSession] = {}

    @app.exception_handler(EpikeError)
    async def _epike_error(_request, err: EpikeError):
        return JSONResponse(status_code=400, content={"detail": str(err)})

    def get(session_id: str) -> InteractiveSession:
        session = sessions.get(session_id)
        if session is None or session.closed:
            raise HTTPException(status_code=404, detail=f"no session {session_id!r}")
        return session

    @app.post("/sessions", status_code=201)
    def create_session(request: CreateSessionRequest) -> dict:
        scenario = _load_request_scenario(request)
        session = InteractiveSession(scenario, request.human, request)
        sessions[session.id] = session
        with session.lock:
            return session.summary()

    @app.get("/sessions")
    def list_sessions() -> list[dict]:
        return [s.summary() for s in sessions.values() if not s.closed]

    @app.get("/sessions/{session_id}")
    def session_summary(session_id: str) -> dict:
        session = get(session_id)
        with session.lock:
            return session.summary()

    @app.get("/sessions/{session_id}/view")
    def session_view(session_id: str) -> dict:
        session = get(session_id)
        with session.lock:
            return session.view()

    @app.post("/sessions/{session_id}/act")
    def session_act(session_id: str, request: ActRequest) -> dict:
        session = get(session_id)
        with session.lock:
            return session.act(request)

    @app.get("/sessions/{session_id}/events")
    def session_events(session_id: str, after: int = 0) -> dict:
        session = get(session_id)
        with session.lock:
            return {
                "events": [e for e in session.events if e["seq"] > after],
                "seq": session.seq,
                "status": session.status(),
                "pending_question": session.pending_question,
            }

    @app.delete("/sessions/{session_id}")
    def close_session(session_id: str) -> dict:
        session = get(session_id)
        with session.lock:
            session.closed = True
        sessions.pop(session_id, None)
        return {"closed": session_id}

    return app


def serve(port: int = 8000, host: str = "127.0.0.1") -> None:
    """Run the service under uvicorn (blocking)."""
    import uvicorn

    uvicorn.run(create_app(), host=host, port=port, log_level="warning")
