"""Scenario loading, random task generation, and the two-agent ground-truth
simulation loop.

A scenario fixes the plan library, a plausibility model over decision-level
knowledge bases, per-agent initial designated sets, which world is actually
true, and optional scripted action queues. ``run_pair`` instantiates one
session per agent (engine, baseline, or scripted), then drives round-based
polling: every applied action is broadcast to all sessions in the scenario's
agent listing order, each returns its next proposal, the first non-silent
proposal in listing order is applied to the ground truth, and the loop ends
when everyone stays silent. The verdict comes from the ground-truth knowledge
base: failure when it has become inconsistent, success when the task's success
condition holds and every session believes success is common, and hang
otherwise.
"""

from __future__ import annotations

import hashlib
import json
import random
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable, Mapping, Optional, Sequence

from . import constraints as cn
from . import doxastic as dox
from . import planlib as pl
from .actions import KIND_EXECUTE, KIND_INTENT, PointedAction, wire_decode, wire_encode
from .caching import clear_all_caches
from .doxastic import PointedState
from .errors import EpikeError, GenerationError, ScenarioError
from .executor import AgentSession
from .baseline import PikeSession
from .kb import KnowledgeBase, kb_consistent, kb_new

__all__ = [
    "DEFAULT_SCALABILITY_GRID",
    "Scenario",
    "ScriptedSession",
    "RandomTaskParams",
    "RunOutcome",
    "scenario_from_json",
    "scenario_to_json",
    "load_scenario",
    "builtin_scenario_path",
    "validate_scenario",
    "state_fingerprint",
    "generate_random_task",
    "run_pair",
    "replay_trace",
    "run_suite",
    "write_suite_csv",
    "AGENT_KIND_ENGINE",
    "AGENT_KIND_BASELINE",
    "AGENT_KIND_SCRIPTED",
]

SCENARIO_FORMAT = 1

AGENT_KIND_ENGINE = "epike"
AGENT_KIND_BASELINE = "pike"
AGENT_KIND_SCRIPTED = "scripted"


# --- scenario ---------------------------------------------------------------------


@dataclass(frozen=True)
class Scenario:
    """A plan library, a shared plausibility model over decision-level worlds,
    per-agent initial designated sets, and the id of the world that is true."""

    name: str
    lib: pl.PlanLibrary
    model: dox.PlausibilityModel
    ground: str
    designated: Mapping[str, frozenset[str]]
    scripts: Mapping[str, tuple[dict, ...]] = field(default_factory=dict)

    @property
    def agents(self) -> tuple[str, ...]:
        """Polling order: the scenario's agent listing (first agent is ego)."""
        return self.lib.agents

    def initial_for(self, agent: str) -> PointedState:
        """The agent's initial pointed state (its session widens this to the
        agent's full component, so designating the true world gives exactly
        the uncertainty the plausibility relation encodes)."""
        return PointedState(self.model, self.designated[agent])

    @property
    def ground_state(self) -> PointedState:
        return PointedState(self.model, frozenset((self.ground,)))

    def ground_kb(self):
        """The compiled ground-truth knowledge base at time zero."""
        return pl.compile_initial_kb(
            self.lib,
            sorted(self.model.kb(self.ground).constraints, key=cn.print_constraint),
        )


def _edges_from_records(records: Iterable[Mapping], agents: Sequence[str]) -> dict:
    """Edge records {agent, from, to, type: strict|equi} to per-agent pairs.

    A pair (u, v) reads "u is at least as plausible as v"; strict contributes
    one direction, equi both.
    """
    edges: dict[str, list[tuple[str, str]]] = {agent: [] for agent in agents}
    for record in records:
        agent, u, v = record["agent"], record["from"], record["to"]
        kind = record.get("type", "strict")
        if agent not in edges:
            raise ScenarioError(f"edge for unknown agent {agent!r}")
        if kind == "strict":
            edges[agent].append((u, v))
        elif kind == "equi":
            edges[agent].append((u, v))
            edges[agent].append((v, u))
        else:
            raise ScenarioError(f"edge type must be strict or equi, got {kind!r}")
    return edges


def _edges_to_records(model: dox.PlausibilityModel) -> list[dict]:
    """The closed plausibility relation as strict/equi records (no reflexives)."""
    records = []
    for agent in model.frame.agents:
        le = model.frame.le[agent]
        seen = set()
        for u, v in sorted(le):
            if u == v or (u, v) in seen:
                continue
            if (v, u) in le:
                seen.add((v, u))
                a, b = sorted((u, v))
                records.append({"agent": agent, "from": a, "to": b, "type": "equi"})
            else:
                records.append({"agent": agent, "from": u, "to": v, "type": "strict"})
    return records


def scenario_from_json(data: Mapping) -> Scenario:
    if data.get("format") != SCENARIO_FORMAT:
        raise ScenarioError(f"unsupported scenario format {data.get('format')!r}")
    try:
        variables = tuple(
            cn.VariableDecl(v["name"], tuple(v["domain"])) for v in data["variables"]
        )
        timepoints = tuple(
            pl.TimePoint(t["id"], t["owner"], cn.parse_constraint(t["guard"]))
            for t in data["timepoints"]
        )
        orderings = tuple(
            pl.OrderingConstraint(o["pred"], o["succ"], cn.parse_constraint(o["guard"]))
            for o in data.get("orderings", ())
        )
        lib = pl.PlanLibrary(variables, timepoints, orderings, tuple(data["agents"]))
        worlds = [
            dox.World(w["id"], kb_new(variables, [cn.parse_constraint(c) for c in w["constraints"]]))
            for w in data["worlds"]
        ]
        model = dox.mk_model(worlds, lib.agents, _edges_from_records(data.get("edges", ()), lib.agents))
        ground = data["ground"]
        designated = {
            agent: frozenset(data.get("designated", {}).get(agent, (ground,)))
            for agent in lib.agents
        }
        scripts = {
            agent: tuple(dict(r) for r in actions)
            for agent, actions in data.get("scripts", {}).items()
        }
    except ScenarioError:
        raise
    except (KeyError, TypeError, EpikeError) as err:
        raise ScenarioError(f"malformed scenario record: {err}") from err
    scenario = Scenario(str(data.get("name", "unnamed")), lib, model, ground, designated, scripts)
    validate_scenario(scenario)
    return scenario


def scenario_to_json(scenario: Scenario) -> dict:
    lib = scenario.lib
    return {
        "format": SCENARIO_FORMAT,
        "name": scenario.name,
        "agents": list(lib.agents),
        "variables": [{"name": v.name, "domain": list(v.domain)} for v in lib.variables],
        "timepoints": [
            {"id": t.id, "owner": t.owner, "guard": cn.print_constraint(t.guard)}
            for t in lib.timepoints
        ],
        "orderings": [
            {"pred": o.pred, "succ": o.succ, "guard": cn.print_constraint(o.guard)}
            for o in lib.orderings
        ],
        "worlds": [
            {
                "id": w.id,
                "constraints": sorted(cn.print_constraint(c) for c in w.kb.constraints),
            }
            for w in scenario.model.worlds
        ],
        "edges": _edges_to_records(scenario.model),
        "designated": {agent: sorted(scenario.designated[agent]) for agent in lib.agents},
        "ground": scenario.ground,
        "scripts": {agent: list(s) for agent, s in scenario.scripts.items()},
    }


def load_scenario(path: str | Path) -> Scenario:
    with open(path, "r", encoding="utf-8") as fh:
        return scenario_from_json(json.load(fh))


def builtin_scenario_path(name: str) -> Path:
    """Path of a scenario shipped with the package (case1, case1_ordering, ...)."""
    path = Path(__file__).parent / "scenarios" / f"{name}.json"
    if not path.is_file():
        shipped = sorted(p.stem for p in path.parent.glob("*.json"))
        raise ScenarioError(f"no shipped scenario {name!r}; available: {shipped}")
    return path


def validate_scenario(scenario: Scenario) -> list[str]:
    """Structural checks beyond what the constructors enforce; returns notes."""
    notes = []
    model = scenario.model
    world_ids = {w.id for w in model.worlds}
    if scenario.ground not in world_ids:
        raise ScenarioError(f"ground world {scenario.ground!r} is not in the model")
    if len(scenario.lib.agents) != 2:
        raise ScenarioError("the execution loop needs exactly 2 agents")
    for world in model.worlds:
        # Worlds are decision-level; this raises on time-point variables.
        pl.compile_initial_kb(scenario.lib, sorted(world.kb.constraints, key=cn.print_constraint))
    for agent in scenario.lib.agents:
        designated = scenario.designated.get(agent)
        if not designated:
            raise ScenarioError(f"agent {agent!r} has no designated worlds")
        missing = designated - world_ids
        if missing:
            raise ScenarioError(f"designated worlds {sorted(missing)} of {agent!r} not in the model")
        reachable = frozenset().union(*(model.cc(agent, w) for w in designated))
        if scenario.ground not in reachable:
            raise ScenarioError(
                f"agent {agent!r} cannot consider the true world possible "
                f"(ground {scenario.ground!r} outside its designated components)"
            )
        notes.append(f"{agent}: {len(reachable)} world(s) considered possible initially")
    feasible = pl.feasible_subplans(scenario.ground_kb(), scenario.lib)
    if not feasible:
        raise ScenarioError("the true world admits no feasible subplan")
    notes.append(f"{len(feasible)} feasible subplan(s) in the true world")
    for agent, actions in scenario.scripts.items():
        if agent not in scenario.lib.agents:
            raise ScenarioError(f"scripted agent {agent!r} is not in the scenario")
        for record in actions:
            decoded = wire_decode(record, scenario.lib)  # raises on malformed records
            if decoded.actor != agent:
                raise ScenarioError(
                    f"script for {agent!r} contains an action by {decoded.actor!r}"
                )
    return notes


def state_fingerprint(state: PointedState) -> str:
    """Stable digest of a pointed state (world KBs, relations, designated)."""
    payload = {
        "worlds": [
            {"id": w.id, "constraints": sorted(map(cn.print_constraint, w.kb.constraints))}
            for w in sorted(state.model.worlds, key=lambda w: w.id)
        ],
        "edges": {
            agent: sorted(state.model.frame.le[agent])
            for agent in state.model.frame.agents
        },
        "designated": sorted(state.designated),
    }
    blob = json.dumps(payload, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()


# --- sessions ---------------------------------------------------------------------


class ScriptedSession:
    """Plays a fixed queue of actions, one per opportunity, then stays silent.

    The head of the queue is proposed at every poll and removed only when the
    session observes it actually applied, so being passed over costs nothing.
    """

    def __init__(self, ego: str, script: Sequence[Mapping], lib: pl.PlanLibrary):
        self.ego = ego
        self.lib = lib
        self.queue = [wire_decode(dict(r), lib) for r in script]
        self.surprised = False

    def decide(self) -> Optional[PointedAction]:
        return self.queue[0] if self.queue else None

    def on_observe(self, action: PointedAction, seq: Optional[int] = None) -> Optional[PointedAction]:
        if (
            self.queue
            and action.actor == self.ego
            and wire_encode(action) == wire_encode(self.queue[0])
        ):
            self.queue.pop(0)
        return self.decide()

    def believes_success(self) -> bool:
        return True  # no belief state: never the reason a verdict is withheld

    def believes_common_success(self) -> bool:
        return True


def _make_session(kind: str, agent: str, scenario: Scenario, budgets: Mapping, seed: int):
    if kind == AGENT_KIND_SCRIPTED:
        return ScriptedSession(agent, scenario.scripts.get(agent, ()), scenario.lib)
    cls = {AGENT_KIND_ENGINE: AgentSession, AGENT_KIND_BASELINE: PikeSession}.get(kind)
    if cls is None:
        raise ScenarioError(f"unknown agent kind {kind!r} (expected epike, pike, or scripted)")
    return cls(
        agent,
        scenario.initial_for(agent),
        scenario.lib,
        iteration_cap=int(budgets.get("iteration_cap", 1000)),
        time_budget_ms=budgets.get("time_budget_ms"),
        horizon=int(budgets.get("horizon", 3)),
        seed=seed,
    )


# --- the execution loop -------------------------------------------------------------


@dataclass
class RunOutcome:
    verdict: str  # success | failure | hang
    trace: list[dict]  # {seq, actor, kind, payload, elapsed_ms} per applied action
    callbacks: list[dict]  # {agent, ms} per session callback, in call order
    acted_first: list[str]  # actor of each round's applied action
    surprised: dict[str, bool]
    wall_ms: float
    rounds: int
    fingerprints: list[dict] = field(default_factory=list)
    # One {agent: state digest} snapshot per broadcast action, taken after
    # every session has observed it; replaying the trace reproduces them.


def _session_fingerprints(sessions: Mapping[str, object], agents: Sequence[str]) -> dict:
    return {
        agent: state_fingerprint(sessions[agent].state)
        for agent in agents
        if hasattr(sessions[agent], "state")
    }


def apply_action_to_ground(
    ground_kb: KnowledgeBase,
    lib: pl.PlanLibrary,
    act: PointedAction,
    history: list[str],
) -> KnowledgeBase:
    """Fold one applied action into the ground-truth knowledge base.

    Executions are recorded against the running ``history`` (mutated in
    place), intent announcements add their constraint, and pure
    communication (explain/ask/noop) leaves the ground truth untouched.
    """
    if act.kind == KIND_EXECUTE:
        kb = pl.record_execution(ground_kb, lib, act.payload, history)
        history.append(act.payload)
        return kb
    if act.kind == KIND_INTENT:
        return ground_kb.add(cn.parse_constraint(act.payload))
    return ground_kb


def run_pair(
    scenario: Scenario,
    agent_kinds: Sequence[str] | Mapping[str, str],
    *,
    seed: int = 0,
    iteration_cap: int = 1000,
    time_budget_ms: Optional[float] = None,
    horizon: int = 3,
    timeout_ms: float = 300_000.0,
    max_rounds: int = 200,
    latency_randomized: bool = False,
    hang_mitigation: bool = False,
    fresh_caches: bool = True,
) -> RunOutcome:
    """Execute one scenario with one session per agent and judge the outcome.

    ``agent_kinds`` maps each scenario agent (or positionally, the agents in
    listing order) to "epike", "pike", or "scripted". The first-listed agent
    is polled first each round; ``latency_randomized`` replaces that fixed
    priority with a seeded shuffle per round. ``hang_mitigation`` re-polls
    engine sessions with waiting off the menu whenever the run would otherwise
    end without success, letting them surface their next-best concrete action.
    """
    agents = scenario.agents
    if not isinstance(agent_kinds, Mapping):
        if len(agent_kinds) != len(agents):
            raise ScenarioError("one agent kind per scenario agent is required")
        agent_kinds = dict(zip(agents, agent_kinds))
    if fresh_caches:
        clear_all_caches()

    budgets = {
        "iteration_cap": iteration_cap,
        "time_budget_ms": time_budget_ms,
        "horizon": horizon,
    }
    sessions = {
        agent: _make_session(agent_kinds[agent], agent, scenario, budgets, seed + i)
        for i, agent in enumerate(agents)
    }
    poll_rng = random.Random(seed ^ 0x5CE9A210)

    ground_kb = scenario.ground_kb()
    history: list[str] = []
    trace: list[dict] = []
    callbacks: list[dict] = []
    acted_first: list[str] = []
    fingerprints: list[dict] = []
    started = time.perf_counter()
    rounds = 0
    timed_out = False

    def order() -> list[str]:
        listing = list(agents)
        if latency_randomized:
            poll_rng.shuffle(listing)
        return listing

    def poll(callback: Callable) -> tuple[Optional[PointedAction], str, float]:
        """Ask every session in polling order; keep the first proposal."""
        act, actor, ms_first = None, "", 0.0
        for agent in order():
            t0 = time.perf_counter()
            proposal = callback(sessions[agent])
            ms = (time.perf_counter() - t0) * 1000.0
            callbacks.append({"agent": agent, "ms": ms})
            if proposal is not None and act is None:
                act, actor, ms_first = proposal, agent, ms
        return act, actor, ms_first

    def success_reached() -> bool:
        return pl.success_holds(ground_kb, scenario.lib) and all(
            s.believes_common_success() for s in sessions.values()
        )

    def mitigate() -> tuple[Optional[PointedAction], str, float]:
        """Optional second chance: engines re-decide with waiting forbidden."""
        if not hang_mitigation or not kb_consistent(ground_kb) or success_reached():
            return None, "", 0.0
        return poll(
            lambda s: s.decide(strip_noop=True) if isinstance(s, AgentSession) else None
        )

    # Opening round: every session says what it would do before anything happens.
    act, actor, decision_ms = poll(lambda s: s.decide())
    if act is None:
        act, actor, decision_ms = mitigate()

    seq = 0
    while act is not None:
        seq += 1
        rounds += 1
        acted_first.append(actor)
        ground_kb = apply_action_to_ground(ground_kb, scenario.lib, act, history)
        record = dict(wire_encode(act))
        record.update({"seq": seq, "actor": actor, "elapsed_ms": round(decision_ms, 3)})
        trace.append(record)

        if (time.perf_counter() - started) * 1000.0 > timeout_ms or rounds >= max_rounds:
            timed_out = True
            break

        observed = act
        act, actor, decision_ms = poll(lambda s: s.on_observe(observed, seq))
        fingerprints.append(_session_fingerprints(sessions, agents))
        if act is None:
            act, actor, decision_ms = mitigate()

    if not kb_consistent(ground_kb):
        verdict = "failure"
    elif not timed_out and success_reached():
        verdict = "success"
    else:
        verdict = "hang"

    return RunOutcome(
        verdict=verdict,
        trace=trace,
        callbacks=callbacks,
        acted_first=acted_first,
        surprised={a: bool(getattr(s, "surprised", False)) for a, s in sessions.items()},
        wall_ms=(time.perf_counter() - started) * 1000.0,
        rounds=rounds,
        fingerprints=fingerprints,
    )


def replay_trace(
    scenario: Scenario,
    agent_kinds: Sequence[str] | Mapping[str, str],
    trace: Sequence[Mapping],
    *,
    seed: int = 0,
    iteration_cap: int = 1000,
    time_budget_ms: Optional[float] = None,
    horizon: int = 3,
    fresh_caches: bool = True,
) -> list[dict]:
    """Feed a logged trace through fresh sessions; return per-step fingerprints.

    The returned list parallels the trace: entry i holds every belief-holding
    session's state digest after observing trace record i. Replaying a run's
    own trace with the same agent kinds reproduces ``RunOutcome.fingerprints``
    (belief states depend only on what was observed, never on search internals).
    """
    agents = scenario.agents
    if not isinstance(agent_kinds, Mapping):
        if len(agent_kinds) != len(agents):
            raise ScenarioError("one agent kind per scenario agent is required")
        agent_kinds = dict(zip(agents, agent_kinds))
    if fresh_caches:
        clear_all_caches()
    budgets = {
        "iteration_cap": iteration_cap,
        "time_budget_ms": time_budget_ms,
        "horizon": horizon,
    }
    sessions = {
        agent: _make_session(agent_kinds[agent], agent, scenario, budgets, seed + i)
        for i, agent in enumerate(agents)
    }
    snapshots = []
    for record in trace:
        action = wire_decode(record, scenario.lib)
        for agent in agents:
            sessions[agent].on_observe(action, record.get("seq"))
        snapshots.append(_session_fingerprints(sessions, agents))
    return snapshots


# --- random task generation -----------------------------------------------------


@dataclass(frozen=True)
class RandomTaskParams:
    num_variables: int = 3
    num_orders: int = 2
    num_constraints: int = 2
    diff: int = 0
    domain_size: int = 2
    seed: int = 0

    def __post_init__(self) -> None:
        if self.num_variables < 1:
            raise ScenarioError("at least one decision variable is required")
        if self.domain_size < 2:
            raise ScenarioError("domains need at least two values")
        if not 0 <= self.diff <= 3:
            raise ScenarioError("diff must lie in [0, 3]")
        if self.diff > self.num_constraints:
            raise ScenarioError("diff cannot exceed the number of constraints")
        if self.num_orders < 0 or self.num_constraints < 0:
            raise ScenarioError("counts must be non-negative")


GENERATION_RETRIES = 40


def generate_random_task(params: RandomTaskParams) -> Scenario:
    """A random sequential task: per-value time points and a variable chain.

    The true world carries ``num_constraints`` decision constraints, all
    satisfied by a hidden solution assignment, so the task is always solvable.
    The second agent's plausibility order is a ladder of ``diff`` additional
    worlds, each hiding (or negating) one more of those constraints, with the
    fully tampered world most plausible; diff = 0 collapses both agents to one
    shared world.  Model size therefore grows with the belief difference.
    """
    last_error = "generation failed"
    for attempt in range(GENERATION_RETRIES):
        rng = random.Random(params.seed * 1_000_003 + attempt)
        scenario = _try_generate(params, rng)
        if scenario is None:
            last_error = "sampled constraint set was degenerate"
            continue
        try:
            validate_scenario(scenario)
        except ScenarioError as err:
            last_error = str(err)
            continue
        return scenario
    raise GenerationError(
        f"could not generate a valid task for {params} after {GENERATION_RETRIES} tries: {last_error}"
    )


def _try_generate(params: RandomTaskParams, rng: random.Random) -> Optional[Scenario]:
    agents = ("A", "B")
    variables = tuple(
        cn.VariableDecl(f"v{i}", tuple(f"d{j}" for j in range(params.domain_size)))
        for i in range(params.num_variables)
    )
    timepoints = tuple(
        pl.TimePoint(f"e_{v.name}_{value}", rng.choice(agents), cn.Assign(v.name, value))
        for v in variables
        for value in v.domain
    )

    # Ordering chain: consecutive variables' time points, exact value pairs.
    links = []
    for i in range(len(variables) - 1):
        pred_var, succ_var = variables[i], variables[i + 1]
        for a in pred_var.domain:
            for b in succ_var.domain:
                links.append(
                    pl.OrderingConstraint(
                        f"e_{pred_var.name}_{a}",
                        f"e_{succ_var.name}_{b}",
                        cn.And((cn.Assign(pred_var.name, a), cn.Assign(succ_var.name, b))),
                    )
                )
    orderings = tuple(links[: params.num_orders])

    solution = {v.name: rng.choice(v.domain) for v in variables}
    constraints: list[cn.Constraint] = []
    for _ in range(params.num_constraints):
        anchor = rng.choice(variables)
        clause: cn.Constraint
        if rng.random() < 0.5:
            # Unit clause pinning the anchor to its solution value: hiding or
            # negating one of these gives the misinformed agent a decisive,
            # surprise-free wrong move instead of a recoverable disjunction.
            clause = cn.Assign(anchor.name, solution[anchor.name])
        else:
            other = rng.choice(variables)
            clause = cn.Or(
                (
                    cn.Assign(anchor.name, solution[anchor.name]),
                    cn.Assign(other.name, rng.choice(other.domain)),
                )
            )
        constraints.append(clause)

    lib = pl.PlanLibrary(variables, timepoints, orderings, agents)
    true_kb = kb_new(variables, constraints)
    name = f"random-{params.seed}"
    if params.diff == 0:
        model = dox.mk_model([dox.World("w1", true_kb)], agents, {})
        designated = {a: frozenset(("w1",)) for a in agents}
        return Scenario(name, lib, model, "w1", designated)

    # Plausibility ladder: rung j tampers with the first j sampled constraints,
    # so B's most plausible world differs from the truth on all `diff` of them
    # and the model grows by one world per unit of belief difference.
    hidden = rng.sample(range(len(constraints)), min(params.diff, len(constraints)))
    negated = {i: rng.random() < 0.5 for i in hidden}  # tamper mode, fixed per constraint
    worlds = [dox.World("w1", true_kb)]
    for depth in range(1, len(hidden) + 1):
        tampered = set(hidden[:depth])
        rung: list[cn.Constraint] = []
        for i, c in enumerate(constraints):
            if i not in tampered:
                rung.append(c)
            elif negated[i]:
                rung.append(cn.Not(c))  # actively believed false
        rung_kb = kb_new(variables, rung)
        if not kb_consistent(rung_kb):
            return None
        worlds.append(dox.World(f"w{depth + 1}", rung_kb))
    chain = [(later.id, earlier.id) for earlier, later in zip(worlds, worlds[1:])]
    model = dox.mk_model(worlds, agents, {"B": chain})
    designated = {a: frozenset(("w1",)) for a in agents}
    return Scenario(name, lib, model, "w1", designated)


# --- suites -------------------------------------------------------------------------


#: Default condition grid for scalability sweeps: task size crossed with the
#: number of constraints the agents differ on.  Callback-runtime trends are
#: read along both axes of this grid.
DEFAULT_SCALABILITY_GRID = tuple(
    {"num_variables": nv, "num_orders": 2, "num_constraints": 3, "diff": diff}
    for nv in (2, 3, 4)
    for diff in (0, 1, 2, 3)
)


def run_suite(
    grid: Iterable[Mapping],
    repetitions: int = 2,
    *,
    cases: int = 10,
    budgets: Optional[Mapping] = None,
    pairings: Sequence[Sequence[str]] = (("epike", "epike"), ("pike", "pike")),
) -> list[dict]:
    """Run every grid condition x pairing x case x repetition; return metrics.

    Each grid entry holds RandomTaskParams fields; ``seed`` (default 0) is the
    base task seed, ``cases`` distinct tasks are generated per condition, and
    each task runs ``repetitions`` times under varying run seeds. Rows report
    success/failure/hang rates and the mean per-callback runtime in
    milliseconds.
    """
    budgets = dict(budgets or {})
    rows = []
    for condition in grid:
        params_base = {k: v for k, v in condition.items() if k != "seed"}
        base_seed = int(condition.get("seed", 0))
        for pairing in pairings:
            tally = {"success": 0, "failure": 0, "hang": 0}
            callback_ms: list[float] = []
            for case in range(cases):
                params = RandomTaskParams(seed=base_seed + case, **params_base)
                scenario = generate_random_task(params)
                for rep in range(repetitions):
                    outcome = run_pair(
                        scenario,
                        list(pairing),
                        seed=base_seed + 1000 * case + rep,
                        iteration_cap=int(budgets.get("iteration_cap", 1000)),
                        time_budget_ms=budgets.get("time_budget_ms"),
                        horizon=int(budgets.get("horizon", 3)),
                        timeout_ms=float(budgets.get("timeout_ms", 300_000.0)),
                        max_rounds=int(budgets.get("max_rounds", 200)),
                    )
                    tally[outcome.verdict] += 1
                    callback_ms.extend(c["ms"] for c in outcome.callbacks)
            total = max(1, cases * repetitions)
            rows.append(
                {
                    **{k: condition.get(k) for k in sorted(condition)},
                    "agents": "+".join(pairing),
                    "runs": cases * repetitions,
                    "success_rate": tally["success"] / total,
                    "failure_rate": tally["failure"] / total,
                    "hang_rate": tally["hang"] / total,
                    "mean_callback_ms": (
                        sum(callback_ms) / len(callback_ms) if callback_ms else 0.0
                    ),
                }
            )
    return rows


def write_suite_csv(rows: Sequence[Mapping], path: str | Path) -> None:
    import csv

    rows = list(rows)
    if not rows:
        Path(path).write_text("", encoding="utf-8")
        return
    fields = list(rows[0].keys())
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.DictWriter(fh, fieldnames=fields)
        writer.writeheader()
        writer.writerows(rows)
