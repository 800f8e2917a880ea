"""Monte Carlo tree search over epistemic plan-execution states.

The search estimates, for the agent deciding now (the *ego*), the utility of
every action it could take next: executing one of its own time points,
announcing an intent, explaining or asking about a belief, or waiting (noop).
Utilities live in [0, 1] and come from simulating how each agent would
plausibly continue acting from their own perspective.

Four node kinds make up the tree:

- *decision* nodes branch on one agent's candidate actions, each scored both
  from that agent's perspective (subjective) and from the node's own view
  (objective); the root is the ego's decision node, where both views
  coincide;
- *split* nodes hold the state right after an action, fan out into its
  possible worlds, score the worst case, and apply the action's
  communication penalty;
- *predict* nodes estimate, from a single world, which agent moves next and
  how much that move helps.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Callable, Mapping, Optional, Sequence

from . import constraints as cn
from . import doxastic as dox
from .actions import (
    KIND_ASK,
    KIND_EXECUTE,
    KIND_EXPLAIN,
    KIND_INTENT,
    KIND_NOOP,
    PointedAction,
    mk_execution_action,
    parent_world_id,
    product_update,
)
from .doxastic import SUC, PointedState, belief, evaluate, f_or, local_perspective, split_globals
from .errors import InapplicableActionError

__all__ = [
    "ACTION_PENALTIES",
    "EGO_KINDS_SEARCH",
    "OTHER_KINDS_SEARCH",
    "MODE_SEARCH_ACTION",
    "MODE_EXPLAIN_FAILURE",
    "MODE_ASK_IF_FAILURE",
    "MODE_EXPLAIN_SUCCESS",
    "SearchConfig",
    "subroutine_config",
    "backup_decision",
    "backup_predict",
    "backup_split",
    "detect_implicit_revision",
    "terminal_utility",
    "rollout",
    "search",
]

# A candidate generator maps (perspective state, agent, allowed kinds) to the
# agent's possible next actions, in deterministic order with noop second
# (executions, noop, intents, explanations, questions).
CandidateFn = Callable[[PointedState, str, frozenset], Sequence[PointedAction]]

MODE_SEARCH_ACTION = "search_action"
MODE_EXPLAIN_FAILURE = "explain_failure"
MODE_ASK_IF_FAILURE = "ask_if_failure"
MODE_EXPLAIN_SUCCESS = "explain_success"

_MODES = (
    MODE_SEARCH_ACTION,
    MODE_EXPLAIN_FAILURE,
    MODE_ASK_IF_FAILURE,
    MODE_EXPLAIN_SUCCESS,
)

ACTION_PENALTIES: Mapping[str, float] = {
    KIND_EXECUTE: 1.0,
    KIND_NOOP: 1.0,
    KIND_INTENT: 0.85,
    KIND_EXPLAIN: 0.9,
    KIND_ASK: 0.9,
}

EGO_KINDS_SEARCH = frozenset((KIND_EXECUTE, KIND_INTENT, KIND_EXPLAIN, KIND_ASK, KIND_NOOP))
OTHER_KINDS_SEARCH = frozenset((KIND_EXECUTE, KIND_EXPLAIN, KIND_NOOP))
EGO_KINDS_EXPLAIN = frozenset((KIND_EXPLAIN, KIND_ASK))
EGO_KINDS_ASK = frozenset((KIND_ASK,))

FAILED_FORMULA = dox.Entailed(cn.BOTTOM)


@dataclass(frozen=True)
class SearchConfig:
    """Knobs for one search: mode, horizon, budgets, penalties, and which
    action kinds each role (ego vs. others) may take inside the tree."""

    mode: str = MODE_SEARCH_ACTION
    horizon: int = 3
    exploration: float = 4.0
    iteration_cap: int = 1000
    time_budget_ms: Optional[float] = None
    penalties: Mapping[str, float] = field(default_factory=lambda: dict(ACTION_PENALTIES))
    ego_kinds: frozenset = EGO_KINDS_SEARCH
    other_kinds: frozenset = OTHER_KINDS_SEARCH

    def __post_init__(self) -> None:
        if self.mode not in _MODES:
            raise ValueError(f"unknown search mode {self.mode!r}")
        if self.horizon < 1:
            raise ValueError("horizon must be at least 1")
        if self.exploration <= 0:
            raise ValueError("exploration constant must be positive")
        if self.iteration_cap < 1:
            raise ValueError("iteration cap must be at least 1")
        if self.time_budget_ms is not None and self.time_budget_ms <= 0:
            raise ValueError("time budget must be positive when given")
        for kind in (KIND_EXECUTE, KIND_NOOP, KIND_INTENT, KIND_EXPLAIN, KIND_ASK):
            factor = self.penalties.get(kind)
            if factor is None or not 0.0 < factor <= 1.0:
                raise ValueError(f"penalty for {kind!r} must lie in (0, 1]")


def subroutine_config(
    mode: str,
    *,
    iteration_cap: int = 1000,
    time_budget_ms: Optional[float] = None,
    horizon: int = 3,
) -> SearchConfig:
    """The stock configuration for each of the four search modes."""
    if mode == MODE_SEARCH_ACTION:
        return SearchConfig(
            mode=mode,
            horizon=horizon,
            exploration=4.0,
            iteration_cap=iteration_cap,
            time_budget_ms=time_budget_ms,
            ego_kinds=EGO_KINDS_SEARCH,
            other_kinds=OTHER_KINDS_SEARCH,
        )
    if mode in (MODE_EXPLAIN_FAILURE, MODE_EXPLAIN_SUCCESS):
        ego_kinds = EGO_KINDS_EXPLAIN
    elif mode == MODE_ASK_IF_FAILURE:
        ego_kinds = EGO_KINDS_ASK
    else:
        raise ValueError(f"unknown search mode {mode!r}")
    return SearchConfig(
        mode=mode,
        horizon=horizon,
        exploration=math.sqrt(2.0),
        iteration_cap=iteration_cap,
        time_budget_ms=time_budget_ms,
        ego_kinds=ego_kinds,
        other_kinds=frozenset(),
    )


# --- backup formulas (pure) -------------------------------------------------


def backup_decision(actions: Sequence[tuple[float, float]]) -> float:
    """Expected objective utility of an agent's choice.

    ``actions`` holds (subjective, objective) score pairs. The agent is
    assumed to choose among the subjectively best actions — those sharing the
    maximal subjective score, provided it is positive — with probability
    proportional to their subjective scores; the result is the expected
    objective score of that best set. No positive subjective score means the
    agent stands still: 0.
    """
    if not actions:
        return 0.0
    best_sc = max(sc for sc, _ in actions)
    if best_sc <= 0.0:
        return 0.0
    best = [(sc, oc) for sc, oc in actions if sc == best_sc]
    total = sum(sc for sc, _ in best)
    return sum((sc / total) * oc for sc, oc in best)


def backup_predict(per_agent: Sequence[tuple[float, float]]) -> float:
    """Utility of letting whoever acts first act.

    ``per_agent`` holds (probability of waiting, expected utility) per agent.
    The value is the probability that at least one agent acts, times the
    expected utility of the first actor, where each agent acts first with
    probability proportional to its probability of not waiting. All agents
    waiting means the execution is stuck: 0.
    """
    denominator = sum(1.0 - p_noop for p_noop, _ in per_agent)
    if denominator <= 0.0:
        return 0.0
    stay_put = 1.0
    for p_noop, _ in per_agent:
        stay_put *= p_noop
    return (1.0 - stay_put) * (sum(e for _, e in per_agent) / denominator)


def backup_split(child_scores: Sequence[float], penalty_factor: float) -> float:
    """Worst case over the action's possible worlds, discounted by the
    action's communication penalty."""
    if not child_scores:
        raise ValueError("a split needs at least one child score")
    return penalty_factor * min(child_scores)


# --- terminal states ---------------------------------------------------------


def terminal_utility(
    state: PointedState,
    cfg: SearchConfig,
    executed_depth: int,
    lib=None,
    ego: Optional[str] = None,
) -> Optional[float]:
    """The fixed utility of ``state`` if it ends the simulation, else None.

    While searching for the next action, a failed state is worth 0, a
    successful one 1, and surviving to the horizon 1. The communication
    modes instead stop (at 1) once their goal holds: everyone believing the
    failure, the ego resolving whether execution failed, or everyone
    believing the success.
    """
    mode = cfg.mode
    if mode == MODE_SEARCH_ACTION:
        if evaluate(state, FAILED_FORMULA, lib):
            return 0.0
        if evaluate(state, SUC, lib):
            return 1.0
        if executed_depth >= cfg.horizon:
            return 1.0
        return None
    if mode == MODE_EXPLAIN_FAILURE:
        goal: dox.Formula = dox.And(
            tuple(belief(i, FAILED_FORMULA) for i in state.model.agents)
        )
    elif mode == MODE_ASK_IF_FAILURE:
        if ego is None:
            raise ValueError("resolving failure uncertainty needs the ego agent")
        goal = f_or(
            (belief(ego, FAILED_FORMULA), belief(ego, dox.Not(FAILED_FORMULA)))
        )
    elif mode == MODE_EXPLAIN_SUCCESS:
        goal = dox.And(tuple(belief(i, SUC) for i in state.model.agents))
    else:  # pragma: no cover - rejected by SearchConfig already
        raise ValueError(f"unknown search mode {mode!r}")
    return 1.0 if evaluate(state, goal, lib) else None


# --- implicit belief revision ------------------------------------------------


def detect_implicit_revision(state_before, action: PointedAction, lib=None) -> bool:
    """True when the execution or intent announcement would force some agent
    to promote a world they currently consider less plausible.

    Checked per designated world of ``state_before``: for every agent, the
    agent's component at that world is updated by the action, and the update
    must keep at least one of the agent's currently most-plausible worlds on
    top. Pruning the entire component counts as the extreme case of an
    unexpected action.
    """
    if action.kind not in (KIND_EXECUTE, KIND_INTENT):
        return False
    model = state_before.model
    frame = model.frame
    checked: set[frozenset] = set()
    for world_id in sorted(state_before.designated):
        for agent in model.agents:
            component = frame.cc(agent, world_id)
            if component in checked:
                continue
            checked.add(component)
            before_min = frame.min_set(agent, component)
            view = PointedState(model, component)
            try:
                after = product_update(view, action, lib)
            except InapplicableActionError:
                return True
            after_min = after.model.frame.min_set(agent, after.designated)
            for pair in after_min:
                if parent_world_id(pair) not in before_min:
                    return True
    return False


# --- rollouts ----------------------------------------------------------------


def _feasible_executions(state: PointedState, agent: str, lib) -> list[str]:
    """Time points the agent believes it can still execute, in declaration
    order: satisfiable to set and not already entailed as executed."""
    out = []
    for tp in lib.timepoints:
        if tp.owner != agent:
            continue
        done = cn.Assign(tp.id, "T")
        if evaluate(state, belief(agent, dox.Entailed(done)), lib):
            continue
        if evaluate(state, belief(agent, dox.Sat(done)), lib):
            out.append(tp.id)
    return out


def rollout(
    state: PointedState,
    executed_depth: int,
    cfg: SearchConfig,
    lib,
    ego: str,
    rng,
) -> float:
    """Estimate a state's utility by simulating random feasible executions.

    Agents are visited in random order; the first with any feasible execution
    performs one chosen uniformly, the state updates objectively, and the
    walk repeats until a terminal state or until nobody can act (worth 0).
    """
    current = state
    depth = executed_depth
    while True:
        fixed = terminal_utility(current, cfg, depth, lib, ego)
        if fixed is not None:
            return fixed
        order = list(current.model.agents)
        rng.shuffle(order)
        chosen: Optional[str] = None
        for agent in order:
            feasible = _feasible_executions(current, agent, lib)
            if feasible:
                chosen = feasible[rng.randrange(len(feasible))] if len(feasible) > 1 else feasible[0]
                break
        if chosen is None:
            return 0.0
        try:
            current = product_update(current, mk_execution_action(lib, chosen), lib)
        except InapplicableActionError:
            return 0.0
        depth += 1


# --- tree nodes ---------------------------------------------------------------


class _Ctx:
    """Shared per-search context: config, library, rng, candidate generator,
    node-id counter, and the optional iteration trace."""

    def __init__(self, cfg, lib, ego, candidate_fn, rng, trace_sink):
        self.cfg = cfg
        self.lib = lib
        self.ego = ego
        self.candidate_fn = candidate_fn
        self.rng = rng
        self.trace = trace_sink
        self._serial = 0

    def new_id(self, prefix: str, label: str) -> str:
        self._serial += 1
        return f"{prefix}{self._serial}[{label}]"

    def kinds_for(self, agent: str) -> frozenset:
        return self.cfg.ego_kinds if agent == self.ego else self.cfg.other_kinds

    def penalty(self, kind: str) -> float:
        return self.cfg.penalties[kind]

    def terminal(self, state: PointedState, depth: int) -> Optional[float]:
        return terminal_utility(state, self.cfg, depth, self.lib, self.ego)

    def update(self, state: PointedState, action: PointedAction) -> Optional[PointedState]:
        try:
            return product_update(state, action, self.lib)
        except InapplicableActionError:
            return None

    def roll(self, node) -> float:
        return rollout(node.state, node.depth, self.cfg, self.lib, self.ego, self.rng)


class _Node:
    __slots__ = ("state", "depth", "visits", "terminal", "nid", "_score", "_roll_total", "_roll_count")

    def __init__(self, state: PointedState, depth: int):
        self.state = state
        self.depth = depth
        self.visits = 0
        self.terminal: Optional[float] = None
        self._score = 0.0
        self._roll_total = 0.0
        self._roll_count = 0

    @property
    def score(self) -> float:
        return self._score

    def add_rollout(self, value: float) -> None:
        self._roll_total += value
        self._roll_count += 1

    def rollout_mean(self) -> float:
        if self._roll_count == 0:
            return 0.0
        return self._roll_total / self._roll_count


class _ActionChild:
    """One candidate action of a decision node with its pair of split
    children; the objective one mirrors the subjective one until the two
    views actually differ."""

    __slots__ = ("index", "action", "subjective", "objective", "vetoed")

    def __init__(self, index, action, subjective, objective, vetoed=False):
        self.index = index
        self.action = action
        self.subjective = subjective
        self.objective = objective
        self.vetoed = vetoed

    @property
    def visits(self) -> int:
        if self.vetoed:
            return 0
        if self.objective is self.subjective:
            return self.subjective.visits
        return self.subjective.visits + self.objective.visits

    def subjective_score(self) -> float:
        return 0.0 if self.vetoed else self.subjective.score

    def objective_score(self) -> float:
        if self.vetoed:
            return 0.0
        if self.action.kind == KIND_NOOP:
            return 0.0
        if self.objective is not self.subjective and self.objective.visits == 0:
            return self.subjective.score
        return self.objective.score

    def branch(self):
        """The less-expanded side of the pair (ties go to the subjective)."""
        if self.objective is self.subjective or self.subjective.visits <= self.objective.visits:
            return self.subjective
        return self.objective


class _SplitNode(_Node):
    __slots__ = ("action", "penalty", "children")

    def __init__(self, ctx: _Ctx, state: PointedState, depth: int, action: PointedAction):
        super().__init__(state, depth)
        self.action = action
        self.penalty = ctx.penalty(action.kind)
        self.children: Optional[list[_PredictNode]] = None
        self.nid = ctx.new_id("s", f"{action.kind}:{action.payload}")
        fixed = ctx.terminal(state, depth)
        if fixed is not None:
            self.terminal = fixed
            self._score = self.penalty * fixed

    def step(self, ctx: _Ctx):
        if self.children is None:
            exclude = self.action.actor if self.action.kind == KIND_NOOP else None
            self.children = [
                _PredictNode(ctx, world_state, self.depth, exclude)
                for world_state in split_globals(self.state)
            ]
        for child in self.children:
            if child.visits == 0:
                return child
        log_n = math.log(self.visits)
        best, best_value = None, -math.inf
        for child in self.children:
            value = (1.0 - child.score) + ctx.cfg.exploration * math.sqrt(log_n / child.visits)
            if value > best_value:
                best, best_value = child, value
        return best

    def refresh(self, ctx: _Ctx) -> None:
        if self.terminal is not None:
            return
        visited = [c.score for c in self.children or () if c.visits > 0]
        if not visited:
            self._score = self.penalty * self.rollout_mean()
        else:
            self._score = backup_split(visited, self.penalty)


class _PredictNode(_Node):
    __slots__ = ("exclude", "children")

    def __init__(self, ctx: _Ctx, state: PointedState, depth: int, exclude: Optional[str]):
        super().__init__(state, depth)
        self.exclude = exclude
        self.children: Optional[list[_DecisionNode]] = None
        self.nid = ctx.new_id("p", ",".join(sorted(state.designated)))
        fixed = ctx.terminal(state, depth)
        if fixed is not None:
            self.terminal = fixed
            self._score = fixed

    def step(self, ctx: _Ctx):
        if self.children is None:
            self.children = [
                _DecisionNode(ctx, self.state, agent, self.depth)
                for agent in self.state.model.agents
                if agent != self.exclude
            ]
        if not self.children:
            return None
        best = None
        for child in self.children:
            if best is None or child.visits < best.visits:
                best = child
        return best

    def refresh(self, ctx: _Ctx) -> None:
        if self.terminal is not None:
            return
        if self.children is not None and not self.children:
            self._score = 0.0  # every agent is excluded: nobody can act
            return
        known = [c for c in self.children or () if c.has_distribution]
        if not known:
            self._score = self.rollout_mean()
        else:
            self._score = backup_predict([(c.p_noop, c.score) for c in known])


class _DecisionNode(_Node):
    __slots__ = ("agent", "perspective", "is_root", "candidates", "children", "_expanded", "p_noop", "has_distribution")

    def __init__(self, ctx: _Ctx, state: PointedState, agent: str, depth: int, is_root: bool = False):
        super().__init__(state, depth)
        self.agent = agent
        self.is_root = is_root
        self.perspective = state if is_root else local_perspective(state, agent)
        self.candidates: Optional[list[PointedAction]] = None
        self.children: list[_ActionChild] = []
        self._expanded: set[int] = set()
        self.p_noop = 1.0
        self.has_distribution = False
        self.nid = ctx.new_id("d", agent)

    def step(self, ctx: _Ctx):
        if self.candidates is None:
            kinds = ctx.kinds_for(self.agent)
            self.candidates = list(ctx.candidate_fn(self.perspective, self.agent, kinds)) if kinds else []
        child = self._expand_next(ctx)
        if child is not None:
            return child.branch()
        return self._select(ctx)

    def _expand_next(self, ctx: _Ctx) -> Optional[_ActionChild]:
        """Create the next unexpanded candidate's pair of split children.

        Candidates come pre-ordered with executions first, then noop, then
        communications; a penalized kind is deferred while some expanded
        action already scores at least its penalty, since the communication
        can never beat that bound. Vetoed candidates (implicit revision) are
        recorded with both scores pinned to 0 and expansion moves on.
        """
        if not self.candidates:
            return None
        best_sc = max((c.subjective_score() for c in self.children), default=-math.inf)
        for index, action in enumerate(self.candidates):
            if index in self._expanded:
                continue
            bound = ctx.penalty(action.kind)
            if bound < 1.0 and best_sc >= bound:
                continue
            self._expanded.add(index)
            if action.kind in (KIND_EXECUTE, KIND_INTENT) and detect_implicit_revision(
                self.perspective, action, ctx.lib
            ):
                self.children.append(_ActionChild(index, action, None, None, vetoed=True))
                continue
            child_depth = self.depth + (1 if action.kind == KIND_EXECUTE else 0)
            subjective_state = ctx.update(self.perspective, action)
            if subjective_state is None:
                self.children.append(_ActionChild(index, action, None, None, vetoed=True))
                continue
            subjective = _SplitNode(ctx, subjective_state, child_depth, action)
            if self.perspective == self.state:
                objective = subjective
            else:
                objective_state = ctx.update(self.state, action)
                if objective_state is None:
                    self.children.append(_ActionChild(index, action, None, None, vetoed=True))
                    continue
                objective = _SplitNode(ctx, objective_state, child_depth, action)
            child = _ActionChild(index, action, subjective, objective)
            self.children.append(child)
            return child
        return None

    def _select(self, ctx: _Ctx):
        log_n = math.log(self.visits) if self.visits > 1 else 0.0
        best, best_value = None, -math.inf
        for child in self.children:
            if child.vetoed:
                continue
            if child.visits == 0:
                return child.branch()
            value = child.subjective_score() + ctx.cfg.exploration * math.sqrt(log_n / child.visits)
            if value > best_value:
                best, best_value = child, value
        return best.branch() if best is not None else None

    def refresh(self, ctx: _Ctx) -> None:
        if self.candidates is None:
            self._score = self.rollout_mean()
            return
        self.has_distribution = True
        if not self.children:
            self._score = 0.0
            self.p_noop = 1.0
            return
        entries: list[tuple[float, float]] = []
        noop_entry: Optional[tuple[float, float]] = None
        perfect_execution = False
        for child in self.children:
            sc = child.subjective_score()
            oc = child.objective_score()
            if child.action.kind == KIND_EXECUTE and sc >= 1.0:
                perfect_execution = True
            if child.action.kind == KIND_NOOP:
                noop_entry = (sc, oc)
            else:
                entries.append((sc, oc))
        if noop_entry is not None and not perfect_execution:
            entries.append(noop_entry)
        else:
            noop_entry = None
        self._score = backup_decision(entries)
        best_sc = max((sc for sc, _ in entries), default=0.0)
        if best_sc <= 0.0:
            self.p_noop = 1.0
        elif noop_entry is not None and noop_entry[0] == best_sc:
            self.p_noop = noop_entry[0] / sum(sc for sc, _ in entries if sc == best_sc)
        else:
            self.p_noop = 0.0


# --- the search loop ----------------------------------------------------------


def _simulate(ctx: _Ctx, root: _DecisionNode, iteration: int) -> None:
    path: list = [root]
    node = root
    value: Optional[float] = None
    while True:
        node.visits += 1
        if node.terminal is not None:
            value = node.terminal
            break
        if node.visits == 1:
            value = ctx.roll(node)
            node.add_rollout(value)
            break
        nxt = node.step(ctx)
        if nxt is None:
            break
        path.append(nxt)
        node = nxt
    for visited in reversed(path):
        visited.refresh(ctx)
    if ctx.trace is not None:
        ctx.trace.append(
            {
                "iteration": iteration,
                "path": [n.nid for n in path],
                "value": value,
                "root_score": root.score,
            }
        )


def search(
    state: PointedState,
    ego: str,
    lib,
    cfg: SearchConfig,
    candidate_fn: CandidateFn,
    rng,
    trace_sink: Optional[list] = None,
) -> Optional[PointedAction]:
    """Search the ego agent's best next action from its current state.

    Runs simulations until the iteration cap or time budget, then returns the
    root action with the highest positive score — preferring non-noop actions
    on ties and earlier candidates thereafter — or None when no action scores
    positively (or the state already terminates the search).
    """
    model = state.model
    root_state = PointedState(model, model.frame.min_set(ego, state.designated))
    ctx = _Ctx(cfg, lib, ego, candidate_fn, rng, trace_sink)
    stop_reason = "iteration_cap"
    iterations = 0
    root: Optional[_DecisionNode] = None
    if ctx.terminal(root_state, 0) is not None:
        stop_reason = "terminal_root"
    else:
        root = _DecisionNode(ctx, root_state, ego, 0, is_root=True)
        started = time.monotonic()
        for iteration in range(cfg.iteration_cap):
            if (
                cfg.time_budget_ms is not None
                and (time.monotonic() - started) * 1000.0 >= cfg.time_budget_ms
            ):
                stop_reason = "time_budget"
                break
            _simulate(ctx, root, iteration)
            iterations += 1
    if trace_sink is not None:
        trace_sink.append({"event": "stop", "reason": stop_reason, "iterations": iterations})
    if root is None:
        return None
    best: Optional[_ActionChild] = None
    best_score = 0.0
    for child in sorted(root.children, key=lambda c: c.index):
        if child.vetoed:
            continue
        score = child.subjective_score()
        if score <= 0.0:
            continue
        if best is None or score > best_score or (
            score == best_score
            and best.action.kind == KIND_NOOP
            and child.action.kind != KIND_NOOP
        ):
            best, best_score = child, score
    return best.action if best is not None else None
