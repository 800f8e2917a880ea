"""Epistemic multi-agent plan execution.

Conditional doxastic models over constraint knowledge bases, action-priority
product updates, plan-library encoding, Monte-Carlo action selection, and a
common-knowledge baseline, plus a scenario harness, CLI, and session service.
"""

from .constraints import (
    Assign,
    And,
    BOOL_DOMAIN,
    Bottom,
    BOTTOM,
    Constraint,
    Not,
    Or,
    Top,
    TOP,
    VariableDecl,
    conj,
    disj,
    implies,
    parse_constraint,
    print_constraint,
)
from .kb import (
    BacktrackingBackend,
    EnumerationBackend,
    KnowledgeBase,
    kb_consistent,
    kb_entails,
    kb_new,
    kb_sat_with,
)
from .doxastic import (
    CondBelief,
    Entailed,
    Formula,
    In,
    PlausibilityFrame,
    PlausibilityModel,
    PointedState,
    Sat,
    SUC,
    TRUE_FORMULA,
    World,
    belief,
    evaluate,
    extension,
    local_perspective,
    mk_model,
    parse_formula,
    print_formula,
)
from .actions import (
    ActionModel,
    Event,
    PointedAction,
    applicable,
    mk_execution_action,
    mk_explanation,
    mk_intent_announcement,
    mk_noop,
    mk_question,
    product_update,
)
from .planlib import (
    OrderingConstraint,
    PlanLibrary,
    Subplan,
    TimePoint,
    compile_initial_kb,
    compile_initial_state,
    feasible_subplans,
    record_execution,
    success_holds,
)
from .errors import (
    EpikeError,
    GenerationError,
    InapplicableActionError,
    MalformedConstraintError,
    MalformedFormulaError,
    ModelValidationError,
    ObservationContradictionError,
    ParseError,
    RestrictedFormulaError,
    ScenarioError,
)
from .executor import AgentSession, candidate_actions
from .baseline import PikeSession
from .harness import (
    AGENT_KIND_BASELINE,
    AGENT_KIND_ENGINE,
    AGENT_KIND_SCRIPTED,
    DEFAULT_SCALABILITY_GRID,
    RandomTaskParams,
    RunOutcome,
    Scenario,
    ScriptedSession,
    builtin_scenario_path,
    generate_random_task,
    load_scenario,
    replay_trace,
    run_pair,
    run_suite,
    scenario_from_json,
    scenario_to_json,
    state_fingerprint,
    validate_scenario,
    write_suite_csv,
)

__version__ = "0.1.0"
