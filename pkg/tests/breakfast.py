"""Shared two-agent breakfast domain used across the test suite.

A robot R fetches a container (mug or glass), a human H pours a drink (coffee
or juice), and the pairing rule C1 allows only mug+coffee or glass+juice.
"""

from __future__ import annotations

from epike import constraints as cn
from epike import doxastic as dox
from epike import planlib as pl
from epike.kb import kb_new

CONTAINER = cn.VariableDecl("container", ("mug", "glass"))
DRINK = cn.VariableDecl("drink", ("coffee", "juice"))

MUG = cn.Assign("container", "mug")
GLASS = cn.Assign("container", "glass")
COFFEE = cn.Assign("drink", "coffee")
JUICE = cn.Assign("drink", "juice")

MUG_COFFEE = cn.And((MUG, COFFEE))
GLASS_JUICE = cn.And((GLASS, JUICE))
C1 = cn.Or((MUG_COFFEE, GLASS_JUICE))
NO_GLASS = cn.Not(GLASS)

TIMEPOINTS = (
    pl.TimePoint("e_mug", "R", MUG),
    pl.TimePoint("e_glass", "R", GLASS),
    pl.TimePoint("e_coffee", "H", COFFEE),
    pl.TimePoint("e_juice", "H", JUICE),
)

# Robot's container goes on the table before the human pours.
CONTAINER_FIRST = (
    pl.OrderingConstraint("e_mug", "e_coffee", MUG_COFFEE),
    pl.OrderingConstraint("e_glass", "e_juice", GLASS_JUICE),
)
# The human picks the drink before the robot commits to a container.
DRINK_FIRST = (
    pl.OrderingConstraint("e_coffee", "e_mug", MUG_COFFEE),
    pl.OrderingConstraint("e_juice", "e_glass", GLASS_JUICE),
)


def library(
    orderings: tuple[pl.OrderingConstraint, ...] = (),
    agents: tuple[str, ...] = ("R", "H"),
) -> pl.PlanLibrary:
    return pl.PlanLibrary((CONTAINER, DRINK), TIMEPOINTS, orderings, agents)


def raw_world(ident: str, constraints=()) -> dox.World:
    return dox.World(ident, kb_new((CONTAINER, DRINK), constraints))


def choice_state(lib: pl.PlanLibrary) -> dox.PointedState:
    """R knows the pairing rule C1; H finds the rule-free world more plausible.

    Designated at the true world w1 (where C1 holds).
    """
    model = dox.mk_model(
        [raw_world("w1", [C1]), raw_world("w2", [])],
        lib.agents,
        {"H": [("w2", "w1")]},
    )
    state = dox.PointedState(model, frozenset({"w1"}))
    return pl.compile_initial_state(lib, state)


def intent_state(lib: pl.PlanLibrary) -> dox.PointedState:
    """H has settled on coffee; R cannot tell coffee from juice (equi-plausible)."""
    model = dox.mk_model(
        [raw_world("w1", [C1, COFFEE]), raw_world("w2", [C1, JUICE])],
        lib.agents,
        {"R": [("w1", "w2"), ("w2", "w1")]},
    )
    state = dox.PointedState(model, frozenset({"w1"}))
    return pl.compile_initial_state(lib, state)


def blocked_state(lib: pl.PlanLibrary) -> dox.PointedState:
    """R knows the glass is out of reach; H's preferred world does not."""
    model = dox.mk_model(
        [raw_world("w1", [C1, NO_GLASS]), raw_world("w2", [C1])],
        lib.agents,
        {"H": [("w2", "w1")]},
    )
    state = dox.PointedState(model, frozenset({"w1"}))
    return pl.compile_initial_state(lib, state)
