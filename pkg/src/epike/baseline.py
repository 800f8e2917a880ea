"""A naive single-world baseline agent.

:class:`PikeSession` assumes that whatever it believes is common knowledge:
its view collapses at construction to the single most plausible world, and
it never communicates (no intents, explanations, or questions — there is
nothing to reconcile when everyone supposedly agrees). It keeps the full
search machinery and budgets of :class:`~epike.executor.AgentSession`, so a
comparison between the two isolates the epistemic model rather than search
quality.

An observation that contradicts the collapsed world would normally be
impossible; the session then marks itself ``surprised`` and force-applies the
action's effect on its knowledge base, which usually renders it inconsistent
(the baseline's characteristic failure mode).
"""

from __future__ import annotations

from typing import Optional

from . import constraints as cn
from . import doxastic as dox
from . import planlib as pl
from .actions import KIND_EXECUTE, KIND_INTENT, KIND_NOOP, PointedAction, product_update
from .doxastic import PointedState
from .errors import InapplicableActionError
from .executor import AgentSession

__all__ = ["PikeSession"]


class PikeSession(AgentSession):
    """Plan executor that collapses its view to one common-knowledge world."""

    kind_mask = frozenset((KIND_EXECUTE, KIND_NOOP))

    def __init__(self, *args, **kwargs):
        super().__init__(*args, **kwargs)
        anchor = min(self.state.model.min_set(self.ego, self.state.designated))
        world = self.state.model.world(anchor)
        self.state = self._single(world.id, world.kb)
        self.surprised = False
        self.history: list[str] = []

    def _single(self, ident: str, kb) -> PointedState:
        model = dox.mk_model([dox.World(ident, kb)], self.lib.agents, {})
        return PointedState(model, frozenset((ident,)))

    def _apply(self, action: PointedAction) -> None:
        try:
            self.state = product_update(self.state, action, self.lib)
        except InapplicableActionError:
            self.surprised = True
            world = self.state.model.worlds[0]
            kb = world.kb
            if action.kind == KIND_EXECUTE:
                kb = pl.record_execution(kb, self.lib, action.payload, self.history)
            elif action.kind == KIND_INTENT:
                kb = kb.add(cn.parse_constraint(action.payload))
            self.state = self._single(world.id, kb)
        if action.kind == KIND_EXECUTE:
            self.history.append(action.payload)

    def _react(self, action: PointedAction) -> Optional[PointedAction]:
        return None  # no communication machinery: questions go unanswered
