"""Exception types shared across the package."""


class EpikeError(Exception):
    """Base class for all package-specific errors."""


class MalformedConstraintError(EpikeError):
    """A constraint references an unknown variable or an out-of-domain value."""


class MalformedFormulaError(EpikeError):
    """A formula references an unknown agent or is otherwise ill-formed."""


class ParseError(EpikeError):
    """Textual constraint/formula input does not match the grammar."""


class ModelValidationError(EpikeError):
    """A plausibility structure violates a required property.

    Carries the first offending witness in the message (agent plus the worlds
    or events involved).
    """


class RestrictedFormulaError(EpikeError):
    """An explanation payload falls outside the restricted explanation grammar."""


class InapplicableActionError(EpikeError):
    """A product update left no surviving designated (world, event) pair."""


class ObservationContradictionError(EpikeError):
    """An observed action is impossible in every designated world of a session."""


class ScenarioError(EpikeError):
    """A scenario file is malformed or fails its load-time checks."""


class GenerationError(EpikeError):
    """Random task generation could not satisfy its constraints within bounds."""
