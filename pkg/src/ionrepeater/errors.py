"""Exception hierarchy shared by all modules."""


class RepeaterError(Exception):
    """Base class for errors raised by this package."""


class ParameterError(RepeaterError, ValueError):
    """An argument lies outside its admissible range."""


class ConsistencyError(RepeaterError, RuntimeError):
    """An internal numerical invariant was violated (e.g. norm drift)."""


class InfeasibleLinkError(RepeaterError, ValueError):
    """The heralding probability of an elementary link is zero."""


class SchedulingError(RepeaterError, ValueError):
    """A swap instruction refers to an ion outside the chain."""


class DegenerateRegimeWarning(UserWarning):
    """A closed-form expression was evaluated outside its meaningful range."""
