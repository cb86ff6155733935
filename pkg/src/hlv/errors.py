"""Exception hierarchy shared by all hlv modules."""

from __future__ import annotations


class HlvError(Exception):
    """Base class for every error raised by the toolkit."""


class FormulaSyntaxError(HlvError):
    def __init__(self, message: str, position: int | None = None):
        self.position = position
        where = f" at position {position}" if position is not None else ""
        super().__init__(f"{message}{where}")


class UnboundVariable(HlvError):
    def __init__(self, name: str):
        self.name = name
        super().__init__(f"trace variable {name!r} is not bound by the quantifier prefix")


class DuplicateQuantifier(HlvError):
    def __init__(self, name: str):
        self.name = name
        super().__init__(f"trace variable {name!r} is quantified more than once")


class KripkeSyntaxError(HlvError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        where = f" (line {line})" if line is not None else ""
        super().__init__(f"{message}{where}")


class DanglingState(HlvError):
    def __init__(self, state: str):
        self.state = state
        super().__init__(f"state {state!r} is referenced but not declared")


class DeadEnd(HlvError):
    def __init__(self, state: str):
        self.state = state
        super().__init__(f"state {state!r} has no successor")


class UnknownAP(HlvError):
    def __init__(self, ap: str, state: str | None = None):
        self.ap = ap
        self.state = state
        super().__init__(f"label of {state!r} uses undeclared proposition {ap!r}")


class ResourceLimit(HlvError):
    """A construction exceeded its configured size cap."""


class FragmentError(HlvError):
    """The formula is outside the fragment a procedure supports."""


class InvalidArchitecture(HlvError):
    pass


class MonitorError(HlvError):
    pass


class DuplicateSession(MonitorError):
    pass


class NoOpenTrace(MonitorError):
    pass


class EmptyTrace(MonitorError):
    pass
