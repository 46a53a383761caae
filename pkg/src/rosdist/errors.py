"""Exception types shared by all rosdist modules."""


class RosdistError(Exception):
    """Base class for library errors."""


class DomainError(RosdistError, ValueError):
    """An argument lies outside the domain where an operation is defined."""


class ConvergenceError(RosdistError, RuntimeError):
    """An iterative procedure hit its ceiling before meeting its tolerance.

    ``report`` carries whatever diagnostic history the procedure kept.
    """

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report or {}
