"""Exception types shared by the library and the command line front end."""


class CompdimError(Exception):
    """Base class; ``exit_code`` is what the CLI returns for this failure."""

    exit_code = 1

    def __init__(self, message, **details):
        super().__init__(message)
        self.details = details

    def record(self):
        rec = {"error": type(self).__name__, "exit_code": self.exit_code,
               "message": str(self)}
        rec.update(self.details)
        return rec


class ValidationError(CompdimError, ValueError):
    """Input violates a standing hypothesis (monotonicity, ratio bounds, ...)."""

    exit_code = 2


class PrecisionError(CompdimError, ArithmeticError):
    """The request needs more resolution than double precision can honour."""

    exit_code = 3


class InfeasibleTargetError(CompdimError, ValueError):
    """Target dimension lies outside the attainable open interval."""

    exit_code = 4


class SequenceIndexError(CompdimError, IndexError):
    """Index outside the representable range of a sequence model."""

    exit_code = 2
