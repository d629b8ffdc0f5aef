"""Exception hierarchy shared by every module.

Each class carries a short machine-readable ``code`` that the CLI prints in
its ``error: <code>: <message>`` line.
"""


class AdascaleError(Exception):
    code = "error"


class ArgumentError(AdascaleError, ValueError):
    code = "argument"


class NumericalError(AdascaleError, ArithmeticError):
    code = "numerical"


class ConvergenceError(NumericalError):
    code = "convergence"

    def __init__(self, message, trace=()):
        super().__init__(message)
        self.trace = tuple(trace)


class TrainingError(AdascaleError, RuntimeError):
    code = "training"


class DataError(AdascaleError):
    code = "data"
