"""Exception hierarchy.

Every error carries an ``exit_code`` used by the command-line front end:
2 for bad input or graph structure, 3 for infeasible design problems and
4 for numerical failures.
"""


class KronSyncError(Exception):
    exit_code = 1


class InputError(KronSyncError):
    exit_code = 2


class InvalidGraph(InputError):
    pass


class DisconnectedGraph(InvalidGraph):
    pass


class InvalidBoundary(InputError):
    pass


class InvalidParameter(InputError):
    pass


class UnbalancedInjection(InputError):
    pass


class ParseError(InputError):
    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class InvalidBranch(ParseError):
    pass


class SchemaError(InputError):
    def __init__(self, message, path="$"):
        super().__init__(f"{path}: {message}")
        self.path = path


class Infeasible(KronSyncError):
    exit_code = 3

    def __init__(self, message, max_lambda2=None, threshold=None):
        super().__init__(message)
        self.max_lambda2 = max_lambda2
        self.threshold = threshold


class NumericalError(KronSyncError):
    exit_code = 4


class NumericalFailure(NumericalError):
    def __init__(self, message, condition=None):
        if condition is not None:
            message = f"{message} (condition estimate {condition:.3e})"
        super().__init__(message)
        self.condition = condition


class DegenerateSpectrum(NumericalError):
    pass


class NotConverged(NumericalError):
    def __init__(self, message, result=None):
        super().__init__(message)
        self.result = result


class NoSynchronizedState(NumericalError):
    pass


class AlgebraicSolveFailure(NumericalError):
    def __init__(self, message, time=None, trajectory=None):
        if time is not None:
            message = f"{message} at t={time:.6g}"
        super().__init__(message)
        self.time = time
        self.trajectory = trajectory
