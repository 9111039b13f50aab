"""Exception hierarchy shared by all factorsim modules."""


class FactorSimError(Exception):
    """Base class for every error raised by this package."""


class InvalidArgumentError(FactorSimError, ValueError):
    pass


class DomainError(FactorSimError, ValueError):
    pass


class CapacityExceededError(FactorSimError):
    """A request needs a larger sieve or budget than was configured."""


class AccuracyError(FactorSimError, ArithmeticError):
    """A series or expansion failed to reach its target tolerance."""


class PoleError(FactorSimError, ZeroDivisionError):
    pass


class BranchError(FactorSimError, ValueError):
    pass


class ParseError(FactorSimError, ValueError):
    pass


class MonotonicityError(FactorSimError, ValueError):
    pass


class PairNotInEnsembleError(FactorSimError, ValueError):
    pass


class EmptyEnsembleError(FactorSimError, ValueError):
    pass


class SingularSystemError(FactorSimError, ArithmeticError):
    pass


class NoSolutionError(FactorSimError, LookupError):
    pass
