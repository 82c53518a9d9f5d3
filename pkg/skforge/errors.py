import builtins as _builtins


class Exception(_builtins.RuntimeError):
    '''
    Base class of all errors raised by skforge. Messages follow the pattern
    ``"function(): what went wrong!"``.
    '''


class DegenerateInput(Exception):
    pass


class AboveTruncation(Exception):
    '''
    Every series coefficient up to the truncation order vanished. This says
    that the order was too small, not that the word is faulty.
    '''


class EmptyGateSet(Exception):
    pass


class NonSymmetricGateSet(Exception):
    pass


class NetTooCoarse(Exception):
    '''Raised when the requested accuracy is below what the net can provide.'''


class VersionMismatch(Exception):
    pass


class CorruptFile(Exception):
    pass


class StepUnreachable(Exception):
    pass


class NoConjugatorFound(Exception):
    pass


class Unsolvable(Exception):
    pass


class TargetUnreachable(Exception):
    pass


class PrecisionShortfall(Exception):
    pass


class ConvergenceFailure(Exception):
    pass
