"""Exception hierarchy shared across the pipeline."""


class CadforgeError(Exception):
    """Base class for all package errors."""


# --- language ---

class ParseError(CadforgeError):
    def __init__(self, message, line=None, col=None):
        self.line = line
        self.col = col
        loc = "" if line is None else f" (line {line}" + ("" if col is None else f", col {col}") + ")"
        super().__init__(message + loc)


class McqTypeError(ParseError):
    """Arity or unit-tag mismatch against an op signature."""


class UseBeforeDefError(ParseError):
    """Identifier referenced before its defining statement."""


class UnknownParamError(CadforgeError):
    """bind() received a name that is not a declared parameter."""


# --- kernel ---

class EvalError(CadforgeError):
    """Runtime failure while executing a script (empty sketch, bad axis, ...)."""


class EmptySolidError(CadforgeError):
    pass


class EmptyMeshError(CadforgeError):
    pass


class OpenMeshError(CadforgeError):
    """Parity ray casting found inconsistent crossings on too many rays."""


class LoopBoundError(CadforgeError):
    """Generator unrolling exceeded the statement budget."""


# --- augmentation ---

class UnsupportedRewriteError(CadforgeError):
    """A global-frame op carries an argument form the rotation rewriter cannot map."""


# --- metrics ---

class DegenerateExtentError(CadforgeError):
    pass


class DomainMismatchError(CadforgeError):
    pass


class EmptyListError(CadforgeError):
    pass


class RangeError(CadforgeError):
    pass


# --- rendering ---

class OutOfDomainError(CadforgeError):
    """Solid exceeds the working cube by more than the allowed slack."""


class CountError(CadforgeError):
    pass


# --- evolve / proposer ---

class EmptyPoolError(CadforgeError):
    pass


class ProposerError(CadforgeError):
    pass


class TransportError(ProposerError):
    pass


class MalformedResponseError(ProposerError):
    pass


# --- config ---

class ConfigError(CadforgeError):
    pass
