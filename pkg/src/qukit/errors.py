"""Exception hierarchy shared by all qukit modules."""


class QukitError(Exception):
    """Base class for library errors. ``code`` is a stable diagnostic tag."""

    code = "E_QUKIT"


class ParseError(QukitError, ValueError):
    code = "E_PARSE"


class BaseMismatchError(QukitError, ValueError):
    code = "E_BASE_MISMATCH"

    def __init__(self, k1, k2):
        super().__init__(f"base mismatch: {k1} vs {k2}")
        self.bases = (k1, k2)


class NonTerminatingError(QukitError, ValueError):
    """Rational value has no finite expansion in the requested base."""

    code = "E_NON_TERMINATING"

    def __init__(self, value, base):
        super().__init__(f"{value} has no terminating base-{base} expansion")
        self.value = value
        self.base = base


class OutOfDomainError(QukitError, ValueError):
    """Value lies outside the domain of an exact base change."""

    code = "E_OUT_OF_DOMAIN"

    def __init__(self, value, base):
        super().__init__(f"{value} is outside the exact base-{base} domain")
        self.value = value
        self.base = base


class DivisionByZeroError(QukitError, ZeroDivisionError):
    code = "E_DIV_ZERO"


class StateError(QukitError, ValueError):
    """Malformed Fock state (zero vector, bad arity, clashing labels...)."""

    code = "E_STATE"


class NonUnitaryError(QukitError, ValueError):
    code = "E_NON_UNITARY"


class NonBasisError(QukitError, ValueError):
    """A basis-valued sequence element turned out to be a superposition."""

    code = "E_NON_BASIS"


class SequenceSpecError(QukitError, ValueError):
    code = "E_SEQ_SPEC"


class FrameError(QukitError, ValueError):
    code = "E_FRAME"
