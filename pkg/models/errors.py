# models/errors.py
"""
Workbench Exceptions

Every failure raised by the workbench derives from WorkbenchError, so the
command line can map the whole family to a usage/parse exit status. The
semantic error value err is NOT an exception; it lives in models.numerics.
"""


class WorkbenchError(Exception):
    """Base class for all workbench failures."""


class ProgramSyntaxError(WorkbenchError):
    """
    Program text does not match the concrete syntax.

    Attributes
    ----------
    line : int
        1-based line of the offending token.
    column : int
        1-based column of the offending token.
    """
    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"{message} (line {line}, column {column})")
        self.line = line
        self.column = column


class DuplicateLabel(WorkbenchError):
    """Two instructions of one program carry the same label."""
    def __init__(self, label: int):
        super().__init__(f"label ^{label} is used more than once")
        self.label = label


class UndeclaredVariable(WorkbenchError):
    """A variable is used that the `vars` header does not declare."""
    def __init__(self, name: str, line: int = 0, column: int = 0):
        super().__init__(f"variable '{name}' is not declared (line {line}, column {column})")
        self.name = name
        self.line = line
        self.column = column


class UnboundVariable(WorkbenchError):
    """An expression mentions a variable the environment does not bind."""
    def __init__(self, name: str):
        super().__init__(f"variable '{name}' is not bound in the environment")
        self.name = name


class FormatTooLarge(WorkbenchError):
    """A float format is too large to enumerate."""


class NotRepresentable(WorkbenchError):
    """A float-mode value is not exactly representable in the active format."""


class DomainMismatch(WorkbenchError):
    """Two objects that must share an answer domain do not."""


class NoInputModel(WorkbenchError):
    """A program contains `input` but no input model was configured."""


class NoModelForSite(WorkbenchError):
    """The input model has no capacity for the given `input` label."""
    def __init__(self, label: int):
        super().__init__(f"no capacity configured for input site ^{label}")
        self.label = label


class NonMonotoneCapacity(WorkbenchError):
    """Choquet integration was requested against a non-monotone set function."""


class SpaceTooLarge(WorkbenchError):
    """An outcome space is too large for the requested exhaustive check."""


class FileFormatError(WorkbenchError):
    """An env, universe, capacity, table or config file is malformed."""
    def __init__(self, path, line: int, message: str):
        super().__init__(f"{path}:{line}: {message}")
        self.path = path
        self.line = line
