"""Exception hierarchy shared by the library and the command line."""


class CiteResistError(Exception):
    """Base class for all errors raised by this package."""

    exit_code = 1


class InputError(CiteResistError):
    """Bad input data or an unknown identifier."""

    exit_code = 2


class ParseError(InputError, ValueError):
    """A line of an edge list or CSV file could not be parsed."""

    def __init__(self, lineno, message):
        self.lineno = lineno
        super().__init__(f"line {lineno}: {message}")


class NodeLookupError(InputError, KeyError):
    def __str__(self):
        return str(self.args[0]) if self.args else "unknown node"


class ContractError(CiteResistError, RuntimeError):
    """An operation was called on a graph that violates its precondition."""

    exit_code = 2


class DomainError(CiteResistError, ValueError):
    """Argument outside the mathematical domain of an operation."""

    exit_code = 3


class NumericError(CiteResistError, ArithmeticError):
    exit_code = 3


class SizeCapError(CiteResistError):
    """Dense computation refused because the component is too large."""

    exit_code = 3


class DisconnectedError(CiteResistError):
    """The requested poles lie in different components (infinite resistance).

    ``components`` maps a component label to the node ids it contains, when
    the caller has that information.
    """

    exit_code = 4

    def __init__(self, message, components=None):
        super().__init__(message)
        self.components = components or {}
