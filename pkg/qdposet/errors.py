# qdposet/errors.py — exception hierarchy; every class knows its CLI exit code


class QDPosetError(Exception):
    exit_code = 1

    def __init__(self, message: str):
        super().__init__(message)
        self.message = message


# ----------------- Input / structure -----------------
class GraphError(QDPosetError):
    exit_code = 2


class ParseError(GraphError):
    """Malformed graph, divisor or poset document."""

    def __init__(self, message: str, line: int | None = None, column: int | None = None,
                 path: str | None = None):
        where = []
        if path:
            where.append(path)
        if line is not None:
            where.append(f"line {line}")
        if column is not None:
            where.append(f"column {column}")
        super().__init__(f"{', '.join(where)}: {message}" if where else message)
        self.line = line
        self.column = column
        self.path = path


class GraphFileError(ParseError):
    pass


class DisconnectedGraphError(GraphError):
    exit_code = 3


class CarrierMismatchError(QDPosetError):
    exit_code = 2


class PolarizationError(QDPosetError):
    exit_code = 2


class NonCanonicalPolarizationError(PolarizationError):
    pass


class EnumerationLimitError(QDPosetError):
    exit_code = 2


class InvalidMappingError(QDPosetError):
    exit_code = 2


class PreconditionError(QDPosetError):
    exit_code = 2


class HypothesisNotSatisfied(QDPosetError):
    """A lemma's hypothesis does not hold for the given data; not a counterexample."""
    exit_code = 2


# ----------------- Theorem checks -----------------
class Falsifier(QDPosetError):
    """A step that the theory proves unique or always true failed on a concrete instance."""
    exit_code = 4

    def __init__(self, statement: str, message: str, instance: dict | None = None):
        super().__init__(f"{statement}: {message}")
        self.message = message
        self.statement = statement
        self.instance = instance or {}

    def to_report(self) -> dict:
        return {"statement": self.statement, "message": self.message, "instance": self.instance}


class BridgedCurveError(QDPosetError):
    exit_code = 5
