"""Exception types shared across the package."""


class KgCubeError(Exception):
    """Base class for all errors raised by kgcube."""


class NTriplesError(KgCubeError):
    """Malformed N-Triples input; carries the 1-based line number."""

    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


class StructuralError(KgCubeError):
    """Triple violates the (IRI|bnode, IRI, any) signature."""


class QuerySyntaxError(KgCubeError):
    """Query text does not match the grammar; carries the character offset."""

    def __init__(self, message: str, position: int):
        super().__init__(f"at offset {position}: {message}")
        self.position = position


class QuerySemanticError(KgCubeError):
    """Query parses but violates a structural invariant."""


class PlanningError(KgCubeError):
    """Pattern set cannot be planned (e.g. disconnected BGP)."""


class EvaluationError(KgCubeError):
    """A non-numeric value reached a numeric aggregate; names the term."""


class CapacityError(KgCubeError):
    """Request exceeds a hard size guard (lattice width, oracle search space)."""


class FacetMismatchError(KgCubeError):
    """Query does not target the facet it was used against."""


class ValidationError(KgCubeError):
    """Invalid argument combination (unknown ids, duplicates, root misuse, ...)."""


class StateError(KgCubeError):
    """Operation requires state that is missing (e.g. untrained cost model)."""


class TrainingError(KgCubeError):
    """Regressor training failed (no data, divergence)."""
