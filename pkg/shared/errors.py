# shared/errors.py
# Exception hierarchy shared by the evaluators, the OEIS client and the CLI.
# The CLI maps each family onto an exit code (see cli/main_handler.py).

from typing import Optional


class HypersumError(Exception):
    """Base class for every error raised by this package."""


# --- Evaluation Errors ---

class InternalNegative(HypersumError):
    """
    A recurrence produced a negative value. No valid query can do this,
    so this always signals an implementation bug.
    """

    def __init__(self, method: str, n: int, m: int, k: int, value: int):
        self.method = method
        self.n, self.m, self.k = n, m, k
        self.value = value
        super().__init__(f"{method} produced negative F({n},{m},{k}) = {value}")


class ClosedFormError(HypersumError):
    """An interpolated polynomial failed its degree or agreement postcondition."""


class HashMismatch(HypersumError):
    """Benchmark methods disagreed on the values computed over a grid."""

    def __init__(self, hashes: dict):
        self.hashes = hashes
        detail = ", ".join(f"{method}={digest[:12]}" for method, digest in hashes.items())
        super().__init__(f"values hash disagreement: {detail}")


# --- OEIS Errors ---

class OeisError(HypersumError):
    """Base class for fetch, parse and comparison failures on OEIS data."""


class InvalidSequenceId(OeisError):
    pass


class NotFound(OeisError):
    pass


class NetworkError(OeisError):
    pass


class ParseError(OeisError):
    def __init__(self, line_number: int, line: str, sequence_id: Optional[str] = None):
        self.line_number = line_number
        self.line = line
        self.sequence_id = sequence_id
        where = f"{sequence_id} " if sequence_id else ""
        super().__init__(f"{where}b-file line {line_number} is malformed: {line!r}")


class InsufficientTerms(OeisError):
    def __init__(self, sequence_id: str, needed: int, available: int):
        self.sequence_id = sequence_id
        self.needed = needed
        self.available = available
        super().__init__(
            f"{sequence_id}: {needed} terms requested but only {available} usable entries"
        )
