# shared/models.py
# This file defines the strict data schemas passed between the evaluators,
# the verification engine, the OEIS client and the CLI. Pydantic is used as
# the primary guardrail for input validation: a query or grid that violates
# its domain never reaches the arithmetic.

from enum import Enum
from fractions import Fraction
from typing import Dict, List, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, field_validator

# --- Enumerations ---

class EvalMethod(str, Enum):
    """Evaluation strategies for F(n,m,k). Declaration order is output order."""
    DIRECT = "direct"
    CLOSED = "closed"
    THEOREM = "theorem"
    CERECEDA = "cereceda"
    POLYNOMIAL = "polynomial"


class IdentityId(str, Enum):
    """One tag per identity checked by the verification engine."""
    THEOREM1 = "theorem1"
    CERECEDA_RATIONAL = "cereceda_rational"
    CERECEDA_INTEGER = "cereceda_integer"
    DIFFERENCE = "difference"
    M0_RECURRENCE = "m0_recurrence"
    M0_HOCKEY_STICK = "m0_hockey_stick"
    KERNEL = "kernel"
    CROSS_METHOD = "cross_method"


class OutputFormat(str, Enum):
    TEXT = "text"
    JSON = "json"
    CSV = "csv"


class RenderFormat(str, Enum):
    PLAIN = "plain"
    LATEX = "latex"
    CSV = "csv"


class DataSource(str, Enum):
    REMOTE = "remote"
    FIXTURE = "fixture"


# --- Evaluation Structures ---

class HypersumQuery(BaseModel):
    """
    A validated (n, m, k) triple. n = 0 is admitted and evaluates to the
    empty sum; nesting depth k must be at least 1.
    """
    model_config = ConfigDict(frozen=True)

    n: int = Field(..., ge=0, description="Upper summation limit.")
    m: int = Field(..., ge=0, description="Power applied to each summand.")
    k: int = Field(..., ge=1, description="Nesting depth; k=1 is the plain power sum.")


class GridSpec(BaseModel):
    """Parameter grid 0..n_max x 0..m_max x 1..k_max; identities narrow it further."""
    model_config = ConfigDict(frozen=True)

    n_max: int = Field(..., ge=1, description="Largest n on the grid.")
    m_max: int = Field(..., ge=0, description="Largest power m on the grid.")
    k_max: int = Field(..., ge=1, description="Largest nesting depth k on the grid.")


# --- Closed-Form Structures ---

class RationalPolynomial(BaseModel):
    """
    Dense polynomial in n over exact rationals; coeffs[i] multiplies n**i.
    Trailing zero coefficients are trimmed on construction.
    """
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    coeffs: Tuple[Fraction, ...] = Field(default_factory=tuple)

    @field_validator("coeffs", mode="before")
    @classmethod
    def normalize(cls, coeffs) -> Tuple[Fraction, ...]:
        normalized = [Fraction(c) for c in coeffs]
        while normalized and normalized[-1] == 0:
            normalized.pop()
        return tuple(normalized)

    @property
    def degree(self) -> int:
        """-1 for the zero polynomial."""
        return len(self.coeffs) - 1

    @property
    def leading_coefficient(self) -> Fraction:
        return self.coeffs[-1] if self.coeffs else Fraction(0)


# --- Verification Structures ---

class CaseResult(BaseModel):
    """One identity evaluated at one grid point. Values are decimal strings."""
    model_config = ConfigDict(populate_by_name=True)

    identity: IdentityId
    n: int
    m: Optional[int] = Field(None, description="Null for identities that do not involve m (kernel).")
    k: int
    r: Optional[int] = Field(None, description="Summation index; set for the kernel identity only.")
    lhs: str
    rhs: str
    passed: bool = Field(..., alias="pass")
    dissent: List[str] = Field(default_factory=list, description="Methods disagreeing with the closed form (cross_method only).")


class IdentityReport(BaseModel):
    identity: IdentityId
    cases: List[CaseResult] = Field(default_factory=list)
    elapsed_seconds: float = Field(..., description="Wall time spent evaluating this identity.")

    @property
    def total(self) -> int:
        return len(self.cases)

    @property
    def failures(self) -> List[CaseResult]:
        return [case for case in self.cases if not case.passed]


class VerificationReport(BaseModel):
    grid: GridSpec
    identities: List[IdentityReport] = Field(default_factory=list)

    @property
    def total_cases(self) -> int:
        return sum(report.total for report in self.identities)

    @property
    def total_failures(self) -> int:
        return sum(len(report.failures) for report in self.identities)

    @property
    def elapsed_seconds(self) -> float:
        return sum(report.elapsed_seconds for report in self.identities)

    def summary(self) -> Dict[str, Dict[str, float]]:
        return {
            report.identity.value: {
                "cases": report.total,
                "failures": len(report.failures),
                "elapsed_seconds": report.elapsed_seconds,
            }
            for report in self.identities
        }


# --- OEIS Structures ---

class BFileEntry(BaseModel):
    model_config = ConfigDict(frozen=True)

    index: int
    value: int


class BFile(BaseModel):
    """Parsed OEIS b-file. Entries are kept in file order with strictly increasing indices."""
    model_config = ConfigDict(frozen=True)

    sequence_id: str = Field(..., description="A-number, e.g. 'A000292'.")
    entries: List[BFileEntry] = Field(default_factory=list)

    @field_validator("entries")
    @classmethod
    def indices_increase(cls, entries: List[BFileEntry]) -> List[BFileEntry]:
        for previous, current in zip(entries, entries[1:]):
            if current.index <= previous.index:
                raise ValueError(f"b-file indices must strictly increase ({previous.index} then {current.index})")
        return entries

    def as_dict(self) -> Dict[int, int]:
        return {entry.index: entry.value for entry in self.entries}


class SequenceBinding(BaseModel):
    """Ties an OEIS sequence to F(., m, k). offset is the OEIS index of our n=1 term."""
    model_config = ConfigDict(frozen=True)

    sequence_id: str
    m: int = Field(..., ge=0)
    k: int = Field(..., ge=1)
    offset: int
    cited: bool = Field(True, description="False for supplementary bindings not named alongside the formulas.")


class TermMismatch(BaseModel):
    n: int
    index: int = Field(..., description="OEIS index compared against.")
    expected: str = Field(..., description="Computed F(n,m,k).")
    actual: str = Field(..., description="Value found in the b-file.")


class ComparisonReport(BaseModel):
    sequence_id: str
    m: int
    k: int
    count: int
    mismatches: List[TermMismatch] = Field(default_factory=list)
    anchors: Dict[int, str] = Field(default_factory=dict, description="First few computed terms, keyed by n.")

    @property
    def passed(self) -> bool:
        return not self.mismatches


# --- Benchmark Structures ---

class BenchResult(BaseModel):
    method: EvalMethod
    grid: GridSpec
    wall_seconds: float = Field(..., description="Best wall time across repetitions.")
    repetitions: int = Field(..., ge=1)
    evaluations: int = Field(..., description="Grid points evaluated per repetition.")
    values_hash: str = Field(..., description="SHA-256 over the evaluated values in grid order.")
