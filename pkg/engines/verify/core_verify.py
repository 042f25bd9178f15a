import logging
import time
from typing import Callable, Dict, Iterator, List, Optional

# Shared components
from shared.exact_arith import binom, make_rational
from shared.models import (
    CaseResult,
    EvalMethod,
    GridSpec,
    HypersumQuery,
    IdentityId,
    IdentityReport,
    VerificationReport,
)

from engines.hypersum_eval.core_eval import (
    EvaluationSession,
    closed_value,
    f_base_m0,
    f_dispatch,
    kernel_identity_lhs,
    kernel_identity_rhs,
)

logger = logging.getLogger(__name__)

F = closed_value


def _case(identity: IdentityId, n: int, m, k: int, lhs, rhs, **extra) -> CaseResult:
    return CaseResult(
        identity=identity, n=n, m=m, k=k,
        lhs=str(lhs), rhs=str(rhs), passed=(lhs == rhs),
        **extra,
    )


# --- Identity Checkers ---
# Each checker owns its domain restrictions and yields cases in lexicographic
# (n, m, k[, r]) order.

def _theorem1(g: GridSpec) -> Iterator[CaseResult]:
    for n in range(1, g.n_max + 1):
        for m in range(1, g.m_max + 1):
            for k in range(1, g.k_max + 1):
                rhs = n * F(n, m - 1, k) - k * F(n - 1, m - 1, k + 1)
                yield _case(IdentityId.THEOREM1, n, m, k, F(n, m, k), rhs)


def _cereceda_rational(g: GridSpec) -> Iterator[CaseResult]:
    # printed form, with the 1/(n+k) factors kept as exact rationals
    for n in range(1, g.n_max + 1):
        for m in range(0, g.m_max):
            for k in range(1, g.k_max + 1):
                rhs = make_rational(k, n + k) * F(n, m, k + 1) + make_rational(1, n + k) * F(n, m + 1, k)
                yield _case(IdentityId.CERECEDA_RATIONAL, n, m, k, make_rational(F(n, m, k)), rhs)


def _cereceda_integer(g: GridSpec) -> Iterator[CaseResult]:
    for n in range(1, g.n_max + 1):
        for m in range(0, g.m_max):
            for k in range(1, g.k_max + 1):
                lhs = (n + k) * F(n, m, k)
                rhs = k * F(n, m, k + 1) + F(n, m + 1, k)
                yield _case(IdentityId.CERECEDA_INTEGER, n, m, k, lhs, rhs)


def _difference(g: GridSpec) -> Iterator[CaseResult]:
    # k = 1 compares against the F(n,m,0) = n^m extension
    for n in range(1, g.n_max + 1):
        for m in range(0, g.m_max + 1):
            for k in range(1, g.k_max + 1):
                yield _case(IdentityId.DIFFERENCE, n, m, k, F(n, m, k) - F(n - 1, m, k), F(n, m, k - 1))


def _m0_recurrence(g: GridSpec) -> Iterator[CaseResult]:
    # built from the recurrence alone, from F(n,0,1) = n and F(0,0,k) = 0
    recurrence: Dict[tuple, int] = {}
    for n in range(0, g.n_max + 1):
        for k in range(1, g.k_max + 1):
            if n == 0:
                recurrence[n, k] = 0
            elif k == 1:
                recurrence[n, k] = n
            else:
                recurrence[n, k] = recurrence[n - 1, k] + recurrence[n, k - 1]

    for n in range(1, g.n_max + 1):
        for k in range(1, g.k_max + 1):
            yield _case(IdentityId.M0_RECURRENCE, n, 0, k, f_base_m0(n, k), recurrence[n, k])


def _m0_hockey_stick(g: GridSpec) -> Iterator[CaseResult]:
    for n in range(1, g.n_max + 1):
        for k in range(1, g.k_max + 1):
            yield _case(IdentityId.M0_HOCKEY_STICK, n, 0, k, F(n, 0, k), binom(n + k - 1, k))


def _kernel(g: GridSpec) -> Iterator[CaseResult]:
    for n in range(1, g.n_max + 1):
        for k in range(1, g.k_max + 1):
            for r in range(1, n + 1):
                yield _case(
                    IdentityId.KERNEL, n, None, k,
                    kernel_identity_lhs(n, k, r), kernel_identity_rhs(n, k, r),
                    r=r,
                )


def _cross_method(g: GridSpec) -> Iterator[CaseResult]:
    session = EvaluationSession()
    for n in range(0, g.n_max + 1):
        for m in range(0, g.m_max + 1):
            for k in range(1, g.k_max + 1):
                q = HypersumQuery(n=n, m=m, k=k)
                reference = F(n, m, k)
                dissent = {}
                for method in EvalMethod:
                    value = f_dispatch(q, method, session)
                    if value != reference:
                        dissent[method.value] = value
                rhs = next(iter(dissent.values()), reference)
                yield _case(IdentityId.CROSS_METHOD, n, m, k, reference, rhs, dissent=list(dissent))


_CHECKERS: Dict[IdentityId, Callable[[GridSpec], Iterator[CaseResult]]] = {
    IdentityId.THEOREM1: _theorem1,
    IdentityId.CERECEDA_RATIONAL: _cereceda_rational,
    IdentityId.CERECEDA_INTEGER: _cereceda_integer,
    IdentityId.DIFFERENCE: _difference,
    IdentityId.M0_RECURRENCE: _m0_recurrence,
    IdentityId.M0_HOCKEY_STICK: _m0_hockey_stick,
    IdentityId.KERNEL: _kernel,
    IdentityId.CROSS_METHOD: _cross_method,
}


def expected_case_count(identity: IdentityId, g: GridSpec) -> int:
    """Number of grid points an identity applies to, after its domain restrictions."""
    n, m, k = g.n_max, g.m_max, g.k_max
    counts = {
        IdentityId.THEOREM1: n * m * k,
        IdentityId.CERECEDA_RATIONAL: n * m * k,
        IdentityId.CERECEDA_INTEGER: n * m * k,
        IdentityId.DIFFERENCE: n * (m + 1) * k,
        IdentityId.M0_RECURRENCE: n * k,
        IdentityId.M0_HOCKEY_STICK: n * k,
        IdentityId.KERNEL: k * n * (n + 1) // 2,
        IdentityId.CROSS_METHOD: (n + 1) * (m + 1) * k,
    }
    return counts[IdentityId(identity)]


# --- Engine ---

def _run(identity: IdentityId, g: GridSpec) -> IdentityReport:
    identity = IdentityId(identity)
    started = time.perf_counter()
    cases = list(_CHECKERS[identity](g))
    report = IdentityReport(identity=identity, cases=cases, elapsed_seconds=time.perf_counter() - started)

    failures = report.failures
    if failures:
        first = failures[0]
        logger.warning(
            f"{identity.value}: {len(failures)}/{report.total} cases failed "
            f"(first at n={first.n}, m={first.m}, k={first.k}: {first.lhs} != {first.rhs})"
        )
    else:
        logger.info(f"{identity.value}: {report.total} cases passed in {report.elapsed_seconds:.3f}s")
    return report


def run_identity(identity: IdentityId, g: GridSpec) -> VerificationReport:
    """
    Evaluates one identity at every applicable grid point. Failing points are
    recorded in the report; the grid is always evaluated to the end.
    """
    return VerificationReport(grid=g, identities=[_run(identity, g)])


def run_all(g: GridSpec, identities: Optional[List[IdentityId]] = None) -> VerificationReport:
    """Runs the selected identities (all by default) in declaration order."""
    selected = set(IdentityId(i) for i in identities) if identities else set(IdentityId)
    reports = [_run(identity, g) for identity in IdentityId if identity in selected]
    return VerificationReport(grid=g, identities=reports)
