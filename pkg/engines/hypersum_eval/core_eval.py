import logging
from itertools import accumulate
from typing import Dict, List, Optional, Tuple

# Shared components
from shared.errors import InternalNegative
from shared.exact_arith import Integer, Natural, binom, ipow
from shared.models import EvalMethod, HypersumQuery

logger = logging.getLogger(__name__)


# --- Evaluation Session ---

class EvaluationSession:
    """
    Call-scoped memo tables for the table-driven evaluators.

    A session only ever caches exact values, so results are identical with or
    without it. Sessions are not locked; give each thread its own.
    """

    def __init__(self):
        self.theorem_memo: Dict[Tuple[int, int, int], Natural] = {}
        self.cereceda_memo: Dict[Tuple[int, int, int], Natural] = {}
        # m -> levels, levels[j][t] = F(t, m, j) with levels[0] the summands
        self.direct_tables: Dict[int, List[List[Natural]]] = {}
        # (m, k) -> RationalPolynomial, filled by the polynomial evaluator
        self.polynomials: Dict[Tuple[int, int], object] = {}

    def direct_levels(self, m: int, n: int, k: int) -> List[List[Natural]]:
        levels = self.direct_tables.get(m)
        if levels is not None and len(levels) > k and len(levels[0]) > n:
            return levels

        if levels is not None:
            n = max(n, len(levels[0]) - 1)
            k = max(k, len(levels) - 1)
        logger.debug(f"Building direct table for m={m} up to n={n}, k={k}")

        # index 0 holds 0: the sums start at i = 1, and 0**0 would otherwise leak in
        summands = [0] + [ipow(i, m) for i in range(1, n + 1)]
        levels = [summands]
        for _ in range(k):
            levels.append(list(accumulate(levels[-1])))
        self.direct_tables[m] = levels
        return levels


def _session(session: Optional[EvaluationSession]) -> EvaluationSession:
    return session if session is not None else EvaluationSession()


# --- Evaluators ---

def f_direct(q: HypersumQuery, session: Optional[EvaluationSession] = None) -> Natural:
    """F(n,m,k) by the recursive definition: k rounds of partial sums over 1^m..n^m."""
    levels = _session(session).direct_levels(q.m, q.n, q.k)
    return levels[q.k][q.n]


def closed_value(n: Natural, m: Natural, k: Natural) -> Natural:
    """
    Single-sum representation F(n,m,k) = sum_{r=1..n} C(n-r+k-1, k-1) r^m.

    Accepts k = 0 as the internal extension F(n,m,0) := n^m, which makes the
    difference identity hold down to k = 1. Queries never reach k = 0.
    """
    if k == 0:
        return ipow(n, m)
    return sum(binom(n - r + k - 1, k - 1) * ipow(r, m) for r in range(1, n + 1))


def f_closed(q: HypersumQuery, session: Optional[EvaluationSession] = None) -> Natural:
    return closed_value(q.n, q.m, q.k)


def f_base_m0(n: Natural, k: Natural) -> Natural:
    """Boundary value F(n,0,k) = C(n+k-1, k) from the hockey-stick identity."""
    if k < 1:
        raise ValueError(f"nesting depth must be at least 1, got k={k}")
    return binom(n + k - 1, k)


def _theorem(n: int, m: int, k: int, memo: Dict[Tuple[int, int, int], Natural]) -> Natural:
    if n == 0:
        return 0
    key = (n, m, k)
    if key in memo:
        return memo[key]

    # Bottom-up over the power. Layer p holds F(t, p, j) for
    # t in [n-(m-p), n] and j in [k, k+m-p], which is all layer p+1 reads.
    layer = {
        (t, j): f_base_m0(t, j)
        for t in range(max(0, n - m), n + 1)
        for j in range(k, k + m + 1)
    }
    for power in range(1, m + 1):
        span = m - power
        next_layer: Dict[Tuple[int, int], Natural] = {}
        for t in range(max(0, n - span), n + 1):
            for j in range(k, k + span + 1):
                if t == 0:
                    next_layer[t, j] = 0
                    continue
                # the second term trades one power for one extra nesting level
                value: Integer = t * layer[t, j] - j * layer[t - 1, j + 1]
                if value < 0:
                    logger.critical(f"Negative intermediate in theorem recurrence at ({t},{power},{j})")
                    raise InternalNegative(EvalMethod.THEOREM.value, t, power, j, value)
                next_layer[t, j] = value
        layer = next_layer

    memo[key] = layer[n, k]
    return memo[key]


def f_theorem(q: HypersumQuery, session: Optional[EvaluationSession] = None) -> Natural:
    """F(n,m,k) = n F(n,m-1,k) - k F(n-1,m-1,k+1), built up from the m=0 base."""
    return _theorem(q.n, q.m, q.k, _session(session).theorem_memo)


def _cereceda(n: int, m: int, k: int, memo: Dict[Tuple[int, int, int], Natural]) -> Natural:
    if n == 0:
        return 0
    key = (n, m, k)
    if key in memo:
        return memo[key]

    # n never changes; layer p holds F(n, p, j) for j in [k, k+m-p]
    layer = [f_base_m0(n, j) for j in range(k, k + m + 1)]
    for power in range(1, m + 1):
        next_layer: List[Natural] = []
        for offset, j in enumerate(range(k, k + m - power + 1)):
            # cleared form: F(n,p,j) = (n+j) F(n,p-1,j) - j F(n,p-1,j+1)
            value: Integer = (n + j) * layer[offset] - j * layer[offset + 1]
            if value < 0:
                logger.critical(f"Negative intermediate in hypersum recurrence at ({n},{power},{j})")
                raise InternalNegative(EvalMethod.CERECEDA.value, n, power, j, value)
            next_layer.append(value)
        layer = next_layer

    memo[key] = layer[0]
    return memo[key]


def f_cereceda(q: HypersumQuery, session: Optional[EvaluationSession] = None) -> Natural:
    """Raises the power one step at a time with the division-free hypersum recurrence."""
    return _cereceda(q.n, q.m, q.k, _session(session).cereceda_memo)


# --- Proof Kernel ---

def _kernel_args(n: int, k: int, r: int) -> int:
    if not (1 <= r <= n) or k < 1:
        raise ValueError(f"kernel identity needs 1 <= r <= n and k >= 1, got n={n}, k={k}, r={r}")
    return n - r + k - 1


def kernel_identity_lhs(n: Natural, k: Natural, r: Natural) -> Integer:
    a = _kernel_args(n, k, r)
    return n * binom(a, k - 1) - k * binom(a, k)


def kernel_identity_rhs(n: Natural, k: Natural, r: Natural) -> Integer:
    a = _kernel_args(n, k, r)
    return r * binom(a, k - 1)


def kernel_check(n: Natural, k: Natural, r: Natural) -> bool:
    """n C(a,k-1) - k C(a,k) == r C(a,k-1) with a = n-r+k-1."""
    return kernel_identity_lhs(n, k, r) == kernel_identity_rhs(n, k, r)


# --- Dispatch ---

def f_dispatch(
    q: HypersumQuery,
    method: EvalMethod,
    session: Optional[EvaluationSession] = None,
) -> Natural:
    """Routes a query to the named evaluator. Evaluator errors propagate unchanged."""
    method = EvalMethod(method)
    if method is EvalMethod.POLYNOMIAL:
        # poly_closed_form interpolates through f_closed, so import on demand
        from engines.poly_closed_form.core_poly import f_polynomial
        return f_polynomial(q, session)
    return _EVALUATORS[method](q, session)


_EVALUATORS = {
    EvalMethod.DIRECT: f_direct,
    EvalMethod.CLOSED: f_closed,
    EvalMethod.THEOREM: f_theorem,
    EvalMethod.CERECEDA: f_cereceda,
}
