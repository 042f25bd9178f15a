import logging
from typing import List, Optional, Sequence

# Shared components
from shared.errors import ClosedFormError
from shared.exact_arith import Natural, Rational, make_rational
from shared.models import HypersumQuery, RationalPolynomial, RenderFormat

from engines.hypersum_eval.core_eval import EvaluationSession, closed_value

logger = logging.getLogger(__name__)


# --- Exact Lagrange Interpolation ---

def _vanishing_poly(xs: Sequence[int]) -> List[int]:
    """Coefficients (ascending) of prod (x - x_i)."""
    root = [1]
    for x in xs:
        root.insert(0, 0)
        for j in range(len(root) - 1):
            root[j] -= root[j + 1] * x
    return root


def _deflate(root: List[int], x: int) -> List[int]:
    """Synthetic division of root by (x - x0); the remainder is zero by construction."""
    output = [0] * (len(root) - 2) + [1]
    for j in range(len(root) - 2, 0, -1):
        output[j - 1] = root[j] + output[j] * x
    return output


def _eval_int_poly(coeffs: Sequence[int], x: int) -> int:
    value = 0
    for c in reversed(coeffs):
        value = value * x + c
    return value


def lagrange_interpolate(xs: Sequence[int], ys: Sequence[int]) -> RationalPolynomial:
    """
    The unique polynomial of degree < len(xs) through the points (xs[i], ys[i]),
    built in Lagrange form over exact rationals. No linear solve is involved.
    """
    if len(xs) != len(ys):
        raise ValueError("interpolation needs one value per node")
    root = _vanishing_poly(xs)
    coeffs = [make_rational(0)] * len(xs)
    for x, y in zip(xs, ys):
        if y == 0:
            continue
        numerator = _deflate(root, x)
        scale = make_rational(y, _eval_int_poly(numerator, x))
        for j, c in enumerate(numerator):
            if c:
                coeffs[j] += c * scale
    return RationalPolynomial(coeffs=coeffs)


# --- Closed Form ---

def closed_form_poly(m: Natural, k: Natural) -> RationalPolynomial:
    """
    F(., m, k) as a polynomial in n, interpolated through n = 0..m+k.

    The degree m+k is asserted rather than assumed, and the result is checked
    against the closed form at m+k+1 further points.
    """
    if k < 1:
        raise ValueError(f"nesting depth must be at least 1, got k={k}")
    degree = m + k
    nodes = list(range(degree + 1))
    poly = lagrange_interpolate(nodes, [closed_value(n, m, k) for n in nodes])

    if poly.degree != degree:
        raise ClosedFormError(f"F(n,{m},{k}) interpolated to degree {poly.degree}, expected {degree}")
    if poly.coeffs[0] != 0:
        raise ClosedFormError(f"F(n,{m},{k}) polynomial has nonzero constant term {poly.coeffs[0]}")
    for n in range(degree + 1, 2 * degree + 2):
        if poly_eval(poly, n) != closed_value(n, m, k):
            raise ClosedFormError(f"F(n,{m},{k}) polynomial disagrees with the closed form at n={n}")

    logger.debug(f"Derived closed form for m={m}, k={k}: {poly_render(poly, RenderFormat.PLAIN)}")
    return poly


def poly_eval(p: RationalPolynomial, n: int) -> Rational:
    """Horner evaluation in exact arithmetic."""
    value = make_rational(0)
    for c in reversed(p.coeffs):
        value = value * n + c
    return value


def f_polynomial(q: HypersumQuery, session: Optional[EvaluationSession] = None) -> Natural:
    """Evaluates F(n,m,k) through the interpolated polynomial, cached per (m, k) in the session."""
    polynomials = session.polynomials if session is not None else {}
    poly = polynomials.get((q.m, q.k))
    if poly is None:
        poly = closed_form_poly(q.m, q.k)
        polynomials[(q.m, q.k)] = poly

    value = poly_eval(poly, q.n)
    if value.denominator != 1:
        raise ClosedFormError(f"F({q.n},{q.m},{q.k}) evaluated to non-integer {value}")
    return value.numerator


# --- Rendering ---

def _plain_term(c: Rational, power: int) -> str:
    if power == 0:
        return str(c)
    monomial = "n" if power == 1 else f"n^{power}"
    return monomial if c == 1 else f"{c}*{monomial}"


def _latex_term(c: Rational, power: int) -> str:
    number = str(c.numerator) if c.denominator == 1 else f"\\frac{{{c.numerator}}}{{{c.denominator}}}"
    if power == 0:
        return number
    monomial = "n" if power == 1 else f"n^{{{power}}}"
    return monomial if c == 1 else f"{number} {monomial}"


def _join_terms(p: RationalPolynomial, term) -> str:
    text = ""
    for power, c in enumerate(p.coeffs):
        if c == 0:
            continue
        body = term(abs(c), power)
        if not text:
            text = f"-{body}" if c < 0 else body
        else:
            text += f" - {body}" if c < 0 else f" + {body}"
    return text or "0"


def poly_render(p: RationalPolynomial, format: RenderFormat = RenderFormat.PLAIN) -> str:
    """Ascending-power rendering as plain text, LaTeX, or power,numerator,denominator CSV."""
    format = RenderFormat(format)
    if format is RenderFormat.PLAIN:
        return _join_terms(p, _plain_term)
    if format is RenderFormat.LATEX:
        return _join_terms(p, _latex_term)

    lines = ["power,numerator,denominator"]
    lines += [
        f"{power},{c.numerator},{c.denominator}"
        for power, c in enumerate(p.coeffs)
        if c != 0
    ]
    return "\n".join(lines) + "\n"
