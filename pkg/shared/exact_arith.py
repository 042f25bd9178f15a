# shared/exact_arith.py
# Exact arithmetic foundation. Python's int is already arbitrary precision and
# fractions.Fraction keeps rationals in lowest terms with a positive
# denominator, so the number types below are aliases rather than wrappers.

from fractions import Fraction

# --- Number Types ---
Natural = int    # nonnegative by convention, checked at the boundaries
Integer = int
Rational = Fraction


def make_rational(numerator: Integer, denominator: Integer = 1) -> Rational:
    """
    Builds a normalized rational. Fraction reduces eagerly and moves the sign
    to the numerator, so two equal rationals always compare structurally equal.
    """
    if denominator == 0:
        raise ZeroDivisionError("rational denominator must be nonzero")
    return Fraction(numerator, denominator)


def binom(a: Natural, b: Natural) -> Natural:
    """
    Binomial coefficient C(a, b), with C(a, b) = 0 whenever b > a.

    Uses the multiplicative form prod_{i=1..b} (a - b + i) / i with an exact
    division at every step, so no factorial-sized intermediate is ever built.
    """
    if a < 0 or b < 0:
        raise ValueError(f"binom expects naturals, got ({a}, {b})")
    if b > a:
        return 0
    b = min(b, a - b)
    result = 1
    for i in range(1, b + 1):
        # result holds C(a - b + i - 1, i - 1) here, so the division is exact
        result = result * (a - b + i) // i
    return result


def ipow(r: Natural, m: Natural) -> Natural:
    """r**m with the empty-product convention 0**0 == 1."""
    if r < 0 or m < 0:
        raise ValueError(f"ipow expects naturals, got ({r}, {m})")
    return r ** m
