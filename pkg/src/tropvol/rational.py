from fractions import Fraction
from numbers import Rational

from .errors import FormatError


def to_fraction(x):
    """Exact rational from an int, Fraction or "p/q" string. Floats are refused."""
    if isinstance(x, bool):
        raise FormatError(f"not a rational number: {x!r}")
    if isinstance(x, Rational):
        return Fraction(x)
    if isinstance(x, str):
        try:
            return Fraction(x.strip())
        except (ValueError, ZeroDivisionError):
            raise FormatError(f"not a rational number: {x!r}") from None
    raise FormatError(f"not an exact rational: {x!r}")


def fmt(x):
    """Canonical string form: lowest terms, positive denominator, integers bare."""
    x = Fraction(x)
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"
