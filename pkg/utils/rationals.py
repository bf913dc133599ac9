from fractions import Fraction
from typing import Union

from utils.errors import FormatError

RationalLike = Union[Fraction, int, str]


def to_fraction(value: RationalLike) -> Fraction:
    """
    Parse a rational from a Fraction, an int or a "p/q" / "p" string.

    Floats are rejected: every rational in hforge is exact.
    """
    if isinstance(value, bool):
        raise FormatError(f"Booleans are not rationals: {value!r}")
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        text = value.strip()
        try:
            if "/" in text:
                p, q = text.split("/", 1)
                return Fraction(int(p), int(q))
            return Fraction(int(text))
        except (ValueError, ZeroDivisionError):
            raise FormatError(f"Not a rational literal: {value!r}") from None
    raise FormatError(f"Unsupported rational value {value!r} of type {type(value).__name__}")


def format_fraction(value: RationalLike) -> str:
    """
    Canonical "p/q" rendering: q > 0, gcd(p, q) = 1, integers as "p/1".
    """
    frac = to_fraction(value)
    return f"{frac.numerator}/{frac.denominator}"


def decimal_copy(value: RationalLike, digits: int = 6) -> str:
    """Display-only decimal rendering of a rational."""
    return f"{float(to_fraction(value)):.{digits}f}"
