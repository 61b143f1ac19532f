"""Helpers for exact rationals in text form ("num/den")."""
from fractions import Fraction
from numbers import Rational

__all__ = ["as_fraction", "format_fraction", "parse_fraction", "is_exact"]


def parse_fraction(text):
    """Parse ``"1/3"``, ``"2"`` or a decimal literal such as ``"0.25"`` exactly."""
    if isinstance(text, Fraction):
        return text
    if isinstance(text, int):
        return Fraction(text)
    s = str(text).strip()
    if not s:
        raise ValueError("empty rational literal")
    try:
        return Fraction(s)
    except (ValueError, ZeroDivisionError) as exc:
        raise ValueError(f"not a rational literal: {text!r}") from exc


def as_fraction(value):
    """Convert ints, Fractions, decimal strings and floats to a Fraction.

    Floats are converted exactly (their binary value), never rounded.
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, str):
        return parse_fraction(value)
    if isinstance(value, Rational):
        return Fraction(value.numerator, value.denominator)
    return Fraction(float(value))


def format_fraction(value):
    q = as_fraction(value)
    return f"{q.numerator}/{q.denominator}"


def is_exact(value):
    return isinstance(value, (int, Fraction)) and not isinstance(value, bool)
