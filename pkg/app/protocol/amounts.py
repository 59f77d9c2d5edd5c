from __future__ import annotations

import re
from fractions import Fraction
from typing import Any

from app.protocol.errors import InvalidAmount

Amount = Fraction

ZERO = Fraction(0)
ONE = Fraction(1)
HUNDRED = Fraction(100)

MAX_FRACTION_DIGITS = 18

_DECIMAL_RE = re.compile(r"^[+-]?(\d+(\.\d+)?|\.\d+)$")
_RATIO_RE = re.compile(r"^[+-]?\d+/\d+$")


def parse_amount(value: Any) -> Fraction:
    """
    Parse an exact amount from a decimal string ("1.5"), a ratio ("6000/23"),
    an int or a Fraction. Floats go through their shortest repr so 0.1 stays 1/10.
    """
    if isinstance(value, bool):
        raise InvalidAmount(f"not an amount: {value!r}")
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, float):
        return Fraction(repr(value))
    if isinstance(value, str):
        s = value.strip().replace("_", "")
        if _DECIMAL_RE.match(s) or _RATIO_RE.match(s):
            try:
                return Fraction(s)
            except ZeroDivisionError as e:
                raise InvalidAmount(f"zero denominator: {value!r}") from e
    raise InvalidAmount(f"not an amount: {value!r}")


def parse_non_negative(value: Any, *, what: str = "amount") -> Fraction:
    x = parse_amount(value)
    if x < 0:
        raise InvalidAmount(f"{what} must be >= 0, got {render_amount(x)}")
    return x


def _terminates(den: int) -> bool:
    for p in (2, 5):
        while den % p == 0:
            den //= p
    return den == 1


def render_amount(x: Fraction) -> str:
    """Exact decimal rendering; "p/q" when the expansion does not terminate within 18 digits."""
    x = Fraction(x)
    if x.denominator == 1:
        return str(x.numerator)
    if not _terminates(x.denominator):
        return f"{x.numerator}/{x.denominator}"

    sign = "-" if x < 0 else ""
    num = abs(x.numerator)
    den = x.denominator
    scale = 10 ** MAX_FRACTION_DIGITS
    scaled, rem = divmod(num * scale, den)
    if rem:
        return f"{x.numerator}/{x.denominator}"
    whole, frac = divmod(scaled, scale)
    digits = str(frac).rjust(MAX_FRACTION_DIGITS, "0").rstrip("0")
    return f"{sign}{whole}.{digits}"


def percent_of(x: Fraction, rate: Fraction) -> Fraction:
    return x * rate / HUNDRED
