from fractions import Fraction

import pytest

from app.protocol.amounts import parse_amount, parse_non_negative, percent_of, render_amount
from app.protocol.errors import InvalidAmount


@pytest.mark.parametrize("raw,expected", [
    ("150", Fraction(150)),
    ("1.5", Fraction(3, 2)),
    (".25", Fraction(1, 4)),
    ("-113", Fraction(-113)),
    ("6000/23", Fraction(6000, 23)),
    ("10_000", Fraction(10000)),
    (0.1, Fraction(1, 10)),
    (7, Fraction(7)),
])
def test_parse_amount_accepts_exact_literals(raw, expected):
    assert parse_amount(raw) == expected


@pytest.mark.parametrize("raw", ["1.", "abc", "", "1e3", "1/0", True, None, [1]])
def test_parse_amount_rejects_garbage(raw):
    with pytest.raises(InvalidAmount):
        parse_amount(raw)


def test_parse_non_negative_names_the_field():
    with pytest.raises(InvalidAmount, match="collateral_amount"):
        parse_non_negative("-1", what="collateral_amount")


@pytest.mark.parametrize("x,text", [
    (Fraction(0), "0"),
    (Fraction(-113), "-113"),
    (Fraction(265098, 100), "2650.98"),
    (Fraction(-271798, 100), "-2717.98"),
    (Fraction(1, 8), "0.125"),
    (Fraction(2, 3), "2/3"),
    (Fraction(6000, 23), "6000/23"),
    (Fraction(1, 10 ** 18), "0.000000000000000001"),
    (Fraction(1, 10 ** 19), "1/10000000000000000000"),
])
def test_render_amount(x, text):
    assert render_amount(x) == text
    assert parse_amount(text) == x


def test_percent_of_is_exact():
    assert percent_of(Fraction(2300), Fraction(5)) == 115
    assert percent_of(Fraction(1, 3), Fraction(1)) == Fraction(1, 300)
