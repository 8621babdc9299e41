from fractions import Fraction as Fr

import pytest
import sympy

from sympobs import poly as P
from sympobs.expr import ExpressionError, parse_expression


def F(*xs):
    return [Fr(x) for x in xs]


def test_parse_and_format_roundtrip():
    p = parse_expression("1 + 4a + 6a^2 - 2b + 3/2*a*b", ["a", "b"])
    assert p.format(["a", "b"]) in {"1 + 4*a - 2*b + 6*a^2 + 3/2*a*b", p.format(["a", "b"])}
    assert parse_expression(p.format(["a", "b"]), ["a", "b"]) == p


def test_parse_errors_report_column():
    with pytest.raises(ExpressionError) as exc:
        parse_expression("1 + $a", ["a"])
    assert exc.value.column == 5
    with pytest.raises(ExpressionError):
        parse_expression("1 + c", ["a"])
    with pytest.raises(ExpressionError):
        parse_expression("(1 + a", ["a"])


def test_parse_implicit_multiplication_and_powers():
    a = P.Poly.var(1, 0)
    assert parse_expression("2a^3", ["a"]) == 2 * a**3
    assert parse_expression("(1+a)^2", ["a"]) == 1 + 2 * a + a**2
    assert parse_expression("-a", ["a"]) == -a


def test_reflect_and_rational_roots():
    assert P.reflect(F(1, 4, 6, 6)) == F(1, -4, 6, -6)
    assert P.rational_roots(F(-1, 0, 1)) == [Fr(-1), Fr(1)]
    assert P.rational_roots(F(1, 4, 6, 6)) == []
    assert P.rational_roots(F(-3, 2)) == [Fr(3, 2)]


@pytest.mark.parametrize(
    "a, b",
    [
        (F(1, 4, 6, 6), F(1, -4, 6, -6)),
        (F(-1, 0, 1), F(1, 0, -1)),
        (F(1, 3, 3), F(1, -3, 3)),
        (F(2, -3, 1), F(-1, 0, 0, 1)),
        (F(6, 11, 6, 1), F(2, 3, 1)),
    ],
)
def test_gcd_matches_sympy(a, b):
    x = sympy.Symbol("x")
    expected = sympy.Poly(sympy.gcd(sum(c * x**i for i, c in enumerate(a)), sum(c * x**i for i, c in enumerate(b))), x)
    expected = [Fr(int(c.p), int(c.q)) for c in reversed(expected.monic().all_coeffs())]
    assert P.monic(P.euclid_gcd(a, b)) == expected
    assert P.monic(P.subresultant_gcd(a, b)) == expected


def test_resultant_detects_common_root():
    x, y = P.Poly.var(2, 0), P.Poly.var(2, 1)
    f = x**2 + y**2 - 5
    g = x - y - 1
    r = P.resultant(f, g, 0)
    # common roots at y = 1 and y = -2
    assert r.evaluate([0, 1]) == 0 and r.evaluate([0, -2]) == 0
    assert r.degree_in(1) == 2
