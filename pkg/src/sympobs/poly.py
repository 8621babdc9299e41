"""Exact polynomial arithmetic over the rationals.

Two representations live here:

* :class:`Poly` -- sparse multivariate polynomials, a mapping from exponent
  tuples to :class:`fractions.Fraction` coefficients.
* univariate coefficient lists ``[c0, c1, ..., cd]`` (lowest degree first)
  used by the gcd, subresultant and rational-root routines.
"""

from __future__ import annotations

import math
from fractions import Fraction
from itertools import combinations
from typing import Iterable, Mapping, Sequence

Exponent = tuple[int, ...]


def _frac(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, float):
        raise TypeError("floats are not accepted in exact polynomials")
    return Fraction(x)


class Poly:
    """Sparse polynomial in ``nvars`` variables with rational coefficients.

    Instances are immutable; zero coefficients are never stored.
    """

    __slots__ = ("nvars", "_terms", "_hash")

    def __init__(self, nvars: int, terms: Mapping[Exponent, object] | None = None):
        self.nvars = nvars
        clean: dict[Exponent, Fraction] = {}
        for exp, c in (terms or {}).items():
            if len(exp) != nvars:
                raise ValueError(f"exponent {exp} has wrong length for {nvars} variables")
            c = _frac(c)
            if c:
                clean[tuple(exp)] = c
        self._terms = clean
        self._hash = None

    # construction -----------------------------------------------------
    @classmethod
    def const(cls, nvars: int, c) -> "Poly":
        return cls(nvars, {(0,) * nvars: c})

    @classmethod
    def var(cls, nvars: int, i: int) -> "Poly":
        exp = [0] * nvars
        exp[i] = 1
        return cls(nvars, {tuple(exp): 1})

    @property
    def terms(self) -> dict[Exponent, Fraction]:
        return dict(self._terms)

    def items(self):
        return self._terms.items()

    # predicates -------------------------------------------------------
    def is_zero(self) -> bool:
        return not self._terms

    def is_constant(self) -> bool:
        return all(not any(e) for e in self._terms)

    def constant_term(self) -> Fraction:
        return self._terms.get((0,) * self.nvars, Fraction(0))

    def variables(self) -> set[int]:
        used = set()
        for exp in self._terms:
            used.update(i for i, e in enumerate(exp) if e)
        return used

    def degree_in(self, i: int) -> int:
        if not self._terms:
            return -1
        return max(exp[i] for exp in self._terms)

    def total_degree(self) -> int:
        if not self._terms:
            return -1
        return max(sum(exp) for exp in self._terms)

    # arithmetic -------------------------------------------------------
    def _coerce(self, other) -> "Poly":
        if isinstance(other, Poly):
            if other.nvars != self.nvars:
                raise ValueError("polynomials live in different variable sets")
            return other
        return Poly.const(self.nvars, other)

    def __add__(self, other):
        other = self._coerce(other)
        out = dict(self._terms)
        for exp, c in other._terms.items():
            out[exp] = out.get(exp, 0) + c
        return Poly(self.nvars, out)

    __radd__ = __add__

    def __neg__(self):
        return Poly(self.nvars, {e: -c for e, c in self._terms.items()})

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        if not isinstance(other, Poly):
            c = _frac(other)
            return Poly(self.nvars, {e: v * c for e, v in self._terms.items()})
        other = self._coerce(other)
        out: dict[Exponent, Fraction] = {}
        for e1, c1 in self._terms.items():
            for e2, c2 in other._terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                out[e] = out.get(e, 0) + c1 * c2
        return Poly(self.nvars, out)

    __rmul__ = __mul__

    def __truediv__(self, other):
        c = _frac(other)
        if not c:
            raise ZeroDivisionError("division of a polynomial by zero")
        return self * (1 / c)

    def __pow__(self, k: int):
        if k < 0:
            raise ValueError("negative powers are not polynomials")
        result = Poly.const(self.nvars, 1)
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def __eq__(self, other):
        if isinstance(other, Poly):
            return self.nvars == other.nvars and self._terms == other._terms
        try:
            return self == Poly.const(self.nvars, other)
        except TypeError:
            return NotImplemented

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.nvars, frozenset(self._terms.items())))
        return self._hash

    def __repr__(self):
        return f"Poly({self.nvars}, {self._terms!r})"

    # structure --------------------------------------------------------
    def coeffs_in(self, i: int) -> list["Poly"]:
        """Coefficients of ``x_i^k`` for ``k = 0..deg``, as polynomials free of ``x_i``."""
        d = self.degree_in(i)
        buckets: list[dict[Exponent, Fraction]] = [dict() for _ in range(max(d, 0) + 1)]
        for exp, c in self._terms.items():
            k = exp[i]
            e = list(exp)
            e[i] = 0
            buckets[k][tuple(e)] = c
        return [Poly(self.nvars, b) for b in buckets]

    def linear_form_in(self, i: int):
        """Return ``(a, b)`` with ``self == a*x_i + b`` if ``self`` has degree 1 in ``x_i``."""
        if self.degree_in(i) != 1:
            return None
        b, a = self.coeffs_in(i)
        return a, b

    def substitute(self, i: int, value: "Poly") -> "Poly":
        value = self._coerce(value)
        parts = self.coeffs_in(i)
        result = Poly(self.nvars)
        power = Poly.const(self.nvars, 1)
        for k, part in enumerate(parts):
            if k:
                power = power * value
            if not part.is_zero():
                result = result + part * power
        return result

    def substitute_many(self, values: Mapping[int, object]) -> "Poly":
        out = self
        for i, v in values.items():
            out = out.substitute(i, v if isinstance(v, Poly) else Poly.const(self.nvars, v))
        return out

    def evaluate(self, point: Sequence):
        total = 0
        for exp, c in self._terms.items():
            term = c
            for x, e in zip(point, exp):
                if e:
                    term = term * x**e
            total = total + term
        return total

    def derivative(self, i: int) -> "Poly":
        out: dict[Exponent, Fraction] = {}
        for exp, c in self._terms.items():
            if exp[i]:
                e = list(exp)
                e[i] -= 1
                out[tuple(e)] = c * exp[i]
        return Poly(self.nvars, out)

    def to_univariate(self, i: int) -> list[Fraction]:
        """Coefficient list in ``x_i``; the polynomial must not involve other variables."""
        if self.variables() - {i}:
            raise ValueError("polynomial is not univariate in the requested variable")
        return trim([p.constant_term() for p in self.coeffs_in(i)])

    def format(self, names: Sequence[str]) -> str:
        if not self._terms:
            return "0"
        pieces = []
        for exp in sorted(self._terms, key=lambda e: (sum(e), tuple(-x for x in e))):
            c = self._terms[exp]
            mono = "*".join(
                (n if e == 1 else f"{n}^{e}") for n, e in zip(names, exp) if e
            )
            pieces.append(_format_term(c, mono))
        return _join_terms(pieces)


def _format_term(c: Fraction, mono: str) -> tuple[bool, str]:
    neg = c < 0
    mag = -c if neg else c
    if not mono:
        body = str(mag)
    elif mag == 1:
        body = mono
    else:
        body = f"{mag}*{mono}"
    return neg, body


def _join_terms(pieces: list[tuple[bool, str]]) -> str:
    out = []
    for k, (neg, body) in enumerate(pieces):
        if k == 0:
            out.append(("-" if neg else "") + body)
        else:
            out.append((" - " if neg else " + ") + body)
    return "".join(out)


# ----------------------------------------------------------------------
# determinants and resultants


def determinant(matrix: Sequence[Sequence[Poly]], nvars: int) -> Poly:
    """Exact determinant by Laplace expansion memoised over column subsets.

    Costs ``O(2^m m)`` ring operations for an ``m x m`` matrix, which is
    cheap for the small Sylvester matrices used during elimination.
    """
    m = len(matrix)
    if m == 0:
        return Poly.const(nvars, 1)
    # minors[cols] = det of rows 0..k-1 restricted to the column set `cols`
    minors: dict[tuple[int, ...], Poly] = {(): Poly.const(nvars, 1)}
    for k in range(m):
        row = matrix[k]
        nxt: dict[tuple[int, ...], Poly] = {}
        for cols in combinations(range(m), k + 1):
            acc = Poly(nvars)
            for pos, j in enumerate(cols):
                entry = row[j]
                if entry.is_zero():
                    continue
                rest = cols[:pos] + cols[pos + 1 :]
                sub = minors.get(rest)
                if sub is None or sub.is_zero():
                    continue
                sign = -1 if (k - pos) % 2 else 1  # parity of moving column j to the end
                acc = acc + entry * sub * sign
            nxt[cols] = acc
        minors = nxt
    return minors[tuple(range(m))]


def resultant(f: Poly, g: Poly, i: int) -> Poly:
    """Sylvester resultant of ``f`` and ``g`` with respect to variable ``x_i``."""
    fc = f.coeffs_in(i)
    gc = g.coeffs_in(i)
    m, n = len(fc) - 1, len(gc) - 1
    if m < 0 or n < 0:
        return Poly(f.nvars)
    if m == 0:
        return fc[0] ** n
    if n == 0:
        return gc[0] ** m
    size = m + n
    zero = Poly(f.nvars)
    rows = []
    for r in range(n):
        row = [zero] * size
        for k, c in enumerate(reversed(fc)):
            row[r + k] = c
        rows.append(row)
    for r in range(m):
        row = [zero] * size
        for k, c in enumerate(reversed(gc)):
            row[r + k] = c
        rows.append(row)
    return determinant(rows, f.nvars)


# ----------------------------------------------------------------------
# univariate helpers on coefficient lists (lowest degree first)


def trim(coeffs: Iterable) -> list[Fraction]:
    out = [_frac(c) for c in coeffs]
    while out and out[-1] == 0:
        out.pop()
    return out


def degree(p: Sequence[Fraction]) -> int:
    return len(trim(p)) - 1


def poly_divmod(a: Sequence[Fraction], b: Sequence[Fraction]):
    a, b = trim(a), trim(b)
    if not b:
        raise ZeroDivisionError("polynomial division by zero")
    q = [Fraction(0)] * max(len(a) - len(b) + 1, 0)
    r = list(a)
    lead = b[-1]
    while len(r) >= len(b) and r:
        shift = len(r) - len(b)
        c = r[-1] / lead
        q[shift] = c
        for k, bc in enumerate(b):
            r[shift + k] -= c * bc
        r = trim(r)
    return trim(q), r


def monic(p: Sequence[Fraction]) -> list[Fraction]:
    p = trim(p)
    if not p:
        return p
    lead = p[-1]
    return [c / lead for c in p]


def euclid_gcd(a: Sequence[Fraction], b: Sequence[Fraction]) -> list[Fraction]:
    """Monic gcd in Q[x] by the Euclidean algorithm (gcd(0, 0) = 0)."""
    a, b = trim(a), trim(b)
    while b:
        _, r = poly_divmod(a, b)
        a, b = b, r
    return monic(a)


def subresultant_prs(a: Sequence[Fraction], b: Sequence[Fraction]) -> list[list[Fraction]]:
    """Subresultant polynomial remainder sequence of ``a`` and ``b``.

    Collins' recurrence: each pseudo-remainder is divided by ``g * h^delta``
    so that, for integer input, every entry stays integral.
    """
    a, b = trim(a), trim(b)
    if degree(a) < degree(b):
        a, b = b, a
    seq = [a, b]
    if not b:
        return seq[:1]
    g = Fraction(1)
    h = Fraction(1)
    while True:
        f1, f2 = seq[-2], seq[-1]
        delta = degree(f1) - degree(f2)
        r = _pseudo_remainder(f1, f2)
        if not r:
            break
        scale = g * h**delta
        seq.append([c / scale for c in r])
        g = f2[-1]
        h = h ** (1 - delta) * g**delta
        if degree(r) == 0:
            break
    return seq


def _pseudo_remainder(a: Sequence[Fraction], b: Sequence[Fraction]) -> list[Fraction]:
    a, b = trim(a), trim(b)
    scale = b[-1] ** (degree(a) - degree(b) + 1)
    _, r = poly_divmod([c * scale for c in a], b)
    return r


def subresultant_gcd(a: Sequence[Fraction], b: Sequence[Fraction]) -> list[Fraction]:
    """Monic gcd read off the last nonzero subresultant."""
    seq = subresultant_prs(a, b)
    return monic(seq[-1])


def reflect(p: Sequence[Fraction]) -> list[Fraction]:
    """Coefficients of ``p(-x)``."""
    return trim(c if k % 2 == 0 else -c for k, c in enumerate(p))


def squarefree(p: Sequence[Fraction]) -> list[Fraction]:
    p = trim(p)
    if degree(p) <= 0:
        return monic(p)
    dp = trim(k * c for k, c in enumerate(p))[1:]
    g = euclid_gcd(p, dp)
    q, _ = poly_divmod(p, g)
    return monic(q)


def evaluate(p: Sequence, x):
    acc = 0
    for c in reversed(p):
        acc = acc * x + c
    return acc


def _divisors(n: int) -> list[int]:
    n = abs(n)
    small, large = [], []
    d = 1
    while d * d <= n:
        if n % d == 0:
            small.append(d)
            if d * d != n:
                large.append(n // d)
        d += 1
    return small + large[::-1]


def integer_primitive(p: Sequence[Fraction]) -> list[int]:
    p = trim(p)
    if not p:
        return []
    den = math.lcm(*(c.denominator for c in p))
    ints = [int(c * den) for c in p]
    g = math.gcd(*ints)
    return [v // g for v in ints]


def rational_roots(p: Sequence[Fraction]) -> list[Fraction]:
    """All distinct rational roots, by the rational root theorem."""
    ints = integer_primitive(p)
    if not ints:
        raise ValueError("the zero polynomial has every rational number as a root")
    roots: list[Fraction] = []
    k = 0
    while k < len(ints) and ints[k] == 0:
        k += 1
    if k:
        roots.append(Fraction(0))
    ints = ints[k:]
    if len(ints) <= 1:
        return roots
    lead, const = ints[-1], ints[0]
    candidates = set()
    for num in _divisors(const):
        for den in _divisors(lead):
            candidates.add(Fraction(num, den))
            candidates.add(Fraction(-num, den))
    for r in sorted(candidates):
        if evaluate(ints, r) == 0:
            roots.append(r)
    return sorted(roots)


def format_univariate(p: Sequence[Fraction], name: str = "x") -> str:
    return Poly(1, {(k,): c for k, c in enumerate(trim(p))}).format([name])
