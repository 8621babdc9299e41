"""Finitely presented, evenly graded cohomology rings over the rationals.

A ring is given by generators with positive even cohomological degrees, a
list of rewrite rules ``leading monomial -> polynomial`` and a top degree
``2n`` above which everything vanishes.  Normal forms are computed by
rewriting; the presentation is checked for termination and confluence on
every monomial of degree at most ``2n`` when it is built.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from itertools import product as iproduct
from typing import Iterable, Mapping, Sequence

from .expr import parse_expression
from .poly import Exponent, Poly

_NAME = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")


class PresentationError(ValueError):
    """The generators or relations do not define a usable ring."""


@dataclass(frozen=True)
class Relation:
    lead: Exponent
    rhs: Poly

    def format(self, names: Sequence[str]) -> str:
        lhs = Poly(len(self.lead), {self.lead: 1}).format(names)
        return f"{lhs} = {self.rhs.format(names)}"


class RingPresentation:
    """Commutative graded algebra ``Q[generators] / (relations, degree > top)``."""

    def __init__(
        self,
        generators: Sequence[tuple[str, int]],
        relations: Iterable[tuple[Exponent, Poly]] = (),
        top_degree: int = 0,
    ):
        names = [g for g, _ in generators]
        if len(set(names)) != len(names):
            raise PresentationError(f"duplicate generator names in {names}")
        for name, deg in generators:
            if not _NAME.match(name):
                raise PresentationError(f"invalid generator name {name!r}")
            if not isinstance(deg, int) or deg <= 0 or deg % 2:
                raise PresentationError(
                    f"generator {name!r} has degree {deg}; only positive even degrees are supported"
                )
        if top_degree < 0 or top_degree % 2:
            raise PresentationError(f"top degree must be a non-negative even integer, got {top_degree}")
        self.names: tuple[str, ...] = tuple(names)
        self.degrees: tuple[int, ...] = tuple(d for _, d in generators)
        self.top_degree = top_degree
        self.nvars = len(names)
        self.relations: tuple[Relation, ...] = tuple(
            self._check_relation(lead, rhs) for lead, rhs in relations
        )
        self._nf_cache: dict[Exponent, dict[Exponent, Fraction]] = {}
        self._in_progress: set[Exponent] = set()
        self._basis = self._compute_basis()
        self._verify_confluence()

    # -- construction helpers ----------------------------------------
    @classmethod
    def from_strings(
        cls,
        generators: Sequence[tuple[str, int]],
        relations: Iterable[str] = (),
        top_degree: int = 0,
    ) -> "RingPresentation":
        names = [g for g, _ in generators]
        parsed = []
        for text in relations:
            if text.count("=") != 1:
                raise PresentationError(f"relation {text!r} must have the form 'monomial = polynomial'")
            lhs_text, rhs_text = text.split("=")
            lhs = parse_expression(lhs_text, names)
            rhs = parse_expression(rhs_text, names)
            parsed.append((_as_monomial(lhs, lhs_text), rhs))
        return cls(generators, parsed, top_degree)

    def _check_relation(self, lead: Exponent, rhs: Poly) -> Relation:
        lead = tuple(lead)
        if len(lead) != self.nvars or rhs.nvars != self.nvars:
            raise PresentationError("relation does not match the generator list")
        if not any(lead):
            raise PresentationError("a relation cannot rewrite the unit monomial")
        d = self.monomial_degree(lead)
        if d > self.top_degree:
            raise PresentationError(
                f"relation with leading monomial of degree {d} exceeds the top degree {self.top_degree}"
            )
        for exp in rhs.terms:
            if self.monomial_degree(exp) != d:
                raise PresentationError(
                    "relations must be homogeneous: "
                    f"{Relation(lead, rhs).format(self.names)} mixes degrees"
                )
        if lead in rhs.terms:
            raise PresentationError(
                f"relation {Relation(lead, rhs).format(self.names)} rewrites a monomial to itself"
            )
        return Relation(lead, rhs)

    # -- degrees and monomials ---------------------------------------
    def monomial_degree(self, exp: Exponent) -> int:
        return sum(e * d for e, d in zip(exp, self.degrees))

    @property
    def n(self) -> int:
        return self.top_degree // 2

    def all_monomials(self) -> list[Exponent]:
        """Every monomial of cohomological degree at most the top degree."""
        bounds = [self.top_degree // d for d in self.degrees]
        out = []
        for exp in iproduct(*(range(b + 1) for b in bounds)):
            if self.monomial_degree(exp) <= self.top_degree:
                out.append(tuple(exp))
        out.sort(key=self._order_key)
        return out

    def _order_key(self, exp: Exponent):
        return (self.monomial_degree(exp), tuple(-e for e in exp))

    def _reducible_by(self, exp: Exponent) -> list[Relation]:
        return [r for r in self.relations if all(e >= l for e, l in zip(exp, r.lead))]

    def _compute_basis(self) -> tuple[Exponent, ...]:
        return tuple(m for m in self.all_monomials() if not self._reducible_by(m))

    @property
    def basis(self) -> tuple[Exponent, ...]:
        """Normal-form monomials; their integer span is the integral lattice."""
        return self._basis

    # -- rewriting ---------------------------------------------------
    def _nf_monomial(self, exp: Exponent) -> dict[Exponent, Fraction]:
        if self.monomial_degree(exp) > self.top_degree:
            return {}
        cached = self._nf_cache.get(exp)
        if cached is not None:
            return cached
        rules = self._reducible_by(exp)
        if not rules:
            result = {exp: Fraction(1)}
        else:
            if exp in self._in_progress:
                raise PresentationError(
                    f"rewriting does not terminate at {self.format_monomial(exp)}"
                )
            self._in_progress.add(exp)
            try:
                result = self._apply_rule(exp, rules[0])
            finally:
                self._in_progress.discard(exp)
        self._nf_cache[exp] = result
        return result

    def _apply_rule(self, exp: Exponent, rule: Relation) -> dict[Exponent, Fraction]:
        quotient = tuple(e - l for e, l in zip(exp, rule.lead))
        acc: dict[Exponent, Fraction] = {}
        for rexp, c in rule.rhs.items():
            shifted = tuple(a + b for a, b in zip(quotient, rexp))
            for m, v in self._nf_monomial(shifted).items():
                acc[m] = acc.get(m, 0) + c * v
        return {m: v for m, v in acc.items() if v}

    def _verify_confluence(self):
        for exp in self.all_monomials():
            target = self._nf_monomial(exp)
            for rule in self._reducible_by(exp):
                if self._apply_rule(exp, rule) != target:
                    raise PresentationError(
                        "presentation is not confluent: "
                        f"{self.format_monomial(exp)} has two different normal forms"
                    )

    def normalize(self, raw: Poly | str | Mapping[Exponent, object]) -> "RingElement":
        """Normal form of a formal polynomial in the generators."""
        if isinstance(raw, str):
            raw = parse_expression(raw, self.names, truncate=self.truncate)
        elif not isinstance(raw, Poly):
            raw = Poly(self.nvars, raw)
        if raw.nvars != self.nvars:
            raise ValueError("polynomial uses a different number of generators than the ring")
        acc: dict[Exponent, Fraction] = {}
        for exp, c in raw.items():
            for m, v in self._nf_monomial(exp).items():
                acc[m] = acc.get(m, 0) + c * v
        return RingElement(self, acc)

    def truncate(self, p: Poly) -> Poly:
        return Poly(p.nvars, {e: c for e, c in p.items() if self.monomial_degree(e) <= self.top_degree})

    def element(self, value) -> "RingElement":
        if isinstance(value, RingElement):
            if value.ring is not self:
                raise ValueError("element belongs to a different ring")
            return value
        if isinstance(value, (int, Fraction)):
            return RingElement(self, {(0,) * self.nvars: value})
        return self.normalize(value)

    def one(self) -> "RingElement":
        return self.element(1)

    def zero(self) -> "RingElement":
        return RingElement(self, {})

    def gen(self, name: str) -> "RingElement":
        return self.normalize(Poly.var(self.nvars, self.names.index(name)))

    def monomial(self, exp: Exponent) -> "RingElement":
        return self.normalize(Poly(self.nvars, {tuple(exp): 1}))

    def format_monomial(self, exp: Exponent) -> str:
        return Poly(self.nvars, {exp: 1}).format(self.names)

    def describe(self) -> dict:
        return {
            "generators": {n: d for n, d in zip(self.names, self.degrees)},
            "relations": [r.format(self.names) for r in self.relations],
            "top_degree": self.top_degree,
        }

    def same_presentation(self, other: "RingPresentation") -> bool:
        return (
            self.names == other.names
            and self.degrees == other.degrees
            and self.top_degree == other.top_degree
            and self.relations == other.relations
        )

    def __repr__(self):
        rels = ", ".join(r.format(self.names) for r in self.relations)
        gens = ", ".join(f"{n}:{d}" for n, d in zip(self.names, self.degrees))
        return f"RingPresentation([{gens}] / ({rels}), top={self.top_degree})"


def _as_monomial(p: Poly, text: str) -> Exponent:
    terms = p.terms
    if len(terms) != 1 or next(iter(terms.values())) != 1:
        raise PresentationError(f"left side {text.strip()!r} of a relation must be a single monomial")
    return next(iter(terms))


class RingElement:
    """Normal-form element of a :class:`RingPresentation`; immutable."""

    __slots__ = ("ring", "_coeffs")

    def __init__(self, ring: RingPresentation, coeffs: Mapping[Exponent, object]):
        self.ring = ring
        self._coeffs = {tuple(m): Fraction(c) for m, c in coeffs.items() if c}

    @property
    def coefficients(self) -> dict[Exponent, Fraction]:
        return dict(self._coeffs)

    def coefficient(self, exp) -> Fraction:
        if isinstance(exp, str):
            exp = next(iter(self.ring.normalize(exp)._coeffs))
        return self._coeffs.get(tuple(exp), Fraction(0))

    def _other(self, other) -> "RingElement":
        if isinstance(other, RingElement):
            if other.ring is not self.ring and not other.ring.same_presentation(self.ring):
                raise ValueError("elements belong to different rings")
            return other
        return self.ring.element(other)

    def __add__(self, other):
        other = self._other(other)
        out = dict(self._coeffs)
        for m, c in other._coeffs.items():
            out[m] = out.get(m, 0) + c
        return RingElement(self.ring, out)

    __radd__ = __add__

    def __neg__(self):
        return RingElement(self.ring, {m: -c for m, c in self._coeffs.items()})

    def __sub__(self, other):
        return self + (-self._other(other))

    def __rsub__(self, other):
        return self._other(other) - self

    def __mul__(self, other):
        return mul(self, self._other(other))

    __rmul__ = __mul__

    def __pow__(self, k: int):
        out = self.ring.one()
        for _ in range(k):
            out = out * self
        return out

    def __eq__(self, other):
        if isinstance(other, (RingElement, int, Fraction)):
            try:
                other = self._other(other)
            except ValueError:
                return False
            return self._coeffs == other._coeffs
        return NotImplemented

    def __hash__(self):
        return hash(frozenset(self._coeffs.items()))

    def is_zero(self) -> bool:
        return not self._coeffs

    def constant_term(self) -> Fraction:
        return self._coeffs.get((0,) * self.ring.nvars, Fraction(0))

    def as_poly(self) -> Poly:
        return Poly(self.ring.nvars, self._coeffs)

    def format(self) -> str:
        return self.as_poly().format(self.ring.names)

    def __str__(self):
        return self.format()

    def __repr__(self):
        return f"RingElement({self.format()!r})"


def mul(x: RingElement, y: RingElement) -> RingElement:
    """Exact product, normalised and truncated above the top degree."""
    if x.ring is not y.ring and not x.ring.same_presentation(y.ring):
        raise ValueError("cannot multiply elements of different rings")
    ring = x.ring
    acc: dict[Exponent, Fraction] = {}
    for m1, c1 in x._coeffs.items():
        for m2, c2 in y._coeffs.items():
            m = tuple(a + b for a, b in zip(m1, m2))
            for nm, v in ring._nf_monomial(m).items():
                acc[nm] = acc.get(nm, 0) + c1 * c2 * v
    return RingElement(ring, acc)


def invert_unit(x: RingElement) -> RingElement:
    """Inverse of an element with nonzero constant term (truncated geometric series)."""
    c0 = x.constant_term()
    if not c0:
        raise ValueError("only elements with a nonzero constant term are invertible")
    ring = x.ring
    nil = x * (1 / c0) - 1  # positive degree, hence nilpotent
    if not ring.degrees:
        return ring.element(1 / c0)
    steps = ring.top_degree // min(ring.degrees)
    total = ring.one()
    power = ring.one()
    for _ in range(steps):
        power = -(power * nil)
        if power.is_zero():
            break
        total = total + power
    return total * (1 / c0)


def project_degree(x: RingElement, k: int) -> RingElement:
    """Component of ``x`` in ``H^{2k}``."""
    ring = x.ring
    return RingElement(ring, {m: c for m, c in x._coeffs.items() if ring.monomial_degree(m) == 2 * k})


def components(x: RingElement) -> dict[int, RingElement]:
    """Nonzero homogeneous components keyed by ``k`` (the ``H^{2k}`` index)."""
    out: dict[int, dict] = {}
    for m, c in x._coeffs.items():
        out.setdefault(x.ring.monomial_degree(m) // 2, {})[m] = c
    return {k: RingElement(x.ring, v) for k, v in sorted(out.items())}


def chern_degree(x: RingElement) -> int:
    """Largest ``k`` with a nonzero ``H^{2k}`` component."""
    if x.is_zero():
        raise ValueError("the degree of the zero class is undefined")
    return max(x.ring.monomial_degree(m) for m in x._coeffs) // 2


def is_integral(x: RingElement) -> bool:
    return all(c.denominator == 1 for c in x._coeffs.values())


@dataclass(frozen=True)
class ManifoldData:
    """Cohomology ring, complex dimension, full Chern class and the declared H^1 flag."""

    ring: RingPresentation
    n: int
    chern: RingElement
    h1_zero: bool = True
    name: str = ""

    def __post_init__(self):
        if self.n < 0:
            raise ValueError("complex dimension must be non-negative")
        if self.ring.top_degree != 2 * self.n:
            raise ValueError(
                f"ring top degree {self.ring.top_degree} does not match complex dimension {self.n}"
            )
        if self.chern.ring is not self.ring:
            raise ValueError("Chern class must be an element of the manifold's ring")
        if self.chern.constant_term() != 1:
            raise ValueError("the full Chern class must have constant term 1")

    def chern_class(self, k: int) -> RingElement:
        return project_degree(self.chern, k)

    @property
    def top_chern(self) -> RingElement:
        return project_degree(self.chern, self.n)
