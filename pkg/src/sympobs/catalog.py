"""Example manifolds: projective spaces, products, the one-point blow-up of CP^3 and S^2."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

from .poly import Poly
from .ring import ManifoldData, RingPresentation


@dataclass(frozen=True)
class CatalogEntry:
    name: str
    data: ManifoldData
    provenance: str


def cp(n: int, generator: str = "a") -> ManifoldData:
    """``CP^n``: ``Q[a]/(a^{n+1})`` with ``c = (1+a)^{n+1} - a^{n+1}``."""
    if not isinstance(n, int) or n < 1:
        raise ValueError(f"CP^n needs n >= 1, got {n!r}")
    ring = RingPresentation([(generator, 2)], [], 2 * n)
    chern = ring.normalize(f"(1+{generator})^{n + 1} - {generator}^{n + 1}")
    return ManifoldData(ring, n, chern, True, f"cp{n}")


def point() -> ManifoldData:
    ring = RingPresentation([], [], 0)
    return ManifoldData(ring, 0, ring.one(), True, "point")


def sphere2() -> ManifoldData:
    ring = RingPresentation([("a", 2)], [], 2)
    return ManifoldData(ring, 1, ring.normalize("1 + 2a"), True, "s2")


def blowup_cp3_point() -> ManifoldData:
    """One-point blow-up of ``CP^3`` with its ring and Chern class entered as data."""
    ring = RingPresentation.from_strings([("a", 2), ("b", 2)], ["a*b = 0", "b^3 = a^3"], 6)
    chern = ring.normalize("1 + 4a + 6a^2 + 6a^3 - 2b")
    return ManifoldData(ring, 3, chern, True, "blowup-cp3")


def _fresh(name: str, taken: set[str]) -> str:
    candidate = name + "_2"
    while candidate in taken:
        candidate += "_2"
    return candidate


def product(M1: ManifoldData, M2: ManifoldData, name: str | None = None) -> ManifoldData:
    """Cartesian product; colliding generator names of ``M2`` get a ``_2`` suffix.

    Each factor's degree cut-off becomes explicit monomial relations (every
    minimal monomial of a factor above its top degree is set to zero).
    """
    r1, r2 = M1.ring, M2.ring
    taken = set(r1.names)
    names2 = []
    for g in r2.names:
        new = _fresh(g, taken | set(r2.names)) if g in taken else g
        taken.add(new)
        names2.append(new)
    gens = list(zip(r1.names, r1.degrees)) + list(zip(names2, r2.degrees))
    nv = len(gens)
    k1 = r1.nvars

    def to_joint(p: Poly, offset: int) -> Poly:
        width = k1 if offset == 0 else r2.nvars
        return Poly(nv, {(0,) * offset + e + (0,) * (nv - offset - width): c for e, c in p.items()})

    def embed(exp, offset, width):
        return (0,) * offset + tuple(exp) + (0,) * (nv - offset - width)

    top = r1.top_degree + r2.top_degree
    relations = []
    for ring, offset in ((r1, 0), (r2, k1)):
        for rel in ring.relations:
            relations.append((embed(rel.lead, offset, ring.nvars), to_joint(rel.rhs, offset)))
        for exp in _minimal_above_top(ring):
            # above the joint top degree the truncation already kills it
            if ring.monomial_degree(exp) <= top:
                relations.append((embed(exp, offset, ring.nvars), Poly(nv)))
    joint = RingPresentation(gens, relations, top)
    c1 = joint.normalize(to_joint(M1.chern.as_poly(), 0))
    c2 = joint.normalize(to_joint(M2.chern.as_poly(), k1))
    label = name or (f"{M1.name}x{M2.name}" if M1.name and M2.name else "")
    return ManifoldData(joint, M1.n + M2.n, c1 * c2, M1.h1_zero and M2.h1_zero, label)


def _minimal_above_top(ring: RingPresentation) -> list[tuple]:
    """Monomials just above the top degree (dropping any variable brings them to or under it)."""
    out = []
    for exp in _monomials_up_to(ring, ring.top_degree + max(ring.degrees, default=0)):
        if ring.monomial_degree(exp) <= ring.top_degree:
            continue
        below = all(
            ring.monomial_degree(exp[:i] + (e - 1,) + exp[i + 1 :]) <= ring.top_degree
            for i, e in enumerate(exp)
            if e
        )
        if below and not ring._reducible_by(exp):
            out.append(exp)
    return out


def _monomials_up_to(ring: RingPresentation, degree: int):
    from itertools import product as iproduct

    bounds = [degree // d for d in ring.degrees]
    for exp in iproduct(*(range(b + 1) for b in bounds)):
        if ring.monomial_degree(exp) <= degree:
            yield tuple(exp)


def cp2xcp2() -> ManifoldData:
    return product(cp(2), cp(2, generator="b"), name="cp2xcp2")


_BUILDERS: dict[str, tuple[Callable[[], ManifoldData], str]] = {
    **{f"cp{n}": ((lambda n=n: cp(n)), f"complex projective space of dimension {n}") for n in range(1, 9)},
    "s2": (sphere2, "two-sphere"),
    "blowup-cp3": (blowup_cp3_point, "one-point blow-up of CP^3, Chern data entered by hand"),
    "cp2xcp2": (cp2xcp2, "product of two copies of CP^2"),
}


def names() -> list[str]:
    return list(_BUILDERS)


def lookup(name: str) -> CatalogEntry:
    try:
        build, provenance = _BUILDERS[name]
    except KeyError:
        raise KeyError(f"unknown catalog manifold {name!r}; choose from {', '.join(_BUILDERS)}") from None
    return CatalogEntry(name, build(), provenance)
