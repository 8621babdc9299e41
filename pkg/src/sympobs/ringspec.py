"""Reader for ``.ring`` files.

Example::

    # one-point blow-up of CP^3
    [ring]
    name = blowup-cp3
    n = 3
    h1_zero = true

    [generators]
    a = 2
    b = 2

    [relations]
    a*b = 0
    b^3 = a^3

    [classes]
    chern = 1 + 4a + 6a^2 + 6a^3 - 2b

``[ring]`` accepts ``name``, ``n`` or ``top_degree`` and ``h1_zero``
(default ``true``).  ``[classes]`` must define ``chern``; further named
classes are parsed and kept in :attr:`RingSpec.classes`.  Relations whose
left side lies above the top degree and whose right side is zero are
redundant with the truncation and are skipped.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

from .expr import ExpressionError, parse_expression
from .poly import Poly
from .ring import ManifoldData, PresentationError, RingElement, RingPresentation

_SECTIONS = ("ring", "generators", "relations", "classes")
_TRUE = {"true", "yes", "1"}
_FALSE = {"false", "no", "0"}


class RingSpecError(ValueError):
    def __init__(self, message: str, line: int, column: int = 1, source: str = "<spec>"):
        self.message = message
        self.line = line
        self.column = column
        self.source = source
        super().__init__(f"{source}:{line}:{column}: {message}")


@dataclass
class RingSpec:
    manifold: ManifoldData
    classes: dict[str, RingElement] = field(default_factory=dict)


def _split_kv(raw: str, lineno: int, source: str) -> tuple[str, str, int]:
    if "=" not in raw:
        raise RingSpecError("expected 'key = value'", lineno, len(raw) - len(raw.lstrip()) + 1, source)
    key, value = raw.split("=", 1)
    return key.strip(), value, len(key) + 2


def _expr(text: str, names, lineno: int, offset: int, source: str, truncate=None) -> Poly:
    lead = len(text) - len(text.lstrip())
    try:
        return parse_expression(text, names, truncate)
    except ExpressionError as exc:
        raise RingSpecError(exc.message, lineno, offset + exc.column, source) from None


def parse_ring_spec(text: str, source: str = "<spec>") -> RingSpec:
    sections: dict[str, list[tuple[int, str]]] = {}
    current = None
    for lineno, line in enumerate(text.splitlines(), start=1):
        raw = line.split("#", 1)[0].rstrip()
        if not raw.strip():
            continue
        stripped = raw.strip()
        if stripped.startswith("["):
            if not stripped.endswith("]"):
                raise RingSpecError("unterminated section header", lineno, len(raw) + 1, source)
            name = stripped[1:-1].strip().lower()
            if name == "lattice":
                raise RingSpecError(
                    "alternative lattice bases are not supported; the monomial basis spans the lattice",
                    lineno, raw.index("[") + 1, source,
                )
            if name not in _SECTIONS:
                raise RingSpecError(f"unknown section [{name}]", lineno, raw.index("[") + 1, source)
            if name in sections:
                raise RingSpecError(f"duplicate section [{name}]", lineno, raw.index("[") + 1, source)
            sections[name] = []
            current = name
            continue
        if current is None:
            raise RingSpecError("content before the first section header", lineno, 1, source)
        sections[current].append((lineno, raw))

    for required in ("ring", "generators", "classes"):
        if required not in sections:
            raise RingSpecError(f"missing section [{required}]", len(text.splitlines()) or 1, 1, source)

    meta: dict[str, tuple[int, int, str]] = {}
    for lineno, raw in sections["ring"]:
        key, value, col = _split_kv(raw, lineno, source)
        if key not in ("name", "n", "top_degree", "h1_zero"):
            raise RingSpecError(f"unknown key {key!r} in [ring]", lineno, raw.index(key) + 1, source)
        meta[key] = (lineno, col, value.strip())

    def int_value(key):
        lineno, col, value = meta[key]
        try:
            return int(value)
        except ValueError:
            raise RingSpecError(f"{key} must be an integer, got {value!r}", lineno, col, source) from None

    if "n" in meta:
        n = int_value("n")
        if "top_degree" in meta and int_value("top_degree") != 2 * n:
            lineno, col, _ = meta["top_degree"]
            raise RingSpecError("top_degree must equal 2n", lineno, col, source)
    elif "top_degree" in meta:
        top = int_value("top_degree")
        if top % 2:
            lineno, col, _ = meta["top_degree"]
            raise RingSpecError("top_degree must be even", lineno, col, source)
        n = top // 2
    else:
        raise RingSpecError("[ring] must give n or top_degree", sections["ring"][0][0] if sections["ring"] else 1, 1, source)
    if n < 0:
        raise RingSpecError("n must be non-negative", meta.get("n", meta.get("top_degree"))[0], 1, source)

    h1_zero = True
    if "h1_zero" in meta:
        lineno, col, value = meta["h1_zero"]
        if value.lower() in _TRUE:
            h1_zero = True
        elif value.lower() in _FALSE:
            h1_zero = False
        else:
            raise RingSpecError(f"h1_zero must be true or false, got {value!r}", lineno, col, source)
    name = meta["name"][2] if "name" in meta else Path(source).stem

    gens = []
    for lineno, raw in sections["generators"]:
        key, value, col = _split_kv(raw, lineno, source)
        try:
            deg = int(value)
        except ValueError:
            raise RingSpecError(f"degree of {key!r} must be an integer", lineno, col, source) from None
        if deg <= 0 or deg % 2:
            raise RingSpecError(
                f"generator {key!r} has degree {deg}; only positive even degrees are supported",
                lineno, col, source,
            )
        gens.append((key, deg))
    names = [g for g, _ in gens]

    relations = []
    degrees = dict(gens)
    for lineno, raw in sections.get("relations", []):
        lhs_text, rhs_text, col = _split_kv(raw, lineno, source)
        lhs = _expr(raw.split("=", 1)[0], names, lineno, 0, source)
        rhs = _expr(rhs_text, names, lineno, col - 1, source)
        terms = lhs.terms
        if len(terms) != 1 or next(iter(terms.values())) != 1:
            raise RingSpecError("left side of a relation must be a single monomial", lineno, 1, source)
        lead = next(iter(terms))
        lead_deg = sum(e * degrees[g] for e, g in zip(lead, names))
        if lead_deg > 2 * n:
            if rhs.is_zero():
                continue
            raise RingSpecError("relation lies above the top degree", lineno, 1, source)
        relations.append((lead, rhs, lineno))

    try:
        ring = RingPresentation(gens, [(l, r) for l, r, _ in relations], 2 * n)
    except PresentationError as exc:
        line = sections.get("relations", [(1, "")])[0][0] if relations else (sections["generators"] or [(1, "")])[0][0]
        raise RingSpecError(str(exc), line, 1, source) from None

    classes: dict[str, RingElement] = {}
    for lineno, raw in sections["classes"]:
        key, value, col = _split_kv(raw, lineno, source)
        p = _expr(value, names, lineno, col - 1, source, truncate=ring.truncate)
        classes[key] = ring.normalize(p)
    if "chern" not in classes:
        raise RingSpecError("[classes] must define chern", sections["classes"][0][0] if sections["classes"] else 1, 1, source)
    try:
        manifold = ManifoldData(ring, n, classes["chern"], h1_zero, name)
    except ValueError as exc:
        line = next(l for l, r in sections["classes"] if r.split("=", 1)[0].strip() == "chern")
        raise RingSpecError(str(exc), line, 1, source) from None
    return RingSpec(manifold, classes)


def load_ring_spec(path: str | Path) -> RingSpec:
    path = Path(path)
    return parse_ring_spec(path.read_text(), str(path))
