"""Exact solving of small polynomial systems over the rationals.

The solver works in stages:

1. *staged substitution*: any equation that is linear in some unknown with a
   constant coefficient is solved for that unknown and substituted away;
2. a single remaining unknown is settled by the gcd of the remaining
   univariate equations and rational-root enumeration;
3. otherwise one unknown is eliminated with resultants, the reduced system
   is solved recursively and every rational solution is substituted back.

Every run yields a tree of :class:`ElimNode` records which
:func:`replay` can check against the original system independently of the
solver (the univariate stage is re-checked with subresultant gcds).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from . import poly as P
from .poly import Poly


class EliminationLimitError(ValueError):
    """The system has more unknowns than the configured elimination limit."""


@dataclass(frozen=True)
class Equation:
    label: str
    lhs: Poly
    rhs: Fraction = Fraction(0)

    def residual(self) -> Poly:
        return self.lhs - self.rhs


@dataclass
class PolySystem:
    """Equations ``lhs == rhs`` in the named unknowns.

    ``primary`` names the unknowns counted against the elimination limit;
    ``preference`` orders unknowns for staged substitution (earlier names are
    substituted first).
    """

    unknowns: list[str]
    equations: list[Equation]
    primary: list[str] | None = None
    preference: list[str] | None = None

    @property
    def nvars(self) -> int:
        return len(self.unknowns)

    def index(self, name: str) -> int:
        return self.unknowns.index(name)

    @classmethod
    def from_strings(cls, unknowns: Sequence[str], equations: Sequence[str], **kw) -> "PolySystem":
        from .expr import parse_expression

        eqs = []
        for k, text in enumerate(equations):
            lhs, rhs = text.split("=")
            poly = parse_expression(lhs, unknowns) - parse_expression(rhs, unknowns)
            eqs.append(Equation(f"e{k + 1}", poly, Fraction(0)))
        return cls(list(unknowns), eqs, **kw)


@dataclass
class ElimNode:
    kind: str  # contradiction | gcd_contradiction | solution | univariate | eliminated | underdetermined
    substitutions: list[tuple[str, Poly, str]] = field(default_factory=list)
    contradiction: tuple[str, Fraction, Fraction] | None = None
    variable: str | None = None
    polynomials: list[list[Fraction]] = field(default_factory=list)
    gcd: list[Fraction] | None = None
    rational_roots: list[Fraction] = field(default_factory=list)
    irrational_roots: list[complex] = field(default_factory=list)
    resultants: list[tuple[str, Poly]] = field(default_factory=list)
    reduced: "ElimNode | None" = None
    branches: list[tuple[dict[str, Fraction], "ElimNode"]] = field(default_factory=list)
    free: list[str] = field(default_factory=list)

    def to_dict(self, names: Sequence[str]) -> dict:
        out: dict = {"kind": self.kind}
        if self.substitutions:
            out["substitutions"] = [
                {"unknown": v, "value": val.format(names), "from": src}
                for v, val, src in self.substitutions
            ]
        if self.contradiction:
            label, lhs, rhs = self.contradiction
            out["contradiction"] = {"equation": label, "lhs": str(lhs), "rhs": str(rhs)}
        if self.variable:
            out["variable"] = self.variable
        if self.gcd is not None:
            out["gcd"] = P.format_univariate(self.gcd, self.variable or "x")
        if self.kind == "univariate":
            out["rational_roots"] = [str(r) for r in self.rational_roots]
            out["irrational_roots"] = [_fmt_complex(z) for z in self.irrational_roots]
        if self.resultants:
            out["resultants"] = [{"from": lab, "value": r.format(names)} for lab, r in self.resultants]
        if self.reduced is not None:
            out["reduced"] = self.reduced.to_dict(names)
        if self.branches:
            out["branches"] = [
                {"assign": {k: str(v) for k, v in a.items()}, "node": child.to_dict(names)}
                for a, child in self.branches
            ]
        if self.free:
            out["free"] = list(self.free)
        return out


def _fmt_complex(z: complex) -> str:
    if abs(z.imag) < 1e-12:
        return f"{z.real:.12g}"
    return f"{z.real:.12g}{z.imag:+.12g}i"


@dataclass
class EliminationResult:
    status: str  # "solved" | "inconsistent" | "incomplete"
    rational_solutions: list[dict[str, Fraction]]
    irrational_solutions: list[dict[str, complex]]
    irrational_complete: bool
    certificate: ElimNode
    system: PolySystem

    @property
    def complete(self) -> bool:
        return self.status != "incomplete"

    def to_dict(self) -> dict:
        return {
            "status": self.status,
            "unknowns": list(self.system.unknowns),
            "equations": len(self.system.equations),
            "rational_solutions": [{k: str(v) for k, v in s.items()} for s in self.rational_solutions],
            "irrational_solutions": [
                {k: _fmt_complex(v) for k, v in s.items()} for s in self.irrational_solutions
            ],
            "irrational_solutions_complete": self.irrational_complete,
            "certificate": self.certificate.to_dict(self.system.unknowns),
        }


class _Incomplete(Exception):
    pass


class _Solver:
    def __init__(self, system: PolySystem):
        self.system = system
        self.names = system.unknowns
        order = list(system.preference or []) + [u for u in system.unknowns if u not in (system.preference or [])]
        self.rank = {name: k for k, name in enumerate(order)}

    def var_order(self, indices) -> list[int]:
        return sorted(indices, key=lambda i: self.rank[self.names[i]])

    # each call returns (node, rational solutions, irrational solutions, irrational list complete?)
    def solve(self, eqs: list[Equation], unknowns: set[int]):
        node = ElimNode(kind="solution")
        eqs = list(eqs)
        stop = self._simplify(eqs, node)
        if stop:
            return node, [], [], True
        substituted: list[tuple[int, Poly]] = []
        while True:
            step = self._find_linear(eqs)
            if step is None:
                break
            k, var, value = step
            src = eqs.pop(k)
            node.substitutions.append((self.names[var], value, src.label))
            substituted.append((var, value))
            unknowns = unknowns - {var}
            eqs = [Equation(e.label, e.lhs.substitute(var, value), e.rhs) for e in eqs]
            if self._simplify(eqs, node):
                return node, [], [], True

        present: set[int] = set()
        for e in eqs:
            present |= e.residual().variables()
        free = unknowns - present
        node.free = [self.names[i] for i in self.var_order(free)]

        if not eqs:
            if free:
                node.kind = "underdetermined"
                raise _Incomplete(node)
            sols, irr = [{}], []
            irr_complete = True
        elif len(present) == 1:
            sols, irr, irr_complete = self._univariate(eqs, present.pop(), node, unknowns)
        else:
            sols, irr, irr_complete = self._eliminate(eqs, present, node, unknowns)

        if free and (sols or irr):
            node.kind = "underdetermined"
            raise _Incomplete(node)
        return node, self._back(sols, substituted), self._back(irr, substituted), irr_complete

    def _back(self, partials, substituted):
        out = []
        for part in partials:
            values = dict(part)
            numeric = {self.index(k): v for k, v in values.items()}
            for var, expr in reversed(substituted):
                point = [numeric.get(i, 0) for i in range(self.system.nvars)]
                val = expr.evaluate(point)
                numeric[var] = val
                values[self.names[var]] = val
            out.append(values)
        return out

    def index(self, name):
        return self.names.index(name)

    def _simplify(self, eqs: list[Equation], node: ElimNode) -> bool:
        kept = []
        for e in eqs:
            if e.lhs.is_constant():
                lhs = e.lhs.constant_term()
                if lhs != e.rhs:
                    node.kind = "contradiction"
                    node.contradiction = (e.label, lhs, e.rhs)
                    return True
                continue
            kept.append(e)
        eqs[:] = kept
        return False

    def _find_linear(self, eqs):
        best = None
        for k, e in enumerate(eqs):
            res = e.residual()
            for var in self.var_order(res.variables()):
                form = res.linear_form_in(var)
                if form is None:
                    continue
                a, b = form
                if a.is_constant():
                    key = (self.rank[self.names[var]], k)
                    if best is None or key < best[0]:
                        best = (key, k, var, -b / a.constant_term())
                    break
        if best is None:
            return None
        return best[1], best[2], best[3]

    def _univariate(self, eqs, var, node, unknowns):
        node.kind = "univariate"
        node.variable = self.names[var]
        polys = [e.residual().to_univariate(var) for e in eqs]
        node.polynomials = polys
        g: list[Fraction] = []
        for p in polys:
            g = P.euclid_gcd(g, p)
        node.gcd = g
        if P.degree(g) == 0:
            node.kind = "gcd_contradiction"
            return [], [], True
        roots = P.rational_roots(g)
        node.rational_roots = roots
        rest = P.squarefree(g)
        for r in roots:
            rest, _ = P.poly_divmod(rest, [-r, Fraction(1)])
        if P.degree(rest) > 0:
            node.irrational_roots = [complex(z) for z in np.roots([float(c) for c in reversed(rest)])]
        sols = []
        for r in roots:
            sub = [Equation(e.label, e.lhs.substitute(var, Poly.const(self.system.nvars, r)), e.rhs) for e in eqs]
            child, csols, _, _ = self.solve(sub, unknowns - {var})
            node.branches.append(({self.names[var]: r}, child))
            for s in csols:
                s = dict(s)
                s[self.names[var]] = r
                sols.append(s)
        irr = []
        for z in node.irrational_roots:
            values = {self.names[var]: z}
            irr.append(values)
        return sols, irr, True

    def _eliminate(self, eqs, present, node, unknowns):
        node.kind = "eliminated"
        var = self.var_order(present)[-1]
        node.variable = self.names[var]
        with_x = [e for e in eqs if e.residual().degree_in(var) > 0]
        without = [e for e in eqs if e.residual().degree_in(var) <= 0]
        if len(with_x) >= 2:
            base = with_x[0]
            for other in with_x[1:]:
                r = P.resultant(base.residual(), other.residual(), var)
                label = f"res[{node.variable}]({base.label},{other.label})"
                node.resultants.append((label, r))
                if not r.is_zero():
                    without = without + [Equation(label, r, Fraction(0))]
        if not without:
            node.kind = "underdetermined"
            raise _Incomplete(node)
        reduced_vars = unknowns - {var}
        # the reduced system carries necessary conditions only: every variable it leaves free is real freedom
        reduced, rsols, _, _ = self.solve(without, reduced_vars & _vars_of(without))
        node.reduced = reduced
        sols = []
        for rs in rsols:
            assign = {self.index(k): v for k, v in rs.items()}
            sub = [
                Equation(e.label, e.lhs.substitute_many(assign), e.rhs)
                for e in eqs
            ]
            child, csols, _, _ = self.solve(sub, unknowns - set(assign))
            node.branches.append((dict(rs), child))
            for s in csols:
                merged = dict(rs)
                merged.update(s)
                sols.append(merged)
        return sols, [], False


def _vars_of(eqs) -> set[int]:
    out: set[int] = set()
    for e in eqs:
        out |= e.residual().variables()
    return out


def eliminate_solve(system: PolySystem, max_unknowns: int | None = None) -> EliminationResult:
    """Complete rational solution set of ``system`` or an inconsistency certificate.

    Raises :class:`EliminationLimitError` when the primary unknowns exceed
    ``max_unknowns``.  Systems the staged method cannot settle (positive
    dimensional pieces, vanishing resultants) come back with status
    ``"incomplete"``.
    """
    primary = system.primary if system.primary is not None else system.unknowns
    if max_unknowns is not None and len(primary) > max_unknowns:
        raise EliminationLimitError(
            f"{len(primary)} unknowns exceed the elimination limit of {max_unknowns}"
        )
    solver = _Solver(system)
    try:
        node, sols, irr, irr_complete = solver.solve(list(system.equations), set(range(system.nvars)))
    except _Incomplete as exc:
        return EliminationResult("incomplete", [], [], False, exc.args[0], system)
    status = "solved" if sols else "inconsistent"
    irr = [{k: complex(v) for k, v in s.items()} for s in irr]
    sols.sort(key=lambda s: [s[u] for u in system.unknowns])
    return EliminationResult(status, sols, irr, irr_complete, node, system)


# ----------------------------------------------------------------------
# certificate replay


class ReplayError(AssertionError):
    pass


def replay(system: PolySystem, node: ElimNode) -> list[dict[str, Fraction]]:
    """Re-check a certificate tree step by step; return the rational solutions it proves.

    Independent of the solver's choices: each substitution is re-derived
    from its source equation, contradictions are re-evaluated, univariate
    gcds are recomputed with the subresultant sequence and every claimed
    solution is substituted into the original equations.
    """
    sols = _replay(system, list(system.equations), node)
    for s in sols:
        point = [s[u] for u in system.unknowns]
        for e in system.equations:
            if e.lhs.evaluate(point) != e.rhs:
                raise ReplayError(f"solution {s} violates equation {e.label}")
    return sols


def _replay(system: PolySystem, eqs: list[Equation], node: ElimNode):
    names = system.unknowns
    eqs = [e for e in eqs]
    subs: list[tuple[int, Poly]] = []
    for var_name, value, src in node.substitutions:
        var = names.index(var_name)
        eq = next((e for e in eqs if e.label == src), None)
        if eq is None:
            raise ReplayError(f"substitution source {src} is not available")
        form = eq.residual().linear_form_in(var)
        if form is None or not form[0].is_constant():
            raise ReplayError(f"equation {src} is not linear in {var_name} with constant coefficient")
        a, b = form
        if -b / a.constant_term() != value:
            raise ReplayError(f"substitution for {var_name} does not follow from {src}")
        eqs.remove(eq)
        eqs = [Equation(e.label, e.lhs.substitute(var, value), e.rhs) for e in eqs]
        subs.append((var, value))

    def lift(partials):
        out = []
        for part in partials:
            numeric = {names.index(k): v for k, v in part.items()}
            full = dict(part)
            for var, expr in reversed(subs):
                val = expr.evaluate([numeric.get(i, 0) for i in range(len(names))])
                numeric[var] = val
                full[names[var]] = val
            out.append(full)
        return out

    if node.kind == "contradiction":
        label, lhs, rhs = node.contradiction
        eq = next((e for e in eqs if e.label == label), None)
        if eq is None or not eq.lhs.is_constant() or eq.lhs.constant_term() != lhs or lhs == rhs or eq.rhs != rhs:
            raise ReplayError(f"claimed contradiction in {label} does not hold")
        return []
    live = [e for e in eqs if not (e.lhs.is_constant() and e.lhs.constant_term() == e.rhs)]
    if node.kind == "solution":
        if live:
            raise ReplayError("equations remain at a claimed solution")
        return lift([{}])
    if node.kind in ("univariate", "gcd_contradiction"):
        var = names.index(node.variable)
        g: list[Fraction] = []
        for e in live:
            g = P.subresultant_gcd(g, e.residual().to_univariate(var)) if g else P.monic(e.residual().to_univariate(var))
        if node.kind == "gcd_contradiction":
            if P.degree(g) != 0:
                raise ReplayError("claimed coprime equations share a factor")
            return []
        if P.rational_roots(g) != sorted(node.rational_roots):
            raise ReplayError("rational roots do not match the recomputed gcd")
        out = []
        for assign, child in node.branches:
            value = assign[node.variable]
            sub = [Equation(e.label, e.lhs.substitute(var, Poly.const(len(names), value)), e.rhs) for e in live]
            for s in _replay(system, sub, child):
                s = dict(s)
                s[node.variable] = value
                out.append(s)
        return lift(out)
    if node.kind == "eliminated":
        var = names.index(node.variable)
        for label, r in node.resultants:
            a_label, b_label = label[label.index("(") + 1 : -1].split(",")
            ea = next(e for e in live if e.label == a_label)
            eb = next(e for e in live if e.label == b_label)
            if P.resultant(ea.residual(), eb.residual(), var) != r:
                raise ReplayError(f"resultant {label} does not match")
        reduced_eqs = [e for e in live if e.residual().degree_in(var) <= 0] + [
            Equation(lab, r, Fraction(0)) for lab, r in node.resultants if not r.is_zero()
        ]
        reduced_sols = _replay(system, reduced_eqs, node.reduced)
        claimed = [a for a, _ in node.branches]
        if sorted(map(_key, reduced_sols)) != sorted(map(_key, claimed)):
            raise ReplayError("branches do not cover the reduced solutions")
        out = []
        for assign, child in node.branches:
            idx = {names.index(k): v for k, v in assign.items()}
            sub = [Equation(e.label, e.lhs.substitute_many(idx), e.rhs) for e in live]
            for s in _replay(system, sub, child):
                merged = dict(assign)
                merged.update(s)
                out.append(merged)
        return lift(out)
    raise ReplayError(f"cannot replay a node of kind {node.kind}")


def _key(d):
    return tuple(sorted((k, v) for k, v in d.items()))
