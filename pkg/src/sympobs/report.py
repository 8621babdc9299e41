"""Plain-text rendering of verdicts and certificates."""

from __future__ import annotations

import json

from .elimination import ElimNode, EliminationResult
from .factor import FactorizationVerdict, ObstructionReport


def structured(doc: dict) -> str:
    """Deterministic JSON: sorted keys, fixed indentation."""
    return json.dumps(doc, sort_keys=True, indent=2) + "\n"


def _node_lines(node: ElimNode, names, indent: str) -> list[str]:
    out = []
    for var, value, src in node.substitutions:
        out.append(f"{indent}{var} = {value.format(names)}    (from equation {src})")
    if node.kind == "contradiction":
        label, lhs, rhs = node.contradiction
        out.append(f"{indent}contradiction in equation {label}: {lhs} != {rhs}")
    elif node.kind == "gcd_contradiction":
        out.append(f"{indent}equations in {node.variable} have constant gcd: no common root")
    elif node.kind == "univariate":
        out.append(f"{indent}remaining equations in {node.variable}; gcd has rational roots "
                   f"[{', '.join(str(r) for r in node.rational_roots)}]"
                   + (f" and {len(node.irrational_roots)} irrational roots" if node.irrational_roots else ""))
    elif node.kind == "eliminated":
        out.append(f"{indent}eliminate {node.variable} with {len(node.resultants)} resultant(s)")
        if node.reduced is not None:
            out.extend(_node_lines(node.reduced, names, indent + "  "))
    elif node.kind == "underdetermined":
        out.append(f"{indent}positive-dimensional solution set (free: {', '.join(node.free)})")
    for assign, child in node.branches:
        a = ", ".join(f"{k} = {v}" for k, v in assign.items())
        out.append(f"{indent}branch {a}:")
        out.extend(_node_lines(child, names, indent + "  "))
    return out


def elimination_lines(result: EliminationResult, indent: str = "    ") -> list[str]:
    names = result.system.unknowns
    out = [f"{indent}{len(result.system.equations)} equations in {len(names)} unknowns; status {result.status}"]
    out.extend(_node_lines(result.certificate, names, indent + "  "))
    for k, s in enumerate(result.rational_solutions, 1):
        out.append(f"{indent}rational solution {k}: " + ", ".join(f"{u} = {s[u]}" for u in names))
    for k, s in enumerate(result.irrational_solutions, 1):
        vals = ", ".join(f"{u} = {_num(s[u])}" for u in names if u in s)
        out.append(f"{indent}non-rational solution {k}: {vals}")
    return out


def _num(z) -> str:
    z = complex(z)
    if abs(z.imag) < 1e-12:
        return f"{z.real:.10g}"
    return f"{z.real:.10g}{z.imag:+.10g}i"


def verdict_lines(v: FactorizationVerdict) -> list[str]:
    out = [f"factorization: {v.label()}"]
    if v.gcd_certificate is not None:
        g = v.gcd_certificate
        out.append(f"  gcd(c(x), c(-x)) = {g['gcd']}  (subresultant check: {g['gcd_subresultant']})")
        out.append(f"    c(x)  = {g['polynomial']}")
        out.append(f"    c(-x) = {g['reflected']}")
    if v.kind == "no_proved" and v.method == "no_admissible_split" and not v.splits:
        out.append("  no even degree split 0 < deg(alpha) < n exists")
    for s in v.splits:
        state = "closed" if s.closed else "open"
        out.append(f"  split deg(alpha) = {s.deg_alpha}, deg(beta) <= {s.max_deg_beta}: {s.method}, {state}"
                   + (f", {s.iterations} candidates" if s.iterations else ""))
        if s.note:
            out.append(f"    {s.note}")
        if s.elimination is not None:
            out.extend(elimination_lines(s.elimination))
        if s.witness is not None:
            out.append(f"    witness: alpha = {s.witness.alpha}, beta = {s.witness.beta}")
    if v.witness is not None:
        out.append(f"  alpha = {v.witness.alpha}")
        out.append(f"  beta  = {v.witness.beta}")
    return out


def obstruction_text(r: ObstructionReport, seconds: float | None = None) -> str:
    M = r.manifold
    lines = [
        f"manifold: {M.name or '(unnamed)'} (n = {M.n})",
        f"ring: {M.ring}",
        f"chern: {M.chern}",
        f"h1_zero: {str(M.h1_zero).lower()} (declared)",
        f"top chern class: {r.top_chern} ({'nonzero' if r.top_chern_nonzero else 'zero'})",
    ]
    lines += verdict_lines(r.verdict)
    lines.append(f"criterion {r.criterion}")
    if seconds is not None:
        lines.append(f"time: {seconds:.3f} s")
    return "\n".join(lines) + "\n"
