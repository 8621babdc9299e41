"""Even factorizations of the full Chern class.

An even factorization is ``c = alpha * beta`` with both factors integral,
``alpha`` supported in degrees ``H^{4j}``, ``0 < deg alpha < n`` and
``deg alpha + deg beta <= n``.  Both constant terms are normalised to 1, so
``beta = c * alpha^{-1}`` is forced once ``alpha`` is known.

Three tiers decide existence:

* the gcd criterion for truncated univariate rings (complete, exact);
* exact elimination of the coefficient system for a degree split (complete
  when the solver finishes);
* bounded integer search over ``alpha`` coefficients (a fallback; a negative
  answer only holds up to the bound).
"""

from __future__ import annotations

import itertools
import time
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import poly as P
from .elimination import Equation, EliminationResult, PolySystem, eliminate_solve, replay
from .poly import Poly
from .ring import (
    ManifoldData,
    RingElement,
    RingPresentation,
    components,
    invert_unit,
    is_integral,
    chern_degree,
)


@dataclass(frozen=True)
class SearchConfig:
    coeff_bound: int = 50
    enable_gcd_criterion: bool = True
    enable_elimination: bool = True
    max_alpha_unknowns_for_elimination: int = 4

    def __post_init__(self):
        if not isinstance(self.coeff_bound, int) or self.coeff_bound < 1:
            raise ValueError(f"coefficient bound must be a positive integer, got {self.coeff_bound!r}")
        if self.max_alpha_unknowns_for_elimination < 0:
            raise ValueError("elimination limit must be non-negative")


@dataclass(frozen=True)
class FactorizationWitness:
    alpha: RingElement
    beta: RingElement
    deg_alpha: int
    deg_beta: int

    def to_dict(self) -> dict:
        return {
            "alpha": self.alpha.format(),
            "beta": self.beta.format(),
            "deg_alpha": self.deg_alpha,
            "deg_beta": self.deg_beta,
        }


@dataclass
class SplitRecord:
    """What happened for one degree split ``deg alpha = d_alpha``."""

    deg_alpha: int
    max_deg_beta: int
    alpha_unknowns: list[str]
    method: str
    closed: bool
    witness: FactorizationWitness | None = None
    elimination: EliminationResult | None = None
    iterations: int = 0
    note: str = ""

    def to_dict(self) -> dict:
        out = {
            "deg_alpha": self.deg_alpha,
            "max_deg_beta": self.max_deg_beta,
            "alpha_unknowns": list(self.alpha_unknowns),
            "method": self.method,
            "closed": self.closed,
            "search_iterations": self.iterations,
        }
        if self.note:
            out["note"] = self.note
        if self.witness is not None:
            out["witness"] = self.witness.to_dict()
        if self.elimination is not None:
            out["elimination"] = self.elimination.to_dict()
        return out


@dataclass
class FactorizationVerdict:
    kind: str  # "yes" | "no_proved" | "no_within_bound"
    method: str | None = None
    witness: FactorizationWitness | None = None
    bound: int | None = None
    splits: list[SplitRecord] = field(default_factory=list)
    gcd_certificate: dict | None = None
    seconds: float = 0.0

    @property
    def search_iterations(self) -> int:
        return sum(s.iterations for s in self.splits)

    def label(self) -> str:
        if self.kind == "yes":
            return "Yes"
        if self.kind == "no_proved":
            return f"NoProved({self.method})"
        return f"NoWithinBound({self.bound})"

    def to_dict(self, timing: bool = False) -> dict:
        out: dict = {"verdict": self.label(), "kind": self.kind, "search_iterations": self.search_iterations}
        if self.method:
            out["method"] = self.method
        if self.bound is not None:
            out["bound"] = self.bound
        if self.witness is not None:
            out["witness"] = self.witness.to_dict()
        if self.gcd_certificate is not None:
            out["gcd_certificate"] = self.gcd_certificate
        out["splits"] = [s.to_dict() for s in self.splits]
        if timing:
            out["seconds"] = self.seconds
        return out


# ----------------------------------------------------------------------
# single candidate


def _even_alpha(alpha: RingElement) -> bool:
    return all(k % 2 == 0 for k in components(alpha))


def divide_check(c: RingElement, alpha: RingElement, n: int) -> FactorizationWitness | None:
    """Witness ``(alpha, c * alpha^{-1})`` if it is an even factorization, else ``None``."""
    if alpha.constant_term() != 1 or not _even_alpha(alpha):
        return None
    deg_alpha = chern_degree(alpha)
    if not 0 < deg_alpha < n:
        return None
    beta = c * invert_unit(alpha)
    deg_beta = chern_degree(beta)
    if deg_alpha + deg_beta > n:
        return None
    if not (is_integral(alpha) and is_integral(beta)):
        return None
    if alpha * beta != c:
        return None
    return FactorizationWitness(alpha, beta, deg_alpha, deg_beta)


# ----------------------------------------------------------------------
# gcd criterion


def univariate_gcd_criterion(c_poly) -> bool:
    """True iff ``gcd(c(x), c(-x))`` is a nonzero constant.

    ``c_poly`` is a coefficient list, lowest degree first.  An even factor
    ``alpha(x) = alpha(-x)`` of ``c`` also divides ``c(-x)``, so a constant gcd
    rules out every even factorization that is an honest polynomial
    identity.
    """
    c = P.trim(c_poly)
    if not c:
        raise ValueError("the gcd criterion needs a nonzero polynomial")
    return P.degree(P.euclid_gcd(c, P.reflect(c))) == 0


def gcd_certificate(c_poly, name: str = "x") -> dict:
    """Both gcd routes for ``c(x)`` and ``c(-x)``, for the report and for replay."""
    c = P.trim(c_poly)
    g_euclid = P.euclid_gcd(c, P.reflect(c))
    g_sub = P.subresultant_gcd(c, P.reflect(c))
    return {
        "polynomial": P.format_univariate(c, name),
        "reflected": P.format_univariate(P.reflect(c), name),
        "gcd": P.format_univariate(g_euclid, name),
        "gcd_subresultant": P.format_univariate(g_sub, name),
        "constant": P.degree(g_euclid) == 0,
    }


def truncated_univariate(ring: RingPresentation) -> bool:
    """One generator of degree 2 and no relations besides the degree cut-off."""
    return ring.nvars == 1 and ring.degrees == (2,) and not ring.relations


def chern_polynomial(M: ManifoldData) -> list[Fraction]:
    return P.trim([M.chern.coefficient((k,)) for k in range(M.n + 1)])


def residual_polynomial(M: ManifoldData, generator: str) -> list[Fraction]:
    """Coefficients of the pure powers of ``generator`` in the Chern class."""
    i = M.ring.names.index(generator)
    out = []
    for exp, c in sorted(M.chern.coefficients.items()):
        if all(e == 0 for j, e in enumerate(exp) if j != i):
            k = exp[i]
            out.extend([Fraction(0)] * (k + 1 - len(out)))
            out[k] = c
    return P.trim(out)


# ----------------------------------------------------------------------
# coefficient systems


def admissible_splits(n: int) -> list[int]:
    """Even ``d_alpha`` with ``0 < d_alpha < n``, increasing."""
    return list(range(2, n, 2))


@dataclass
class SplitSystem:
    """Unknown ``alpha`` and ``beta`` coefficients for one split and the matching equations."""

    ring: RingPresentation
    deg_alpha: int
    alpha_basis: list[tuple]
    beta_basis: list[tuple]
    system: PolySystem

    @property
    def alpha_names(self) -> list[str]:
        return self.system.unknowns[: len(self.alpha_basis)]

    @property
    def beta_names(self) -> list[str]:
        return self.system.unknowns[len(self.alpha_basis):]

    def elements(self, values) -> tuple[RingElement, RingElement]:
        names = self.system.unknowns
        alpha = {(0,) * self.ring.nvars: 1}
        beta = {(0,) * self.ring.nvars: 1}
        for m, name in zip(self.alpha_basis, names):
            alpha[m] = values[name]
        for m, name in zip(self.beta_basis, names[len(self.alpha_basis):]):
            beta[m] = values[name]
        return RingElement(self.ring, alpha), RingElement(self.ring, beta)


def build_split_system(M: ManifoldData, deg_alpha: int) -> SplitSystem:
    """Coefficient-matching equations for ``alpha * beta = c`` with ``deg alpha <= deg_alpha``.

    ``alpha`` runs over basis monomials of degree ``4j <= 2 deg_alpha``;
    ``beta`` over basis monomials of degree ``2 .. 2 (n - deg_alpha)``.
    """
    ring = M.ring
    basis = [m for m in ring.basis if ring.monomial_degree(m) > 0]
    alpha_basis = [
        m for m in basis if ring.monomial_degree(m) % 4 == 0 and ring.monomial_degree(m) <= 2 * deg_alpha
    ]
    beta_basis = [m for m in basis if ring.monomial_degree(m) <= 2 * (M.n - deg_alpha)]
    names = [f"alpha[{ring.format_monomial(m)}]" for m in alpha_basis]
    names += [f"beta[{ring.format_monomial(m)}]" for m in beta_basis]
    nv = len(names)
    one = Poly.const(nv, 1)
    a_terms = [((0,) * ring.nvars, one)] + [(m, Poly.var(nv, k)) for k, m in enumerate(alpha_basis)]
    b_terms = [((0,) * ring.nvars, one)] + [
        (m, Poly.var(nv, len(alpha_basis) + k)) for k, m in enumerate(beta_basis)
    ]
    acc: dict[tuple, Poly] = {}
    for ma, pa in a_terms:
        for mb, pb in b_terms:
            prod = tuple(x + y for x, y in zip(ma, mb))
            for m, v in ring._nf_monomial(prod).items():
                acc[m] = acc.get(m, Poly(nv)) + pa * pb * v
    equations = []
    for m in basis:
        lhs = acc.get(m, Poly(nv))
        rhs = M.chern.coefficient(m)
        if lhs.is_zero() and rhs == 0:
            continue
        equations.append(Equation(ring.format_monomial(m), lhs, rhs))
    system = PolySystem(
        names,
        equations,
        primary=names[: len(alpha_basis)],
        preference=names[len(alpha_basis):] + names[: len(alpha_basis)],
    )
    return SplitSystem(ring, deg_alpha, alpha_basis, beta_basis, system)


def _witness_from_values(M: ManifoldData, split: SplitSystem, values) -> FactorizationWitness | None:
    alpha, _ = split.elements(values)
    if chern_degree(alpha) != split.deg_alpha:
        return None
    return divide_check(M.chern, alpha, M.n)


def _alpha_key(split: SplitSystem, alpha: RingElement):
    coeffs = [alpha.coefficient(m) for m in split.alpha_basis]
    return (max((abs(c) for c in coeffs), default=0), coeffs)


# ----------------------------------------------------------------------
# bounded search


def bounded_search(M: ManifoldData, split: SplitSystem, bound: int, chunk: int = 200_000):
    """All integer ``alpha`` vectors with ``|coef| <= bound`` that give a witness.

    Returns ``(witnesses, iterations)`` with witnesses sorted by sup norm,
    then lexicographically: the first entry is the enumeration-least one.
    Candidates are prefiltered in floating point and confirmed exactly with
    :func:`divide_check`.
    """
    k = len(split.alpha_basis)
    if k == 0:
        return [], 0
    # beta coefficients and residual equations as polynomials in the alpha unknowns
    solved = _beta_in_terms_of_alpha(split)
    if solved is None:
        return _bounded_search_plain(M, split, bound)
    residuals = solved
    total = (2 * bound + 1) ** k
    witnesses = []
    grids = itertools.product(range(-bound, bound + 1), repeat=k)
    done = 0
    while done < total:
        block = np.array(list(itertools.islice(grids, chunk)), dtype=float)
        done += len(block)
        ok = np.ones(len(block), dtype=bool)
        for res in residuals:
            val = _eval_numeric(res, block)
            scale = 1.0 + _eval_numeric_abs(res, block)
            ok &= np.abs(val) <= 1e-9 * scale
            if not ok.any():
                break
        for row in block[ok]:
            vec = [int(round(x)) for x in row]
            alpha = RingElement(split.ring, {(0,) * split.ring.nvars: 1, **dict(zip(split.alpha_basis, vec))})
            if chern_degree(alpha) != split.deg_alpha:
                continue
            w = divide_check(M.chern, alpha, M.n)
            if w is not None:
                witnesses.append(w)
    witnesses.sort(key=lambda w: _alpha_key(split, w.alpha))
    return witnesses, total


def _bounded_search_plain(M, split, bound):
    k = len(split.alpha_basis)
    witnesses = []
    count = 0
    for vec in itertools.product(range(-bound, bound + 1), repeat=k):
        count += 1
        alpha = RingElement(split.ring, {(0,) * split.ring.nvars: 1, **dict(zip(split.alpha_basis, vec))})
        if chern_degree(alpha) != split.deg_alpha:
            continue
        w = divide_check(M.chern, alpha, M.n)
        if w is not None:
            witnesses.append(w)
    witnesses.sort(key=lambda w: _alpha_key(split, w.alpha))
    return witnesses, count


def _beta_in_terms_of_alpha(split: SplitSystem):
    """Substitute away every beta unknown; return residual polynomials in alpha only."""
    system = split.system
    beta_idx = {system.index(b) for b in split.beta_names}
    eqs = [e.residual() for e in system.equations]
    progress = True
    while progress:
        progress = False
        for k, r in enumerate(eqs):
            for var in sorted(r.variables() & beta_idx):
                form = r.linear_form_in(var)
                if form is not None and form[0].is_constant():
                    a, b = form
                    value = -b / a.constant_term()
                    eqs.pop(k)
                    eqs = [e.substitute(var, value) for e in eqs]
                    beta_idx.discard(var)
                    progress = True
                    break
            if progress:
                break
    if any(e.variables() & beta_idx for e in eqs):
        return None
    out = []
    for e in eqs:
        if e.is_zero():
            continue
        out.append(_compile(e, split.system.nvars, len(split.alpha_basis)))
    return out


def _compile(p: Poly, nvars: int, k: int):
    return [(exp[:k], float(c)) for exp, c in p.items()]


def _eval_numeric(compiled, block):
    total = np.zeros(len(block))
    for exp, c in compiled:
        term = np.full(len(block), c)
        for j, e in enumerate(exp):
            if e:
                term = term * block[:, j] ** e
        total += term
    return total


def _eval_numeric_abs(compiled, block):
    total = np.zeros(len(block))
    for exp, c in compiled:
        term = np.full(len(block), abs(c))
        for j, e in enumerate(exp):
            if e:
                term = term * np.abs(block[:, j]) ** e
        total += term
    return total


# ----------------------------------------------------------------------
# decision


def decide_even_factorization(M: ManifoldData, cfg: SearchConfig | None = None) -> FactorizationVerdict:
    cfg = cfg or SearchConfig()
    t0 = time.perf_counter()
    splits = admissible_splits(M.n)
    verdict = FactorizationVerdict(kind="no_proved")

    if cfg.enable_gcd_criterion and truncated_univariate(M.ring):
        cpoly = chern_polynomial(M)
        cert = gcd_certificate(cpoly, M.ring.names[0])
        verdict.gcd_certificate = cert
        if univariate_gcd_criterion(cpoly):
            verdict.method = "gcd_criterion"
            verdict.splits = [
                SplitRecord(d, M.n - d, [], "gcd_criterion", True) for d in splits
            ]
            verdict.seconds = time.perf_counter() - t0
            return verdict

    if not splits:
        verdict.method = "no_admissible_split"
        verdict.seconds = time.perf_counter() - t0
        return verdict

    used_elimination = False
    for d in splits:
        split = build_split_system(M, d)
        rec = SplitRecord(d, M.n - d, split.alpha_names, "", False)
        verdict.splits.append(rec)
        if not split.alpha_basis:
            rec.method = "exact_elimination"
            rec.closed = True
            rec.note = "no basis monomials of degree 4j available for alpha"
            used_elimination = True
            continue
        if cfg.enable_elimination and len(split.alpha_basis) <= cfg.max_alpha_unknowns_for_elimination:
            result = eliminate_solve(split.system, cfg.max_alpha_unknowns_for_elimination)
            rec.elimination = result
            if result.complete:
                rec.method = "exact_elimination"
                used_elimination = True
                found = [
                    w
                    for w in (_witness_from_values(M, split, s) for s in result.rational_solutions)
                    if w is not None
                ]
                if found:
                    found.sort(key=lambda w: _alpha_key(split, w.alpha))
                    rec.witness = found[0]
                    return _yes(verdict, rec.witness, t0)
                rec.closed = True
                continue
            rec.note = "elimination incomplete; falling back to bounded search"
        rec.method = "bounded_search"
        found, iters = bounded_search(M, split, cfg.coeff_bound)
        rec.iterations = iters
        if found:
            rec.witness = found[0]
            return _yes(verdict, rec.witness, t0)

    verdict.seconds = time.perf_counter() - t0
    if all(s.closed for s in verdict.splits):
        verdict.method = "exact_elimination" if used_elimination else "no_admissible_split"
        return verdict
    verdict.kind = "no_within_bound"
    verdict.bound = cfg.coeff_bound
    return verdict


def _yes(verdict: FactorizationVerdict, witness: FactorizationWitness, t0: float) -> FactorizationVerdict:
    verdict.kind = "yes"
    verdict.method = None
    verdict.witness = witness
    verdict.seconds = time.perf_counter() - t0
    return verdict


# ----------------------------------------------------------------------
# soundness replays


def check_witness(M: ManifoldData, w: FactorizationWitness) -> bool:
    """Replay every constraint of an even factorization on ``w``."""
    return (
        w.alpha * w.beta == M.chern
        and w.alpha.constant_term() == 1
        and _even_alpha(w.alpha)
        and chern_degree(w.alpha) == w.deg_alpha
        and chern_degree(w.beta) == w.deg_beta
        and 0 < w.deg_alpha < M.n
        and w.deg_alpha + w.deg_beta <= M.n
        and is_integral(w.alpha)
        and is_integral(w.beta)
    )


def check_no_proved(M: ManifoldData, verdict: FactorizationVerdict) -> bool:
    """Independently re-derive a ``NoProved`` verdict from its certificates."""
    if verdict.kind != "no_proved":
        return False
    if verdict.method == "gcd_criterion":
        c = chern_polynomial(M)
        return truncated_univariate(M.ring) and P.degree(P.subresultant_gcd(c, P.reflect(c))) == 0
    if verdict.method == "no_admissible_split":
        return not any(s.alpha_unknowns for s in verdict.splits if not s.closed) and (
            not admissible_splits(M.n) or all(not s.alpha_unknowns for s in verdict.splits)
        )
    for rec in verdict.splits:
        if not rec.closed:
            return False
        if rec.elimination is None:
            if rec.alpha_unknowns:
                return False
            continue
        split = build_split_system(M, rec.deg_alpha)
        sols = replay(split.system, rec.elimination.certificate)
        if len(sols) != len(rec.elimination.rational_solutions):
            return False
        for s in sols:
            if _witness_from_values(M, split, s) is not None:
                return False
    return True


# ----------------------------------------------------------------------
# obstruction report


@dataclass
class ObstructionReport:
    manifold: ManifoldData
    verdict: FactorizationVerdict
    config: SearchConfig

    @property
    def top_chern(self) -> RingElement:
        return self.manifold.top_chern

    @property
    def top_chern_nonzero(self) -> bool:
        return not self.top_chern.is_zero()

    @property
    def criterion(self) -> str:
        """One of ``satisfied``, ``not satisfied``, ``inconclusive``, ``not applicable``."""
        if not self.manifold.h1_zero:
            return "not applicable"
        if not self.top_chern_nonzero or self.verdict.kind == "yes":
            return "not satisfied"
        if self.verdict.kind == "no_within_bound":
            return "inconclusive"
        return "satisfied"

    def to_dict(self, timing: bool = False) -> dict:
        M = self.manifold
        return {
            "manifold": M.name,
            "n": M.n,
            "ring": M.ring.describe(),
            "chern": M.chern.format(),
            "h1_zero": M.h1_zero,
            "top_chern": self.top_chern.format(),
            "top_chern_nonzero": self.top_chern_nonzero,
            "factorization": self.verdict.to_dict(timing=timing),
            "criterion": self.criterion,
            "config": {
                "coeff_bound": self.config.coeff_bound,
                "enable_gcd_criterion": self.config.enable_gcd_criterion,
                "enable_elimination": self.config.enable_elimination,
                "max_alpha_unknowns_for_elimination": self.config.max_alpha_unknowns_for_elimination,
            },
        }


def obstruction_report(M: ManifoldData, cfg: SearchConfig | None = None) -> ObstructionReport:
    cfg = cfg or SearchConfig()
    return ObstructionReport(M, decide_even_factorization(M, cfg), cfg)
