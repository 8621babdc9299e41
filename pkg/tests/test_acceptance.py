"""One test per acceptance criterion; the terminal summary prints a PASS/FAIL line for each."""

import math
import time

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sympobs import blend as B
from sympobs import calabi as C
from sympobs import catalog
from sympobs import linear as L
from sympobs.cli import main
from sympobs.elimination import eliminate_solve, replay
from sympobs.factor import (
    build_split_system,
    check_no_proved,
    decide_even_factorization,
    residual_polynomial,
    univariate_gcd_criterion,
)
from sympobs.ring import ManifoldData, RingElement, RingPresentation, project_degree


@pytest.mark.acceptance(1, "CP^n obstruction for n = 2..6")
def test_criterion_1_cpn(capsys):
    for n in range(2, 7):
        t0 = time.perf_counter()
        code = main(["check-manifold", "--catalog", f"cp{n}"])
        elapsed = time.perf_counter() - t0
        out = capsys.readouterr().out
        assert code == 0
        assert "criterion satisfied" in out and "NoProved(gcd_criterion)" in out
        M = catalog.cp(n)
        top = project_degree(M.chern, n)
        assert top == M.ring.element(f"{n + 1}a^{n}")
        assert top.coefficient((n,)) == n + 1
        assert elapsed < 1.0


@pytest.mark.acceptance(2, "blow-up of CP^3: forced values, exact contradiction, roots of q")
def test_criterion_2_blowup(capsys):
    t0 = time.perf_counter()
    M = catalog.blowup_cp3_point()
    v = decide_even_factorization(M)
    elapsed = time.perf_counter() - t0
    assert v.label() == "NoProved(exact_elimination)"
    (rec,) = v.splits
    cert = rec.elimination.certificate
    names = rec.elimination.system.unknowns
    forced = {var: val.format(names) for var, val, _ in cert.substitutions}
    # m_2 is the b coefficient of beta, n_2 the b^2 coefficient of alpha
    assert forced["beta[b]"] == "-2" and forced["alpha[b^2]"] == "0"
    q = residual_polynomial(M, "a")
    assert q == [1, 4, 6, 6]
    # the remaining unknowns live on the pure-a part: (1 + n_1 a^2)(1 + m_1 a) = q(a)
    assert forced["beta[a]"] == "4" and forced["alpha[a^2]"] == "6"
    label, lhs, rhs = cert.contradiction
    assert label == "a^3" and lhs == 24 and rhs == q[3] and lhs != rhs
    assert univariate_gcd_criterion(q)
    assert check_no_proved(M, v)
    roots = np.roots([float(c) for c in reversed(q)])
    real = [z for z in roots if abs(z.imag) < 1e-12]
    cplx = sorted((z for z in roots if abs(z.imag) >= 1e-12), key=lambda z: z.imag)
    assert len(real) == 1 and abs(real[0].real - (-0.38839)) <= 1e-4
    assert abs(cplx[0] - complex(-0.30581, -0.57932)) <= 1e-4
    assert abs(cplx[1] - complex(-0.30581, 0.57932)) <= 1e-4
    assert elapsed < 1.0


@pytest.mark.acceptance(3, "CP^2 x CP^2: exactly two rational solution sets with non-integer values")
def test_criterion_3_cp2xcp2():
    t0 = time.perf_counter()
    M = catalog.cp2xcp2()
    split = build_split_system(M, 2)
    assert len(split.system.unknowns) == 8 and len(split.system.equations) == 8
    result = eliminate_solve(split.system)
    v = decide_even_factorization(M)
    elapsed = time.perf_counter() - t0
    assert v.kind == "no_proved" and check_no_proved(M, v)
    assert replay(split.system, result.certificate) == result.rational_solutions
    assert elapsed < 10.0
    # stated literally: two rational solution sets, each with a non-integer value
    assert len(result.rational_solutions) == 2
    for sol in result.rational_solutions:
        assert any(x.denominator != 1 for x in sol.values())


def _four_manifold_rings():
    return [
        RingPresentation([("a", 2)], [], 4),
        RingPresentation([("a", 2), ("b", 2)], [], 4),
        RingPresentation.from_strings([("a", 2), ("b", 2)], ["a*b = 0", "b^2 = -a^2"], 4),
        RingPresentation([("a", 2), ("x", 4)], [], 4),
    ]


@pytest.mark.acceptance(4, "n = 2 with c_2 != 0: NoProved with zero search iterations")
@settings(max_examples=200, deadline=None)
@given(data=st.data())
def test_criterion_4_four_manifolds(data):
    ring = data.draw(st.sampled_from(_four_manifold_rings()))
    basis = [m for m in ring.basis if any(m)]
    coeffs = data.draw(st.lists(st.integers(-20, 20), min_size=len(basis), max_size=len(basis)))
    c = RingElement(ring, {(0,) * ring.nvars: 1, **dict(zip(basis, coeffs))})
    if project_degree(c, 2).is_zero():
        return
    M = ManifoldData(ring, 2, c, True)
    v = decide_even_factorization(M)
    assert v.kind == "no_proved"
    assert v.search_iterations == 0
    assert check_no_proved(M, v)


@pytest.mark.acceptance(5, "rational-angle perturbation of 100 random elliptic 4x4 matrices")
def test_criterion_5_perturbation():
    rng = np.random.default_rng(20240607)
    eps = 1e-3
    for _ in range(100):
        Tbar = L.random_elliptic(2, rng)
        res = L.perturb_to_rational_angles(Tbar, eps)
        T = res.T
        assert L.symplectic_defect(T) <= 1e-10
        assert np.max(np.abs(T - Tbar)) <= 10 * eps * res.condition
        assert all(isinstance(a.p, int) and isinstance(a.q, int) for a in res.angles)
        k = math.lcm(*(a.q for a in res.angles))
        assert k == res.order
        assert np.max(np.abs(np.linalg.matrix_power(T, k) - np.eye(4))) <= 1e-8


def _six_dim_hyperbolic(rng):
    n = 3
    D = np.zeros((6, 6))
    for i in range(2):
        lam = rng.uniform(1.5, 4.0)
        D[i, i], D[n + i, n + i] = lam, 1 / lam
    t = rng.uniform(0.3, 2.8)
    D[2, 2] = D[5, 5] = math.cos(t)
    D[2, 5], D[5, 2] = -math.sin(t), math.sin(t)
    Q = L.random_symplectic(n, rng, 0.3)
    return Q @ D @ L.symplectic_inverse(Q)


@pytest.mark.acceptance(6, "isotropy of E^s for 100 random 6x6 symplectic matrices")
def test_criterion_6_isotropy():
    rng = np.random.default_rng(6)
    for _ in range(100):
        M = _six_dim_hyperbolic(rng)
        assert L.is_symplectic(M, 1e-8)
        s = L.invariant_splitting(M)
        u, _, st_rank = s.ranks
        assert st_rank == 2
        assert u == st_rank
        assert L.isotropy_defect(s.stable, 3) <= 1e-10


@pytest.mark.acceptance(7, "blend pipeline on the cubic-shear map")
def test_criterion_7_blend():
    f = B.cubic_shear()
    S = B.generating_function_from_map(f)
    reports = []
    for d in (0.2, 0.1, 0.05):
        g = B.map_from_generating_function(B.blend(S, d))
        r = B.verify_blend(f, g, d)
        assert r.inside_defect <= 1e-8
        assert r.outside_defect <= 1e-8
        assert r.symplectic_defect <= 1e-5
        assert r.annulus_points > 0
        reports.append(r)
    for a, b in zip(reports, reports[1:]):
        assert 0.25 <= b.c1_distance / a.c1_distance <= 1.0
        assert b.c2_distance / a.c2_distance >= 0.5


def _catalog_hamiltonians():
    return [
        C.PolynomialBump([0.1, -0.2], 0.4, 1.5),
        C.SmoothBump([-0.2, 0.1], 0.35, 2.0),
        C.Rotator([0.0, 0.0], 0.2, 0.5, 1.5),
        C.TimeProfiled(C.PolynomialBump([0.2, 0.2], 0.3, 1.0), "sine"),
    ]


@pytest.mark.acceptance(8, "Calabi homomorphism, conjugation and orbit-copy identities; rotator angle")
def test_criterion_8_calabi():
    hs = _catalog_hamiltonians()
    kw = {"points": 64, "time_steps": 32}
    cal = [C.calabi(F, **kw) for F in hs]
    # homomorphism
    for i, j in [(0, 1), (1, 2), (2, 0), (3, 0)]:
        H = C.compose_hamiltonians(hs[i], hs[j], 200)
        ch = C.calabi(H, **kw)
        assert abs(ch.value - cal[i].value - cal[j].value) <= 2 * (ch.error + cal[i].error + cal[j].error)
    # conjugation invariance
    t = 0.9
    rot = np.array([[math.cos(t), -math.sin(t)], [math.sin(t), math.cos(t)]])
    for F, c in zip(hs, cal):
        for psi in (C.AffineSymplectic.translation([0.1, -0.05]), C.AffineSymplectic(rot, [0.0, 0.0])):
            d = C.calabi(C.conjugate_hamiltonian(F, psi), **kw)
            assert abs(d.value - c.value) <= 2 * (c.error + d.error)
    # orbit copies, k <= 5
    base = C.PolynomialBump([0.0, 0.0], 0.12, 1.0)
    cb = C.calabi(base)
    for k in range(1, 6):
        offsets = [np.array([(j - (k - 1) / 2) * 0.3, 0.0]) for j in range(k)]
        H = C.orbit_copy(base, C.OrbitCopyConfig.translates(k, offsets, [0.0, 0.0], 0.12))
        ck = C.calabi(H)
        assert abs(ck.value - k * cb.value) <= k * cb.error + ck.error
    # rotator angle on the inner plateau
    R = hs[2]
    X = np.array([[0.05, 0.0], [0.1, 0.0], [0.15, 0.0]])
    Y = C.flow(R, 1.0, X)
    assert np.max(np.abs(np.arctan2(Y[:, 1], Y[:, 0]) - R.angular_velocity())) <= 1e-4
