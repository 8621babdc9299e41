import math
from fractions import Fraction as Fr

import numpy as np
import pytest

from sympobs import linear as L


def hyperbolic_elliptic(rng, n_hyp=2, n_ell=1):
    """Random conjugate of diag(l_i, 1/l_i) on (q_i, p_i) for the first planes and rotations on the rest."""
    n = n_hyp + n_ell
    D = np.zeros((2 * n, 2 * n))
    for i in range(n_hyp):
        lam = rng.uniform(1.5, 4.0)
        D[i, i], D[n + i, n + i] = lam, 1 / lam
    for i in range(n_hyp, n):
        t = rng.uniform(0.3, 2.8)
        D[i, i] = D[n + i, n + i] = math.cos(t)
        D[i, n + i], D[n + i, i] = -math.sin(t), math.sin(t)
    Q = L.random_symplectic(n, rng, 0.3)
    return Q @ D @ L.symplectic_inverse(Q)


def test_is_symplectic_examples():
    rng = np.random.default_rng(0)
    assert L.is_symplectic(L.standard_j(2))
    for t in (0.1, 1.0, 2.5):
        assert L.is_symplectic(L.rotation(t))
    for _ in range(20):
        S = rng.normal(size=(4, 4))
        assert L.is_symplectic(L.hamiltonian_exp(S + S.T), 1e-8)
    assert not L.is_symplectic(np.diag([2.0, 1.0]))


def test_symplectic_matrix_validates():
    with pytest.raises(ValueError):
        L.SymplecticMatrix(np.diag([2.0, 1.0]))
    assert L.SymplecticMatrix(L.rotation(0.3)).n == 1


def test_classify_examples():
    assert L.classify(L.block_rotation([0.7, 1.9])).elliptic
    c = L.classify(np.diag([2.0, 0.5]))
    assert not c.elliptic and sorted(c.labels) == ["contracting", "expanding"]
    same = L.classify(L.block_rotation([0.7, 0.7]))
    assert not same.elliptic and not same.simple
    assert not L.classify(L.block_rotation([0.7, -0.7])).elliptic
    assert not L.classify(L.block_rotation([0.0, 1.0])).elliptic


def test_eigenvalues_come_in_quadruples():
    rng = np.random.default_rng(1)
    for _ in range(50):
        M = L.random_symplectic(3, rng, 0.5)
        w = np.linalg.eigvals(M)
        for z in w:
            for partner in (1 / z, np.conj(z), 1 / np.conj(z)):
                assert np.min(np.abs(w - partner)) <= 1e-8 * max(1, abs(partner))


def test_splitting_examples():
    M = np.zeros((4, 4))
    # (q1, q2, p1, p2): hyperbolic on (q1, p1), rotation on (q2, p2)
    M[0, 0], M[2, 2] = 2.0, 0.5
    M[1, 1] = M[3, 3] = math.cos(1.0)
    M[1, 3], M[3, 1] = -math.sin(1.0), math.sin(1.0)
    s = L.invariant_splitting(M)
    assert s.ranks == (1, 2, 1)
    e = L.invariant_splitting(L.block_rotation([0.4, 2.0]))
    assert e.ranks == (0, 4, 0)


def test_splitting_6d_isotropic():
    rng = np.random.default_rng(2)
    for _ in range(30):
        s = L.invariant_splitting(hyperbolic_elliptic(rng))
        assert s.ranks == (2, 2, 2)
        assert L.isotropy_defect(s.stable, 3) <= 1e-10
        assert L.isotropy_defect(s.unstable, 3) <= 1e-10


def test_ranks_match_for_random_symplectic():
    rng = np.random.default_rng(3)
    for _ in range(50):
        M = L.random_symplectic(3, rng, 0.6)
        try:
            s = L.invariant_splitting(M)
        except L.SplittingError as exc:
            assert "gap" in str(exc)
            continue
        u, _, st = s.ranks
        assert u == st
        if st:
            assert L.isotropy_defect(s.stable, 3) <= 1e-10


def test_splitting_refuses_gap_violation():
    M = np.diag([1.0005, 1.0, 1 / 1.0005, 1.0])
    with pytest.raises(L.SplittingError):
        L.invariant_splitting(M)


def test_isotropy_examples():
    assert L.isotropy_defect([np.array([1.0, 2.0, 3.0, 4.0])], 2) == 0
    e1, e3 = np.eye(4)[0], np.eye(4)[2]
    assert L.isotropy_defect([e1, e3], 2) == 1
    with pytest.raises(ValueError):
        L.isotropy_defect([np.ones(4)], 3)


def test_rational_angle_examples():
    for eps in (1e-9, 1e-3, 0.1):
        assert L.rational_angle_approx(2 * math.pi / 3, eps).fraction == Fr(1, 3)
    # beyond eps = 1/6 the smaller denominator 1/2 is admissible
    assert L.rational_angle_approx(2 * math.pi / 3, 0.2).fraction == Fr(1, 2)
    assert L.rational_angle_approx(1.3, 0.6).fraction == Fr(0)
    assert str(L.rational_angle_approx(-2 * math.pi / 5, 1e-9)) == "-1/5"


def test_rational_angle_minimal_denominator_bruteforce():
    rng = np.random.default_rng(4)
    for theta in [1.0] + list(rng.uniform(-math.pi, math.pi, 40)):
        for eps in (1e-2, 1e-3):
            got = L.rational_angle_approx(theta, eps)
            x = theta / (2 * math.pi)
            q_min = next(q for q in range(1, 2001) if abs(round(x * q) / q - x) <= eps)
            assert got.q == q_min
            assert abs(float(got.fraction) - x) <= eps * (1 + 1e-12)
    assert L.rational_angle_approx(1.0, 1e-3).fraction == Fr(4, 25)


def test_identity_order_examples():
    A = L.RationalAngle
    assert L.identity_order([A(1, 3), A(1, 4)]) == 12
    assert L.identity_order([A(0, 1)]) == 1
    assert L.identity_order([A(1, 5)]) == 5
    R = L.rotation(2 * math.pi / 5)
    assert np.max(np.abs(np.linalg.matrix_power(R, 5) - np.eye(2))) <= 1e-12
    with pytest.raises(ValueError):
        A(2, 4)


def test_perturb_rotation_is_fixed():
    R = L.rotation(2 * math.pi / 5)
    res = L.perturb_to_rational_angles(R, 1e-3)
    assert [str(a) for a in res.angles] == ["1/5"] and res.order == 5
    assert np.max(np.abs(res.T - R)) <= 1e-12


def test_perturb_direct_block_construction():
    Q = L.random_symplectic(2, np.random.default_rng(5), 0.3)
    M = Q @ L.block_rotation([1.0, 2.0]) @ L.symplectic_inverse(Q)
    res = L.perturb_to_rational_angles(M, 1e-3)
    fr = sorted(abs(a.fraction) for a in res.angles)
    assert fr == [L.rational_angle_approx(1.0, 1e-3).fraction, L.rational_angle_approx(2.0, 1e-3).fraction]
    assert L.symplectic_defect(res.T) <= 1e-10
    assert np.max(np.abs(res.T - M)) <= 10 * 1e-3 * 2 * math.pi * res.condition


def test_perturb_keeps_angles_distinct():
    # 1/7 and 1/7 + tiny would collapse at eps = 0.05
    M = L.block_rotation([2 * math.pi / 7, 2 * math.pi / 7 + 0.01])
    res = L.perturb_to_rational_angles(M, 0.05)
    a, b = (x.fraction for x in res.angles)
    assert a != b and (a + b) % 1 != 0
    assert L.classify(res.T).elliptic


def test_perturb_non_elliptic_raises():
    with pytest.raises(L.NotEllipticError):
        L.perturb_to_rational_angles(np.diag([2.0, 0.5]), 1e-3)


@pytest.mark.parametrize("n", [1, 2, 3])
def test_finite_order_small_denominators(n):
    rng = np.random.default_rng(10 + n)
    for _ in range(20):
        M = L.random_elliptic(n, rng)
        res = L.perturb_to_rational_angles(M, 0.02)
        if max(a.q for a in res.angles) > 50:
            continue
        k = res.order
        assert np.max(np.abs(np.linalg.matrix_power(res.T, k) - np.eye(2 * n))) <= 1e-8


def test_matrix_file_roundtrip():
    M = L.random_symplectic(2, np.random.default_rng(6))
    assert np.array_equal(L.parse_matrix(L.format_matrix(M)), M)
    with pytest.raises(ValueError, match=":3:"):
        L.parse_matrix("2\n1 0\n0 x\n", "m.txt")
    with pytest.raises(ValueError, match="expected 2 rows"):
        L.parse_matrix("2\n1 0\n", "m.txt")
