import math

import numpy as np
import pytest

from sympobs import blend as B
from sympobs.linear import standard_j

MAPS_2D = ["cubic-shear", "sheared-linear", "rotation"]


def test_smooth_step_plateaus_and_derivatives():
    t = np.linspace(-0.5, 1.5, 2001)
    s, ds, dds = B.smooth_step(t)
    assert np.all(s[t <= 0] == 0) and np.all(s[t >= 1] == 1)
    assert np.all(np.diff(s) >= 0)
    mid = (t > 0.05) & (t < 0.95)
    h = t[1] - t[0]
    assert np.max(np.abs(np.gradient(s, h)[mid] - ds[mid])) < 1e-3
    assert np.max(np.abs(np.gradient(ds, h)[mid] - dds[mid])) < 2e-2
    assert B.smooth_step(np.array([0.5]))[0][0] == pytest.approx(0.5)


def test_cutoff_profile():
    a = B.CutoffProfile(0.1)
    assert a(0.1) == 0 and a(0.05) == 0 and a(0.2) == 1 and a(0.3) == 1
    assert 0 < a(0.15) < 1
    with pytest.raises(ValueError):
        B.CutoffProfile(0)


def test_map_validation():
    with pytest.raises(ValueError, match="origin"):
        B.PolySymplecticMap.from_strings(1, ["p + 1", "-q"])
    f = B.PolySymplecticMap.from_strings(1, ["2q", "p"])
    with pytest.raises(ValueError, match="not symplectic"):
        B.check_map(f)
    for name, make in B.TEST_MAPS.items():
        assert B.check_map(make(), 1.0) <= 1e-12, name


def test_identity_is_degenerate_chart():
    with pytest.raises(B.DegenerateChartError):
        B.generating_function_from_map(B.identity_map())


def test_linear_map_has_no_remainder():
    S = B.generating_function_from_map(B.quarter_rotation())
    assert not S.has_remainder
    assert np.allclose(S.M2, [[-1.0]]) and np.allclose(S.M1, 0) and np.allclose(S.M3, 0)
    X = np.random.default_rng(0).uniform(-1, 1, (20, 2))
    assert np.array_equal(B.blend(S, 0.1).grad(X), S.grad(X))


def test_quadratic_model_gives_linear_map():
    L = np.array([[2.0, -1.0], [3.0, -1.0]])
    M1, M2, M3 = B.quadratic_part_from_linear(L)
    g = B.map_from_generating_function(B.quadratic_model(M1, M2, M3))
    Z = np.random.default_rng(1).uniform(-1, 1, (50, 2))
    assert np.max(np.abs(g(Z) - Z @ L.T)) <= 1e-12


@pytest.mark.parametrize("name", MAPS_2D + ["gradient-shear-4d"])
def test_round_trip(name):
    f = B.TEST_MAPS[name]()
    box = 1.0 if f.n == 1 else 0.5
    g = B.map_from_generating_function(B.generating_function_from_map(f, box))
    Z = B.box_grid(f.n, box, 11 if f.n == 1 else 5)
    assert np.max(np.abs(g(Z) - f(Z))) <= 1e-6


def test_remainder_is_cubic_order():
    S = B.generating_function_from_map(B.cubic_shear())
    rng = np.random.default_rng(2)
    d = rng.normal(size=(10, 2))
    d /= np.linalg.norm(d, axis=1, keepdims=True)
    g1 = np.linalg.norm(S.remainder_grad(0.02 * d), axis=1)
    g2 = np.linalg.norm(S.remainder_grad(0.01 * d), axis=1)
    assert np.all(g1 > 0)
    # grad k = O(r^2) for k of order >= 3
    assert np.allclose(g2 / g1, 0.25, atol=0.02)


def test_gradient_matches_values():
    S = B.generating_function_from_map(B.cubic_shear())
    X = np.random.default_rng(3).uniform(-0.5, 0.5, (10, 2))
    h = 1e-6
    fd = np.stack([(S.value(X + e) - S.value(X - e)) / (2 * h) for e in np.eye(2) * h], axis=1)
    assert np.max(np.abs(fd - S.grad(X))) <= 1e-7


def test_blend_regions_exact():
    S = B.generating_function_from_map(B.cubic_shear())
    d = 0.1
    T = B.blend(S, d)
    rng = np.random.default_rng(4)
    u = rng.normal(size=(16, 2))
    u /= np.linalg.norm(u, axis=1, keepdims=True)
    inner, outer = u * d / 2, u * 3 * d
    assert np.array_equal(T.grad(inner), S.quad_grad(inner))
    assert np.array_equal(T.value(inner), S.quad_value(inner))
    assert np.array_equal(T.grad(outer), S.grad(outer))
    assert np.array_equal(T.value(outer), S.value(outer))


def test_blend_rejects_large_delta():
    S = B.generating_function_from_map(B.cubic_shear())
    with pytest.raises(ValueError):
        B.blend(S, 0.6)


def test_generated_jacobian_matches_finite_differences():
    f = B.cubic_shear()
    g = B.map_from_generating_function(B.blend(B.generating_function_from_map(f), 0.1))
    Z = np.random.default_rng(5).uniform(-0.3, 0.3, (30, 2))
    assert np.max(np.abs(g.jacobian(Z) - B.fd_jacobian(g, Z, 1e-6))) <= 1e-6


def test_blended_map_symplectic_on_annulus():
    f = B.cubic_shear()
    d = 0.1
    g = B.map_from_generating_function(B.blend(B.generating_function_from_map(f), d))
    t = np.linspace(0, 2 * math.pi, 90, endpoint=False)
    Z = np.concatenate([r * np.stack([np.cos(t), np.sin(t)], 1) for r in np.linspace(0.6 * d, 2.2 * d, 12)])
    D = B.fd_jacobian(g, Z)
    J = standard_j(1)
    assert np.max(np.abs(np.einsum("nji,jk,nkl->nil", D, J, D) - J)) <= 1e-5


@pytest.mark.parametrize("name", ["rotation"])
@pytest.mark.parametrize("delta", [0.2, 0.1, 0.05])
def test_linear_map_blend_defects_vanish(name, delta):
    f = B.TEST_MAPS[name]()
    g = B.map_from_generating_function(B.blend(B.generating_function_from_map(f), delta))
    r = B.verify_blend(f, g, delta)
    assert r.inside_defect <= 1e-10 and r.outside_defect <= 1e-10
    assert r.c1_distance <= 1e-8


def test_linear_4d_blend():
    f = B.PolySymplecticMap.from_strings(2, ["p1", "p2", "-q1", "-q2"], "rot4")
    g = B.map_from_generating_function(B.blend(B.generating_function_from_map(f, 0.5), 0.1))
    Z = np.random.default_rng(6).uniform(-0.5, 0.5, (40, 4))
    assert np.max(np.abs(g(Z) - f(Z))) <= 1e-12


def test_verify_blend_4d_map():
    f = B.gradient_shear_4d()
    d = 0.1
    g = B.map_from_generating_function(B.blend(B.generating_function_from_map(f, 0.5), d))
    pts = B.sample_points(2, d, 0.5, points=5, radial=12, angular=8)
    r = B.verify_blend(f, g, d, 0.5, pts)
    assert r.inside_points > 0 and r.outside_points > 0 and r.annulus_points > 0
    assert r.inside_defect <= 1e-8 and r.outside_defect <= 1e-8
    assert r.symplectic_defect <= 1e-5


def test_report_fields():
    f = B.cubic_shear()
    g = B.map_from_generating_function(B.blend(B.generating_function_from_map(f), 0.2))
    d = B.verify_blend(f, g, 0.2).to_dict()
    assert set(d) >= {"delta", "inside_defect", "outside_defect", "symplectic_defect", "c1_distance", "c2_distance"}
