"""Generating functions of symplectic maps of R^2n fixing the origin, and blending
them to their linearization near 0.

Coordinates are ``z = (q, p)`` with ``q, p`` in R^n.  A map ``(q, p) -> (q', p')``
is described by ``S(q, q')`` with ``dS/dq = -p`` and ``dS/dq' = p'``.  Splitting
off the quadratic part,

    S = <q, M1 q> + <q, M2 q'> + <q', M3 q'> + k(q, q'),

the blended function replaces ``k`` by ``a(||(q, q')||) k`` where ``a`` is a
smooth step equal to 0 below ``delta`` and 1 above ``2 delta``.  The map it
generates agrees with ``df(0)`` near 0 and with ``f`` away from 0.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .expr import parse_expression
from .linear import standard_j
from .poly import Poly

NEWTON_TOL = 1e-12
NEWTON_MAXITER = 50


class DegenerateChartError(ValueError):
    """``dq'/dp`` is singular at the origin, so ``(q, q')`` are not coordinates."""


class NewtonError(RuntimeError):
    pass


# ----------------------------------------------------------------------
# polynomial maps


def _compile(p: Poly):
    exps = np.array([e for e, _ in p.items()], dtype=int).reshape(-1, p.nvars)
    coefs = np.array([float(c) for _, c in p.items()])
    return exps, coefs


def _eval_compiled(compiled, Z: np.ndarray) -> np.ndarray:
    exps, coefs = compiled
    if coefs.size == 0:
        return np.zeros(Z.shape[0])
    out = np.zeros(Z.shape[0])
    for e, c in zip(exps, coefs):
        term = np.full(Z.shape[0], c)
        for j, k in enumerate(e):
            if k:
                term = term * Z[:, j] ** k
        out += term
    return out


@dataclass
class PolySymplecticMap:
    """Polynomial map ``z -> f(z)`` of R^2n with ``f(0) = 0``; ``z = (q_1..q_n, p_1..p_n)``."""

    n: int
    components: list[Poly]
    name: str = ""
    _c: list = field(default_factory=list, repr=False)
    _dc: list = field(default_factory=list, repr=False)
    _ddc: list = field(default_factory=list, repr=False)

    def __post_init__(self):
        if self.n not in (1, 2):
            raise ValueError("only n = 1 or n = 2 is supported")
        if len(self.components) != 2 * self.n or any(c.nvars != 2 * self.n for c in self.components):
            raise ValueError(f"need {2 * self.n} components in {2 * self.n} variables")
        if any(c.constant_term() != 0 for c in self.components):
            raise ValueError("the map must fix the origin")
        m = 2 * self.n
        self._c = [_compile(c) for c in self.components]
        self._dc = [[_compile(c.derivative(j)) for j in range(m)] for c in self.components]
        self._ddc = [
            [[_compile(c.derivative(j).derivative(k)) for k in range(m)] for j in range(m)]
            for c in self.components
        ]

    @classmethod
    def from_strings(cls, n: int, exprs: Sequence[str], name: str = "") -> "PolySymplecticMap":
        names = variable_names(n)
        return cls(n, [parse_expression(e, names) for e in exprs], name)

    def __call__(self, Z) -> np.ndarray:
        Z = np.atleast_2d(np.asarray(Z, dtype=float))
        return np.stack([_eval_compiled(c, Z) for c in self._c], axis=1)

    def jacobian(self, Z) -> np.ndarray:
        Z = np.atleast_2d(np.asarray(Z, dtype=float))
        m = 2 * self.n
        out = np.empty((Z.shape[0], m, m))
        for i in range(m):
            for j in range(m):
                out[:, i, j] = _eval_compiled(self._dc[i][j], Z)
        return out

    def hessians(self, Z) -> np.ndarray:
        """Second derivatives, shape ``(N, component, j, k)``."""
        Z = np.atleast_2d(np.asarray(Z, dtype=float))
        m = 2 * self.n
        out = np.empty((Z.shape[0], m, m, m))
        for i in range(m):
            for j in range(m):
                for k in range(m):
                    out[:, i, j, k] = _eval_compiled(self._ddc[i][j][k], Z)
        return out

    def linear_part(self) -> np.ndarray:
        return self.jacobian(np.zeros((1, 2 * self.n)))[0]

    def symplectic_defect(self, Z) -> float:
        D = self.jacobian(Z)
        J = standard_j(self.n)
        return float(np.max(np.abs(np.einsum("nji,jk,nkl->nil", D, J, D) - J)))


def variable_names(n: int) -> list[str]:
    if n == 1:
        return ["q", "p"]
    return [f"q{i + 1}" for i in range(n)] + [f"p{i + 1}" for i in range(n)]


def check_map(f: PolySymplecticMap, box: float = 1.0, points: int = 11, tol: float = 1e-6) -> float:
    """Symplectic defect of ``f`` on a grid of the box; raises if above ``tol``."""
    d = f.symplectic_defect(box_grid(f.n, box, points))
    if d > tol:
        raise ValueError(f"map is not symplectic on the box: Jacobian defect {d:.3g}")
    return d


def box_grid(n: int, box: float, points: int) -> np.ndarray:
    axis = np.linspace(-box, box, points)
    mesh = np.meshgrid(*([axis] * (2 * n)), indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=1)


# ----------------------------------------------------------------------
# cutoff


def smooth_step(t) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """``s(t) = e^{-1/t} / (e^{-1/t} + e^{-1/(1-t)})`` with first and second derivatives.

    ``s`` is 0 for ``t <= 0`` and 1 for ``t >= 1`` and smooth everywhere.
    Outside ``(0.002, 0.998)`` the value differs from its plateau by less
    than ``e^{-490}``, so those points are clamped.
    """
    t = np.asarray(t, dtype=float)
    s = np.where(t >= 0.5, 1.0, 0.0)
    ds = np.zeros_like(t)
    dds = np.zeros_like(t)
    mid = (t > 0.002) & (t < 0.998)
    if np.any(mid):
        x = t[mid]
        h = 1 / x - 1 / (1 - x)
        sm = 1 / (1 + np.exp(h))
        g = 1 / x**2 + 1 / (1 - x) ** 2
        dg = -2 / x**3 + 2 / (1 - x) ** 3
        w = sm * (1 - sm)
        d1 = w * g
        d2 = d1 * (1 - 2 * sm) * g + w * dg
        s[mid], ds[mid], dds[mid] = sm, d1, d2
    s = np.where(t <= 0.002, 0.0, np.where(t >= 0.998, 1.0, s))
    return s, ds, dds


@dataclass(frozen=True)
class CutoffProfile:
    """``a_delta(r)``: 0 for ``r <= delta``, 1 for ``r >= 2 delta``."""

    delta: float

    def __post_init__(self):
        if not self.delta > 0:
            raise ValueError("delta must be positive")

    def __call__(self, r):
        return smooth_step((np.asarray(r, dtype=float) - self.delta) / self.delta)[0]

    def with_derivatives(self, r):
        s, ds, dds = smooth_step((np.asarray(r, dtype=float) - self.delta) / self.delta)
        return s, ds / self.delta, dds / self.delta**2


# ----------------------------------------------------------------------
# generating functions


_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(24)
_GL_T = (_GL_NODES + 1) / 2
_GL_W = _GL_WEIGHTS / 2


@dataclass
class GeneratingFunctionModel:
    """``S(q, q')`` split into quadratic part and remainder ``k``.

    ``full_grad`` and ``full_hess`` evaluate the derivatives of the full
    ``S`` at points ``X = (q, q')`` of shape ``(N, 2n)``; ``None`` means
    ``k`` vanishes identically.  When ``cutoff`` is set the remainder is
    multiplied by ``cutoff(||X||)``.
    """

    n: int
    M1: np.ndarray
    M2: np.ndarray
    M3: np.ndarray
    full_grad: Callable[[np.ndarray], np.ndarray] | None = None
    full_hess: Callable[[np.ndarray], np.ndarray] | None = None
    cutoff: CutoffProfile | None = None
    box: float = 1.0

    def __post_init__(self):
        if abs(np.linalg.det(self.M2)) < 1e-12:
            raise DegenerateChartError("M2 is singular; (q, q') do not parametrize the map")

    # quadratic part
    def quad_value(self, X):
        q, qp = X[:, : self.n], X[:, self.n :]
        return (
            np.einsum("ni,ij,nj->n", q, self.M1, q)
            + np.einsum("ni,ij,nj->n", q, self.M2, qp)
            + np.einsum("ni,ij,nj->n", qp, self.M3, qp)
        )

    def quad_grad(self, X):
        q, qp = X[:, : self.n], X[:, self.n :]
        gq = q @ (2 * self.M1).T + qp @ self.M2.T
        gqp = q @ self.M2 + qp @ (2 * self.M3).T
        return np.concatenate([gq, gqp], axis=1)

    def quad_hess(self) -> np.ndarray:
        return np.block([[2 * self.M1, self.M2], [self.M2.T, 2 * self.M3]])

    # remainder
    def remainder_grad(self, X):
        if self.full_grad is None:
            return np.zeros_like(X)
        return self.full_grad(X) - self.quad_grad(X)

    def remainder_hess(self, X):
        if self.full_hess is None:
            return np.zeros((X.shape[0], 2 * self.n, 2 * self.n))
        return self.full_hess(X) - self.quad_hess()[None]

    def remainder_value(self, X):
        if self.full_grad is None:
            return np.zeros(X.shape[0])
        total = np.zeros(X.shape[0])
        for t, w in zip(_GL_T, _GL_W):
            total += w * np.einsum("ni,ni->n", self.full_grad(t * X), X)
        return total - self.quad_value(X)

    # blended S
    def value(self, X):
        X = np.atleast_2d(X)
        k = self.remainder_value(X)
        a = 1.0 if self.cutoff is None else self.cutoff(np.linalg.norm(X, axis=1))
        return self.quad_value(X) + a * k

    def grad(self, X):
        X = np.atleast_2d(X)
        gk = self.remainder_grad(X)
        if self.cutoff is None or self.full_grad is None:
            return self.quad_grad(X) + gk
        r = np.linalg.norm(X, axis=1)
        a, da, _ = self.cutoff.with_derivatives(r)
        out = self.quad_grad(X) + a[:, None] * gk
        ring = da != 0
        if np.any(ring):
            Xr = X[ring]
            k = self.remainder_value(Xr)
            out[ring] += (da[ring] * k / r[ring])[:, None] * Xr
        return out

    def hess(self, X):
        X = np.atleast_2d(X)
        Hk = self.remainder_hess(X)
        H0 = np.broadcast_to(self.quad_hess(), Hk.shape)
        if self.cutoff is None or self.full_grad is None:
            return H0 + Hk
        r = np.linalg.norm(X, axis=1)
        a, da, dda = self.cutoff.with_derivatives(r)
        out = H0 + a[:, None, None] * Hk
        ring = (da != 0) | (dda != 0)
        if np.any(ring):
            Xr, rr = X[ring], r[ring]
            u = Xr / rr[:, None]
            k = self.remainder_value(Xr)
            gk = self.remainder_grad(Xr)
            eye = np.eye(X.shape[1])[None]
            uu = np.einsum("ni,nj->nij", u, u)
            out[ring] += (
                da[ring, None, None] * (np.einsum("ni,nj->nij", u, gk) + np.einsum("ni,nj->nij", gk, u))
                + (k * dda[ring])[:, None, None] * uu
                + (k * da[ring] / rr)[:, None, None] * (eye - uu)
            )
        return out

    @property
    def has_remainder(self) -> bool:
        return self.full_grad is not None


def quadratic_model(M1, M2, M3) -> GeneratingFunctionModel:
    M1, M2, M3 = (np.atleast_2d(np.asarray(M, dtype=float)) for M in (M1, M2, M3))
    return GeneratingFunctionModel(M1.shape[0], M1, M2, M3)


def quadratic_part_from_linear(L: np.ndarray):
    """``(M1, M2, M3)`` of the linear symplectic map ``L = [[A, B], [C, D]]`` (needs ``B`` invertible)."""
    n = L.shape[0] // 2
    A, B, C, D = L[:n, :n], L[:n, n:], L[n:, :n], L[n:, n:]
    if abs(np.linalg.det(B)) < 1e-12:
        raise DegenerateChartError("dq'/dp is singular at the origin; (q, q') is not a chart")
    Binv = np.linalg.inv(B)
    M2 = -Binv
    M1 = Binv @ A / 2
    M3 = D @ Binv / 2
    return (M1 + M1.T) / 2, M2, (M3 + M3.T) / 2


def generating_function_from_map(f: PolySymplecticMap, box: float = 1.0) -> GeneratingFunctionModel:
    """Generating function of ``f`` on the box.

    The quadratic part comes from ``df(0)``.  Derivatives of the full ``S``
    are evaluated by solving ``q'(q, p) = q'`` for ``p`` (Newton from the
    linear prediction): then ``dS/dq = -p`` and ``dS/dq' = p'(q, p)``.  Values
    of ``S`` come from radial Gauss-Legendre integration of the gradient.
    """
    n = f.n
    L = f.linear_part()
    M1, M2, M3 = quadratic_part_from_linear(L)
    A, B = L[:n, :n], L[:n, n:]
    Binv = np.linalg.inv(B)

    def solve_p(X):
        q, qp = X[:, :n], X[:, n:]
        p = (qp - q @ A.T) @ Binv.T
        for _ in range(NEWTON_MAXITER):
            Z = np.concatenate([q, p], axis=1)
            resid = f(Z)[:, :n] - qp
            if np.max(np.abs(resid), initial=0.0) <= NEWTON_TOL * (1 + np.max(np.abs(qp), initial=0.0)):
                return p, Z
            Jp = f.jacobian(Z)[:, :n, n:]
            p = p - np.linalg.solve(Jp, resid[..., None])[..., 0]
        raise NewtonError("could not solve for p in the (q, q') chart; the box may be too large")

    def grad(X):
        X = np.atleast_2d(X)
        p, Z = solve_p(X)
        return np.concatenate([-p, f(Z)[:, n:]], axis=1)

    def hess(X):
        X = np.atleast_2d(X)
        _, Z = solve_p(X)
        D = f.jacobian(Z)
        Qq, Qp, Pq, Pp = D[:, :n, :n], D[:, :n, n:], D[:, n:, :n], D[:, n:, n:]
        Qp_inv = np.linalg.inv(Qp)
        dp_dq = -Qp_inv @ Qq
        dp_dqp = Qp_inv
        Hqq = -dp_dq
        Hqqp = -dp_dqp
        Hqpq = Pq + Pp @ dp_dq
        Hqpqp = Pp @ dp_dqp
        # rows index d/dq_i of dS/d(.) ; assemble symmetric Hessian of S
        top = np.concatenate([Hqq, np.swapaxes(Hqpq, 1, 2)], axis=2)
        bottom = np.concatenate([Hqpq, Hqpqp], axis=2)
        H = np.concatenate([top, bottom], axis=1)
        return (H + np.swapaxes(H, 1, 2)) / 2

    model = GeneratingFunctionModel(n, M1, M2, M3, grad, hess, None, box)
    origin = np.zeros((1, 2 * n))
    if np.max(np.abs(model.remainder_grad(origin))) > 1e-8:
        raise ValueError("remainder gradient does not vanish at the origin")
    if _is_linear(f):
        return GeneratingFunctionModel(n, M1, M2, M3, None, None, None, box)
    return model


def _is_linear(f: PolySymplecticMap) -> bool:
    return all(sum(e) <= 1 for c in f.components for e, _ in c.items())


def blend(S: GeneratingFunctionModel, delta: float) -> GeneratingFunctionModel:
    """``S`` with remainder multiplied by ``a_delta(||(q, q')||)``."""
    if not delta > 0:
        raise ValueError("delta must be positive")
    if 2 * delta > S.box:
        raise ValueError(f"delta = {delta} is too large: the ball of radius 2 delta must lie in the box")
    return GeneratingFunctionModel(S.n, S.M1, S.M2, S.M3, S.full_grad, S.full_hess, CutoffProfile(delta), S.box)


# ----------------------------------------------------------------------
# maps from generating functions


@dataclass
class GeneratedMap:
    """The symplectic map ``(q, p) -> (q', p')`` defined implicitly by a generating function."""

    model: GeneratingFunctionModel

    @property
    def n(self):
        return self.model.n

    def solve(self, Z) -> np.ndarray:
        """``q'`` for each input point (Newton from the linear prediction)."""
        Z = np.atleast_2d(np.asarray(Z, dtype=float))
        n, m = self.n, self.model
        q, p = Z[:, :n], Z[:, n:]
        M2inv = np.linalg.inv(m.M2)
        qp = (-p - q @ (2 * m.M1).T) @ M2inv.T
        for _ in range(NEWTON_MAXITER):
            X = np.concatenate([q, qp], axis=1)
            resid = m.grad(X)[:, :n] + p
            if np.max(np.abs(resid), initial=0.0) <= NEWTON_TOL * (1 + np.max(np.abs(p), initial=0.0)):
                return qp
            H = m.hess(X)[:, :n, n:]
            qp = qp - np.linalg.solve(H, resid[..., None])[..., 0]
        raise NewtonError("Newton iteration for q' did not converge; delta or the box may be too large")

    def __call__(self, Z) -> np.ndarray:
        Z = np.atleast_2d(np.asarray(Z, dtype=float))
        qp = self.solve(Z)
        X = np.concatenate([Z[:, : self.n], qp], axis=1)
        return np.concatenate([qp, self.model.grad(X)[:, self.n :]], axis=1)

    def jacobian(self, Z) -> np.ndarray:
        """Exact Jacobian by implicit differentiation of the gradient identities."""
        Z = np.atleast_2d(np.asarray(Z, dtype=float))
        n = self.n
        qp = self.solve(Z)
        H = self.model.hess(np.concatenate([Z[:, :n], qp], axis=1))
        Hqq, Hqqp, Hqpq, Hqpqp = H[:, :n, :n], H[:, :n, n:], H[:, n:, :n], H[:, n:, n:]
        inv = np.linalg.inv(Hqqp)
        dqp_dq = -inv @ Hqq
        dqp_dp = -inv
        dpp_dq = Hqpq + Hqpqp @ dqp_dq
        dpp_dp = Hqpqp @ dqp_dp
        top = np.concatenate([dqp_dq, dqp_dp], axis=2)
        bottom = np.concatenate([dpp_dq, dpp_dp], axis=2)
        return np.concatenate([top, bottom], axis=1)


def map_from_generating_function(S: GeneratingFunctionModel, box: float | None = None) -> GeneratedMap:
    return GeneratedMap(S)


def fd_jacobian(g: Callable, Z: np.ndarray, h: float = 1e-5) -> np.ndarray:
    Z = np.atleast_2d(Z)
    m = Z.shape[1]
    cols = []
    for j in range(m):
        e = np.zeros(m)
        e[j] = h
        cols.append((g(Z + e) - g(Z - e)) / (2 * h))
    return np.stack(cols, axis=2)


# ----------------------------------------------------------------------
# verification


@dataclass
class BlendReport:
    delta: float
    inside_defect: float
    outside_defect: float
    symplectic_defect: float
    c1_distance: float
    c2_distance: float
    inside_points: int
    outside_points: int
    annulus_points: int

    def to_dict(self) -> dict:
        return {k: getattr(self, k) for k in self.__dataclass_fields__}


def sample_points(n: int, delta: float, box: float = 1.0, points: int = 21, radial: int = 48, angular: int = 64):
    """Box grid plus points on circles of radius ``delta * (0.25 .. 3)`` in every (q_i, p_i) plane
    (and random directions for ``n = 2``), so the blending annulus is resolved at every scale."""
    base = box_grid(n, box, points)
    radii = delta * np.linspace(0.25, 3.0, radial)
    if n == 1:
        ang = np.linspace(0, 2 * np.pi, angular, endpoint=False)
        rings = np.array([[r * np.cos(t), r * np.sin(t)] for r in radii for t in ang])
    else:
        rng = np.random.default_rng(12345)
        dirs = rng.normal(size=(angular * 4, 4))
        dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
        rings = (radii[:, None, None] * dirs[None]).reshape(-1, 4)
    rings = rings[np.all(np.abs(rings) <= box, axis=1)]
    return np.concatenate([base, rings], axis=0)


def verify_blend(
    f: PolySymplecticMap,
    g: GeneratedMap,
    delta: float,
    box: float = 1.0,
    points: np.ndarray | None = None,
    h: float = 1e-5,
) -> BlendReport:
    """Defects of the blended map ``g`` against ``f`` and ``df(0)``.

    The inside region is the set of grid points with ``||z|| <= delta/2``
    whose chart point ``(q, q')`` under ``df(0)`` also lies within ``delta``;
    the outside region is ``||z|| >= 2 delta`` with ``f``'s chart point beyond
    ``2 delta``.  Jacobians are central finite differences with step ``h``;
    second derivatives of ``g`` are finite differences of its exact
    Jacobian.
    """
    n = f.n
    Z = sample_points(n, delta, box) if points is None else np.atleast_2d(points)
    L = f.linear_part()
    r = np.linalg.norm(Z, axis=1)
    chart_lin = np.linalg.norm(np.concatenate([Z[:, :n], Z @ L[:n].T], axis=1), axis=1)
    chart_f = np.linalg.norm(np.concatenate([Z[:, :n], f(Z)[:, :n]], axis=1), axis=1)
    inside = (r <= delta / 2) & (chart_lin < delta)
    outside = (r >= 2 * delta) & (chart_f > 2 * delta)
    annulus = ~inside & ~outside

    gz = g(Z)
    fz = f(Z)
    lin = Z @ L.T
    inside_defect = float(np.max(np.abs(gz[inside] - lin[inside]), initial=0.0))
    outside_defect = float(np.max(np.abs(gz[outside] - fz[outside]), initial=0.0))

    Dg = fd_jacobian(g, Z, h)
    J = standard_j(n)
    sym = np.max(np.abs(np.einsum("nji,jk,nkl->nil", Dg, J, Dg) - J), axis=(1, 2))
    Df = f.jacobian(Z)
    c1 = np.max(np.abs(Dg - Df), axis=(1, 2)) + np.max(np.abs(gz - fz), axis=1)

    hh = 1e-4
    D2g = np.stack([(g.jacobian(Z + e) - g.jacobian(Z - e)) / (2 * hh) for e in np.eye(2 * n) * hh], axis=3)
    D2f = f.hessians(Z)
    c2 = np.max(np.abs(D2g - D2f), axis=(1, 2, 3))
    return BlendReport(
        delta,
        inside_defect,
        outside_defect,
        float(np.max(sym)),
        float(np.max(c1)),
        float(np.max(c2)),
        int(inside.sum()),
        int(outside.sum()),
        int(annulus.sum()),
    )


# ----------------------------------------------------------------------
# test maps


def cubic_shear(kappa: str = "1/2") -> PolySymplecticMap:
    """Quarter rotation after the shear ``p -> p + kappa q^2``: ``(q, p) -> (p + kappa q^2, -q)``."""
    return PolySymplecticMap.from_strings(1, [f"p + ({kappa}) q^2", "-q"], "cubic-shear")


def sheared_linear(kappa: str = "1/2") -> PolySymplecticMap:
    """``[[2, -1], [3, -1]]`` after the same shear; its quadratic part has ``M1 != 0``."""
    return PolySymplecticMap.from_strings(
        1, [f"2q - p - ({kappa}) q^2", f"3q - p - ({kappa}) q^2"], "sheared-linear"
    )


def quarter_rotation() -> PolySymplecticMap:
    return PolySymplecticMap.from_strings(1, ["p", "-q"], "rotation")


def identity_map(n: int = 1) -> PolySymplecticMap:
    return PolySymplecticMap.from_strings(n, variable_names(n), "identity")


def gradient_shear_4d(kappa: str = "1/2") -> PolySymplecticMap:
    """Four-dimensional test map ``(q, p) -> (p + grad V(q), -q)`` with ``V = kappa (q1^3 + q2^3)/3 + q1^2 q2``."""
    return PolySymplecticMap.from_strings(
        2,
        [f"p1 + ({kappa}) q1^2 + 2 q1 q2", f"p2 + ({kappa}) q2^2 + q1^2", "-q1", "-q2"],
        "gradient-shear-4d",
    )


TEST_MAPS: dict[str, Callable[[], PolySymplecticMap]] = {
    "cubic-shear": cubic_shear,
    "sheared-linear": sheared_linear,
    "rotation": quarter_rotation,
    "identity": identity_map,
    "gradient-shear-4d": gradient_shear_4d,
}
