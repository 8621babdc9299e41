"""Compactly supported Hamiltonians on a box in R^2n, their flows and Calabi invariants.

Coordinates ``x = (q, p)``; the flow solves ``dx/dt = J grad F_t(x)`` with
``J = [[0, I], [-I, 0]]``.  The Calabi invariant is ``int_0^1 int F_t dx dt``
over Lebesgue volume.  Quadrature uses the trapezoid rule on a tensor grid over
the support's bounding box and Simpson's rule in time; every value carries an
error estimate from comparing the grid with its half-resolution subgrid.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.interpolate import RectBivariateSpline
from scipy.special import gammaln

from .blend import smooth_step
from .linear import is_symplectic, standard_j

DEFAULT_STEPS = 1000
FIXED_POINT_TOL = 1e-14
COLLAR = 0.05


class SupportError(ValueError):
    """The support of a Hamiltonian reaches the boundary collar of its box."""


class DivergenceError(RuntimeError):
    """The implicit-midpoint fixed-point iteration did not converge."""


def _box(box, n: int) -> tuple[np.ndarray, np.ndarray]:
    if box is None:
        box = (-1.0, 1.0)
    lo, hi = box
    lo = np.broadcast_to(np.asarray(lo, dtype=float), (2 * n,)).copy()
    hi = np.broadcast_to(np.asarray(hi, dtype=float), (2 * n,)).copy()
    if np.any(hi <= lo):
        raise ValueError("box must have positive side lengths")
    return lo, hi


class CompactHamiltonian:
    """Base class.  Subclasses provide ``value``, ``grad`` and ``support``."""

    n: int = 1
    box: tuple[np.ndarray, np.ndarray]
    autonomous: bool = True

    def value(self, t: float, X: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def grad(self, t: float, X: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def support(self) -> tuple[np.ndarray, np.ndarray] | None:
        """Closed bounding box of the support, or ``None`` for the zero function."""
        raise NotImplementedError

    def values_at_times(self, ts: Sequence[float], X: np.ndarray):
        for t in ts:
            yield self.value(t, X)

    def validate(self):
        """Raise :class:`SupportError` unless the support keeps a 5% collar inside the box."""
        sup = self.support()
        if sup is None:
            return
        lo, hi = self.box
        collar = COLLAR * (hi - lo)
        if np.any(sup[0] < lo + collar) or np.any(sup[1] > hi - collar):
            raise SupportError(
                f"support [{_fmt_vec(sup[0])}, {_fmt_vec(sup[1])}] reaches the boundary collar of the box "
                f"[{_fmt_vec(lo)}, {_fmt_vec(hi)}]"
            )
        return self

    def velocity(self, t: float, X: np.ndarray) -> np.ndarray:
        return self.grad(t, X) @ standard_j(self.n).T

    def __add__(self, other: "CompactHamiltonian") -> "CompactHamiltonian":
        return SumHamiltonian([self, other])

    def scaled(self, c: float) -> "CompactHamiltonian":
        return ScaledHamiltonian(self, c)


def _fmt_vec(v) -> str:
    return "(" + ", ".join(f"{x:.4g}" for x in v) + ")"


def _merge_support(parts):
    parts = [p for p in parts if p is not None]
    if not parts:
        return None
    return np.min([p[0] for p in parts], axis=0), np.max([p[1] for p in parts], axis=0)


# ----------------------------------------------------------------------
# families


@dataclass
class _Radial(CompactHamiltonian):
    center: np.ndarray
    radius: float
    amplitude: float = 1.0
    n: int = 1
    box: tuple = None
    autonomous: bool = True

    def __post_init__(self):
        self.center = np.asarray(self.center, dtype=float).reshape(2 * self.n)
        if not self.radius > 0:
            raise ValueError("radius must be positive")
        self.box = _box(self.box, self.n)

    def support(self):
        return self.center - self.radius, self.center + self.radius

    # radial profile phi(s) with s = |x - c|^2 / R^2, and phi'(s)
    def profile(self, s):
        raise NotImplementedError

    def value(self, t, X):
        X = np.atleast_2d(X)
        s = np.sum((X - self.center) ** 2, axis=1) / self.radius**2
        return self.amplitude * self.profile(s)[0]

    def grad(self, t, X):
        X = np.atleast_2d(X)
        d = X - self.center
        s = np.sum(d**2, axis=1) / self.radius**2
        dphi = self.profile(s)[1]
        return (self.amplitude * dphi * 2 / self.radius**2)[:, None] * d


@dataclass
class PolynomialBump(_Radial):
    """``A (1 - |x - c|^2 / R^2)^m`` inside the ball, 0 outside."""

    m: int = 4

    def profile(self, s):
        inside = s < 1
        u = np.where(inside, 1 - s, 0.0)
        return u**self.m, np.where(inside, -self.m * u ** (self.m - 1), 0.0)

    def exact_integral(self) -> float:
        """``A pi^n R^2n m! / (m + n)!``."""
        n, m = self.n, self.m
        return self.amplitude * math.exp(
            n * math.log(math.pi) + 2 * n * math.log(self.radius) + gammaln(m + 1) - gammaln(m + n + 1)
        )


@dataclass
class SmoothBump(_Radial):
    """``A exp(1 - 1/(1 - |x - c|^2/R^2))`` inside the ball: smooth, equal to ``A`` at the center."""

    def profile(self, s):
        inside = s < 1 - 1e-12
        u = np.where(inside, 1 - s, 1.0)
        val = np.where(inside, np.exp(1 - 1 / u), 0.0)
        return val, np.where(inside, -val / u**2, 0.0)


@dataclass
class Rotator(CompactHamiltonian):
    """``A |x - c|^2 / 2`` on the ball of radius ``inner``, cut off smoothly to 0 at ``outer``.

    On the inner ball the flow is a rigid rotation of every ``(q_i, p_i)`` plane
    by angle ``-A t``.
    """

    center: np.ndarray
    inner: float
    outer: float
    amplitude: float = 1.0
    n: int = 1
    box: tuple = None
    autonomous: bool = True

    def __post_init__(self):
        self.center = np.asarray(self.center, dtype=float).reshape(2 * self.n)
        if not 0 < self.inner < self.outer:
            raise ValueError("need 0 < inner < outer")
        self.box = _box(self.box, self.n)

    def support(self):
        return self.center - self.outer, self.center + self.outer

    def _cut(self, r):
        w = self.outer - self.inner
        s, ds, _ = smooth_step((r - self.inner) / w)
        return 1 - s, -ds / w

    def value(self, t, X):
        d = np.atleast_2d(X) - self.center
        r = np.linalg.norm(d, axis=1)
        c, _ = self._cut(r)
        return self.amplitude * r**2 / 2 * c

    def grad(self, t, X):
        d = np.atleast_2d(X) - self.center
        r = np.linalg.norm(d, axis=1)
        c, dc = self._cut(r)
        # d/dx [r^2/2 c(r)] = x c + r^2/2 c'(r) x / r
        return self.amplitude * (c + r * dc / 2)[:, None] * d

    def angular_velocity(self) -> float:
        return -self.amplitude


TIME_PROFILES: dict[str, tuple[Callable[[float], float], float]] = {
    # name: (profile, integral over [0, 1])
    "constant": (lambda t: 1.0, 1.0),
    "linear": (lambda t: 2 * t, 1.0),
    "sine": (lambda t: 1 + 0.5 * math.sin(2 * math.pi * t), 1.0),
}


@dataclass
class TimeProfiled(CompactHamiltonian):
    """``rho(t) F(x)`` for a named time profile ``rho``."""

    base: CompactHamiltonian
    profile: str = "sine"

    def __post_init__(self):
        if self.profile not in TIME_PROFILES:
            raise ValueError(f"unknown time profile {self.profile!r}")
        self.n = self.base.n
        self.box = self.base.box
        self.autonomous = False

    def _rho(self, t):
        return TIME_PROFILES[self.profile][0](t)

    def value(self, t, X):
        return self._rho(t) * self.base.value(t, X)

    def grad(self, t, X):
        return self._rho(t) * self.base.grad(t, X)

    def support(self):
        return self.base.support()


@dataclass
class ScaledHamiltonian(CompactHamiltonian):
    base: CompactHamiltonian
    factor: float

    def __post_init__(self):
        self.n, self.box, self.autonomous = self.base.n, self.base.box, self.base.autonomous

    def value(self, t, X):
        return self.factor * self.base.value(t, X)

    def grad(self, t, X):
        return self.factor * self.base.grad(t, X)

    def support(self):
        return None if self.factor == 0 else self.base.support()


@dataclass
class ZeroHamiltonian(CompactHamiltonian):
    n: int = 1
    box: tuple = None

    def __post_init__(self):
        self.box = _box(self.box, self.n)
        self.autonomous = True

    def value(self, t, X):
        return np.zeros(np.atleast_2d(X).shape[0])

    def grad(self, t, X):
        return np.zeros_like(np.atleast_2d(X), dtype=float)

    def support(self):
        return None


@dataclass
class SumHamiltonian(CompactHamiltonian):
    parts: list

    def __post_init__(self):
        if not self.parts:
            raise ValueError("empty sum")
        self.n = self.parts[0].n
        self.box = self.parts[0].box
        self.autonomous = all(p.autonomous for p in self.parts)

    def value(self, t, X):
        return sum(p.value(t, X) for p in self.parts)

    def grad(self, t, X):
        return sum(p.grad(t, X) for p in self.parts)

    def support(self):
        return _merge_support([p.support() for p in self.parts])


@dataclass
class GridHamiltonian(CompactHamiltonian):
    """Samples on a regular grid of a box in R^2 (optionally several time slices), bicubic spline.

    ``samples`` has shape ``(nx, ny)`` or ``(nt, nx, ny)``; time slices are
    equally spaced on ``[0, 1]`` and interpolated linearly.
    """

    samples: np.ndarray
    box: tuple = None

    def __post_init__(self):
        self.n = 1
        self.box = _box(self.box, 1)
        S = np.asarray(self.samples, dtype=float)
        if S.ndim == 2:
            S = S[None]
        if S.ndim != 3 or S.shape[1] < 4 or S.shape[2] < 4:
            raise ValueError("grid samples need shape (nx, ny) or (nt, nx, ny) with at least 4 points per axis")
        self.samples = S
        lo, hi = self.box
        self.xs = np.linspace(lo[0], hi[0], S.shape[1])
        self.ys = np.linspace(lo[1], hi[1], S.shape[2])
        self.splines = [RectBivariateSpline(self.xs, self.ys, s, kx=3, ky=3) for s in S]
        self.autonomous = S.shape[0] == 1
        self.times = np.linspace(0, 1, S.shape[0]) if S.shape[0] > 1 else np.zeros(1)

    @classmethod
    def sample(cls, F: CompactHamiltonian, points: int = 65, times: int = 1) -> "GridHamiltonian":
        lo, hi = F.box
        xs = np.linspace(lo[0], hi[0], points)
        ys = np.linspace(lo[1], hi[1], points)
        X = np.stack(np.meshgrid(xs, ys, indexing="ij"), axis=-1).reshape(-1, 2)
        ts = np.linspace(0, 1, times) if times > 1 else [0.0]
        S = np.stack([F.value(t, X).reshape(points, points) for t in ts])
        return cls(S, (lo, hi))

    def _weights(self, t):
        if len(self.splines) == 1:
            return [(0, 1.0)]
        pos = np.clip(t, 0, 1) * (len(self.splines) - 1)
        k = min(int(pos), len(self.splines) - 2)
        w = pos - k
        return [(k, 1 - w), (k + 1, w)]

    def value(self, t, X):
        X = np.atleast_2d(X)
        return sum(w * self.splines[k].ev(X[:, 0], X[:, 1]) for k, w in self._weights(t))

    def grad(self, t, X):
        X = np.atleast_2d(X)
        gx = sum(w * self.splines[k].ev(X[:, 0], X[:, 1], dx=1) for k, w in self._weights(t))
        gy = sum(w * self.splines[k].ev(X[:, 0], X[:, 1], dy=1) for k, w in self._weights(t))
        return np.stack([gx, gy], axis=1)

    def support(self):
        nz = np.argwhere(np.any(self.samples != 0, axis=0))
        if nz.size == 0:
            return None
        # the spline can be nonzero up to two cells beyond a nonzero sample
        hx = self.xs[1] - self.xs[0]
        hy = self.ys[1] - self.ys[0]
        lo = np.array([self.xs[nz[:, 0].min()] - 2 * hx, self.ys[nz[:, 1].min()] - 2 * hy])
        hi = np.array([self.xs[nz[:, 0].max()] + 2 * hx, self.ys[nz[:, 1].max()] + 2 * hy])
        return lo, hi


# ----------------------------------------------------------------------
# flows


def _step(F: CompactHamiltonian, t: float, tau: float, X: np.ndarray) -> np.ndarray:
    J = standard_j(F.n)
    Y = X + tau * F.grad(t, X) @ J.T
    tm = t + tau / 2
    for _ in range(100):
        Y_new = X + tau * F.grad(tm, (X + Y) / 2) @ J.T
        delta = np.max(np.abs(Y_new - Y), initial=0.0)
        Y = Y_new
        if delta <= FIXED_POINT_TOL * (1 + np.max(np.abs(Y), initial=0.0)):
            return Y
    raise DivergenceError("implicit midpoint iteration diverged; use more steps")


def flow_between(F: CompactHamiltonian, t0: float, t1: float, points, steps: int = DEFAULT_STEPS) -> np.ndarray:
    """Carry ``points`` from time ``t0`` to ``t1`` (either direction); ``steps`` per unit time."""
    X = np.array(np.atleast_2d(points), dtype=float)
    span = t1 - t0
    if span == 0 or F.support() is None:
        return X
    k = max(1, int(math.ceil(abs(span) * steps - 1e-9)))
    tau = span / k
    for j in range(k):
        X = _step(F, t0 + j * tau, tau, X)
    return X


def flow(F: CompactHamiltonian, t: float, points, steps: int = DEFAULT_STEPS) -> np.ndarray:
    """Time-``t`` map of ``F`` applied to ``points`` (implicit midpoint, fixed step)."""
    if not 0 <= t <= 1:
        raise ValueError("flow time must lie in [0, 1]")
    return flow_between(F, 0.0, t, points, steps)


def _hessian(F: CompactHamiltonian, t: float, X: np.ndarray, h: float = 1e-5) -> np.ndarray:
    """Symmetrized central differences of ``grad``, shape ``(N, m, m)``."""
    m = X.shape[1]
    H = np.empty((X.shape[0], m, m))
    for j in range(m):
        e = np.zeros(m)
        e[j] = h
        H[:, :, j] = (F.grad(t, X + e) - F.grad(t, X - e)) / (2 * h)
    return (H + np.swapaxes(H, 1, 2)) / 2


def flow_between_with_jacobian(F: CompactHamiltonian, t0: float, t1: float, points, steps: int = DEFAULT_STEPS):
    """Points carried from ``t0`` to ``t1`` and the Jacobians of the discrete flow map.

    Each implicit midpoint step has Jacobian ``(I - tau A/2)^{-1} (I + tau A/2)``
    with ``A = J Hess F`` at the midpoint, a Cayley transform and hence exactly
    symplectic for any symmetric Hessian approximation.
    """
    X = np.array(np.atleast_2d(points), dtype=float)
    m = X.shape[1]
    D = np.broadcast_to(np.eye(m), (X.shape[0], m, m)).copy()
    span = t1 - t0
    if span == 0 or F.support() is None:
        return X, D
    J = standard_j(F.n)
    k = max(1, int(math.ceil(abs(span) * steps - 1e-9)))
    tau = span / k
    eye = np.eye(m)
    for j in range(k):
        t = t0 + j * tau
        Y = _step(F, t, tau, X)
        A = J @ _hessian(F, t + tau / 2, (X + Y) / 2)
        step = np.linalg.solve(eye - tau / 2 * A, eye + tau / 2 * A)
        D = step @ D
        X = Y
    return X, D


def flow_jacobian(F: CompactHamiltonian, t: float, points, steps: int = DEFAULT_STEPS):
    if not 0 <= t <= 1:
        raise ValueError("flow time must lie in [0, 1]")
    return flow_between_with_jacobian(F, 0.0, t, points, steps)


def flow_jacobian_det(F: CompactHamiltonian, t: float, points, steps: int = DEFAULT_STEPS) -> np.ndarray:
    return np.linalg.det(flow_jacobian(F, t, points, steps)[1])


# ----------------------------------------------------------------------
# composition, conjugation, orbit copies


@dataclass
class ComposedHamiltonian(CompactHamiltonian):
    """``(F # G)_t = F_t + G_t o (phi_F^t)^{-1}``, generating ``phi_F^t o phi_G^t``.

    Values need the backward flow of ``F``; gradients also carry its Jacobian.
    """

    F: CompactHamiltonian
    G: CompactHamiltonian
    steps: int = DEFAULT_STEPS

    def __post_init__(self):
        self.n, self.box = self.F.n, self.F.box
        self.autonomous = False

    def pullback_points(self, t, X):
        return flow_between(self.F, t, 0.0, X, self.steps)

    def value(self, t, X):
        X = np.atleast_2d(X)
        return self.F.value(t, X) + self.G.value(t, self.pullback_points(t, X))

    def grad(self, t, X):
        # chain rule through psi = (phi_F^t)^{-1}: grad (G o psi) = D psi^T grad G(psi)
        X = np.atleast_2d(X)
        Y, D = flow_between_with_jacobian(self.F, t, 0.0, X, self.steps)
        return self.F.grad(t, X) + np.einsum("nji,nj->ni", D, self.G.grad(t, Y))

    def support(self):
        # phi_F^t preserves supp F, so supp G o (phi_F^t)^{-1} = phi_F^t(supp G) lies in their union
        return _merge_support([self.F.support(), self.G.support()])

    def values_at_times(self, ts, X):
        if not self.F.autonomous:
            yield from super().values_at_times(ts, X)
            return
        # autonomous F: (phi^t)^{-1} = phi^{-t} advances incrementally along increasing t
        Y = np.array(X, dtype=float)
        current = 0.0
        for t in ts:
            Y = flow_between(self.F, 0.0, -(t - current), Y, self.steps)
            current = t
            yield self.F.value(t, X) + self.G.value(t, Y)


def compose_hamiltonians(F: CompactHamiltonian, G: CompactHamiltonian, steps: int = DEFAULT_STEPS) -> CompactHamiltonian:
    if G.support() is None:
        return F
    if F.support() is None:
        return G
    H = ComposedHamiltonian(F, G, steps)
    H.validate()
    return H


@dataclass(frozen=True)
class AffineSymplectic:
    """``x -> A x + b`` with ``A`` symplectic."""

    A: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        A = np.asarray(self.A, dtype=float)
        b = np.asarray(self.b, dtype=float).reshape(A.shape[0])
        if not is_symplectic(A, 1e-10):
            raise ValueError("affine map must have a symplectic linear part")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "b", b)

    @classmethod
    def translation(cls, b) -> "AffineSymplectic":
        b = np.asarray(b, dtype=float)
        return cls(np.eye(b.size), b)

    @classmethod
    def identity(cls, n: int = 1) -> "AffineSymplectic":
        return cls(np.eye(2 * n), np.zeros(2 * n))

    def __call__(self, X):
        return np.atleast_2d(X) @ self.A.T + self.b

    def inverse(self, X):
        return np.linalg.solve(self.A, (np.atleast_2d(X) - self.b).T).T

    @property
    def stretch(self) -> float:
        return float(np.linalg.norm(self.A, 2))


@dataclass
class ConjugatedHamiltonian(CompactHamiltonian):
    """``F o psi^{-1}``, generating ``psi o phi_F^t o psi^{-1}``."""

    base: CompactHamiltonian
    psi: AffineSymplectic
    box: tuple = None

    def __post_init__(self):
        self.n = self.base.n
        self.box = self.base.box if self.box is None else _box(self.box, self.n)
        self.autonomous = self.base.autonomous
        self._Ainv_T = np.linalg.inv(self.psi.A).T

    def value(self, t, X):
        return self.base.value(t, self.psi.inverse(X))

    def grad(self, t, X):
        return self.base.grad(t, self.psi.inverse(X)) @ self._Ainv_T.T

    def support(self):
        sup = self.base.support()
        if sup is None:
            return None
        corners = np.array(np.meshgrid(*zip(sup[0], sup[1]), indexing="ij")).reshape(2 * self.n, -1).T
        img = self.psi(corners)
        return img.min(axis=0), img.max(axis=0)


def conjugate_hamiltonian(F: CompactHamiltonian, psi: AffineSymplectic, box=None) -> CompactHamiltonian:
    H = ConjugatedHamiltonian(F, psi, box)
    H.validate()
    return H


@dataclass
class OrbitCopyConfig:
    k: int
    placements: list
    base_center: np.ndarray
    base_radius: float

    def __post_init__(self):
        if self.k < 1 or len(self.placements) != self.k:
            raise ValueError("need k >= 1 placement maps")
        self.base_center = np.asarray(self.base_center, dtype=float)
        centers = [g(self.base_center)[0] for g in self.placements]
        for i in range(self.k):
            for j in range(i):
                d = np.linalg.norm(centers[i] - centers[j])
                reach = self.base_radius * (self.placements[i].stretch + self.placements[j].stretch)
                if d <= reach:
                    raise ValueError(f"placements {j} and {i} give overlapping balls")

    @classmethod
    def translates(cls, k: int, offsets, base_center, base_radius) -> "OrbitCopyConfig":
        return cls(k, [AffineSymplectic.translation(o) for o in offsets], base_center, base_radius)


def orbit_copy(F: CompactHamiltonian, cfg: OrbitCopyConfig, box=None) -> CompactHamiltonian:
    """Sum of the conjugates of ``F`` by the placement maps, on ``box`` (default: the box of ``F``)."""
    copies = [conjugate_hamiltonian(F, g, box) for g in cfg.placements]
    return copies[0] if cfg.k == 1 else SumHamiltonian(copies)


# ----------------------------------------------------------------------
# Calabi invariant


@dataclass
class CalabiValue:
    value: float
    error: float
    coarse_value: float
    points: int
    time_steps: int

    def __str__(self):
        return f"{self.value:.12g} +- {self.error:.3g}"

    def to_dict(self) -> dict:
        return {
            "value": self.value,
            "error": self.error,
            "coarse_value": self.coarse_value,
            "points_per_axis": self.points,
            "time_steps": self.time_steps,
        }


def _simpson_weights(m: int) -> np.ndarray:
    w = np.ones(m + 1)
    w[1:-1:2] = 4
    w[2:-1:2] = 2
    return w / (3 * m)


def calabi(F: CompactHamiltonian, points: int = 128, time_steps: int = 64) -> CalabiValue:
    """``int_0^1 int F_t dx dt`` with a Richardson-style error estimate.

    Space: trapezoid rule with ``points`` intervals per axis over the support's
    bounding box (the integrand vanishes on its faces).  Time: Simpson with
    ``time_steps`` intervals (skipped for autonomous ``F``).  The error is the
    difference to the same rules on every other node, plus a rounding floor.
    """
    if points < 2 or points % 2 or time_steps < 2 or time_steps % 2:
        raise ValueError("points and time_steps must be even and at least 2")
    F.validate()
    sup = F.support()
    if sup is None:
        return CalabiValue(0.0, 0.0, 0.0, points, time_steps)
    lo, hi = sup
    m = 2 * F.n
    axes = [np.linspace(lo[i], hi[i], points + 1) for i in range(m)]
    mesh = np.meshgrid(*axes, indexing="ij")
    X = np.stack([g.ravel() for g in mesh], axis=1)
    h = (hi - lo) / points
    w1 = np.ones(points + 1)
    w1[[0, -1]] = 0.5
    fine_w = _outer([w1] * m) * np.prod(h)
    wc = np.zeros(points + 1)
    wc[::2] = 1.0
    wc[[0, -1]] = 0.5
    coarse_w = _outer([wc] * m) * np.prod(2 * h)

    ts = [0.0] if F.autonomous else list(np.linspace(0, 1, time_steps + 1))
    fine_s = np.empty(len(ts))
    coarse_s = np.empty(len(ts))
    scale = 0.0
    for j, vals in enumerate(F.values_at_times(ts, X)):
        fine_s[j] = vals @ fine_w
        coarse_s[j] = vals @ coarse_w
        scale = max(scale, np.abs(vals) @ fine_w)
    if F.autonomous:
        fine, coarse = fine_s[0], coarse_s[0]
        error = abs(fine - coarse)
    else:
        tw = _simpson_weights(time_steps)
        twc = _simpson_weights(time_steps // 2)
        fine = fine_s @ tw
        coarse = coarse_s[::2] @ twc
        # space and time refinements are estimated separately and added
        error = abs(coarse_s @ tw - fine) + abs(fine_s[::2] @ twc - fine)
    error += 1e-13 * scale * points**0.5
    return CalabiValue(float(fine), float(error), float(coarse), points, time_steps)


def _outer(ws):
    out = ws[0]
    for w in ws[1:]:
        out = np.multiply.outer(out, w)
    return out.ravel()


def sigma_displaceable(F: CompactHamiltonian, V: float, **kw) -> float:
    """``-Cal(F) / V``."""
    if not V > 0:
        raise ValueError("total volume must be positive")
    return -calabi(F, **kw).value / V


def monte_carlo_calabi(F: CompactHamiltonian, samples: int = 10_000_000, seed: int = 20240607, chunk: int = 1_000_000):
    """Independent oracle: uniform sampling over the support box (autonomous ``F`` only)."""
    if not F.autonomous:
        raise ValueError("the Monte-Carlo oracle handles time-independent Hamiltonians")
    lo, hi = F.support()
    rng = np.random.default_rng(seed)
    total = 0.0
    total_sq = 0.0
    done = 0
    while done < samples:
        k = min(chunk, samples - done)
        X = lo + (hi - lo) * rng.random((k, lo.size))
        v = F.value(0.0, X)
        total += v.sum()
        total_sq += (v**2).sum()
        done += k
    vol = float(np.prod(hi - lo))
    mean = total / samples
    std = math.sqrt(max(total_sq / samples - mean**2, 0.0))
    return vol * mean, vol * std / math.sqrt(samples)
