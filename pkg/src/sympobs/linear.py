"""Linear symplectic maps: checks, eigenvalue classification, invariant splittings,
rational-angle perturbation of elliptic matrices and identity orders.

Conventions: coordinates are ordered ``(x_1..x_n, y_1..y_n)``, the standard
form is ``omega(u, v) = u^T J v`` with ``J = [[0, I], [-I, 0]]`` and matrix
norms written ``||.||_inf`` are the largest absolute entry.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np
import scipy.linalg as sla

SYMPLECTIC_TOL = 1e-10
MODULUS_TOL = 1e-8
SEP_TOL = 1e-6
GAP = 1e-3


class NotEllipticError(ValueError):
    """The matrix does not have simple, non-real, unit-modulus eigenvalues."""


class SplittingError(ValueError):
    """Some eigenvalue modulus is too close to the gap boundary to classify."""


def standard_j(n: int) -> np.ndarray:
    eye = np.eye(n)
    zero = np.zeros((n, n))
    return np.block([[zero, eye], [-eye, zero]])


def omega(u, v) -> float:
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    if u.shape != v.shape or u.ndim != 1 or u.size % 2:
        raise ValueError("omega needs two vectors of the same even length")
    return float(u @ standard_j(u.size // 2) @ v)


def _half_dim(M: np.ndarray) -> int:
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {M.shape}")
    if M.shape[0] % 2:
        raise ValueError(f"symplectic matrices have even size, got {M.shape[0]}")
    return M.shape[0] // 2


def symplectic_defect(M) -> float:
    M = np.asarray(M, dtype=float)
    J = standard_j(_half_dim(M))
    return float(np.max(np.abs(M.T @ J @ M - J))) if M.size else 0.0


def is_symplectic(M, tol: float = SYMPLECTIC_TOL) -> bool:
    return symplectic_defect(M) <= tol


@dataclass(frozen=True)
class SymplecticMatrix:
    entries: np.ndarray
    symplectic_tol: float = SYMPLECTIC_TOL

    def __post_init__(self):
        M = np.array(self.entries, dtype=float)
        M.setflags(write=False)
        object.__setattr__(self, "entries", M)
        defect = symplectic_defect(M)
        if defect > self.symplectic_tol:
            raise ValueError(f"matrix is not symplectic: defect {defect:.3g} > {self.symplectic_tol:.3g}")

    @property
    def n(self) -> int:
        return self.entries.shape[0] // 2


def _as_matrix(M) -> np.ndarray:
    return M.entries if isinstance(M, SymplecticMatrix) else np.asarray(M, dtype=float)


# ----------------------------------------------------------------------
# classification


@dataclass
class EigenClassification:
    eigenvalues: np.ndarray
    labels: list[str]
    multiplicities: list[tuple[complex, int]]
    elliptic: bool
    simple: bool

    def to_dict(self) -> dict:
        return {
            "eigenvalues": [_fmt(z) for z in self.eigenvalues],
            "labels": list(self.labels),
            "multiplicities": [[_fmt(z), m] for z, m in self.multiplicities],
            "elliptic": self.elliptic,
            "simple": self.simple,
        }


def _fmt(z: complex) -> str:
    z = complex(z)
    return f"{z.real:.10f}{z.imag:+.10f}i"


def classify(
    M,
    modulus_tol: float = MODULUS_TOL,
    sep_tol: float = SEP_TOL,
    gap: float = GAP,
) -> EigenClassification:
    A = _as_matrix(M)
    _half_dim(A)
    try:
        w = np.linalg.eigvals(A)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - LAPACK failure
        raise ValueError(f"eigenvalue computation failed: {exc}") from exc
    order = np.lexsort((w.imag, w.real))
    w = w[order]
    labels = []
    for z in w:
        r = abs(z)
        if abs(r - 1) <= modulus_tol:
            labels.append("unit-circle")
        elif r > 1 + gap:
            labels.append("expanding")
        elif r < 1 - gap:
            labels.append("contracting")
        else:
            labels.append("near-unit")
    groups: list[list[complex]] = []
    for z in w:
        for g in groups:
            if abs(g[0] - z) <= sep_tol:
                g.append(z)
                break
        else:
            groups.append([z])
    mult = [(complex(np.mean(g)), len(g)) for g in groups]
    simple = all(m == 1 for _, m in mult)
    elliptic = (
        len(w) > 0
        and simple
        and all(lab == "unit-circle" for lab in labels)
        and all(abs(z.imag) > sep_tol for z in w)
    )
    return EigenClassification(w, labels, mult, elliptic, simple)


# ----------------------------------------------------------------------
# invariant splittings


@dataclass
class InvariantSplitting:
    unstable: np.ndarray  # columns form an orthonormal basis
    center: np.ndarray
    stable: np.ndarray
    gap: float

    @property
    def ranks(self) -> tuple[int, int, int]:
        return self.unstable.shape[1], self.center.shape[1], self.stable.shape[1]


def _invariant_subspace(A: np.ndarray, select) -> np.ndarray:
    _, Z, sdim = sla.schur(A, output="real", sort=lambda re, im: select(abs(complex(re, im))))
    return Z[:, :sdim]


def invariance_defect(A, basis: np.ndarray) -> float:
    """Largest entry of the component of ``A @ basis`` orthogonal to ``span(basis)``."""
    A = _as_matrix(A)
    if basis.shape[1] == 0:
        return 0.0
    Q, _ = np.linalg.qr(basis)
    image = A @ Q
    return float(np.max(np.abs(image - Q @ (Q.T @ image))))


def invariant_splitting(
    M, gap: float = GAP, modulus_tol: float = MODULUS_TOL, invariance_tol: float = 1e-8
) -> InvariantSplitting:
    """Spectral splitting ``E^u + E^c + E^s`` by eigenvalue modulus.

    Uses ordered real Schur forms, so generalized eigenspaces (defective
    blocks) are handled.
    """
    A = _as_matrix(M)
    _half_dim(A)
    moduli = np.abs(np.linalg.eigvals(A))
    ambiguous = [r for r in moduli if 1 - gap <= r <= 1 + gap and abs(r - 1) > modulus_tol]
    if ambiguous:
        raise SplittingError(
            f"eigenvalue modulus {ambiguous[0]:.12g} lies inside the gap (1 - {gap}, 1 + {gap})"
        )
    Eu = _invariant_subspace(A, lambda r: r > 1 + gap)
    Es = _invariant_subspace(A, lambda r: r < 1 - gap)
    Ec = _invariant_subspace(A, lambda r: 1 - gap <= r <= 1 + gap)
    if Eu.shape[1] != Es.shape[1]:
        raise SplittingError(f"rank(E^u) = {Eu.shape[1]} differs from rank(E^s) = {Es.shape[1]}")
    scale = max(1.0, float(np.max(np.abs(A))))
    for name, E in (("E^u", Eu), ("E^c", Ec), ("E^s", Es)):
        d = invariance_defect(A, E)
        if d > invariance_tol * scale:
            raise SplittingError(f"{name} is not invariant: defect {d:.3g}")
    return InvariantSplitting(Eu, Ec, Es, gap)


def isotropy_defect(basis, n: int | None = None) -> float:
    """``max |omega(u_i, u_j)|`` over pairs of basis vectors (given as columns or a list)."""
    B = np.asarray(basis, dtype=float)
    if B.ndim == 1:
        B = B[:, None]
    elif isinstance(basis, (list, tuple)):
        B = B.T
    if B.shape[1] == 0:
        raise ValueError("isotropy_defect needs a nonempty basis")
    if n is not None and B.shape[0] != 2 * n:
        raise ValueError(f"basis vectors have length {B.shape[0]}, expected {2 * n}")
    if B.shape[0] % 2:
        raise ValueError("basis vectors must have even length")
    G = B.T @ standard_j(B.shape[0] // 2) @ B
    return float(np.max(np.abs(G)))


# ----------------------------------------------------------------------
# rational angles


@dataclass(frozen=True)
class RationalAngle:
    """The angle ``2 pi p / q``."""

    p: int
    q: int

    def __post_init__(self):
        if self.q <= 0:
            raise ValueError("denominator must be positive")
        if math.gcd(abs(self.p), self.q) != 1:
            raise ValueError(f"{self.p}/{self.q} is not reduced")

    @property
    def fraction(self) -> Fraction:
        return Fraction(self.p, self.q)

    @property
    def radians(self) -> float:
        return 2 * math.pi * self.p / self.q

    def __str__(self):
        return f"{self.p}/{self.q}"


def _simplest_between(lo: Fraction, hi: Fraction) -> Fraction:
    """Fraction with the least denominator in ``[lo, hi]`` (Stern-Brocot descent)."""
    fl = math.floor(lo)
    if fl == lo:
        return Fraction(fl)
    if fl + 1 <= hi:
        return Fraction(fl + 1)
    return fl + 1 / _simplest_between(1 / (hi - fl), 1 / (lo - fl))


def rational_angle_approx(theta: float, eps: float) -> RationalAngle:
    """``p/q`` with ``|theta/2pi - p/q| <= eps`` and ``q`` minimal.

    Among fractions with that denominator the one closest to ``theta/2pi``
    wins (ties go to the smaller ``p``).  ``eps`` is widened by a few ulps so
    angles that are exactly rational in floating point are recognized.
    """
    if not eps > 0:
        raise ValueError("eps must be positive")
    x = theta / (2 * math.pi)
    slack = 4 * math.ulp(max(abs(x), 1.0))
    xf = Fraction(x)
    width = Fraction(eps) + Fraction(slack)
    lo, hi = xf - width, xf + width
    q = _simplest_between(lo, hi).denominator
    p = round(xf * q)
    p = min(max(p, math.ceil(lo * q)), math.floor(hi * q))
    f = Fraction(p, q)
    return RationalAngle(f.numerator, f.denominator)


def identity_order(angles: Sequence[RationalAngle]) -> int:
    if not angles:
        raise ValueError("identity_order needs at least one angle")
    return math.lcm(*(a.q for a in angles))


# ----------------------------------------------------------------------
# elliptic normal form and perturbation


def rotation(theta: float) -> np.ndarray:
    c, s = math.cos(theta), math.sin(theta)
    return np.array([[c, -s], [s, c]])


def block_rotation(thetas: Sequence[float]) -> np.ndarray:
    """``R(theta_1) + ... + R(theta_n)`` in ``(x, y)`` ordering."""
    n = len(thetas)
    R = np.zeros((2 * n, 2 * n))
    for k, th in enumerate(thetas):
        c, s = math.cos(th), math.sin(th)
        R[k, k], R[k, n + k] = c, -s
        R[n + k, k], R[n + k, n + k] = s, c
    return R


def symplectic_inverse(P: np.ndarray) -> np.ndarray:
    J = standard_j(P.shape[0] // 2)
    return -J @ P.T @ J


@dataclass
class EllipticNormalForm:
    P: np.ndarray  # symplectic, columns (u_1..u_n, v_1..v_n)
    angles: np.ndarray  # block angles in radians, P^{-1} M P = block_rotation(angles)
    residual: float


def elliptic_normal_form(M, sep_tol: float = SEP_TOL) -> EllipticNormalForm:
    """Symplectic ``P`` with ``P^{-1} M P`` a direct sum of rotations.

    Each complex eigenvector ``u + i v`` for an eigenvalue in the upper half
    plane spans an invariant symplectic plane; ``v`` is flipped when
    ``omega(u, v) < 0`` and the pair is scaled to ``omega(u, v) = 1``.  The
    planes are then made exactly omega-orthogonal by symplectic Gram-Schmidt.
    """
    A = _as_matrix(M)
    n = _half_dim(A)
    cls = classify(A, sep_tol=sep_tol)
    if not cls.elliptic:
        raise NotEllipticError("matrix is not elliptic: " + ", ".join(cls.labels))
    w, V = np.linalg.eig(A)
    upper = sorted((k for k in range(2 * n) if w[k].imag > 0), key=lambda k: np.angle(w[k]))
    if len(upper) != n:
        raise NotEllipticError("eigenvalues do not come in n conjugate pairs")
    J = standard_j(n)
    us, vs = [], []
    for k in upper:
        z = V[:, k]
        u, v = z.real.copy(), z.imag.copy()
        # symplectic Gram-Schmidt against earlier planes
        for up, vp in zip(us, vs):
            u = u - (up @ J @ u) * vp + (vp @ J @ u) * up
            v = v - (up @ J @ v) * vp + (vp @ J @ v) * up
        s = u @ J @ v
        if abs(s) < sep_tol:
            raise NotEllipticError("degenerate eigenplane (omega(u, v) vanishes)")
        if s < 0:
            v = -v
            s = -s
        r = math.sqrt(s)
        us.append(u / r)
        vs.append(v / r)
    P = np.column_stack(us + vs)
    B = symplectic_inverse(P) @ A @ P
    angles = np.array([math.atan2(B[n + k, k], B[k, k]) for k in range(n)])
    residual = float(np.max(np.abs(B - block_rotation(angles))))
    return EllipticNormalForm(P, angles, residual)


@dataclass
class Perturbation:
    T: np.ndarray
    angles: list[RationalAngle]
    P: np.ndarray
    original_angles: np.ndarray
    eps_used: list[float] = field(default_factory=list)

    @property
    def order(self) -> int:
        return identity_order(self.angles)

    @property
    def condition(self) -> float:
        return float(np.linalg.cond(self.P))

    def to_dict(self) -> dict:
        return {
            "matrix": self.T.tolist(),
            "angles": [str(a) for a in self.angles],
            "original_angles": [float(t) for t in self.original_angles],
            "order": self.order,
            "condition_number": self.condition,
        }


def _collides(f: Fraction, chosen: list[Fraction]) -> bool:
    # eigenvalues e^{+-2 pi i f} must be non-real and distinct from earlier pairs
    twice = (2 * f) % 1
    if twice == 0:
        return True
    return any((f - g) % 1 == 0 or (f + g) % 1 == 0 for g in chosen)


def perturb_to_rational_angles(M, eps: float, sep_tol: float = SEP_TOL, max_halvings: int = 60) -> Perturbation:
    """Nearby symplectic matrix of finite order whose rotation angles are rational.

    ``T = P (R(2 pi p_1/q_1) + ...) P^{-1}`` with ``P`` from the elliptic
    normal form.  A block whose approximation would make eigenvalues real
    or repeated is re-approximated with ``eps/2`` until it is not.
    """
    nf = elliptic_normal_form(M, sep_tol)
    chosen: list[Fraction] = []
    angles: list[RationalAngle] = []
    used: list[float] = []
    for theta in nf.angles:
        e = eps
        for _ in range(max_halvings):
            a = rational_angle_approx(float(theta), e)
            if not _collides(a.fraction, chosen):
                break
            e /= 2
        else:
            raise NotEllipticError("could not keep the rational angles distinct")
        chosen.append(a.fraction)
        angles.append(a)
        used.append(e)
    R = block_rotation([a.radians for a in angles])
    T = nf.P @ R @ symplectic_inverse(nf.P)
    return Perturbation(T, angles, nf.P, nf.angles, used)


# ----------------------------------------------------------------------
# construction helpers and matrix files


def hamiltonian_exp(S) -> np.ndarray:
    """``exp(J S)`` for symmetric ``S``: a symplectic matrix."""
    S = np.asarray(S, dtype=float)
    S = (S + S.T) / 2
    return sla.expm(standard_j(S.shape[0] // 2) @ S)


def random_symplectic(n: int, rng: np.random.Generator, scale: float = 0.5) -> np.ndarray:
    S = rng.normal(scale=scale, size=(2 * n, 2 * n))
    return hamiltonian_exp(S + S.T)


def random_elliptic(n: int, rng: np.random.Generator, scale: float = 0.3, min_sep: float = 0.05) -> np.ndarray:
    """``Q (R(theta_1) + ...) Q^{-1}`` with well separated angles and random symplectic ``Q``."""
    while True:
        thetas = rng.uniform(min_sep, math.pi - min_sep, size=n) * rng.choice([-1, 1], size=n)
        mags = np.sort(np.abs(thetas))
        if n == 1 or np.min(np.diff(mags)) > min_sep:
            break
    Q = random_symplectic(n, rng, scale)
    return Q @ block_rotation(thetas) @ symplectic_inverse(Q)


def parse_matrix(text: str, source: str = "<matrix>") -> np.ndarray:
    """Leading dimension line, then that many rows of whitespace-separated numbers."""
    lines = [(k, ln.split("#", 1)[0].strip()) for k, ln in enumerate(text.splitlines(), start=1)]
    lines = [(k, ln) for k, ln in lines if ln]
    if not lines:
        raise ValueError(f"{source}: empty matrix file")
    k0, first = lines[0]
    try:
        d = int(first)
    except ValueError:
        raise ValueError(f"{source}:{k0}: first line must be the dimension, got {first!r}") from None
    if d <= 0:
        raise ValueError(f"{source}:{k0}: dimension must be positive")
    rows = lines[1:]
    if len(rows) != d:
        raise ValueError(f"{source}: expected {d} rows, found {len(rows)}")
    out = np.zeros((d, d))
    for i, (k, ln) in enumerate(rows):
        parts = ln.split()
        if len(parts) != d:
            raise ValueError(f"{source}:{k}: expected {d} entries, found {len(parts)}")
        for j, tok in enumerate(parts):
            try:
                out[i, j] = float(tok)
            except ValueError:
                col = ln.index(tok) + 1
                raise ValueError(f"{source}:{k}:{col}: not a number: {tok!r}") from None
    return out


def format_matrix(M: np.ndarray) -> str:
    rows = [" ".join(f"{x:.17g}" for x in row) for row in np.asarray(M)]
    return "\n".join([str(len(rows))] + rows) + "\n"
