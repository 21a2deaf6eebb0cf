"""Dense complex linear algebra: subspaces, Cayley transforms, conjugations
and joint diagonalization of commuting unitaries.

Operators are plain ``numpy`` arrays of dtype ``complex128``.  The inner
product is linear in the first argument, ``(x, y) = y^H x``.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import List, Tuple

import numpy as np
import scipy.linalg as la

from .errors import NotCommuting, SingularResolvent, UnitModulusArgument

EPS_ORTHO = 1e-10
EPS_COMM = 1e-8
EPS_REC = 1e-8
EPS_PSD = 1e-8
EPS_RANK = 1e-12
EPS_CIRCLE = 1e-12
EPS_CLUSTER = 1e-8
KAPPA_MAX = 1e12

#: Token for the point at infinity; accepted wherever a resolvent variable is.
INF = math.inf

TWO_PI = 2.0 * math.pi


def is_infinite(z) -> bool:
    return cmath.isinf(complex(z))


def mirror(z):
    """Reflection ``z -> 1/conj(z)`` in the unit circle, with ``0 <-> INF``."""
    if is_infinite(z):
        return 0j
    z = complex(z)
    if z == 0:
        return INF
    return 1.0 / z.conjugate()


def as_matrix(a) -> np.ndarray:
    m = np.asarray(a, dtype=complex)
    if m.ndim == 1:
        m = m[:, None]
    if m.ndim != 2:
        raise ValueError(f"expected a 2-d array, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix has non-finite entries")
    return m


def dagger(a: np.ndarray) -> np.ndarray:
    return np.swapaxes(a, -1, -2).conj()


def hermitian_part(a: np.ndarray) -> np.ndarray:
    return 0.5 * (a + dagger(a))


def unitarity_residual(u: np.ndarray) -> float:
    n = u.shape[0]
    eye = np.eye(n)
    return max(np.linalg.norm(dagger(u) @ u - eye, 2), np.linalg.norm(u @ dagger(u) - eye, 2))


def is_unitary(u, tol: float = EPS_ORTHO) -> bool:
    u = np.asarray(u, dtype=complex)
    return u.ndim == 2 and u.shape[0] == u.shape[1] and unitarity_residual(u) <= tol


def as_unitary(u, tol: float = EPS_ORTHO) -> np.ndarray:
    u = as_matrix(u)
    if u.shape[0] != u.shape[1]:
        raise ValueError(f"unitary must be square, got {u.shape}")
    res = unitarity_residual(u)
    if res > tol:
        raise ValueError(f"matrix is not unitary (residual {res:.3e})")
    return u


def isometry_residual(e: np.ndarray) -> float:
    return float(np.linalg.norm(dagger(e) @ e - np.eye(e.shape[1]), 2)) if e.shape[1] else 0.0


def psd_sqrt(a: np.ndarray, tol: float = EPS_PSD) -> np.ndarray:
    """Square root of a Hermitian PSD matrix; eigenvalues above ``-tol`` are clamped to 0."""
    w, q = np.linalg.eigh(hermitian_part(a))
    if w.size and w.min() < -tol:
        raise ValueError(f"matrix is not positive semidefinite (min eigenvalue {w.min():.3e})")
    w = np.clip(w, 0.0, None)
    return (q * np.sqrt(w)) @ dagger(q)


def normalize_angle(theta: float) -> float:
    """Map an angle into ``(0, 2pi]``; angle 0 is reported as ``2pi``."""
    t = math.fmod(theta, TWO_PI)
    if t <= 0.0:
        t += TWO_PI
    return t


# --------------------------------------------------------------------------
# Subspaces
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class Subspace:
    """A subspace of ``C^n`` given by an orthonormal basis (columns)."""

    basis: np.ndarray

    def __post_init__(self):
        b = np.asarray(self.basis, dtype=complex)
        if b.ndim != 2:
            raise ValueError("basis must be 2-d (ambient_dim x rank)")
        if b.shape[1] > b.shape[0]:
            raise ValueError("rank exceeds ambient dimension")
        if b.shape[1] and np.linalg.norm(dagger(b) @ b - np.eye(b.shape[1]), 2) > EPS_ORTHO:
            raise ValueError("basis is not orthonormal")
        object.__setattr__(self, "basis", b)

    @classmethod
    def zero(cls, ambient_dim: int) -> "Subspace":
        return cls(np.zeros((ambient_dim, 0), dtype=complex))

    @classmethod
    def full(cls, ambient_dim: int) -> "Subspace":
        return cls(np.eye(ambient_dim, dtype=complex))

    @property
    def ambient_dim(self) -> int:
        return self.basis.shape[0]

    @property
    def rank(self) -> int:
        return self.basis.shape[1]

    def projector(self) -> np.ndarray:
        return self.basis @ dagger(self.basis)

    def contains(self, vectors, tol: float = EPS_ORTHO) -> bool:
        v = as_matrix(vectors)
        return bool(np.linalg.norm(v - self.projector() @ v) <= tol * max(1.0, np.linalg.norm(v)))


def _fix_phases(b: np.ndarray) -> np.ndarray:
    # largest-modulus entry of each column made real positive; cosmetic only
    if b.shape[1] == 0:
        return b
    idx = np.argmax(np.abs(b), axis=0)
    piv = b[idx, np.arange(b.shape[1])]
    return b * (np.abs(piv) / piv)[None, :]


def orthonormalize(vectors, tol: float = EPS_RANK) -> Subspace:
    """Orthonormal basis of the column span, with numerical rank at threshold ``tol``."""
    v = np.asarray(vectors, dtype=complex)
    if v.ndim == 1:
        v = v[:, None]
    n = v.shape[0]
    if n < 1:
        raise ValueError("ambient dimension must be >= 1")
    if v.shape[1] == 0:
        return Subspace.zero(n)
    u, s, _ = np.linalg.svd(v, full_matrices=False)
    rank = int(np.sum(s > tol * max(1.0, s[0]))) if s.size else 0
    return Subspace(_fix_phases(u[:, :rank]))


def complement(sub: Subspace) -> Subspace:
    """Orthogonal complement within the ambient space."""
    n, r = sub.basis.shape
    if r == 0:
        return Subspace.full(n)
    u, _, _ = np.linalg.svd(sub.basis, full_matrices=True)
    return Subspace(_fix_phases(u[:, r:]))


def intersect(a: Subspace, b: Subspace, tol: float = 1e-9) -> Subspace:
    n = a.ambient_dim
    if a.rank == 0 or b.rank == 0:
        return Subspace.zero(n)
    eye = np.eye(n)
    stacked = np.vstack([eye - a.projector(), eye - b.projector()])
    null = la.null_space(stacked, rcond=tol)
    return orthonormalize(null)


# --------------------------------------------------------------------------
# Cayley-type transform U(z) = (I + zU)(I - zU)^{-1}
# --------------------------------------------------------------------------


def check_off_circle(z, tol: float = EPS_CIRCLE) -> None:
    if not is_infinite(z) and abs(abs(complex(z)) - 1.0) <= tol:
        raise UnitModulusArgument(f"|z| = 1 is not allowed (z = {z})")


def unitary_resolvent(u: np.ndarray, z) -> np.ndarray:
    """``(I - zU)^{-1}`` for a unitary ``U``; the value at infinity is 0."""
    check_off_circle(z)
    n = u.shape[0]
    if is_infinite(z):
        return np.zeros((n, n), dtype=complex)
    z = complex(z)
    a = np.eye(n) - z * u
    # for unitary U: cond(I - zU) <= (1 + |z|) / |1 - |z||
    bound = (1 + abs(z)) / abs(1 - abs(z))
    if bound > KAPPA_MAX and np.linalg.cond(a) > KAPPA_MAX:
        raise SingularResolvent(f"I - zU is singular at z = {z}")
    return np.linalg.solve(a, np.eye(n))


def cayley_transform(u, z) -> np.ndarray:
    """``U(z) = (I + zU)(I - zU)^{-1} = -I + 2(I - zU)^{-1}``; ``U(INF) = -I``."""
    u = np.asarray(u, dtype=complex)
    n = u.shape[0]
    if is_infinite(z):
        return -np.eye(n, dtype=complex)
    return -np.eye(n) + 2.0 * unitary_resolvent(u, z)


def cayley_batch(u: np.ndarray, zs) -> np.ndarray:
    """Stack of ``U(z)`` for each ``z`` in ``zs`` (shape ``len(zs) x n x n``)."""
    n = u.shape[0]
    out = np.empty((len(zs), n, n), dtype=complex)
    finite = []
    for i, z in enumerate(zs):
        check_off_circle(z)
        if is_infinite(z):
            out[i] = -np.eye(n)
        else:
            finite.append(i)
    if finite:
        zf = np.array([complex(zs[i]) for i in finite])
        bound = (1 + np.abs(zf)) / np.abs(1 - np.abs(zf))
        if np.any(bound > KAPPA_MAX):
            bad = zf[bound > KAPPA_MAX][0]
            raise SingularResolvent(f"I - zU is singular at z = {bad}")
        eye = np.eye(n)
        a = eye[None] - zf[:, None, None] * u[None]
        out[finite] = -eye + 2.0 * np.linalg.solve(a, np.broadcast_to(eye, a.shape))
    return out


# --------------------------------------------------------------------------
# Conjugations (antilinear involutions x -> M conj(x))
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class Conjugation:
    """Antilinear map ``x -> M conj(x)`` with ``M`` symmetric and unitary."""

    matrix: np.ndarray

    def __post_init__(self):
        m = as_matrix(self.matrix)
        if m.shape[0] != m.shape[1]:
            raise ValueError("conjugation matrix must be square")
        object.__setattr__(self, "matrix", m)

    @classmethod
    def standard(cls, n: int) -> "Conjugation":
        return cls(np.eye(n, dtype=complex))

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def __call__(self, x) -> np.ndarray:
        return self.matrix @ np.conj(np.asarray(x, dtype=complex))

    def symmetry_residual(self) -> float:
        return float(np.linalg.norm(self.matrix - self.matrix.T, 2))

    def unitarity_residual(self) -> float:
        return unitarity_residual(self.matrix)

    def involution_residual(self) -> float:
        # J(J(x)) = M conj(M) x
        return float(np.linalg.norm(self.matrix @ self.matrix.conj() - np.eye(self.dim), 2))

    def is_valid(self, tol: float = EPS_ORTHO) -> bool:
        return self.symmetry_residual() <= tol and self.unitarity_residual() <= tol


def compose_antilinear(a: Conjugation, b: Conjugation) -> np.ndarray:
    """Matrix of the linear map ``x -> a(b(x))``."""
    return a.matrix @ b.matrix.conj()


# --------------------------------------------------------------------------
# Joint eigendecomposition of commuting unitaries
# --------------------------------------------------------------------------


def _normal_eig(a: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    t, z = la.schur(a, output="complex")
    return np.diag(t).copy(), z


def _cluster_angles(angles: np.ndarray, gap: float) -> List[np.ndarray]:
    """Group indices of angles (in (0, 2pi]) that are within ``gap`` circularly."""
    order = np.argsort(angles)
    clusters: List[List[int]] = []
    for i in order:
        if clusters and angles[i] - angles[clusters[-1][-1]] < gap:
            clusters[-1].append(i)
        else:
            clusters.append([i])
    if len(clusters) > 1:
        first, last = clusters[0], clusters[-1]
        if angles[first[0]] + TWO_PI - angles[last[-1]] < gap:
            clusters[0] = last + first
            clusters.pop()
    return [np.array(c) for c in clusters]


def _cluster_angle(angles: np.ndarray) -> float:
    mean = np.angle(np.mean(np.exp(1j * angles)))
    t = normalize_angle(float(mean))
    if TWO_PI - t < EPS_CLUSTER or t < EPS_CLUSTER:
        t = TWO_PI
    return t


def joint_eigendecomposition(u1, u2, tol_comm: float = EPS_COMM,
                             cluster_gap: float = EPS_CLUSTER):
    """Joint spectral decomposition of two commuting unitaries.

    Returns a list of ``(theta1, theta2, projector)`` with angles in
    ``(0, 2pi]``.  ``U1`` is diagonalized first; each of its eigenspaces is
    then split by the compression of ``U2``.
    """
    u1 = np.asarray(u1, dtype=complex)
    u2 = np.asarray(u2, dtype=complex)
    scale = np.linalg.norm(u1, 2) * np.linalg.norm(u2, 2)
    comm = np.linalg.norm(u1 @ u2 - u2 @ u1, 2)
    if comm > tol_comm * scale:
        raise NotCommuting(f"||U1 U2 - U2 U1|| = {comm:.3e}")
    ev1, z1 = _normal_eig(u1)
    ang1 = np.array([normalize_angle(a) for a in np.angle(ev1)])
    atoms = []
    for c1 in _cluster_angles(ang1, cluster_gap):
        q = z1[:, c1]
        q = la.qr(q, mode="economic")[0]
        t1 = _cluster_angle(ang1[c1])
        b = dagger(q) @ u2 @ q
        ev2, z2 = _normal_eig(b)
        ang2 = np.array([normalize_angle(a) for a in np.angle(ev2)])
        for c2 in _cluster_angles(ang2, cluster_gap):
            w = q @ z2[:, c2]
            atoms.append((t1, _cluster_angle(ang2[c2]), w @ dagger(w)))
    atoms.sort(key=lambda a: (a[0], a[1]))
    return atoms
