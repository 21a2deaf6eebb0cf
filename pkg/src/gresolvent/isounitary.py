"""Pairs of an isometric operator ``V`` and a commuting unitary ``U``.

Covers the parameter class ``S_{V,U}`` (Schur parameters whose extensions
``V + Phi_z`` commute with ``U``), the resolvent builder for such pairs, the
factorization of a unitary into two conjugations, and the correspondence
between ``S_{V,U}`` and the commutant of ``U`` on ``H - D(V)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np
import scipy.linalg as la

from .errors import CommutantViolation, CommutativityViolated, FrameMismatch, NotInClass
from .linalg import (
    EPS_ORTHO,
    INF,
    Conjugation,
    Subspace,
    as_unitary,
    cayley_batch,
    dagger,
    intersect,
    is_infinite,
    orthonormalize,
)
from .pair import PairSampler
from .single import PartialIsometry, SchurParameter, chumakin_sampler, disk_grid

EPS_SVU = 1e-9


@dataclass(frozen=True)
class IsoUnitaryPair:
    """``V`` isometric and ``U`` unitary with ``VUh = UVh`` whenever both sides make sense."""

    v: PartialIsometry
    u: np.ndarray

    def __post_init__(self):
        u = as_unitary(self.u)
        if u.shape[0] != self.v.dim:
            raise ValueError("U and V act on different spaces")
        object.__setattr__(self, "u", u)
        res = self.commutation_residual()
        if res > EPS_ORTHO:
            raise CommutativityViolated(f"VU != UV on U^-1 D(V) & D(V) (residual {res:.3e})")

    @property
    def dim(self) -> int:
        return self.v.dim

    def commutation_residual(self) -> float:
        dv = self.v.domain
        if dv.rank == 0:
            return 0.0
        common = intersect(orthonormalize(dagger(self.u) @ dv.basis), dv)
        if common.rank == 0:
            return 0.0
        h = common.basis
        m = self.v.matrix()
        return float(np.linalg.norm(m @ (self.u @ h) - self.u @ (m @ h), 2))

    def invariant_domain_residual(self) -> float:
        """``||(I - P_D) U P_D||``: zero iff ``U D(V) = D(V)``."""
        p = self.v.domain.projector()
        return float(np.linalg.norm((np.eye(self.dim) - p) @ self.u @ p, 2))

    def unitary_as_isometry(self) -> PartialIsometry:
        return PartialIsometry(Subspace.full(self.dim), self.u)


def _class_grid(grid) -> np.ndarray:
    g = disk_grid() if grid is None else np.asarray(grid)
    return np.concatenate([[0.0], g])


def check_class_SVU(pair: IsoUnitaryPair, phi: SchurParameter, grid=None) -> float:
    """Max ``||(V + Phi_z) U - U (V + Phi_z)||`` over disk sample points."""
    u, vm = pair.u, pair.v.matrix()
    worst = 0.0
    for z in _class_grid(grid):
        a = vm + phi.operator(z)
        worst = max(worst, float(np.linalg.norm(a @ u - u @ a, 2)))
    return worst


def in_class_SVU(pair: IsoUnitaryPair, phi: SchurParameter, tol: float = EPS_SVU,
                 grid=None) -> bool:
    return phi.is_contractive() and check_class_SVU(pair, phi, grid) <= tol


def thm41_w(pair: IsoUnitaryPair, phi: SchurParameter, z1) -> np.ndarray:
    """``-I + 2 R_{z1}(V)`` for the single-operator resolvent given by ``phi``."""
    r = chumakin_sampler(pair.v, phi)(z1)
    return -np.eye(pair.dim) + 2.0 * r


def thm41_sampler(pair: IsoUnitaryPair, phi: SchurParameter, check: bool = True,
                  tol: float = EPS_SVU) -> PairSampler:
    """Pair resolvent ``W(z1) U(z2)`` built from a member of ``S_{V,U}``.

    Inside the disk in ``z1`` this is the defining product; outside, the
    adjoint mirror ``(W(1/conj z1) U(1/conj z2))^H`` equals ``U(z2) W(z1)``,
    which also covers ``z2 = 0`` and ``z1 = INF`` (``W(INF) = -I``).
    """
    if check and not in_class_SVU(pair, phi, tol):
        raise NotInClass(f"parameter not in S_VU (residual {check_class_SVU(pair, phi):.3e})")
    sampler = chumakin_sampler(pair.v, phi)
    n = pair.dim
    eye = np.eye(n)

    def grid(z1s, z2s):
        z1s, z2s = list(z1s), list(z2s)
        ws = np.array([-eye + 2.0 * sampler(z) for z in z1s])
        cs = cayley_batch(pair.u, z2s)
        inner = np.array([not is_infinite(z) and abs(complex(z)) < 1 for z in z1s])
        out = np.einsum("aij,bjk->abik", ws, cs)
        if np.any(~inner):
            out[~inner] = np.einsum("bij,ajk->abik", cs, ws[~inner])
        return out

    return PairSampler(n, lambda a, b: grid([a], [b])[0, 0], grid_func=grid, exact_infinity=True)


def build_pair_resolvent_thm41(pair: IsoUnitaryPair, phi: SchurParameter, z1, z2,
                               check: bool = True) -> np.ndarray:
    return thm41_sampler(pair, phi, check=check)(z1, z2)


# --------------------------------------------------------------------------
# Conjugations and the defect frame
# --------------------------------------------------------------------------


def godic_lucenko_factor(u0) -> Tuple[Conjugation, Conjugation]:
    """Conjugations ``K, L`` with ``K(L(x)) = U0 x``.

    With ``U0 = W D W^H`` (complex Schur form, ``W`` unitary), ``L`` is
    conjugation of coordinates in the eigenbasis and ``K = U0 L``:
    matrices ``W W^T`` and ``W D W^T``.
    """
    u0 = as_unitary(u0)
    n = u0.shape[0]
    if n == 0:
        z = np.zeros((0, 0), dtype=complex)
        return Conjugation(z), Conjugation(z)
    if np.linalg.norm(u0 - np.diag(np.diag(u0))) <= EPS_ORTHO:
        t, w = np.diag(np.diag(u0)), np.eye(n, dtype=complex)
    else:
        t, w = la.schur(u0, output="complex")
    d = np.diag(np.diag(t))
    return Conjugation(w @ d @ w.T), Conjugation(w @ w.T)


@dataclass
class DefectConjugationFrame:
    """Coordinates for ``Theta = J K : H - D(V) -> H - R(V)``.

    ``source`` and ``target`` are the defect subspaces ``N_0``, ``N_inf``;
    ``u0`` is ``U`` restricted to ``N_0`` and ``k``, ``l`` conjugations of
    ``N_0`` in source coordinates.  ``theta`` is the (linear) matrix of
    ``J K`` from source to target coordinates.
    """

    j: Conjugation
    u: np.ndarray
    v: PartialIsometry
    source: Subspace
    target: Subspace
    u0: np.ndarray
    k: Conjugation
    l: Conjugation
    theta: np.ndarray
    theta_inv: np.ndarray

    def apply_theta(self, x) -> np.ndarray:
        return self.theta @ np.asarray(x, dtype=complex)

    def intertwining_residual(self) -> float:
        """``||Theta U0 - U_inf Theta||`` with ``U_inf`` the restriction to ``N_inf``."""
        u_inf = dagger(self.target.basis) @ self.u @ self.target.basis
        return float(np.linalg.norm(self.theta @ self.u0 - u_inf @ self.theta, 2)) if self.theta.size else 0.0

    def factor_residual(self) -> float:
        from .linalg import compose_antilinear

        if self.u0.size == 0:
            return 0.0
        return float(np.linalg.norm(compose_antilinear(self.k, self.l) - self.u0, 2))


def frame_residuals(j: Conjugation, u: np.ndarray, v: PartialIsometry) -> Tuple[float, float, float]:
    """Residuals of ``UJ = JU^{-1}``, ``J D(V) = R(V)`` and ``J N_0 = N_inf``."""
    mj = j.matrix
    # U J x = U M conj(x); J U^-1 x = M conj(U^H) conj(x) = M U^T conj(x)
    r1 = float(np.linalg.norm(u @ mj - mj @ u.T, 2))
    p_r = v.range.projector()
    r2 = float(np.linalg.norm((np.eye(v.dim) - p_r) @ mj @ v.domain.basis.conj(), 2)) if v.domain.rank else 0.0
    n0, ninf = v.defect_source(), v.defect_target()
    r3 = float(np.linalg.norm((np.eye(v.dim) - ninf.projector()) @ mj @ n0.basis.conj(), 2)) if n0.rank else 0.0
    return r1, r2, r3


def build_theta(j: Conjugation, u, v: PartialIsometry, k: Optional[Conjugation] = None,
                l: Optional[Conjugation] = None, tol: float = EPS_ORTHO) -> DefectConjugationFrame:
    """Defect frame for ``(V, U, J)``; ``K, L`` default to the factorization of ``U0``.

    For ``h = B0 c`` in ``N_0``: ``K h = B0 M_K conj(c)`` and
    ``J K h = M_J conj(B0) conj(M_K) c``, so in target coordinates
    ``Theta = Binf^H M_J conj(B0) conj(M_K)`` (a linear map, being the
    composition of two antilinear ones).
    """
    u = as_unitary(u)
    if not j.is_valid(tol):
        raise FrameMismatch("J is not a conjugation")
    r1, r2, r3 = frame_residuals(j, u, v)
    if max(r1, r2, r3) > tol:
        raise FrameMismatch(f"frame residuals UJ={r1:.3e}, JD(V)={r2:.3e}, JN0={r3:.3e}")
    b0, binf = v.defect_source().basis, v.defect_target().basis
    if np.linalg.norm(u @ b0 - b0 @ (dagger(b0) @ u @ b0)) > tol:
        raise FrameMismatch("U does not leave H - D(V) invariant")
    u0 = dagger(b0) @ u @ b0
    if k is None or l is None:
        k, l = godic_lucenko_factor(u0)
    mj, mk = j.matrix, k.matrix
    theta = dagger(binf) @ mj @ b0.conj() @ mk.conj()
    theta_inv = mk @ b0.T @ mj.conj() @ binf
    return DefectConjugationFrame(j, u, v, Subspace(b0), Subspace(binf), u0, k, l, theta, theta_inv)


def commutant_residual(u0: np.ndarray, psi: SchurParameter) -> float:
    """Max ``||Psi_k U0 - U0 Psi_k||`` over coefficients (covers all ``z``)."""
    if u0.size == 0:
        return 0.0
    return max(float(np.linalg.norm(c @ u0 - u0 @ c, 2)) for c in psi.coefficients)


def psi_to_phi(frame: DefectConjugationFrame, psi: SchurParameter,
               tol: float = EPS_SVU) -> SchurParameter:
    """``Phi_z = Theta Psi_z``; coefficients ``Theta @ Psi_k``."""
    res = commutant_residual(frame.u0, psi)
    if res > tol:
        raise CommutantViolation(f"Psi does not commute with U0 (residual {res:.3e})")
    coeffs = tuple(frame.theta @ c for c in psi.coefficients)
    return SchurParameter(coeffs, frame.source, frame.target)


def phi_to_psi(frame: DefectConjugationFrame, phi: SchurParameter,
               tol: float = EPS_SVU) -> SchurParameter:
    """``Psi_z = Theta^{-1} Phi_z``; requires ``Phi`` in ``S_{V,U}``."""
    pair = IsoUnitaryPair(frame.v, frame.u)
    res = check_class_SVU(pair, phi)
    if res > tol:
        raise NotInClass(f"Phi not in S_VU (residual {res:.3e})")
    coeffs = tuple(frame.theta_inv @ c for c in phi.coefficients)
    return SchurParameter(coeffs, frame.source, frame.source)
