"""Generalized resolvents of a single isometric operator.

Covers partial isometries and their defect subspaces, Schur-class
parameters, Chumakin's formula ``R_z = [I - z(V + Phi_z)]^{-1}``, compressed
resolvents of unitary extensions and the two condition verifiers for
single-variable resolvent families.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence

import numpy as np

from .errors import SingularResolvent
from .linalg import (
    EPS_ORTHO,
    INF,
    KAPPA_MAX,
    Subspace,
    as_matrix,
    check_off_circle,
    complement,
    dagger,
    hermitian_part,
    is_infinite,
    isometry_residual,
    mirror,
    orthonormalize,
    unitary_resolvent,
)

EPS_SCHUR = 1e-8
DEFAULT_RADII = (0.1, 0.3, 0.5, 0.7, 0.9)
DEFAULT_ANGLES = 8


def disk_grid(radii: Sequence[float] = DEFAULT_RADII, n_angles: int = DEFAULT_ANGLES) -> np.ndarray:
    """Interior sample points ``r e^{2 pi i k / n}``."""
    r = np.asarray(radii, dtype=float)[:, None]
    phase = np.exp(2j * np.pi * np.arange(n_angles) / n_angles)[None, :]
    return (r * phase).ravel()


def sample_points(radii: Sequence[float] = DEFAULT_RADII, n_angles: int = DEFAULT_ANGLES) -> np.ndarray:
    """Interior grid followed by its exterior mirrors ``1/conj(z)``."""
    inner = disk_grid(radii, n_angles)
    return np.concatenate([inner, 1.0 / inner.conj()])


def schur_validation_grid() -> np.ndarray:
    return disk_grid(np.arange(1, 10) / 10.0, 64)


# --------------------------------------------------------------------------
# Partial isometries
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class PartialIsometry:
    """Isometric operator ``V`` with domain ``D(V)``.

    ``action`` holds the images of the domain basis vectors, so that
    ``V (domain.basis @ c) = action @ c``.
    """

    domain: Subspace
    action: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.action, dtype=complex).reshape(self.domain.ambient_dim, self.domain.rank)
        object.__setattr__(self, "action", a)
        if isometry_residual(a) > EPS_ORTHO:
            raise ValueError("action is not isometric on the domain")

    @classmethod
    def trivial(cls, dim: int) -> "PartialIsometry":
        """The operator ``o_H`` with ``D(o_H) = {0}``."""
        return cls(Subspace.zero(dim), np.zeros((dim, 0), dtype=complex))

    @classmethod
    def from_matrix(cls, domain: Subspace, matrix) -> "PartialIsometry":
        m = as_matrix(matrix)
        return cls(domain, m @ domain.basis)

    @property
    def dim(self) -> int:
        return self.domain.ambient_dim

    @property
    def range(self) -> Subspace:
        return Subspace(self.action)

    def matrix(self) -> np.ndarray:
        """``V P_{D(V)}`` as a ``dim x dim`` matrix."""
        return self.action @ dagger(self.domain.basis)

    def apply(self, x) -> np.ndarray:
        return self.matrix() @ np.asarray(x, dtype=complex)

    def defect_source(self) -> Subspace:
        """``N_0(V) = H - D(V)``."""
        return complement(self.domain)

    def defect_target(self) -> Subspace:
        """``N_inf(V) = H - R(V)``."""
        return complement(self.range)


def defect_subspaces(v: PartialIsometry, zeta):
    """``(M_zeta, N_zeta)`` with ``M_zeta = (I - zeta V) D(V)``.

    For ``zeta = INF`` returns ``(R(V), H - R(V))``.
    """
    if is_infinite(zeta):
        m = v.range
    else:
        m = orthonormalize(v.domain.basis - complex(zeta) * v.action)
    return m, complement(m)


# --------------------------------------------------------------------------
# Schur-class parameters
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class SchurParameter:
    """Matrix polynomial ``Phi(z) = sum_k C_k z^k`` from ``source`` to ``target``.

    Coefficients act on coordinates: ``C_k`` has shape
    ``target.rank x source.rank``.
    """

    coefficients: tuple
    source: Subspace
    target: Subspace

    def __post_init__(self):
        coeffs = tuple(
            np.asarray(c, dtype=complex).reshape(self.target.rank, self.source.rank)
            for c in self.coefficients
        )
        if not coeffs:
            coeffs = (np.zeros((self.target.rank, self.source.rank), dtype=complex),)
        object.__setattr__(self, "coefficients", coeffs)

    @classmethod
    def constant(cls, matrix, source: Subspace, target: Subspace) -> "SchurParameter":
        return cls((matrix,), source, target)

    @classmethod
    def zero(cls, source: Subspace, target: Subspace) -> "SchurParameter":
        return cls((np.zeros((target.rank, source.rank)),), source, target)

    @property
    def degree(self) -> int:
        return len(self.coefficients) - 1

    def __call__(self, z) -> np.ndarray:
        """Value in coordinates (``target.rank x source.rank``)."""
        z = complex(z)
        out = np.zeros_like(self.coefficients[0])
        for c in reversed(self.coefficients):
            out = out * z + c
        return out

    def operator(self, z) -> np.ndarray:
        """Value as an operator on the ambient space (zero on ``source``'s complement)."""
        return self.target.basis @ self(z) @ dagger(self.source.basis)

    def max_norm(self, grid: Optional[np.ndarray] = None) -> float:
        if self.source.rank == 0 or self.target.rank == 0:
            return 0.0
        if grid is None:
            grid = schur_validation_grid()
        return max(np.linalg.norm(self(z), 2) for z in grid)

    def is_contractive(self, tol: float = EPS_SCHUR, grid=None) -> bool:
        return self.max_norm(grid) <= 1.0 + tol


def direct_sum(v: PartialIsometry, phi_value: np.ndarray, source: Subspace) -> np.ndarray:
    """``V + Phi`` acting as ``V`` on ``D(V)`` and as ``phi_value`` on ``source``."""
    return v.matrix() + phi_value @ source.projector()


def extension_operator(v: PartialIsometry, phi: SchurParameter, z) -> np.ndarray:
    if v.domain.rank and np.linalg.norm(dagger(phi.source.basis) @ v.domain.basis) > 1e-9:
        raise ValueError("Schur parameter source must be orthogonal to D(V)")
    if phi.source.rank + v.domain.rank != v.dim:
        raise ValueError("Schur parameter source must be H - D(V)")
    return v.matrix() + phi.operator(z)


def chumakin_resolvent(v: PartialIsometry, phi: SchurParameter, zeta) -> np.ndarray:
    """``[I - zeta (V + Phi_zeta)]^{-1}`` for ``|zeta| < 1``."""
    zeta = complex(zeta)
    if abs(zeta) >= 1:
        raise ValueError("Chumakin's formula needs |zeta| < 1")
    a = np.eye(v.dim) - zeta * extension_operator(v, phi, zeta)
    if np.linalg.cond(a) > KAPPA_MAX:
        raise SingularResolvent(f"I - zeta(V + Phi) is singular at zeta = {zeta}")
    return np.linalg.inv(a)


def resolvent_from_extension(embedding, u, zeta) -> np.ndarray:
    """``E^H (I - zeta U)^{-1} E`` for an isometric embedding ``E`` of ``H``."""
    e = as_matrix(embedding)
    return dagger(e) @ unitary_resolvent(np.asarray(u, dtype=complex), zeta) @ e


# --------------------------------------------------------------------------
# Resolvent samplers and verifiers
# --------------------------------------------------------------------------


class ResolventSampler:
    """A family ``zeta -> R_zeta`` of ``dim x dim`` matrices on ``|zeta| != 1``."""

    def __init__(self, dim: int, func: Callable):
        self.dim = dim
        self._func = func

    def __call__(self, zeta) -> np.ndarray:
        check_off_circle(zeta)
        return np.asarray(self._func(zeta), dtype=complex).reshape(self.dim, self.dim)

    @classmethod
    def constant(cls, matrix) -> "ResolventSampler":
        m = as_matrix(matrix)
        return cls(m.shape[0], lambda zeta: m)


def chumakin_sampler(v: PartialIsometry, phi: SchurParameter) -> ResolventSampler:
    """Chumakin's formula inside the disk, ``I - R_{1/conj(z)}^H`` outside."""

    def evaluate(zeta):
        if is_infinite(zeta):
            return np.zeros((v.dim, v.dim), dtype=complex)
        zeta = complex(zeta)
        if abs(zeta) < 1:
            return chumakin_resolvent(v, phi, zeta)
        return np.eye(v.dim) - dagger(chumakin_resolvent(v, phi, 1.0 / zeta.conjugate()))

    return ResolventSampler(v.dim, evaluate)


def extension_sampler(embedding, u) -> ResolventSampler:
    e = as_matrix(embedding)
    return ResolventSampler(e.shape[1], lambda zeta: resolvent_from_extension(e, u, zeta))


@dataclass
class ConditionResult:
    id: str
    max_residual: float
    tolerance: float
    passed: bool
    note: str = ""

    def to_dict(self) -> dict:
        d = {"id": self.id, "max_residual": float(self.max_residual),
             "tolerance": self.tolerance, "pass": bool(self.passed)}
        if self.note:
            d["note"] = self.note
        return d


@dataclass
class VerificationReport:
    conditions: List[ConditionResult] = field(default_factory=list)

    def add(self, id: str, residual: float, tol: float, note: str = "") -> ConditionResult:
        res = ConditionResult(id, float(residual), tol, bool(residual <= tol), note)
        self.conditions.append(res)
        return res

    def __getitem__(self, id: str) -> ConditionResult:
        for c in self.conditions:
            if c.id == id:
                return c
        raise KeyError(id)

    @property
    def overall_pass(self) -> bool:
        return all(c.passed for c in self.conditions)

    @property
    def max_residual(self) -> float:
        return max((c.max_residual for c in self.conditions), default=0.0)

    def failed(self) -> List[str]:
        return [c.id for c in self.conditions if not c.passed]

    def to_dict(self) -> dict:
        return {"conditions": [c.to_dict() for c in self.conditions],
                "overall_pass": self.overall_pass}


CAUCHY_TEST_POINTS = (0.0, 0.2, 0.3j, 0.4 * np.exp(2.1j), -0.35 + 0.1j)


def cauchy_residual(r: ResolventSampler, test_points=CAUCHY_TEST_POINTS,
                    contour_radius: float = 0.7, n_nodes: int = 256) -> float:
    """Max ``||R_{z0} - (1/2 pi i) oint R_z / (z - z0) dz||`` over the test points.

    The contour integral uses the trapezoidal rule on ``|z| = contour_radius``.
    """
    nodes = contour_radius * np.exp(2j * np.pi * np.arange(n_nodes) / n_nodes)
    values = np.array([r(z) for z in nodes])
    worst = 0.0
    for z0 in test_points:
        weights = nodes / (nodes - z0) / n_nodes
        approx = np.tensordot(weights, values, axes=1)
        worst = max(worst, float(np.linalg.norm(r(z0) - approx, 2)))
    return worst


def _common_conditions(report: VerificationReport, r: ResolventSampler,
                       inner: np.ndarray, tol: float, tol_analytic: float) -> None:
    eye = np.eye(r.dim)
    # 3) Re (R_z h, h) >= |h|^2 / 2 on the disk, for all h at once
    worst = 0.0
    for z in np.concatenate([[0.0], inner]):
        w = np.linalg.eigvalsh(hermitian_part(r(z)) - 0.5 * eye)
        worst = max(worst, -float(w.min()))
    report.add("3", worst, tol, "negative part of min eig(Re R_z - I/2)")
    report.add("4", cauchy_residual(r), tol_analytic, "Cauchy-integral reproduction")
    res5 = 0.0
    for z in inner:
        if z == 0:
            continue
        res5 = max(res5, float(np.linalg.norm(dagger(r(z)) - (eye - r(mirror(z))), 2)))
    report.add("5", res5, tol, "R_z^H = I - R_{1/conj z}")


def verify_theorem_1_2(r: ResolventSampler, zeta0, l_space: Subspace, samples=None,
                       tol: float = 1e-8, tol_analytic: float = 1e-6) -> VerificationReport:
    """Check the five conditions characterizing generalized resolvents of some
    closed isometric operator, with the subspace ``L`` supplied by the caller."""
    zeta0 = complex(zeta0)
    if not 0 < abs(zeta0) < 1:
        raise ValueError("zeta0 must satisfy 0 < |zeta0| < 1")
    inner = disk_grid() if samples is None else np.asarray(samples)
    points = np.concatenate([inner, 1.0 / inner.conj()])
    report = VerificationReport()
    eye = np.eye(r.dim)
    r0 = r(zeta0)
    f = l_space.basis
    res1 = 0.0
    if l_space.rank:
        for z in points:
            rz = r(z)
            lhs = (z * rz - zeta0 * r0) @ f
            rhs = (z - zeta0) * rz @ (r0 @ f)
            res1 = max(res1, float(np.linalg.norm(lhs - rhs, 2)))
    report.add("1", res1, tol, "first resolvent identity on L")
    rest = complement(orthonormalize(r0 @ f) if l_space.rank else Subspace.zero(r.dim))
    rzero = r(0.0)
    res2 = float(np.linalg.norm((rzero - eye) @ rest.basis, 2)) if rest.rank else 0.0
    if not np.all(np.isfinite(rzero)):
        res2 = np.inf
    report.add("2", res2, tol, "R_0 h = h on H - closure(R_zeta0 L)")
    _common_conditions(report, r, inner, tol, tol_analytic)
    return report


def verify_theorem_1_3(v: PartialIsometry, r: ResolventSampler, samples=None,
                       tol: float = 1e-8, tol_analytic: float = 1e-6) -> VerificationReport:
    """Check the five conditions characterizing generalized resolvents of ``V``."""
    inner = disk_grid() if samples is None else np.asarray(samples)
    points = np.concatenate([inner, 1.0 / inner.conj()])
    report = VerificationReport()
    eye = np.eye(r.dim)
    g = v.domain.basis
    res1 = 0.0
    if v.domain.rank:
        for z in points:
            res1 = max(res1, float(np.linalg.norm(r(z) @ (g - z * v.action) - g, 2)))
    report.add("1", res1, tol, "R_z (I - zV) g = g on D(V)")
    n0 = v.defect_source()
    rzero = r(0.0)
    res2 = float(np.linalg.norm((rzero - eye) @ n0.basis, 2)) if n0.rank else 0.0
    report.add("2", res2, tol, "R_0 h = h on H - D(V)")
    _common_conditions(report, r, inner, tol, tol_analytic)
    return report


__all__ = [
    "INF",
    "PartialIsometry",
    "SchurParameter",
    "ResolventSampler",
    "VerificationReport",
    "ConditionResult",
    "defect_subspaces",
    "chumakin_resolvent",
    "chumakin_sampler",
    "resolvent_from_extension",
    "extension_sampler",
    "verify_theorem_1_2",
    "verify_theorem_1_3",
    "disk_grid",
    "sample_points",
]
