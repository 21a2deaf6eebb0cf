"""Generalized resolvents of a pair of commuting isometric operators.

A pair resolvent is ``R(z1, z2) = E^H U1(z1) U2(z2) E`` for commuting unitary
extensions ``U1, U2`` of a larger space and an isometric embedding ``E``.
This module evaluates such resolvents, their atomic spectral functions, and
checks the two-variable characterization (conditions 1-3, plus the domain
conditions 4-5 when the isometries are known).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np
import scipy.linalg as la

from .errors import CommutativityViolated, LimitDivergence, NotCommuting
from .linalg import (
    EPS_COMM,
    EPS_ORTHO,
    EPS_PSD,
    EPS_REC,
    INF,
    TWO_PI,
    Subspace,
    as_matrix,
    as_unitary,
    cayley_batch,
    check_off_circle,
    dagger,
    intersect,
    is_infinite,
    isometry_residual,
    joint_eigendecomposition,
    orthonormalize,
)
from .single import PartialIsometry, VerificationReport, disk_grid

EPS_H2 = 1e-8
EPS_LIMIT = 1e-6
LIMIT_RADII = (1e3, 1e4)
LIMIT_NODES = 4


# --------------------------------------------------------------------------
# Commuting unitary pairs
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class CommutingUnitaryPair:
    """Commuting unitaries ``U1, U2`` on ``C^big`` and an isometric ``embedding`` of ``C^small``."""

    embedding: np.ndarray
    u1: np.ndarray
    u2: np.ndarray

    def __post_init__(self):
        e = as_matrix(self.embedding)
        u1 = as_unitary(self.u1)
        u2 = as_unitary(self.u2)
        if u1.shape != u2.shape or u1.shape[0] != e.shape[0]:
            raise ValueError("shape mismatch between embedding and unitaries")
        if isometry_residual(e) > EPS_ORTHO:
            raise ValueError("embedding is not isometric")
        comm = np.linalg.norm(u1 @ u2 - u2 @ u1, 2)
        if comm > EPS_COMM * np.linalg.norm(u1, 2) * np.linalg.norm(u2, 2):
            raise NotCommuting(f"||U1 U2 - U2 U1|| = {comm:.3e}")
        object.__setattr__(self, "embedding", e)
        object.__setattr__(self, "u1", u1)
        object.__setattr__(self, "u2", u2)

    @classmethod
    def on_whole_space(cls, u1, u2) -> "CommutingUnitaryPair":
        u1 = as_matrix(u1)
        return cls(np.eye(u1.shape[0], dtype=complex), u1, u2)

    @property
    def small_dim(self) -> int:
        return self.embedding.shape[1]

    @property
    def big_dim(self) -> int:
        return self.embedding.shape[0]

    def sampler(self) -> "PairSampler":
        e, eh = self.embedding, dagger(self.embedding)

        def grid(z1s, z2s):
            a = eh[None] @ cayley_batch(self.u1, z1s)
            b = cayley_batch(self.u2, z2s) @ e[None]
            return np.einsum("aij,bjk->abik", a, b)

        return PairSampler(self.small_dim, lambda z1, z2: pair_resolvent(self, z1, z2),
                           grid_func=grid, exact_infinity=True)


def pair_resolvent(pair: CommutingUnitaryPair, z1, z2) -> np.ndarray:
    """``E^H U1(z1) U2(z2) E`` with ``U(INF) = -I``."""
    a = cayley_batch(pair.u1, [z1])[0]
    b = cayley_batch(pair.u2, [z2])[0]
    e = pair.embedding
    return dagger(e) @ a @ b @ e


# --------------------------------------------------------------------------
# Two-variable samplers and limits at infinity
# --------------------------------------------------------------------------


def _limit_at_infinity(phi: Callable, eps_limit: float = EPS_LIMIT):
    """Numerical ``lim_{z -> inf} phi(z)``.

    At each radius the value is the mean over ``LIMIT_NODES`` points of the
    circle (exact up to ``O(rho^-LIMIT_NODES)`` for functions analytic at
    infinity); the two radii are then Richardson-combined.  The sampler is
    declared divergent when the circle means disagree or the spread over the
    outer circle fails to shrink.
    """
    means, spreads = [], []
    phases = np.exp(1j * (np.pi / 4 + 2 * np.pi * np.arange(LIMIT_NODES) / LIMIT_NODES))
    for rho in LIMIT_RADII:
        vals = np.array([np.asarray(phi(rho * p), dtype=complex) for p in phases])
        m = vals.mean(axis=0)
        means.append(m)
        spreads.append(max(float(np.linalg.norm(np.atleast_1d(v - m))) for v in vals))
    ratio = (LIMIT_RADII[1] / LIMIT_RADII[0]) ** LIMIT_NODES
    limit = (ratio * means[1] - means[0]) / (ratio - 1)
    scale = max(1.0, float(np.linalg.norm(np.atleast_1d(limit))))
    gap = float(np.linalg.norm(np.atleast_1d(means[1] - means[0])))
    if gap > eps_limit * scale or spreads[1] > 0.5 * spreads[0] + eps_limit * scale:
        raise LimitDivergence(f"no limit at infinity (mean gap {gap:.3e}, spreads {spreads})")
    return limit


class ExtendedFunction:
    """Two-variable function extended to ``INF`` in either argument.

    ``f(INF, z2)`` and ``f(z1, INF)`` are one-variable limits; ``f(INF, INF)``
    is the iterated limit ``lim_{z2} lim_{z1} f``.
    """

    def __init__(self, func: Callable, eps_limit: float = EPS_LIMIT):
        self._func = func
        self.eps_limit = eps_limit

    def __call__(self, z1, z2):
        inf1, inf2 = is_infinite(z1), is_infinite(z2)
        if not inf1 and not inf2:
            return self._func(z1, z2)
        if inf1 and not inf2:
            return _limit_at_infinity(lambda w: self._func(w, z2), self.eps_limit)
        if inf2 and not inf1:
            return _limit_at_infinity(lambda w: self._func(z1, w), self.eps_limit)
        inner = lambda w2: _limit_at_infinity(lambda w1: self._func(w1, w2), self.eps_limit)
        return _limit_at_infinity(inner, self.eps_limit)


def extend_to_infinity(f: Callable, eps_limit: float = EPS_LIMIT) -> ExtendedFunction:
    return ExtendedFunction(f, eps_limit)


class PairSampler:
    """Two-variable resolvent family ``(z1, z2) -> R(z1, z2)`` (``dim x dim``).

    ``grid_func`` optionally evaluates a whole tensor grid at once;
    ``exact_infinity`` declares that ``func`` handles the ``INF`` token itself,
    otherwise values at infinity come from numerical limits.
    """

    def __init__(self, dim: int, func: Callable, grid_func: Optional[Callable] = None,
                 exact_infinity: bool = False):
        self.dim = dim
        self._func = func
        self._grid_func = grid_func
        self.exact_infinity = exact_infinity
        self._extended = None if exact_infinity else ExtendedFunction(func)

    def __call__(self, z1, z2) -> np.ndarray:
        check_off_circle(z1)
        check_off_circle(z2)
        if self._extended is not None:
            out = self._extended(z1, z2)
        else:
            out = self._func(z1, z2)
        return np.asarray(out, dtype=complex).reshape(self.dim, self.dim)

    def grid(self, z1s: Sequence, z2s: Sequence) -> np.ndarray:
        """Values on the tensor grid, shape ``(len(z1s), len(z2s), dim, dim)``."""
        z1s, z2s = list(z1s), list(z2s)
        out = np.empty((len(z1s), len(z2s), self.dim, self.dim), dtype=complex)
        if self._grid_func is not None and self.exact_infinity:
            return np.asarray(self._grid_func(z1s, z2s), dtype=complex)
        f1 = [i for i, z in enumerate(z1s) if not is_infinite(z)]
        f2 = [j for j, z in enumerate(z2s) if not is_infinite(z)]
        if self._grid_func is not None and f1 and f2:
            out[np.ix_(f1, f2)] = self._grid_func([z1s[i] for i in f1], [z2s[j] for j in f2])
        else:
            for i in f1:
                for j in f2:
                    out[i, j] = self(z1s[i], z2s[j])
        for i, z1 in enumerate(z1s):
            for j, z2 in enumerate(z2s):
                if is_infinite(z1) or is_infinite(z2):
                    out[i, j] = self(z1, z2)
        return out

    def scaled(self, factor: complex) -> "PairSampler":
        g = None if self._grid_func is None else (lambda a, b: factor * self._grid_func(a, b))
        return PairSampler(self.dim, lambda a, b: factor * self._func(a, b), g, self.exact_infinity)


# --------------------------------------------------------------------------
# Spectral function of a pair
# --------------------------------------------------------------------------


@dataclass
class SpectralFunctionAtlas:
    """Atoms ``(theta1, theta2, weight)`` of the compressed joint spectral measure."""

    atoms: List[Tuple[float, float, np.ndarray]]

    @property
    def dim(self) -> int:
        return self.atoms[0][2].shape[0]

    def total(self) -> np.ndarray:
        return sum(w for _, _, w in self.atoms)

    def distribution(self, t1: float, t2: float) -> np.ndarray:
        """``E_{t1,t2}``: sum of weights with ``theta1 <= t1`` and ``theta2 <= t2``."""
        out = np.zeros((self.dim, self.dim), dtype=complex)
        for a, b, w in self.atoms:
            if a <= t1 and b <= t2:
                out += w
        return out

    def min_weight_eigenvalue(self) -> float:
        return min(float(np.linalg.eigvalsh(w).min()) for _, _, w in self.atoms)

    def monotonicity_residual(self) -> float:
        """Most negative eigenvalue of ``E`` increments between consecutive step points."""
        steps1 = sorted({a for a, _, _ in self.atoms} | {0.0, TWO_PI})
        steps2 = sorted({b for _, b, _ in self.atoms} | {0.0, TWO_PI})
        worst = 0.0
        for i in range(1, len(steps1)):
            for j in range(len(steps2)):
                d = self.distribution(steps1[i], steps2[j]) - self.distribution(steps1[i - 1], steps2[j])
                worst = max(worst, -float(np.linalg.eigvalsh(0.5 * (d + dagger(d))).min()))
        for j in range(1, len(steps2)):
            for i in range(len(steps1)):
                d = self.distribution(steps1[i], steps2[j]) - self.distribution(steps1[i], steps2[j - 1])
                worst = max(worst, -float(np.linalg.eigvalsh(0.5 * (d + dagger(d))).min()))
        return worst

    def is_valid(self, tol: float = EPS_REC) -> bool:
        return (self.min_weight_eigenvalue() >= -EPS_PSD
                and np.linalg.norm(self.total() - np.eye(self.dim), 2) <= tol)


def spectral_function(pair: CommutingUnitaryPair) -> SpectralFunctionAtlas:
    e = pair.embedding
    atoms = [(t1, t2, dagger(e) @ p @ e) for t1, t2, p in joint_eigendecomposition(pair.u1, pair.u2)]
    return SpectralFunctionAtlas(atoms)


def herglotz_kernel(z, theta):
    """``(1 + z e^{it}) / (1 - z e^{it})``, equal to ``-1`` at ``z = INF``."""
    if is_infinite(z):
        return -1.0 + 0j
    w = complex(z) * np.exp(1j * theta)
    return (1 + w) / (1 - w)


def check_integral_representation(pair: CommutingUnitaryPair, h, grid=None) -> float:
    """Max ``|(R h, h) - sum k(z1, t1) k(z2, t2) (W h, h)|`` over the grid."""
    h = np.asarray(h, dtype=complex).ravel()
    pts = list(H2Grid.default().points if grid is None else grid)
    table = pair.sampler().grid(pts, pts)
    lhs = np.einsum("i,abij,j->ab", h.conj(), table, h)
    rhs = np.zeros_like(lhs)
    for t1, t2, w in spectral_function(pair).atoms:
        k1 = np.array([herglotz_kernel(z, t1) for z in pts])
        k2 = np.array([herglotz_kernel(z, t2) for z in pts])
        rhs += np.outer(k1, k2) * (h.conj() @ w @ h)
    return float(np.max(np.abs(lhs - rhs))) if lhs.size else 0.0


# --------------------------------------------------------------------------
# Class H2
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class H2Grid:
    """Sample points: interior grid, exterior mirrors, then ``0`` and ``INF``."""

    inner: np.ndarray

    @classmethod
    def default(cls) -> "H2Grid":
        return cls(disk_grid())

    @property
    def n_inner(self) -> int:
        return len(self.inner)

    @property
    def points(self) -> list:
        outer = 1.0 / self.inner.conj()
        return [complex(z) for z in self.inner] + [complex(z) for z in outer] + [0j, INF]

    @property
    def mirror_index(self) -> np.ndarray:
        n = self.n_inner
        idx = np.concatenate([np.arange(n, 2 * n), np.arange(n), [2 * n + 1, 2 * n]])
        return idx

    @property
    def zero(self) -> int:
        return 2 * self.n_inner

    @property
    def infinity(self) -> int:
        return 2 * self.n_inner + 1

    @property
    def disk_index(self) -> np.ndarray:
        """Indices of points in the open unit disk (interior grid and 0)."""
        return np.concatenate([np.arange(self.n_inner), [self.zero]])

    def describe(self) -> dict:
        return {"inner_points": self.n_inner, "total_points": len(self.points) ** 2}


@dataclass
class H2Report:
    condition_a_residual: float
    condition_b_min: float
    condition_c_residual: float
    tolerance: float
    grid: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return (self.condition_a_residual <= self.tolerance
                and self.condition_b_min >= -self.tolerance
                and self.condition_c_residual <= self.tolerance)

    def to_dict(self) -> dict:
        return {"condition_a_residual": self.condition_a_residual,
                "condition_b_min": self.condition_b_min,
                "condition_c_residual": self.condition_c_residual,
                "tolerance": self.tolerance, "pass": self.passed, "grid": self.grid}


def h2_from_table(table: np.ndarray, grid: H2Grid, tol: float = EPS_H2) -> H2Report:
    """H2 conditions (a)-(c) for values ``table[i, j] = f(p_i, p_j)`` on ``grid.points``."""
    m = grid.mirror_index
    res_a = float(np.max(np.abs(table[np.ix_(m, m)] - table.conj())))
    d = grid.disk_index
    md = m[d]
    kernel = (table[np.ix_(d, d)] - table[np.ix_(md, d)]
              - table[np.ix_(d, md)] + table[np.ix_(md, md)])
    res_a = max(res_a, float(np.max(np.abs(kernel.imag))))
    b_min = float(np.min(kernel.real))
    z, inf = grid.zero, grid.infinity
    res_c = max(float(np.max(np.abs(table[:, z] + table[:, inf]))),
                float(np.max(np.abs(table[z, :] + table[inf, :]))))
    return H2Report(res_a, b_min, res_c, tol, grid.describe())


def check_h2_membership(f: Callable, grid: Optional[H2Grid] = None, tol: float = EPS_H2) -> H2Report:
    """Sampled test of Koranyi's class H2 for a scalar function defined at ``INF``."""
    grid = H2Grid.default() if grid is None else grid
    pts = grid.points
    if hasattr(f, "grid"):
        table = np.asarray(f.grid(pts, pts))
    else:
        table = np.array([[complex(f(a, b)) for b in pts] for a in pts])
    return h2_from_table(table, grid, tol)


def test_vectors(dim: int) -> List[np.ndarray]:
    """Standard basis plus ``e_i +- e_j`` and ``e_i +- i e_j`` for ``i < j``."""
    eye = np.eye(dim, dtype=complex)
    out = [eye[i] for i in range(dim)]
    for i in range(dim):
        for j in range(i + 1, dim):
            for c in (1, -1, 1j, -1j):
                out.append(eye[i] + c * eye[j])
    return out


def _pair_conditions(report: VerificationReport, r: PairSampler, vectors, grid: H2Grid,
                     tol: float) -> np.ndarray:
    pts = grid.points
    table = r.grid(pts, pts)
    z = grid.zero
    eye = np.eye(r.dim)
    report.add("1", float(np.linalg.norm(table[z, z] - eye, 2)), tol, "R(0,0) = I")
    fin = np.arange(2 * grid.n_inner)
    m = grid.mirror_index[fin]
    diff = dagger(table[np.ix_(fin, fin)]) - table[np.ix_(m, m)]
    res2 = float(np.max(np.linalg.norm(diff, ord=2, axis=(-2, -1)))) if diff.size else 0.0
    report.add("2", res2, tol, "R(z1,z2)^H = R(1/conj z1, 1/conj z2)")
    a = c = 0.0
    b = np.inf
    vectors = test_vectors(r.dim) if vectors is None else vectors
    for h in vectors:
        h = np.asarray(h, dtype=complex).ravel()
        f = np.einsum("i,abij,j->ab", h.conj(), table, h)
        rep = h2_from_table(f, grid, tol)
        a = max(a, rep.condition_a_residual)
        b = min(b, rep.condition_b_min)
        c = max(c, rep.condition_c_residual)
    report.add("3a", a, tol, "H2 (a): f(1/conj z) = conj f(z)")
    report.add("3b", max(0.0, -b), tol, f"H2 (b): kernel min {b:.3e}")
    report.add("3c", c, tol, "H2 (c): f(z,0) + f(z,inf) = 0")
    return table


def verify_theorem_3_1(r: PairSampler, basis_vectors=None, grid: Optional[H2Grid] = None,
                       tol: float = 1e-8) -> VerificationReport:
    """Conditions characterizing generalized resolvents of commuting isometric pairs."""
    grid = H2Grid.default() if grid is None else grid
    report = VerificationReport()
    _pair_conditions(report, r, basis_vectors, grid, tol)
    return report


def commutativity_residual(v1: PartialIsometry, v2: PartialIsometry) -> float:
    """Max ``||V1 V2 h - V2 V1 h||`` over an orthonormal basis of ``D(V1 V2) & D(V2 V1)``."""

    def product_domain(outer: PartialIsometry, inner: PartialIsometry) -> Subspace:
        if inner.domain.rank == 0:
            return Subspace.zero(inner.dim)
        leak = (np.eye(inner.dim) - outer.domain.projector()) @ inner.action
        null = la.null_space(leak, rcond=1e-10)
        return orthonormalize(inner.domain.basis @ null)

    common = intersect(product_domain(v1, v2), product_domain(v2, v1))
    if common.rank == 0:
        return 0.0
    x = common.basis
    m1, m2 = v1.matrix(), v2.matrix()
    return float(np.linalg.norm(m1 @ (m2 @ x) - m2 @ (m1 @ x), 2))


def verify_theorem_3_2(v1: PartialIsometry, v2: PartialIsometry, r: PairSampler,
                       grid: Optional[H2Grid] = None, tol: float = 1e-8,
                       basis_vectors=None) -> VerificationReport:
    """Conditions characterizing generalized resolvents of the given pair ``V1, V2``."""
    comm = commutativity_residual(v1, v2)
    if comm > EPS_ORTHO:
        raise CommutativityViolated(f"V1 V2 != V2 V1 on the common domain (residual {comm:.3e})")
    grid = H2Grid.default() if grid is None else grid
    report = VerificationReport()
    table = _pair_conditions(report, r, basis_vectors, grid, tol)
    z = grid.zero
    eye = np.eye(r.dim)
    finite = [i for i, p in enumerate(grid.points) if not is_infinite(p)]
    pts = grid.points
    for cid, v, slices in (("4", v1, table[:, z]), ("5", v2, table[z, :])):
        res = 0.0
        g = v.domain.basis
        if v.domain.rank:
            for i in finite:
                half = 0.5 * (eye + slices[i])
                res = max(res, float(np.linalg.norm(half @ (g - pts[i] * v.action) - g, 2)))
        report.add(cid, res, tol, f"(I + R slice)/2 (I - zV{cid[0] == '4' and 1 or 2}) g = g")
        n0 = v.defect_source()
        half0 = 0.5 * (eye + slices[z])
        res0 = float(np.linalg.norm((half0 - eye) @ n0.basis, 2)) if n0.rank else 0.0
        report.add(cid + ".R0", res0, tol, "slice resolvent at 0 is identity on the defect")
    return report
