"""Seeded random instances for tests and the command line."""

from __future__ import annotations

from typing import Optional, Tuple

import numpy as np
from scipy.stats import unitary_group

from .linalg import TWO_PI, Conjugation, Subspace, dagger, orthonormalize
from .moments import GridOperatorMeasure, GridScalarMeasure
from .pair import CommutingUnitaryPair
from .single import PartialIsometry, SchurParameter


def rng_from(seed) -> np.random.Generator:
    return seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)


def random_unitary(n: int, rng) -> np.ndarray:
    rng = rng_from(rng)
    if n == 1:
        return np.exp(1j * rng.uniform(0, TWO_PI)) * np.ones((1, 1))
    return unitary_group.rvs(n, random_state=rng)


def random_isometry(big: int, small: int, rng) -> np.ndarray:
    return random_unitary(big, rng)[:, :small]


def random_complex(shape, rng) -> np.ndarray:
    rng = rng_from(rng)
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def commuting_pair(dim: int, big_dim: int, n1: int, n2: int, rng,
                   off_grid: bool = False) -> CommutingUnitaryPair:
    """Phase functions of the eigenprojections of a random unitary.

    With ``off_grid`` the joint eigenangles are drawn uniformly instead of
    from the ``n1 x n2`` grid.
    """
    rng = rng_from(rng)
    q = random_unitary(big_dim, rng)
    if off_grid:
        t1 = rng.uniform(0, TWO_PI, big_dim)
        t2 = rng.uniform(0, TWO_PI, big_dim)
    else:
        t1 = TWO_PI * rng.integers(1, n1 + 1, big_dim) / n1
        t2 = TWO_PI * rng.integers(1, n2 + 1, big_dim) / n2
    u1 = q @ np.diag(np.exp(1j * t1)) @ dagger(q)
    u2 = q @ np.diag(np.exp(1j * t2)) @ dagger(q)
    return CommutingUnitaryPair(random_isometry(big_dim, dim, rng), u1, u2)


def partial_isometry(dim: int, rank: int, rng) -> PartialIsometry:
    rng = rng_from(rng)
    dom = random_isometry(dim, rank, rng)
    img = random_isometry(dim, rank, rng)
    return PartialIsometry(Subspace(dom), img)


def unitary_schur_parameter(v: PartialIsometry, rng) -> SchurParameter:
    """Constant unitary parameter ``N_0(V) -> N_inf(V)``."""
    src, tgt = v.defect_source(), v.defect_target()
    return SchurParameter.constant(random_unitary(src.rank, rng) if src.rank else
                                   np.zeros((0, 0)), src, tgt)


def contractive_schur_parameter(v: PartialIsometry, rng, degree: int = 0,
                                norm: float = 0.9) -> SchurParameter:
    """Random matrix polynomial with ``sum ||C_k|| <= norm``."""
    rng = rng_from(rng)
    src, tgt = v.defect_source(), v.defect_target()
    coeffs = []
    for _ in range(degree + 1):
        c = random_complex((tgt.rank, src.rank), rng)
        s = np.linalg.norm(c, 2) if c.size else 1.0
        coeffs.append(c / s * norm / (degree + 1) if s else c)
    return SchurParameter(tuple(coeffs), src, tgt)


def scalar_measure(n1: int, n2: int, rng, n_atoms: Optional[int] = None) -> GridScalarMeasure:
    """Nonnegative weights on random cells, total mass 1."""
    rng = rng_from(rng)
    w = np.zeros((n1, n2))
    cells = n1 * n2
    n_atoms = cells if n_atoms is None else min(n_atoms, cells)
    idx = rng.choice(cells, n_atoms, replace=False)
    w.flat[idx] = rng.random(n_atoms) + 0.05
    return GridScalarMeasure(w / w.sum())


def operator_measure(dim: int, n1: int, n2: int, rng,
                     n_atoms: Optional[int] = None) -> GridOperatorMeasure:
    """Random PSD atoms ``S^{-1/2} A S^{-1/2}`` normalized to sum to ``I``."""
    rng = rng_from(rng)
    cells = n1 * n2
    n_atoms = min(cells, rng.integers(1, cells + 1) if n_atoms is None else n_atoms)
    idx = rng.choice(cells, n_atoms, replace=False)
    atoms = np.zeros((n1, n2, dim, dim), dtype=complex)
    for i in idx:
        rank = rng.integers(1, dim + 1)
        x = random_complex((dim, rank), rng)
        atoms[i // n2, i % n2] = x @ dagger(x)
    total = atoms.sum(axis=(0, 1))
    w, q = np.linalg.eigh(total)
    if w.min() < 1e-6:
        # rank-deficient sum: top up the first atom
        atoms[idx[0] // n2, idx[0] % n2] += np.eye(dim)
        w, q = np.linalg.eigh(atoms.sum(axis=(0, 1)))
    s = (q / np.sqrt(w)) @ dagger(q)
    return GridOperatorMeasure(np.einsum("ij,abjk,kl->abil", s, atoms, s))


# --------------------------------------------------------------------------
# Isometry-unitary pairs with U D(V) = D(V) and a conjugation J
# --------------------------------------------------------------------------


def iso_unitary_instance(dim: int, rng, n_blocks: Optional[int] = None
                         ) -> Tuple[PartialIsometry, np.ndarray, Conjugation]:
    """``(V, U, J)`` with ``U D(V) = D(V)``, ``UJ = JU^{-1}``, ``J D(V) = R(V)``
    and ``VU = UV`` on ``D(V)``.

    Built in coordinates where ``J`` is plain conjugation: ``U = O D O^T``
    with ``O`` real orthogonal, ``D(V)`` a sum of random subspaces of the
    eigenspaces of ``U``, ``R(V)`` their conjugates.  A random unitary change
    of coordinates ``W`` then gives ``J = W W^T``.
    """
    rng = rng_from(rng)
    if n_blocks is None:
        n_blocks = int(rng.integers(1, dim + 1))
    cuts = np.sort(rng.choice(np.arange(1, dim), n_blocks - 1, replace=False)) if n_blocks > 1 else []
    sizes = np.diff(np.concatenate([[0], cuts, [dim]])).astype(int)
    o, _ = np.linalg.qr(rng.standard_normal((dim, dim)))
    angles = rng.uniform(0, TWO_PI, len(sizes))
    phases = np.repeat(np.exp(1j * angles), sizes)
    a = o @ np.diag(phases) @ o.T
    dom_cols, img_cols = [], []
    start = 0
    for m in sizes:
        ob = o[:, start:start + m]
        start += m
        r = int(rng.integers(0, m + 1))
        if r == 0:
            continue
        s = orthonormalize(ob @ random_complex((m, r), rng)).basis
        g = random_unitary(r, rng)
        dom_cols.append(s)
        img_cols.append(s.conj() @ g)
    w = random_unitary(dim, rng)
    u = w @ a @ dagger(w)
    j = Conjugation(w @ w.T)
    if dom_cols:
        dom, img = w @ np.hstack(dom_cols), w @ np.hstack(img_cols)
    else:
        dom, img = np.zeros((dim, 0), dtype=complex), np.zeros((dim, 0), dtype=complex)
    return PartialIsometry(Subspace(dom), img), u, j


def commutant_parameter(u0: np.ndarray, rng, norm: float = 0.9) -> np.ndarray:
    """Random contraction commuting with the unitary ``u0``.

    Block diagonal on the eigenspaces of ``u0``.
    """
    from .linalg import joint_eigendecomposition

    rng = rng_from(rng)
    n = u0.shape[0]
    if n == 0:
        return np.zeros((0, 0), dtype=complex)
    out = np.zeros((n, n), dtype=complex)
    for _, _, p in joint_eigendecomposition(u0, np.eye(n)):
        q = orthonormalize(p).basis
        x = random_complex((q.shape[1], q.shape[1]), rng)
        out += q @ x @ dagger(q)
    s = np.linalg.norm(out, 2)
    return out * (norm / s) if s else out
