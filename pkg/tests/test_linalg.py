import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from gresolvent.errors import NotCommuting, UnitModulusArgument
from gresolvent.generate import random_unitary
from gresolvent.linalg import (
    INF,
    Conjugation,
    Subspace,
    as_unitary,
    cayley_batch,
    cayley_transform,
    compose_antilinear,
    complement,
    intersect,
    joint_eigendecomposition,
    mirror,
    normalize_angle,
    orthonormalize,
    psd_sqrt,
    unitary_resolvent,
)


# ---- orthonormalize / complement ------------------------------------------------

def test_orthonormalize_duplicate_column():
    s = orthonormalize(np.array([[1, 1], [0, 0]]))
    assert s.rank == 1
    assert np.allclose(s.projector(), np.diag([1, 0]))


def test_orthonormalize_normalizes():
    s = orthonormalize(np.array([[1], [1]]))
    assert s.rank == 1
    assert np.allclose(np.abs(s.basis[:, 0]), [2 ** -0.5, 2 ** -0.5])


def test_orthonormalize_rank_threshold():
    s = orthonormalize(np.array([[1, 1], [0, 1e-16]]))
    assert s.rank == 1


def test_orthonormalize_zero_input():
    assert orthonormalize(np.zeros((3, 2))).rank == 0


def test_complement_examples():
    e1 = Subspace(np.array([[1], [0]], dtype=complex))
    assert np.allclose(complement(e1).projector(), np.diag([0, 1]))
    assert complement(Subspace.full(3)).rank == 0
    d = orthonormalize(np.array([[1], [1]]))
    c = complement(d)
    assert np.allclose(c.projector(), 0.5 * np.array([[1, -1], [-1, 1]]))


def test_complement_twice_is_identity(rng):
    for _ in range(10):
        n = rng.integers(1, 7)
        s = orthonormalize(rng.standard_normal((n, rng.integers(0, n + 1))))
        c = complement(s)
        assert s.rank + c.rank == n
        if s.rank and c.rank:
            assert np.linalg.norm(s.basis.conj().T @ c.basis) < 1e-10
        assert np.linalg.norm(complement(c).projector() - s.projector()) < 1e-10


def test_intersect(rng):
    a = Subspace(np.eye(3)[:, :2].astype(complex))
    b = Subspace(np.eye(3)[:, 1:].astype(complex))
    i = intersect(a, b)
    assert i.rank == 1
    assert np.allclose(i.projector(), np.diag([0, 1, 0]))


def test_subspace_rejects_non_orthonormal():
    with pytest.raises(ValueError):
        Subspace(np.array([[1.0], [1.0]]))


# ---- Cayley transform ---------------------------------------------------------

@pytest.mark.parametrize("u,z,expected", [
    ([[1]], 0, 1),
    ([[1]], 0.5, 3),
    ([[1j]], 0.5, 0.6 + 0.8j),
])
def test_cayley_examples(u, z, expected):
    assert np.allclose(cayley_transform(np.array(u, dtype=complex), z), [[expected]])


def test_cayley_infinity():
    assert np.allclose(cayley_transform(np.eye(3), INF), -np.eye(3))


def test_cayley_unit_circle_rejected():
    with pytest.raises(UnitModulusArgument):
        cayley_transform(np.eye(2), np.exp(0.3j))


def test_cayley_batch_matches_single(rng):
    u = random_unitary(4, rng)
    zs = [0.3, 2.0 - 1j, INF, 0j, -0.2j]
    b = cayley_batch(u, zs)
    for z, m in zip(zs, b):
        assert np.allclose(m, cayley_transform(u, z))


def test_unitary_resolvent_at_infinity_is_zero():
    assert np.allclose(unitary_resolvent(np.eye(2), INF), 0)


def test_mirror():
    assert mirror(0) == INF
    assert mirror(INF) == 0
    assert np.isclose(mirror(0.5j), 2j)


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 10 ** 6), n=st.integers(1, 6),
       r=st.floats(0.05, 0.95), t=st.floats(0, 6.28))
def test_cayley_adjoint_and_psd(seed, n, r, t):
    u = random_unitary(n, np.random.default_rng(seed))
    z = r * np.exp(1j * t)
    a, b = cayley_transform(u, z), cayley_transform(u, mirror(z))
    assert np.linalg.norm(a.conj().T + b) < 1e-9
    d = a - b
    assert np.linalg.norm(d - d.conj().T) < 1e-9
    assert np.linalg.eigvalsh(0.5 * (d + d.conj().T)).min() >= -1e-9


# ---- joint eigendecomposition ---------------------------------------------------

def _atoms(u1, u2):
    return [(round(a, 10), round(b, 10)) for a, b, _ in joint_eigendecomposition(u1, u2)]


def test_joint_identity():
    atoms = joint_eigendecomposition(np.eye(2), np.eye(2))
    assert len(atoms) == 1
    assert np.isclose(atoms[0][0], 2 * np.pi) and np.isclose(atoms[0][1], 2 * np.pi)
    assert np.allclose(atoms[0][2], np.eye(2))


def test_joint_diag():
    atoms = joint_eigendecomposition(np.diag([1j, -1j]), np.eye(2))
    assert _atoms(np.diag([1j, -1j]), np.eye(2)) == [
        (round(np.pi / 2, 10), round(2 * np.pi, 10)), (round(3 * np.pi / 2, 10), round(2 * np.pi, 10))]
    assert np.allclose(atoms[0][2], np.diag([1, 0]))
    assert np.allclose(atoms[1][2], np.diag([0, 1]))


def test_joint_split_by_second():
    atoms = _atoms(np.diag([1j, 1j]), np.diag([1, -1]))
    assert sorted(atoms) == sorted([(round(np.pi / 2, 10), round(2 * np.pi, 10)),
                                    (round(np.pi / 2, 10), round(np.pi, 10))])


def test_joint_not_commuting():
    with pytest.raises(NotCommuting):
        joint_eigendecomposition(np.array([[0, 1], [1, 0]]), np.diag([1, -1]))


def test_joint_reconstruction_random(rng):
    for _ in range(10):
        n = rng.integers(1, 9)
        q = random_unitary(n, rng)
        base = rng.integers(1, 4, n) * 2 * np.pi / 3
        u1 = q @ np.diag(np.exp(1j * base)) @ q.conj().T
        u2 = q @ np.diag(np.exp(1j * rng.uniform(0, 6.28, n))) @ q.conj().T
        atoms = joint_eigendecomposition(u1, u2)
        ps = [p for _, _, p in atoms]
        assert np.linalg.norm(sum(ps) - np.eye(n)) < 1e-8
        for i, p in enumerate(ps):
            assert np.linalg.norm(p @ p - p) < 1e-8
            assert np.linalg.norm(p - p.conj().T) < 1e-8
            for q2 in ps[i + 1:]:
                assert np.linalg.norm(p @ q2) < 1e-8
        r1 = sum(np.exp(1j * a) * p for a, _, p in atoms)
        r2 = sum(np.exp(1j * b) * p for _, b, p in atoms)
        assert np.linalg.norm(r1 - u1) < 1e-8 and np.linalg.norm(r2 - u2) < 1e-8
        assert all(0 < a <= 2 * np.pi and 0 < b <= 2 * np.pi for a, b, _ in atoms)


def test_normalize_angle():
    assert normalize_angle(0.0) == 2 * np.pi
    assert np.isclose(normalize_angle(-np.pi / 2), 3 * np.pi / 2)
    assert np.isclose(normalize_angle(5 * np.pi), np.pi)


# ---- conjugations / misc --------------------------------------------------------

def test_conjugation_algebra(rng):
    w = random_unitary(4, rng)
    j = Conjugation(w @ w.T)
    assert j.is_valid()
    assert j.involution_residual() < 1e-12
    x, y = rng.standard_normal(4) + 1j * rng.standard_normal(4), rng.standard_normal(4) + 0j
    # <Jx, Jy> = <y, x>
    assert np.isclose(np.vdot(j(y), j(x)), np.vdot(x, y))
    assert np.allclose(compose_antilinear(j, j), np.eye(4))


def test_psd_sqrt(rng):
    x = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
    a = x @ x.conj().T
    s = psd_sqrt(a)
    assert np.allclose(s @ s, a)
    with pytest.raises(ValueError):
        psd_sqrt(-np.eye(2))


def test_as_unitary_rejects():
    with pytest.raises(ValueError):
        as_unitary(np.array([[2.0]]))
