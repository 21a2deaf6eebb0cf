import numpy as np
import pytest

from gresolvent.errors import UnitModulusArgument
from gresolvent.generate import partial_isometry, random_unitary, unitary_schur_parameter
from gresolvent.linalg import INF, Subspace, orthonormalize
from gresolvent.single import (
    PartialIsometry,
    ResolventSampler,
    SchurParameter,
    chumakin_resolvent,
    chumakin_sampler,
    defect_subspaces,
    disk_grid,
    extension_operator,
    resolvent_from_extension,
    sample_points,
    schur_validation_grid,
    verify_theorem_1_2,
    verify_theorem_1_3,
)

E = np.eye(2, dtype=complex)


def shift():
    """V: e1 -> e2 on C^2."""
    return PartialIsometry(Subspace(E[:, :1]), E[:, 1:])


# ---- defect subspaces -----------------------------------------------------------

def test_defect_trivial():
    v = PartialIsometry.trivial(1)
    for zeta in (0, 0.4, 3.0, INF):
        m, n = defect_subspaces(v, zeta)
        assert m.rank == 0 and n.rank == 1


def test_defect_identity():
    v = PartialIsometry(Subspace.full(2), np.eye(2))
    m, n = defect_subspaces(v, 0)
    assert m.rank == 2 and n.rank == 0


def test_defect_shift():
    v = shift()
    _, n0 = defect_subspaces(v, 0)
    _, ninf = defect_subspaces(v, INF)
    # with M_0 = D(V) = span e1, the complement is span e2; at infinity M = R(V) = span e2
    assert np.allclose(n0.projector(), np.diag([0, 1]))
    assert np.allclose(ninf.projector(), np.diag([1, 0]))
    assert np.allclose(v.defect_source().projector(), np.diag([0, 1]))
    assert np.allclose(v.defect_target().projector(), np.diag([1, 0]))


def test_partial_isometry_rejects_non_isometric():
    with pytest.raises(ValueError):
        PartialIsometry(Subspace(E[:, :1]), 2 * E[:, 1:])


# ---- Chumakin's formula ---------------------------------------------------------

def test_chumakin_trivial_zero():
    v = PartialIsometry.trivial(1)
    phi = SchurParameter.zero(v.defect_source(), v.defect_target())
    for zeta in (0, 0.3, -0.7j):
        assert np.allclose(chumakin_resolvent(v, phi, zeta), [[1]])


def test_chumakin_trivial_half():
    v = PartialIsometry.trivial(1)
    phi = SchurParameter.constant([[0.5]], v.defect_source(), v.defect_target())
    assert np.allclose(chumakin_resolvent(v, phi, 0.4), [[1.25]])


def test_chumakin_shift_swap():
    v = shift()
    phi = SchurParameter.constant([[1]], v.defect_source(), v.defect_target())
    expected = (1 / 0.75) * np.array([[1, 0.5], [0.5, 1]])
    assert np.allclose(chumakin_resolvent(v, phi, 0.5), expected)


def test_chumakin_requires_disk():
    v = shift()
    phi = SchurParameter.zero(v.defect_source(), v.defect_target())
    with pytest.raises(ValueError):
        chumakin_resolvent(v, phi, 1.5)


def test_schur_parameter_polynomial():
    src = Subspace(np.eye(1, dtype=complex))
    phi = SchurParameter(([[0.25]], [[0.5]]), src, src)
    assert phi.degree == 1
    assert np.allclose(phi(0.5), [[0.5]])
    assert phi.is_contractive()
    big = SchurParameter(([[0.8]], [[0.8]]), src, src)
    assert not big.is_contractive()
    assert len(schur_validation_grid()) == 9 * 64


# ---- generalized resolvents from extensions -------------------------------------

def test_extension_zero():
    u = random_unitary(3, np.random.default_rng(0))
    e = np.eye(3)[:, :2]
    assert np.allclose(resolvent_from_extension(e, u, 0), np.eye(2))


def test_extension_compressed():
    e = np.array([[1], [1]]) / np.sqrt(2)
    assert np.allclose(resolvent_from_extension(e, np.diag([1, -1]), 0.5), [[4 / 3]])


def test_extension_scalar():
    assert np.allclose(resolvent_from_extension(np.eye(1), [[1j]], 0.5), [[1 / (1 - 0.5j)]])


def test_extension_circle_rejected():
    with pytest.raises(UnitModulusArgument):
        resolvent_from_extension(np.eye(1), [[1]], 1.0)


def test_chumakin_matches_extension(rng):
    for _ in range(20):
        n = int(rng.integers(1, 7))
        v = partial_isometry(n, int(rng.integers(0, n + 1)), rng)
        phi = unitary_schur_parameter(v, rng)
        u = extension_operator(v, phi, 0.0)
        assert np.linalg.norm(u.conj().T @ u - np.eye(n)) < 1e-10
        for z in disk_grid():
            assert np.linalg.norm(chumakin_resolvent(v, phi, z) - resolvent_from_extension(np.eye(n), u, z)) < 1e-10


def test_chumakin_injective(rng):
    v = partial_isometry(4, 2, rng)
    phi = unitary_schur_parameter(v, rng)
    psi = SchurParameter.constant(0.5 * phi.coefficients[0], phi.source, phi.target)
    gap = max(np.linalg.norm(chumakin_resolvent(v, phi, z) - chumakin_resolvent(v, psi, z))
              for z in disk_grid())
    assert gap > 1e-6


def test_condition_5_for_extensions(rng):
    n = 4
    u = random_unitary(6, rng)
    e = np.linalg.qr(rng.standard_normal((6, n)))[0]
    for z in disk_grid():
        a = resolvent_from_extension(e, u, z)
        b = resolvent_from_extension(e, u, 1 / np.conj(z))
        assert np.linalg.norm(a.conj().T - (np.eye(n) - b)) < 1e-9


def test_sample_points_include_mirrors():
    pts = sample_points()
    assert len(pts) == 80
    assert np.all(np.abs(pts[:40]) < 1) and np.all(np.abs(pts[40:]) > 1)


# ---- verifiers ------------------------------------------------------------------

def _l_space(v, zeta0):
    return orthonormalize(v.domain.basis - zeta0 * v.action)


def test_theorem_1_2_passes_on_chumakin(rng):
    for _ in range(5):
        n = int(rng.integers(1, 5))
        v = partial_isometry(n, int(rng.integers(0, n + 1)), rng)
        r = chumakin_sampler(v, unitary_schur_parameter(v, rng))
        rep = verify_theorem_1_2(r, 0.5, _l_space(v, 0.5))
        assert rep.overall_pass, rep.to_dict()
        assert rep.max_residual <= 1e-8


def test_theorem_1_2_resolvent_of_trivial_operator():
    # resolvent of o_H with Phi = 0: identity inside the disk, zero outside
    v = PartialIsometry.trivial(2)
    r = chumakin_sampler(v, SchurParameter.zero(v.defect_source(), v.defect_target()))
    rep = verify_theorem_1_2(r, 0.3, Subspace.zero(2))
    assert rep.overall_pass


def test_theorem_1_2_literal_constant_identity_breaks_symmetry():
    # R == I on both sides of the circle cannot satisfy R_z^H = I - R_{1/conj z}
    rep = verify_theorem_1_2(ResolventSampler.constant(np.eye(2)), 0.3, Subspace.zero(2))
    assert rep.failed() == ["5"]


def test_theorem_1_2_scaled_fails_condition_2():
    rep = verify_theorem_1_2(ResolventSampler.constant(2 * np.eye(2)), 0.3, Subspace.zero(2))
    assert not rep["2"].passed


def test_theorem_1_3_examples(rng):
    triv = PartialIsometry.trivial(1)
    r = chumakin_sampler(triv, SchurParameter.zero(triv.defect_source(), triv.defect_target()))
    assert verify_theorem_1_3(triv, r).overall_pass

    v = shift()
    r = chumakin_sampler(v, SchurParameter.zero(v.defect_source(), v.defect_target()))
    assert verify_theorem_1_3(v, r).overall_pass

    triv2 = PartialIsometry.trivial(2)
    r_id = chumakin_sampler(triv2, SchurParameter.zero(triv2.defect_source(), triv2.defect_target()))
    rep = verify_theorem_1_3(v, r_id)
    assert not rep["1"].passed
    # the failure is visible at zeta = 0.5 directly
    g = v.domain.basis
    assert np.linalg.norm(r_id(0.5) @ (g - 0.5 * v.action) - g) > 0.1


def test_adjoint_broken_fails_condition_5(rng):
    v = partial_isometry(3, 1, rng)
    good = chumakin_sampler(v, unitary_schur_parameter(v, rng))

    def broken(z):
        if abs(z) < 1:
            return good(z)
        return np.eye(3) - good(1 / np.conj(z))

    rep = verify_theorem_1_3(v, ResolventSampler(3, broken))
    assert not rep["5"].passed


def test_report_dict():
    rep = verify_theorem_1_2(ResolventSampler.constant(2 * np.eye(1)), 0.3, Subspace.zero(1))
    d = rep.to_dict()
    assert set(d) == {"conditions", "overall_pass"}
    assert {"id", "max_residual", "pass"} <= set(d["conditions"][0])
