import numpy as np
import pytest

from gresolvent.errors import CommutantViolation, CommutativityViolated, FrameMismatch, NotInClass
from gresolvent.generate import commutant_parameter, iso_unitary_instance, random_unitary
from gresolvent.isounitary import (
    IsoUnitaryPair,
    build_pair_resolvent_thm41,
    build_theta,
    check_class_SVU,
    godic_lucenko_factor,
    in_class_SVU,
    phi_to_psi,
    psi_to_phi,
    thm41_sampler,
    thm41_w,
)
from gresolvent.linalg import INF, Conjugation, Subspace, cayley_transform, compose_antilinear
from gresolvent.pair import verify_theorem_3_2
from gresolvent.single import PartialIsometry, SchurParameter, disk_grid

E3 = np.eye(3, dtype=complex)


def shift3():
    return PartialIsometry(Subspace(E3[:, :1]), E3[:, 1:2])


def zero_phi(v):
    return SchurParameter.zero(v.defect_source(), v.defect_target())


def instance(rng, dim=4):
    while True:
        v, u, j = iso_unitary_instance(dim, rng)
        if v.domain.rank < dim:
            return IsoUnitaryPair(v, u), j


# ---- class S_VU -----------------------------------------------------------------

def test_identity_unitary_accepts_everything(rng):
    v = shift3()
    pair = IsoUnitaryPair(v, np.eye(3))
    c = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
    phi = SchurParameter.constant(0.9 * c / np.linalg.norm(c, 2), v.defect_source(), v.defect_target())
    assert check_class_SVU(pair, phi) <= 1e-12
    assert in_class_SVU(pair, phi)


def test_zero_is_member_when_domain_invariant(rng):
    for _ in range(5):
        pair, _ = instance(rng)
        assert pair.invariant_domain_residual() <= 1e-10
        assert check_class_SVU(pair, zero_phi(pair.v)) <= 1e-10


def test_commutator_residual_formula():
    alpha = 0.7
    v = shift3()
    u = np.diag([1, 1, np.exp(1j * alpha)])
    pair = IsoUnitaryPair(v, u)
    # N_0 = span{e2, e3} -> N_inf = span{e1, e3}; map e3 -> e1 violates the commutation
    src, tgt = v.defect_source(), v.defect_target()
    m = np.outer(E3[:, 0], E3[:, 2])
    phi = SchurParameter.constant(tgt.basis.conj().T @ m @ src.basis, src, tgt)
    assert np.isclose(check_class_SVU(pair, phi), abs(np.exp(1j * alpha) - 1))


def test_pair_rejects_noncommuting():
    v = PartialIsometry(Subspace.full(2), np.array([[0, 1], [1, 0]], dtype=complex))
    with pytest.raises(CommutativityViolated):
        IsoUnitaryPair(v, np.diag([1, -1]))


# ---- builder --------------------------------------------------------------------

def test_builder_origin(rng):
    pair, _ = instance(rng)
    assert np.allclose(build_pair_resolvent_thm41(pair, zero_phi(pair.v), 0, 0), np.eye(pair.dim))


def test_builder_cayley_only():
    beta = 1.1
    v = PartialIsometry.trivial(1)
    pair = IsoUnitaryPair(v, [[np.exp(1j * beta)]])
    for z1, z2 in [(0.3, 0.5j), (2.0, -0.4), (INF, 0.2), (0.1j, 3j)]:
        r = build_pair_resolvent_thm41(pair, zero_phi(v), z1, z2)
        w = np.exp(1j * beta) * z2
        expected = (1 + w) / (1 - w)
        # W(z1) = I inside the disk; outside it is -I and the factors reverse
        sign = 1 if abs(z1) < 1 else -1
        assert np.isclose(r[0, 0], sign * expected)


def test_builder_constant_scalar_phi():
    c = 0.6 - 0.3j
    v = PartialIsometry.trivial(1)
    pair = IsoUnitaryPair(v, [[1.0]])
    phi = SchurParameter.constant([[c]], v.defect_source(), v.defect_target())
    for z in (0.2, -0.5j, 0.8 * np.exp(2j)):
        assert np.isclose(build_pair_resolvent_thm41(pair, phi, z, 0)[0, 0], (1 + c * z) / (1 - c * z))


def test_builder_rejects_non_member():
    v = shift3()
    pair = IsoUnitaryPair(v, np.diag([1, 1, np.exp(0.7j)]))
    src, tgt = v.defect_source(), v.defect_target()
    phi = SchurParameter.constant(tgt.basis.conj().T @ np.outer(E3[:, 0], E3[:, 2]) @ src.basis, src, tgt)
    with pytest.raises(NotInClass):
        build_pair_resolvent_thm41(pair, phi, 0.2, 0.1)


def test_builder_passes_theorem_3_2(rng):
    for _ in range(4):
        pair, j = instance(rng, int(rng.integers(2, 6)))
        fr = build_theta(j, pair.u, pair.v)
        psi = SchurParameter.constant(commutant_parameter(fr.u0, rng), fr.source, fr.source)
        for phi in (zero_phi(pair.v), psi_to_phi(fr, psi)):
            rep = verify_theorem_3_2(pair.v, pair.unitary_as_isometry(), thm41_sampler(pair, phi))
            assert rep.overall_pass and rep.max_residual <= 1e-8


def test_commutation_chain(rng):
    pair, j = instance(rng)
    fr = build_theta(j, pair.u, pair.v)
    phi = psi_to_phi(fr, SchurParameter.constant(commutant_parameter(fr.u0, rng), fr.source, fr.source))
    s = thm41_sampler(pair, phi)
    for z1 in list(disk_grid()[::3]) + [3.0, INF]:
        w = thm41_w(pair, phi, z1)
        for z2 in (0.0, 0.4j, -2.0, INF):
            r = s(z1, z2)
            assert np.linalg.norm(r - cayley_transform(pair.u, z2) @ w) <= 1e-9
            if not np.isinf(z1) and abs(z1) < 1:
                assert np.linalg.norm(r - w @ cayley_transform(pair.u, z2)) <= 1e-9


def test_exterior_z2_zero_matches_limit(rng):
    pair, j = instance(rng)
    fr = build_theta(j, pair.u, pair.v)
    phi = psi_to_phi(fr, SchurParameter.constant(commutant_parameter(fr.u0, rng), fr.source, fr.source))
    s = thm41_sampler(pair, phi)
    for z1 in (2.0, -1.5j):
        exact = s(z1, 0.0)
        wn = np.linalg.norm(thm41_w(pair, phi, z1), 2)
        for eps in (1e-3, 1e-4):
            # ||U(z) - U(0)|| <= 2|z| / (1 - |z|) for a unitary U
            assert np.linalg.norm(s(z1, eps) - exact, 2) <= 2 * eps / (1 - eps) * wn + 1e-12
        assert np.linalg.norm(s(z1, 1e-7) - exact) <= 1e-6


def test_distinct_parameters_distinct_resolvents(rng):
    pair, j = instance(rng)
    fr = build_theta(j, pair.u, pair.v)
    a = psi_to_phi(fr, SchurParameter.constant(commutant_parameter(fr.u0, rng), fr.source, fr.source))
    b = psi_to_phi(fr, SchurParameter.constant(commutant_parameter(fr.u0, rng), fr.source, fr.source))
    sa, sb = thm41_sampler(pair, a), thm41_sampler(pair, b)
    gap = max(np.linalg.norm(sa(z, 0) - sb(z, 0)) for z in disk_grid())
    assert gap >= 1e-6


# ---- Godic-Lucenko factorization ------------------------------------------------

def test_factor_scalar_phase():
    k, l = godic_lucenko_factor([[-1]])
    assert np.allclose(l.matrix, [[1]]) and np.allclose(k.matrix, [[-1]])
    x = np.array([0.3 + 0.4j])
    assert np.allclose(k(l(x)), -x)


def test_factor_identity():
    k, l = godic_lucenko_factor(np.eye(3))
    assert np.allclose(k.matrix, np.eye(3)) and np.allclose(l.matrix, np.eye(3))


def test_factor_diag():
    k, l = godic_lucenko_factor(np.diag([1j, -1j]))
    assert np.allclose(l.matrix, np.eye(2))
    assert np.allclose(k.matrix, np.diag([1j, -1j]))
    assert k.is_valid() and l.is_valid()


def test_factor_random(rng):
    for n in (1, 2, 5, 9, 16):
        u = random_unitary(n, rng)
        k, l = godic_lucenko_factor(u)
        assert np.linalg.norm(compose_antilinear(k, l) - u) <= 1e-10
        assert k.is_valid(1e-10) and l.is_valid(1e-10)
        assert k.involution_residual() <= 1e-10 and l.involution_residual() <= 1e-10
        x = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        assert np.allclose(k(l(x)), u @ x)


def test_factor_degenerate(rng):
    q = random_unitary(4, rng)
    u = q @ np.diag([1j, 1j, -1, -1]) @ q.conj().T
    k, l = godic_lucenko_factor(u)
    assert np.linalg.norm(compose_antilinear(k, l) - u) <= 1e-10


# ---- Theta and the parameter correspondence ------------------------------------

def test_theta_trivial():
    v = PartialIsometry.trivial(1)
    fr = build_theta(Conjugation.standard(1), np.eye(1), v)
    assert np.allclose(fr.theta, [[1]])


def test_theta_swap_frame():
    e = np.eye(2, dtype=complex)
    v = PartialIsometry(Subspace(e[:, :1]), e[:, 1:])
    j = Conjugation(np.array([[0, 1], [1, 0]]))
    fr = build_theta(j, np.eye(2), v)
    # N_0 = span e2 is sent onto N_inf = span e1
    assert np.allclose(fr.source.projector(), np.diag([0, 1]))
    assert np.allclose(fr.target.projector(), np.diag([1, 0]))
    assert np.isclose(abs(fr.theta[0, 0]), 1)
    assert np.allclose(fr.theta @ fr.theta_inv, np.eye(1))


def test_theta_frame_invariants(rng):
    for _ in range(5):
        pair, j = instance(rng, int(rng.integers(2, 7)))
        fr = build_theta(j, pair.u, pair.v)
        assert fr.intertwining_residual() <= 1e-10
        assert fr.factor_residual() <= 1e-10
        assert np.allclose(fr.theta @ fr.theta_inv, np.eye(fr.target.rank))
        assert np.allclose(fr.theta.conj().T @ fr.theta, np.eye(fr.source.rank))


def test_theta_frame_mismatch(rng):
    pair, j = instance(rng)
    bad = Conjugation(random_unitary(pair.dim, rng))
    with pytest.raises(FrameMismatch):
        build_theta(bad, pair.u, pair.v)


def test_scalar_correspondence():
    gamma = 0.9
    v = PartialIsometry.trivial(1)
    fr = build_theta(Conjugation(np.array([[np.exp(1j * gamma)]])), np.eye(1), v)
    c = 0.3 + 0.2j
    psi = SchurParameter.constant([[c]], fr.source, fr.source)
    phi = psi_to_phi(fr, psi)
    # Theta = J K is linear: e^{i gamma} conj(conj(c)) = e^{i gamma} c
    assert np.isclose(phi.coefficients[0][0, 0], np.exp(1j * gamma) * c)
    assert np.isclose(phi_to_psi(fr, phi).coefficients[0][0, 0], c)


def test_zero_correspondence(rng):
    pair, j = instance(rng)
    fr = build_theta(j, pair.u, pair.v)
    assert np.all(psi_to_phi(fr, SchurParameter.zero(fr.source, fr.source)).coefficients[0] == 0)
    assert np.all(phi_to_psi(fr, zero_phi(pair.v)).coefficients[0] == 0)


def test_bijection_roundtrip(rng):
    found = 0
    while found < 10:
        pair, j = instance(rng, 4)
        if pair.v.defect_source().rank != 2:
            continue
        found += 1
        fr = build_theta(j, pair.u, pair.v)
        psi = SchurParameter.constant(commutant_parameter(fr.u0, rng), fr.source, fr.source)
        phi = psi_to_phi(fr, psi)
        assert check_class_SVU(pair, phi) <= 1e-9
        back = phi_to_psi(fr, phi)
        assert np.max(np.abs(back.coefficients[0] - psi.coefficients[0])) <= 1e-12
        again = psi_to_phi(fr, back)
        assert np.max(np.abs(again.coefficients[0] - phi.coefficients[0])) <= 1e-12


def test_commutant_violation(rng):
    while True:
        pair, j = instance(rng, 5)
        fr = build_theta(j, pair.u, pair.v)
        n = fr.source.rank
        if n >= 2 and not np.allclose(fr.u0, fr.u0[0, 0] * np.eye(n)):
            break
    x = rng.standard_normal((n, n)) + 0j
    with pytest.raises(CommutantViolation):
        psi_to_phi(fr, SchurParameter.constant(0.1 * x, fr.source, fr.source))


def test_phi_not_in_class():
    v = shift3()
    u = np.diag([1, 1, np.exp(0.7j)])
    j = Conjugation(np.array([[0, 1, 0], [1, 0, 0], [0, 0, 1]]))
    fr = build_theta(j, u, v)
    src, tgt = v.defect_source(), v.defect_target()
    phi = SchurParameter.constant(tgt.basis.conj().T @ np.outer(E3[:, 0], E3[:, 2]) @ src.basis, src, tgt)
    with pytest.raises(NotInClass):
        phi_to_psi(fr, phi)
