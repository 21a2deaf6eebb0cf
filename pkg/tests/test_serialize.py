import json

import numpy as np
import pytest

from gresolvent import generate as gen
from gresolvent import serialize as ser
from gresolvent.errors import GridMismatch
from gresolvent.linalg import INF, Subspace
from gresolvent.moments import GridOperatorMeasure, MomentTable
from gresolvent.pair import H2Grid
from gresolvent.single import SchurParameter


def roundtrip(obj):
    return json.loads(ser.dumps(obj))


def test_complex_codec():
    for z in (0, 1.5, -2j, 3 + 4j, 1e-300 - 1e300j):
        assert ser.dec_complex(ser.enc_complex(z)) == complex(z)
    assert ser.enc_complex(INF) == "inf"
    assert np.isinf(ser.dec_complex("inf"))
    with pytest.raises(ValueError):
        ser.dec_complex("nan-ish")


def test_matrix_codec(rng):
    m = gen.random_complex((3, 4), rng)
    assert np.array_equal(ser.dec_matrix(roundtrip(ser.enc_matrix(m))), m)
    assert ser.dec_matrix([]).shape == (0, 0)
    with pytest.raises(ValueError):
        ser.dec_matrix([[[1.0, 0.0], "inf"]])
    with pytest.raises(ValueError):
        ser.dec_matrix([[1.0, 2.0, 3.0]] * 2 + [[{"x": 1}]])


def test_partial_isometry_roundtrip(rng):
    for rank in (0, 2, 4):
        v = gen.partial_isometry(4, rank, rng)
        w = ser.partial_isometry_from_json(roundtrip(ser.partial_isometry_to_json(v)))
        assert np.allclose(w.matrix(), v.matrix())


def test_subspace_roundtrip(rng):
    s = Subspace(gen.random_isometry(5, 2, rng))
    t = ser.subspace_from_json(roundtrip(ser.subspace_to_json(s)))
    assert np.allclose(t.projector(), s.projector())
    assert ser.subspace_from_json(roundtrip(ser.subspace_to_json(Subspace.zero(3)))).rank == 0


def test_schur_roundtrip(rng):
    v = gen.partial_isometry(4, 2, rng)
    phi = gen.contractive_schur_parameter(v, rng, degree=2)
    psi = ser.schur_from_json(roundtrip(ser.schur_to_json(phi)))
    for z in (0, 0.3j, -0.7):
        assert np.allclose(psi.operator(z), phi.operator(z))
    zero = SchurParameter.zero(Subspace.zero(3), Subspace.zero(3))
    assert ser.schur_from_json(roundtrip(ser.schur_to_json(zero))).coefficients[0].shape == (0, 0)


def test_pair_roundtrip(rng):
    p = gen.commuting_pair(2, 5, 4, 4, rng)
    q = ser.pair_from_json(roundtrip(ser.pair_to_json(p)))
    assert np.array_equal(q.u1, p.u1) and np.array_equal(q.embedding, p.embedding)


def test_measure_roundtrip(rng):
    m = gen.operator_measure(2, 4, 4, rng)
    back = ser.measure_from_json(roundtrip(ser.measure_to_json(m)))
    assert isinstance(back, GridOperatorMeasure)
    assert np.allclose(back.atoms, m.atoms)
    s = gen.scalar_measure(3, 5, rng, n_atoms=4)
    sb = ser.measure_from_json(roundtrip(ser.measure_to_json(s)))
    assert np.allclose(sb.weights, s.weights)


def test_tabulated_sampler(rng):
    p = gen.commuting_pair(2, 4, 4, 4, rng)
    r = p.sampler()
    pts = H2Grid.default().points
    blk = roundtrip(ser.samples_to_json(2, pts, pts[:5], r.grid(pts, pts[:5])))
    t = ser.TabulatedSampler(2, [blk])
    assert np.allclose(t(pts[3], pts[4]), r(pts[3], pts[4]))
    assert np.allclose(t(INF, pts[0]), r(INF, pts[0]))
    assert np.allclose(t.scaled(2.0)(pts[1], pts[2]), 2 * r(pts[1], pts[2]))
    with pytest.raises(GridMismatch):
        t(0.123456, 0.5)


def test_moments_csv():
    vals = np.arange(9, dtype=complex).reshape(3, 3) + 1j
    text = ser.moments_to_csv(MomentTable(vals, (1, 1)))
    lines = text.strip().split("\n")
    assert lines[0] == "k,l,re_s,im_s"
    assert len(lines) == 10
    assert lines[1].split(",")[:2] == ["-1", "-1"]


def test_function_csv():
    text = ser.sampled_function_to_csv([0.5, INF], [1j], np.array([[1 + 2j], [3.0]]))
    rows = [r.split(",") for r in text.strip().split("\n")]
    assert rows[1] == ["0.5", "0.0", "0.0", "1.0", "1.0", "2.0"]
    assert rows[2][0] == "inf"
