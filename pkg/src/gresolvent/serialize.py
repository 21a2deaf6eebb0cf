"""JSON and CSV encodings.

Complex scalars are ``[re, im]`` pairs, matrices nested row-major lists of
such pairs, and the point at infinity the string ``"inf"``.
"""

from __future__ import annotations

import csv
import io
import json
from typing import Iterable, List

import numpy as np

from .errors import GridMismatch
from .linalg import INF, Conjugation, Subspace, is_infinite
from .moments import GridOperatorMeasure, GridScalarMeasure, MomentTable
from .pair import CommutingUnitaryPair, PairSampler
from .single import PartialIsometry, SchurParameter


def enc_complex(z):
    if is_infinite(z):
        return "inf"
    z = complex(z)
    return [float(z.real), float(z.imag)]


def dec_complex(x) -> complex:
    if isinstance(x, str):
        if x.lower() in ("inf", "infinity"):
            return INF
        raise ValueError(f"bad complex value {x!r}")
    if isinstance(x, (int, float)):
        return complex(x)
    re, im = x
    return complex(float(re), float(im))


def enc_matrix(m) -> list:
    m = np.asarray(m, dtype=complex)
    if m.ndim == 1:
        return [enc_complex(z) for z in m]
    return [enc_matrix(row) for row in m]


def _decode(x):
    if isinstance(x, str):
        return dec_complex(x)
    if isinstance(x, list) and len(x) == 2 and all(isinstance(t, (int, float)) for t in x):
        return dec_complex(x)
    if isinstance(x, list):
        return [_decode(y) for y in x]
    raise ValueError(f"bad matrix entry {x!r}")


def dec_matrix(data, shape=None) -> np.ndarray:
    m = np.array(_decode(data), dtype=complex)
    if shape is not None:
        m = m.reshape(shape)
    elif m.ndim == 1 and m.size == 0:
        m = m.reshape(0, 0)
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix has non-finite entries")
    return m


def dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True)


# --------------------------------------------------------------------------
# Objects
# --------------------------------------------------------------------------


def subspace_to_json(s: Subspace) -> dict:
    return {"ambient_dim": s.ambient_dim, "basis": enc_matrix(s.basis)}


def subspace_from_json(d: dict) -> Subspace:
    n = int(d["ambient_dim"])
    b = dec_matrix(d["basis"])
    return Subspace(b.reshape(n, -1) if b.size else np.zeros((n, 0), dtype=complex))


def partial_isometry_to_json(v: PartialIsometry) -> dict:
    return {"dim": v.dim, "domain_basis": enc_matrix(v.domain.basis), "action": enc_matrix(v.action)}


def partial_isometry_from_json(d: dict) -> PartialIsometry:
    n = int(d["dim"])
    b = dec_matrix(d["domain_basis"])
    a = dec_matrix(d["action"])
    b = b.reshape(n, -1) if b.size else np.zeros((n, 0), dtype=complex)
    return PartialIsometry(Subspace(b), a.reshape(n, b.shape[1]))


def schur_to_json(phi: SchurParameter) -> dict:
    return {"degree": phi.degree, "coefficients": [enc_matrix(c) for c in phi.coefficients],
            "source_basis": subspace_to_json(phi.source),
            "target_basis": subspace_to_json(phi.target)}


def schur_from_json(d: dict) -> SchurParameter:
    src, tgt = subspace_from_json(d["source_basis"]), subspace_from_json(d["target_basis"])
    coeffs = [dec_matrix(c).reshape(tgt.rank, src.rank) for c in d["coefficients"]]
    return SchurParameter(tuple(coeffs), src, tgt)


def pair_to_json(p: CommutingUnitaryPair) -> dict:
    return {"small_dim": p.small_dim, "big_dim": p.big_dim, "embedding": enc_matrix(p.embedding),
            "U1": enc_matrix(p.u1), "U2": enc_matrix(p.u2)}


def pair_from_json(d: dict) -> CommutingUnitaryPair:
    small, big = int(d["small_dim"]), int(d["big_dim"])
    return CommutingUnitaryPair(dec_matrix(d["embedding"], (big, small)),
                                dec_matrix(d["U1"], (big, big)), dec_matrix(d["U2"], (big, big)))


def conjugation_to_json(c: Conjugation) -> list:
    return enc_matrix(c.matrix)


def measure_to_json(m) -> dict:
    if isinstance(m, GridScalarMeasure):
        atoms = [[j, k, enc_complex(w)] for j, k, w in m.atoms()]
        return {"n1": m.n1, "n2": m.n2, "dim": 1, "atoms": atoms}
    atoms = [[j, k, enc_matrix(m.atoms[j - 1, k - 1])] for j, k in m.cells(0.0)]
    return {"n1": m.n1, "n2": m.n2, "dim": m.dim, "atoms": atoms}


def measure_from_json(d: dict):
    n1, n2, dim = int(d["n1"]), int(d["n2"]), int(d["dim"])
    if dim == 1 and d["atoms"] and not isinstance(d["atoms"][0][2][0], list):
        return GridScalarMeasure.from_atoms(n1, n2, [(j, k, dec_complex(w)) for j, k, w in d["atoms"]])
    atoms = np.zeros((n1, n2, dim, dim), dtype=complex)
    for j, k, w in d["atoms"]:
        atoms[int(j) - 1, int(k) - 1] = dec_matrix(w, (dim, dim))
    return GridOperatorMeasure(atoms)


def dilation_to_json(dil) -> dict:
    return {"small_dim": dil.small_dim, "big_dim": dil.big_dim,
            "embedding": enc_matrix(dil.embedding),
            "cells": [list(c) for c in dil.cells],
            "projections": [enc_matrix(p) for p in dil.projections]}


def frame_to_json(fr) -> dict:
    return {"J": conjugation_to_json(fr.j), "U": enc_matrix(fr.u),
            "V": partial_isometry_to_json(fr.v), "K": conjugation_to_json(fr.k),
            "L": conjugation_to_json(fr.l), "Theta": enc_matrix(fr.theta),
            "source_basis": subspace_to_json(fr.source), "target_basis": subspace_to_json(fr.target)}


# --------------------------------------------------------------------------
# Tabulated samples
# --------------------------------------------------------------------------


def _key(z):
    if is_infinite(z):
        return ("inf",)
    z = complex(z)
    return (round(z.real, 12), round(z.imag, 12))


def samples_to_json(dim: int, points1: Iterable, points2: Iterable, values: np.ndarray) -> dict:
    """Tensor-grid block of samples ``values[a, b] = R(points1[a], points2[b])``."""
    return {"z1": [enc_complex(z) for z in points1], "z2": [enc_complex(z) for z in points2],
            "values": enc_matrix(np.asarray(values).reshape(-1, dim, dim))}


class TabulatedSampler(PairSampler):
    """Pair sampler answering only at tabulated points."""

    def __init__(self, dim: int, blocks: List[dict]):
        table = {}
        for blk in blocks:
            z1 = [dec_complex(z) for z in blk["z1"]]
            z2 = [dec_complex(z) for z in blk["z2"]]
            vals = dec_matrix(blk["values"]).reshape(len(z1), len(z2), dim, dim)
            for a, x in enumerate(z1):
                for b, y in enumerate(z2):
                    table[(_key(x), _key(y))] = vals[a, b]
        self._table = table
        super().__init__(dim, self._lookup, exact_infinity=True)

    def _lookup(self, z1, z2):
        try:
            return self._table[(_key(z1), _key(z2))]
        except KeyError:
            raise GridMismatch(f"no sample at ({z1}, {z2})") from None

    def grid(self, z1s, z2s) -> np.ndarray:
        return np.array([[self._lookup(a, b) for b in z2s] for a in z1s])

    def scaled(self, factor: complex) -> "TabulatedSampler":
        out = object.__new__(TabulatedSampler)
        out._table = {k: factor * v for k, v in self._table.items()}
        PairSampler.__init__(out, self.dim, out._lookup, exact_infinity=True)
        return out


# --------------------------------------------------------------------------
# CSV
# --------------------------------------------------------------------------


def moments_to_csv(t: MomentTable) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["k", "l", "re_s", "im_s"])
    for k, l in t.indices():
        s = complex(np.asarray(t[k, l]).ravel()[0])
        w.writerow([k, l, repr(s.real), repr(s.imag)])
    return buf.getvalue()


def sampled_function_to_csv(points1, points2, values: np.ndarray) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["re_z1", "im_z1", "re_z2", "im_z2", "re_f", "im_f"])
    for a, x in enumerate(points1):
        for b, y in enumerate(points2):
            x1 = (INF, 0.0) if is_infinite(x) else (complex(x).real, complex(x).imag)
            y1 = (INF, 0.0) if is_infinite(y) else (complex(y).real, complex(y).imag)
            f = complex(values[a, b])
            w.writerow([repr(float(x1[0])), repr(float(x1[1])), repr(float(y1[0])),
                        repr(float(y1[1])), repr(f.real), repr(f.imag)])
    return buf.getvalue()
