"""Reconstruction of commuting unitary pairs from two-variable resolvents.

Pipeline: resolvent samples -> operator grid measure (Taylor moments of the
quadratic forms, polarization, Fourier inversion) -> Naimark dilation to a
projection-valued grid measure -> spectral families -> commuting unitaries,
and a certificate that the rebuilt pair reproduces the input resolvent.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np

from .errors import NegativeAtom, NotAResolvent, NotNormalized, OffGridSpectrum
from .linalg import EPS_ORTHO, EPS_PSD, EPS_REC, dagger, psd_sqrt
from .moments import (
    EPS_MOMENT,
    GridOperatorMeasure,
    GridScalarMeasure,
    chart_tables,
    grid_angles,
    invert_grid_measure,
    moments_from_chart_tables,
    periodicity_residual,
    polarize,
)
from .pair import CommutingUnitaryPair, H2Grid, PairSampler, verify_theorem_3_1

EPS_ATOM = 1e-12
EPS_CERT = 1e-7


def _refine_hint(n1: int, n2: int) -> str:
    return f"spectrum may be off the {n1}x{n2} grid; retry with n = ({2 * n1}, {2 * n2})"


def _scalar_measure(tables: Dict[str, np.ndarray], h: np.ndarray, n1: int, n2: int,
                    tol: float) -> GridScalarMeasure:
    quad = {ch: np.einsum("i,abij,j->ab", h.conj(), t, h) for ch, t in tables.items()}
    moments = moments_from_chart_tables(quad, n1, n2, tol=tol)
    scale = max(1.0, float(np.max(np.abs(moments.values))))
    if periodicity_residual(moments, n1, n2) > tol * scale:
        raise OffGridSpectrum(_refine_hint(n1, n2))
    return invert_grid_measure(moments, n1, n2)


def operator_measure_from_sampler(r: PairSampler, n1: int, n2: int, tol_accept: float = 1e-8,
                                  grid: Optional[H2Grid] = None, check: bool = True,
                                  tol_moment: float = EPS_MOMENT) -> GridOperatorMeasure:
    """Recover the operator grid measure behind a pair resolvent.

    Entry ``E[b, a]`` of each atom is the polarized measure
    ``mu(.; e_a, e_b)`` built from the quadratic forms of
    ``e_a + e_b, e_a - e_b, e_a + i e_b, e_a - i e_b``.
    """
    if check:
        report = verify_theorem_3_1(r, grid=grid, tol=tol_accept)
        if not report.overall_pass:
            raise NotAResolvent(f"resolvent conditions fail: {report.failed()}")
    d = r.dim
    tables = chart_tables(r, n1, n2)
    eye = np.eye(d, dtype=complex)
    atoms = np.zeros((n1, n2, d, d), dtype=complex)
    for a in range(d):
        atoms[:, :, a, a] = _scalar_measure(tables, eye[a], n1, n2, tol_moment).weights
        for b in range(d):
            if a == b:
                continue
            parts = [_scalar_measure(tables, eye[a] + c * eye[b], n1, n2, tol_moment)
                     for c in (1, -1, 1j, -1j)]
            atoms[:, :, b, a] = polarize(*parts).weights
    measure = GridOperatorMeasure(atoms)
    if measure.hermitian_residual() > EPS_PSD or measure.min_eigenvalue() < -EPS_PSD:
        raise NegativeAtom(f"atom with eigenvalue {measure.min_eigenvalue():.3e}; "
                           + _refine_hint(n1, n2))
    herm = 0.5 * (atoms + np.conj(np.swapaxes(atoms, -1, -2)))
    return GridOperatorMeasure(herm)


# --------------------------------------------------------------------------
# Naimark dilation
# --------------------------------------------------------------------------


@dataclass
class NaimarkDilation:
    """Projection-valued grid measure on ``C^big`` compressing to ``E``.

    ``cells`` lists the 1-based grid cells that carry a block, in the order
    of the blocks of ``embedding``; ``slices`` gives each block's rows.
    """

    n1: int
    n2: int
    embedding: np.ndarray
    cells: List[Tuple[int, int]]
    slices: List[slice]

    @property
    def small_dim(self) -> int:
        return self.embedding.shape[1]

    @property
    def big_dim(self) -> int:
        return self.embedding.shape[0]

    def projection(self, i: int) -> np.ndarray:
        p = np.zeros((self.big_dim, self.big_dim), dtype=complex)
        s = self.slices[i]
        p[s, s] = np.eye(s.stop - s.start)
        return p

    @property
    def projections(self) -> List[np.ndarray]:
        return [self.projection(i) for i in range(len(self.cells))]

    def projection_of(self, cells) -> np.ndarray:
        """``F(delta)`` for a set of 1-based cells."""
        wanted = set(cells)
        p = np.zeros((self.big_dim, self.big_dim), dtype=complex)
        for i, c in enumerate(self.cells):
            if c in wanted:
                s = self.slices[i]
                p[s, s] = np.eye(s.stop - s.start)
        return p

    def compressed(self) -> GridOperatorMeasure:
        d = self.small_dim
        atoms = np.zeros((self.n1, self.n2, d, d), dtype=complex)
        for (j, k), s in zip(self.cells, self.slices):
            blk = self.embedding[s]
            atoms[j - 1, k - 1] = dagger(blk) @ blk
        return GridOperatorMeasure(atoms)

    def compression_residual(self, e: GridOperatorMeasure) -> float:
        return float(np.max(np.abs(self.compressed().atoms - e.atoms)))

    def pvm_residual(self) -> float:
        """Idempotence, orthogonality and completeness of the projections."""
        ps = self.projections
        worst = float(np.linalg.norm(sum(ps) - np.eye(self.big_dim), 2)) if ps else 0.0
        for i, p in enumerate(ps):
            worst = max(worst, float(np.linalg.norm(p @ p - p, 2)),
                        float(np.linalg.norm(p - dagger(p), 2)))
            for q in ps[i + 1:]:
                worst = max(worst, float(np.linalg.norm(p @ q, 2)))
        return worst


def naimark_dilate(e: GridOperatorMeasure, minimal: bool = False,
                   eps_atom: float = EPS_ATOM, tol: float = EPS_REC) -> NaimarkDilation:
    """Stack square roots of the atoms into an isometry.

    Each nonzero cell gets a block ``E^{1/2}`` (``dim`` rows), or with
    ``minimal`` the range-restricted block ``Lambda^{1/2} Q^H`` (rank rows);
    the block selectors then form a projection-valued measure.
    """
    res = e.normalization_residual()
    if res > tol:
        raise NotNormalized(f"atoms sum to I only up to {res:.3e}")
    blocks, cells, slices = [], [], []
    row = 0
    for j, k in e.cells(eps_atom):
        a = 0.5 * (e.atoms[j - 1, k - 1] + dagger(e.atoms[j - 1, k - 1]))
        if minimal:
            w, q = np.linalg.eigh(a)
            keep = w > eps_atom
            blk = np.sqrt(w[keep])[:, None] * dagger(q[:, keep])
        else:
            blk = psd_sqrt(a)
        if blk.shape[0] == 0:
            continue
        blocks.append(blk)
        cells.append((j, k))
        slices.append(slice(row, row + blk.shape[0]))
        row += blk.shape[0]
    return NaimarkDilation(e.n1, e.n2, np.vstack(blocks), cells, slices)


# --------------------------------------------------------------------------
# Spectral families and unitaries
# --------------------------------------------------------------------------


@dataclass
class SpectralFamilyPair:
    """``F1[j]`` for ``t = 2 pi j / n1`` (``j = 0..n1``) and likewise ``F2``."""

    f1: List[np.ndarray]
    f2: List[np.ndarray]

    def endpoint_residual(self) -> float:
        n = self.f1[0].shape[0]
        eye = np.eye(n)
        return max(float(np.linalg.norm(self.f1[0], 2)), float(np.linalg.norm(self.f2[0], 2)),
                   float(np.linalg.norm(self.f1[-1] - eye, 2)),
                   float(np.linalg.norm(self.f2[-1] - eye, 2)))

    def monotonicity_residual(self) -> float:
        worst = 0.0
        for fam in (self.f1, self.f2):
            for a, b in zip(fam, fam[1:]):
                d = b - a
                worst = max(worst, -float(np.linalg.eigvalsh(0.5 * (d + dagger(d))).min()))
        return worst

    def commutation_residual(self) -> float:
        return max(float(np.linalg.norm(a @ b - b @ a, 2)) for a in self.f1 for b in self.f2)


def build_spectral_families(d: NaimarkDilation, n1: Optional[int] = None,
                            n2: Optional[int] = None) -> SpectralFamilyPair:
    n1 = d.n1 if n1 is None else n1
    n2 = d.n2 if n2 is None else n2
    f1 = [d.projection_of([c for c in d.cells if c[0] <= j]) for j in range(n1 + 1)]
    f2 = [d.projection_of([c for c in d.cells if c[1] <= k]) for k in range(n2 + 1)]
    return SpectralFamilyPair(f1, f2)


def build_commuting_unitaries(fam: SpectralFamilyPair, d: NaimarkDilation) -> CommutingUnitaryPair:
    """``U_k = sum_t e^{i t} dF_k(t)`` over the grid angles."""
    th1, th2 = grid_angles(len(fam.f1) - 1), grid_angles(len(fam.f2) - 1)
    u1 = sum(np.exp(1j * t) * (b - a) for t, a, b in zip(th1, fam.f1, fam.f1[1:]))
    u2 = sum(np.exp(1j * t) * (b - a) for t, a, b in zip(th2, fam.f2, fam.f2[1:]))
    return CommutingUnitaryPair(d.embedding, u1, u2)


# --------------------------------------------------------------------------
# End-to-end
# --------------------------------------------------------------------------


@dataclass
class ReconstructionResult:
    pair: CommutingUnitaryPair
    measure: GridOperatorMeasure
    dilation: NaimarkDilation
    residual: float
    tolerance: float
    grid: dict = field(default_factory=dict)
    hint: str = ""

    @property
    def passed(self) -> bool:
        return self.residual <= self.tolerance

    def to_dict(self) -> dict:
        d = {"residual": self.residual, "tolerance": self.tolerance, "pass": self.passed,
             "grid": self.grid, "small_dim": self.dilation.small_dim,
             "big_dim": self.dilation.big_dim}
        if self.hint:
            d["hint"] = self.hint
        return d


def certify(r: PairSampler, pair: CommutingUnitaryPair, grid: Optional[H2Grid] = None) -> float:
    """Max ``||R_pair(z1, z2) - R(z1, z2)||`` over the grid points."""
    grid = H2Grid.default() if grid is None else grid
    pts = grid.points
    diff = pair.sampler().grid(pts, pts) - r.grid(pts, pts)
    return float(np.max(np.linalg.norm(diff, ord=2, axis=(-2, -1))))


def reconstruct_from_measure(e: GridOperatorMeasure, minimal: bool = False):
    dil = naimark_dilate(e, minimal=minimal)
    fam = build_spectral_families(dil)
    return build_commuting_unitaries(fam, dil), dil


def reconstruct_and_certify(r: PairSampler, n1: int, n2: int, grid: Optional[H2Grid] = None,
                            minimal: bool = False, tol: float = EPS_CERT,
                            tol_accept: float = 1e-8) -> ReconstructionResult:
    grid = H2Grid.default() if grid is None else grid
    measure = operator_measure_from_sampler(r, n1, n2, tol_accept=tol_accept, grid=grid)
    pair, dil = reconstruct_from_measure(measure, minimal=minimal)
    residual = certify(r, pair, grid)
    hint = "" if residual <= tol else _refine_hint(n1, n2)
    info = dict(grid.describe(), n1=n1, n2=n2)
    return ReconstructionResult(pair, measure, dil, residual, tol, info, hint)
