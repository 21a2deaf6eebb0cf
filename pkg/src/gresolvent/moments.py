"""Measures on uniform torus grids and their moments.

Atoms sit at ``(2 pi j / n1, 2 pi k / n2)`` with ``j = 1..n1``, ``k = 1..n2``;
array index ``[j - 1, k - 1]`` holds the atom for ``(j, k)``.  Moments of such
measures can be read off the Taylor coefficients of the associated
two-variable kernel function on four charts (``z`` or ``u = 1/z`` in each
variable), and grid measures are recovered from moments by a finite Fourier
transform.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Dict, Optional, Sequence, Tuple

import numpy as np

from .errors import ChartInconsistency, GridMismatch
from .linalg import EPS_PSD, EPS_REC, INF, TWO_PI, dagger, is_infinite
from .pair import H2Grid, PairSampler, herglotz_kernel

EPS_MOMENT = 1e-8
COEFF_FLOOR = 1e-13


def grid_angles(n: int) -> np.ndarray:
    """``2 pi j / n`` for ``j = 1..n``."""
    return TWO_PI * np.arange(1, n + 1) / n


# --------------------------------------------------------------------------
# Measures
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class GridScalarMeasure:
    """Complex weights ``w[j-1, k-1]`` on the ``n1 x n2`` grid."""

    weights: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=complex)
        if w.ndim != 2:
            raise ValueError("weights must be a 2-d array")
        object.__setattr__(self, "weights", w)

    @classmethod
    def from_atoms(cls, n1: int, n2: int, atoms) -> "GridScalarMeasure":
        """Build from ``(j, k, weight)`` triples (1-based grid indices)."""
        w = np.zeros((n1, n2), dtype=complex)
        for j, k, val in atoms:
            w[j - 1, k - 1] += val
        return cls(w)

    @classmethod
    def zeros(cls, n1: int, n2: int) -> "GridScalarMeasure":
        return cls(np.zeros((n1, n2), dtype=complex))

    @property
    def shape(self) -> Tuple[int, int]:
        return self.weights.shape

    @property
    def n1(self) -> int:
        return self.weights.shape[0]

    @property
    def n2(self) -> int:
        return self.weights.shape[1]

    def total_mass(self) -> complex:
        return complex(self.weights.sum())

    def is_nonnegative(self, tol: float = EPS_PSD) -> bool:
        w = self.weights
        return bool(np.all(np.abs(w.imag) <= tol) and np.all(w.real >= -tol))

    def atoms(self, tol: float = 0.0):
        out = []
        for j, k in zip(*np.nonzero(np.abs(self.weights) > tol)):
            out.append((int(j) + 1, int(k) + 1, complex(self.weights[j, k])))
        return out

    def __add__(self, other: "GridScalarMeasure") -> "GridScalarMeasure":
        _same_grid(self, other)
        return GridScalarMeasure(self.weights + other.weights)

    def __sub__(self, other: "GridScalarMeasure") -> "GridScalarMeasure":
        _same_grid(self, other)
        return GridScalarMeasure(self.weights - other.weights)

    def scaled(self, c: complex) -> "GridScalarMeasure":
        return GridScalarMeasure(c * self.weights)


def _same_grid(*ms: GridScalarMeasure) -> None:
    shapes = {m.shape for m in ms}
    if len(shapes) != 1:
        raise GridMismatch(f"measures live on different grids: {sorted(shapes)}")


@dataclass(frozen=True)
class GridOperatorMeasure:
    """Matrix atoms ``E[j-1, k-1]`` (each ``dim x dim``) on the ``n1 x n2`` grid."""

    atoms: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.atoms, dtype=complex)
        if a.ndim != 4 or a.shape[2] != a.shape[3]:
            raise ValueError("atoms must have shape (n1, n2, dim, dim)")
        object.__setattr__(self, "atoms", a)

    @classmethod
    def from_cells(cls, n1: int, n2: int, cells) -> "GridOperatorMeasure":
        """Build from ``(j, k, matrix)`` triples (1-based grid indices)."""
        cells = list(cells)
        dim = np.asarray(cells[0][2]).shape[0]
        a = np.zeros((n1, n2, dim, dim), dtype=complex)
        for j, k, m in cells:
            a[j - 1, k - 1] += np.asarray(m, dtype=complex)
        return cls(a)

    @property
    def n1(self) -> int:
        return self.atoms.shape[0]

    @property
    def n2(self) -> int:
        return self.atoms.shape[1]

    @property
    def dim(self) -> int:
        return self.atoms.shape[2]

    def total(self) -> np.ndarray:
        return self.atoms.sum(axis=(0, 1))

    def normalization_residual(self) -> float:
        return float(np.linalg.norm(self.total() - np.eye(self.dim), 2))

    def hermitian_residual(self) -> float:
        return float(np.max(np.abs(self.atoms - np.conj(np.swapaxes(self.atoms, -1, -2)))))

    def min_eigenvalue(self) -> float:
        h = 0.5 * (self.atoms + np.conj(np.swapaxes(self.atoms, -1, -2)))
        return float(np.linalg.eigvalsh(h).min())

    def max_eigenvalue(self) -> float:
        h = 0.5 * (self.atoms + np.conj(np.swapaxes(self.atoms, -1, -2)))
        return float(np.linalg.eigvalsh(h).max())

    def is_valid(self, tol_psd: float = EPS_PSD, tol_rec: float = EPS_REC) -> bool:
        return (self.hermitian_residual() <= tol_psd and self.min_eigenvalue() >= -tol_psd
                and self.normalization_residual() <= tol_rec)

    def cells(self, tol: float = 1e-12):
        """1-based ``(j, k)`` indices of atoms with spectral norm above ``tol``."""
        norms = np.linalg.norm(self.atoms, ord=2, axis=(-2, -1))
        return [(int(j) + 1, int(k) + 1) for j, k in zip(*np.nonzero(norms > tol))]

    def scalar(self, h, g=None) -> GridScalarMeasure:
        """The scalar measure ``(E(.) h, g) = g^H E h``."""
        h = np.asarray(h, dtype=complex).ravel()
        g = h if g is None else np.asarray(g, dtype=complex).ravel()
        return GridScalarMeasure(np.einsum("i,abij,j->ab", g.conj(), self.atoms, h))


# --------------------------------------------------------------------------
# Moment tables
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class MomentTable:
    """Moments ``s[k, l]`` stored with index offsets.

    Trigonometric tables cover ``|k| <= K, |l| <= L`` (offsets ``K, L``);
    power tables cover ``0 <= m <= M, 0 <= n <= N`` (offsets 0).
    """

    values: np.ndarray
    offset: Tuple[int, int]
    kind: str = "trigonometric"

    @property
    def K(self) -> int:
        return self.values.shape[0] - 1 - self.offset[0]

    @property
    def L(self) -> int:
        return self.values.shape[1] - 1 - self.offset[1]

    def __getitem__(self, kl):
        k, l = kl
        i, j = k + self.offset[0], l + self.offset[1]
        if not (0 <= i < self.values.shape[0] and 0 <= j < self.values.shape[1]):
            raise IndexError(f"moment ({k}, {l}) outside the table")
        return self.values[i, j]

    def indices(self):
        for i in range(self.values.shape[0]):
            for j in range(self.values.shape[1]):
                yield i - self.offset[0], j - self.offset[1]

    def window(self, n1: int, n2: int) -> np.ndarray:
        """``s[k, l]`` for ``k = 0..n1-1``, ``l = 0..n2-1``."""
        k0, l0 = self.offset
        if self.kind != "trigonometric" or self.K < n1 - 1 or self.L < n2 - 1:
            raise ValueError("moment table does not cover the requested window")
        return self.values[k0:k0 + n1, l0:l0 + n2]

    def conjugate_symmetry_residual(self) -> float:
        """Max ``|s[-k,-l] - conj s[k,l]|`` (zero for real measures)."""
        if self.kind != "trigonometric" or self.K != self.offset[0] or self.L != self.offset[1]:
            raise ValueError("needs a symmetric trigonometric table")
        flipped = self.values[::-1, ::-1]
        if flipped.ndim == 4:
            flipped = np.swapaxes(flipped, -1, -2)
        return float(np.max(np.abs(flipped - self.values.conj())))

    def max_abs_difference(self, other: "MomentTable") -> float:
        if self.values.shape != other.values.shape or self.offset != other.offset:
            raise GridMismatch("moment tables have different index ranges")
        return float(np.max(np.abs(self.values - other.values)))


def _exponentials(n: int, orders: np.ndarray) -> np.ndarray:
    return np.exp(1j * np.outer(orders, grid_angles(n)))


def moments_from_measure(m: GridScalarMeasure, K: int, L: int) -> MomentTable:
    """``s[k, l] = sum w e^{i k t1} e^{i l t2}`` for ``|k| <= K``, ``|l| <= L``."""
    e1 = _exponentials(m.n1, np.arange(-K, K + 1))
    e2 = _exponentials(m.n2, np.arange(-L, L + 1))
    return MomentTable(e1 @ m.weights @ e2.T, (K, L))


def operator_moments(e: GridOperatorMeasure, K: int, L: int) -> MomentTable:
    e1 = _exponentials(e.n1, np.arange(-K, K + 1))
    e2 = _exponentials(e.n2, np.arange(-L, L + 1))
    return MomentTable(np.einsum("ka,lb,abij->klij", e1, e2, e.atoms), (K, L))


def power_moments(m: GridScalarMeasure, M: int, N: int) -> MomentTable:
    """``r[m, n] = sum w t1^m t2^n`` with grid angles in ``(0, 2 pi]``."""
    p1 = grid_angles(m.n1)[None, :] ** np.arange(M + 1)[:, None]
    p2 = grid_angles(m.n2)[None, :] ** np.arange(N + 1)[:, None]
    return MomentTable(p1 @ m.weights @ p2.T, (0, 0), kind="power")


# --------------------------------------------------------------------------
# Kernel functions
# --------------------------------------------------------------------------


def _kernel_matrix(zs: Sequence, n: int) -> np.ndarray:
    """``k(z_a, t_j)`` for all sample points and grid angles."""
    th = grid_angles(n)
    out = np.empty((len(zs), n), dtype=complex)
    for a, z in enumerate(zs):
        out[a] = -1.0 if is_infinite(z) else [herglotz_kernel(z, t) for t in th]
    return out


class KernelFunction:
    """``f(z1, z2) = sum_{j,k} w_jk k(z1, t1_j) k(z2, t2_k)`` for a scalar grid measure."""

    def __init__(self, m: GridScalarMeasure):
        self.measure = m

    def __call__(self, z1, z2) -> complex:
        return complex(self.grid([z1], [z2])[0, 0])

    def grid(self, z1s, z2s) -> np.ndarray:
        k1 = _kernel_matrix(list(z1s), self.measure.n1)
        k2 = _kernel_matrix(list(z2s), self.measure.n2)
        return k1 @ self.measure.weights @ k2.T


def kernel_function(m: GridScalarMeasure) -> KernelFunction:
    return KernelFunction(m)


def operator_kernel_sampler(e: GridOperatorMeasure) -> PairSampler:
    """Pair sampler ``sum E_jk k(z1, t1_j) k(z2, t2_k)`` of an operator grid measure."""

    def grid(z1s, z2s):
        k1 = _kernel_matrix(list(z1s), e.n1)
        k2 = _kernel_matrix(list(z2s), e.n2)
        return np.einsum("aj,bk,jkxy->abxy", k1, k2, e.atoms)

    return PairSampler(e.dim, lambda z1, z2: grid([z1], [z2])[0, 0], grid_func=grid,
                       exact_infinity=True)


# --------------------------------------------------------------------------
# Taylor coefficients on the four charts
# --------------------------------------------------------------------------

CHARTS = ("zz", "uz", "zu", "uu")


def fft_parameters(n1: int, n2: int) -> Tuple[float, int]:
    """Circle radius and node count for Taylor extraction up to order ``n - 1``.

    Coefficients of order ``k + l`` are divided by ``r^(k+l)``; a small radius
    amplifies rounding at high orders, so the radius grows with the grid.
    The node count keeps the aliasing term ``r^N`` below ``1e-15``.
    """
    n = max(n1, n2)
    r = 0.5 if n <= 8 else 0.8
    need = max(4 * n, math.ceil(math.log(1e-15) / math.log(r)))
    return r, 4 * math.ceil(need / 4)


def chart_nodes(radius: float, n_nodes: int) -> Dict[str, np.ndarray]:
    """Sample points in each variable: ``z = r w`` (interior) or ``z = 1/(r w)`` (exterior)."""
    w = np.exp(2j * np.pi * np.arange(n_nodes) / n_nodes)
    return {"z": radius * w, "u": 1.0 / (radius * w)}


def chart_tables(f, n1: int, n2: int, radius: Optional[float] = None,
                 n_nodes: Optional[int] = None) -> Dict[str, np.ndarray]:
    """Values of ``f`` on the node grid of each chart.

    ``f`` may be a scalar function, or any object with a ``grid(z1s, z2s)``
    method (extra trailing axes, e.g. matrix values, are carried along).
    """
    r0, n0 = fft_parameters(n1, n2)
    radius = r0 if radius is None else radius
    n_nodes = n0 if n_nodes is None else n_nodes
    nodes = chart_nodes(radius, n_nodes)
    out = {}
    for chart in CHARTS:
        a, b = nodes[chart[0]], nodes[chart[1]]
        if hasattr(f, "grid"):
            out[chart] = np.asarray(f.grid(list(a), list(b)), dtype=complex)
        else:
            out[chart] = np.array([[complex(f(x, y)) for y in b] for x in a])
    return out


def _taylor(table: np.ndarray, radius: float, k_max: int, l_max: int) -> np.ndarray:
    n_nodes = table.shape[0]
    c = np.fft.fft2(table, axes=(0, 1))[:k_max + 1, :l_max + 1] / n_nodes ** 2
    k = np.arange(k_max + 1)[:, None]
    l = np.arange(l_max + 1)[None, :]
    scale = radius ** (k + l)
    if c.ndim == 4:
        scale = scale[:, :, None, None]
    c = c / scale
    c[np.abs(c) < COEFF_FLOOR] = 0.0
    return c


def moments_from_chart_tables(tables: Dict[str, np.ndarray], n1: int, n2: int,
                              radius: Optional[float] = None,
                              tol: float = EPS_MOMENT) -> MomentTable:
    """Apply the Taylor-coefficient/moment dictionary to the four chart tables.

    Writing ``c`` for the chart coefficient of ``z1^k z2^l`` (with ``u`` in
    place of ``z`` on exterior charts), moments with both indices nonzero get
    ``c/4``, one index nonzero ``c/2``, none ``c``; each exterior variable
    contributes a sign ``-1`` and reverses the sign of its index.
    """
    if radius is None:
        radius = fft_parameters(n1, n2)[0]
    K, L = n1 - 1, n2 - 1
    c = {ch: _taylor(tables[ch], radius, K, L) for ch in CHARTS}
    tail = c["zz"].shape[2:]
    s = np.zeros((2 * K + 1, 2 * L + 1) + tail, dtype=complex)

    def put(k, l, val):
        s[k + K, l + L] = val

    def factor(k, l):
        return (2.0 if k else 1.0) * (2.0 if l else 1.0)

    for k in range(K + 1):
        for l in range(L + 1):
            put(k, l, c["zz"][k, l] / factor(k, l))
    for k in range(1, K + 1):
        for l in range(L + 1):
            put(-k, l, -c["uz"][k, l] / factor(k, l))
    for k in range(K + 1):
        for l in range(1, L + 1):
            put(k, -l, -c["zu"][k, l] / factor(k, l))
    for k in range(1, K + 1):
        for l in range(1, L + 1):
            put(-k, -l, c["uu"][k, l] / factor(k, l))

    table = MomentTable(s, (K, L))
    # charts overlap on the axes; their coefficients must agree
    checks = [(c["uz"][0, 0], -table[0, 0]), (c["zu"][0, 0], -table[0, 0]),
              (c["uu"][0, 0], table[0, 0])]
    for l in range(1, L + 1):
        checks.append((c["uz"][0, l], -2 * table[0, l]))
        checks.append((c["uu"][0, l], 2 * table[0, -l]))
    for k in range(1, K + 1):
        checks.append((c["zu"][k, 0], -2 * table[k, 0]))
        checks.append((c["uu"][k, 0], 2 * table[-k, 0]))
    scale = max(1.0, float(np.max(np.abs(s))))
    worst = max(float(np.max(np.abs(a - b))) for a, b in checks)
    if worst > tol * scale:
        raise ChartInconsistency(f"charts disagree on shared moments by {worst:.3e}")
    return table


def taylor_moments_from_sampler(f, n1: int, n2: int, tol: float = EPS_MOMENT) -> MomentTable:
    """Trigonometric moments ``s[k, l]``, ``|k| < n1``, ``|l| < n2``, of the
    grid measure behind the two-variable function ``f``."""
    return moments_from_chart_tables(chart_tables(f, n1, n2), n1, n2, tol=tol)


def periodicity_residual(t: MomentTable, n1: int, n2: int) -> float:
    """Max ``|s[k, l] - s[k mod n1, l mod n2]|`` over the table.

    Moments of a measure on the ``n1 x n2`` grid are periodic; a nonzero
    residual means the spectrum is off the grid.
    """
    worst = 0.0
    for k, l in t.indices():
        k2, l2 = k % n1, l % n2
        if (k, l) != (k2, l2) and k2 <= t.K and l2 <= t.L:
            worst = max(worst, float(np.max(np.abs(t[k, l] - t[k2, l2]))))
    return worst


def invert_grid_measure(t: MomentTable, n1: int, n2: int) -> GridScalarMeasure:
    """Weights of the ``n1 x n2`` grid measure with the given moments."""
    s = t.window(n1, n2)
    w = np.fft.fft2(s) / (n1 * n2)
    # fft index 0 is the angle 2 pi, stored last
    return GridScalarMeasure(np.roll(w, (-1, -1), axis=(0, 1)))


# --------------------------------------------------------------------------
# Polarization and uniqueness
# --------------------------------------------------------------------------


def polarize(m_plus: GridScalarMeasure, m_minus: GridScalarMeasure,
             m_iplus: GridScalarMeasure, m_iminus: GridScalarMeasure) -> GridScalarMeasure:
    """``mu(h, g)`` from the measures of ``h + g, h - g, h + ig, h - ig``."""
    _same_grid(m_plus, m_minus, m_iplus, m_iminus)
    w = 0.25 * (m_plus.weights - m_minus.weights
                + 1j * m_iplus.weights - 1j * m_iminus.weights)
    return GridScalarMeasure(w)


def hermitian_symmetry_check(mu_hg: GridScalarMeasure, mu_gh: GridScalarMeasure) -> float:
    _same_grid(mu_hg, mu_gh)
    return float(np.max(np.abs(mu_gh.weights - mu_hg.weights.conj())))


@dataclass
class UniquenessVerdict:
    max_delta: float
    combination_max: float
    witness: Optional[Tuple[complex, complex]]
    tolerance: float

    @property
    def consistent(self) -> bool:
        """False only if the functions agree while the measures differ."""
        return not (self.max_delta <= self.tolerance and self.combination_max > self.tolerance)

    def to_dict(self) -> dict:
        w = None if self.witness is None else [[z.real, z.imag] for z in self.witness]
        return {"max_delta": self.max_delta, "combination_max": self.combination_max,
                "witness": w, "tolerance": self.tolerance, "consistent": self.consistent}


def uniqueness_witness(sigmas: Sequence[GridScalarMeasure], samplers: Optional[Sequence] = None,
                       points: Optional[Sequence] = None,
                       tol: float = EPS_MOMENT) -> UniquenessVerdict:
    """Compare ``g1 - g2 + i g3 - i g4`` on sample points with
    ``s1 - s2 + i s3 - i s4``.

    When the function combination vanishes on the samples the measure
    combination must vanish too; otherwise the sample point of largest
    ``|Delta|`` is reported as the witness.
    """
    if len(sigmas) != 4:
        raise ValueError("need four measures")
    _same_grid(*sigmas)
    if samplers is None:
        samplers = [kernel_function(s) for s in sigmas]
    if points is None:
        g = H2Grid.default()
        points = [p for p in g.points if not is_infinite(p)]
    points = list(points)
    coeffs = (1.0, -1.0, 1j, -1j)
    delta = np.zeros((len(points), len(points)), dtype=complex)
    for c, f in zip(coeffs, samplers):
        if hasattr(f, "grid"):
            delta += c * np.asarray(f.grid(points, points))
        else:
            delta += c * np.array([[complex(f(a, b)) for b in points] for a in points])
    comb = sum(c * s.weights for c, s in zip(coeffs, sigmas))
    max_delta = float(np.max(np.abs(delta)))
    witness = None
    if max_delta > tol:
        i, j = np.unravel_index(np.argmax(np.abs(delta)), delta.shape)
        witness = (complex(points[i]), complex(points[j]))
    return UniquenessVerdict(max_delta, float(np.max(np.abs(comb))), witness, tol)
