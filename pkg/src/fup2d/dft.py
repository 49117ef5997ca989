"""Unitary DFTs on Z_N and Z_N^2, FUP norms and support feasibility.

Both transforms use the unitary normalization: ``1/sqrt(N)`` on ``Z_N`` and
``1/N`` on ``Z_N^2``, with the kernel ``exp(-2 pi i x.xi / N)``.
"""

from __future__ import annotations

import csv
import io
import logging
import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg
import scipy.sparse.linalg

from .cantor import Alphabet2D, GridSet, iterate
from .config import RANK_TOL, SUPPORT_TOL, check_cap
from .errors import ConstructionFailedError
from .lines import line_in_cantor, normalize_direction, perp

log = logging.getLogger(__name__)

DENSE_LIMIT = 2048
POWER_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class GridFunction:
    """A complex function on ``Z_N`` (``dim=1``) or ``Z_N^2`` (``dim=2``)."""

    N: int
    dim: int
    values: np.ndarray

    def __post_init__(self):
        if self.dim not in (1, 2):
            raise ValueError(f"dim must be 1 or 2, got {self.dim}")
        vals = np.array(self.values, dtype=complex)
        shape = (self.N,) * self.dim
        if vals.size != self.N**self.dim:
            raise ValueError(f"expected {self.N ** self.dim} values, got {vals.size}")
        vals = vals.reshape(shape)
        vals.flags.writeable = False
        object.__setattr__(self, "values", vals)

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.values))

    def support_mask(self) -> np.ndarray:
        mags = np.abs(self.values)
        top = mags.max() if mags.size else 0.0
        if top == 0:
            return np.zeros(mags.shape, dtype=bool)
        return mags > SUPPORT_TOL * top

    def support(self):
        """Grid points with ``|f| > SUPPORT_TOL * max|f|``.

        A :class:`GridSet` in 2D, a sorted integer array in 1D.
        """
        m = self.support_mask()
        if self.dim == 2:
            return GridSet.from_mask(m)
        return np.flatnonzero(m)

    def is_zero(self) -> bool:
        return not np.any(self.values)

    def to_json(self) -> dict:
        flat = self.values.ravel()
        return {"N": self.N, "dim": self.dim, "values": [[float(z.real), float(z.imag)] for z in flat]}

    @classmethod
    def from_json(cls, obj: dict) -> "GridFunction":
        unknown = set(obj) - {"N", "dim", "values"}
        if unknown:
            raise ValueError(f"unknown grid-function keys: {sorted(unknown)}")
        vals = np.array([complex(re, im) for re, im in obj["values"]])
        return cls(int(obj["N"]), int(obj["dim"]), vals)


def dft(f: GridFunction) -> GridFunction:
    """Unitary forward transform."""
    return GridFunction(f.N, f.dim, np.fft.fftn(f.values, norm="ortho"))


def idft(f: GridFunction) -> GridFunction:
    """Unitary inverse transform."""
    return GridFunction(f.N, f.dim, np.fft.ifftn(f.values, norm="ortho"))


# ---------------------------------------------------------------------------
# submatrices and norms


def dft_submatrix(N: int, rows: GridSet, cols: GridSet, inverse: bool = False) -> np.ndarray:
    """Rows ``Y`` and columns ``X`` of the unitary 2D DFT matrix."""
    roots = np.exp((2j if inverse else -2j) * np.pi * np.arange(N) / N) / N
    yx, yy = rows.coords()
    xx, xy = cols.coords()
    phase = (np.outer(yx, xx) + np.outer(yy, xy)) % N
    return roots[phase]


def dft_submatrix_1d(N: int, rows, cols, inverse: bool = False) -> np.ndarray:
    roots = np.exp((2j if inverse else -2j) * np.pi * np.arange(N) / N) / math.sqrt(N)
    return roots[np.outer(np.asarray(rows, dtype=np.int64), np.asarray(cols, dtype=np.int64)) % N]


def largest_singular_value(A: np.ndarray) -> float:
    """Dense SVD for small matrices, Gram power iteration otherwise."""
    if A.size == 0:
        return 0.0
    if max(A.shape) < DENSE_LIMIT:
        return float(scipy.linalg.svdvals(A)[0])
    return _power_sigma(lambda v: A @ v, lambda u: A.conj().T @ u, A.shape[1], A.dtype)


def _power_sigma(matvec, rmatvec, n, dtype=complex, tol=POWER_TOL, maxiter=5000) -> float:
    rng = np.random.default_rng(0)
    v = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    v /= np.linalg.norm(v)
    lam = 0.0
    for _ in range(maxiter):
        w = rmatvec(matvec(v))
        new = float(np.linalg.norm(w))
        if new == 0.0:
            return 0.0
        v = w / new
        if abs(new - lam) <= tol * new:
            return math.sqrt(new)
        lam = new
    # slow convergence (clustered top singular values): hand over to Lanczos
    op = scipy.sparse.linalg.LinearOperator((n, n), matvec=lambda x: rmatvec(matvec(x)), dtype=complex)
    top = scipy.sparse.linalg.eigsh(op, k=1, which="LA", tol=tol, return_eigenvectors=False)
    return math.sqrt(max(float(top[0]), 0.0))


def fup_norm(X: GridSet, Y: GridSet, inverse: bool = False) -> float:
    """Operator norm of ``1_Y F 1_X`` (``F`` the unitary 2D DFT, or its inverse).

    Uses the dense submatrix when both sets have fewer than 2048 points,
    otherwise power iteration with FFT matrix-vector products.
    """
    if X.N != Y.N:
        raise ValueError("X and Y live on different grids")
    if len(X) == 0 or len(Y) == 0:
        return 0.0
    N = X.N
    if max(len(X), len(Y)) < DENSE_LIMIT:
        return float(scipy.linalg.svdvals(dft_submatrix(N, Y, X, inverse))[0])
    xi, yi = X.flat_indices(), Y.flat_indices()
    fwd, bwd = (np.fft.ifft2, np.fft.fft2) if inverse else (np.fft.fft2, np.fft.ifft2)

    def matvec(v):
        g = np.zeros(N * N, dtype=complex)
        g[xi] = v
        return fwd(g.reshape(N, N), norm="ortho").ravel()[yi]

    def rmatvec(u):
        g = np.zeros(N * N, dtype=complex)
        g[yi] = u
        return bwd(g.reshape(N, N), norm="ortho").ravel()[xi]

    return _power_sigma(matvec, rmatvec, len(xi))


def fup_norm_1d(N: int, X, Y) -> float:
    """Operator norm of ``1_Y F 1_X`` on ``Z_N``."""
    if len(X) == 0 or len(Y) == 0:
        return 0.0
    return largest_singular_value(dft_submatrix_1d(N, Y, X))


@dataclass(frozen=True)
class NormSeries:
    """Per-level FUP norms with exponents ``beta_k = -log_M(norm) / k``."""

    M: int
    entries: tuple[tuple[int, float, float], ...]

    def to_json(self) -> dict:
        return {"M": self.M, "entries": [{"k": k, "norm": n, "beta_k": b} for k, n, b in self.entries]}

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["k", "norm", "beta_k"])
        for row in self.entries:
            w.writerow([row[0], repr(row[1]), repr(row[2])])
        return buf.getvalue()


def beta_series(A: Alphabet2D, B: Alphabet2D, k_max: int, cap=None) -> NormSeries:
    """FUP norms of ``(iterate(A, k), iterate(B, k))`` for ``k = 1..k_max``."""
    if A.M != B.M:
        raise ValueError("alphabets must share the base M")
    if k_max < 1:
        raise ValueError("k_max must be >= 1")
    check_cap(A.M ** (2 * k_max), cap)
    rows = []
    for k in range(1, k_max + 1):
        nv = fup_norm(iterate(A, k), iterate(B, k))
        beta = -math.log(nv) / (k * math.log(A.M)) if nv > 0 else math.inf
        rows.append((k, nv, beta))
    return NormSeries(A.M, tuple(rows))


def _rank(A: np.ndarray) -> int:
    if A.size == 0:
        return 0
    s = scipy.linalg.svdvals(A)
    if s[0] == 0:
        return 0
    return int(np.count_nonzero(s > RANK_TOL * s[0]))


def feasible_support_dim(S: GridSet, T: GridSet) -> int:
    """Dimension of ``{f : supp f in S, supp F f in T}``."""
    if S.N != T.N:
        raise ValueError("S and T live on different grids")
    if len(S) == 0:
        return 0
    return len(S) - _rank(dft_submatrix(S.N, T.complement(), S))


def feasible_support_dim_1d(N: int, S, T) -> int:
    """1D analogue of :func:`feasible_support_dim`; ``S`` and ``T`` are index collections."""
    S = sorted(set(int(s) % N for s in S))
    Tc = sorted(set(range(N)) - set(int(t) % N for t in T))
    if not S:
        return 0
    return len(S) - _rank(dft_submatrix_1d(N, Tc, S))


# ---------------------------------------------------------------------------
# sharpness


def line_indicator(N: int, v, base) -> np.ndarray:
    """Indicator of ``Z v + base`` on ``Z_N^2``."""
    out = np.zeros((N, N), dtype=complex)
    t = np.arange(N)
    out[(base[0] + t * v[0]) % N, (base[1] + t * v[1]) % N] = 1.0
    return out


def sharpness_witness(A: Alphabet2D, B: Alphabet2D, k: int, v) -> GridFunction:
    """A unit-norm ``f`` with ``supp f`` in the level-k iterate of ``A`` and its
    transform supported in the level-k iterate of ``B``.

    The function is ``F^{-1} T_q F T_p 1_{Z v}``: a translated lattice line in
    physical space whose transform is the perpendicular lattice line, translated
    by ``q``.  ``p`` and ``q`` come from the line witnesses of the limit sets.
    """
    if A.M != B.M:
        raise ValueError("alphabets must share the base M")
    v = normalize_direction(v)
    wp = line_in_cantor(A, v)
    if wp is None:
        raise ConstructionFailedError(f"the limit set of A contains no line in direction {v}")
    wq = line_in_cantor(B, perp(v))
    if wq is None:
        raise ConstructionFailedError(f"the limit set of B contains no line in direction {perp(v)}")
    N = A.M**k
    p, q = wp.lattice_base(k), wq.lattice_base(k)
    g = line_indicator(N, v, (0, 0))
    g = np.roll(g, p, axis=(0, 1))
    g = np.fft.fft2(g, norm="ortho")
    g = np.roll(g, q, axis=(0, 1))
    g = np.fft.ifft2(g, norm="ortho")
    f = GridFunction(N, 2, g / np.linalg.norm(g))
    X, Y = iterate(A, k), iterate(B, k)
    for pt in f.support():
        if pt not in X:
            raise ConstructionFailedError("witness leaves the physical iterate", pt)
    for pt in dft(f).support():
        if pt not in Y:
            raise ConstructionFailedError("witness transform leaves the frequency iterate", pt)
    log.debug("sharpness witness at k=%d: p=%s q=%s", k, p, q)
    return f
