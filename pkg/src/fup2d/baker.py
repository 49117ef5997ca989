"""Quantum open baker's maps in one and two dimensions.

``B_N = F_N^* sum_a Pi_a^* chi F_{N/M} chi Pi_a`` where ``Pi_a`` restricts to the
``a``-th block of length ``N/M`` (a square block in 2D).  In 2D the grid is
flattened row-major, ``x * N + y``, and both the transform and the cutoff are
tensor products.
"""

from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .cantor import Alphabet2D, iterate, iterate_1d
from .config import check_cap, matrix_entry_cap
from .dft import fup_norm, fup_norm_1d
from .lines import orthogonal_pair_condition

log = logging.getLogger(__name__)

KINDS = ("smooth-bump", "plateau-bump", "indicator", "zero")


def _psi(t):
    t = np.asarray(t, dtype=float)
    out = np.zeros_like(t)
    pos = t > 0
    out[pos] = np.exp(-1.0 / t[pos])
    return out


def smooth_step(t):
    """C-infinity step: 0 for ``t <= 0``, 1 for ``t >= 1``."""
    a, b = _psi(t), _psi(1.0 - np.asarray(t, dtype=float))
    return a / (a + b)


def smooth_bump(x):
    """``exp(1 - 1/(1 - (2x-1)^2))`` on ``(0, 1)``, zero elsewhere; peak 1 at ``x = 1/2``."""
    x = np.asarray(x, dtype=float)
    u = (2 * x - 1) ** 2
    out = np.zeros_like(x)
    inside = u < 1
    out[inside] = np.exp(1.0 - 1.0 / (1.0 - u[inside]))
    return out


@dataclass(frozen=True)
class CutoffProfile:
    """A cutoff ``chi`` on ``[0, 1)`` and its grid samples ``chi((j + offset)/n)``.

    ``offset = 0`` samples at the left grid points; ``offset = 0.5`` samples at
    cell centres.  The indicator kind is not smooth and is meant for ablations.
    """

    kind: str = "smooth-bump"
    flat: tuple[float, float] = (0.3, 0.7)
    offset: float = 0.0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown cutoff kind {self.kind!r}; expected one of {KINDS}")
        lo, hi = self.flat
        if not 0 < lo <= hi < 1:
            raise ValueError(f"plateau must satisfy 0 < lo <= hi < 1, got {self.flat}")
        if not 0 <= self.offset < 1:
            raise ValueError("offset must lie in [0, 1)")
        object.__setattr__(self, "flat", (float(lo), float(hi)))

    @property
    def smooth(self) -> bool:
        return self.kind in ("smooth-bump", "plateau-bump", "zero")

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        if self.kind == "smooth-bump":
            return smooth_bump(x)
        if self.kind == "plateau-bump":
            lo, hi = self.flat
            inside = (x > 0) & (x < 1)
            up = smooth_step(np.where(inside, x / lo, 0.0))
            down = smooth_step(np.where(inside, (1 - x) / (1 - hi), 0.0))
            return np.where(inside, up * down, 0.0)
        if self.kind == "indicator":
            return ((x >= 0) & (x < 1)).astype(float)
        return np.zeros_like(x)

    def samples(self, n: int) -> np.ndarray:
        return self((np.arange(n) + self.offset) / n)

    def to_json(self) -> dict:
        out = {"kind": self.kind}
        if self.kind == "plateau-bump":
            out["flat"] = list(self.flat)
        if self.offset:
            out["offset"] = self.offset
        return out

    @classmethod
    def from_json(cls, obj: dict) -> "CutoffProfile":
        unknown = set(obj) - {"kind", "flat", "offset"}
        if unknown:
            raise ValueError(f"unknown cutoff keys: {sorted(unknown)}")
        return cls(obj.get("kind", "smooth-bump"), tuple(obj.get("flat", (0.3, 0.7))), float(obj.get("offset", 0.0)))


def dft_matrix(n: int) -> np.ndarray:
    """Unitary DFT matrix on ``Z_n``."""
    j = np.arange(n)
    return np.exp(-2j * np.pi * np.outer(j, j) / n) / math.sqrt(n)


@dataclass(frozen=True, eq=False)
class BakerOperator:
    M: int
    alphabet: tuple | Alphabet2D
    k: int
    dim: int
    matrix: np.ndarray = field(repr=False)
    cutoff: CutoffProfile

    @property
    def N(self) -> int:
        return self.M**self.k

    def norm(self) -> float:
        return float(scipy.linalg.svdvals(self.matrix)[0])


def _letters(M: int, alphabet, dim: int) -> list:
    if dim == 1:
        letters = sorted({int(a) % M for a in alphabet})
        if not letters or len(letters) >= M:
            raise ValueError("1D alphabet must be a proper nonempty subset of Z_M")
        return letters
    if not isinstance(alphabet, Alphabet2D):
        alphabet = Alphabet2D(M, tuple(alphabet))
    return list(alphabet.cells)


def _block(n: int, cutoff: CutoffProfile, dim: int) -> np.ndarray:
    chi = cutoff.samples(n)
    core = chi[:, None] * dft_matrix(n) * chi[None, :]
    return core if dim == 1 else np.kron(core, core)


def _embed_index(M: int, k: int, letter, dim: int) -> np.ndarray:
    N = M**k
    n = N // M
    if dim == 1:
        return letter * n + np.arange(n)
    j = np.arange(n)
    xs = letter[0] * n + j[:, None]
    ys = letter[1] * n + j[None, :]
    return (xs * N + ys).ravel()


def baker_blocks(M: int, alphabet, k: int, cutoff: CutoffProfile, dim: int = 1, cap=None) -> dict:
    """The summands ``B_N^a``, keyed by letter, each assembled on its own."""
    out = {}
    F, core, size = _outer(M, k, cutoff, dim, cap)
    for a in _letters(M, alphabet, dim):
        idx = _embed_index(M, k, a, dim)
        mid = np.zeros((size, size), dtype=complex)
        mid[np.ix_(idx, idx)] = core
        out[a] = F.conj().T @ mid
    return out


def _outer(M, k, cutoff, dim, cap):
    if dim not in (1, 2):
        raise ValueError("dim must be 1 or 2")
    if k < 1:
        raise ValueError("k must be >= 1")
    N = M**k
    size = N**dim
    check_cap(size * size, cap)
    F = dft_matrix(N) if dim == 1 else np.kron(dft_matrix(N), dft_matrix(N))
    return F, _block(N // M, cutoff, dim), size


def build_baker(M: int, alphabet, k: int, cutoff: CutoffProfile | None = None, dim: int = 1, cap=None) -> BakerOperator:
    """Assemble ``B_N`` for ``N = M^k`` as a dense matrix."""
    cutoff = cutoff or CutoffProfile()
    letters = _letters(M, alphabet, dim)
    F, core, size = _outer(M, k, cutoff, dim, cap)
    mid = np.zeros((size, size), dtype=complex)
    for a in letters:
        idx = _embed_index(M, k, a, dim)
        mid[np.ix_(idx, idx)] = core
    stored = tuple(letters) if dim == 1 else Alphabet2D(M, tuple(letters))
    mat = F.conj().T @ mid
    mat.flags.writeable = False
    return BakerOperator(M, stored, k, dim, mat, cutoff)


def spectrum(B, cap=None) -> np.ndarray:
    """All eigenvalues, sorted by magnitude (descending), ties by argument."""
    mat = B.matrix if isinstance(B, BakerOperator) else np.asarray(B)
    check_cap(mat.size, cap)
    ev = scipy.linalg.eigvals(mat)
    order = np.lexsort((np.angle(ev), -np.abs(ev)))
    return ev[order]


def spectral_radius(B, cap=None) -> float:
    ev = spectrum(B, cap)
    return float(np.abs(ev[0])) if ev.size else 0.0


# ---------------------------------------------------------------------------
# experiments


@dataclass(frozen=True)
class GapTable:
    M: int
    dim: int
    beta_ref: float
    beta_k: int
    rows: tuple[tuple[int, float, float], ...]  # (k, radius, M^-beta_ref)
    warnings: tuple[str, ...] = ()

    def to_json(self) -> dict:
        return {
            "M": self.M,
            "dim": self.dim,
            "beta_ref": self.beta_ref,
            "beta_k": self.beta_k,
            "rows": [{"k": k, "radius": r, "ref": ref} for k, r, ref in self.rows],
            "warnings": list(self.warnings),
        }


def _beta_ref(M, alphabet, dim, kmax, cap):
    cap = matrix_entry_cap(cap)
    k, best = 1, None
    while k <= kmax:
        pts = M ** (dim * k)
        if pts * pts > cap:
            break
        if dim == 1:
            X = iterate_1d(M, alphabet, k)
            nv = fup_norm_1d(M**k, X, X)
        else:
            X = iterate(alphabet, k)
            nv = fup_norm(X, X)
        best = (k, -math.log(nv) / (k * math.log(M)) if nv > 0 else math.inf)
        k += 1
    return best or (0, float("nan"))


def spectral_gap_experiment(M: int, alphabet, k_range, cutoff: CutoffProfile | None = None, dim: int = 1, cap=None) -> GapTable:
    """Spectral radii of ``B_{M^k}`` next to ``M^{-beta}`` from the FUP norm series."""
    cutoff = cutoff or CutoffProfile()
    notes = []
    if dim == 2:
        A = alphabet if isinstance(alphabet, Alphabet2D) else Alphabet2D(M, tuple(alphabet))
        if orthogonal_pair_condition(A, A).obstructed:
            msg = "the Cantor set contains an orthogonal line pair: no FUP-driven gap expected"
            warnings.warn(msg, stacklevel=2)
            notes.append(msg)
        alphabet = A
    if not cutoff.smooth:
        notes.append("indicator cutoff is not smooth")
    ks = list(k_range)
    kb, beta = _beta_ref(M, alphabet, dim, max(ks), cap)
    rows = []
    for k in ks:
        r = spectral_radius(build_baker(M, alphabet, k, cutoff, dim, cap), cap)
        rows.append((k, r, M ** (-beta)))
    return GapTable(M, dim, beta, kb, tuple(rows), tuple(notes))


# ---------------------------------------------------------------------------
# propagation of singularities


@dataclass(frozen=True)
class SupportSpec:
    """Smooth bump on an interval (1D) or a product of intervals (2D); empty means zero."""

    box: tuple[tuple[float, float], ...] = ()

    @classmethod
    def from_json(cls, obj) -> "SupportSpec":
        if obj is None or obj == {"kind": "zero"}:
            return cls(())
        if isinstance(obj, dict):
            unknown = set(obj) - {"interval", "rect"}
            if unknown:
                raise ValueError(f"unknown support keys: {sorted(unknown)}")
            obj = obj.get("interval") or obj.get("rect")
            if obj and not isinstance(obj[0], (list, tuple)):
                obj = [obj]
        return cls(tuple((float(lo), float(hi)) for lo, hi in obj))

    def __post_init__(self):
        for lo, hi in self.box:
            if not 0 <= lo < hi <= 1:
                raise ValueError(f"support interval must satisfy 0 <= lo < hi <= 1, got {(lo, hi)}")

    @property
    def is_zero(self) -> bool:
        return not self.box

    def samples(self, N: int, dim: int) -> np.ndarray:
        if self.is_zero:
            return np.zeros(N**dim)
        if len(self.box) != dim:
            raise ValueError(f"support spec has {len(self.box)} intervals, operator has dim {dim}")
        x = np.arange(N) / N
        parts = [smooth_bump((x - lo) / (hi - lo)) for lo, hi in self.box]
        return parts[0] if dim == 1 else np.outer(parts[0], parts[1]).ravel()

    def to_json(self):
        return {"kind": "zero"} if self.is_zero else {"rect": [list(b) for b in self.box]}


def _circle_gap(a, b) -> float:
    (a0, a1), (b0, b1) = a, b
    return min(max(0.0, max(a0, b0 + n) - min(a1, b1 + n)) for n in (-1, 0, 1))


@dataclass(frozen=True)
class PropagationResult:
    norm: float
    hypothesis_met: bool
    separation: float

    def to_json(self) -> dict:
        return {"norm": self.norm, "hypothesis_met": self.hypothesis_met, "separation": self.separation}


def separation(phi: SupportSpec, psi: SupportSpec, M: int, letters, dim: int) -> float:
    """``d(Phi(supp psi), supp phi)`` in the l-infinity torus metric.

    The cutoff support is the closed unit cell, so intersecting with its
    preimage under the expanding map keeps every piece of ``supp psi``.
    """
    if phi.is_zero or psi.is_zero:
        return math.inf
    best = math.inf
    for a in letters:
        a = (a,) if dim == 1 else a
        pieces = []
        for (lo, hi), ai in zip(psi.box, a):
            lo2, hi2 = max(lo, ai / M), min(hi, (ai + 1) / M)
            if lo2 > hi2:
                break
            pieces.append((M * lo2 - ai, M * hi2 - ai))
        else:
            d = max(_circle_gap(p, q) for p, q in zip(pieces, phi.box))
            best = min(best, d)
    return best


def propagation_check(phi, psi, B: BakerOperator) -> PropagationResult:
    """``||phi_N B_N psi_N||`` together with the constant-separation hypothesis."""
    phi = phi if isinstance(phi, SupportSpec) else SupportSpec.from_json(phi)
    psi = psi if isinstance(psi, SupportSpec) else SupportSpec.from_json(psi)
    letters = list(B.alphabet) if B.dim == 1 else list(B.alphabet.cells)
    sep = separation(phi, psi, B.M, letters, B.dim)
    fp = phi.samples(B.N, B.dim)
    fs = psi.samples(B.N, B.dim)
    mat = fp[:, None] * B.matrix * fs[None, :]
    val = float(scipy.linalg.svdvals(mat)[0]) if mat.any() else 0.0
    return PropagationResult(val, sep > 0, sep)


def decay_exponent(Ns, norms) -> float:
    """Least-squares slope of ``-log(norm)`` against ``log(N)``."""
    Ns = np.asarray(Ns, dtype=float)
    norms = np.asarray(norms, dtype=float)
    if np.any(norms <= 0):
        raise ValueError("decay fit needs strictly positive norms")
    slope = np.polyfit(np.log(Ns), np.log(norms), 1)[0]
    return float(-slope)
