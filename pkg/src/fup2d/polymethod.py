"""Bivariate trigonometric polynomials evaluated on grid roots of unity.

A polynomial ``F(z, w) = sum a_kl z^k w^l`` is evaluated at the cyclotomic
point ``(e^{2 pi i x/N}, e^{2 pi i y/N})`` attached to each grid point.  The
module finds zero sets, low-degree vanishing polynomials and separating
polynomials, and builds the multipliers that localize a function to a line.
"""

from __future__ import annotations

import cmath
import logging
import math
from dataclasses import dataclass
from fractions import Fraction

import mpmath
import numpy as np
import scipy.linalg

from .cantor import GridSet, upper_right_neighborhood
from .config import RANK_TOL, ZERO_TOL
from .dft import GridFunction, dft
from .errors import (
    NotIrreducibleError,
    TheoremViolationError,
    UnsupportedCaseError,
    UnsupportedLatticeError,
)
from .lines import Line, canonicalize_line, line_points

log = logging.getLogger(__name__)

Exponent = tuple[int, int]


def _lattice_basis(vectors) -> list[tuple[int, int]]:
    """Hermite-style basis of the sublattice of Z^2 spanned by ``vectors``."""
    rows = [list(v) for v in vectors if v != (0, 0)]
    first = None
    while True:
        nz = [r for r in rows if r[0] != 0]
        if len(nz) <= 1:
            break
        piv = min(nz, key=lambda r: abs(r[0]))
        for r in nz:
            if r is not piv:
                q = r[0] // piv[0]
                r[0] -= q * piv[0]
                r[1] -= q * piv[1]
    nz = [r for r in rows if r[0] != 0]
    if nz:
        first = nz[0]
        if first[0] < 0:
            first = [-first[0], -first[1]]
    h = 0
    for r in rows:
        if r[0] == 0:
            h = math.gcd(h, r[1])
    basis = []
    if first is not None:
        if h:
            first[1] %= h
        basis.append((first[0], first[1]))
    if h:
        basis.append((0, h))
    return basis


@dataclass(frozen=True, eq=False)
class BivarPoly:
    """``sum a_kl z^k w^l`` with exact-zero coefficients dropped."""

    coeffs: dict

    def __post_init__(self):
        clean = {}
        for (k, l), a in self.coeffs.items():
            a = complex(a)
            if a != 0:
                key = (int(k), int(l))
                clean[key] = clean.get(key, 0) + a
        clean = {e: a for e, a in sorted(clean.items()) if a != 0}
        object.__setattr__(self, "coeffs", clean)

    @property
    def terms(self) -> list[tuple[Exponent, complex]]:
        return list(self.coeffs.items())

    @property
    def is_zero(self) -> bool:
        return not self.coeffs

    @property
    def degree(self) -> int:
        """``max max(|k|, |l|)`` over nonzero terms."""
        return max((max(abs(k), abs(l)) for k, l in self.coeffs), default=0)

    @property
    def total_degree(self) -> int:
        """``max (k + l)`` over nonzero terms."""
        return max((k + l for k, l in self.coeffs), default=0)

    def support_lattice(self) -> list[tuple[int, int]]:
        """Basis of the lattice generated by exponent differences."""
        exps = list(self.coeffs)
        if len(exps) < 2:
            return []
        e0 = exps[0]
        return _lattice_basis([(k - e0[0], l - e0[1]) for k, l in exps[1:]])

    @property
    def lattice_rank(self) -> int:
        return len(self.support_lattice())

    @property
    def lattice_index(self) -> int | None:
        """Index in Z^2 for full-rank lattices, else ``None``."""
        b = self.support_lattice()
        if len(b) < 2:
            return None
        return abs(b[0][0] * b[1][1] - b[0][1] * b[1][0])

    @property
    def norm1(self) -> float:
        return float(sum(abs(a) for a in self.coeffs.values()))

    def __call__(self, z, w):
        return sum(a * z**k * w**l for (k, l), a in self.coeffs.items())

    def allclose(self, other: "BivarPoly", tol: float = 1e-12) -> bool:
        keys = set(self.coeffs) | set(other.coeffs)
        return all(abs(self.coeffs.get(e, 0) - other.coeffs.get(e, 0)) <= tol for e in keys)

    def substitute(self, sz: int = 1, sw: int = 1, power: int = 1) -> "BivarPoly":
        """``F(sz * z^power, sw * w^power)`` for signs ``sz, sw``."""
        return BivarPoly(
            {(power * k, power * l): a * sz**k * sw**l for (k, l), a in self.coeffs.items()}
        )

    def grid_values(self, N: int) -> np.ndarray:
        """``F(e^{2 pi i x/N}, e^{2 pi i y/N})`` for all ``(x, y)`` in ``Z_N^2``."""
        roots = np.exp(2j * np.pi * np.arange(N) / N)
        xs = np.arange(N)[:, None]
        ys = np.arange(N)[None, :]
        out = np.zeros((N, N), dtype=complex)
        for (k, l), a in self.coeffs.items():
            out += a * roots[(k * xs + l * ys) % N]
        return out

    def values_at(self, N: int, S: GridSet) -> np.ndarray:
        roots = np.exp(2j * np.pi * np.arange(N) / N)
        xs, ys = S.coords()
        out = np.zeros(len(xs), dtype=complex)
        for (k, l), a in self.coeffs.items():
            out += a * roots[(k * xs + l * ys) % N]
        return out

    def to_json(self) -> dict:
        return {
            "terms": [
                {"k": k, "l": l, "re": float(a.real), "im": float(a.imag)}
                for (k, l), a in self.coeffs.items()
            ]
        }

    @classmethod
    def from_json(cls, obj: dict) -> "BivarPoly":
        unknown = set(obj) - {"terms"}
        if unknown:
            raise ValueError(f"unknown polynomial keys: {sorted(unknown)}")
        out = {}
        for t in obj["terms"]:
            bad = set(t) - {"k", "l", "re", "im"}
            if bad:
                raise ValueError(f"unknown term keys: {sorted(bad)}")
            key = (int(t["k"]), int(t["l"]))
            out[key] = out.get(key, 0) + complex(t.get("re", 0), t.get("im", 0))
        return cls(out)


def line_poly(line: Line) -> BivarPoly:
    """A polynomial ``P`` with ``Z_N(P)`` equal to the line ``a x + b y = c``.

    ``z^a w^b - e^{2 pi i c/N}`` with negative exponents moved across.
    """
    zeta = cmath.exp(2j * math.pi * line.c / line.N)
    a, b = line.a, line.b
    if b < 0 or a < 0:
        # z^a w^b = zeta  <=>  z^{a+} w^{b+} = zeta z^{a-} w^{b-}
        pos = (max(a, 0), max(b, 0))
        neg = (max(-a, 0), max(-b, 0))
        return BivarPoly({pos: 1.0, neg: -zeta})
    return BivarPoly({(a, b): 1.0, (0, 0): -zeta})


# ---------------------------------------------------------------------------
# zero sets


@dataclass(frozen=True)
class ZeroSetReport:
    N: int
    zeros: GridSet
    count: int

    def to_json(self) -> dict:
        return {"N": self.N, "count": self.count, "zeros": [list(p) for p in self.zeros]}


def _mp_value(F: BivarPoly, N: int, x: int, y: int, dps: int = 32):
    with mpmath.workdps(dps):
        tot = mpmath.mpc(0)
        for (k, l), a in F.coeffs.items():
            # expjpi(t) = exp(i pi t), exact phase from the reduced residue
            tot += mpmath.mpc(a.real, a.imag) * mpmath.expjpi(mpmath.mpf(2 * ((k * x + l * y) % N)) / N)
        return abs(tot)


def eval_zero_set(F: BivarPoly, N: int) -> ZeroSetReport:
    """Grid points where ``|F| <= ZERO_TOL * ||a||_1``.

    Points within three orders of magnitude of the threshold are re-evaluated
    at 32 significant digits before being classified.
    """
    if N < 1:
        raise ValueError("N must be >= 1")
    if F.is_zero:
        return ZeroSetReport(N, GridSet.full(N), N * N)
    tol = ZERO_TOL * F.norm1
    mags = np.abs(F.grid_values(N))
    zero = mags <= tol
    band = np.argwhere((mags > tol * 1e-3) & (mags < tol * 1e3))
    for x, y in band:
        zero[x, y] = float(_mp_value(F, N, int(x), int(y))) <= tol
    zs = GridSet.from_mask(zero)
    return ZeroSetReport(N, zs, len(zs))


# ---------------------------------------------------------------------------
# vanishing and separating polynomials


def _box(D: int) -> list[Exponent]:
    return [(k, l) for k in range(D + 1) for l in range(D + 1)]


def eval_matrix(N: int, S: GridSet, exps: list[Exponent]) -> np.ndarray:
    """Rows are points of ``S``, columns are monomials ``z^k w^l``."""
    roots = np.exp(2j * np.pi * np.arange(N) / N)
    xs, ys = S.coords()
    ks = np.array([e[0] for e in exps])
    ls = np.array([e[1] for e in exps])
    return roots[(np.outer(xs, ks) + np.outer(ys, ls)) % N]


def _null_space(E: np.ndarray, ncols: int) -> np.ndarray:
    """Orthonormal kernel basis (columns) using the shared rank tolerance."""
    if E.shape[0] == 0:
        return np.eye(ncols, dtype=complex)
    _, s, vh = scipy.linalg.svd(E, full_matrices=True)
    r = int(np.count_nonzero(s > RANK_TOL * s[0])) if s.size and s[0] > 0 else 0
    return vh[r:].conj().T


def _poly_from_vector(c: np.ndarray, exps: list[Exponent]) -> BivarPoly:
    c = np.asarray(c, dtype=complex)
    c = c / np.linalg.norm(c)
    big = np.argmax(np.abs(c))
    c = c * (abs(c[big]) / c[big])  # real positive leading coefficient
    c[np.abs(c) < 1e-14] = 0
    c = c / np.linalg.norm(c)
    return BivarPoly({e: a for e, a in zip(exps, c)})


def min_vanishing_poly(S: GridSet) -> BivarPoly:
    """Unit-norm ``F`` with exponents in ``[0, D]^2`` vanishing on ``S``, ``D`` minimal."""
    if len(S) == 0:
        raise ValueError("S must be nonempty")
    D = 0
    while True:
        exps = _box(D)
        K = _null_space(eval_matrix(S.N, S, exps), len(exps))
        if K.shape[1]:
            return _poly_from_vector(K[:, -1], exps)
        D += 1


def cuts_out_line(F: BivarPoly, N: int) -> Line | None:
    """The line ``Z_N(F)`` when ``F`` is ``c1 z^e1 + c2 z^e2`` with a grid root, else ``None``."""
    terms = F.terms
    if len(terms) != 2:
        return None
    (e1, c1), (e2, c2) = terms
    a, b = e1[0] - e2[0], e1[1] - e2[1]
    zeta = -c2 / c1
    if abs(abs(zeta) - 1) > 1e-12:
        return None
    theta = cmath.phase(zeta) / (2 * math.pi) * N
    c = round(theta)
    if abs(theta - c) > 1e-9:
        log.info("root of unity %s has order not dividing N=%d: no grid line", zeta, N)
        return None
    try:
        return canonicalize_line(a, b, c, N)
    except NotIrreducibleError:
        log.info("exponent difference (%d, %d) is not coprime mod %d: no grid line", a, b, N)
        return None


def candidate_lines(S: GridSet, R: int) -> list[Line]:
    """Canonical lines meeting ``S`` with size at most ``R``.

    Ordered by size, then by the number of points of ``S`` they contain (descending).
    """
    N = S.N
    xs, ys = S.coords()
    bound = min(R, N)
    found = {}
    for a in range(-bound, bound + 1):
        for b in range(0, bound + 1):
            if b == 0 and a <= 0:
                continue
            if math.gcd(math.gcd(a % N, b % N), N) != 1:
                continue
            for c in sorted(set(((a * xs + b * ys) % N).tolist())):
                ln = canonicalize_line(a, b, c, N)
                if ln.size <= R and ln not in found:
                    found[ln] = int(np.count_nonzero((ln.a * xs + ln.b * ys - ln.c) % N == 0))
    return sorted(found, key=lambda ln: (ln.size, -found[ln], ln.a, ln.b, ln.c))


def _split(S: GridSet, ln: Line) -> tuple[GridSet, GridSet]:
    on = [p for p in S if ln.contains(p)]
    off = [p for p in S if not ln.contains(p)]
    return GridSet(S.N, tuple(on)), GridSet(S.N, tuple(off))


def _gap_poly(on: GridSet, off: GridSet, D: int) -> BivarPoly | None:
    """Kernel element on ``off`` that does not vanish on ``on``, if any."""
    exps = _box(D)
    K = _null_space(eval_matrix(off.N, off, exps), len(exps))
    if K.shape[1] == 0:
        return None
    EK = eval_matrix(on.N, on, exps) @ K
    _, s, vh = scipy.linalg.svd(EK, full_matrices=False)
    if s.size == 0 or s[0] <= RANK_TOL * max(1.0, np.linalg.norm(eval_matrix(on.N, on, exps), 2)):
        return None
    return _poly_from_vector(K @ vh[0].conj(), exps)


@dataclass(frozen=True)
class Separation:
    F: BivarPoly
    line: Line
    R: int
    remainder: GridSet

    def to_json(self) -> dict:
        return {
            "line": self.line.to_json(),
            "R": self.R,
            "degree": self.F.degree,
            "poly": self.F.to_json(),
            "remainder": [list(p) for p in self.remainder],
        }


def default_R(size: int) -> int:
    return math.floor(200 * math.sqrt(size))


def separating_poly(S: GridSet, R: int | None = None) -> Separation:
    """``F*`` with exponents in ``[0, R)^2`` such that ``S - Z_N(F*)`` is nonempty
    and lies on one irreducible line of size at most ``R``.

    Lines are tried in :func:`candidate_lines` order; for each, the smallest
    exponent box ``[0, D]^2`` whose kernel on ``S`` minus the line is larger than
    the kernel on all of ``S`` is found by bisection (the gap persists once it
    appears).  Boxes beyond ``[0, N)^2`` alias and are not searched.
    """
    if len(S) == 0:
        raise ValueError("S must be nonempty")
    N = S.N
    if R is None:
        R = default_R(len(S))
    dmax = min(R, N) - 1
    for ln in candidate_lines(S, R):
        on, off = _split(S, ln)
        if _gap_poly(on, off, dmax) is None:
            continue
        lo, hi = 0, dmax
        while lo < hi:
            mid = (lo + hi) // 2
            if _gap_poly(on, off, mid) is None:
                lo = mid + 1
            else:
                hi = mid
        F = _gap_poly(on, off, lo)
        sep = _check_separation(S, F, ln, R)
        if sep is not None:
            return sep
    raise TheoremViolationError(
        "no separating polynomial found",
        {"N": N, "R": R, "S": [list(p) for p in S]},
    )


def _check_separation(S: GridSet, F: BivarPoly, ln: Line, R: int) -> Separation | None:
    vals = np.abs(F.values_at(S.N, S))
    keep = vals > ZERO_TOL * F.norm1
    rem = GridSet(S.N, tuple(p for p, k in zip(S, keep) if k))
    if len(rem) == 0 or not all(ln.contains(p) for p in rem):
        return None
    if F.degree >= R or ln.size > R:
        return None
    return Separation(F, ln, R, rem)


# ---------------------------------------------------------------------------
# multipliers


def multiplier_from_poly(F: BivarPoly, N: int) -> GridFunction:
    """``h = F(e^{2 pi i x/N}, e^{2 pi i y/N}) / N``, whose transform is the coefficient array."""
    for k, l in F.coeffs:
        if not (0 <= k < N and 0 <= l < N):
            raise ValueError(f"exponent {(k, l)} outside [0, {N})^2")
    return GridFunction(N, 2, F.grid_values(N) / N)


@dataclass(frozen=True)
class Localization:
    line: Line
    g: GridFunction
    separation: Separation
    R: int


def localize_to_line(f: GridFunction) -> Localization:
    """Multiply ``f`` by a polynomial multiplier so the product lives on one line.

    Checks ``g != 0``, ``supp g`` inside ``supp f`` and the line, and the
    transform support inside the upper-right ``R``-neighbourhood of ``supp f^``.
    """
    if f.dim != 2:
        raise ValueError("localize_to_line needs a 2D grid function")
    S = f.support()
    if len(S) == 0:
        raise ValueError("f must be nonzero")
    sep = separating_poly(S)
    h = multiplier_from_poly(sep.F, f.N)
    g = GridFunction(f.N, 2, h.values * f.values)
    payload = {"N": f.N, "S": [list(p) for p in S], "line": sep.line.to_json()}
    if g.is_zero():
        raise TheoremViolationError("localized function vanishes", payload)
    supp_g = g.support()
    if not all(p in S and sep.line.contains(p) for p in supp_g):
        raise TheoremViolationError("localized support leaves supp f on the line", payload)
    nbhd = upper_right_neighborhood(dft(f).support(), min(sep.R, f.N))
    if not all(p in nbhd for p in dft(g).support()):
        raise TheoremViolationError("transform support leaves the R-neighbourhood", payload)
    return Localization(sep.line, g, sep, sep.R)


def one_dim_annihilator(S, keep: int, N: int) -> GridFunction:
    """``h(x) = prod_{s != keep} (e^{2 pi i x/N} - e^{2 pi i s/N}) / sqrt(N)`` on ``Z_N``.

    Its transform is supported in ``[0, |S| - 1]``.
    """
    S = sorted({int(s) % N for s in S})
    keep = int(keep) % N
    if keep not in S:
        raise ValueError("keep must be an element of S")
    roots = [cmath.exp(2j * math.pi * s / N) for s in S if s != keep]
    coeffs = np.poly(roots)[::-1] if roots else np.array([1.0 + 0j])
    z = np.exp(2j * np.pi * np.arange(N) / N)
    vals = np.polynomial.polynomial.polyval(z, coeffs)
    return GridFunction(N, 1, vals / math.sqrt(N))


# ---------------------------------------------------------------------------
# cyclotomic-point tools


def _rational(a: complex) -> Fraction | None:
    if abs(a.imag) > 1e-12:
        return None
    q = Fraction(a.real).limit_denominator(10**6)
    return q if abs(float(q) - a.real) <= 1e-12 else None


def seven_polynomials(F: BivarPoly) -> list[BivarPoly]:
    """Sign flips and doublings covering the cyclotomic zeros of a rational ``F``.

    ``F(-z, w), F(z, -w), F(-z, -w), F(z^2, w^2), F(-z^2, w^2), F(z^2, -w^2), F(-z^2, -w^2)``.
    """
    if F.is_zero:
        raise ValueError("F must be nonzero")
    lead = next(iter(F.coeffs.values()))
    normed = {}
    for e, a in F.coeffs.items():
        q = _rational(a / lead)
        if q is None:
            raise UnsupportedCaseError(f"coefficient {a} is not a rational multiple of {lead}")
        normed[e] = float(q)
    if F.lattice_index != 1:
        raise UnsupportedLatticeError(f"exponent lattice {F.support_lattice()} is not Z^2")
    G = BivarPoly(normed)
    return [
        G.substitute(-1, 1),
        G.substitute(1, -1),
        G.substitute(-1, -1),
        G.substitute(1, 1, 2),
        G.substitute(-1, 1, 2),
        G.substitute(1, -1, 2),
        G.substitute(-1, -1, 2),
    ]


@dataclass(frozen=True)
class BezoutVerdict:
    count: int
    bound: int
    ok: bool
    inconclusive: bool = False
    note: str = "grid intersections only; a lower bound on intersections in C^2"

    def to_json(self) -> dict:
        return {
            "count": self.count,
            "bound": self.bound,
            "ok": self.ok,
            "inconclusive": self.inconclusive,
            "note": self.note,
        }


def bezout_intersection(F: BivarPoly, G: BivarPoly, N: int) -> BezoutVerdict:
    """Count common grid zeros against the total-degree Bezout bound."""
    if F.is_zero or G.is_zero:
        raise ValueError("F and G must be nonzero")
    zf = eval_zero_set(F, N).zeros.mask()
    zg = eval_zero_set(G, N).zeros.mask()
    count = int(np.count_nonzero(zf & zg))
    bound = F.total_degree * G.total_degree
    shared = (zf.any() and not (zf & ~zg).any()) or (zg.any() and not (zg & ~zf).any())
    if shared or count > bound:
        note = "zero sets nested on the grid: a common component is likely"
        return BezoutVerdict(count, bound, False, True, note)
    return BezoutVerdict(count, bound, True)


__all__ = [
    "BivarPoly",
    "ZeroSetReport",
    "Separation",
    "Localization",
    "BezoutVerdict",
    "line_poly",
    "line_points",
    "eval_zero_set",
    "eval_matrix",
    "min_vanishing_poly",
    "cuts_out_line",
    "candidate_lines",
    "separating_poly",
    "multiplier_from_poly",
    "localize_to_line",
    "one_dim_annihilator",
    "seven_polynomials",
    "bezout_intersection",
]
