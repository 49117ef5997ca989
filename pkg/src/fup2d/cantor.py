"""Alphabets, Cantor iterates and their discretizations in Z_N x Z_N.

A Cantor iterate at level ``k`` is the set of grid points of ``Z_{M^k}^2`` whose
base-``M`` digit pairs all belong to the alphabet.  Because every digit position
uses the same alphabet, the set does not care whether digits are read least- or
most-significant first.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from .errors import InvalidModulusError

Point = tuple[int, int]


@dataclass(frozen=True)
class Alphabet2D:
    """A proper nonempty subset of ``Z_M^2``.

    Cells are reduced mod ``M``, deduplicated and sorted on construction.
    """

    M: int
    cells: tuple[Point, ...]

    def __post_init__(self):
        M = int(self.M)
        if M < 2:
            raise ValueError(f"base M must be >= 2, got {M}")
        cells = tuple(sorted({(int(a) % M, int(b) % M) for a, b in self.cells}))
        if not cells:
            raise ValueError("alphabet must be nonempty")
        if len(cells) >= M * M:
            raise ValueError("alphabet must be a proper subset of Z_M^2")
        object.__setattr__(self, "M", M)
        object.__setattr__(self, "cells", cells)

    @property
    def size_pair(self) -> tuple[int, int]:
        """Exact ``(|cells|, M)``; the dimension is ``log |cells| / log M``."""
        return len(self.cells), self.M

    @property
    def delta(self) -> float:
        return math.log(len(self.cells)) / math.log(self.M)

    def __len__(self):
        return len(self.cells)

    def __contains__(self, cell):
        a, b = cell
        return (a % self.M, b % self.M) in self._cellset

    @property
    def _cellset(self) -> frozenset:
        return frozenset(self.cells)

    def mask(self) -> np.ndarray:
        m = np.zeros((self.M, self.M), dtype=bool)
        for a, b in self.cells:
            m[a, b] = True
        return m

    def transpose(self) -> "Alphabet2D":
        """Swap the coordinates of every cell."""
        return Alphabet2D(self.M, tuple((b, a) for a, b in self.cells))

    def to_json(self) -> dict:
        return {"M": self.M, "cells": [list(c) for c in self.cells]}

    @classmethod
    def from_json(cls, obj: dict) -> "Alphabet2D":
        unknown = set(obj) - {"M", "cells"}
        if unknown:
            raise ValueError(f"unknown alphabet keys: {sorted(unknown)}")
        return cls(int(obj["M"]), tuple(tuple(c) for c in obj["cells"]))


@dataclass(frozen=True)
class GridSet:
    """A subset of ``Z_N^2`` stored as a sorted tuple of points."""

    N: int
    points: tuple[Point, ...]

    def __post_init__(self):
        N = int(self.N)
        if N < 1:
            raise ValueError(f"modulus must be positive, got {N}")
        pts = tuple(sorted({(int(x), int(y)) for x, y in self.points}))
        for x, y in pts:
            if not (0 <= x < N and 0 <= y < N):
                raise ValueError(f"point {(x, y)} outside Z_{N}^2")
        object.__setattr__(self, "N", N)
        object.__setattr__(self, "points", pts)

    @classmethod
    def from_mask(cls, mask: np.ndarray) -> "GridSet":
        xs, ys = np.nonzero(mask)
        return cls(mask.shape[0], tuple(zip(xs.tolist(), ys.tolist())))

    @classmethod
    def full(cls, N: int) -> "GridSet":
        return cls.from_mask(np.ones((N, N), dtype=bool))

    def mask(self) -> np.ndarray:
        m = np.zeros((self.N, self.N), dtype=bool)
        if self.points:
            xs, ys = self.coords()
            m[xs, ys] = True
        return m

    def coords(self) -> tuple[np.ndarray, np.ndarray]:
        """Coordinate arrays ``(xs, ys)`` in stored order."""
        if not self.points:
            return np.zeros(0, dtype=np.int64), np.zeros(0, dtype=np.int64)
        arr = np.asarray(self.points, dtype=np.int64)
        return arr[:, 0], arr[:, 1]

    def flat_indices(self) -> np.ndarray:
        """Row-major indices ``x * N + y``."""
        xs, ys = self.coords()
        return xs * self.N + ys

    def complement(self) -> "GridSet":
        return GridSet.from_mask(~self.mask())

    def __len__(self):
        return len(self.points)

    def __iter__(self):
        return iter(self.points)

    def __contains__(self, p):
        x, y = p
        return (x % self.N, y % self.N) in self._pointset

    @property
    def _pointset(self) -> frozenset:
        return frozenset(self.points)

    def to_json(self) -> dict:
        return {"N": self.N, "points": [list(p) for p in self.points]}

    @classmethod
    def from_json(cls, obj: dict) -> "GridSet":
        unknown = set(obj) - {"N", "points"}
        if unknown:
            raise ValueError(f"unknown grid-set keys: {sorted(unknown)}")
        return cls(int(obj["N"]), tuple(tuple(p) for p in obj["points"]))


@dataclass(frozen=True)
class CantorIterate2D(GridSet):
    """The ``k``-th Cantor iterate of an alphabet, living in ``Z_{M^k}^2``."""

    k: int = 0
    alphabet: Alphabet2D | None = field(default=None, compare=False)


def iterate(A: Alphabet2D, k: int) -> CantorIterate2D:
    """Return the ``k``-th Cantor iterate of ``A``."""
    if k < 0:
        raise ValueError(f"k must be >= 0, got {k}")
    cells = np.asarray(A.cells, dtype=np.int64)
    pts = np.zeros((1, 2), dtype=np.int64)
    scale = 1
    for _ in range(k):
        pts = (pts[:, None, :] + scale * cells[None, :, :]).reshape(-1, 2)
        scale *= A.M
    return CantorIterate2D(scale, tuple(map(tuple, pts.tolist())), k=k, alphabet=A)


def iterate_1d(M: int, digits: Iterable[int], k: int) -> np.ndarray:
    """Sorted points of the 1D Cantor iterate ``{sum a_j M^j : a_j in digits}``."""
    digits = sorted({int(d) % M for d in digits})
    if not digits or len(digits) >= M:
        raise ValueError("1D alphabet must be a proper nonempty subset of Z_M")
    pts = np.zeros(1, dtype=np.int64)
    scale = 1
    for _ in range(k):
        pts = (pts[:, None] + scale * np.asarray(digits)[None, :]).ravel()
        scale *= M
    return np.sort(pts)


def level_of(M: int, N: int) -> int:
    """Return ``k`` with ``N == M**k`` or raise :class:`InvalidModulusError`."""
    k, n = 0, 1
    while n < N:
        n *= M
        k += 1
    if n != N:
        raise InvalidModulusError(f"N={N} is not a power of M={M}")
    return k


def digits_in_alphabet(A: Alphabet2D, k: int, p: Point) -> bool:
    """Digit test: do all ``k`` base-M digit pairs of ``p`` lie in ``A``?"""
    x, y = p
    N = A.M**k
    x, y = x % N, y % N
    cells = A._cellset
    for _ in range(k):
        if (x % A.M, y % A.M) not in cells:
            return False
        x //= A.M
        y //= A.M
    return True


def _tail_digits(M: int, shift: int) -> range:
    # shift 0: any tail; -1: tail reads 0.(M-1)(M-1)... = 1; +1: tail reads 0.
    if shift == 0:
        return range(M)
    return range(M - 1, M) if shift < 0 else range(0, 1)


def _feasible_shifts(A: Alphabet2D) -> list[tuple[int, int]]:
    shifts = []
    cells = A._cellset
    for dx in (-1, 0, 1):
        for dy in (-1, 0, 1):
            if any((a, b) in cells for a in _tail_digits(A.M, dx) for b in _tail_digits(A.M, dy)):
                shifts.append((dx, dy))
    return shifts


def cell_meets_drawing(A: Alphabet2D, N: int, p: Point) -> bool:
    """Does the closed grid cell at ``p`` (side ``1/N``) meet the limit Cantor set?

    A point of the limit set in the closed cell ``[x/N,(x+1)/N] x [y/N,(y+1)/N]``
    has an admissible ``k``-digit prefix equal to ``(x, y)`` shifted by at most
    one in each coordinate; a shift of -1 (resp. +1) forces the tail to read
    ``0.(M-1)(M-1)...`` (resp. ``0.00...``) in that coordinate.
    """
    k = level_of(A.M, N)
    x, y = p
    for dx, dy in _feasible_shifts(A):
        if digits_in_alphabet(A, k, ((x + dx) % N, (y + dy) % N)):
            return True
    return False


def drawing_discretization(A: Alphabet2D, N: int) -> GridSet:
    """All cells of ``Z_N^2`` whose closure meets the limit set (the set ``X_N``)."""
    k = level_of(A.M, N)
    base = iterate(A, k).mask()
    out = np.zeros_like(base)
    for dx, dy in _feasible_shifts(A):
        out |= np.roll(base, (-dx, -dy), axis=(0, 1))
    return GridSet.from_mask(out)


def upper_right_neighborhood(S: GridSet, R: int) -> GridSet:
    """Minkowski sum ``S + [0,R) x [0,R)`` modulo ``N``."""
    N = S.N
    if not 1 <= R <= N:
        raise ValueError(f"R must satisfy 1 <= R <= N={N}, got {R}")
    base = S.mask()
    # shifts along the two axes are separable
    rows = np.zeros_like(base)
    for u in range(R):
        rows |= np.roll(base, u, axis=0)
    out = np.zeros_like(base)
    for v in range(R):
        out |= np.roll(rows, v, axis=1)
    return GridSet.from_mask(out)
