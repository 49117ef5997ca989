"""Lines in Z_N^2 and in the torus, and deciding when a Cantor set contains a line.

Offsets of the line family ``R v + (s, 0)`` are handled in exact rational
arithmetic.  For a direction ``v = (a, b)`` with ``b > 0`` the set ``S_v`` of
admissible offsets is closed and its boundary lies on the grid
``(1/(M b)) Z``, so ``S_v`` is a union of closed grid intervals ("cells") and
isolated grid points.  Multiplication by ``M`` permutes this structure, which
turns the question "is there an offset whose whole ``x M`` orbit stays in
``S_v``" into cycle detection on a finite directed graph.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import product

import numpy as np

from .cantor import Alphabet2D, GridSet
from .errors import HorizontalDirectionError, NotIrreducibleError

Node = tuple[str, int]  # ("cell", s) or ("point", g)


# ---------------------------------------------------------------------------
# Lines in Z_N^2


@dataclass(frozen=True)
class Line:
    """The irreducible line ``{(x, y) : a x + b y = c mod N}``.

    ``(a, b)`` is a coprime integer pair of minimal ``max(|a|, |b|)``,
    sign-normalized so that ``b > 0`` or ``b == 0 and a > 0``.
    """

    N: int
    a: int
    b: int
    c: int

    @property
    def size(self) -> int:
        return max(abs(self.a), abs(self.b))

    @property
    def direction(self) -> tuple[int, int]:
        """Direction of the point set, ``(-b, a)``."""
        return (-self.b, self.a)

    def contains(self, p) -> bool:
        return (self.a * p[0] + self.b * p[1] - self.c) % self.N == 0

    def to_json(self) -> dict:
        return {"N": self.N, "a": self.a, "b": self.b, "c": self.c, "size": self.size}


def _sym(x: int, N: int) -> int:
    x %= N
    return x - N if x > N // 2 else x


def _egcd(a: int, b: int) -> tuple[int, int, int]:
    if b == 0:
        return (abs(a), 1 if a >= 0 else -1, 0)
    g, s, t = _egcd(b, a % b)
    return g, t, s - (a // b) * t


def canonicalize_line(a: int, b: int, c: int, N: int) -> Line:
    """Canonical coprime-integer representative of ``a x + b y = c`` in ``Z_N^2``."""
    a, b, c = a % N, b % N, c % N
    if math.gcd(math.gcd(a, b), N) != 1:
        raise NotIrreducibleError(f"({a}, {b}) are not coprime in Z_{N}")
    best = None
    for alpha in range(1, N + 1):
        if math.gcd(alpha, N) != 1:
            continue
        a1, b1, c1 = _sym(alpha * a, N), _sym(alpha * b, N), alpha * c % N
        g = math.gcd(a1, b1)
        if g > 1:
            # g is a unit mod N because (a1, b1) generate Z_N
            a1, b1, c1 = a1 // g, b1 // g, c1 * pow(g, -1, N) % N
        if b1 < 0 or (b1 == 0 and a1 < 0):
            a1, b1, c1 = -a1, -b1, -c1 % N
        key = (max(abs(a1), abs(b1)), a1, b1, c1)
        if best is None or key < best:
            best = key
    _, a1, b1, c1 = best
    return Line(N, a1, b1, c1)


def line_points(line: Line) -> GridSet:
    """The ``N`` points ``p + t(-b, a)`` of an irreducible line."""
    N = line.N
    g, s, t = _egcd(line.a, line.b)
    assert g == 1
    px, py = line.c * s % N, line.c * t % N
    ts = np.arange(N)
    xs = (px - ts * line.b) % N
    ys = (py + ts * line.a) % N
    return GridSet(N, tuple(zip(xs.tolist(), ys.tolist())))


def all_lines(N: int):
    """Every irreducible line of ``Z_N^2``, each once, canonical form."""
    seen = set()
    for a, b in product(range(N), repeat=2):
        if math.gcd(math.gcd(a, b), N) != 1:
            continue
        for c in range(N):
            ln = canonicalize_line(a, b, c, N)
            if ln not in seen:
                seen.add(ln)
                yield ln


# ---------------------------------------------------------------------------
# Lines in the torus against the closed drawing of an alphabet


def coprime_directions(bound: int):
    """Primitive directions with ``max(|a|, |b|) <= bound``, one per +-pair.

    Ordered by ``max(|a|, |b|)`` then lexicographically; ``b > 0`` or ``v == (1, 0)``.
    """
    out = []
    for a in range(-bound, bound + 1):
        for b in range(0, bound + 1):
            if b == 0 and a != 1:
                continue
            if math.gcd(a, b) == 1:
                out.append((a, b))
    out.sort(key=lambda v: (max(abs(v[0]), abs(v[1])), v))
    return out


def normalize_direction(v) -> tuple[int, int]:
    a, b = int(v[0]), int(v[1])
    if (a, b) == (0, 0):
        raise ValueError("direction must be nonzero")
    if math.gcd(a, b) != 1:
        raise ValueError(f"direction {v} is not a coprime pair")
    if b < 0 or (b == 0 and a < 0):
        a, b = -a, -b
    return a, b


def perp(v) -> tuple[int, int]:
    return (-v[1], v[0])


def _candidates(u: Fraction, M: int) -> tuple[int, ...]:
    # closed squares of side 1/M containing torus coordinate u
    w = (u % 1) * M
    if w.denominator == 1:
        i = int(w)
        return (i % M, (i - 1) % M)
    return (math.floor(w),)


def point_in_drawing(A: Alphabet2D, x: Fraction, y: Fraction) -> bool:
    """Is the torus point ``(x, y)`` in the closed drawing of ``A``?"""
    cells = A._cellset
    return any((i, j) in cells for i in _candidates(x, A.M) for j in _candidates(y, A.M))


def line_in_drawing(A: Alphabet2D, v, s: Fraction) -> bool:
    """Exact test of ``R v + (s, 0)`` lying in the closed drawing of ``A``.

    ``v = (a, b)`` must have ``b > 0``.  The line is cut at every crossing
    with a grid line ``x, y in (1/M) Z``; each open piece sits in a single
    square (or on a single square edge), so testing piece midpoints is exact,
    and crossing points follow by closedness.
    """
    a, b = v
    M = A.M
    s = Fraction(s)
    ts = {Fraction(0), Fraction(1)}
    for j in range(M * b):
        ts.add(Fraction(j, M * b))
    if a != 0:
        lo, hi = sorted((s * M, (s + a) * M))
        for i in range(math.ceil(lo), math.floor(hi) + 1):
            t = (Fraction(i, M) - s) / a
            if 0 <= t < 1:
                ts.add(t)
    ts = sorted(ts)
    for t0, t1 in zip(ts, ts[1:]):
        t = (t0 + t1) / 2
        if not point_in_drawing(A, s + t * a, t * b):
            return False
    return True


@dataclass(frozen=True)
class IntervalSet:
    """Admissible offsets ``S_v`` on the grid ``(1/(M|b|)) Z``.

    ``cells`` lists ``s`` with ``[s, s+1]/(M|b|)`` inside ``S_v``; ``points``
    lists grid offsets ``g/(M|b|)`` in ``S_v`` (these include isolated points,
    such as the single offset of the diagonal line through the diagonal alphabet).
    """

    v: tuple[int, int]
    M: int
    Mb: int
    cells: tuple[int, ...]
    points: tuple[int, ...]


def interval_set(A: Alphabet2D, v) -> IntervalSet:
    """Compute ``S_v`` for a direction with nonzero second component."""
    a, b = normalize_direction(v)
    if b == 0:
        raise HorizontalDirectionError("b = 0: use the transposed alphabet with v = (0, 1)")
    Mb = A.M * b
    cells = tuple(s for s in range(Mb) if line_in_drawing(A, (a, b), Fraction(2 * s + 1, 2 * Mb)))
    points = tuple(g for g in range(Mb) if line_in_drawing(A, (a, b), Fraction(g, Mb)))
    return IntervalSet((a, b), A.M, Mb, cells, points)


def orbit_graph(iv: IntervalSet) -> dict[Node, list[Node]]:
    """Directed graph of the ``x M`` map on marked cells and grid points.

    Cell ``s`` maps onto cells ``M s + r`` (``0 <= r < M``) and onto the grid
    points strictly inside that image.  Grid points map to grid points.  For
    axis directions (``a == 0``) grid points are left out: a vertical line on a
    column boundary lies in the limit set only if a neighbouring column is full,
    which already shows up as a cell cycle, whereas the closed drawing can
    cover a boundary line with two half-columns that no digit expansion follows.
    """
    M, Mb = iv.M, iv.Mb
    use_points = iv.v[0] != 0
    cells = set(iv.cells)
    points = set(iv.points) if use_points else set()
    graph: dict[Node, list[Node]] = {}
    for s in sorted(cells):
        nxt = [("cell", (M * s + r) % Mb) for r in range(M) if (M * s + r) % Mb in cells]
        nxt += [("point", (M * s + r) % Mb) for r in range(1, M) if (M * s + r) % Mb in points]
        graph[("cell", s)] = nxt
    for g in sorted(points):
        h = M * g % Mb
        graph[("point", g)] = [("point", h)] if h in points else []
    return graph


def find_cycle(graph: dict[Node, list[Node]]) -> list[Node] | None:
    """First cycle found by iterative DFS in sorted node order, or ``None``."""
    WHITE, GREY, BLACK = 0, 1, 2
    color = {u: WHITE for u in graph}
    for root in sorted(graph):
        if color[root] != WHITE:
            continue
        stack = [(root, iter(graph[root]))]
        path = [root]
        color[root] = GREY
        while stack:
            u, it = stack[-1]
            for w in it:
                if color[w] == GREY:
                    return path[path.index(w):]
                if color[w] == WHITE:
                    color[w] = GREY
                    stack.append((w, iter(graph[w])))
                    path.append(w)
                    break
            else:
                color[u] = BLACK
                stack.pop()
                path.pop()
    return None


def base_m_expansion(x: Fraction, M: int) -> tuple[list[int], list[int]]:
    """Eventually periodic base-M digits of ``x`` in ``[0, 1)``: ``(preperiod, period)``."""
    x = Fraction(x) % 1
    num, den = x.numerator, x.denominator
    seen: dict[int, int] = {}
    digits = []
    while num not in seen:
        seen[num] = len(digits)
        num *= M
        digits.append(num // den)
        num %= den
    start = seen[num]
    return digits[:start], digits[start:]


@dataclass(frozen=True)
class LineWitness:
    """An offset ``p`` with ``R v + p`` inside the limit Cantor set.

    ``cycle`` is the periodic orbit of the offset in the interval graph; for
    ``transposed`` witnesses (horizontal lines) the graph was built for the
    transposed alphabet and ``p = (0, s)``.
    """

    v: tuple[int, int]
    M: int
    offset: Fraction
    cycle: tuple[Node, ...]
    Mb: int
    transposed: bool = False

    @property
    def p(self) -> tuple[Fraction, Fraction]:
        if self.transposed:
            return (Fraction(0), self.offset)
        return (self.offset, Fraction(0))

    @property
    def is_axis(self) -> bool:
        return self.v[0] == 0 or self.v[1] == 0

    def expansion(self) -> str:
        pre, per = base_m_expansion(self.offset, self.M)
        return "0." + "".join(map(str, pre)) + "(" + "".join(map(str, per)) + ")"

    def describe(self) -> str:
        coord = "y" if self.transposed else "x"
        return f"{coord}-offset {self.offset} (base-{self.M} expansion: {self.expansion()})"

    def cell_digits(self, k: int) -> list[int]:
        """First ``k`` cells along the cycle (column or row digits for axis lines)."""
        return [self.cycle[j % len(self.cycle)][1] for j in range(k)]

    def lattice_base(self, k: int) -> tuple[int, int]:
        """Base point ``p^(k)`` of a discrete line ``Z v + p^(k)`` inside the level-k iterate.

        Axis lines read the digits off the cell cycle.  Other lines round
        ``M^k p`` down in coordinates where ``v`` is positive and up-then-minus-one
        where it is negative, so that ``M^k p + (t + eps) v`` sits in the open
        cell ``p^(k) + t v + (0, 1)^2`` for every integer ``t``.
        """
        N = self.M**k
        if self.is_axis:
            digits = self.cell_digits(k)
            d = sum(c * self.M ** (k - 1 - j) for j, c in enumerate(digits))
            return (0, d) if self.transposed else (d, 0)
        out = []
        for coord, comp in zip(self.p, self.v):
            u = coord * N
            out.append((math.floor(u) if comp > 0 else math.ceil(u) - 1) % N)
        return out[0], out[1]

    def lattice_line(self, k: int) -> GridSet:
        """The ``N`` points ``Z v + p^(k)`` in ``Z_{M^k}^2``."""
        N = self.M**k
        px, py = self.lattice_base(k)
        t = np.arange(N)
        return GridSet(N, tuple(zip(((px + t * self.v[0]) % N).tolist(), ((py + t * self.v[1]) % N).tolist())))

    def to_json(self) -> dict:
        return {
            "v": list(self.v),
            "p": [str(c) for c in self.p],
            "offset": str(self.offset),
            "expansion": self.expansion(),
            "cycle": [list(n) for n in self.cycle],
        }


def _cycle_offset(cycle: list[Node], M: int, Mb: int) -> Fraction:
    if cycle[0][0] == "point":
        return Fraction(cycle[0][1], Mb)
    L = len(cycle)
    acc = 0
    for j in range(L):
        s, s_next = cycle[j][1], cycle[(j + 1) % L][1]
        r = (s_next - M * s) % Mb
        n = (M * s + r - s_next) // Mb
        acc = acc * M + n
    # unique fixed point of the composed affine branch; lift lives in [s_0, s_0+1]/Mb
    return Fraction(acc, M**L - 1) % 1


def line_in_cantor(A: Alphabet2D, v) -> LineWitness | None:
    """Return a witness offset if some line in direction ``v`` lies in the limit set."""
    a, b = normalize_direction(v)
    if b == 0:
        w = line_in_cantor(A.transpose(), (0, 1))
        if w is None:
            return None
        return LineWitness((1, 0), A.M, w.offset, w.cycle, w.Mb, transposed=True)
    iv = interval_set(A, (a, b))
    cycle = find_cycle(orbit_graph(iv))
    if cycle is None:
        return None
    return LineWitness((a, b), A.M, _cycle_offset(cycle, A.M, iv.Mb), tuple(cycle), iv.Mb)


@dataclass(frozen=True)
class PairVerdict:
    obstructed: bool
    v: tuple[int, int] | None = None
    p: LineWitness | None = None
    q: LineWitness | None = None

    def to_json(self) -> dict:
        if not self.obstructed:
            return {"obstructed": False}
        return {
            "obstructed": True,
            "v": list(self.v),
            "p": self.p.describe(),
            "q": self.q.describe(),
            "p_witness": self.p.to_json(),
            "q_witness": self.q.to_json(),
        }


def orthogonal_pair_condition(A: Alphabet2D, B: Alphabet2D) -> PairVerdict:
    """First ``v`` with a line along ``v`` in X and a line along ``v``-perp in Y."""
    if A.M != B.M:
        raise ValueError("alphabets must share the base M")
    for v in coprime_directions(A.M):
        wp = line_in_cantor(A, v)
        if wp is None:
            continue
        wq = line_in_cantor(B, perp(v))
        if wq is not None:
            return PairVerdict(True, v, wp, wq)
    return PairVerdict(False)


@dataclass(frozen=True)
class FullRangeVerdict:
    """Whether the FUP exponent beats the trivial ``max(0, 1 - (dA + dB)/2)``."""

    holds: bool
    branch: str  # "inner-product" or "orthogonal-pair"
    detail: dict

    def to_json(self) -> dict:
        return {"holds": self.holds, "branch": self.branch, **self.detail}


def _nonzero_inner_product(A: Alphabet2D, B: Alphabet2D):
    da = {(x1 - x2, y1 - y2) for (x1, y1), (x2, y2) in product(A.cells, repeat=2)}
    db = {(x1 - x2, y1 - y2) for (x1, y1), (x2, y2) in product(B.cells, repeat=2)}
    for d in sorted(da):
        for e in sorted(db):
            if d[0] * e[0] + d[1] * e[1] != 0:
                return d, e
    return None


def full_range_condition(A: Alphabet2D, B: Alphabet2D) -> FullRangeVerdict:
    if len(A) * len(B) <= A.M * A.M:
        hit = _nonzero_inner_product(A, B)
        detail = {"witness": [list(hit[0]), list(hit[1])]} if hit else {}
        return FullRangeVerdict(hit is not None, "inner-product", detail)
    verdict = orthogonal_pair_condition(A, B)
    return FullRangeVerdict(not verdict.obstructed, "orthogonal-pair", verdict.to_json())


# ---------------------------------------------------------------------------
# Margins


@dataclass(frozen=True)
class MarginReport:
    v: tuple[int, int]
    margin: float
    resolution: int

    def to_json(self) -> dict:
        return {"v": list(self.v), "margin": self.margin, "resolution": self.resolution}


def _torus_gap(u: np.ndarray, lo: float, width: float) -> np.ndarray:
    d = (u - (lo + width / 2) + 0.5) % 1.0 - 0.5
    return np.maximum(np.abs(d) - width / 2, 0.0)


def distance_to_drawing(A: Alphabet2D, xs: np.ndarray, ys: np.ndarray) -> np.ndarray:
    """l-infinity torus distance from each point to the closed drawing of ``A``."""
    w = 1.0 / A.M
    cells = np.asarray(A.cells, dtype=float) * w
    dx = _torus_gap(xs[..., None], cells[:, 0], w)
    dy = _torus_gap(ys[..., None], cells[:, 1], w)
    return np.maximum(dx, dy).min(axis=-1)


def line_margin(A: Alphabet2D, v, resolution: int) -> MarginReport:
    """Sampled ``inf_p sup_{x in R v + p} d(x, A)``.

    Offsets run over ``resolution`` points transverse to the line and each line
    is sampled at ``resolution * max(|a|, |b|)`` points.
    """
    if resolution < 8:
        raise ValueError("resolution must be >= 8")
    a, b = normalize_direction(v)
    offs = np.arange(resolution) / resolution
    nt = resolution * max(abs(a), abs(b))
    ts = np.arange(nt) / nt
    if b != 0:
        xs = offs[:, None] + ts[None, :] * a
        ys = np.broadcast_to(ts[None, :] * b, xs.shape)
    else:
        xs = np.broadcast_to(ts[None, :] * a, (resolution, nt))
        ys = np.broadcast_to(offs[:, None], xs.shape)
    d = distance_to_drawing(A, xs % 1.0, ys % 1.0)
    return MarginReport((a, b), float(d.max(axis=1).min()), resolution)
