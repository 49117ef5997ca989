import cmath
import math

import numpy as np
import pytest

from fup2d.cantor import GridSet, upper_right_neighborhood
from fup2d.dft import GridFunction, dft
from fup2d.errors import TheoremViolationError, UnsupportedCaseError, UnsupportedLatticeError
from fup2d.lines import all_lines, canonicalize_line, line_points
from fup2d.polymethod import (
    BivarPoly,
    bezout_intersection,
    candidate_lines,
    cuts_out_line,
    eval_zero_set,
    line_poly,
    localize_to_line,
    min_vanishing_poly,
    multiplier_from_poly,
    one_dim_annihilator,
    separating_poly,
    seven_polynomials,
)

import oracles

QUAD = {(2, 0): 1, (1, 1): 4, (0, 1): 1, (0, 0): -1}


def e(c, N):
    return cmath.exp(2j * math.pi * c / N)


def test_bivarpoly_metadata():
    F = BivarPoly(QUAD)
    assert F.degree == 2 and F.total_degree == 2
    assert F.lattice_rank == 2 and F.lattice_index == 1
    G = BivarPoly({(1, 1): 1, (0, 0): -1})
    assert G.lattice_rank == 1 and G.support_lattice() == [(1, 1)]
    H = BivarPoly({(2, 0): 1, (0, 2): 1, (0, 0): 3})
    assert H.lattice_index == 4
    assert BivarPoly({(0, 0): 0}).is_zero


def test_bivarpoly_json_round_trip():
    F = BivarPoly({(2, 1): 1 - 2j, (0, 0): 0.5})
    assert BivarPoly.from_json(F.to_json()).allclose(F, 0)
    with pytest.raises(ValueError):
        BivarPoly.from_json({"terms": [], "x": 1})


def test_zero_set_antidiagonal():
    rep = eval_zero_set(BivarPoly({(1, 1): 1, (0, 0): -1}), 5)
    assert rep.count == 5
    assert set(rep.zeros.points) == {(t, -t % 5) for t in range(5)}


def test_zero_set_column():
    rep = eval_zero_set(BivarPoly({(1, 0): 1, (0, 0): -1}), 6)
    assert set(rep.zeros.points) == {(0, y) for y in range(6)}


def test_quadratic_has_no_torus_zeros():
    # |1 - z^2| <= 2 < 3 <= |4z + 1| on the unit circle, so every count is 0
    F = BivarPoly(QUAD)
    for N in range(2, 65):
        assert eval_zero_set(F, N).count == oracles.mp_zero_count(QUAD, N) == 0


def test_line_polys_cut_out_lines():
    for N in (5, 8, 9):
        for ln in all_lines(N):
            if ln.size > N / 2:
                continue
            P = line_poly(ln)
            assert P.degree <= 2 * ln.size
            assert eval_zero_set(P, N).zeros == line_points(ln)


def test_min_vanishing_single_point():
    S = GridSet(7, ((3, 5),))
    F = min_vanishing_poly(S)
    assert F.degree == 1
    assert abs(F(e(3, 7), e(5, 7))) < 1e-10
    assert np.linalg.norm(list(F.coeffs.values())) == pytest.approx(1.0)


def test_min_vanishing_three_points():
    S = GridSet(4, ((0, 0), (1, 0), (0, 1)))
    F = min_vanishing_poly(S)
    assert max(k for k, _ in F.coeffs) <= 1 and max(l for _, l in F.coeffs) <= 1
    assert max(abs(v) for v in F.values_at(4, S)) <= 1e-10
    # the 3 x 4 evaluation system has a one-dimensional kernel: (1 - z)(1 - w) up to scale
    ref = np.array([1, -1, -1, 1]) / 2
    got = np.array([F.coeffs.get(k, 0) for k in [(0, 0), (0, 1), (1, 0), (1, 1)]])
    assert abs(abs(np.vdot(ref, got)) - 1) < 1e-10


def test_min_vanishing_column():
    S = GridSet(6, tuple((0, y) for y in range(6)))
    F = min_vanishing_poly(S)
    assert F.degree == 1
    # the degree-1 kernel is (1 - z)(a + b w), two-dimensional
    c = lambda k: F.coeffs.get(k, 0)
    assert abs(c((0, 0)) + c((1, 0))) < 1e-12 and abs(c((0, 1)) + c((1, 1))) < 1e-12


def test_min_vanishing_degree_bound():
    rng = np.random.default_rng(11)
    for _ in range(30):
        N = int(rng.integers(3, 10))
        pts = {tuple(p) for p in rng.integers(0, N, (rng.integers(1, 15), 2)).tolist()}
        S = GridSet(N, tuple(pts))
        F = min_vanishing_poly(S)
        assert F.degree <= math.isqrt(len(S))
        assert max(abs(v) for v in F.values_at(N, S)) <= 1e-9


def test_cuts_out_line_examples():
    ln = cuts_out_line(BivarPoly({(1, 1): 1, (0, 0): -e(1, 5)}), 5)
    assert ln is not None and set(line_points(ln).points) == oracles.brute_line(1, 1, 1, 5)
    assert cuts_out_line(BivarPoly(QUAD), 5) is None
    ln = cuts_out_line(BivarPoly({(2, 0): 1, (0, 3): -e(2, 7)}), 7)
    assert set(line_points(ln).points) == oracles.brute_line(2, -3, 2, 7)
    # a root of unity of order 7 gives no line on Z_5^2
    assert cuts_out_line(BivarPoly({(1, 0): 1, (0, 0): -e(1, 7)}), 5) is None


def test_separating_single_point():
    S = GridSet(9, ((4, 2),))
    sep = separating_poly(S)
    assert sep.F.coeffs == {(0, 0): 1}
    assert sep.line.size == 1 and sep.line.contains((4, 2))


def test_separating_points_on_a_column():
    S = GridSet(9, ((2, 1), (2, 5), (2, 7)))
    sep = separating_poly(S)
    assert sep.F.coeffs == {(0, 0): 1}
    assert (sep.line.a, sep.line.b, sep.line.c) == (1, 0, 2)


def test_separating_column_with_stragglers():
    S = GridSet(5, tuple((0, y) for y in range(5)) + ((1, 1), (2, 3)))
    sep = separating_poly(S)
    assert (sep.line.a, sep.line.b, sep.line.c) == (1, 0, 0)
    assert sep.F.degree <= 2
    vals = np.abs(sep.F.values_at(5, GridSet(5, ((1, 1), (2, 3)))))
    assert vals.max() <= 1e-9
    assert set(sep.remainder.points) <= set(line_points(sep.line).points)
    assert len(sep.remainder) > 0


def test_separating_small_r_exhausts():
    # with R = 1 only size-1 lines and constant polynomials are allowed
    S = GridSet(5, ((0, 0), (1, 2), (3, 1)))
    with pytest.raises(TheoremViolationError) as exc:
        separating_poly(S, R=1)
    assert exc.value.payload["R"] == 1


def test_candidate_lines_order():
    S = GridSet(6, ((0, 0), (0, 1), (0, 2), (3, 4)))
    lines = candidate_lines(S, 2)
    assert (lines[0].a, lines[0].b, lines[0].c) == (1, 0, 0)
    assert [ln.size for ln in lines] == sorted(ln.size for ln in lines)


def test_multiplier_examples():
    h = multiplier_from_poly(BivarPoly({(0, 0): 1}), 4)
    assert np.allclose(h.values, 0.25)
    hat = dft(multiplier_from_poly(BivarPoly({(1, 0): 1}), 4)).values
    ref = np.zeros((4, 4))
    ref[1, 0] = 1
    assert np.allclose(hat, ref, atol=1e-14)
    with pytest.raises(ValueError):
        multiplier_from_poly(BivarPoly({(4, 0): 1}), 4)


def test_multiplier_random_degree_three():
    rng = np.random.default_rng(9)
    coeffs = {(k, l): complex(*rng.standard_normal(2)) for k in range(4) for l in range(4)}
    F = BivarPoly(coeffs)
    hat = dft(multiplier_from_poly(F, 8)).values
    ref = np.zeros((8, 8), dtype=complex)
    for (k, l), a in coeffs.items():
        ref[k, l] = a
    assert np.allclose(hat, ref, atol=1e-12)


def _check_localization(f, loc):
    S = set(f.support().points)
    g = loc.g
    assert not g.is_zero()
    assert all(p in S and loc.line.contains(p) for p in g.support())
    nb = upper_right_neighborhood(dft(f).support(), min(loc.R, f.N))
    assert all(p in nb for p in dft(g).support())
    assert loc.line.size <= math.floor(200 * math.sqrt(len(S)))


def test_localize_delta():
    v = np.zeros((8, 8))
    v[3, 4] = 2.0
    f = GridFunction(8, 2, v)
    loc = localize_to_line(f)
    assert loc.line.contains((3, 4))
    assert np.allclose(loc.g.values / loc.g.values[3, 4], v / 2)
    _check_localization(f, loc)


def test_localize_antidiagonal():
    N = 5
    v = np.zeros((N, N))
    for t in range(N):
        v[t, -t % N] = 1
    f = GridFunction(N, 2, v)
    loc = localize_to_line(f)
    assert (loc.line.a, loc.line.b, loc.line.c) == (1, 1, 0)
    ratio = loc.g.values[v > 0] / v[v > 0]
    assert np.allclose(ratio, ratio[0])
    # g^ is supported on the dual line and is modulated along it
    gh = dft(loc.g).values
    supp = {tuple(p) for p in np.argwhere(np.abs(gh) > 1e-9)}
    assert supp == {(t, t) for t in range(N)}
    _check_localization(f, loc)


def test_localize_six_scattered_points():
    rng = np.random.default_rng(6)
    N = 16
    idx = rng.choice(N * N, 6, replace=False)
    v = np.zeros(N * N, dtype=complex)
    v[idx] = rng.standard_normal(6) + 1j * rng.standard_normal(6)
    f = GridFunction(N, 2, v)
    _check_localization(f, localize_to_line(f))


def test_one_dim_annihilator_examples():
    h = one_dim_annihilator([5], 5, 9)
    assert np.allclose(h.values, 1 / 3)
    h = one_dim_annihilator([0, 1], 1, 4)
    z = np.exp(2j * np.pi * np.arange(4) / 4)
    assert np.allclose(h.values, (z - 1) / 2)
    assert abs(h.values[0]) < 1e-15 and abs(h.values[1]) > 0.1


def test_one_dim_annihilator_random():
    rng = np.random.default_rng(8)
    N = 16
    S = sorted(rng.choice(N, 5, replace=False).tolist())
    keep = S[2]
    h = one_dim_annihilator(S, keep, N)
    for s in S:
        if s == keep:
            assert abs(h.values[s]) > 1e-6
        else:
            assert abs(h.values[s]) < 1e-12
    hat = dft(h).values
    assert np.all(np.abs(hat[len(S):]) < 1e-12)


def test_seven_polynomials_forms():
    F = BivarPoly({(0, 0): 1, (1, 0): 1, (0, 1): 1})
    polys = seven_polynomials(F)
    assert polys[0].coeffs == {(0, 0): 1, (0, 1): 1, (1, 0): -1}
    assert polys[3].coeffs == {(0, 0): 1, (0, 2): 1, (2, 0): 1}
    assert polys[6].coeffs == {(0, 0): 1, (0, 2): -1, (2, 0): -1}
    assert [G.degree for G in polys] == [1, 1, 1, 2, 2, 2, 2]


def test_seven_polynomials_cover_small_n():
    F = BivarPoly({(0, 0): 1, (1, 0): 1, (0, 1): 1})
    polys = seven_polynomials(F)
    seen = 0
    for N in range(1, 37):
        cover = np.zeros((N, N), dtype=bool)
        for G in polys:
            cover |= eval_zero_set(G, N).zeros.mask()
        for p in eval_zero_set(F, N).zeros:
            seen += 1
            assert cover[p]
    assert seen > 0  # 1 + z + w vanishes at (e^{2 pi i/3}, e^{4 pi i/3}) and its conjugate


def test_seven_polynomials_errors():
    with pytest.raises(UnsupportedLatticeError):
        seven_polynomials(BivarPoly({(1, 1): 1, (0, 0): -1}))
    with pytest.raises(UnsupportedCaseError):
        seven_polynomials(BivarPoly({(1, 0): 1, (0, 1): 1j}))


def test_bezout_examples():
    v = bezout_intersection(BivarPoly({(1, 0): 1, (0, 0): -1}), BivarPoly({(0, 1): 1, (0, 0): -1}), 12)
    assert (v.count, v.bound, v.ok) == (1, 1, True)
    v = bezout_intersection(BivarPoly({(1, 1): 1, (0, 0): -1}), BivarPoly({(1, 0): 1, (0, 1): -e(1, 8)}), 8)
    assert v.count <= 4 and v.count == 0 and v.ok
    F = BivarPoly(QUAD)
    v = bezout_intersection(F, seven_polynomials(F)[0], 32)
    assert v.ok and v.count <= v.bound == 4


def test_bezout_common_component_is_inconclusive():
    F = BivarPoly({(1, 0): 1, (0, 0): -1})
    G = BivarPoly({(2, 0): 1, (0, 0): -1})
    v = bezout_intersection(F, G, 6)
    assert v.inconclusive and not v.ok
