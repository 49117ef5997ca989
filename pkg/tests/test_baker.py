import math
import warnings

import numpy as np
import pytest

from fup2d.baker import (
    CutoffProfile,
    SupportSpec,
    baker_blocks,
    build_baker,
    decay_exponent,
    dft_matrix,
    propagation_check,
    smooth_bump,
    spectral_gap_experiment,
    spectral_radius,
    spectrum,
)
from fup2d.cantor import Alphabet2D
from fup2d.errors import ResourceCapError

import oracles

IND = CutoffProfile("indicator")
CENTRED = CutoffProfile(offset=0.5)


def test_bump_shape():
    assert smooth_bump(0.5) == pytest.approx(1.0)
    assert smooth_bump(0.0) == 0 and smooth_bump(1.0) == 0
    x = np.linspace(0.01, 0.49, 50)
    assert np.allclose(smooth_bump(x), smooth_bump(1 - x))
    p = CutoffProfile("plateau-bump", (0.3, 0.7))
    assert np.allclose(p(np.linspace(0.3, 0.7, 9)), 1.0)
    assert p(0.0) == 0 and p(1.0) == 0


def test_cutoff_validation_and_json():
    with pytest.raises(ValueError):
        CutoffProfile("box")
    with pytest.raises(ValueError):
        CutoffProfile("plateau-bump", (0.7, 0.3))
    with pytest.raises(ValueError):
        CutoffProfile.from_json({"kind": "smooth-bump", "width": 1})
    c = CutoffProfile("plateau-bump", (0.2, 0.6), 0.5)
    assert CutoffProfile.from_json(c.to_json()) == c


def test_samples_vanish_at_left_endpoint():
    s = CutoffProfile().samples(9)
    assert s[0] == 0 and s.max() <= 1
    # the right end is not a sample point, so the last sample mirrors the second
    assert s[-1] == pytest.approx(s[1]) and s[-1] > 0


def test_two_by_two_hand_example():
    B = build_baker(2, [0], 1, IND)
    assert np.allclose(B.matrix, np.array([[1, 0], [1, 0]]) / math.sqrt(2))
    assert B.norm() == pytest.approx(1.0)


def test_zero_cutoff_gives_zero_operator():
    B = build_baker(3, [0, 2], 3, CutoffProfile("zero"))
    assert not B.matrix.any()
    assert spectral_radius(B) == 0


def test_default_k1_operator_is_zero():
    # one-point blocks are sampled at the left endpoint, where the bump vanishes
    assert not build_baker(3, [0, 2], 1).matrix.any()


def test_alphabet_validation():
    with pytest.raises(ValueError):
        build_baker(3, [0, 1, 2], 2)
    with pytest.raises(ValueError):
        build_baker(3, [], 2)
    with pytest.raises(ValueError):
        build_baker(3, [0], 0)
    with pytest.raises(ResourceCapError):
        build_baker(3, [0, 2], 6, cap=1000)


@pytest.mark.parametrize("cut", [CutoffProfile(), CENTRED, CutoffProfile("plateau-bump"), IND])
def test_one_dim_contraction(cut):
    for M, A in [(2, [0]), (3, [0, 2]), (4, [1, 2])]:
        for k in range(1, 5):
            assert build_baker(M, A, k, cut).norm() <= 1 + 1e-9


def test_two_dim_contraction():
    A = Alphabet2D(2, ((0, 0), (1, 1)))
    for k in (1, 2, 3):
        B = build_baker(2, A, k, CENTRED, dim=2)
        assert B.matrix.shape == (4**k, 4**k)
        assert B.norm() <= 1 + 1e-9


def test_two_dim_is_tensor_of_one_dim():
    # a product alphabet gives the Kronecker product of 1D operators
    A = Alphabet2D(3, ((0, 0), (0, 2), (2, 0), (2, 2)))
    B2 = build_baker(3, A, 2, CENTRED, dim=2).matrix
    B1 = build_baker(3, [0, 2], 2, CENTRED).matrix
    assert np.allclose(B2, np.kron(B1, B1))


def test_indicator_operator_is_unitary_times_projection():
    # indicator cutoff: B = F_N^* blockdiag(F_n) restricted to the kept blocks
    M, k = 3, 2
    N, n = M**k, M ** (k - 1)
    U = dft_matrix(N).conj().T @ np.kron(np.eye(M), dft_matrix(n))
    assert np.allclose(U.conj().T @ U, np.eye(N))
    P = np.diag(np.r_[np.ones(2 * n), np.zeros(n)])
    assert np.allclose(build_baker(M, [0, 1], k, IND).matrix, U @ P)


def test_block_sum_identity():
    blocks = baker_blocks(3, [0, 2], 3, CENTRED)
    assert set(blocks) == {0, 2}
    assert np.allclose(sum(blocks.values()), build_baker(3, [0, 2], 3, CENTRED).matrix)


def test_adjoint_identity():
    # with psi^F = F^* psi F: psi^F B phi^F = F^* conj(phi B psi)^* F, here F B F^* = B^T
    rng = np.random.default_rng(3)
    B = build_baker(3, [0, 2], 3, CENTRED).matrix
    N = B.shape[0]
    F = dft_matrix(N)
    phi = np.diag(rng.standard_normal(N))
    psi = np.diag(rng.standard_normal(N))
    lhs = F.conj().T @ psi @ F @ B @ F.conj().T @ phi @ F
    rhs = F.conj().T @ (phi @ B @ psi).T @ F
    assert np.abs(F @ B @ F.conj().T - B.T).max() < 1e-10
    assert np.abs(lhs - rhs).max() < 1e-10


def test_spectrum_ordering_and_oracles():
    B = build_baker(3, [0, 2], 3, CENTRED)
    ev = spectrum(B)
    assert np.all(np.diff(np.abs(ev)) <= 1e-12)
    ref = oracles.mp_eigvals(B.matrix)
    assert np.allclose(np.sort(np.abs(ev)), np.sort(np.abs(ref)), atol=1e-10)
    assert np.allclose(np.sort(np.abs(ev)), np.sort(np.abs(oracles.schur_eigvals(B.matrix))), atol=1e-10)


# radii for M=3, alphabet {0, 2}, default sampling, checked below against two oracles
DEFAULT_RADII = {2: 0.446289, 3: 0.31759, 4: 0.304724, 5: 0.30111}


def test_frozen_radii():
    for k, r in DEFAULT_RADII.items():
        B = build_baker(3, [0, 2], k)
        assert spectral_radius(B) == pytest.approx(r, abs=1e-6)
        ref = oracles.mp_eigvals(B.matrix) if k <= 3 else oracles.schur_eigvals(B.matrix)
        assert np.abs(ref).max() == pytest.approx(r, abs=1e-6)


def test_centred_sampling_radii_decrease():
    # informational: sampling at cell centres makes k = 1 nontrivial
    radii = [spectral_radius(build_baker(3, [0, 2], k, CENTRED)) for k in range(1, 6)]
    assert radii[4] < radii[0]


def test_radius_at_most_norm():
    for k in range(1, 5):
        for cut in (CutoffProfile(), CENTRED, IND):
            B = build_baker(3, [0, 2], k, cut)
            assert spectral_radius(B) <= B.norm() + 1e-12


def test_gap_experiment_one_dim():
    t = spectral_gap_experiment(3, [0, 2], range(2, 5))
    assert [r[0] for r in t.rows] == [2, 3, 4]
    assert t.beta_ref > 0 and 0 < t.rows[0][2] < 1
    assert t.to_json()["rows"][0]["k"] == 2


def test_gap_experiment_obstructed_warning():
    A = Alphabet2D(2, ((0, 0), (0, 1), (1, 0)))
    with pytest.warns(UserWarning, match="orthogonal line pair"):
        t = spectral_gap_experiment(2, A, [1, 2], CENTRED, dim=2)
    assert t.warnings


def test_gap_experiment_two_dim_line_free():
    A = Alphabet2D(3, ((0, 0), (0, 1), (1, 2), (2, 0), (2, 2)))
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        t = spectral_gap_experiment(3, A, [1, 2, 3], CENTRED, dim=2, cap=10**6)
    assert t.beta_ref > 0
    assert all(r <= 1 + 1e-9 for _, r, _ in t.rows)


def test_indicator_note():
    assert "indicator cutoff is not smooth" in spectral_gap_experiment(3, [0, 2], [2], IND).warnings


def test_support_spec_parsing():
    assert SupportSpec.from_json({"interval": [0.1, 0.2]}).box == ((0.1, 0.2),)
    assert SupportSpec.from_json({"rect": [[0.1, 0.2], [0.3, 0.4]]}).box == ((0.1, 0.2), (0.3, 0.4))
    assert SupportSpec.from_json({"kind": "zero"}).is_zero
    with pytest.raises(ValueError):
        SupportSpec.from_json({"interval": [0.5, 0.2]})
    with pytest.raises(ValueError):
        SupportSpec.from_json({"box": [0.1, 0.2]})


def test_propagation_zero_phi():
    B = build_baker(3, [0, 2], 3)
    res = propagation_check({"kind": "zero"}, {"interval": [0.02, 0.12]}, B)
    assert res.norm == 0


def test_propagation_overlap_fails_hypothesis():
    B = build_baker(3, [0, 2], 3)
    # psi on [0.05, 0.2] maps to [0.15, 0.6] under x -> 3x, which meets phi
    res = propagation_check({"interval": [0.3, 0.5]}, {"interval": [0.05, 0.2]}, B)
    assert not res.hypothesis_met and res.separation == 0
    assert res.norm > 1e-3


def test_propagation_separated_decays():
    phi, psi = {"interval": [0.55, 0.9]}, {"interval": [0.02, 0.12]}
    res = [propagation_check(phi, psi, build_baker(3, [0, 2], k, cap=10**6)) for k in range(2, 7)]
    assert all(r.hypothesis_met for r in res)
    assert res[0].separation == pytest.approx(0.16)
    norms = [r.norm for r in res]
    assert all(b < a for a, b in zip(norms, norms[1:]))


def test_decay_exponent():
    Ns = [3, 9, 27, 81]
    assert decay_exponent(Ns, [N**-2.5 for N in Ns]) == pytest.approx(2.5)
    with pytest.raises(ValueError):
        decay_exponent([3, 9], [1.0, 0.0])
