"""Tests for StateHSP distributions over general finite abelian groups.

numpy's multidimensional FFT serves as an independent oracle for the direct
character sums, and the (2,...,2) specialization is pinned against the
dedicated Z_2^n code paths.
"""

import numpy as np
import pytest

from hiddencut import abelianhsp, binmath, hcsim, qstate
from hiddencut.abelianhsp import AbelianGroupSpec
from hiddencut.errors import CapacityError, ConsistencyError, DimensionError, DomainError


def fft_oracle(overlap, t, group):
    """p_t via numpy's FFT over the product group."""
    grid = np.asarray(overlap, dtype=complex).reshape(group.moduli) ** t
    return np.fft.fftn(grid).reshape(-1) / group.order


def slow_convolve(f, h, group):
    out = np.zeros(group.order, dtype=complex)
    for k in range(group.order):
        kc = np.array(group.coords(k))
        for kp in range(group.order):
            diff = (kc - np.array(group.coords(kp))) % np.array(group.moduli)
            out[k] += f[kp] * h[group.index(diff)]
    return out


# ---------------------------------------------------------------------------
# group spec
# ---------------------------------------------------------------------------

def test_group_order_and_coords_roundtrip():
    g = AbelianGroupSpec((3, 2, 2))
    assert g.order == 12
    for idx in range(12):
        assert g.index(g.coords(idx)) == idx
    assert g.coords(0) == (0, 0, 0)
    assert g.coords(11) == (2, 1, 1)  # first modulus most significant


def test_group_inverse_permutation():
    g = AbelianGroupSpec((3, 2))
    for idx in range(6):
        coords = np.array(g.coords(idx))
        inv = tuple((-coords) % np.array(g.moduli))
        assert g.inverse_permutation[idx] == g.index(inv)


def test_group_validation():
    with pytest.raises(DomainError):
        AbelianGroupSpec((3, 1))
    with pytest.raises(CapacityError):
        AbelianGroupSpec((4099,))
    with pytest.raises(DimensionError):
        AbelianGroupSpec(())


# ---------------------------------------------------------------------------
# Fourier entries
# ---------------------------------------------------------------------------

def test_fourier_entry_trivial_character():
    g = AbelianGroupSpec((3, 2))
    for idx in range(6):
        entry = abelianhsp.fourier_entry((0, 0), g.coords(idx), g)
        assert entry == pytest.approx(1.0 / np.sqrt(6.0), abs=1e-12)


def test_fourier_entry_binary_specialization():
    g = abelianhsp.binary_group(3)
    for k in range(8):
        for x in range(8):
            entry = abelianhsp.fourier_entry(g.coords(k), g.coords(x), g)
            sign = -1.0 if binmath.index_dot_mod2(np.uint64(k), x) else 1.0
            assert entry == pytest.approx(sign / np.sqrt(8.0), abs=1e-12)


def test_fourier_matrix_unitary():
    g = AbelianGroupSpec((3, 2))
    F = np.array(
        [[abelianhsp.fourier_entry(g.coords(k), g.coords(x), g) for x in range(6)]
         for k in range(6)]
    )
    np.testing.assert_allclose(F @ F.conj().T, np.eye(6), atol=1e-10)


def test_fourier_entry_range_check():
    g = AbelianGroupSpec((3, 2))
    with pytest.raises(DomainError):
        abelianhsp.fourier_entry((3, 0), (0, 0), g)


# ---------------------------------------------------------------------------
# distributions from overlaps
# ---------------------------------------------------------------------------

def test_constant_overlap_gives_point_mass():
    g = AbelianGroupSpec((3, 2))
    p = abelianhsp.distribution_from_overlap(np.ones(6, dtype=complex), 4, g)
    np.testing.assert_allclose(p, [1.0, 0.0, 0.0, 0.0, 0.0, 0.0], atol=1e-12)


def test_subgroup_indicator_uniform_on_annihilator():
    g = AbelianGroupSpec((3, 2))
    subgroup = [g.index((a, 0)) for a in range(3)]
    overlap = np.zeros(6, dtype=complex)
    overlap[subgroup] = 1.0
    p = abelianhsp.distribution_from_overlap(overlap, 1, g)
    annihilator = []
    for k in range(6):
        chars = [
            abelianhsp.fourier_entry(g.coords(k), g.coords(h), g) * np.sqrt(6.0)
            for h in subgroup
        ]
        if all(abs(c - 1.0) < 1e-12 for c in chars):
            annihilator.append(k)
    assert annihilator == [g.index((0, 0)), g.index((0, 1))]
    expected = np.zeros(6)
    expected[annihilator] = 1.0 / len(annihilator)
    np.testing.assert_allclose(p, expected, atol=1e-12)


def test_distribution_matches_fft_oracle():
    g = AbelianGroupSpec((5, 2, 2))
    overlap = abelianhsp.random_character_mixture_overlap(g, seed=2)
    for t in (1, 2, 5):
        ours = abelianhsp.distribution_from_overlap(overlap, t, g)
        np.testing.assert_allclose(ours, fft_oracle(overlap, t, g).real, atol=1e-10)


def test_binary_specialization_matches_hcsim():
    table = qstate.purity_table(qstate.haar_random_state(3, 19))
    g = abelianhsp.binary_group(3)
    for t in (1, 2, 7):
        p_general = abelianhsp.distribution_from_overlap(table.astype(complex), t, g)
        p_binary = hcsim.exact_distribution(table, t).probs
        assert np.max(np.abs(p_general - p_binary)) < 1e-10


def test_overlap_validation_errors():
    g = AbelianGroupSpec((3, 2))
    bad_identity = np.full(6, 0.5, dtype=complex)
    with pytest.raises(DomainError):
        abelianhsp.distribution_from_overlap(bad_identity, 1, g)
    asymmetric = np.ones(6, dtype=complex)
    asymmetric[1] = 0.3j  # value at (0,1)... inverse is itself; break (1,0) vs (2,0)
    asymmetric[g.index((1, 0))] = 0.5
    asymmetric[g.index((2, 0))] = 0.1
    with pytest.raises(DomainError):
        abelianhsp.distribution_from_overlap(asymmetric, 1, g)
    too_big = np.ones(6, dtype=complex)
    too_big[2] = 1.5
    with pytest.raises(DomainError):
        abelianhsp.distribution_from_overlap(too_big, 1, g)


def test_non_mixture_overlap_rejected_not_clamped():
    # conjugate-symmetric with unit identity value, but its spectrum dips
    # negative, so it cannot come from any state
    g = AbelianGroupSpec((4,))
    overlap = np.array([1.0, 0.9, 0.5, 0.9], dtype=complex)
    with pytest.raises(ConsistencyError):
        abelianhsp.distribution_from_overlap(overlap, 1, g)


# ---------------------------------------------------------------------------
# group convolution
# ---------------------------------------------------------------------------

def test_convolve_identity_element():
    g = AbelianGroupSpec((3, 2))
    f = np.random.default_rng(1).random(6)
    delta = np.zeros(6)
    delta[0] = 1.0
    np.testing.assert_allclose(abelianhsp.group_convolve(f, delta, g), f, atol=1e-14)


def test_convolve_matches_slow_oracle_and_commutes():
    g = AbelianGroupSpec((3, 2, 2))
    rng = np.random.default_rng(5)
    f, h = rng.random(12), rng.random(12)
    fast = abelianhsp.group_convolve(f, h, g)
    np.testing.assert_allclose(fast, slow_convolve(f, h, g).real, atol=1e-12)
    np.testing.assert_allclose(fast, abelianhsp.group_convolve(h, f, g), atol=1e-12)


def test_convolution_power_identity():
    g = AbelianGroupSpec((3, 2))
    for seed in range(5):
        overlap = abelianhsp.random_character_mixture_overlap(g, seed=seed)
        p1 = abelianhsp.distribution_from_overlap(overlap, 1, g)
        p4 = abelianhsp.distribution_from_overlap(overlap, 4, g)
        conv = p1
        for _ in range(3):
            conv = abelianhsp.group_convolve(conv, p1, g)
        assert np.max(np.abs(conv - p4)) < 1e-10


def test_convolve_binary_matches_binmath():
    g = abelianhsp.binary_group(4)
    rng = np.random.default_rng(9)
    f, h = rng.random(16), rng.random(16)
    np.testing.assert_allclose(
        abelianhsp.group_convolve(f, h, g), binmath.convolve(f, h), atol=1e-12
    )


def test_convolve_size_mismatch():
    g = AbelianGroupSpec((3, 2))
    with pytest.raises(DimensionError):
        abelianhsp.group_convolve(np.ones(6), np.ones(4), g)


# ---------------------------------------------------------------------------
# synthetic overlaps and serialization
# ---------------------------------------------------------------------------

def test_random_mixtures_always_yield_valid_distributions():
    g = AbelianGroupSpec((3, 2, 2))
    for seed in range(20):
        overlap = abelianhsp.random_character_mixture_overlap(g, seed=seed)
        p = abelianhsp.distribution_from_overlap(overlap, 3, g)
        assert p.min() >= 0.0
        assert p.sum() == pytest.approx(1.0, abs=1e-9)


def test_table_json_roundtrip():
    g = AbelianGroupSpec((3, 2))
    overlap = abelianhsp.random_character_mixture_overlap(g, seed=4)
    doc = abelianhsp.table_to_json(overlap, g)
    assert doc["moduli"] == [3, 2]
    back, back_group = abelianhsp.table_from_json(doc)
    assert back_group.moduli == (3, 2)
    np.testing.assert_allclose(back, overlap, atol=1e-15)
