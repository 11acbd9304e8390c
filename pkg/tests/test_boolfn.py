import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from turbofourier import boolfn as bf


def brute_force_spectrum(table: bf.PseudoBooleanTable) -> np.ndarray:
    """O(4^w) reference transform: fhat(S) = 2^-w sum_x f(x) chi_S(x)."""
    n = table.values.size
    out = np.zeros(n)
    for s in range(n):
        acc = 0.0
        for x in range(n):
            chi = 1 - 2 * (bin(s & x).count("1") & 1)
            acc += table.values[x] * chi
        out[s] = acc / n
    return out


def test_constant_function_spectrum():
    table = bf.PseudoBooleanTable(3, np.ones(8))
    spec = bf.wht_forward(table)
    expected = np.zeros(8)
    expected[0] = 1.0
    np.testing.assert_allclose(spec.coeffs, expected, atol=1e-15)


def test_parity_is_own_spectrum():
    # f = chi_{1,2} on two variables
    vals = np.array([1.0, -1.0, -1.0, 1.0])
    spec = bf.wht_forward(bf.PseudoBooleanTable(2, vals))
    np.testing.assert_allclose(spec.coeffs, [0, 0, 0, 1.0], atol=1e-15)


def test_majority3_spectrum_matches_brute_force():
    table = bf.majority3_table()
    spec = bf.wht_forward(table)
    np.testing.assert_allclose(spec.coeffs, brute_force_spectrum(table), atol=1e-12)
    np.testing.assert_allclose(spec.coeffs[[1, 2, 4]], 0.5, atol=1e-15)
    assert spec.coeffs[7] == pytest.approx(-0.5)
    assert np.count_nonzero(spec.coeffs) == 4


def test_bent_coefficients_all_quarter():
    spec = bf.wht_forward(bf.bent_table(4))
    np.testing.assert_allclose(np.abs(spec.coeffs), 0.25, atol=1e-15)


def test_inverse_single_coefficient_is_parity():
    coeffs = np.zeros(8)
    coeffs[0b101] = 1.0  # {x1, x3}
    table = bf.wht_inverse(bf.FourierSpectrum(3, coeffs))
    for idx in range(8):
        signs = bf.index_to_signs(idx, 3)
        assert table.values[idx] == pytest.approx(signs[0] * signs[2])


def test_inverse_zero_spectrum():
    table = bf.wht_inverse(bf.FourierSpectrum(3, np.zeros(8)))
    assert not table.values.any()


@settings(max_examples=50, deadline=None)
@given(st.integers(1, 8), st.integers(0, 2**32 - 1))
def test_roundtrip_and_parseval(arity, seed):
    rng = np.random.default_rng(seed)
    table = bf.PseudoBooleanTable(arity, rng.standard_normal(1 << arity))
    spec = bf.wht_forward(table)
    back = bf.wht_inverse(spec)
    np.testing.assert_allclose(back.values, table.values, atol=1e-12)
    assert spec.total_energy() == pytest.approx(np.mean(table.values**2), abs=1e-12)


def test_roundtrip_large_arity():
    rng = np.random.default_rng(7)
    table = bf.PseudoBooleanTable(12, rng.standard_normal(1 << 12))
    back = bf.wht_inverse(bf.wht_forward(table))
    np.testing.assert_allclose(back.values, table.values, atol=1e-12)


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 6), st.integers(0, 2**32 - 1))
def test_pm1_functions_have_unit_energy(arity, seed):
    rng = np.random.default_rng(seed)
    vals = rng.choice([-1.0, 1.0], size=1 << arity)
    spec = bf.wht_forward(bf.PseudoBooleanTable(arity, vals))
    assert spec.total_energy() == pytest.approx(1.0, abs=1e-12)


class TestEnergyProfile:
    def test_pure_parity_single_entry(self):
        coeffs = np.zeros(32)
        coeffs[13] = 1.0
        profile = bf.energy_profile(bf.FourierSpectrum(5, coeffs), 0.95)
        assert profile == [(13, 1.0)]

    def test_bent_needs_all_sixteen(self):
        spec = bf.wht_forward(bf.bent_table(4))
        # 15 coefficients cover 15/16 = 0.9375 < 0.95, so all 16 come back
        profile = bf.energy_profile(spec, 0.95)
        assert len(profile) == 16

    def test_majority_half_energy_tie_break(self):
        spec = bf.wht_forward(bf.majority3_table())
        profile = bf.energy_profile(spec, 0.5)
        assert [m for m, _ in profile] == [1, 2]

    def test_sorted_and_crossing_at_last_element(self):
        rng = np.random.default_rng(3)
        spec = bf.wht_forward(bf.PseudoBooleanTable(6, rng.standard_normal(64)))
        frac = 0.8
        profile = bf.energy_profile(spec, frac)
        sq = [v for _, v in profile]
        assert all(a >= b for a, b in zip(sq, sq[1:]))
        total = spec.total_energy()
        assert sum(sq) >= frac * total - 1e-12
        assert sum(sq[:-1]) < frac * total

    def test_zero_energy_rejected(self):
        with pytest.raises(ValueError, match="degenerate"):
            bf.energy_profile(bf.FourierSpectrum(2, np.zeros(4)), 0.9)


class TestFixtures:
    def test_block2_at_all_plus_one(self):
        fx = bf.fixture_tables()
        assert fx["block2"].values[0] == 1.0

    def test_block2_spectrum_single_parity(self):
        spec = bf.wht_forward(bf.fixture_tables()["block2"])
        expected = np.zeros(32)
        expected[bf.BLOCK2_MASK] = 1.0
        np.testing.assert_allclose(spec.coeffs, expected, atol=1e-15)

    def test_block3_four_equal_dominant_coefficients(self):
        table = bf.fixture_tables()["block3"]
        spec = bf.wht_forward(table)
        np.testing.assert_allclose(spec.coeffs, brute_force_spectrum(table), atol=1e-12)
        nz = np.nonzero(np.abs(spec.coeffs) > 1e-12)[0]
        assert sorted(nz.tolist()) == sorted(bf.BLOCK3_SOLUTION_MASKS)
        np.testing.assert_allclose(np.abs(spec.coeffs[nz]), 0.5, atol=1e-15)

    def test_block3_affine_fixtures_match_solution_masks(self):
        fx = bf.fixture_tables()
        for name, mask in zip(
            ("block3_affine1", "block3_affine2", "block3_affine3", "block3_affine4"),
            bf.BLOCK3_SOLUTION_MASKS,
        ):
            spec = bf.wht_forward(fx[name])
            assert abs(abs(spec.coeffs[mask]) - 1.0) < 1e-12

    def test_block1_dominant_coefficient(self):
        # exact expression differs from its best affine fit on 3/32 inputs,
        # so the full-mask coefficient is 1 - 2*3/32 = 13/16 in magnitude
        spec = bf.wht_forward(bf.fixture_tables()["block1"])
        assert abs(spec.coeffs[0b11111]) == pytest.approx(13 / 16, abs=1e-15)
        assert np.argmax(np.abs(spec.coeffs)) == 0b11111

    def test_all_block_fixtures_are_pm1(self):
        for name, table in bf.fixture_tables().items():
            np.testing.assert_allclose(np.abs(table.values), 1.0, atol=0, err_msg=name)


def test_json_roundtrip():
    rng = np.random.default_rng(5)
    table = bf.PseudoBooleanTable(4, rng.standard_normal(16))
    again = bf.PseudoBooleanTable.from_json_dict(table.to_json_dict())
    np.testing.assert_array_equal(again.values, table.values)
    spec = bf.wht_forward(table)
    spec2 = bf.FourierSpectrum.from_json_dict(spec.to_json_dict())
    np.testing.assert_array_equal(spec2.coeffs, spec.coeffs)


def test_invalid_tables_rejected():
    with pytest.raises(ValueError):
        bf.PseudoBooleanTable(3, np.ones(7))
    with pytest.raises(ValueError):
        bf.PseudoBooleanTable(2, np.array([1.0, np.nan, 0.0, 1.0]))
    with pytest.raises(ValueError):
        bf.PseudoBooleanTable(0, np.ones(1))
