import numpy as np
import pytest

from dfam.errors import BadBinCount, BadWindowSize, NegativeFrequency
from dfam.spectral import (HASH_IDS, DominantFrequencies, HashSpec,
                           dft_magnitude, dominant_frequencies,
                           hash_frequency, hash_tuple, naive_dft_magnitude)


class TestDft:
    def test_constant_input_is_dc_only(self):
        spec = dft_magnitude(np.full(8, 2.5), 50.0)
        assert spec.magnitudes.shape == (5,)
        assert np.isclose(spec.magnitudes[0], 8 * 2.5)
        assert np.all(spec.magnitudes[1:] < 1e-12)

    def test_pure_tone_lands_on_its_index(self):
        x = np.sin(2 * np.pi * 2 * np.arange(8) / 8)
        spec = dft_magnitude(x, 50.0)
        assert np.isclose(spec.magnitudes[2], 4.0)
        others = np.delete(spec.magnitudes, 2)
        assert np.all(others < 1e-12)

    def test_matches_naive_oracle(self):
        rng = np.random.default_rng(7)
        for w in (32, 64, 128):
            for _ in range(5):
                x = rng.normal(size=w)
                fast = dft_magnitude(x, 50.0).magnitudes
                slow = naive_dft_magnitude(x, 50.0).magnitudes
                err = np.abs(fast - slow) / np.maximum(np.abs(slow), 1e-12)
                assert err.max() < 1e-9

    def test_parseval_identity(self):
        rng = np.random.default_rng(3)
        w = 64
        x = rng.normal(size=w)
        mags = naive_dft_magnitude(x, 50.0).magnitudes
        twosided = mags[0] ** 2 + mags[-1] ** 2 + 2 * np.sum(mags[1:-1] ** 2)
        assert np.isclose(np.sum(x ** 2), twosided / w, rtol=1e-9)

    def test_rejects_bad_window(self):
        with pytest.raises(BadWindowSize):
            dft_magnitude(np.zeros(7), 50.0)
        with pytest.raises(BadWindowSize):
            dft_magnitude(np.zeros(4), 50.0)


class TestDominantFrequencies:
    def test_two_tone_example(self):
        w, fs = 128, 50.0
        n = np.arange(w)
        x = np.sin(2 * np.pi * 5 * n / w) + 0.5 * np.sin(2 * np.pi * 30 * n / w)
        df = dominant_frequencies(dft_magnitude(x, fs), 3, fs)
        assert np.allclose(df.values_hz, [1.953125, 11.71875, 16.796875])

    def test_zero_window_reports_lowest_representable(self):
        df = dominant_frequencies(dft_magnitude(np.zeros(128), 50.0), 3, 50.0)
        assert np.allclose(df.values_hz, [0.390625, 8.59375, 16.796875])

    def test_single_bin(self):
        w, fs = 128, 50.0
        x = np.sin(2 * np.pi * 10 * np.arange(w) / w)
        df = dominant_frequencies(dft_magnitude(x, fs), 1, fs)
        assert np.isclose(df.values_hz[0], 3.90625)

    def test_scale_invariance(self):
        rng = np.random.default_rng(11)
        x = rng.normal(size=64)
        base = dominant_frequencies(dft_magnitude(x, 50.0), 4, 50.0)
        for c in (0.01, 3.0, 1e6):
            scaled = dominant_frequencies(dft_magnitude(c * x, 50.0), 4, 50.0)
            assert np.array_equal(base.values_hz, scaled.values_hz)

    def test_values_stay_inside_bins(self):
        rng = np.random.default_rng(13)
        for _ in range(20):
            g = int(rng.integers(1, 17))
            x = rng.normal(size=64)
            df = dominant_frequencies(dft_magnitude(x, 50.0), g, 50.0)
            for i, v in enumerate(df.values_hz):
                assert df.bin_edges_hz[i] < v <= df.bin_edges_hz[i + 1] + 1e-12
                assert 0 < v <= 25.0

    def test_bad_bin_count(self):
        spec = dft_magnitude(np.zeros(32), 50.0)
        with pytest.raises(BadBinCount):
            dominant_frequencies(spec, 0, 50.0)
        with pytest.raises(BadBinCount):
            dominant_frequencies(spec, 17, 50.0)


class TestHashes:
    def test_hand_anchors(self):
        assert hash_frequency(5.0, HashSpec("H2", 50.0, 128, 3)) == 1
        assert hash_frequency(24.6, HashSpec("H5", 50.0, 128, 3)) == 0
        assert hash_frequency(4.7, HashSpec("H7", 50.0, 128, 3)) == 12

    def test_bucket_counts_at_reference_config(self):
        expected = {"H0": 4, "H1": 3, "H2": 3, "H3": 2, "H4": 13, "H5": 25,
                    "H6": 128, "H7": 64, "H8": 43}
        for hid, h in expected.items():
            assert HashSpec(hid, 50.0, 128, 3).bucket_count == h

    def test_window_dependent_bucket_counts(self):
        for w in (32, 64, 128, 256, 512):
            assert HashSpec("H6", 50.0, w, 3).bucket_count == w
            assert HashSpec("H7", 50.0, w, 3).bucket_count == round(w / 2)
            h8 = HashSpec("H8", 50.0, w, 3).bucket_count
            assert h8 == int(np.floor(w / 3 + 0.5))

    def test_outputs_in_range_for_all_functions(self):
        rng = np.random.default_rng(17)
        vs = rng.uniform(0.0, 25.0, size=2000)
        for hid in HASH_IDS:
            spec = HashSpec(hid, 50.0, 128, 3)
            for v in vs:
                b = hash_frequency(float(v), spec)
                assert 0 <= b < spec.bucket_count

    def test_negative_frequency_rejected(self):
        with pytest.raises(NegativeFrequency):
            hash_frequency(-0.1, HashSpec("H5", 50.0, 128, 3))

    def test_tuple_example_and_determinism(self):
        spec = HashSpec("H2", 50.0, 128, 3)
        df = DominantFrequencies(np.array([5.0, 12.2, 20.1]),
                                 np.array([0.0, 25 / 3, 50 / 3, 25.0]))
        t1 = hash_tuple(df, spec)
        t2 = hash_tuple(df, spec)
        assert np.array_equal(t1, [1, 1, 0])
        assert np.array_equal(t1, t2)

    def test_tuple_length_must_match_bins(self):
        spec = HashSpec("H5", 50.0, 128, 4)
        df = DominantFrequencies(np.array([1.0, 2.0]), np.array([0.0, 12.5, 25.0]))
        with pytest.raises(BadBinCount):
            hash_tuple(df, spec)
