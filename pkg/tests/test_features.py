import numpy as np
import pytest

from dfam.errors import DegenerateWindow, ShapeMismatch
from dfam.features import (FeatureVector, extract_features, feature_names,
                           write_features_csv)
from dfam.signal import Window


def window_set(axes_by_key, w=64):
    out = {}
    for key, axes in axes_by_key.items():
        device = "phone" if key.startswith("phone") else "watch"
        sensor = "accelerometer" if key.endswith("accel") else "gyroscope"
        out[key] = Window(device, sensor, 0, np.asarray(axes, dtype=np.float64))
    return out


def full_set(w=64, fill=0.0):
    keys = ("phone_accel", "phone_gyro", "watch_accel", "watch_gyro")
    return window_set({k: np.full((3, w), fill) for k in keys}, w)


def named(fv):
    return dict(zip(fv.names, fv.values))


class TestNamesAndShape:
    def test_names_unique_and_fixed_per_subset(self):
        for sensors, n_streams in (("both", 4), ("accel", 2), ("gyro", 2)):
            names = feature_names(sensors)
            assert len(names) == len(set(names))
            assert len(names) == n_streams * (3 * 7 + 1 + 3)

    def test_vector_matches_names(self):
        fv = extract_features(full_set(), 50.0, "both")
        assert fv.names == feature_names("both")
        assert fv.values.shape[0] == len(fv.names)
        assert np.all(np.isfinite(fv.values))


class TestValues:
    def test_constant_window_stats(self):
        ws = full_set(fill=3.5)
        fv = named(extract_features(ws, 50.0, "both"))
        assert fv["phone_accel_x_mean"] == 3.5
        assert fv["phone_accel_x_min"] == 3.5
        assert fv["phone_accel_x_max"] == 3.5
        assert fv["phone_accel_x_std"] == 0.0
        assert fv["phone_accel_x_var"] == 0.0
        assert fv["phone_accel_x_fft_entropy"] == 0.0
        # zero-variance axes define correlation as 0
        assert fv["watch_gyro_corr_rms"] == 0.0

    def test_hand_arithmetic_mean_and_var(self):
        ws = full_set(w=64)
        seq = np.resize([1.0, 2.0, 3.0], 3)
        ws2 = window_set({"phone_accel": np.tile(seq, (3, 1))}, w=3)
        ws2.update({k: Window(w.device, w.sensor, 0, np.zeros((3, 3)))
                    for k, w in ws.items() if k != "phone_accel"})
        fv = named(extract_features(ws2, 50.0, "both"))
        assert np.isclose(fv["phone_accel_x_mean"], 2.0)
        assert np.isclose(fv["phone_accel_x_var"], 2.0 / 3.0)

    def test_identical_axes_give_rms_correlation_one(self):
        rng = np.random.default_rng(1)
        row = rng.normal(size=64)
        ws = full_set()
        ws["phone_accel"] = Window("phone", "accelerometer", 0,
                                   np.tile(row, (3, 1)))
        fv = named(extract_features(ws, 50.0, "both"))
        assert np.isclose(fv["phone_accel_corr_rms"], 1.0)

    def test_entropy_bounds_and_energy_sign(self):
        rng = np.random.default_rng(2)
        w = 64
        keys = ("phone_accel", "phone_gyro", "watch_accel", "watch_gyro")
        ws = window_set({k: rng.normal(size=(3, w)) for k in keys}, w)
        fv = named(extract_features(ws, 50.0, "both"))
        for key in keys:
            for axis in "xyz":
                assert 0.0 <= fv[f"{key}_{axis}_fft_entropy"] <= np.log(w / 2)
                assert fv[f"{key}_{axis}_fft_energy"] >= 0.0
                assert (fv[f"{key}_{axis}_min"] <= fv[f"{key}_{axis}_mean"]
                        <= fv[f"{key}_{axis}_max"])

    def test_scale_covariance(self):
        rng = np.random.default_rng(3)
        w = 64
        keys = ("phone_accel", "phone_gyro", "watch_accel", "watch_gyro")
        base_axes = {k: rng.normal(size=(3, w)) for k in keys}
        c = 3.7
        f1 = named(extract_features(window_set(base_axes, w), 50.0, "both"))
        f2 = named(extract_features(
            window_set({k: c * v for k, v in base_axes.items()}, w), 50.0, "both"))
        for key in keys:
            for axis in "xyz":
                assert np.isclose(f2[f"{key}_{axis}_mean"], c * f1[f"{key}_{axis}_mean"])
                assert np.isclose(f2[f"{key}_{axis}_std"], c * f1[f"{key}_{axis}_std"])
                assert np.isclose(f2[f"{key}_{axis}_var"], c * c * f1[f"{key}_{axis}_var"])
                assert np.isclose(f2[f"{key}_{axis}_fft_energy"],
                                  c * c * f1[f"{key}_{axis}_fft_energy"])
                assert np.isclose(f2[f"{key}_{axis}_fft_entropy"],
                                  f1[f"{key}_{axis}_fft_entropy"])
            assert np.isclose(f2[f"{key}_corr_rms"], f1[f"{key}_corr_rms"])


class TestErrors:
    def test_mismatched_lengths(self):
        ws = full_set(w=64)
        ws["watch_gyro"] = Window("watch", "gyroscope", 0, np.zeros((3, 32)))
        with pytest.raises(ShapeMismatch):
            extract_features(ws, 50.0, "both")

    def test_degenerate_window(self):
        keys = ("phone_accel", "phone_gyro", "watch_accel", "watch_gyro")
        ws = window_set({k: np.zeros((3, 1)) for k in keys}, 1)
        with pytest.raises(DegenerateWindow):
            extract_features(ws, 50.0, "both")

    def test_feature_vector_rejects_nan(self):
        with pytest.raises(ShapeMismatch):
            FeatureVector(np.array([1.0, np.nan]), ["a", "b"])


def test_csv_dump(tmp_path):
    fvs = [extract_features(full_set(fill=float(i)), 50.0, "accel", label=f"a{i}")
           for i in range(3)]
    path = tmp_path / "features.csv"
    write_features_csv(fvs, path)
    lines = path.read_text().strip().splitlines()
    assert lines[0] == ",".join(feature_names("accel")) + ",label"
    assert len(lines) == 4
    assert lines[1].endswith(",a0")
    assert lines[1].split(",")[0] == "0"  # phone_accel_x_mean of the 0-filled set
