import numpy as np
import pytest

from dfam import matching
from dfam.errors import (CorruptModel, EmptyActivity, EmptyModel,
                         MisalignedWindows, MissingStream, ShapeMismatch)
from dfam.matching import (ActivityLabel, DfamConfig, DfamModel,
                           WindowSignature, append_signature, build_signature,
                           classify, classify_batch, label_kind, load_model,
                           save_model, score, train)
from dfam.signal import Window

from conftest import make_stream


def brute_force_classify(test: WindowSignature, model: DfamModel) -> str:
    """Independent oracle: loop every (activity, instance), re-derive m by
    tuple comparison, sum (m/s)^s, pick the best name (ties -> smallest)."""
    s = test.axes.shape[0]
    best_name, best_score = None, None
    for label in sorted(model.activity_names):
        total = 0.0
        for inst in model.signatures[label]:
            m = 0
            for k in range(s):
                if tuple(test.axes[k]) == tuple(inst[k]):
                    m += 1
            total += (m / s) ** s
        if best_score is None or total > best_score:
            best_name, best_score = label, total
    return best_name


def random_model(rng, n_act=4, n_inst=6, s=6, g=3, buckets=3):
    cfg = DfamConfig(window_size=128, overlap_ratio=0.5, bins=g, hash_id="H2",
                     sensors="accel" if s == 6 else "both")
    names = [f"act{chr(ord('a') + i)}" for i in range(n_act)]
    labels = [ActivityLabel(n, "simple_pedestrian") for n in names]
    sigs = {n: rng.integers(0, buckets, size=(n_inst, s, g)).astype(np.int32)
            for n in names}
    return DfamModel(cfg, labels, sigs)


class TestScore:
    def test_full_and_zero_match(self):
        a = WindowSignature(np.zeros((3, 3), dtype=np.int32))
        b = WindowSignature(np.ones((3, 3), dtype=np.int32))
        assert score(a, a) == 1.0
        assert score(a, b) == 0.0

    def test_partial_match_value(self):
        a = WindowSignature(np.array([[1, 2], [3, 4], [5, 6]], dtype=np.int32))
        b = WindowSignature(np.array([[1, 2], [3, 4], [5, 7]], dtype=np.int32))
        assert np.isclose(score(a, b), (2 / 3) ** 3)
        assert np.isclose(score(a, b), 8 / 27)

    def test_symmetry_and_value_set(self):
        rng = np.random.default_rng(2)
        s = 6
        allowed = {(m / s) ** s for m in range(s + 1)}
        for _ in range(200):
            a = WindowSignature(rng.integers(0, 3, size=(s, 3)).astype(np.int32))
            b = WindowSignature(rng.integers(0, 3, size=(s, 3)).astype(np.int32))
            v = score(a, b)
            assert v in allowed
            assert score(b, a) == v

    def test_monotone_in_match_count(self):
        s, g = 5, 2
        base = np.arange(s * g, dtype=np.int32).reshape(s, g)
        prev = -1.0
        for m in range(s + 1):
            other = base.copy()
            other[m:] += 100  # keep exactly m matching axes
            v = score(WindowSignature(base), WindowSignature(other))
            assert np.isclose(v, (m / s) ** s)
            assert v > prev
            prev = v

    def test_shape_mismatch(self):
        a = WindowSignature(np.zeros((3, 3), dtype=np.int32))
        b = WindowSignature(np.zeros((4, 3), dtype=np.int32))
        with pytest.raises(ShapeMismatch):
            score(a, b)


class TestBuildSignature:
    def _windows(self, cfg, fill=None):
        rng = np.random.default_rng(0)
        out = {}
        for key in cfg.stream_keys:
            device = "phone" if key.startswith("phone") else "watch"
            sensor = "accelerometer" if key.endswith("accel") else "gyroscope"
            axes = (np.zeros((3, cfg.window_size)) if fill is None
                    else rng.normal(size=(3, cfg.window_size)))
            out[key] = Window(device, sensor, 0, axes)
        return out

    def test_zero_windows_hash_to_tie_break_tuples(self):
        cfg = DfamConfig(sensors="accel", overlap_ratio=0.5)
        sig = build_signature(self._windows(cfg), cfg)
        assert sig.axes.shape == (6, 3)
        # every axis is the all-zero spectrum: identical tie-break tuples
        assert len({tuple(row) for row in sig.axes}) == 1

    def test_single_tone_differs_only_in_its_bin(self):
        cfg = DfamConfig(sensors="accel", overlap_ratio=0.5)
        windows = self._windows(cfg)
        w = cfg.window_size
        # 5.078 Hz: H2 bucket 1, while the zero bin's tie-break hashes to 0
        tone = np.sin(2 * np.pi * 13 * np.arange(w) / w)
        windows["phone_accel"].axes[0] = tone
        sig = build_signature(windows, cfg)
        x_row, y_row = sig.axes[0], sig.axes[1]
        assert x_row[0] != y_row[0]
        assert np.array_equal(x_row[1:], y_row[1:])

    def test_axis_permutation_permutes_signature(self):
        cfg = DfamConfig(sensors="accel", overlap_ratio=0.5)
        windows = self._windows(cfg, fill="random")
        sig = build_signature(windows, cfg)
        swapped = {k: Window(w.device, w.sensor, w.start_index, w.axes.copy())
                   for k, w in windows.items()}
        swapped["phone_accel"].axes[[0, 1]] = swapped["phone_accel"].axes[[1, 0]]
        sig2 = build_signature(swapped, cfg)
        assert np.array_equal(sig2.axes[0], sig.axes[1])
        assert np.array_equal(sig2.axes[1], sig.axes[0])
        assert np.array_equal(sig2.axes[2:], sig.axes[2:])

    def test_misaligned_and_missing_streams(self):
        cfg = DfamConfig(sensors="accel", overlap_ratio=0.5)
        windows = self._windows(cfg)
        windows["watch_accel"].start_index = 64
        with pytest.raises(MisalignedWindows):
            build_signature(windows, cfg)
        del windows["watch_accel"]
        with pytest.raises(MissingStream):
            build_signature(windows, cfg)


class TestTrain:
    def _recordings(self, spec):
        """spec: {label: n_windows}; builds single-stream-length recordings."""
        cfg = DfamConfig(sensors="accel", overlap_ratio=0.0, window_size=32,
                         sampling_hz=50.0)
        recs = []
        rng = np.random.default_rng(1)
        for label, count in spec.items():
            n = 32 * count
            streams = {
                "phone_accel": make_stream(rng.normal(size=(n, 3))),
                "watch_accel": make_stream(rng.normal(size=(n, 3)),
                                           device="watch"),
            }
            recs.append((label, streams))
        return recs, cfg

    def test_equalizes_to_min_count(self):
        recs, cfg = self._recordings({"a": 10, "b": 7, "c": 9})
        model = train(recs, cfg)
        assert model.instance_counts() == {"a": 7, "b": 7, "c": 7}

    def test_single_window_model(self):
        recs, cfg = self._recordings({"only": 1})
        model = train(recs, cfg)
        assert model.instance_counts() == {"only": 1}

    def test_cap_limits_equalized_count(self):
        recs, cfg = self._recordings({"a": 10, "b": 9})
        model = train(recs, cfg, max_per_activity=4)
        assert model.instance_counts() == {"a": 4, "b": 4}

    def test_seeded_training_is_byte_identical(self, tmp_path):
        recs, cfg = self._recordings({"a": 9, "b": 5})
        p1, p2 = tmp_path / "m1.json", tmp_path / "m2.json"
        save_model(train(recs, cfg), p1)
        save_model(train(recs, cfg), p2)
        assert p1.read_bytes() == p2.read_bytes()

    def test_empty_activity(self):
        recs, cfg = self._recordings({"a": 2})
        short = {
            "phone_accel": make_stream(np.zeros((8, 3))),
            "watch_accel": make_stream(np.zeros((8, 3)), device="watch"),
        }
        with pytest.raises(EmptyActivity):
            train(recs + [("tiny", short)], cfg)


class TestClassify:
    def test_unique_exact_match(self):
        rng = np.random.default_rng(3)
        model = random_model(rng, n_act=3, n_inst=1, buckets=5)
        target = model.signatures["actb"][0]
        label, table = classify(WindowSignature(target.copy()), model)
        assert label.name == "actb"
        assert table["actb"] >= 1.0
        assert set(table) == set(model.activity_names)

    def test_tie_breaks_to_smaller_name(self):
        cfg = DfamConfig(sensors="accel", overlap_ratio=0.5)
        sig = np.zeros((6, 3), dtype=np.int32)
        labels = [ActivityLabel("zebra", "simple_pedestrian"),
                  ActivityLabel("aardvark", "simple_pedestrian")]
        model = DfamModel(cfg, labels, {"zebra": sig[np.newaxis].copy(),
                                        "aardvark": sig[np.newaxis].copy()})
        label, table = classify(WindowSignature(sig.copy()), model)
        assert label.name == "aardvark"
        assert table["aardvark"] == table["zebra"]

    def test_agrees_with_brute_force_oracle(self):
        rng = np.random.default_rng(4)
        for _ in range(60):
            model = random_model(rng,
                                 n_act=int(rng.integers(2, 6)),
                                 n_inst=int(rng.integers(1, 8)),
                                 buckets=int(rng.integers(2, 4)))
            test = WindowSignature(
                rng.integers(0, 3, size=(6, 3)).astype(np.int32))
            got, _ = classify(test, model)
            assert got.name == brute_force_classify(test, model)

    def test_batch_matches_single(self):
        rng = np.random.default_rng(5)
        model = random_model(rng)
        tests = [WindowSignature(rng.integers(0, 3, size=(6, 3)).astype(np.int32))
                 for _ in range(20)]
        batch_labels, scores = classify_batch(tests, model)
        for t, bl, row in zip(tests, batch_labels, scores):
            single, table = classify(t, model)
            assert single.name == bl.name
            assert np.allclose(row, [table[n] for n in model.activity_names])

    def test_empty_model_and_shape_mismatch(self):
        cfg = DfamConfig(sensors="accel", overlap_ratio=0.5)
        empty = DfamModel(cfg, [], {})
        sig = WindowSignature(np.zeros((6, 3), dtype=np.int32))
        with pytest.raises(EmptyModel):
            classify(sig, empty)
        rng = np.random.default_rng(6)
        model = random_model(rng)
        with pytest.raises(ShapeMismatch):
            classify(WindowSignature(np.zeros((4, 3), dtype=np.int32)), model)

    def test_scaling_scores_keeps_argmax(self):
        rng = np.random.default_rng(7)
        model = random_model(rng)
        test = WindowSignature(rng.integers(0, 3, size=(6, 3)).astype(np.int32))
        _, table = classify(test, model)
        names = sorted(table)
        vals = np.array([table[n] for n in names])
        for c in (0.5, 2.0, 1e3):
            assert names[int(np.argmax(vals * c))] == names[int(np.argmax(vals))]


class TestPersistence:
    def test_round_trip(self, tmp_path):
        rng = np.random.default_rng(8)
        model = random_model(rng)
        path = tmp_path / "model.json"
        save_model(model, path)
        loaded = load_model(path)
        assert loaded.config == model.config
        assert loaded.activity_names == model.activity_names
        for name in model.activity_names:
            assert np.array_equal(loaded.signatures[name], model.signatures[name])

    def test_append_extends_one_activity(self, tmp_path):
        rng = np.random.default_rng(9)
        model = random_model(rng)
        path = tmp_path / "model.json"
        save_model(model, path)
        before = load_model(path)
        extra = WindowSignature(rng.integers(0, 3, size=(6, 3)).astype(np.int32))
        append_signature(path, "actb", extra)
        after = load_model(path)
        counts_b, counts_a = before.instance_counts(), after.instance_counts()
        assert counts_a["actb"] == counts_b["actb"] + 1
        for name in before.activity_names:
            if name != "actb":
                assert counts_a[name] == counts_b[name]
                assert np.array_equal(after.signatures[name],
                                      before.signatures[name])
        # prior records of the appended activity unchanged, new one last
        assert np.array_equal(after.signatures["actb"][:-1],
                              before.signatures["actb"])
        assert np.array_equal(after.signatures["actb"][-1], extra.axes)

    def test_append_unknown_label_adds_activity(self, tmp_path):
        rng = np.random.default_rng(10)
        model = random_model(rng)
        path = tmp_path / "model.json"
        save_model(model, path)
        extra = WindowSignature(rng.integers(0, 3, size=(6, 3)).astype(np.int32))
        append_signature(path, "running", extra)
        after = load_model(path)
        assert after.instance_counts()["running"] == 1

    def test_wrong_version_rejected(self, tmp_path):
        rng = np.random.default_rng(11)
        model = random_model(rng)
        path = tmp_path / "model.json"
        save_model(model, path)
        broken = path.read_text().replace("dfam/1", "dfam/99")
        path.write_text(broken)
        with pytest.raises(CorruptModel):
            load_model(path)


def test_majority_label_vote():
    mk = lambda n: ActivityLabel(n, "simple_pedestrian")
    labels = [mk("walking"), mk("running"), mk("walking")]
    assert matching.majority_label(labels).name == "walking"
    # two-way tie resolves to the smaller name
    tied = [mk("walking"), mk("running")]
    assert matching.majority_label(tied).name == "running"


def test_label_kind_convention():
    assert label_kind("walking") == "simple_pedestrian"
    assert label_kind("walking+reading") == "concurrent_distracted"
    assert label_kind("standing+texting") == "concurrent_nondistracted"
    assert label_kind("sitting+texting") == "concurrent_nondistracted"
    assert matching.is_moving("climbing_stairs+eating")
    assert not matching.is_moving("sitting")
    assert matching.is_distracted("running+texting")
    assert not matching.is_distracted("standing+reading")
