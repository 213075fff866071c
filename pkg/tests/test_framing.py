import numpy as np
import pytest

from rda_bench.audio_io import AudioClip
from rda_bench.framing import frame_signal, hamming_window, remove_dc, sliding_windows


def _clip(n=8000, fs=8000):
    rng = np.random.default_rng(0)
    return AudioClip(samples=rng.uniform(-0.5, 0.5, n), sample_rate=fs, clip_id="t")


class TestFrameSignal:
    def test_default_geometry(self):
        series = frame_signal(_clip(8000), 40, 20)
        assert series.frame_len == 320
        assert series.hop == 160
        assert series.n_frames == 49  # floor((8000-320)/160) + 1

    def test_frame_k_covers_expected_samples(self):
        clip = _clip(2000)
        series = frame_signal(clip, 40, 20)
        for k in range(series.n_frames):
            assert np.array_equal(series.frames[k], clip.samples[k * 160 : k * 160 + 320])

    def test_exactly_one_frame(self):
        assert frame_signal(_clip(320), 40, 20).n_frames == 1

    def test_too_short_rejected(self):
        with pytest.raises(ValueError, match="shorter than one"):
            frame_signal(_clip(100), 40, 20)

    def test_trailing_remainder_dropped(self):
        series = frame_signal(_clip(8100), 40, 20)
        assert series.n_frames == 49

    def test_rectangular_non_overlapping_frames_reconstruct(self):
        clip = _clip(8000)
        series = frame_signal(clip, 40, 40)  # hop == frame length
        rebuilt = series.frames.reshape(-1)
        assert np.array_equal(rebuilt, clip.samples[: rebuilt.size])

    def test_frame_times_are_centers(self):
        series = frame_signal(_clip(8000), 40, 20)
        assert series.frame_times[0] == pytest.approx(320 / 2 / 8000)
        assert series.frame_times[1] - series.frame_times[0] == pytest.approx(0.02)


class TestRemoveDc:
    def test_constant_goes_to_zero(self):
        assert remove_dc(np.array([1.0, 1.0, 1.0, 1.0])).tolist() == [0, 0, 0, 0]

    def test_zero_mean_unchanged(self):
        assert remove_dc(np.array([1.0, -1.0])).tolist() == [1.0, -1.0]

    def test_subtracts_mean(self):
        assert remove_dc(np.array([2.0, 0.0, 1.0, 1.0])).tolist() == [1.0, -1.0, 0.0, 0.0]

    def test_mean_within_tolerance_and_shape(self, rng):
        x = rng.normal(size=(5, 320))
        out = remove_dc(x)
        assert out.shape == x.shape
        assert np.all(np.abs(out.mean(axis=1)) < 1e-12)

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            remove_dc(np.array([]))


class TestHammingWindow:
    def test_three_points(self):
        w = hamming_window(3)
        assert w == pytest.approx([0.08, 1.0, 0.08], abs=1e-12)

    def test_center_is_max_for_odd_n(self):
        w = hamming_window(321)
        assert np.argmax(w) == 160
        assert w[160] == pytest.approx(1.0)

    def test_symmetry(self):
        w = hamming_window(320)
        assert np.max(np.abs(w - w[::-1])) < 1e-15

    def test_endpoints_and_range(self):
        w = hamming_window(320)
        assert abs(w[0] - 0.08) < 1e-12 and abs(w[-1] - 0.08) < 1e-12
        assert np.all(w > 0) and np.all(w <= 1.0)

    def test_too_small_rejected(self):
        with pytest.raises(ValueError):
            hamming_window(1)


class TestSlidingWindows:
    def test_mixed_labels_by_center(self):
        feats = np.arange(10).reshape(5, 2).astype(float)
        wins = sliding_windows(feats, ["A", "A", "B", "B", "B"], 3, mixing="mixed")
        assert [w.label for w in wins] == ["A", "B", "B"]
        assert np.array_equal(wins[0].feature_window, feats[0:3])
        assert all(w.mixed for w in wins)

    def test_non_mixed_requires_uniform_labels(self):
        feats = np.zeros((5, 2))
        wins = sliding_windows(feats, ["A", "A", "B", "B", "B"], 3, mixing="non-mixed")
        assert len(wins) == 1
        assert wins[0].label == "B"
        assert not wins[0].mixed

    def test_window_longer_than_frames_rejected(self):
        with pytest.raises(ValueError, match="exceeds"):
            sliding_windows(np.zeros((5, 2)), ["A"] * 5, 7)

    def test_mixed_needs_odd_window(self):
        with pytest.raises(ValueError, match="odd"):
            sliding_windows(np.zeros((6, 2)), ["A"] * 6, 4, mixing="mixed")

    def test_none_labels_skipped(self):
        wins = sliding_windows(np.zeros((5, 2)), ["A", None, "A", "A", "A"], 3, mixing="mixed")
        assert [w.label for w in wins] == ["A", "A"]
        wins = sliding_windows(np.zeros((5, 2)), ["A", None, "A", "A", "A"], 3,
                               mixing="non-mixed")
        assert len(wins) == 1

    def test_non_mixed_positions_subset_of_mixed_with_matching_labels(self, rng):
        for _ in range(20):
            n = int(rng.integers(5, 30))
            labels = [("A", "B", "C")[i] for i in rng.integers(0, 3, n)]
            feats = rng.normal(size=(n, 3))
            mixed = sliding_windows(feats, labels, 5, mixing="mixed")
            non_mixed = sliding_windows(feats, labels, 5, mixing="non-mixed")
            mixed_by_time = {w.center_time: w.label for w in mixed}
            for w in non_mixed:
                assert w.center_time in mixed_by_time
                assert mixed_by_time[w.center_time] == w.label

    def test_step_strides_positions(self):
        wins = sliding_windows(np.zeros((9, 1)), ["A"] * 9, 3, step=2)
        assert [w.center_time for w in wins] == [1.0, 3.0, 5.0, 7.0]
