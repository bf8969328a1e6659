"""Window spectra, per-bin dominant frequencies, and frequency hashing.

The usable spectrum (0, f_s/2] is split into g equal-width bins; the loudest
FFT index inside each bin is that bin's dominant frequency. Each dominant
frequency is then mapped to a small integer bucket by one of nine hash
functions (H0..H8). H0..H5 have bucket counts independent of the window
size W; H6..H8 use W, round(W/2) and round(W/3) buckets respectively.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import BadBinCount, BadWindowSize, NegativeFrequency
from .signal import round_half_away

HASH_IDS = ("H0", "H1", "H2", "H3", "H4", "H5", "H6", "H7", "H8")


@dataclass
class FrequencySpectrum:
    """One-sided magnitude spectrum of a real window."""

    magnitudes: np.ndarray  # length W/2 + 1, index 0 is DC
    resolution_hz: float  # f_s / W

    @property
    def window_size(self) -> int:
        return 2 * (self.magnitudes.shape[0] - 1)


@dataclass
class DominantFrequencies:
    """Loudest frequency per bin, ascending bin order."""

    values_hz: np.ndarray  # length g
    bin_edges_hz: np.ndarray  # length g + 1


def dft_magnitude(window_axis: np.ndarray, sampling_hz: float) -> FrequencySpectrum:
    """One-sided magnitude spectrum via the fast transform."""
    x = np.asarray(window_axis, dtype=np.float64)
    w = x.shape[0]
    if w < 8 or w % 2 != 0:
        raise BadWindowSize(f"window size must be even and >= 8, got {w}")
    return FrequencySpectrum(np.abs(np.fft.rfft(x)), sampling_hz / w)


def naive_dft_magnitude(window_axis: np.ndarray, sampling_hz: float) -> FrequencySpectrum:
    """O(W^2) direct evaluation of the one-sided magnitude spectrum.

    Sums every correlation term explicitly instead of using a fast
    transform; reference oracle for verifying the fast path.
    """
    x = np.asarray(window_axis, dtype=np.float64)
    w = x.shape[0]
    if w < 8 or w % 2 != 0:
        raise BadWindowSize(f"window size must be even and >= 8, got {w}")
    k = np.arange(w // 2 + 1)[:, np.newaxis]
    n = np.arange(w)[np.newaxis, :]
    ang = -2.0 * math.pi * k * n / w
    re = np.cos(ang) @ x
    im = np.sin(ang) @ x
    return FrequencySpectrum(np.hypot(re, im), sampling_hz / w)


def dominant_frequencies(spec: FrequencySpectrum, g: int, sampling_hz: float) -> DominantFrequencies:
    """Pick the loudest frequency in each of g equal-width bins over (0, f_s/2].

    DC is excluded. Ties go to the lowest frequency, and a bin whose
    magnitudes are all zero reports its lowest representable frequency.
    """
    w = spec.window_size
    if g < 1 or g > w // 2:
        raise BadBinCount(f"bin count must satisfy 1 <= g <= W/2, got g={g}, W={w}")
    half = sampling_hz / 2.0
    edges = np.array([b * half / g for b in range(g + 1)])
    res = sampling_hz / w
    values = np.empty(g)
    for b in range(g):
        # FFT indices whose frequency lies in (edges[b], edges[b + 1]];
        # i * f_s/W <= b * f_s/2g reduces to 2gi <= bW, so the index range
        # is exact in integer arithmetic regardless of the sampling rate.
        lo = (b * w) // (2 * g) + 1
        hi = ((b + 1) * w) // (2 * g)
        seg = spec.magnitudes[lo:hi + 1]
        if seg.size == 0 or not np.any(seg > 0):
            values[b] = lo * res
        else:
            values[b] = (lo + int(np.argmax(seg))) * res
    return DominantFrequencies(values, edges)


@dataclass
class HashSpec:
    """A hash function choice plus the parameters its formula needs.

    ``bucket_count`` (h) and ``bucket_width_hz`` (l) are derived from the
    definition table; they are informational for H0..H3 where the formula
    quantizes through an inner modulus rather than a plain division.
    """

    hash_id: str
    sampling_hz: float
    window_size: int
    bins: int
    bucket_count: int = 0
    bucket_width_hz: float = 0.0

    def __post_init__(self):
        if self.hash_id not in HASH_IDS:
            raise BadBinCount(f"unknown hash id {self.hash_id!r}")
        if self.bins < 1:
            raise BadBinCount(f"bin count must be >= 1, got {self.bins}")
        self.bucket_count = _bucket_count(self.hash_id, self.sampling_hz,
                                          self.window_size, self.bins)
        self.bucket_width_hz = _bucket_width(self.hash_id, self.sampling_hz,
                                             self.window_size, self.bins)


def _inner_modulus(sampling_hz: float, g: int) -> int:
    # ceil(f_s / 2g), exact even for non-integer rates
    return int(math.ceil(Fraction(sampling_hz) / (2 * g)))


def _bucket_count(hash_id: str, f_s: float, w: int, g: int) -> int:
    fs = Fraction(f_s)
    c = _inner_modulus(f_s, g)
    if hash_id == "H0":
        return int(8 * g * (c - 1) / fs) + 1
    if hash_id == "H1":
        return int(2 * g * g * (c - 1) / fs) + 1
    if hash_id == "H2":
        return int(6 * g * (c - 1) / fs) + 1
    if hash_id == "H3":
        return int(4 * g * (c - 1) / fs) + 1
    if hash_id == "H4":
        return round_half_away(f_s / 4.0)
    if hash_id == "H5":
        return round_half_away(f_s / 2.0)
    if hash_id == "H6":
        return w
    if hash_id == "H7":
        return round_half_away(w / 2.0)
    return round_half_away(w / 3.0)  # H8


def _bucket_width(hash_id: str, f_s: float, w: int, g: int) -> float:
    widths = {
        "H0": f_s / (8 * g),
        "H1": f_s / (2 * g * g),
        "H2": f_s / (6 * g),
        "H3": f_s / (4 * g),
        "H4": 2.0,
        "H5": 1.0,
        "H6": f_s / (2 * w),
        "H7": f_s / w,
        "H8": 3 * f_s / (2 * w),
    }
    return widths[hash_id]


def hash_frequency(v: float, spec: HashSpec) -> int:
    """Map one dominant frequency (Hz) to its integer bucket."""
    if v < 0:
        raise NegativeFrequency(f"frequency must be non-negative, got {v}")
    hid = spec.hash_id
    f_s = spec.sampling_hz
    g = spec.bins
    w = spec.window_size
    if hid in ("H0", "H1", "H2", "H3"):
        m = round_half_away(v) % _inner_modulus(f_s, g)
        fs = Fraction(f_s)
        if hid == "H0":
            return int(8 * g * m / fs)
        if hid == "H1":
            return int(Fraction(g * m) / (fs / (2 * g)))
        if hid == "H2":
            return int(6 * g * m / fs)
        return int(4 * g * m / fs)  # H3
    if hid == "H4":
        return round_half_away(v / 2.0) % spec.bucket_count
    if hid == "H5":
        return round_half_away(v) % spec.bucket_count
    if hid == "H6":
        return round_half_away(2.0 * v * w / f_s) % spec.bucket_count
    if hid == "H7":
        return round_half_away(v * w / f_s) % spec.bucket_count
    return round_half_away(2.0 * v * w / (3.0 * f_s)) % spec.bucket_count  # H8


def hash_tuple(df: DominantFrequencies, spec: HashSpec) -> np.ndarray:
    """Hash each bin's dominant frequency; one bucket id per bin."""
    if df.values_hz.shape[0] != spec.bins:
        raise BadBinCount(
            f"dominant frequencies have {df.values_hz.shape[0]} bins, spec wants {spec.bins}"
        )
    return np.array([hash_frequency(float(v), spec) for v in df.values_hz],
                    dtype=np.int32)
