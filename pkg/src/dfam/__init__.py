"""Concurrent pedestrian activity recognition from phone and watch motion data.

Core pipeline: low-pass filter and segment multi-device motion streams,
hash each window's per-bin dominant frequencies into compact signatures,
and classify test windows by exponentially weighted signature matching.
Classical feature-based classifiers, cross-validation harnesses, a latency
benchmark and a two-state hierarchical detector sit alongside.
"""

from .errors import DfamError
from .kernels import BACKEND as KERNEL_BACKEND
from .matching import (ActivityLabel, DfamConfig, DfamModel, WindowSignature,
                       build_signature, classify, classify_batch, load_model,
                       save_model, score, train)
from .signal import SegmentationConfig, TimeSeries, Window, lowpass_filter, segment
from .spectral import (DominantFrequencies, FrequencySpectrum, HashSpec,
                       dft_magnitude, dominant_frequencies, hash_frequency,
                       hash_tuple, naive_dft_magnitude)

__version__ = "0.1.0"

__all__ = [
    "ActivityLabel", "DfamConfig", "DfamModel", "DfamError",
    "DominantFrequencies", "FrequencySpectrum", "HashSpec", "KERNEL_BACKEND",
    "SegmentationConfig", "TimeSeries", "Window", "WindowSignature",
    "build_signature", "classify", "classify_batch", "dft_magnitude",
    "dominant_frequencies", "hash_frequency", "hash_tuple", "load_model",
    "lowpass_filter", "naive_dft_magnitude", "save_model", "score",
    "segment", "train",
]
