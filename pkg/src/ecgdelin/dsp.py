"""Preprocessing chain: fixed-length windowing, downsampling to 250 Hz,
0.67-40 Hz zero-phase bandpass, and z-score normalization.

Masks are transformed in lockstep with signals at every stage. Filtering is
order-3 Butterworth applied forward-backward (``sosfiltfilt``) so wave
onsets/offsets are never time-shifted. Only downsampling is supported;
upsampling is rejected to avoid interpolation artifacts.
"""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Tuple

import numpy as np
from scipy import signal as sps

from .types import BACKGROUND, DataValidationError, EcgRecord, LabeledExample
from .util import round_half_up


@dataclass
class PreprocessConfig:
    target_fs_hz: float = 250.0
    window_s: float = 10.0
    band_lo_hz: float = 0.67
    band_hi_hz: float = 40.0
    filter_order: int = 3
    eps: float = 1e-8

    def __post_init__(self):
        if not 0 < self.band_lo_hz < self.band_hi_hz < self.target_fs_hz / 2:
            raise DataValidationError(
                f"bandpass edges ({self.band_lo_hz}, {self.band_hi_hz}) must lie "
                f"inside (0, {self.target_fs_hz / 2})"
            )

    @property
    def target_len(self) -> int:
        return round_half_up(self.window_s * self.target_fs_hz)


def fix_length(example: LabeledExample, window_s: float, at_fs: float) -> LabeledExample:
    """Crop or zero-pad to ``round(window_s * at_fs)`` samples.

    Long signals keep the head window; short ones get a zero tail with
    background labels. ``valid_len`` records the unpadded sample count.
    """
    target = round_half_up(window_s * at_fs)
    x = example.record.samples
    mask = example.mask
    valid = min(x.size, target)
    if x.size > target:
        x = x[:target]
        mask = mask[:target] if mask is not None else None
    elif x.size < target:
        x = np.concatenate([x, np.zeros(target - x.size, dtype=x.dtype)])
        if mask is not None:
            pad = np.full(target - mask.size, BACKGROUND, dtype=mask.dtype)
            mask = np.concatenate([mask, pad])
    return LabeledExample(
        record=dataclasses.replace(example.record, samples=x),
        mask=mask,
        intervals=example.intervals,
        valid_len=int(valid),
    )


def _resample_fraction(fs_in: float, fs_out: float) -> Fraction:
    return Fraction(round(fs_out * 1000), round(fs_in * 1000))


def resample(samples: np.ndarray, fs_in: float, fs_out: float) -> np.ndarray:
    """Band-limited polyphase downsampling; output length ``round(n*fs_out/fs_in)``."""
    if fs_in < fs_out:
        raise DataValidationError(
            f"upsampling rejected: fs_in {fs_in} Hz < fs_out {fs_out} Hz"
        )
    samples = np.asarray(samples, dtype=np.float64)
    if fs_in == fs_out:
        return samples.copy()
    frac = _resample_fraction(fs_in, fs_out)
    out = sps.resample_poly(samples, frac.numerator, frac.denominator, padtype="line")
    n_out = round_half_up(samples.size * fs_out / fs_in)
    return out[:n_out]


def resample_mask(labels: np.ndarray, fs_in: float, fs_out: float) -> np.ndarray:
    """Nearest-index label resampling; the class set never grows."""
    if fs_in < fs_out:
        raise DataValidationError(
            f"upsampling rejected: fs_in {fs_in} Hz < fs_out {fs_out} Hz"
        )
    labels = np.asarray(labels)
    if fs_in == fs_out:
        return labels.copy()
    n_out = round_half_up(labels.size * fs_out / fs_in)
    src = np.clip(
        np.round(np.arange(n_out) * (fs_in / fs_out)).astype(np.int64),
        0,
        labels.size - 1,
    )
    return labels[src]


def bandpass(
    samples: np.ndarray,
    fs: float,
    lo: float = 0.67,
    hi: float = 40.0,
    order: int = 3,
) -> np.ndarray:
    """Zero-phase Butterworth bandpass (forward-backward, second-order sections)."""
    if fs <= 2 * hi:
        raise DataValidationError(f"fs {fs} Hz must exceed twice the upper edge {hi} Hz")
    sos = sps.butter(order, [lo, hi], btype="bandpass", fs=fs, output="sos")
    return sps.sosfiltfilt(sos, np.asarray(samples, dtype=np.float64))


def zscore(samples: np.ndarray, valid_len: Optional[int] = None, eps: float = 1e-8) -> np.ndarray:
    """Normalize the valid prefix to mean 0 / std 1; the padded tail is zeroed.

    Constant inputs map to zeros through the ``eps`` guard.
    """
    x = np.asarray(samples, dtype=np.float64)
    n = x.size if valid_len is None else int(valid_len)
    if n < 2:
        raise DataValidationError("zscore needs at least 2 valid samples")
    head = x[:n]
    out = np.zeros_like(x)
    out[:n] = (head - head.mean()) / (head.std() + eps)
    return out


def preprocess(example: LabeledExample, config: PreprocessConfig) -> LabeledExample:
    """Full chain in order: fix length -> resample -> bandpass -> z-score.

    Output length is exactly ``round(window_s * target_fs)``; the mask follows
    the signal through every stage.
    """
    fs_in = example.record.fs_hz
    fixed = fix_length(example, config.window_s, fs_in)
    x = fixed.record.samples
    mask = fixed.mask
    valid = fixed.valid_len
    if fs_in != config.target_fs_hz:
        x = resample(x, fs_in, config.target_fs_hz)
        if mask is not None:
            mask = resample_mask(mask, fs_in, config.target_fs_hz)
        valid = min(
            round_half_up(valid * config.target_fs_hz / fs_in), config.target_len
        )
    # Defensive: rounding at two stages could drift by one sample for exotic rates.
    if x.size != config.target_len:
        tmp = LabeledExample(
            record=dataclasses.replace(
                example.record, samples=x.astype(np.float32), fs_hz=config.target_fs_hz
            ),
            mask=mask,
        )
        refixed = fix_length(tmp, config.window_s, config.target_fs_hz)
        x, mask = refixed.record.samples, refixed.mask
    x = bandpass(x, config.target_fs_hz, config.band_lo_hz, config.band_hi_hz,
                 order=config.filter_order)
    x = zscore(x, valid_len=valid, eps=config.eps)
    return LabeledExample(
        record=dataclasses.replace(
            example.record,
            samples=x.astype(np.float32),
            fs_hz=config.target_fs_hz,
        ),
        mask=mask,
        intervals=example.intervals,
        valid_len=valid,
    )
