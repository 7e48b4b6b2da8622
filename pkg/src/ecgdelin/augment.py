"""Weak and strong signal augmentations with a RandAugment-style strong policy.

Weak ops are geometric and transform signal and mask with one shared index
map. Strong ops perturb the signal only and never see a mask. Magnitudes are
expressed in post-z-score units so they are dataset-independent. Every op is
pure given an explicit ``numpy.random.Generator``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np

from .util import round_half_up

STRONG_OPS = ("powerline_noise", "sine_noise", "amplitude_scale", "white_noise", "baseline_shift")
DEFAULT_STRONG_POOL = ["powerline_noise", "sine_noise", "amplitude_scale", "white_noise"]


@dataclass
class AugmentPolicy:
    """Weak list + RandAugment strong policy.

    The default policy applies random resized cropping unconditionally as the
    only weak op, and draws ``rand_n`` distinct strong ops per sample from the
    four-op pool, each firing with probability ``op_prob``. Horizontal flip
    and baseline shift exist for the ablation sweep only.
    """

    strong_pool: List[str] = field(default_factory=lambda: list(DEFAULT_STRONG_POOL))
    rand_n: int = 3
    op_prob: float = 0.5
    crop_scale: Tuple[float, float] = (0.5, 1.0)
    powerline_max_amp: float = 0.3
    sine_max_amp: float = 0.3
    sine_freq_range: Tuple[float, float] = (0.5, 5.0)
    amplitude_range: Tuple[float, float] = (0.5, 2.0)
    white_noise_max_std: float = 0.2
    baseline_max_shift: float = 0.5
    include_crop_in_weak: bool = True
    include_flip_in_weak: bool = False
    include_baseline_shift_in_strong: bool = False

    def __post_init__(self):
        pool = list(self.strong_pool)
        if self.include_baseline_shift_in_strong and "baseline_shift" not in pool:
            pool.append("baseline_shift")
        self.strong_pool = pool
        unknown = set(self.strong_pool) - set(STRONG_OPS)
        if unknown:
            raise ValueError(f"unknown strong ops: {sorted(unknown)}")
        if not 0 <= self.op_prob <= 1:
            raise ValueError(f"op_prob must be in [0, 1], got {self.op_prob}")
        if self.rand_n > len(self.strong_pool):
            raise ValueError(
                f"rand_n={self.rand_n} exceeds strong pool size {len(self.strong_pool)}"
            )


# ---------------------------------------------------------------------------
# Weak (geometric, label-aware) ops
# ---------------------------------------------------------------------------

def random_resized_crop(
    x: np.ndarray,
    mask: Optional[np.ndarray],
    rng: np.random.Generator,
    scale_range: Tuple[float, float] = (0.5, 1.0),
):
    """Crop a random segment and resize it back to the full length.

    The signal is resized by linear interpolation and the mask by nearest
    index, both through the same source-position map.
    """
    x = np.asarray(x)
    n = x.size
    if n < 2:
        raise ValueError("need at least 2 samples to crop")
    s = rng.uniform(scale_range[0], scale_range[1])
    crop_len = min(n, max(2, round_half_up(n * s)))
    start = int(rng.integers(0, n - crop_len + 1))
    src = start + np.arange(n) * (crop_len - 1) / (n - 1)
    lo = np.floor(src).astype(np.int64)
    hi = np.minimum(lo + 1, n - 1)
    frac = src - lo
    x_out = (1.0 - frac) * x[lo] + frac * x[hi]
    mask_out = None
    if mask is not None:
        mask_out = np.asarray(mask)[np.round(src).astype(np.int64)]
    return x_out.astype(x.dtype, copy=False), mask_out


def horizontal_flip(x: np.ndarray, mask: Optional[np.ndarray]):
    """Exact time reversal of both sequences (P-QRS-T becomes T-QRS-P)."""
    flipped = np.ascontiguousarray(np.asarray(x)[::-1])
    mask_out = None if mask is None else np.ascontiguousarray(np.asarray(mask)[::-1])
    return flipped, mask_out


# ---------------------------------------------------------------------------
# Strong (signal-only) ops
# ---------------------------------------------------------------------------

def baseline_shift(x: np.ndarray, rng: np.random.Generator, max_shift: float = 0.5) -> np.ndarray:
    """Constant offset over a random contiguous segment (fraction 0.2-1.0)."""
    x = np.asarray(x, dtype=np.float64).copy()
    c = rng.uniform(-max_shift, max_shift)
    frac = rng.uniform(0.2, 1.0)
    seg = max(1, round_half_up(frac * x.size))
    start = int(rng.integers(0, x.size - seg + 1))
    x[start : start + seg] += c
    return x


def powerline_noise(
    x: np.ndarray, fs: float, rng: np.random.Generator, max_amp: float = 0.3
) -> np.ndarray:
    """Additive mains interference at 50 or 60 Hz with random amplitude/phase."""
    if fs <= 120:
        raise ValueError(f"fs {fs} Hz too low to carry a 50/60 Hz component")
    freq = 50.0 if rng.integers(0, 2) == 0 else 60.0
    amp = rng.uniform(0.0, max_amp)
    phase = rng.uniform(0.0, 2.0 * np.pi)
    t = np.arange(x.size) / fs
    return np.asarray(x, dtype=np.float64) + amp * np.sin(2.0 * np.pi * freq * t + phase)


def amplitude_scale(
    x: np.ndarray, rng: np.random.Generator, scale_range: Tuple[float, float] = (0.5, 2.0)
) -> np.ndarray:
    gain = rng.uniform(scale_range[0], scale_range[1])
    return np.asarray(x, dtype=np.float64) * gain


def sine_noise(
    x: np.ndarray,
    fs: float,
    rng: np.random.Generator,
    freq_range: Tuple[float, float] = (0.5, 5.0),
    max_amp: float = 0.3,
) -> np.ndarray:
    """Additive low-frequency sinusoid (drifting-baseline style)."""
    if fs <= 2 * freq_range[1]:
        raise ValueError(f"fs {fs} Hz below Nyquist for {freq_range[1]} Hz")
    amp = rng.uniform(0.0, max_amp)
    freq = rng.uniform(freq_range[0], freq_range[1])
    phase = rng.uniform(0.0, 2.0 * np.pi)
    t = np.arange(x.size) / fs
    return np.asarray(x, dtype=np.float64) + amp * np.sin(2.0 * np.pi * freq * t + phase)


def white_noise(x: np.ndarray, rng: np.random.Generator, max_std: float = 0.2) -> np.ndarray:
    sigma = rng.uniform(0.0, max_std)
    return np.asarray(x, dtype=np.float64) + rng.normal(0.0, 1.0, x.size) * sigma


# ---------------------------------------------------------------------------
# Policy application
# ---------------------------------------------------------------------------

def apply_weak(
    x: np.ndarray,
    mask: Optional[np.ndarray],
    policy: AugmentPolicy,
    rng: np.random.Generator,
):
    """Weak view: crop always (exempt from op_prob); flip only in ablation mode."""
    if policy.include_crop_in_weak:
        x, mask = random_resized_crop(x, mask, rng, scale_range=policy.crop_scale)
    if policy.include_flip_in_weak and rng.random() < policy.op_prob:
        x, mask = horizontal_flip(x, mask)
    return x, mask


def _run_strong_op(name: str, x: np.ndarray, fs: float, policy: AugmentPolicy,
                   rng: np.random.Generator) -> np.ndarray:
    if name == "powerline_noise":
        return powerline_noise(x, fs, rng, max_amp=policy.powerline_max_amp)
    if name == "sine_noise":
        return sine_noise(x, fs, rng, freq_range=policy.sine_freq_range,
                          max_amp=policy.sine_max_amp)
    if name == "amplitude_scale":
        return amplitude_scale(x, rng, scale_range=policy.amplitude_range)
    if name == "white_noise":
        return white_noise(x, rng, max_std=policy.white_noise_max_std)
    if name == "baseline_shift":
        return baseline_shift(x, rng, max_shift=policy.baseline_max_shift)
    raise ValueError(f"unknown strong op {name!r}")


def apply_strong(
    x: np.ndarray, policy: AugmentPolicy, rng: np.random.Generator, fs: float = 250.0
) -> np.ndarray:
    """Strong view: draw ``rand_n`` distinct pool ops, each fires with op_prob.

    Strong ops never receive the mask; labels are invariant by construction.
    """
    x = np.asarray(x, dtype=np.float64)
    drawn = rng.choice(len(policy.strong_pool), size=policy.rand_n, replace=False)
    for idx in drawn:
        if rng.random() < policy.op_prob:
            x = _run_strong_op(policy.strong_pool[int(idx)], x, fs, policy, rng)
    return x
