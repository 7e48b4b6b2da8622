"""Core domain types shared across the package.

A delineation mask is a plain int array over the class ids below, one label
per signal sample. Spans use inclusive offsets: a span covering samples
``onset..offset`` has duration ``offset - onset + 1`` samples.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

# Segmentation class ids.
BACKGROUND = 0
P_WAVE = 1
QRS = 2
T_WAVE = 3

CLASS_NAMES = ("BG", "P", "QRS", "T")
NUM_CLASSES = 4
WAVE_CLASSES = (P_WAVE, QRS, T_WAVE)

WAVE_NAME_TO_CLASS = {"P": P_WAVE, "QRS": QRS, "T": T_WAVE}
CLASS_TO_WAVE_NAME = {v: k for k, v in WAVE_NAME_TO_CLASS.items()}


class DataValidationError(ValueError):
    """Raised when on-disk or in-memory data violates a format contract."""


@dataclass(frozen=True)
class WaveSpan:
    """A contiguous wave region; ``offset_idx`` is inclusive."""

    wave_class: int
    onset_idx: int
    offset_idx: int

    def __post_init__(self):
        if self.wave_class not in WAVE_CLASSES:
            raise DataValidationError(f"not a wave class: {self.wave_class}")
        if not 0 <= self.onset_idx <= self.offset_idx:
            raise DataValidationError(
                f"bad span bounds: onset={self.onset_idx} offset={self.offset_idx}"
            )

    @property
    def length(self) -> int:
        return self.offset_idx - self.onset_idx + 1


@dataclass(frozen=True)
class ReferenceIntervals:
    """Clinical interval labels in milliseconds; any subset may be present."""

    pr_ms: Optional[float] = None
    qrs_ms: Optional[float] = None
    qt_ms: Optional[float] = None

    def __post_init__(self):
        for name in ("pr_ms", "qrs_ms", "qt_ms"):
            v = getattr(self, name)
            if v is not None and v < 0:
                raise DataValidationError(f"{name} must be non-negative, got {v}")
        if self.qrs_ms is not None and self.qt_ms is not None:
            if not self.qrs_ms < self.qt_ms:
                raise DataValidationError(
                    f"QRS ({self.qrs_ms} ms) must be shorter than QT ({self.qt_ms} ms)"
                )

    def defined(self) -> dict:
        out = {}
        if self.pr_ms is not None:
            out["PR"] = self.pr_ms
        if self.qrs_ms is not None:
            out["QRS"] = self.qrs_ms
        if self.qt_ms is not None:
            out["QT"] = self.qt_ms
        return out


@dataclass
class EcgRecord:
    """One single-lead ECG signal in millivolts."""

    record_id: str
    subject_id: str
    dataset_id: str
    lead_id: str
    fs_hz: float
    samples: np.ndarray

    def __post_init__(self):
        self.samples = np.asarray(self.samples, dtype=np.float32)
        if self.samples.ndim != 1 or self.samples.size == 0:
            raise DataValidationError(
                f"record {self.record_id}: samples must be a non-empty 1-D array"
            )
        if not self.fs_hz > 0:
            raise DataValidationError(f"record {self.record_id}: fs_hz must be > 0")

    @property
    def n_samples(self) -> int:
        return int(self.samples.size)


@dataclass
class LabeledExample:
    """A single-lead signal optionally paired with a mask and/or intervals.

    ``valid_len`` tracks the unpadded sample count once the example has been
    length-normalized; ``None`` means the full signal is valid.
    """

    record: EcgRecord
    mask: Optional[np.ndarray] = None
    intervals: Optional[ReferenceIntervals] = None
    valid_len: Optional[int] = None

    def __post_init__(self):
        if self.mask is not None:
            self.mask = np.asarray(self.mask, dtype=np.int64)
            if self.mask.shape != self.record.samples.shape:
                raise DataValidationError(
                    f"record {self.record.record_id}: mask length {self.mask.size} "
                    f"!= signal length {self.record.n_samples}"
                )
            bad = ~np.isin(self.mask, (BACKGROUND,) + WAVE_CLASSES)
            if bad.any():
                raise DataValidationError(
                    f"record {self.record.record_id}: mask holds invalid class ids"
                )

    @property
    def n_valid(self) -> int:
        return self.record.n_samples if self.valid_len is None else self.valid_len

    @property
    def key(self) -> str:
        r = self.record
        return f"{r.dataset_id}/{r.record_id}/{r.lead_id}"


@dataclass
class MultiLeadRecord:
    """A recording before per-lead expansion.

    ``lead_masks`` carries lead-specific annotations; ``shared_mask`` carries a
    single integrated annotation that applies to every lead. Exactly one of the
    two (or neither, for unlabeled data) should be set.
    """

    record_id: str
    subject_id: str
    dataset_id: str
    fs_hz: float
    leads: dict = field(default_factory=dict)
    lead_masks: Optional[dict] = None
    shared_mask: Optional[np.ndarray] = None
    intervals: Optional[ReferenceIntervals] = None
