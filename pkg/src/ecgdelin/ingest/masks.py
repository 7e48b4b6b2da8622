"""Span-list to dense-mask conversion."""
from __future__ import annotations

from typing import Iterable, Sequence, Tuple, Union

import numpy as np

from ..types import BACKGROUND, DataValidationError, WAVE_CLASSES, WaveSpan

SpanLike = Union[WaveSpan, Tuple[int, int, int]]


def _as_span(s: SpanLike) -> WaveSpan:
    if isinstance(s, WaveSpan):
        return s
    cls, onset, offset = s
    return WaveSpan(int(cls), int(onset), int(offset))


def spans_to_mask(spans: Iterable[SpanLike], length: int) -> np.ndarray:
    """Dense class mask from non-overlapping wave spans (inclusive offsets).

    Adjacent spans of the same class are allowed to touch; any overlap between
    distinct spans is rejected, as are spans reaching past ``length``.
    """
    mask = np.full(int(length), BACKGROUND, dtype=np.int64)
    covered = np.zeros(int(length), dtype=bool)
    for raw in spans:
        span = _as_span(raw)
        if span.offset_idx >= length:
            raise DataValidationError(
                f"span {span} exceeds signal length {length}"
            )
        sl = slice(span.onset_idx, span.offset_idx + 1)
        if covered[sl].any():
            raise DataValidationError(f"span {span} overlaps an earlier span")
        mask[sl] = span.wave_class
        covered[sl] = True
    return mask
