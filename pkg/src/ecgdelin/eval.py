"""Segmentation and clinical-interval metrics.

Two metric families are computed from dense per-sample predictions:

* per-class IoU / mIoU from micro-aggregated confusion counts, and
* beat-wise PR / QRS / QT durations reduced per record and scored as MAE
  in milliseconds against either reference masks or interval-only labels.

Offsets are inclusive throughout: a span ``onset..offset`` lasts
``offset - onset + 1`` samples.
"""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from typing import Dict, Iterable, List, Optional, Sequence

import numpy as np

from .types import (
    BACKGROUND,
    CLASS_NAMES,
    NUM_CLASSES,
    P_WAVE,
    QRS,
    T_WAVE,
    LabeledExample,
    ReferenceIntervals,
    WaveSpan,
)

INTERVAL_KEYS = ("PR", "QRS", "QT")

# Beat-association windows: a P wave belongs to a QRS if it starts no more
# than 400 ms before the QRS onset; a T wave belongs if it ends no more than
# 600 ms after the QRS onset.
P_WINDOW_MS = 400.0
T_WINDOW_MS = 600.0


# ---------------------------------------------------------------------------
# Segmentation metrics
# ---------------------------------------------------------------------------

def confusion(pred: np.ndarray, truth: np.ndarray) -> np.ndarray:
    """4x4 count matrix; entry (i, j) counts positions with truth i, pred j."""
    pred = np.asarray(pred, dtype=np.int64)
    truth = np.asarray(truth, dtype=np.int64)
    if pred.shape != truth.shape:
        raise ValueError(f"length mismatch: pred {pred.shape} vs truth {truth.shape}")
    flat = truth * NUM_CLASSES + pred
    return np.bincount(flat, minlength=NUM_CLASSES * NUM_CLASSES).reshape(
        NUM_CLASSES, NUM_CLASSES
    )


def miou(conf: np.ndarray, include_background: bool = True):
    """Per-class IoU and their mean from an aggregated confusion matrix.

    Classes absent from both prediction and truth are excluded from the mean.
    With ``include_background=False`` the mean covers waveform classes only.
    """
    conf = np.asarray(conf, dtype=np.float64)
    tp = np.diag(conf)
    fn = conf.sum(axis=1) - tp
    fp = conf.sum(axis=0) - tp
    present = (tp + fn + fp) > 0
    classes = range(NUM_CLASSES) if include_background else range(1, NUM_CLASSES)
    per_class: Dict[str, float] = {}
    for c in classes:
        if present[c]:
            per_class[CLASS_NAMES[c]] = float(tp[c] / (tp[c] + fp[c] + fn[c]))
    if not per_class:
        raise ValueError("mIoU undefined: no class present in prediction or truth")
    return per_class, float(np.mean(list(per_class.values())))


# ---------------------------------------------------------------------------
# Interval pipeline
# ---------------------------------------------------------------------------

def mask_to_spans(
    mask: np.ndarray, fs_hz: float, min_dur_ms: float = 20.0
) -> List[WaveSpan]:
    """Maximal non-background runs in temporal order.

    Runs shorter than ``min_dur_ms`` are dropped (spurious-blip filter); pass
    ``min_dur_ms=0`` for the exact inverse of ``spans_to_mask``.
    """
    mask = np.asarray(mask, dtype=np.int64)
    if mask.size == 0:
        return []
    boundaries = np.flatnonzero(np.diff(mask)) + 1
    starts = np.concatenate(([0], boundaries))
    ends = np.concatenate((boundaries, [mask.size]))  # exclusive
    spans = []
    for s, e in zip(starts, ends):
        cls = int(mask[s])
        if cls == BACKGROUND:
            continue
        if (e - s) * 1000.0 / fs_hz < min_dur_ms:
            continue
        spans.append(WaveSpan(cls, int(s), int(e - 1)))
    return spans


@dataclass
class Beat:
    """One heartbeat anchored by its QRS complex."""

    qrs: WaveSpan
    p: Optional[WaveSpan] = None
    t: Optional[WaveSpan] = None


def group_beats(spans: Sequence[WaveSpan], fs_hz: float) -> List[Beat]:
    """Associate P and T spans to QRS anchors.

    Each QRS takes the latest preceding P (onset within ``P_WINDOW_MS`` of the
    QRS onset) and the earliest following T (offset within ``T_WINDOW_MS`` of
    the QRS onset); every P/T span is consumed by at most one beat.
    """
    p_limit = P_WINDOW_MS * fs_hz / 1000.0
    t_limit = T_WINDOW_MS * fs_hz / 1000.0
    p_spans = [s for s in spans if s.wave_class == P_WAVE]
    t_spans = [s for s in spans if s.wave_class == T_WAVE]
    used_p: set = set()
    used_t: set = set()
    beats = []
    for qrs_span in (s for s in spans if s.wave_class == QRS):
        beat = Beat(qrs=qrs_span)
        candidates = [
            i
            for i, p in enumerate(p_spans)
            if i not in used_p
            and p.offset_idx < qrs_span.onset_idx
            and qrs_span.onset_idx - p.onset_idx <= p_limit
        ]
        if candidates:
            pick = max(candidates, key=lambda i: p_spans[i].onset_idx)
            beat.p = p_spans[pick]
            used_p.add(pick)
        candidates = [
            i
            for i, t in enumerate(t_spans)
            if i not in used_t
            and t.onset_idx > qrs_span.offset_idx
            and t.offset_idx - qrs_span.onset_idx <= t_limit
        ]
        if candidates:
            pick = min(candidates, key=lambda i: t_spans[i].onset_idx)
            beat.t = t_spans[pick]
            used_t.add(pick)
        beats.append(beat)
    return beats


@dataclass(frozen=True)
class IntervalMeasurement:
    """PR / QRS / QT durations in milliseconds; PR and QT may be absent."""

    qrs_ms: Optional[float] = None
    pr_ms: Optional[float] = None
    qt_ms: Optional[float] = None

    def defined(self) -> dict:
        out = {}
        if self.pr_ms is not None:
            out["PR"] = self.pr_ms
        if self.qrs_ms is not None:
            out["QRS"] = self.qrs_ms
        if self.qt_ms is not None:
            out["QT"] = self.qt_ms
        return out


def beat_intervals(beat: Beat, fs_hz: float) -> IntervalMeasurement:
    """PR = P onset to QRS onset; QRS = its own extent; QT = QRS onset to T offset."""
    scale = 1000.0 / fs_hz
    qrs_ms = (beat.qrs.offset_idx - beat.qrs.onset_idx + 1) * scale
    pr_ms = None
    if beat.p is not None:
        pr_ms = (beat.qrs.onset_idx - beat.p.onset_idx) * scale
    qt_ms = None
    if beat.t is not None:
        qt_ms = (beat.t.offset_idx - beat.qrs.onset_idx + 1) * scale
    return IntervalMeasurement(qrs_ms=qrs_ms, pr_ms=pr_ms, qt_ms=qt_ms)


def record_intervals(
    mask: np.ndarray, fs_hz: float, min_dur_ms: float = 20.0
) -> IntervalMeasurement:
    """Median per-interval over all beats of a record where defined."""
    spans = mask_to_spans(mask, fs_hz, min_dur_ms=min_dur_ms)
    beats = group_beats(spans, fs_hz)
    values: Dict[str, List[float]] = {k: [] for k in INTERVAL_KEYS}
    for beat in beats:
        for key, v in beat_intervals(beat, fs_hz).defined().items():
            values[key].append(v)
    return IntervalMeasurement(
        pr_ms=float(np.median(values["PR"])) if values["PR"] else None,
        qrs_ms=float(np.median(values["QRS"])) if values["QRS"] else None,
        qt_ms=float(np.median(values["QT"])) if values["QT"] else None,
    )


def interval_mae(predictions: Dict[str, object], references: Dict[str, object]):
    """Per-interval MAE (ms) and coverage over the common record set.

    Both maps go record id -> IntervalMeasurement / ReferenceIntervals. An
    interval contributes for a record only when defined on both sides;
    coverage is the fraction of common records where that holds. ``Avg`` is
    the mean of the defined per-interval MAEs (``None`` when none is defined).
    """
    common = sorted(set(predictions) & set(references))
    if not common:
        raise ValueError("no records in common between predictions and references")
    errors: Dict[str, List[float]] = {k: [] for k in INTERVAL_KEYS}
    for rid in common:
        pd = predictions[rid].defined()
        rd = references[rid].defined()
        for key in INTERVAL_KEYS:
            if key in pd and key in rd:
                errors[key].append(abs(pd[key] - rd[key]))
    mae = {
        k: (float(np.mean(v)) if v else None) for k, v in errors.items()
    }
    defined = [m for m in mae.values() if m is not None]
    mae["Avg"] = float(np.mean(defined)) if defined else None
    coverage = {k: len(errors[k]) / len(common) for k in INTERVAL_KEYS}
    return mae, coverage


# ---------------------------------------------------------------------------
# Full evaluation
# ---------------------------------------------------------------------------

@dataclass
class MetricsReport:
    """Segmentation and interval metrics for one model on one dataset."""

    per_class_iou: Dict[str, float]
    miou: Optional[float]
    mae_ms: Dict[str, Optional[float]]
    coverage: Dict[str, float]
    n_examples: int

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    @staticmethod
    def from_dict(d: dict) -> "MetricsReport":
        return MetricsReport(**d)


def predict_masks(model, examples: Sequence[LabeledExample], batch_size: int = 32):
    """Dense argmax predictions, one int array per example (full length)."""
    import torch

    model.eval()
    lengths = {ex.record.n_samples for ex in examples}
    if len(lengths) != 1:
        raise ValueError(f"examples must share a single length, got {sorted(lengths)}")
    preds = []
    with torch.no_grad():
        for lo in range(0, len(examples), batch_size):
            chunk = examples[lo : lo + batch_size]
            x = torch.from_numpy(
                np.stack([ex.record.samples for ex in chunk])[:, None, :]
            )
            logits = model(x)
            preds.extend(logits.argmax(dim=1).cpu().numpy())
    return preds


def evaluate(
    model,
    examples: Sequence[LabeledExample],
    fs_hz: float = 250.0,
    batch_size: int = 32,
    include_background: bool = True,
    min_dur_ms: float = 20.0,
) -> MetricsReport:
    """Evaluate a segmentation model on preprocessed examples.

    Confusion counts aggregate micro over all positions of all mask-labeled
    examples; predictions on padded regions are ignored via ``valid_len``.
    Interval references come from the truth mask when present, otherwise from
    the example's interval-only labels.
    """
    if not examples:
        raise ValueError("no examples to evaluate")
    preds = predict_masks(model, examples, batch_size=batch_size)
    conf = np.zeros((NUM_CLASSES, NUM_CLASSES), dtype=np.int64)
    any_mask = False
    pred_intervals: Dict[str, IntervalMeasurement] = {}
    ref_intervals: Dict[str, object] = {}
    for ex, pred in zip(examples, preds):
        vl = ex.n_valid
        pred_valid = pred[:vl]
        rid = ex.key
        if ex.mask is not None:
            any_mask = True
            conf += confusion(pred_valid, ex.mask[:vl])
            ref_intervals[rid] = record_intervals(
                ex.mask[:vl], fs_hz, min_dur_ms=min_dur_ms
            )
        elif ex.intervals is not None:
            ref_intervals[rid] = ex.intervals
        else:
            continue
        pred_intervals[rid] = record_intervals(
            pred_valid, fs_hz, min_dur_ms=min_dur_ms
        )
    if not ref_intervals:
        raise ValueError("no example carries a mask or interval labels")
    per_class, mean_iou = ({}, None)
    if any_mask:
        per_class, mean_iou = miou(conf, include_background=include_background)
    mae, coverage = interval_mae(pred_intervals, ref_intervals)
    return MetricsReport(
        per_class_iou=per_class,
        miou=mean_iou,
        mae_ms=mae,
        coverage=coverage,
        n_examples=len(examples),
    )
