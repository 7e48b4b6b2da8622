"""Oracle-labeled synthetic ECG generation.

Waveform morphology is built from Gaussian kernels (smooth P and T bumps, a
biphasic difference-of-Gaussians QRS spike) placed inside spans whose sample
geometry realizes the configured PR / QRS / QT intervals exactly, so the
ground-truth labels are defined by construction rather than by thresholding.
Noise and baseline wander are added after the mask is built and never touch
the labels.
"""
from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional, Tuple

import numpy as np

from .ingest import DatasetWriter, SplitManifest, build_label_subsets, spans_to_mask, subject_split
from .types import (
    DataValidationError,
    EcgRecord,
    LabeledExample,
    P_WAVE,
    QRS,
    ReferenceIntervals,
    T_WAVE,
    WaveSpan,
)
from .util import round_half_up


@dataclass
class SynthConfig:
    """Parameters of one synthetic single-lead record."""

    fs_hz: float = 250.0
    duration_s: float = 10.0
    heart_rate_bpm: float = 60.0
    pr_ms: float = 160.0
    qrs_ms: float = 90.0
    qt_ms: float = 380.0
    p_amp_mv: float = 0.15
    qrs_amp_mv: float = 1.0
    t_amp_mv: float = 0.3
    p_dur_ms: float = 80.0
    t_dur_ms: float = 160.0
    noise_level: float = 0.0
    baseline_wander_amp: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.pr_ms <= 0 or self.qrs_ms <= 0:
            raise DataValidationError("PR and QRS must be positive")
        if self.qt_ms <= self.qrs_ms:
            raise DataValidationError("QT must exceed QRS")
        if self.noise_level < 0 or self.baseline_wander_amp < 0:
            raise DataValidationError("noise levels must be non-negative")
        period_ms = 60000.0 / self.heart_rate_bpm
        if period_ms <= self.qt_ms + self.pr_ms:
            raise DataValidationError(
                f"beat period {period_ms:.0f} ms too short for PR+QT "
                f"({self.pr_ms + self.qt_ms:.0f} ms)"
            )


def _beat_geometry(cfg: SynthConfig) -> Tuple[List[WaveSpan], int]:
    """Spans of one beat (P onset at index 0) and the beat period in samples."""
    fs = cfg.fs_hz
    n_pr = round_half_up(cfg.pr_ms * fs / 1000.0)
    n_qrs = round_half_up(cfg.qrs_ms * fs / 1000.0)
    n_qt = round_half_up(cfg.qt_ms * fs / 1000.0)
    n_p = round_half_up(cfg.p_dur_ms * fs / 1000.0)
    n_t = round_half_up(cfg.t_dur_ms * fs / 1000.0)
    period = round_half_up(60.0 * fs / cfg.heart_rate_bpm)

    p_on, p_off = 0, n_p - 1
    qrs_on, qrs_off = n_pr, n_pr + n_qrs - 1
    t_off = qrs_on + n_qt - 1
    t_on = t_off - n_t + 1
    if not (p_on <= p_off < qrs_on <= qrs_off < t_on <= t_off < period):
        raise DataValidationError(
            f"infeasible beat geometry: P[{p_on},{p_off}] QRS[{qrs_on},{qrs_off}] "
            f"T[{t_on},{t_off}] period {period}"
        )
    spans = [
        WaveSpan(P_WAVE, p_on, p_off),
        WaveSpan(QRS, qrs_on, qrs_off),
        WaveSpan(T_WAVE, t_on, t_off),
    ]
    return spans, period


def _gaussian_bump(length: int, amp: float) -> np.ndarray:
    idx = np.arange(length, dtype=np.float64)
    center = (length - 1) / 2.0
    sigma = max(length / 6.0, 0.75)
    return amp * np.exp(-0.5 * ((idx - center) / sigma) ** 2)


def _biphasic_spike(length: int, amp: float) -> np.ndarray:
    idx = np.arange(length, dtype=np.float64)
    c1, c2 = 0.40 * (length - 1), 0.62 * (length - 1)
    sigma = max(length / 9.0, 0.6)
    pos = np.exp(-0.5 * ((idx - c1) / sigma) ** 2)
    neg = np.exp(-0.5 * ((idx - c2) / sigma) ** 2)
    return amp * (pos - 0.55 * neg)


def synth_beat(config: SynthConfig) -> Tuple[np.ndarray, List[WaveSpan]]:
    """One clean beat: waveform over a single beat period plus its three spans.

    The waveform is exactly zero outside the spans; the kernels are windowed
    to the span extents so span boundaries are noise-independent ground truth.
    """
    spans, period = _beat_geometry(config)
    wave = np.zeros(period, dtype=np.float64)
    amps = {P_WAVE: config.p_amp_mv, QRS: config.qrs_amp_mv, T_WAVE: config.t_amp_mv}
    for span in spans:
        if span.wave_class == QRS:
            kernel = _biphasic_spike(span.length, amps[QRS])
        else:
            kernel = _gaussian_bump(span.length, amps[span.wave_class])
        wave[span.onset_idx : span.offset_idx + 1] = kernel
    return wave, spans


def _tile_beats(config: SynthConfig) -> Tuple[np.ndarray, List[WaveSpan]]:
    beat, beat_spans = synth_beat(config)
    _, period = _beat_geometry(config)
    n_total = round_half_up(config.duration_s * config.fs_hz)
    if n_total < period:
        raise DataValidationError(
            f"duration {config.duration_s}s holds no complete beat "
            f"(period {period} samples at {config.fs_hz} Hz)"
        )
    extent = beat_spans[-1].offset_idx
    signal = np.zeros(n_total, dtype=np.float64)
    spans: List[WaveSpan] = []
    k = 0
    while k * period + extent < n_total:
        start = k * period
        end = min(start + period, n_total)
        signal[start:end] = beat[: end - start]
        for s in beat_spans:
            spans.append(WaveSpan(s.wave_class, s.onset_idx + start, s.offset_idx + start))
        k += 1
    return signal, spans


def synth_record_with_spans(
    config: SynthConfig,
    record_id: str = "synth000",
    subject_id: str = "subj000",
    dataset_id: str = "synth",
    lead_id: str = "II",
) -> Tuple[LabeledExample, List[WaveSpan]]:
    signal, spans = _tile_beats(config)
    mask = spans_to_mask(spans, signal.size)
    rng = np.random.default_rng(config.seed)
    # Label construction precedes corruption: neither noise nor wander may
    # touch the mask.
    wander_freq = rng.uniform(0.05, 0.45)
    wander_phase = rng.uniform(0.0, 2.0 * np.pi)
    t = np.arange(signal.size) / config.fs_hz
    signal = signal + config.baseline_wander_amp * np.sin(
        2.0 * np.pi * wander_freq * t + wander_phase
    )
    signal = signal + rng.normal(0.0, 1.0, signal.size) * config.noise_level
    example = LabeledExample(
        record=EcgRecord(
            record_id=record_id,
            subject_id=subject_id,
            dataset_id=dataset_id,
            lead_id=lead_id,
            fs_hz=config.fs_hz,
            samples=signal.astype(np.float32),
        ),
        mask=mask,
        intervals=ReferenceIntervals(
            pr_ms=config.pr_ms, qrs_ms=config.qrs_ms, qt_ms=config.qt_ms
        ),
    )
    return example, spans


def synth_record(config: SynthConfig, **ids) -> LabeledExample:
    """A full record: tiled beats, oracle mask, configured reference intervals."""
    example, _ = synth_record_with_spans(config, **ids)
    return example


def _jitter_subject(template: SynthConfig, subject_idx: int) -> SynthConfig:
    """Per-subject morphology jitter: +-10% on rate/amplitudes, +-10 ms on intervals."""
    rng = np.random.default_rng((template.seed, 101, subject_idx))
    scale = lambda: float(rng.uniform(0.9, 1.1))
    shift = lambda: float(rng.uniform(-10.0, 10.0))
    return dataclasses.replace(
        template,
        heart_rate_bpm=template.heart_rate_bpm * scale(),
        p_amp_mv=template.p_amp_mv * scale(),
        qrs_amp_mv=template.qrs_amp_mv * scale(),
        t_amp_mv=template.t_amp_mv * scale(),
        pr_ms=template.pr_ms + shift(),
        qrs_ms=template.qrs_ms + shift() * 0.5,
        qt_ms=template.qt_ms + shift(),
    )


def synth_corpus(
    template: SynthConfig,
    n_subjects: int,
    per_subject: int,
    out_dir,
    dataset_id: str = "synth",
    label_kind: str = "mask",
    lead_id: str = "II",
    write_splits: bool = True,
) -> Path:
    """Write a canonical dataset of jittered synthetic records.

    ``label_kind`` selects the annotation style: ``"mask"`` writes delineation
    spans, ``"intervals"`` writes interval-only labels (mobile-ECG style), and
    ``"none"`` writes an unlabeled pool. Generation is deterministic in the
    template seed; per-record RNG streams derive from (seed, subject, index).
    """
    if n_subjects < 3:
        raise DataValidationError("need at least 3 subjects for a 6:2:2 split")
    if label_kind not in ("mask", "intervals", "none"):
        raise ValueError(f"unknown label_kind {label_kind!r}")
    out_dir = Path(out_dir)
    writer = DatasetWriter(out_dir, dataset_id)
    subjects = []
    for s in range(n_subjects):
        subject_id = f"subj{s:03d}"
        subjects.append(subject_id)
        subject_cfg = _jitter_subject(template, s)
        for r in range(per_subject):
            cfg = dataclasses.replace(
                subject_cfg,
                seed=int(np.random.default_rng((template.seed, s, r)).integers(2**31)),
            )
            record_id = f"s{s:03d}r{r:02d}"
            example, spans = synth_record_with_spans(
                cfg, record_id=record_id, subject_id=subject_id,
                dataset_id=dataset_id, lead_id=lead_id,
            )
            writer.add(
                record_id=record_id,
                subject_id=subject_id,
                lead_id=lead_id,
                fs_hz=cfg.fs_hz,
                samples=example.record.samples,
                spans=spans if label_kind == "mask" else None,
                intervals=example.intervals if label_kind == "intervals" else None,
            )
    splits = None
    if write_splits:
        splits = subject_split(subjects, seed=template.seed)
        record_ids = sorted(
            row.record_id for row in writer.rows
            if row.subject_id in splits.train_subjects
        )
        splits.label_subsets = build_label_subsets(record_ids, seed=template.seed)
    manifest = writer.finish(splits)
    gen = dataclasses.asdict(template)
    gen.update(
        n_subjects=n_subjects, per_subject=per_subject,
        dataset_id=dataset_id, label_kind=label_kind, lead_id=lead_id,
    )
    (out_dir / "gen_config.json").write_text(json.dumps(gen, indent=2, sort_keys=True) + "\n")
    return manifest
