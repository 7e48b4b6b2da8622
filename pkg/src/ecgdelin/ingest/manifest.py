"""Canonical on-disk dataset format and lazy dataset handles.

A dataset directory holds:

* ``manifest.jsonl`` -- one JSON object per single-lead record with fields
  ``record_id, subject_id, dataset_id, lead_id, fs_hz, n_samples, blob_path,
  blob_offset_bytes, annotations, intervals``. ``annotations`` is a list of
  ``{"class": "P"|"QRS"|"T", "onset_idx", "offset_idx"}`` (inclusive offsets),
  or ``null`` for records without delineation labels.
* signal blobs -- raw little-endian float32, units millivolts; a record is
  ``n_samples * 4`` bytes starting at ``blob_offset_bytes``.
* ``splits.json`` -- the subject-wise split plus nested labeled subsets.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Iterable, Iterator, List, Optional, Sequence, Set

import numpy as np

from ..types import (
    DataValidationError,
    EcgRecord,
    LabeledExample,
    ReferenceIntervals,
    WAVE_NAME_TO_CLASS,
    CLASS_TO_WAVE_NAME,
    WaveSpan,
)
from .masks import spans_to_mask
from .splits import SplitManifest

MANIFEST_NAME = "manifest.jsonl"
SPLITS_NAME = "splits.json"


@dataclass
class ManifestRow:
    record_id: str
    subject_id: str
    dataset_id: str
    lead_id: str
    fs_hz: float
    n_samples: int
    blob_path: str
    blob_offset_bytes: int
    annotations: Optional[List[WaveSpan]] = None
    intervals: Optional[ReferenceIntervals] = None

    @property
    def key(self) -> str:
        return f"{self.dataset_id}/{self.record_id}/{self.lead_id}"

    def to_json(self) -> str:
        ann = None
        if self.annotations is not None:
            ann = [
                {
                    "class": CLASS_TO_WAVE_NAME[s.wave_class],
                    "onset_idx": s.onset_idx,
                    "offset_idx": s.offset_idx,
                }
                for s in self.annotations
            ]
        iv = None
        if self.intervals is not None:
            iv = {k: v for k, v in (
                ("pr_ms", self.intervals.pr_ms),
                ("qrs_ms", self.intervals.qrs_ms),
                ("qt_ms", self.intervals.qt_ms),
            ) if v is not None}
        return json.dumps(
            {
                "record_id": self.record_id,
                "subject_id": self.subject_id,
                "dataset_id": self.dataset_id,
                "lead_id": self.lead_id,
                "fs_hz": self.fs_hz,
                "n_samples": self.n_samples,
                "blob_path": self.blob_path,
                "blob_offset_bytes": self.blob_offset_bytes,
                "annotations": ann,
                "intervals": iv,
            },
            sort_keys=True,
        )

    @staticmethod
    def from_json(line: str) -> "ManifestRow":
        d = json.loads(line)
        ann = None
        if d.get("annotations") is not None:
            ann = [
                WaveSpan(
                    WAVE_NAME_TO_CLASS[a["class"]],
                    int(a["onset_idx"]),
                    int(a["offset_idx"]),
                )
                for a in d["annotations"]
            ]
        iv = None
        if d.get("intervals") is not None:
            iv = ReferenceIntervals(**d["intervals"])
        return ManifestRow(
            record_id=str(d["record_id"]),
            subject_id=str(d["subject_id"]),
            dataset_id=str(d["dataset_id"]),
            lead_id=str(d["lead_id"]),
            fs_hz=float(d["fs_hz"]),
            n_samples=int(d["n_samples"]),
            blob_path=str(d["blob_path"]),
            blob_offset_bytes=int(d["blob_offset_bytes"]),
            annotations=ann,
            intervals=iv,
        )


class DatasetHandle:
    """Lazy, read-only view over a canonical dataset directory.

    Safe for concurrent enumeration: rows are immutable and signal reads are
    independent seeks into the blobs.
    """

    def __init__(self, root: Path, rows: List[ManifestRow], splits: Optional[SplitManifest]):
        self.root = Path(root)
        self.rows = rows
        self.splits = splits
        self._by_key = {r.key: r for r in rows}

    def __len__(self) -> int:
        return len(self.rows)

    @property
    def dataset_ids(self) -> Set[str]:
        return {r.dataset_id for r in self.rows}

    @property
    def subject_ids(self) -> Set[str]:
        return {self._subject_key(r) for r in self.rows}

    def _subject_key(self, row: ManifestRow) -> str:
        # Merged handles disambiguate subjects across sources by dataset id.
        if len(self.dataset_ids) > 1:
            return f"{row.dataset_id}/{row.subject_id}"
        return row.subject_id

    def _record_key(self, row: ManifestRow) -> str:
        if len(self.dataset_ids) > 1:
            return f"{row.dataset_id}/{row.record_id}"
        return row.record_id

    def load_signal(self, row: ManifestRow) -> np.ndarray:
        path = self.root / row.blob_path
        data = np.fromfile(path, dtype="<f4", count=row.n_samples,
                           offset=row.blob_offset_bytes)
        if data.size != row.n_samples:
            raise DataValidationError(
                f"record {row.key}: blob {row.blob_path} truncated"
            )
        return data.astype(np.float32)

    def example(self, row: ManifestRow) -> LabeledExample:
        samples = self.load_signal(row)
        record = EcgRecord(
            record_id=row.record_id,
            subject_id=row.subject_id,
            dataset_id=row.dataset_id,
            lead_id=row.lead_id,
            fs_hz=row.fs_hz,
            samples=samples,
        )
        mask = None
        if row.annotations is not None:
            mask = spans_to_mask(row.annotations, row.n_samples)
        return LabeledExample(record=record, mask=mask, intervals=row.intervals)

    def examples(self) -> Iterator[LabeledExample]:
        for row in self.rows:
            yield self.example(row)

    def split_rows(self, part: str) -> List[ManifestRow]:
        if self.splits is None:
            raise DataValidationError(f"dataset at {self.root} has no split manifest")
        if part not in ("train", "val", "test"):
            raise ValueError(f"unknown split part {part!r}")
        return [r for r in self.rows if self.splits.part_of(self._subject_key(r)) == part]

    def iter_split(self, part: str) -> Iterator[LabeledExample]:
        for row in self.split_rows(part):
            yield self.example(row)

    def labeled_record_ids(self, ratio_tag: str) -> Set[str]:
        if self.splits is None or ratio_tag not in self.splits.label_subsets:
            raise DataValidationError(
                f"dataset at {self.root} has no labeled subset for ratio {ratio_tag!r}"
            )
        return self.splits.label_subsets[ratio_tag]

    def labeled_rows(self, ratio_tag: str) -> List[ManifestRow]:
        subset = self.labeled_record_ids(ratio_tag)
        return [
            r for r in self.split_rows("train")
            if self._record_key(r) in subset and r.annotations is not None
        ]

    def train_record_ids(self) -> List[str]:
        """Pre-expansion record ids of the train split (all leads share one id)."""
        return sorted({self._record_key(r) for r in self.split_rows("train")})


def _validate_rows(root: Path, rows: Sequence[ManifestRow]) -> None:
    seen = set()
    blob_sizes: Dict[str, int] = {}
    for row in rows:
        if row.key in seen:
            raise DataValidationError(f"duplicate record key {row.key}")
        seen.add(row.key)
        if row.blob_path not in blob_sizes:
            path = root / row.blob_path
            if not path.exists():
                raise DataValidationError(
                    f"record {row.record_id}: missing signal blob {row.blob_path}"
                )
            blob_sizes[row.blob_path] = path.stat().st_size
        end = row.blob_offset_bytes + 4 * row.n_samples
        if end > blob_sizes[row.blob_path]:
            raise DataValidationError(
                f"record {row.record_id}: blob {row.blob_path} too short "
                f"(needs {end} bytes, has {blob_sizes[row.blob_path]})"
            )
        if row.annotations is not None:
            for span in row.annotations:
                if span.offset_idx >= row.n_samples:
                    raise DataValidationError(
                        f"record {row.record_id}: annotation {span} exceeds "
                        f"signal length {row.n_samples}"
                    )


def load_dataset(manifest_path) -> DatasetHandle:
    """Open a canonical dataset, validating blobs and annotation bounds."""
    manifest_path = Path(manifest_path)
    if manifest_path.is_dir():
        manifest_path = manifest_path / MANIFEST_NAME
    if not manifest_path.exists():
        raise DataValidationError(f"manifest not found: {manifest_path}")
    root = manifest_path.parent
    rows = []
    with open(manifest_path) as fh:
        for ln, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                rows.append(ManifestRow.from_json(line))
            except (KeyError, ValueError, TypeError) as exc:
                raise DataValidationError(
                    f"{manifest_path}:{ln}: malformed manifest row: {exc}"
                ) from exc
    _validate_rows(root, rows)
    splits = None
    if (root / SPLITS_NAME).exists():
        splits = SplitManifest.load(root / SPLITS_NAME)
    return DatasetHandle(root, rows, splits)


def merge_datasets(handles: Sequence[DatasetHandle]) -> DatasetHandle:
    """Union of datasets, preserving each constituent's splits.

    Record and subject identities keep their dataset-id prefix, so the merged
    handle can never mix subjects across sources.
    """
    if not handles:
        raise ValueError("nothing to merge")
    if len(handles) == 1:
        return handles[0]
    ids: Set[str] = set()
    for h in handles:
        overlap = ids & h.dataset_ids
        if overlap:
            raise DataValidationError(f"dataset_id collision on merge: {sorted(overlap)}")
        ids |= h.dataset_ids
    rows: List[ManifestRow] = []
    train: Set[str] = set()
    val: Set[str] = set()
    test: Set[str] = set()
    subsets: Dict[str, Set[str]] = {}
    any_splits = False
    for h in handles:
        for row in h.rows:
            # Rewrite blob paths relative to the constituent's own root.
            rows.append(
                ManifestRow(
                    record_id=row.record_id,
                    subject_id=row.subject_id,
                    dataset_id=row.dataset_id,
                    lead_id=row.lead_id,
                    fs_hz=row.fs_hz,
                    n_samples=row.n_samples,
                    blob_path=str((h.root / row.blob_path).resolve()),
                    blob_offset_bytes=row.blob_offset_bytes,
                    annotations=row.annotations,
                    intervals=row.intervals,
                )
            )
        if h.splits is not None:
            any_splits = True
            ds = next(iter(h.dataset_ids))
            train |= {f"{ds}/{s}" for s in h.splits.train_subjects}
            val |= {f"{ds}/{s}" for s in h.splits.val_subjects}
            test |= {f"{ds}/{s}" for s in h.splits.test_subjects}
            for tag, recs in h.splits.label_subsets.items():
                subsets.setdefault(tag, set()).update(f"{ds}/{r}" for r in recs)
    splits = SplitManifest(train, val, test, subsets) if any_splits else None
    return DatasetHandle(Path("/"), rows, splits)


class DatasetWriter:
    """Streams records into a canonical dataset directory (single blob)."""

    def __init__(self, out_dir, dataset_id: str, blob_name: str = "signals.f32"):
        self.out_dir = Path(out_dir)
        self.out_dir.mkdir(parents=True, exist_ok=True)
        self.dataset_id = dataset_id
        self.blob_name = blob_name
        self.rows: List[ManifestRow] = []
        self._offset = 0
        self._blob = open(self.out_dir / blob_name, "wb")

    def add(
        self,
        record_id: str,
        subject_id: str,
        lead_id: str,
        fs_hz: float,
        samples: np.ndarray,
        spans: Optional[Sequence[WaveSpan]] = None,
        intervals: Optional[ReferenceIntervals] = None,
    ) -> None:
        samples = np.asarray(samples, dtype="<f4")
        self._blob.write(samples.tobytes())
        self.rows.append(
            ManifestRow(
                record_id=record_id,
                subject_id=subject_id,
                dataset_id=self.dataset_id,
                lead_id=lead_id,
                fs_hz=fs_hz,
                n_samples=int(samples.size),
                blob_path=self.blob_name,
                blob_offset_bytes=self._offset,
                annotations=list(spans) if spans is not None else None,
                intervals=intervals,
            )
        )
        self._offset += 4 * samples.size

    def finish(self, splits: Optional[SplitManifest] = None) -> Path:
        self._blob.close()
        manifest = self.out_dir / MANIFEST_NAME
        with open(manifest, "w") as fh:
            for row in self.rows:
                fh.write(row.to_json() + "\n")
        if splits is not None:
            splits.save(self.out_dir / SPLITS_NAME)
        return manifest
