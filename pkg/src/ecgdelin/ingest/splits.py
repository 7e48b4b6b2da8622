"""Subject-wise dataset splitting and labeled-subset subsampling.

Both operations are pure functions of (input, seed). Label subsets for the
four benchmark ratios are nested: they are prefixes of a single seeded
permutation, so a smaller budget is always contained in a larger one.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Dict, List, Sequence, Set

import numpy as np

from ..types import DataValidationError

RATIO_TAGS = ("1/16", "1/8", "1/4", "1/2")


def parse_ratio(tag: str) -> Fraction:
    if tag not in RATIO_TAGS:
        raise ValueError(f"unknown label ratio {tag!r}; expected one of {RATIO_TAGS}")
    num, den = tag.split("/")
    return Fraction(int(num), int(den))


@dataclass
class SplitManifest:
    """Subject-wise train/val/test assignment plus nested labeled subsets."""

    train_subjects: Set[str]
    val_subjects: Set[str]
    test_subjects: Set[str]
    label_subsets: Dict[str, Set[str]] = field(default_factory=dict)
    seed: int = 0

    def part_of(self, subject_id: str) -> str:
        if subject_id in self.train_subjects:
            return "train"
        if subject_id in self.val_subjects:
            return "val"
        if subject_id in self.test_subjects:
            return "test"
        raise KeyError(f"subject {subject_id!r} not in any split")

    def to_json(self) -> str:
        return json.dumps(
            {
                "train_subjects": sorted(self.train_subjects),
                "val_subjects": sorted(self.val_subjects),
                "test_subjects": sorted(self.test_subjects),
                "label_subsets": {
                    tag: sorted(ids) for tag, ids in sorted(self.label_subsets.items())
                },
                "seed": self.seed,
            },
            indent=2,
            sort_keys=True,
        )

    def save(self, path) -> None:
        Path(path).write_text(self.to_json() + "\n")

    @staticmethod
    def load(path) -> "SplitManifest":
        d = json.loads(Path(path).read_text())
        return SplitManifest(
            train_subjects=set(d["train_subjects"]),
            val_subjects=set(d["val_subjects"]),
            test_subjects=set(d["test_subjects"]),
            label_subsets={t: set(v) for t, v in d.get("label_subsets", {}).items()},
            seed=int(d.get("seed", 0)),
        )


def subject_split(
    subject_ids: Sequence[str],
    ratios=(0.6, 0.2, 0.2),
    seed: int = 0,
) -> SplitManifest:
    """Deterministic subject-wise split with sizes rounded to nearest.

    Train and val sizes round independently; test takes the remainder so the
    totals are preserved. Every part is kept non-empty (hence >= 3 subjects).
    """
    subjects = sorted(set(subject_ids))
    n = len(subjects)
    if n < 3:
        raise DataValidationError(f"need at least 3 subjects, got {n}")
    if abs(sum(ratios) - 1.0) > 1e-9:
        raise ValueError(f"split ratios must sum to 1, got {ratios}")
    n_train = round(ratios[0] * n)
    n_val = round(ratios[1] * n)
    n_test = n - n_train - n_val
    # Rounding can starve a part on tiny subject pools; refill from train.
    while n_val < 1:
        n_val += 1
        n_train -= 1
    while n_test < 1:
        n_test += 1
        n_train -= 1
    if n_train < 1:
        raise DataValidationError(f"cannot split {n} subjects into three parts")
    order = np.random.default_rng(seed).permutation(n)
    shuffled = [subjects[i] for i in order]
    return SplitManifest(
        train_subjects=set(shuffled[:n_train]),
        val_subjects=set(shuffled[n_train : n_train + n_val]),
        test_subjects=set(shuffled[n_train + n_val :]),
        seed=seed,
    )


def sample_label_subset(
    train_records: Sequence[str], ratio: str, seed: int
) -> Set[str]:
    """Seeded labeled subset of size ``max(1, round(ratio * N))``.

    Subsets drawn with the same seed are nested across ratios: all are
    prefixes of one seeded permutation of the record ids.
    """
    records = sorted(set(train_records))
    if not records:
        raise DataValidationError("train_records is empty")
    frac = parse_ratio(ratio)
    k = max(1, round(frac * len(records)))
    order = np.random.default_rng(seed).permutation(len(records))
    return {records[i] for i in order[:k]}


def build_label_subsets(
    train_records: Sequence[str], seed: int, tags: Sequence[str] = RATIO_TAGS
) -> Dict[str, Set[str]]:
    return {tag: sample_label_subset(train_records, tag, seed) for tag in tags}
