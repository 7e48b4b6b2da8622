from .masks import spans_to_mask
from .manifest import (
    DatasetHandle,
    DatasetWriter,
    ManifestRow,
    MANIFEST_NAME,
    SPLITS_NAME,
    load_dataset,
    merge_datasets,
)
from .splits import (
    RATIO_TAGS,
    SplitManifest,
    build_label_subsets,
    parse_ratio,
    sample_label_subset,
    subject_split,
)
from .leads import expand_leads

__all__ = [
    "spans_to_mask",
    "DatasetHandle",
    "DatasetWriter",
    "ManifestRow",
    "MANIFEST_NAME",
    "SPLITS_NAME",
    "load_dataset",
    "merge_datasets",
    "RATIO_TAGS",
    "SplitManifest",
    "build_label_subsets",
    "parse_ratio",
    "sample_label_subset",
    "subject_split",
    "expand_leads",
]
