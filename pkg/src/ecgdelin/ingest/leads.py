"""Per-lead expansion of multi-lead recordings.

Every lead becomes an independent single-lead example. Integrated labels
(a single annotation covering all leads) are replicated verbatim to each
lead; lead-specific labels stay with their own lead.
"""
from __future__ import annotations

from typing import List

import numpy as np

from ..types import DataValidationError, EcgRecord, LabeledExample, MultiLeadRecord


def expand_leads(rec: MultiLeadRecord) -> List[LabeledExample]:
    if not rec.leads:
        raise DataValidationError(f"record {rec.record_id}: no leads")
    lengths = {lead: np.asarray(x).shape[0] for lead, x in rec.leads.items()}
    if len(set(lengths.values())) != 1:
        raise DataValidationError(
            f"record {rec.record_id}: leads have mismatched lengths {lengths}"
        )
    if rec.lead_masks is not None and rec.shared_mask is not None:
        raise DataValidationError(
            f"record {rec.record_id}: both lead-specific and integrated masks given"
        )
    out = []
    for lead_id in sorted(rec.leads):
        mask = None
        if rec.shared_mask is not None:
            mask = np.array(rec.shared_mask, copy=True)
        elif rec.lead_masks is not None and lead_id in rec.lead_masks:
            mask = rec.lead_masks[lead_id]
        out.append(
            LabeledExample(
                record=EcgRecord(
                    record_id=rec.record_id,
                    subject_id=rec.subject_id,
                    dataset_id=rec.dataset_id,
                    lead_id=lead_id,
                    fs_hz=rec.fs_hz,
                    samples=rec.leads[lead_id],
                ),
                mask=mask,
                intervals=rec.intervals,
            )
        )
    return out
