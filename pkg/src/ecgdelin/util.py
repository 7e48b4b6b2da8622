"""Small shared helpers."""
from __future__ import annotations

import math


def round_half_up(x: float) -> int:
    """Round to nearest integer, ties up (sample counts; avoids banker's ties)."""
    return int(math.floor(x + 0.5))
