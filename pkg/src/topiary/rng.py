"""Deterministic random stream derivation.

Every source of randomness in a run is a `random.Random` seeded from the
master seed plus a string label. Per-node and per-epoch streams are therefore
independent of each other and of evaluation order, which keeps runs
reproducible even if the surrounding code is reorganized or parallelized.
"""

from __future__ import annotations

import random


def derive_rng(seed: int, *labels: object) -> random.Random:
    """Return an independent stream keyed by the seed and a label path."""
    key = "/".join([str(seed), *(str(part) for part in labels)])
    return random.Random(key)
