"""Figure generation for overlay-simulation CSV outputs.

Reads the CSV files produced by simulation runs (metric time series,
score distributions, attack traces, sweep and comparison summaries) and
renders them as deterministic SVG or PNG figures.  Rendering the same
inputs twice produces byte-identical files.
"""

from __future__ import annotations

from plotkit.readers import SchemaError

FIGURE_KINDS = (
    "convergence-curves",
    "score-distribution",
    "topology-comparison",
    "parameter-sweep",
    "attack-impact",
)

__all__ = ["FIGURE_KINDS", "SchemaError"]
