"""Fact-checking explanation workbench.

Builds claim/evidence/explanation datasets from fact-check sources, trains
and runs sequence-to-sequence explanation generators, scores generations
with ROUGE, collects human quality judgments through an annotation service,
and trains learned quality metrics over five dimensions.
"""

__version__ = "0.1.0"
