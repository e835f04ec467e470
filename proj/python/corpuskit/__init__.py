"""Multilingual corpus curation and evaluation toolkit."""

import json as _json

from ._corpuskit import (
    CorpusError,
    Tokenizer,
    ValidationError,
    anonymize,
    borda,
    chrf_pp,
    compute_budgets,
    dedup,
    normalize_line,
    parse_host,
    per_char_perplexity,
    phase_budgets,
    quality_metrics,
    relative_improvement,
    word_edit_distance,
)
from ._corpuskit import run_pipeline as _run_pipeline


def run_pipeline(config, seed=None, jobs=1):
    """Run the configured pipeline and return its manifest as a dict."""
    return _json.loads(_run_pipeline(str(config), seed, jobs))


__all__ = [
    "CorpusError",
    "Tokenizer",
    "ValidationError",
    "anonymize",
    "borda",
    "chrf_pp",
    "compute_budgets",
    "dedup",
    "normalize_line",
    "parse_host",
    "per_char_perplexity",
    "phase_budgets",
    "quality_metrics",
    "relative_improvement",
    "run_pipeline",
    "word_edit_distance",
]
