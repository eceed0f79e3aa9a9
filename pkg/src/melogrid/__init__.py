"""Configurable melody token encodings and objective evaluation."""

from .codec import TokenSequence, decode, encode, truncate_tokens, validate_sequence
from .melody import Melody, Note, QuantizedMelody, enforce_monophony, quantize, transpose, validate
from .metrics import METRIC_NAMES, MetricReport, report
from .stats import compare_sets, holm_bonferroni, overlapping_area, wasserstein1, wilcoxon_signed_rank
from .vocab import EncodingConfig, PitchMode, PositionComplexity, Vocabulary, build_vocabulary

__version__ = "0.1.0"
