"""Alignment scores of random sequence pairs: scoring, block model, transformations."""

from ._seqfluct import (
    SeqfluctError,
    block_move_outcomes,
    block_stats,
    brute_force_score,
    config_fingerprint,
    lcs_length,
    letter_swap_outcomes,
    run_cli,
    score,
    tur,
    tur_pmf,
)

__all__ = [
    "SeqfluctError",
    "block_move_outcomes",
    "block_stats",
    "brute_force_score",
    "config_fingerprint",
    "lcs_length",
    "letter_swap_outcomes",
    "run_cli",
    "score",
    "tur",
    "tur_pmf",
]
__version__ = "0.1.0"
