"""Batch tweet scoring with pretrained abuse classifiers."""

__version__ = "0.1.0"

from .backends import (
    BackendUnavailable,
    LexiconBackend,
    TokenizationFailure,
    TransformersBackend,
    make_backend,
)
from .preprocess import preprocess
from .scoring import (
    RawTweet,
    ScoringReport,
    read_raw_tweets,
    score_batch,
    write_scored_csv,
)

__all__ = [
    "BackendUnavailable",
    "LexiconBackend",
    "RawTweet",
    "ScoringReport",
    "TokenizationFailure",
    "TransformersBackend",
    "make_backend",
    "preprocess",
    "read_raw_tweets",
    "score_batch",
    "write_scored_csv",
]
