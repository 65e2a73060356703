"""Classifier backends producing (p_offensive, p_hateful) pairs.

``TransformersBackend`` wraps the pretrained tweet-classification
checkpoints used by the study (configurable model ids).  It needs the
optional ``transformers``/``torch`` dependencies and downloadable or
cached model weights, and fails fast at construction if either is
missing.

``LexiconBackend`` is a deterministic offline fallback: term-list hits
squashed into [0, 1).  It exists so the pipeline, its tests, and smoke
runs work without model downloads; its scores are crude but directionally
correct, which is all the bundled fixtures assert.
"""

from __future__ import annotations

import re

from .preprocess import preprocess


class TokenizationFailure(Exception):
    """A single text could not be tokenized; the row is skipped."""


class BackendUnavailable(Exception):
    """The backend's model resources cannot be loaded at startup."""


DEFAULT_OFFENSIVE_MODEL = "cardiffnlp/twitter-roberta-base-offensive"
DEFAULT_HATE_MODEL = "cardiffnlp/twitter-roberta-base-hate"

_TOKEN_SPLIT = re.compile(r"[^0-9a-z']+")

# mild stand-in term lists; the transformer backend is the real scorer
OFFENSIVE_TERMS = frozenset({
    "damn", "hell", "crap", "idiot", "stupid", "jerk", "moron", "loser",
    "trash", "dumb", "shut", "hate", "ugly", "pathetic", "worthless",
    "freak", "creep", "scum", "clown", "garbage",
})
HATE_TERMS = frozenset({
    "women", "woman", "girls", "immigrants", "immigrant", "foreigners",
    "invaders", "them", "those",
})


class LexiconBackend:
    """Deterministic token-hit scorer; raises on untokenizable text."""

    name = "lexicon"

    def tokenize(self, text: str) -> list[str]:
        tokens = [t for t in _TOKEN_SPLIT.split(preprocess(text)) if t]
        if not tokens:
            raise TokenizationFailure("no tokenizable content")
        return tokens

    def score_pair(self, text: str) -> tuple[float, float]:
        tokens = set(self.tokenize(text))
        off_hits = len(tokens & OFFENSIVE_TERMS)
        hate_hits = len(tokens & HATE_TERMS)
        p_off = 1.0 - 0.5 ** off_hits
        # hate terms alone are benign group mentions; require an offensive
        # term in the same text before scoring hatefulness high
        p_hate = (1.0 - 0.6 ** hate_hits) * (0.25 + 0.75 * (off_hits > 0))
        return p_off, p_hate

    def score_batch(self, texts: list[str]) -> list[tuple[float, float]]:
        return [self.score_pair(text) for text in texts]


class TransformersBackend:
    """Pretrained sequence classifiers decoded with a softmax.

    The positive-class probability (index 1 per the model cards) is
    reported for each of the two checkpoints.
    """

    name = "transformers"

    def __init__(
        self,
        offensive_model: str = DEFAULT_OFFENSIVE_MODEL,
        hate_model: str = DEFAULT_HATE_MODEL,
    ):
        try:
            import torch
            from transformers import (
                AutoModelForSequenceClassification,
                AutoTokenizer,
            )
        except ImportError as exc:
            raise BackendUnavailable(
                "transformers backend needs the 'transformers' and 'torch' packages"
            ) from exc
        self._torch = torch
        try:
            self._pairs = []
            for model_id in (offensive_model, hate_model):
                tokenizer = AutoTokenizer.from_pretrained(model_id)
                model = AutoModelForSequenceClassification.from_pretrained(model_id)
                model.eval()
                self._pairs.append((tokenizer, model))
        except Exception as exc:
            raise BackendUnavailable(
                f"could not load classifier resources: {exc}"
            ) from exc

    def _positive_probability(self, pair, texts: list[str]) -> list[float]:
        tokenizer, model = pair
        encoded = tokenizer(
            texts, return_tensors="pt", padding=True, truncation=True, max_length=512
        )
        with self._torch.no_grad():
            logits = model(**encoded).logits
        probs = self._torch.softmax(logits, dim=-1)[:, 1]
        return [float(p) for p in probs]

    def score_batch(self, texts: list[str]) -> list[tuple[float, float]]:
        # the caller retries item by item after a failure, so raising here
        # costs one batch, not the run
        cleaned = [preprocess(t) for t in texts]
        try:
            off = self._positive_probability(self._pairs[0], cleaned)
            hate = self._positive_probability(self._pairs[1], cleaned)
        except Exception as exc:
            raise TokenizationFailure(str(exc)) from exc
        return list(zip(off, hate))


BACKENDS = {
    LexiconBackend.name: LexiconBackend,
    TransformersBackend.name: TransformersBackend,
}


def make_backend(name: str, **kwargs):
    try:
        factory = BACKENDS[name]
    except KeyError:
        raise ValueError(f"unknown backend {name!r}; choose from {sorted(BACKENDS)}")
    return factory(**kwargs)
