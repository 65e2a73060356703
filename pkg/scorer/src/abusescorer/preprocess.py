"""Tweet text normalization applied before classifier inference.

Follows the tweet-classifier model cards' template convention (mask user
handles as ``@user`` and links as ``http``), with line-break removal,
lowercasing, and whitespace collapsing on top.  The function is
idempotent: already-clean text passes through unchanged.
"""

from __future__ import annotations

import re

_LINE_BREAKS = re.compile(r"[\r\n]+")
_MULTI_SPACE = re.compile(r"\s+")


def _mask_token(token: str) -> str:
    if token.startswith("@") and len(token) > 1:
        return "@user"
    if token.startswith("http"):
        return "http"
    return token


def preprocess(text: str) -> str:
    """Normalize one tweet's text for scoring."""
    flat = _LINE_BREAKS.sub(" ", text)
    masked = " ".join(_mask_token(tok) for tok in flat.split(" "))
    lowered = masked.lower()
    return _MULTI_SPACE.sub(" ", lowered).strip()
