"""Tokenization, lemmatization and stopword handling shared by all stages.

The lemmatizer is deliberately a small rule-based suffix stripper so that
every documented example stays checkable by hand:

* ``...ies``  -> ``...y``          (studies -> study)
* ``...es``   -> stem, when the stem ends in s, x, z, ch or sh
                                    (boxes -> box, churches -> church)
* ``...s``    -> stem, for tokens longer than three characters not ending
                 in ``ss``          (offices -> office, class -> class)
"""

from __future__ import annotations

import re
from pathlib import Path

_TOKEN_RE = re.compile(r"[a-z0-9]+(?:'[a-z]+)?")


def tokenize(text: str) -> list[str]:
    """Lowercase and split on non-alphanumeric boundaries (apostrophes kept)."""
    return _TOKEN_RE.findall(text.lower())


def lemmatize(token: str) -> str:
    """Apply the suffix rules documented in the module docstring."""
    if token.endswith("'s"):
        token = token[:-2]
    if token.endswith("ies") and len(token) > 3:
        return token[:-3] + "y"
    if token.endswith("es") and len(token) > 2:
        stem = token[:-2]
        if stem.endswith(("s", "x", "z", "ch", "sh")):
            return stem
    if token.endswith("s") and not token.endswith("ss") and len(token) > 3:
        return token[:-1]
    return token


def is_numeric(token: str) -> bool:
    """True when the token consists only of digits."""
    return token != "" and all(c.isdigit() for c in token)


def preprocess(text: str, stopwords: frozenset[str] | set[str]) -> list[str]:
    """Normalize raw text into lemmatized content tokens, order preserved.

    Steps, in order: lowercase, strip punctuation via tokenization, remove
    numeric tokens, remove stopwords, lemmatize.
    """
    out = []
    for tok in tokenize(text):
        if is_numeric(tok):
            continue
        if tok in stopwords:
            continue
        out.append(lemmatize(tok))
    return out


def label_tokens(label: str) -> list[str]:
    """Lowercased, lemmatized tokens of a node label (stopwords kept).

    Stopword and length filtering happens at match time, not here, so the
    stored token sets stay faithful to the label.
    """
    return [lemmatize(t) for t in tokenize(label)]


def load_stopwords(path: str | Path) -> frozenset[str]:
    """Read a one-word-per-line stopword file."""
    words = set()
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        word = line.strip().lower()
        if word:
            words.add(word)
    return frozenset(words)


# Small built-in list so fixtures and demos work without an external file.
DEFAULT_STOPWORDS = frozenset(
    """a an and are as at be been by do for from had has have he her his i in
    is it its lot not of on or our own s so that the their them there they
    this to us was we were will with you your""".split()
)
