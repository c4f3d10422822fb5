"""Text to a point in a 1024-dimensional space of word meanings.

Each word is reduced to a crude root, looked up in a lexicon that gives a
frequency band and one or more meaning groups, and its weight is spread
over those groups.  The sum is divided by the number of words, so
repeating a text does not move its point.
"""

from __future__ import annotations

import re
import string
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Optional

import numpy as np

from .errors import LexiconError
from .sparse_point import EMPTY, SparsePoint

SEMANTIC_DIM = 1024
BANDS = 256
DEFAULT_BAND = 128
DEFAULT_EXCEPTIONS = frozenset({"was", "is", "this", "his", "its", "news"})
SUFFIXES = ("ing", "ed", "s")

_SKIPPED = re.compile(r"<(script|style)\b.*?</\1\s*>", re.IGNORECASE | re.DOTALL)
_COMMENT = re.compile(r"<!--.*?-->", re.DOTALL)
_TAG = re.compile(r"<[^<>]*>")
_ENTITY = re.compile(r"&(amp|lt|gt|quot|apos|#39);")
_ENTITIES = {"amp": "&", "lt": "<", "gt": ">", "quot": '"', "apos": "'", "#39": "'"}


def strip_markup(text: str) -> str:
    """Drop tags, comments and script/style bodies; decode basic entities.

    A tag squeezed between two words becomes a space so the words stay
    apart; elsewhere tags vanish, leaving plain text untouched.
    """
    # removed blocks become empty tags so they separate words like tags do
    text = _COMMENT.sub("<>", _SKIPPED.sub("<>", text))
    out: list[str] = []
    for piece in _TAG.split(text):
        if not piece:
            continue
        if out and not out[-1][-1].isspace() and not piece[0].isspace():
            out.append(" ")
        out.append(piece)
    return _ENTITY.sub(lambda m: _ENTITIES[m.group(1)], "".join(out))


def tokenize(text: str) -> list[str]:
    """Lowercase words; numbers, addresses, links and hyphenated or
    otherwise punctuated tokens are dropped whole."""
    words = []
    for raw in text.split():
        tok = raw.strip(string.punctuation)
        if not tok or "@" in tok or "://" in tok:
            continue
        if tok.isalpha():
            words.append(tok.lower())
    return words


def stem(token: str, exceptions: Iterable[str] = DEFAULT_EXCEPTIONS) -> str:
    if token in exceptions:
        return token
    for suffix in SUFFIXES:
        if token.endswith(suffix) and len(token) - len(suffix) >= 2:
            return token[: -len(suffix)]
    return token


def fnv1a32(text: str) -> int:
    h = 0x811C9DC5
    for byte in text.encode("utf-8"):
        h = ((h ^ byte) * 0x01000193) & 0xFFFFFFFF
    return h


def band_weight(band: int) -> float:
    return (band + 1) / BANDS


@dataclass(frozen=True)
class Lexicon:
    bands: dict[str, int] = field(default_factory=dict)
    groups: dict[str, tuple[int, ...]] = field(default_factory=dict)
    exceptions: frozenset[str] = DEFAULT_EXCEPTIONS
    default_band: int = DEFAULT_BAND

    def lookup(self, root: str) -> tuple[int, tuple[int, ...]]:
        """(band, meaning groups); unknown roots hash to a single group."""
        band = self.bands.get(root, self.default_band)
        groups = self.groups.get(root)
        if groups is None:
            groups = (fnv1a32(root) % SEMANTIC_DIM,)
        return band, groups

    @classmethod
    def parse(cls, lines: Iterable[str]) -> "Lexicon":
        """Read ``root<TAB>band<TAB>g1,g2,...`` lines.

        ``!word`` adds a stemming exception; blank and ``#`` lines are skipped.
        """
        bands: dict[str, int] = {}
        groups: dict[str, tuple[int, ...]] = {}
        exceptions = set(DEFAULT_EXCEPTIONS)
        for lineno, line in enumerate(lines, start=1):
            text = line.strip()
            if not text or text.startswith("#"):
                continue
            if text.startswith("!"):
                exceptions.add(text[1:].strip().lower())
                continue
            parts = text.split("\t")
            if len(parts) != 3:
                raise LexiconError(f"line {lineno}: expected root, band and groups")
            root = parts[0].strip().lower()
            try:
                band = int(parts[1])
                ids = tuple(int(g) for g in parts[2].split(","))
            except ValueError:
                raise LexiconError(f"line {lineno}: band and groups must be integers") from None
            if not 0 <= band < BANDS:
                raise LexiconError(f"line {lineno}: band {band} outside [0, {BANDS})")
            if not ids or any(not 0 <= g < SEMANTIC_DIM for g in ids):
                raise LexiconError(f"line {lineno}: group ids must lie in [0, {SEMANTIC_DIM})")
            bands[root] = band
            groups[root] = ids
        return cls(bands, groups, frozenset(exceptions))

    @classmethod
    def load(cls, path) -> "Lexicon":
        with open(path, encoding="utf-8") as fh:
            return cls.parse(fh)


DEFAULT_LEXICON = Lexicon()


def vectorize(text: str, lex: Optional[Lexicon] = None, markup: bool = True) -> SparsePoint:
    lex = DEFAULT_LEXICON if lex is None else lex
    if markup:
        text = strip_markup(text)
    tokens = tokenize(text)
    if not tokens:
        return EMPTY
    counts = Counter(stem(t, lex.exceptions) for t in tokens)
    acc = np.zeros(SEMANTIC_DIM)
    # fixed root order makes the sum independent of word order
    for root in sorted(counts):
        band, groups = lex.lookup(root)
        share = counts[root] * band_weight(band) / len(groups)
        for g in groups:
            acc[g] += share
    return SparsePoint.from_dense(acc / len(tokens))
