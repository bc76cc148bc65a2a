"""Corpus preprocessing, vocabulary building, and negative sampling.

The processing unit is the single Chinese character; bigram streams are
derived by pairing adjacent characters with one-character overlap.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass

import numpy as np

# CJK Unified Ideographs plus Extension A; covers the GB2312 repertoire.
CJK_RANGES = ((0x4E00, 0x9FFF), (0x3400, 0x4DBF))

# Sentence-ending punctuation that closes a sentence (and is then dropped).
SENTENCE_ENDERS = frozenset("。！？\n")


class CorpusError(ValueError):
    """Raised for invalid corpus input or degenerate vocabularies."""


def is_cjk(ch: str) -> bool:
    cp = ord(ch)
    return any(lo <= cp <= hi for lo, hi in CJK_RANGES)


def preprocess(raw_text) -> list[list[str]]:
    """Turn raw text into sentences of Chinese characters.

    Keeps only CJK ideographs (digits, Latin, and all other symbols are
    dropped); sentences split on newlines and on 。！？, which are stripped.
    Accepts ``str`` or UTF-8 ``bytes``; invalid bytes raise
    :class:`CorpusError` with the offending byte offset.
    """
    if isinstance(raw_text, bytes):
        try:
            raw_text = raw_text.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise CorpusError(f"invalid UTF-8 at byte offset {exc.start}") from exc
    sentences: list[list[str]] = []
    current: list[str] = []
    for ch in raw_text:
        if ch in SENTENCE_ENDERS:
            if current:
                sentences.append(current)
                current = []
        elif is_cjk(ch):
            current.append(ch)
    if current:
        sentences.append(current)
    return sentences


def to_bigrams(sentences) -> list[list[str]]:
    """Overlapping bigram tokens per sentence: [a, b, c] -> [ab, bc].

    Sentences shorter than two characters are dropped; bigrams never cross
    sentence boundaries.
    """
    out = []
    for sent in sentences:
        if len(sent) < 2:
            continue
        out.append([sent[i] + sent[i + 1] for i in range(len(sent) - 1)])
    return out


@dataclass(frozen=True)
class Vocabulary:
    """Token <-> id mapping with counts and a noise distribution.

    Ids are assigned by descending count, ties broken by code-point order,
    so construction is deterministic. ``ns_probs`` holds the negative
    sampling distribution (counts ** ns_exponent, normalized) and
    ``ns_cum`` its cumulative sums for inverse-CDF draws.
    """

    id_to_token: tuple[str, ...]
    token_to_id: dict[str, int]
    counts: np.ndarray
    ns_probs: np.ndarray
    ns_cum: np.ndarray
    ns_exponent: float

    def __len__(self) -> int:
        return len(self.id_to_token)

    def __contains__(self, token: str) -> bool:
        return token in self.token_to_id

    def save(self, path) -> None:
        """Dump as text lines ``<token> <count>`` in id order."""
        with open(path, "w", encoding="utf-8") as fh:
            for tok, cnt in zip(self.id_to_token, self.counts):
                fh.write(f"{tok} {int(cnt)}\n")


@dataclass(frozen=True)
class TokenStream:
    """Sentences of token ids over one vocabulary. ``gram`` is uni or bi."""

    sentences: tuple[np.ndarray, ...]
    gram: str

    @property
    def total_tokens(self) -> int:
        return sum(len(s) for s in self.sentences)


def build_vocab(sentences, min_count: int = 10, ns_exponent: float = 0.75) -> Vocabulary:
    """Count tokens over ``sentences`` and keep those seen >= ``min_count`` times.

    The noise distribution raises retained counts to ``ns_exponent`` and
    normalizes. Raises :class:`CorpusError` when nothing survives.
    """
    if min_count < 1:
        raise ValueError(f"min_count must be >= 1, got {min_count}")
    counter = Counter()
    for sent in sentences:
        counter.update(sent)
    kept = sorted(
        (tok for tok, c in counter.items() if c >= min_count),
        key=lambda tok: (-counter[tok], tok),
    )
    if not kept:
        raise CorpusError(
            f"no token reaches min_count={min_count} (saw {len(counter)} distinct tokens)"
        )
    counts = np.array([counter[tok] for tok in kept], dtype=np.int64)
    weights = counts.astype(np.float64) ** ns_exponent
    probs = weights / weights.sum()
    return Vocabulary(
        id_to_token=tuple(kept),
        token_to_id={tok: i for i, tok in enumerate(kept)},
        counts=counts,
        ns_probs=probs,
        ns_cum=np.cumsum(probs),
        ns_exponent=ns_exponent,
    )


def encode(sentences, vocab: Vocabulary, gram: str = "uni") -> TokenStream:
    """Map token sentences to id sentences, deleting out-of-vocabulary tokens.

    Deletion closes the context window over the gap, matching the usual
    handling of below-threshold tokens. Empty sentences are dropped.
    """
    if gram not in ("uni", "bi"):
        raise ValueError(f"gram must be 'uni' or 'bi', got {gram!r}")
    encoded = []
    for sent in sentences:
        ids = [vocab.token_to_id[t] for t in sent if t in vocab.token_to_id]
        if ids:
            encoded.append(np.array(ids, dtype=np.int64))
    return TokenStream(sentences=tuple(encoded), gram=gram)


def sample_negative(vocab: Vocabulary, rng: np.random.Generator, size=None):
    """Draw token id(s) from the vocabulary's noise distribution.

    Returns a single int when ``size`` is None, else an int64 array.
    """
    if size is None:
        return int(np.searchsorted(vocab.ns_cum, rng.random(), side="right"))
    draws = np.searchsorted(vocab.ns_cum, rng.random(size), side="right")
    return draws.astype(np.int64)


def read_corpus(paths) -> list[list[str]]:
    """Preprocess one file or a list of files into a single sentence list."""
    if isinstance(paths, (str, bytes)) or hasattr(paths, "__fspath__"):
        paths = [paths]
    sentences: list[list[str]] = []
    for path in paths:
        with open(path, "rb") as fh:
            data = fh.read()
        try:
            sentences.extend(preprocess(data))
        except CorpusError as exc:
            raise CorpusError(f"{path}: {exc}") from exc
    return sentences
