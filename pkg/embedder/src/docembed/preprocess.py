"""Tokenization, stop-word removal, stemming, and wrapper-sentence removal."""

from __future__ import annotations

import re
from collections import Counter

from .corpus import Article, RawCorpus
from .stemmer import stem

# Standard English stop-word list (the usual ~130 function words).
STOP_WORDS = frozenset("""
a about above after again against all am an and any are aren as at be because
been before being below between both but by can cannot could couldn did didn
do does doesn doing don down during each few for from further had hadn has
hasn have haven having he her here hers herself him himself his how i if in
into is isn it its itself just me more most mustn my myself no nor not now of
off on once only or other ought our ours ourselves out over own same shan she
should shouldn so some such than that the their theirs them themselves then
there these they this those through to too under until up very was wasn we
were weren what when where which while who whom why will with won would
wouldn you your yours yourself yourselves
""".split())

_WORD_RE = re.compile(r"[a-z]+")
_SENTENCE_SPLIT_RE = re.compile(r"(?<=[.!?])\s+")
_WHITESPACE_RE = re.compile(r"\s+")


def preprocess(text: str) -> list[str]:
    """Lowercased word tokens with digits and stop words removed, stemmed.

    Tokens are maximal ASCII letter runs, so digits and punctuation never
    survive; the output may be empty.
    """
    tokens = _WORD_RE.findall(text.lower())
    return [stem(t) for t in tokens if t not in STOP_WORDS]


def split_sentences(text: str) -> list[str]:
    """Whitespace-normalized sentences; split at .!? boundaries."""
    flat = _WHITESPACE_RE.sub(" ", text).strip()
    if not flat:
        return []
    return [s for s in _SENTENCE_SPLIT_RE.split(flat) if s]


def dedup_wrappers(corpus: RawCorpus, max_frequency: int = 2) -> RawCorpus:
    """Drop boilerplate sentences that repeat across the corpus.

    A hashed sentence-frequency table is built over all articles and each
    article is reconstructed keeping only sentences whose corpus frequency
    stays within ``max_frequency`` (the default 2 tolerates a quotation
    copied into one other article). Idempotent: surviving sentences can only
    lose occurrences.
    """
    freq: Counter[str] = Counter()
    sentences_per_article = []
    for article in corpus.articles:
        sentences = split_sentences(article.text)
        sentences_per_article.append(sentences)
        freq.update(sentences)
    rebuilt = []
    for article, sentences in zip(corpus.articles, sentences_per_article):
        kept = " ".join(s for s in sentences if freq[s] <= max_frequency)
        rebuilt.append(Article(article.id, kept, article.timestamp))
    return RawCorpus(rebuilt)
