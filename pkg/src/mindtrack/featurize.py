"""Text featurization: n-gram count vectors, per-category TF-IDF scores and
dense embedding ingestion.
"""

from __future__ import annotations

import hashlib
import json
import math
import re
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources
from typing import Iterable, Mapping, Sequence

import numpy as np

from .corpus import LABELS, Corpus, Quote, require_labels
from .errors import (
    DimensionMismatch,
    DuplicateId,
    EmptyVocabulary,
    NonFiniteValue,
    SchemaError,
)

_TOKEN_RE = re.compile(r"[^\W_]+", re.UNICODE)

Ngram = tuple[str, ...]


def tokenize(text: str) -> list[str]:
    """Lowercase tokens split on any non-alphanumeric character."""
    return _TOKEN_RE.findall(text.lower())


@lru_cache(maxsize=1)
def default_stopwords() -> frozenset[str]:
    data = resources.files("mindtrack").joinpath("stopwords.txt").read_text("utf-8")
    return frozenset(w for w in data.split() if w)


def load_stopwords(path) -> frozenset[str]:
    with open(path, encoding="utf-8") as fh:
        return frozenset(w.strip().lower() for w in fh if w.strip())


def extract_ngrams(tokens: Sequence[str], n: int,
                   stopwords: frozenset[str]) -> list[Ngram]:
    """Contiguous n-grams over the stop-word-filtered token sequence.

    Stop words are removed before n-grams are formed, so a bigram may span
    a removed stop word.
    """
    if n not in (1, 2):
        raise ValueError(f"n must be 1 or 2, got {n}")
    kept = [t for t in tokens if t not in stopwords]
    return [tuple(kept[i:i + n]) for i in range(len(kept) - n + 1)]


class Vocabulary:
    """Ordered n-gram to column-index map (first-occurrence order)."""

    def __init__(self, ngrams: Sequence[Ngram], n: int):
        self.n = n
        self.ngrams = tuple(ngrams)
        self._index = {g: i for i, g in enumerate(self.ngrams)}
        if len(self._index) != len(self.ngrams):
            raise ValueError("duplicate n-grams in vocabulary")

    def __len__(self) -> int:
        return len(self.ngrams)

    def __contains__(self, gram: Ngram) -> bool:
        return gram in self._index

    def index(self, gram: Ngram) -> int | None:
        return self._index.get(gram)


def build_vocabulary(quotes: Iterable[Quote], n: int,
                     stopwords: frozenset[str] | None = None) -> Vocabulary:
    if stopwords is None:
        stopwords = default_stopwords()
    seen: dict[Ngram, None] = {}
    for quote in quotes:
        for gram in extract_ngrams(tokenize(quote.text), n, stopwords):
            seen.setdefault(gram)
    if not seen:
        raise EmptyVocabulary("no n-grams survive stop-word removal")
    return Vocabulary(tuple(seen), n)


@dataclass(frozen=True)
class SparseVector:
    """(index, count) pairs with strictly increasing indices."""

    indices: np.ndarray
    counts: np.ndarray
    dim: int

    def total(self) -> int:
        return int(self.counts.sum())

    def pairs(self) -> list[tuple[int, int]]:
        return list(zip(self.indices.tolist(), self.counts.tolist()))


def count_vector(quote: Quote, vocab: Vocabulary,
                 stopwords: frozenset[str] | None = None) -> SparseVector:
    """Occurrence counts of in-vocabulary n-grams; unknown n-grams drop."""
    if stopwords is None:
        stopwords = default_stopwords()
    counts: dict[int, int] = {}
    for gram in extract_ngrams(tokenize(quote.text), vocab.n, stopwords):
        idx = vocab.index(gram)
        if idx is not None:
            counts[idx] = counts.get(idx, 0) + 1
    indices = np.array(sorted(counts), dtype=np.int64)
    return SparseVector(
        indices=indices,
        counts=np.array([counts[i] for i in indices], dtype=np.int64),
        dim=len(vocab),
    )


def count_matrix(quotes: Sequence[Quote], vocab: Vocabulary,
                 stopwords: frozenset[str] | None = None) -> np.ndarray:
    """Dense count matrix, one row per quote."""
    X = np.zeros((len(quotes), len(vocab)))
    for row, quote in enumerate(quotes):
        sv = count_vector(quote, vocab, stopwords)
        X[row, sv.indices] = sv.counts
    return X


def tfidf_by_category(corpus: Corpus, n: int,
                      stopwords: frozenset[str] | None = None
                      ) -> dict[str, dict[Ngram, float]]:
    """Per-category TF-IDF over the three category documents.

    Each category's quotes are concatenated into a single document;
    score(term, cat) = count(term in cat) * ln(3 / #documents containing
    term). A term present in all three categories therefore scores 0
    everywhere.
    """
    require_labels(corpus)
    if stopwords is None:
        stopwords = default_stopwords()
    tf: dict[str, dict[Ngram, int]] = {lab: {} for lab in LABELS}
    for quote in corpus:
        doc = tf[quote.label]
        for gram in extract_ngrams(tokenize(quote.text), n, stopwords):
            doc[gram] = doc.get(gram, 0) + 1
    df: dict[Ngram, int] = {}
    for doc in tf.values():
        for gram in doc:
            df[gram] = df.get(gram, 0) + 1
    return {
        lab: {gram: count * math.log(3.0 / df[gram]) for gram, count in doc.items()}
        for lab, doc in tf.items()
    }


class EmbeddingMatrix:
    """Quote-id keyed dense vectors sharing one dimension."""

    def __init__(self, vectors: Mapping[str, np.ndarray]):
        self.dim: int | None = None
        checked: dict[str, np.ndarray] = {}
        for qid, vec in vectors.items():
            vec = np.asarray(vec, dtype=np.float64)
            if vec.ndim != 1:
                raise DimensionMismatch(f"vector for {qid!r} is not 1-D")
            if self.dim is None:
                self.dim = vec.shape[0]
            elif vec.shape[0] != self.dim:
                raise DimensionMismatch(
                    f"vector for {qid!r} has length {vec.shape[0]}, expected {self.dim}"
                )
            if not np.all(np.isfinite(vec)):
                raise NonFiniteValue(f"vector for {qid!r} has non-finite entries")
            checked[qid] = vec
        self.vectors = checked

    def __len__(self) -> int:
        return len(self.vectors)

    def __contains__(self, qid: str) -> bool:
        return qid in self.vectors

    def __getitem__(self, qid: str) -> np.ndarray:
        return self.vectors[qid]

    def matrix(self, ids: Sequence[str]) -> np.ndarray:
        missing = [qid for qid in ids if qid not in self.vectors]
        if missing:
            raise KeyError(f"no embedding for quote ids {missing[:5]}")
        return np.stack([self.vectors[qid] for qid in ids])


def load_embeddings(path) -> EmbeddingMatrix:
    """Load an embeddings JSONL file of {"id": ..., "vector": [...]} records."""
    vectors: dict[str, np.ndarray] = {}
    dim: int | None = None
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as exc:
                raise SchemaError(lineno, "-", f"invalid JSON: {exc}") from None
            if "id" not in rec or "vector" not in rec:
                raise SchemaError(lineno, "id/vector", "missing required field")
            qid = rec["id"]
            if qid in vectors:
                raise DuplicateId(f"duplicate embedding id {qid!r}")
            vec = np.asarray(rec["vector"], dtype=np.float64)
            if vec.ndim != 1:
                raise SchemaError(lineno, "vector", "must be a flat array")
            if dim is None:
                dim = vec.shape[0]
            elif vec.shape[0] != dim:
                raise DimensionMismatch(
                    f"line {lineno}: vector length {vec.shape[0]} != {dim}"
                )
            if not np.all(np.isfinite(vec)):
                raise NonFiniteValue(f"line {lineno}: non-finite vector entry")
            vectors[qid] = vec
    return EmbeddingMatrix(vectors)


def save_embeddings(embeddings: EmbeddingMatrix, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for qid, vec in embeddings.vectors.items():
            fh.write(json.dumps({"id": qid, "vector": vec.tolist()}) + "\n")


def hash_encode(text: str, dim: int, seed: int = 0) -> np.ndarray:
    """Deterministic signed-hash n-gram sketch, L2-normalised.

    A stand-in encoder for tests and pipelines that have no precomputed
    embeddings: identical text always maps to the identical vector.
    """
    if dim < 2:
        raise ValueError(f"dim must be >= 2, got {dim}")
    tokens = tokenize(text)
    grams: list[Ngram] = [(t,) for t in tokens]
    grams += [tuple(tokens[i:i + 2]) for i in range(len(tokens) - 1)]
    vec = np.zeros(dim)
    key = int(seed).to_bytes(8, "little", signed=True)
    for gram in grams:
        digest = hashlib.blake2b(
            "\x1f".join(gram).encode("utf-8"), key=key, digest_size=8
        ).digest()
        h = int.from_bytes(digest, "little")
        sign = 1.0 if h & (1 << 63) else -1.0
        vec[(h & ((1 << 63) - 1)) % dim] += sign
    norm = float(np.linalg.norm(vec))
    if norm > 0.0:
        vec /= norm
    return vec
