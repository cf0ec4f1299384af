"""Quote data model, corpus file I/O, rater-label merging and synthetic data.

A corpus is an immutable collection of time-stamped, author-attributed
statements, each optionally labelled with one of the three ideology
categories ``c`` (centrist), ``e`` (extremist) or ``t`` (terrorist).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from datetime import date, timedelta
from typing import Iterable, Iterator

import numpy as np

from .dates import parse_date
from .errors import (
    DuplicateId,
    InvalidConfig,
    MissingLabel,
    SchemaError,
    UnknownAuthor,
)

LABELS = ("c", "e", "t")
SEVERITY = {"c": 0, "e": 1, "t": 2}


@dataclass(frozen=True)
class Quote:
    """One statement: who said it, what, when, and how it was labelled."""

    id: str
    author: str
    text: str
    date: date
    label: str | None = None
    author_type: str | None = None
    source: str | None = None


class Corpus:
    """Ordered quote collection with a per-author date-sorted index."""

    def __init__(self, quotes: Iterable[Quote]):
        quotes = tuple(quotes)
        seen: set[str] = set()
        for q in quotes:
            if q.id in seen:
                raise DuplicateId(f"duplicate quote id {q.id!r}")
            seen.add(q.id)
        self.quotes = quotes
        by_author: dict[str, list[Quote]] = {}
        for q in quotes:
            by_author.setdefault(q.author, []).append(q)
        # ties within a day break on quote id so replays are reproducible
        self._by_author = {
            a: tuple(sorted(qs, key=lambda q: (q.date, q.id)))
            for a, qs in by_author.items()
        }

    def __len__(self) -> int:
        return len(self.quotes)

    def __iter__(self) -> Iterator[Quote]:
        return iter(self.quotes)

    def __eq__(self, other) -> bool:
        return isinstance(other, Corpus) and self.quotes == other.quotes

    def authors(self) -> list[str]:
        return sorted(self._by_author)

    def author_quotes(self, author: str) -> tuple[Quote, ...]:
        try:
            return self._by_author[author]
        except KeyError:
            raise UnknownAuthor(f"no quotes by author {author!r}") from None

    def author_type(self, author: str) -> str | None:
        return self.author_quotes(author)[0].author_type

    def label_counts(self) -> dict[str, int]:
        counts = {lab: 0 for lab in LABELS}
        for q in self.quotes:
            if q.label is not None:
                counts[q.label] += 1
        return counts

    def labelled(self) -> "Corpus":
        """Sub-corpus of quotes carrying a label."""
        return Corpus(q for q in self.quotes if q.label is not None)

    def with_labels(self, labels: dict[str, str]) -> "Corpus":
        return Corpus(
            replace(q, label=labels[q.id]) if q.id in labels else q
            for q in self.quotes
        )


def _check_label(value, line: int, field_name: str) -> str:
    if value not in LABELS:
        raise SchemaError(line, field_name, f"expected one of {LABELS}, got {value!r}")
    return value


def load_corpus(path, *, day_first: bool = True) -> Corpus:
    """Load a corpus from a JSONL file (one quote object per line)."""
    quotes = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as exc:
                raise SchemaError(lineno, "-", f"invalid JSON: {exc}") from None
            if not isinstance(rec, dict):
                raise SchemaError(lineno, "-", "record is not an object")
            for key in ("id", "author", "text", "date"):
                if key not in rec:
                    raise SchemaError(lineno, key, "missing required field")
                if not isinstance(rec[key], str):
                    raise SchemaError(lineno, key, "must be a string")
            text = rec["text"]
            if not text.strip():
                raise SchemaError(lineno, "text", "empty after whitespace trim")
            raw_date = rec["date"]
            try:
                when = date.fromisoformat(raw_date)
            except ValueError:
                when = parse_date(raw_date, day_first=day_first)
            label = rec.get("label")
            if label is not None:
                label = _check_label(label, lineno, "label")
            author_type = rec.get("author_type")
            if author_type is not None:
                author_type = _check_label(author_type, lineno, "author_type")
            quotes.append(
                Quote(
                    id=rec["id"],
                    author=rec["author"],
                    text=text,
                    date=when,
                    label=label,
                    author_type=author_type,
                    source=rec.get("source"),
                )
            )
    return Corpus(quotes)


def save_corpus(corpus: Corpus, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for q in corpus:
            rec = {"id": q.id, "author": q.author, "text": q.text,
                   "date": q.date.isoformat()}
            if q.author_type is not None:
                rec["author_type"] = q.author_type
            if q.label is not None:
                rec["label"] = q.label
            if q.source is not None:
                rec["source"] = q.source
            fh.write(json.dumps(rec, ensure_ascii=False) + "\n")


def merge_ratings(r1: str, r2: str, r3: str) -> str:
    """Combine three rater labels into one.

    A strict majority wins; when all three differ the median by severity
    (always ``e``) is returned. Equivalent to the severity median, which
    makes the rule order-independent.
    """
    ratings = (r1, r2, r3)
    for r in ratings:
        if r not in LABELS:
            raise ValueError(f"invalid label {r!r}")
    return sorted(ratings, key=SEVERITY.__getitem__)[1]


def load_ratings(path) -> dict[str, tuple[str, str, str]]:
    """Load a ratings JSONL file mapping quote id to its three rater labels."""
    out: dict[str, tuple[str, str, str]] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as exc:
                raise SchemaError(lineno, "-", f"invalid JSON: {exc}") from None
            for key in ("id", "r1", "r2", "r3"):
                if key not in rec:
                    raise SchemaError(lineno, key, "missing required field")
            if rec["id"] in out:
                raise DuplicateId(f"duplicate rating id {rec['id']!r}")
            out[rec["id"]] = (
                _check_label(rec["r1"], lineno, "r1"),
                _check_label(rec["r2"], lineno, "r2"),
                _check_label(rec["r3"], lineno, "r3"),
            )
    return out


def merged_ratings(ratings: dict[str, tuple[str, str, str]]) -> dict[str, str]:
    return {qid: merge_ratings(*rs) for qid, rs in ratings.items()}


# Statement-type probabilities given person type, columns c/e/t, and the
# person-type proportions, both taken from the source data set.
DEFAULT_STATEMENT_GIVEN_PERSON = (
    (0.993, 0.584, 0.220),
    (0.007, 0.409, 0.532),
    (0.000, 0.007, 0.248),
)
DEFAULT_PERSON_PRIOR = (0.813, 0.083, 0.104)

# Disjoint per-class vocabularies so n-gram features separate synthetic
# classes the same way the vector features do.
_SYNTH_VOCAB = {
    "c": ("budget", "election", "policy", "community", "schools",
          "economy", "transport", "healthcare", "council", "reform"),
    "e": ("traitors", "outrage", "corrupt", "betrayal", "enemies",
          "uprising", "purity", "invaders", "collapse", "resist"),
    "t": ("attack", "weapons", "strike", "targets", "explosives",
          "martyr", "raid", "siege", "detonate", "cell"),
}
_WORDS_PER_QUOTE = 8


@dataclass(frozen=True)
class SyntheticConfig:
    """Generative model for test corpora.

    ``statement_given_person[s][k]`` is p(statement type s | person type k);
    every column must sum to 1. Class means/covariances define one Gaussian
    per statement type in feature space.
    """

    statement_given_person: tuple = DEFAULT_STATEMENT_GIVEN_PERSON
    person_prior: tuple = DEFAULT_PERSON_PRIOR
    class_means: tuple = ((0.0, 0.0), (5.0, 0.0), (2.5, 4.330127018922193))
    class_covs: tuple | None = None  # defaults to identity per class
    persons_per_type: tuple[int, int, int] = (10, 10, 10)
    quotes_per_person: int = 20
    seed: int = 0
    start_date: date = date(2000, 1, 1)
    spacing_days: int = 30

    def arrays(self) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        p_sk = np.asarray(self.statement_given_person, dtype=float)
        prior = np.asarray(self.person_prior, dtype=float)
        means = np.asarray(self.class_means, dtype=float)
        if self.class_covs is None:
            d = means.shape[1]
            covs = np.broadcast_to(np.eye(d), (3, d, d)).copy()
        else:
            covs = np.asarray(self.class_covs, dtype=float)
        return p_sk, prior, means, covs

    def validate(self) -> None:
        p_sk, prior, means, covs = self.arrays()
        if p_sk.shape != (3, 3):
            raise InvalidConfig("statement_given_person must be 3x3")
        if np.any(p_sk < 0):
            raise InvalidConfig("statement_given_person entries must be >= 0")
        if np.any(np.abs(p_sk.sum(axis=0) - 1.0) > 1e-9):
            raise InvalidConfig("statement_given_person columns must sum to 1")
        if prior.shape != (3,) or np.any(prior < 0):
            raise InvalidConfig("person_prior must be a non-negative 3-vector")
        if abs(prior.sum() - 1.0) > 1e-9:
            raise InvalidConfig("person_prior must sum to 1")
        if means.ndim != 2 or means.shape[0] != 3:
            raise InvalidConfig("class_means must have one row per class")
        d = means.shape[1]
        if covs.shape != (3, d, d):
            raise InvalidConfig("class_covs must be 3 matrices matching the mean dimension")
        for k in range(3):
            if not np.allclose(covs[k], covs[k].T, atol=1e-9):
                raise InvalidConfig(f"class covariance {k} is not symmetric")
            try:
                np.linalg.cholesky(covs[k])
            except np.linalg.LinAlgError:
                raise InvalidConfig(f"class covariance {k} is not positive definite") from None
        if len(self.persons_per_type) != 3 or any(
            int(n) != n or n < 0 for n in self.persons_per_type
        ):
            raise InvalidConfig("persons_per_type must be three non-negative counts")
        if self.quotes_per_person < 0:
            raise InvalidConfig("quotes_per_person must be >= 0")


def generate_synthetic(cfg: SyntheticConfig):
    """Sample a labelled corpus and its feature vectors from ``cfg``.

    Each synthetic person of type k emits ``quotes_per_person`` statements
    whose types follow p(s|k); each statement's vector is drawn from the
    class-s Gaussian and its text from the class-s vocabulary. Fully
    deterministic for a fixed seed.

    Returns (Corpus, EmbeddingMatrix).
    """
    from .featurize import EmbeddingMatrix

    cfg.validate()
    p_sk, _, means, covs = cfg.arrays()
    rng = np.random.default_rng(cfg.seed)
    quotes = []
    vectors: dict[str, np.ndarray] = {}
    qid = 0
    for k_idx, k in enumerate(LABELS):
        col = p_sk[:, k_idx]
        for p in range(cfg.persons_per_type[k_idx]):
            author = f"{k}{p:03d}"
            for q in range(cfg.quotes_per_person):
                s_idx = int(rng.choice(3, p=col))
                s = LABELS[s_idx]
                vec = rng.multivariate_normal(means[s_idx], covs[s_idx])
                words = rng.choice(_SYNTH_VOCAB[s], size=_WORDS_PER_QUOTE)
                quote_id = f"q{qid:06d}"
                quotes.append(
                    Quote(
                        id=quote_id,
                        author=author,
                        text=" ".join(words),
                        date=cfg.start_date + timedelta(days=q * cfg.spacing_days),
                        label=s,
                        author_type=k,
                        source="synthetic",
                    )
                )
                vectors[quote_id] = vec
                qid += 1
    return Corpus(quotes), EmbeddingMatrix(vectors)


def require_labels(corpus: Corpus) -> None:
    for q in corpus:
        if q.label is None:
            raise MissingLabel(f"quote {q.id!r} has no label")
