"""Text to binary feature vectors, with information-gain feature selection.

The pipeline runs tokenization, lexicon normalization, stopword removal
and stemming, builds a vocabulary on the training documents, encodes term
presence (not counts), and keeps the ``K`` terms with the highest
information gain.  A feature's gain is the maximum of its per-label binary
gains, which keeps terms that matter for a single rare label.
"""

from __future__ import annotations

import hashlib
import unicodedata
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np
import scipy.sparse as sp

from .corpus import Document, LabelSpace, MultiLabelDataset, SparseBinaryVector
from .errors import ConfigurationError, ModelIntegrityError, ParseError

STEMMERS = ("identity", "lexicon")


@dataclass(frozen=True)
class PipelineConfig:
    stopword_path: str | None = None
    normalization_lexicon_path: str | None = None
    stemmer: str = "identity"
    stem_lexicon_path: str | None = None
    feature_count: int = 753
    lowercase: bool = True

    def __post_init__(self):
        if self.stemmer not in STEMMERS:
            raise ConfigurationError(f"stemmer must be one of {STEMMERS}, got {self.stemmer!r}")
        if int(self.feature_count) < 1:
            raise ConfigurationError("feature_count must be >= 1")


@dataclass(frozen=True)
class Vocabulary:
    term_to_index: Mapping[str, int]

    @property
    def dimension(self) -> int:
        return len(self.term_to_index)

    @property
    def terms(self) -> list[str]:
        terms = [""] * self.dimension
        for t, i in self.term_to_index.items():
            terms[i] = t
        return terms

    @classmethod
    def from_terms(cls, terms: Sequence[str]) -> "Vocabulary":
        return cls({t: i for i, t in enumerate(terms)})


@dataclass(frozen=True)
class TermScore:
    term: str
    ig: float


# ---------------------------------------------------------------------------
# Token-level steps


def _is_punct(ch: str) -> bool:
    return unicodedata.category(ch).startswith("P")


def _strip_punct(token: str) -> str:
    start, end = 0, len(token)
    while start < end and _is_punct(token[start]):
        start += 1
    while end > start and _is_punct(token[end - 1]):
        end -= 1
    return token[start:end]


def tokenize(text: str, lowercase: bool = True) -> list[str]:
    """Whitespace split, strip edge punctuation, drop empties.

    >>> tokenize("Jalan rusak, parah!")
    ['jalan', 'rusak', 'parah']
    """
    tokens = []
    for raw in text.split():
        tok = _strip_punct(raw)
        if tok:
            tokens.append(tok.lower() if lowercase else tok)
    return tokens


def normalize_tokens(tokens: Iterable[str], lexicon: Mapping[str, str]) -> list[str]:
    # Single pass: replacements are never looked up again.
    return [lexicon.get(t, t) for t in tokens]


def remove_stopwords(tokens: Iterable[str], stopwords) -> list[str]:
    return [t for t in tokens if t not in stopwords]


def stem(tokens: Iterable[str], config, lexicon: Mapping[str, str] | None = None) -> list[str]:
    """Apply the configured stemmer.

    ``config`` is a :class:`PipelineConfig` or a stemmer mode name.  In
    lexicon mode the stem table is ``lexicon`` if given, otherwise it is
    read from ``config.stem_lexicon_path``.
    """
    mode = config if isinstance(config, str) else config.stemmer
    if mode == "identity":
        return list(tokens)
    if mode != "lexicon":
        raise ConfigurationError(f"unknown stemmer {mode!r}")
    if lexicon is None:
        path = None if isinstance(config, str) else config.stem_lexicon_path
        if path is None:
            raise ConfigurationError("lexicon stemmer requires a stem lexicon file")
        lexicon = load_lexicon(path)
    return [lexicon.get(t, t) for t in tokens]


def load_stopwords(path, lowercase: bool = False) -> frozenset[str]:
    """One token per line; blank lines and ``#`` comments ignored."""
    words = set()
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        line = line.split("#", 1)[0].strip()
        if line:
            words.add(line.lower() if lowercase else line)
    return frozenset(words)


def load_lexicon(path, lowercase: bool = False) -> dict[str, str]:
    """``informal<TAB>formal`` pairs, one per line."""
    lexicon = {}
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), start=1):
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        parts = line.split("\t")
        if len(parts) != 2 or not parts[0].strip() or not parts[1].strip():
            raise ParseError("expected 'informal<TAB>formal'", line=lineno, path=path)
        src, dst = parts[0].strip(), parts[1].strip()
        if lowercase:
            src, dst = src.lower(), dst.lower()
        lexicon[src] = dst
    return lexicon


# ---------------------------------------------------------------------------
# Vocabulary and vectors


def build_vocabulary(token_lists: Iterable[Iterable[str]]) -> Vocabulary:
    terms = sorted({t for tokens in token_lists for t in tokens})
    return Vocabulary.from_terms(terms)


def vectorize(tokens: Iterable[str], vocab: Vocabulary) -> SparseBinaryVector:
    index = vocab.term_to_index
    present = {index[t] for t in tokens if t in index}
    return SparseBinaryVector(tuple(sorted(present)), vocab.dimension)


def vectorize_many(token_lists: Sequence[Sequence[str]], vocab: Vocabulary) -> sp.csr_matrix:
    index = vocab.term_to_index
    indptr = [0]
    indices: list[int] = []
    for tokens in token_lists:
        present = sorted({index[t] for t in tokens if t in index})
        indices.extend(present)
        indptr.append(len(indices))
    return sp.csr_matrix(
        (np.ones(len(indices)), np.asarray(indices, dtype=np.int64), np.asarray(indptr)),
        shape=(len(token_lists), vocab.dimension),
    )


# ---------------------------------------------------------------------------
# Information gain


def _entropy(pos, total):
    """Binary entropy in bits of ``pos`` successes out of ``total``; 0 when total is 0."""
    pos = np.asarray(pos, dtype=np.float64)
    total = np.asarray(total, dtype=np.float64)
    with np.errstate(divide="ignore", invalid="ignore"):
        p = np.where(total > 0, pos / np.where(total > 0, total, 1.0), 0.0)
        q = 1.0 - p
        h = -(np.where(p > 0, p * np.log2(np.where(p > 0, p, 1.0)), 0.0)
              + np.where(q > 0, q * np.log2(np.where(q > 0, q, 1.0)), 0.0))
    return h


def information_gain_matrix(dataset: MultiLabelDataset) -> np.ndarray:
    """Per-(feature, label) gains, shape ``dimension x Q``, in bits."""
    n = dataset.N
    Y = dataset.Y.astype(np.float64)
    X = dataset.X
    both = np.asarray((X.T @ Y))                         # f=1 and l in y
    present = np.asarray(X.sum(axis=0)).ravel()[:, None]  # f=1
    label_pos = Y.sum(axis=0)[None, :]                    # l in y
    absent = n - present
    h_label = _entropy(label_pos, n)
    h_present = _entropy(both, present)
    h_absent = _entropy(label_pos - both, absent)
    gain = h_label - (present / n) * h_present - (absent / n) * h_absent
    return np.maximum(gain, 0.0)


def information_gain_scores(dataset: MultiLabelDataset) -> np.ndarray:
    """Gain of every feature: the maximum of its per-label gains."""
    if dataset.N == 0:
        raise ValueError("information gain needs at least one instance")
    if dataset.dimension == 0:
        return np.zeros(0)
    return information_gain_matrix(dataset).max(axis=1)


def information_gain(dataset: MultiLabelDataset, feature: int) -> float:
    if not 0 <= feature < dataset.dimension:
        raise ValueError(f"feature {feature} outside 0..{dataset.dimension - 1}")
    if dataset.N == 0:
        raise ValueError("information gain needs at least one instance")
    column = dataset.with_features(dataset.X[:, [feature]])
    return float(information_gain_matrix(column).max())


@dataclass(frozen=True)
class FeatureSelection:
    features: np.ndarray          # kept original indices, ascending
    reindex: dict[int, int]       # original index -> reduced index
    dataset: MultiLabelDataset    # reduced to len(features) columns
    scores: np.ndarray            # gain of every original feature
    terms: list[str] | None = None


def select_features(
    dataset: MultiLabelDataset, K: int, vocabulary: Vocabulary | None = None
) -> FeatureSelection:
    """Keep the ``K`` highest-gain features; ties go to the lower index.

    The reduced dataset keeps the original relative order of columns.
    """
    d = dataset.dimension
    if not 1 <= K <= d:
        raise ValueError(f"K must lie in 1..{d}, got {K}")
    scores = information_gain_scores(dataset)
    ranked = np.lexsort((np.arange(d), -scores))
    kept = np.sort(ranked[:K])
    reindex = {int(old): new for new, old in enumerate(kept)}
    reduced = dataset.with_features(dataset.X[:, kept])
    terms = None
    if vocabulary is not None:
        all_terms = vocabulary.terms
        terms = [all_terms[i] for i in kept]
    return FeatureSelection(kept, reindex, reduced, scores, terms)


def ranked_terms(selection: FeatureSelection, vocabulary: Vocabulary) -> list[TermScore]:
    all_terms = vocabulary.terms
    order = sorted(selection.features, key=lambda i: (-selection.scores[i], i))
    return [TermScore(all_terms[i], float(selection.scores[i])) for i in order]


# ---------------------------------------------------------------------------
# Fitted pipeline


def _content_hash(obj) -> str:
    if isinstance(obj, Mapping):
        lines = [f"{k}\t{obj[k]}" for k in sorted(obj)]
    else:
        lines = sorted(obj)
    return hashlib.sha256("\n".join(lines).encode("utf-8")).hexdigest()


@dataclass
class TextPipeline:
    """Preprocessing state fit on training documents.

    Construct with :meth:`from_config`, then :meth:`fit` on the training
    split; :meth:`transform` maps any texts onto the selected features.
    """

    config: PipelineConfig = field(default_factory=PipelineConfig)
    stopwords: frozenset = frozenset()
    normalization: dict = field(default_factory=dict)
    stem_lexicon: dict | None = None
    vocabulary: Vocabulary | None = None
    selected: np.ndarray | None = None
    _reduced_index: dict | None = field(default=None, repr=False)

    @classmethod
    def from_config(cls, config: PipelineConfig) -> "TextPipeline":
        lower = config.lowercase
        stopwords = load_stopwords(config.stopword_path, lower) if config.stopword_path else frozenset()
        normalization = (
            load_lexicon(config.normalization_lexicon_path, lower)
            if config.normalization_lexicon_path
            else {}
        )
        stem_lexicon = None
        if config.stemmer == "lexicon":
            if not config.stem_lexicon_path:
                raise ConfigurationError("lexicon stemmer requires a stem lexicon file")
            stem_lexicon = load_lexicon(config.stem_lexicon_path, lower)
        return cls(config, stopwords, normalization, stem_lexicon)

    def tokens(self, text: str) -> list[str]:
        toks = tokenize(text, self.config.lowercase)
        toks = normalize_tokens(toks, self.normalization)
        toks = remove_stopwords(toks, self.stopwords)
        return stem(toks, self.config.stemmer, self.stem_lexicon)

    def fit(self, documents: Sequence[Document], space: LabelSpace) -> MultiLabelDataset:
        """Build the vocabulary, select features and return the reduced training set."""
        token_lists = [self.tokens(d.text) for d in documents]
        self.vocabulary = build_vocabulary(token_lists)
        full = MultiLabelDataset(
            space, vectorize_many(token_lists, self.vocabulary), tuple(d.labels for d in documents)
        )
        k = min(self.config.feature_count, full.dimension)
        if k < 1:
            raise ConfigurationError("training documents produced an empty vocabulary")
        selection = select_features(full, k)
        self.selected = selection.features
        self._reduced_index = None
        return selection.dataset

    @property
    def dimension(self) -> int:
        return len(self.selected)

    @property
    def selected_terms(self) -> list[str]:
        terms = self.vocabulary.terms
        return [terms[i] for i in self.selected]

    @property
    def reduced_vocabulary(self) -> Vocabulary:
        if self._reduced_index is None:
            self._reduced_index = Vocabulary.from_terms(self.selected_terms)
        return self._reduced_index

    def transform_texts(self, texts: Iterable[str]) -> sp.csr_matrix:
        if self.selected is None:
            raise RuntimeError("pipeline is not fitted")
        return vectorize_many([self.tokens(t) for t in texts], self.reduced_vocabulary)

    def transform(self, documents: Sequence[Document], space: LabelSpace) -> MultiLabelDataset:
        X = self.transform_texts(d.text for d in documents)
        return MultiLabelDataset(space, X, tuple(d.labels for d in documents))

    # persistence ----------------------------------------------------------

    def to_dict(self) -> dict:
        c = self.config
        return {
            "config": {
                "stemmer": c.stemmer,
                "feature_count": c.feature_count,
                "lowercase": c.lowercase,
            },
            "stopwords": sorted(self.stopwords),
            "stopwords_sha256": _content_hash(self.stopwords),
            "normalization": dict(sorted(self.normalization.items())),
            "normalization_sha256": _content_hash(self.normalization),
            "stem_lexicon": None if self.stem_lexicon is None else dict(sorted(self.stem_lexicon.items())),
            "stem_lexicon_sha256": None if self.stem_lexicon is None else _content_hash(self.stem_lexicon),
            "vocabulary": self.vocabulary.terms,
            "selected": [int(i) for i in self.selected],
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> "TextPipeline":
        checks = [("stopwords", d["stopwords"]), ("normalization", d["normalization"])]
        if d.get("stem_lexicon") is not None:
            checks.append(("stem_lexicon", d["stem_lexicon"]))
        for key, content in checks:
            if _content_hash(content) != d[f"{key}_sha256"]:
                raise ModelIntegrityError(f"{key} content does not match its recorded hash")
        cfg = d["config"]
        config = PipelineConfig(
            stemmer=cfg["stemmer"],
            stem_lexicon_path="<embedded>" if cfg["stemmer"] == "lexicon" else None,
            feature_count=cfg["feature_count"],
            lowercase=cfg["lowercase"],
        )
        return cls(
            config=config,
            stopwords=frozenset(d["stopwords"]),
            normalization=dict(d["normalization"]),
            stem_lexicon=None if d.get("stem_lexicon") is None else dict(d["stem_lexicon"]),
            vocabulary=Vocabulary.from_terms(d["vocabulary"]),
            selected=np.asarray(d["selected"], dtype=np.int64),
        )
