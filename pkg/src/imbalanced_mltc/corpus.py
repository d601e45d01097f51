"""Multi-label data model, corpus I/O, splitting and synthetic corpora.

Documents carry raw text and a label set; a :class:`MultiLabelDataset`
holds the vectorized form as a binary CSR matrix plus one ``frozenset`` of
label ids per row.  Label ids are always assigned lexicographically by
label name so that the same corpus produces the same ids regardless of the
order rows appear in.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np
import scipy.sparse as sp

from .errors import GenerationError, ParseError, ValidationError

LabelSet = frozenset  # frozenset[int]; members are label ids of a LabelSpace

CSV_HEADER = ("id", "text", "labels")
LABEL_SEPARATOR = "|"


@dataclass(frozen=True)
class LabelSpace:
    """Ordered label names; the position of a name is its label id."""

    names: tuple[str, ...]

    def __post_init__(self):
        names = tuple(self.names)
        object.__setattr__(self, "names", names)
        if not names:
            raise ValidationError("label space must contain at least one label")
        if any(not isinstance(n, str) or not n for n in names):
            raise ValidationError("label names must be non-empty strings")
        if len(set(names)) != len(names):
            raise ValidationError("label names must be unique")

    @classmethod
    def from_names(cls, names: Iterable[str]) -> "LabelSpace":
        """Build a space from arbitrary names, sorted lexicographically."""
        return cls(tuple(sorted(set(names))))

    @classmethod
    def anonymous(cls, q: int) -> "LabelSpace":
        return cls(tuple(str(i) for i in range(q)))

    @property
    def Q(self) -> int:
        return len(self.names)

    @cached_property
    def _index(self) -> dict[str, int]:
        return {name: i for i, name in enumerate(self.names)}

    def id_of(self, name: str) -> int:
        return self._index[name]

    def name_of(self, label_id: int) -> str:
        return self.names[label_id]

    def format(self, labels: Iterable[int]) -> str:
        """Render a label set as ``|``-separated names in id order."""
        return LABEL_SEPARATOR.join(self.names[i] for i in sorted(labels))


@dataclass(frozen=True)
class Document:
    id: str
    text: str
    labels: frozenset


@dataclass(frozen=True)
class SparseBinaryVector:
    """Binary feature vector stored as its strictly ascending support."""

    indices: tuple[int, ...]
    dimension: int

    def __post_init__(self):
        idx = tuple(int(i) for i in self.indices)
        object.__setattr__(self, "indices", idx)
        if self.dimension < 0:
            raise ValidationError("dimension must be non-negative")
        for a, b in zip(idx, idx[1:]):
            if b <= a:
                raise ValidationError("indices not ascending")
        if idx and (idx[0] < 0 or idx[-1] >= self.dimension):
            raise ValidationError("index out of range for dimension")

    @classmethod
    def from_features(cls, features: Iterable[int], dimension: int) -> "SparseBinaryVector":
        return cls(tuple(sorted(set(features))), dimension)

    def to_csr(self) -> sp.csr_matrix:
        data = np.ones(len(self.indices), dtype=np.float64)
        return sp.csr_matrix(
            (data, np.asarray(self.indices, dtype=np.int64), np.array([0, len(self.indices)])),
            shape=(1, self.dimension),
        )


def vectors_to_csr(vectors: Sequence[SparseBinaryVector], dimension: int) -> sp.csr_matrix:
    indptr = np.zeros(len(vectors) + 1, dtype=np.int64)
    for i, v in enumerate(vectors):
        if v.dimension != dimension:
            raise ValidationError(
                f"vector {i} has dimension {v.dimension}, expected {dimension}"
            )
        indptr[i + 1] = indptr[i] + len(v.indices)
    indices = np.fromiter(
        (j for v in vectors for j in v.indices), dtype=np.int64, count=int(indptr[-1])
    )
    data = np.ones(len(indices), dtype=np.float64)
    return sp.csr_matrix((data, indices, indptr), shape=(len(vectors), dimension))


def as_csr(X, dimension: int | None = None) -> sp.csr_matrix:
    """Coerce a vector, list of vectors, dataset or matrix into a binary CSR matrix."""
    if isinstance(X, MultiLabelDataset):
        M = X.X
    elif isinstance(X, SparseBinaryVector):
        M = X.to_csr()
    elif sp.issparse(X):
        M = sp.csr_matrix(X, dtype=np.float64)
    elif isinstance(X, np.ndarray):
        M = sp.csr_matrix(np.atleast_2d(X).astype(np.float64))
    else:
        vectors = list(X)
        dim = dimension if dimension is not None else (vectors[0].dimension if vectors else 0)
        M = vectors_to_csr(vectors, dim)
    if dimension is not None and M.shape[1] != dimension:
        raise ValueError(
            f"dimension mismatch: input has {M.shape[1]} features, model expects {dimension}"
        )
    return M


@dataclass(frozen=True, eq=False)
class MultiLabelDataset:
    """N binary feature rows, each paired with a label set over ``space``."""

    space: LabelSpace
    X: sp.csr_matrix
    labelsets: tuple[frozenset, ...]

    def __post_init__(self):
        X = sp.csr_matrix(self.X, dtype=np.float64)
        X.sort_indices()
        object.__setattr__(self, "X", X)
        labelsets = tuple(frozenset(int(l) for l in s) for s in self.labelsets)
        object.__setattr__(self, "labelsets", labelsets)
        if X.shape[0] != len(labelsets):
            raise ValidationError("feature rows and label sets differ in length")
        q = self.space.Q
        for s in labelsets:
            if any(l < 0 or l >= q for l in s):
                raise ValidationError(f"label id outside 0..{q - 1}")

    @classmethod
    def from_vectors(
        cls,
        space: LabelSpace,
        vectors: Sequence[SparseBinaryVector],
        labelsets: Sequence[Iterable[int]],
        dimension: int,
    ) -> "MultiLabelDataset":
        return cls(space, vectors_to_csr(vectors, dimension), tuple(frozenset(s) for s in labelsets))

    @property
    def N(self) -> int:
        return self.X.shape[0]

    @property
    def Q(self) -> int:
        return self.space.Q

    @property
    def dimension(self) -> int:
        return self.X.shape[1]

    @cached_property
    def Y(self) -> np.ndarray:
        """Dense ``N x Q`` boolean label-membership matrix."""
        Y = np.zeros((self.N, self.Q), dtype=bool)
        for i, s in enumerate(self.labelsets):
            Y[i, list(s)] = True
        return Y

    def vector(self, i: int) -> SparseBinaryVector:
        row = self.X.indices[self.X.indptr[i] : self.X.indptr[i + 1]]
        return SparseBinaryVector(tuple(int(j) for j in row), self.dimension)

    @property
    def instances(self) -> list[tuple[SparseBinaryVector, frozenset]]:
        return [(self.vector(i), self.labelsets[i]) for i in range(self.N)]

    def subset(self, rows: Sequence[int]) -> "MultiLabelDataset":
        rows = np.asarray(rows, dtype=np.int64)
        return MultiLabelDataset(self.space, self.X[rows], tuple(self.labelsets[i] for i in rows))

    def with_features(self, X: sp.csr_matrix) -> "MultiLabelDataset":
        return MultiLabelDataset(self.space, X, self.labelsets)

    def __eq__(self, other):
        if not isinstance(other, MultiLabelDataset):
            return NotImplemented
        return (
            self.space == other.space
            and self.X.shape == other.X.shape
            and self.labelsets == other.labelsets
            and np.array_equal(self.X.indptr, other.X.indptr)
            and np.array_equal(self.X.indices, other.X.indices)
        )

    __hash__ = None


# ---------------------------------------------------------------------------
# Corpus CSV


def read_documents(stream: io.TextIOBase, source=None) -> tuple[list[Document], LabelSpace]:
    reader = csv.reader(stream)
    try:
        header = next(reader)
    except StopIteration:
        raise ValidationError("empty corpus") from None
    if tuple(h.strip() for h in header) != CSV_HEADER:
        raise ParseError(f"expected header {','.join(CSV_HEADER)!r}", line=1, path=source)

    rows: list[tuple[str, str, list[str]]] = []
    seen: set[str] = set()
    for row in reader:
        line = reader.line_num
        if len(row) != 3:
            raise ParseError(f"expected 3 columns, found {len(row)}", line=line, path=source)
        doc_id, text, label_field = row
        names = [n.strip() for n in label_field.split(LABEL_SEPARATOR)]
        if not label_field.strip() or any(not n for n in names):
            raise ParseError("empty label field", line=line, path=source)
        if doc_id in seen:
            raise ValidationError(f"duplicate document id {doc_id!r} (line {line})")
        seen.add(doc_id)
        rows.append((doc_id, text, names))

    if not rows:
        raise ValidationError("empty corpus")
    space = LabelSpace.from_names(n for _, _, names in rows for n in names)
    docs = [
        Document(doc_id, text, frozenset(space.id_of(n) for n in names))
        for doc_id, text, names in rows
    ]
    return docs, space


def load_documents(path) -> tuple[list[Document], LabelSpace]:
    """Read a corpus CSV with header ``id,text,labels``.

    Labels are ``|``-separated names.  The label space is the sorted union
    of every name in the file.
    """
    with open(path, newline="", encoding="utf-8") as fh:
        return read_documents(fh, source=path)


def format_documents(documents: Sequence[Document], space: LabelSpace) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for doc in documents:
        writer.writerow([doc.id, doc.text, space.format(doc.labels)])
    return buf.getvalue()


def save_documents(documents: Sequence[Document], space: LabelSpace, path) -> None:
    Path(path).write_text(format_documents(documents, space), encoding="utf-8")


# ---------------------------------------------------------------------------
# Splitting and statistics


def split_indices(n: int, train_count: int, seed: int) -> tuple[np.ndarray, np.ndarray]:
    if not 0 < train_count < n:
        raise ValueError(f"train_count must lie strictly between 0 and {n}, got {train_count}")
    order = np.random.default_rng(seed).permutation(n)
    return order[:train_count], order[train_count:]


def split(dataset: MultiLabelDataset, train_count: int, seed: int):
    """Shuffle under ``seed`` and cut after ``train_count`` rows (no stratification)."""
    train_rows, test_rows = split_indices(dataset.N, train_count, seed)
    return dataset.subset(train_rows), dataset.subset(test_rows)


@dataclass(frozen=True)
class DistributionStats:
    per_label_count: tuple[int, ...]
    mean: float
    labels_above_mean: int
    max_count: int
    min_count: int

    def summary(self) -> str:
        return (
            f"labels={len(self.per_label_count)} mean={self.mean:.1f} "
            f"above_mean={self.labels_above_mean} max={self.max_count} min={self.min_count}"
        )


def count_labels(labelsets: Iterable[frozenset], q: int) -> np.ndarray:
    counts = np.zeros(q, dtype=np.int64)
    for s in labelsets:
        for l in s:
            counts[l] += 1
    return counts


def label_distribution(dataset) -> DistributionStats:
    """Per-label instance counts and the imbalance summary around their mean.

    Accepts a :class:`MultiLabelDataset` or a ``(documents, space)`` pair.
    """
    if isinstance(dataset, MultiLabelDataset):
        counts = count_labels(dataset.labelsets, dataset.Q)
    else:
        documents, space = dataset
        counts = count_labels((d.labels for d in documents), space.Q)
    mean = float(counts.sum()) / len(counts)
    return DistributionStats(
        per_label_count=tuple(int(c) for c in counts),
        mean=mean,
        labels_above_mean=int((counts > mean).sum()),
        max_count=int(counts.max()),
        min_count=int(counts.min()),
    )


# ---------------------------------------------------------------------------
# Synthetic corpora


@dataclass(frozen=True)
class ImbalanceProfile:
    """Target label frequencies and text model for :func:`generate_synthetic`.

    ``cardinality_distribution[k]`` is the probability of a document
    carrying ``k + 1`` labels.
    """

    per_label_count: tuple[int, ...]
    cardinality_distribution: tuple[float, ...]
    tokens_per_label: int = 12
    noise_token_rate: float = 0.3
    label_names: tuple[str, ...] | None = None

    def __post_init__(self):
        counts = tuple(int(c) for c in self.per_label_count)
        object.__setattr__(self, "per_label_count", counts)
        if isinstance(self.cardinality_distribution, Mapping):
            dist = self.cardinality_distribution
            kmax = max(dist)
            probs = tuple(float(dist.get(k, 0.0)) for k in range(1, kmax + 1))
        else:
            probs = tuple(float(p) for p in self.cardinality_distribution)
        object.__setattr__(self, "cardinality_distribution", probs)
        if not counts:
            raise GenerationError("profile needs at least one label")
        if min(counts) < 1:
            raise GenerationError("per-label counts must be >= 1")
        if not probs or min(probs) < 0 or abs(sum(probs) - 1.0) > 1e-9:
            raise GenerationError("cardinality probabilities must be non-negative and sum to 1")
        if self.tokens_per_label < 1:
            raise GenerationError("tokens_per_label must be >= 1")
        if not 0.0 <= self.noise_token_rate < 1.0:
            raise GenerationError("noise_token_rate must lie in [0, 1)")
        if self.label_names is not None:
            names = tuple(self.label_names)
            object.__setattr__(self, "label_names", names)
            if len(names) != len(counts):
                raise GenerationError("label_names and per_label_count differ in length")

    @property
    def Q(self) -> int:
        return len(self.per_label_count)

    @property
    def max_cardinality(self) -> int:
        return len(self.cardinality_distribution)

    def names(self) -> tuple[str, ...]:
        if self.label_names is not None:
            return self.label_names
        width = len(str(self.Q - 1))
        return tuple(f"label{i:0{width}d}" for i in range(self.Q))


# Label frequencies shaped after the complaint corpus: 70 labels, 7231 label
# assignments over 5151 documents, largest label 1304, smallest 1, mean
# 103.3 with 15 labels above it.
LAPOR_COUNTS = (
    1304, 980, 770, 573, 450, 365, 300, 250, 210, 178, 155, 140, 125, 114, 104,
    100, 92, 84, 77, 71, 65, 60, 55, 51, 46, 43, 39, 36, 33, 30,
    28, 26, 23, 22, 20, 18, 17, 15, 14, 13, 12, 11, 10, 9, 8,
    8, 7, 7, 6, 6, 5, 5, 4, 4, 4, 3, 3, 3, 3, 2,
    2, 2, 2, 2, 2, 1, 1, 1, 1, 1,
)
LAPOR_TOTAL_INSTANCES = 5151


def lapor_profile(**overrides) -> ImbalanceProfile:
    params = dict(
        per_label_count=LAPOR_COUNTS,
        cardinality_distribution=(0.65, 0.30, 0.05),
        tokens_per_label=12,
        noise_token_rate=0.3,
    )
    params.update(overrides)
    return ImbalanceProfile(**params)


# Twelve labels, 100:1 between the largest and smallest.
DESK_COUNTS = (600, 400, 280, 200, 150, 110, 80, 55, 35, 20, 12, 6)
DESK_TOTAL_INSTANCES = 1500


def desk_profile(**overrides) -> ImbalanceProfile:
    params = dict(
        per_label_count=DESK_COUNTS,
        cardinality_distribution=(0.72, 0.26, 0.02),
        tokens_per_label=10,
        noise_token_rate=0.3,
    )
    params.update(overrides)
    return ImbalanceProfile(**params)


PROFILES = {"lapor": (lapor_profile, LAPOR_TOTAL_INSTANCES), "desk": (desk_profile, DESK_TOTAL_INSTANCES)}

_ONSETS = ("b", "d", "g", "k", "l", "m", "n", "p", "r", "s", "t", "j")
_VOWELS = ("a", "i", "u", "e", "o")
_SYLLABLES = tuple(c + v for c in _ONSETS for v in _VOWELS)
# Frequent function words mixed into the noise vocabulary.
_FILLER = ("di", "ada", "yang", "dan", "ke", "dari", "tidak", "sudah", "untuk", "ini")


def _pseudo_word(k: int, syllables: int = 3) -> str:
    parts = []
    for _ in range(syllables):
        k, r = divmod(k, len(_SYLLABLES))
        parts.append(_SYLLABLES[r])
    return "".join(parts)


def _feasible(rows: np.ndarray, cols: np.ndarray) -> bool:
    """Gale-Ryser test: does a 0/1 matrix with these row and column sums exist?"""
    if rows.sum() != cols.sum():
        return False
    if rows.size == 0:
        return True
    r = np.sort(rows)[::-1]
    if r[0] > np.count_nonzero(cols):
        return False
    limit = min(r.size, int(cols.max()) if cols.size else 0)
    if limit == 0:
        return r.sum() == 0
    c = np.sort(cols)
    prefix = np.concatenate([[0], np.cumsum(c)])
    k = np.arange(1, limit + 1)
    below = np.searchsorted(c, k, side="left")
    capacity = prefix[below] + k * (c.size - below)
    return bool(np.all(np.cumsum(r[:limit]) <= capacity))


def _draw_cardinalities(profile: ImbalanceProfile, n: int, rng: np.random.Generator) -> np.ndarray:
    q = profile.Q
    kmax = min(profile.max_cardinality, q)
    total = sum(profile.per_label_count)
    if total < n:
        raise GenerationError(
            f"label urn holds {total} tokens, fewer than the {n} documents that need one"
        )
    if total > n * kmax:
        raise GenerationError(
            f"{total} label tokens cannot fit into {n} documents of at most {kmax} labels"
        )
    sizes = np.arange(1, profile.max_cardinality + 1)
    ks = np.minimum(rng.choice(sizes, size=n, p=profile.cardinality_distribution), kmax)
    diff = total - int(ks.sum())
    while diff != 0:
        eligible = np.flatnonzero(ks < kmax) if diff > 0 else np.flatnonzero(ks > 1)
        step = min(abs(diff), eligible.size)
        chosen = rng.choice(eligible, size=step, replace=False)
        ks[chosen] += 1 if diff > 0 else -1
        diff -= step if diff > 0 else -step
    return ks


def generate_labelsets(profile: ImbalanceProfile, n: int, rng: np.random.Generator) -> list[frozenset]:
    """Label sets whose per-label frequencies equal ``profile.per_label_count`` exactly."""
    ks = _draw_cardinalities(profile, n, rng)
    remaining = np.asarray(profile.per_label_count, dtype=np.int64).copy()
    # Flattening the cardinalities (same total) only loosens the Gale-Ryser
    # bound, so if even the flattest vector fails, nothing can succeed.
    while not _feasible(ks, remaining):
        hi, lo = int(np.argmax(ks)), int(np.argmin(ks))
        if ks[hi] - ks[lo] <= 1:
            raise GenerationError("label counts and cardinalities admit no valid assignment")
        ks[hi] -= 1
        ks[lo] += 1

    # Larger sets first; ties in random order.
    order = np.lexsort((rng.permutation(n), -ks))
    labelsets: list[frozenset] = [frozenset()] * n
    for pos, doc in enumerate(order):
        k = int(ks[doc])
        later = ks[order[pos + 1 :]]
        chosen = None
        if np.count_nonzero(remaining) >= k:
            p = remaining / remaining.sum()
            chosen = rng.choice(profile.Q, size=k, replace=False, p=p)
            trial = remaining.copy()
            trial[chosen] -= 1
            if k > 1 or (later.size and later[0] > 1):
                if not _feasible(later, trial):
                    chosen = None
        if chosen is None:
            # Largest remaining counts first always preserves feasibility.
            chosen = np.lexsort((np.arange(profile.Q), -remaining))[:k]
        remaining[chosen] -= 1
        labelsets[doc] = frozenset(int(l) for l in chosen)
    if remaining.any():
        raise GenerationError("label urn not exhausted")
    return labelsets


def generate_synthetic(
    profile: ImbalanceProfile, total_instances: int, seed: int
) -> tuple[list[Document], LabelSpace]:
    """Generate a corpus whose label frequencies match ``profile`` exactly.

    Every label owns ``tokens_per_label`` signature words; a document's text
    is 3-8 signature words per member label plus filler words at roughly
    ``noise_token_rate`` of all tokens.
    """
    q = profile.Q
    if total_instances < q:
        raise GenerationError(f"need at least {q} documents to realize {q} labels")
    rng = np.random.default_rng(seed)
    labelsets = generate_labelsets(profile, total_instances, rng)

    names = profile.names()
    space = LabelSpace.from_names(names)
    # Profile position -> lexicographic id.
    remap = [space.id_of(n) for n in names]

    tpl = profile.tokens_per_label
    signatures = [
        [_pseudo_word(l * tpl + j) for j in range(tpl)] for l in range(q)
    ]
    noise_vocab = list(_FILLER) + [_pseudo_word(q * tpl + j) for j in range(300)]
    rate = profile.noise_token_rate

    width = len(str(total_instances - 1))
    documents = []
    for i, members in enumerate(labelsets):
        words: list[str] = []
        for l in sorted(members):
            count = int(rng.integers(3, 9))
            words.extend(signatures[l][j] for j in rng.integers(0, tpl, size=count))
        n_noise = int(round(len(words) * rate / (1.0 - rate)))
        words.extend(noise_vocab[j] for j in rng.integers(0, len(noise_vocab), size=n_noise))
        words = [words[j] for j in rng.permutation(len(words))]
        text = " ".join(words).capitalize() + "."
        documents.append(
            Document(f"d{i:0{width}d}", text, frozenset(remap[l] for l in members))
        )
    return documents, space


def signature_words(profile: ImbalanceProfile) -> dict[str, list[str]]:
    """Signature vocabulary per label name, as used by :func:`generate_synthetic`."""
    tpl = profile.tokens_per_label
    return {
        name: [_pseudo_word(l * tpl + j) for j in range(tpl)]
        for l, name in enumerate(profile.names())
    }


# ---------------------------------------------------------------------------
# Sparse dataset file


def format_sparse(dataset: MultiLabelDataset) -> str:
    lines = [f"{dataset.dimension} {dataset.Q}"]
    X = dataset.X
    for i, labels in enumerate(dataset.labelsets):
        row = X.indices[X.indptr[i] : X.indptr[i + 1]]
        lines.append(
            ",".join(str(l) for l in sorted(labels)) + "\t" + " ".join(str(int(j)) for j in row)
        )
    return "\n".join(lines) + "\n"


def save_sparse(dataset: MultiLabelDataset, path) -> None:
    Path(path).write_text(format_sparse(dataset), encoding="utf-8")


def parse_sparse(text: str, space: LabelSpace | None = None, source=None) -> MultiLabelDataset:
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if not lines:
        raise ParseError("missing header", line=1, path=source)
    header = lines[0].split()
    try:
        dimension, q = (int(v) for v in header)
    except ValueError:
        raise ParseError("header must be '<dimension> <Q>'", line=1, path=source) from None
    if dimension < 0 or q < 1:
        raise ParseError("header values out of range", line=1, path=source)
    if space is None:
        space = LabelSpace.anonymous(q)
    elif space.Q != q:
        raise ParseError(f"header declares Q={q}, label space has {space.Q}", line=1, path=source)

    indptr = [0]
    indices: list[int] = []
    labelsets = []
    for lineno, line in enumerate(lines[1:], start=2):
        parts = line.split("\t")
        if len(parts) != 2:
            raise ParseError("expected '<labels>\\t<indices>'", line=lineno, path=source)
        label_field, index_field = parts
        try:
            labels = [int(v) for v in label_field.split(",")] if label_field else []
            row = [int(v) for v in index_field.split()]
        except ValueError:
            raise ParseError("non-integer token", line=lineno, path=source) from None
        if any(l < 0 or l >= q for l in labels):
            raise ParseError(f"label id outside 0..{q - 1}", line=lineno, path=source)
        for a, b in zip(row, row[1:]):
            if b <= a:
                raise ParseError("indices not ascending", line=lineno, path=source)
        if row and (row[0] < 0 or row[-1] >= dimension):
            raise ParseError(f"index outside 0..{dimension - 1}", line=lineno, path=source)
        indices.extend(row)
        indptr.append(len(indices))
        labelsets.append(frozenset(labels))

    X = sp.csr_matrix(
        (np.ones(len(indices)), np.asarray(indices, dtype=np.int64), np.asarray(indptr)),
        shape=(len(labelsets), dimension),
    )
    return MultiLabelDataset(space, X, tuple(labelsets))


def load_sparse(path, space: LabelSpace | None = None) -> MultiLabelDataset:
    """Read a sparse dataset file; label names come from ``space`` when given."""
    return parse_sparse(Path(path).read_text(encoding="utf-8"), space=space, source=path)
