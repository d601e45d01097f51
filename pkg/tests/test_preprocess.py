import numpy as np
import pytest
import scipy.sparse as sp

from imbalanced_mltc.corpus import Document, LabelSpace, MultiLabelDataset
from imbalanced_mltc.errors import ConfigurationError, ModelIntegrityError, ParseError
from imbalanced_mltc.preprocess import (
    PipelineConfig,
    TextPipeline,
    Vocabulary,
    build_vocabulary,
    information_gain,
    information_gain_scores,
    load_lexicon,
    load_stopwords,
    normalize_tokens,
    ranked_terms,
    remove_stopwords,
    select_features,
    stem,
    tokenize,
    vectorize,
)

import oracles


def test_tokenize_strips_edge_punctuation():
    assert tokenize("Jalan RUSAK, parah!!  (sekali)") == ["jalan", "rusak", "parah", "sekali"]
    assert tokenize("... -- !!") == []
    assert tokenize("Tidak", lowercase=False) == ["Tidak"]


def test_tokenize_keeps_inner_punctuation():
    assert tokenize("e-ktp rusak.") == ["e-ktp", "rusak"]


def test_normalization_is_single_pass():
    lexicon = {"gk": "tidak", "tidak": "nggak"}
    assert normalize_tokens(["gk", "ok"], lexicon) == ["tidak", "ok"]


def test_stopwords_and_stemming(tmp_path):
    path = tmp_path / "stop.txt"
    path.write_text("# list\nyang\n\ndan  # conj\n")
    stops = load_stopwords(path)
    assert stops == {"yang", "dan"}
    assert remove_stopwords(["jalan", "yang", "rusak"], stops) == ["jalan", "rusak"]
    assert stem(["perbaikan"], "lexicon", {"perbaikan": "baik"}) == ["baik"]
    assert stem(["perbaikan"], "identity") == ["perbaikan"]


def test_lexicon_stemmer_needs_a_lexicon():
    with pytest.raises(ConfigurationError):
        stem(["x"], "lexicon")
    with pytest.raises(ConfigurationError):
        PipelineConfig(stemmer="porter")


def test_lexicon_parse_error(tmp_path):
    path = tmp_path / "lex.tsv"
    path.write_text("gk\ttidak\nbroken line\n")
    with pytest.raises(ParseError, match="line 2"):
        load_lexicon(path)


def test_vocabulary_is_lexicographic():
    vocab = build_vocabulary([["rusak", "jalan"], ["air"]])
    assert vocab.terms == ["air", "jalan", "rusak"]
    assert vectorize(["rusak", "zzz", "air", "air"], vocab).indices == (0, 2)


def _dataset(rows, labelsets, d, q):
    X = sp.lil_matrix((len(rows), d))
    for i, row in enumerate(rows):
        for j in row:
            X[i, j] = 1
    return MultiLabelDataset(LabelSpace.anonymous(q), X.tocsr(), tuple(frozenset(s) for s in labelsets))


def test_information_gain_matches_oracle_on_random_data():
    rng = np.random.default_rng(0)
    for _ in range(30):
        n, d, q = int(rng.integers(1, 20)), int(rng.integers(1, 6)), int(rng.integers(1, 4))
        rows = [set(np.flatnonzero(rng.random(d) < 0.4).tolist()) for _ in range(n)]
        sets = [set(np.flatnonzero(rng.random(q) < 0.5).tolist()) for _ in range(n)]
        ds = _dataset(rows, sets, d, q)
        scores = information_gain_scores(ds)
        for f in range(d):
            assert abs(scores[f] - oracles.information_gain(rows, sets, f, q)) <= 1e-12


def test_information_gain_edge_cases():
    ds = _dataset([{0, 1}, {0}, {0, 1}, {0}], [{0}, set(), {0}, set()], 3, 1)
    assert information_gain(ds, 0) == 0.0          # always present
    assert information_gain(ds, 2) == 0.0          # never present
    assert information_gain(ds, 1) == 1.0          # aligned with a balanced label


def test_information_gain_rejects_bad_feature():
    ds = _dataset([{0}], [{0}], 1, 1)
    with pytest.raises(ValueError):
        information_gain(ds, 1)


def test_select_features_breaks_ties_by_index():
    ds = _dataset([{0, 1, 2}, {3}], [{0}, set()], 4, 1)
    # features 0..2 are tied and perfectly aligned, feature 3 is too (inverted)
    sel = select_features(ds, 2)
    assert sel.features.tolist() == [0, 1]
    assert sel.dataset.dimension == 2
    assert sel.reindex == {0: 0, 1: 1}


@pytest.mark.parametrize("k", [0, 5])
def test_select_features_validates_k(k):
    ds = _dataset([{0}], [{0}], 4, 1)
    with pytest.raises(ValueError):
        select_features(ds, k)


def test_ranked_terms_order():
    ds = _dataset([{0, 2}, {1}, {0}, {1, 2}], [{0}, set(), {0}, set()], 3, 1)
    vocab = Vocabulary.from_terms(["a", "b", "c"])
    sel = select_features(ds, 3, vocab)
    ranked = ranked_terms(sel, vocab)
    assert [t.term for t in ranked] == ["a", "b", "c"]
    assert ranked[-1].ig == 0.0


DOCS = [
    Document("1", "jalan rusak parah", frozenset({0})),
    Document("2", "jalan berlubang", frozenset({0})),
    Document("3", "air mati lagi", frozenset({1})),
    Document("4", "air keruh", frozenset({1})),
]


def test_pipeline_fits_on_training_documents_only():
    space = LabelSpace(("jalan", "air"))
    pipe = TextPipeline.from_config(PipelineConfig(feature_count=2))
    train = pipe.fit(DOCS, space)
    assert train.dimension == 2
    assert pipe.selected_terms == ["air", "jalan"]
    X = pipe.transform_texts(["Air!", "kata baru"])
    assert X.toarray().tolist() == [[1.0, 0.0], [0.0, 0.0]]


def test_pipeline_clips_feature_count_to_vocabulary():
    pipe = TextPipeline.from_config(PipelineConfig(feature_count=1000))
    train = pipe.fit(DOCS, LabelSpace(("a", "b")))
    assert train.dimension == 8


def test_pipeline_round_trip_and_tamper_check(tmp_path):
    stops = tmp_path / "stop.txt"
    stops.write_text("lagi\n")
    pipe = TextPipeline.from_config(PipelineConfig(stopword_path=str(stops), feature_count=3))
    pipe.fit(DOCS, LabelSpace(("a", "b")))
    state = pipe.to_dict()
    again = TextPipeline.from_dict(state)
    texts = ["air mati lagi", "jalan rusak"]
    assert (again.transform_texts(texts) != pipe.transform_texts(texts)).nnz == 0
    state["stopwords"] = ["lagi", "air"]
    with pytest.raises(ModelIntegrityError):
        TextPipeline.from_dict(state)
