import math

import numpy as np
import pytest
import scipy.sparse as sp

from imbalanced_mltc.corpus import LabelSpace, MultiLabelDataset, SparseBinaryVector
from imbalanced_mltc.metrics import hamming_loss, subset_accuracy
from imbalanced_mltc.multilabel import (
    AdaBoostMHModel,
    BoostRound,
    LPModel,
    augment,
    boost_alpha,
    boost_normalizer,
    bootstrap_rows,
    lp_codebook,
    model_from_dict,
    train_adaboost_mh,
    train_bagging,
    train_br,
    train_lp,
)
from imbalanced_mltc.weak_learners import ConstantModel, StumpModel, WeakSpec

from conftest import random_dataset

AB = LabelSpace(("A", "B"))


def toy():
    """Label A iff feature 0, label B iff feature 1."""
    X = sp.csr_matrix(np.array([[1, 0, 1], [0, 1, 0], [1, 1, 0], [0, 0, 1], [1, 0, 0], [0, 1, 1]], dtype=float))
    sets = ({0}, {1}, {0, 1}, set(), {0}, {1})
    return MultiLabelDataset(AB, X, sets)


@pytest.mark.parametrize("kind", ["stump", "tree"])
def test_br_reproduces_separable_labels(kind):
    ds = toy()
    pred = train_br(ds, WeakSpec(kind)).predict(ds.X)
    assert list(pred) == list(ds.labelsets)


def test_br_label_without_positives_is_never_predicted():
    ds = MultiLabelDataset(AB, np.eye(3), ({0}, {0}, set()))
    model = train_br(ds, WeakSpec("tree"))
    assert isinstance(model.per_label_models[1], ConstantModel)
    assert all(1 not in s for s in model.predict(sp.csr_matrix(np.ones((4, 3)))))


def test_lp_codebook_counts():
    codebook, priors, classes = lp_codebook((frozenset({0}), frozenset({0, 1}), frozenset({0})))
    assert codebook == (frozenset({0}), frozenset({0, 1}))
    assert priors.tolist() == [2 / 3, 1 / 3]
    assert classes.tolist() == [0, 1, 0]


def test_lp_single_class():
    ds = MultiLabelDataset(AB, np.eye(3), ({0, 1},) * 3)
    model = train_lp(ds, WeakSpec("stump"))
    assert set(model.predict(sp.csr_matrix(np.zeros((2, 3))))) == {frozenset({0, 1})}


def test_lp_tie_goes_to_higher_prior():
    model = LPModel(AB, (frozenset({0}), frozenset({1})), np.array([0.6, 0.4]), None, 1)

    class Flat:
        def class_scores(self, X):
            return np.zeros((X.shape[0], 2))

    tied = LPModel(AB, model.codebook, model.class_priors, Flat(), 1)
    assert tied.predict_classes(sp.csr_matrix((1, 1))).tolist() == [0]
    flipped = LPModel(AB, model.codebook, np.array([0.4, 0.6]), Flat(), 1)
    assert flipped.predict_classes(sp.csr_matrix((1, 1))).tolist() == [1]


@pytest.mark.parametrize("kind", ["stump", "tree", "forest", "naive_bayes", "smo"])
def test_lp_predicts_only_training_sets(kind, small_data):
    _, train, test = small_data
    model = train_lp(train, WeakSpec(kind, seed=2))
    seen = set(train.labelsets)
    assert set(model.predict(test.X)) <= seen


def test_lp_tree_fits_separable_toy():
    ds = toy()
    pred = train_lp(ds, WeakSpec("tree", {"pruning_cf": None})).predict(ds.X)
    assert list(pred) == list(ds.labelsets)


def test_augment_layout():
    X = sp.csr_matrix(np.array([[1, 0], [0, 1]], dtype=float))
    A = augment(X, 3).toarray()
    assert A.shape == (6, 5)
    assert A[4].tolist() == [0, 1, 0, 1, 0]   # instance 1, label 1


def test_boost_arithmetic():
    assert boost_alpha(0.25) == pytest.approx(0.5 * math.log(3))
    assert abs(boost_alpha(0.25) - 0.5493) <= 1e-4
    assert abs(boost_normalizer(0.25) - 0.8660) <= 1e-4
    assert math.isfinite(boost_alpha(0.0))


def test_adaboost_distribution_and_bound(small_data):
    _, train, _ = small_data
    model = train_adaboost_mh(train, WeakSpec("stump"), 8, record_distributions=True)
    for D in model.distributions:
        assert abs(D.sum() - 1.0) <= 1e-9
    pred = model.predict(train.X)
    assert hamming_loss(list(pred), list(train.labelsets), train.Q) <= model.training_bound()


def test_adaboost_perfect_round_stops():
    ds = MultiLabelDataset(LabelSpace(("A",)), np.array([[1.0], [0.0]]), ({0}, set()))
    model = train_adaboost_mh(ds, WeakSpec("stump"), 5)
    assert model.T == 1 and model.stopped_early
    assert model.rounds[0].epsilon == 1e-10
    assert list(model.predict(ds.X)) == list(ds.labelsets)


def test_adaboost_balanced_constant_falls_back():
    ds = MultiLabelDataset(LabelSpace(("A",)), np.zeros((2, 1)), ({0}, set()))
    model = train_adaboost_mh(ds, WeakSpec("stump"), 5)
    assert model.T == 1 and model.stopped_early
    assert isinstance(model.rounds[0].weak, ConstantModel)


def test_adaboost_score_arithmetic():
    plus = ConstantModel(1, 2)
    minus = ConstantModel(-1, 2)
    model = AdaBoostMHModel(
        LabelSpace(("A",)),
        (BoostRound(0, plus, 0.25, 0.5493, 0.866), BoostRound(1, minus, 0.4, 0.2, 0.98)),
        1,
    )
    F = model.scores(sp.csr_matrix((1, 1)))
    assert F[0, 0] == pytest.approx(0.3493)
    assert list(model.predict(sp.csr_matrix((1, 1)))) == [frozenset({0})]
    even = AdaBoostMHModel(model.space, (BoostRound(0, plus, 0.25, 0.5, 0.8), BoostRound(1, minus, 0.25, 0.5, 0.8)), 1)
    assert list(even.predict(sp.csr_matrix((1, 1)))) == [frozenset()]


def test_adaboost_staged_scores_match_truncation(small_data):
    _, train, test = small_data
    model = train_adaboost_mh(train, WeakSpec("tree"), 4)
    staged = model.staged_scores(test.X)
    for t, F in enumerate(staged, start=1):
        assert np.array_equal(F, model.truncated(t).scores(test.X))


def test_adaboost_rejects_zero_rounds(small_data):
    with pytest.raises(ValueError):
        train_adaboost_mh(small_data[1], WeakSpec("stump"), 0)


def test_bootstrap_rows_are_seeded():
    assert np.array_equal(bootstrap_rows(50, 3, 1), bootstrap_rows(50, 3, 1))
    assert not np.array_equal(bootstrap_rows(50, 3, 1), bootstrap_rows(50, 3, 2))


@pytest.mark.parametrize("base", ["br", "lp"])
def test_bagging_without_bootstrap_equals_base(base, small_data):
    _, train, test = small_data
    weak = WeakSpec("tree", seed=5)
    bag = train_bagging(train, base, weak, 3, seed=1, disable_bootstrap=True)
    single = (train_br if base == "br" else train_lp)(train, weak)
    assert list(bag.predict(test.X)) == list(single.predict(test.X))


def test_bagging_single_member_equals_member(small_data):
    _, train, test = small_data
    bag = train_bagging(train, "br", WeakSpec("stump"), 1, seed=4)
    assert list(bag.predict(test.X)) == list(bag.members[0].predict(test.X))


def test_bagging_vote_threshold_is_inclusive(small_data):
    _, train, test = small_data
    bag = train_bagging(train, "br", WeakSpec("stump"), 2, seed=9)
    votes = bag.staged_votes(test.X)[-1]
    pred = bag.predict(test.X)
    for row, s in enumerate(pred):
        assert s == frozenset(int(l) for l in np.flatnonzero(votes[row] >= 0.5))


def test_bagging_is_deterministic(small_data):
    _, train, test = small_data
    a = train_bagging(train, "lp", WeakSpec("forest", seed=1), 3, seed=2)
    b = train_bagging(train, "lp", WeakSpec("forest", seed=1), 3, seed=2)
    assert a.to_dict() == b.to_dict()


def test_bagging_argument_errors(small_data):
    train = small_data[1]
    with pytest.raises(ValueError):
        train_bagging(train, "br", WeakSpec("stump"), 0, seed=0)
    with pytest.raises(ValueError):
        train_bagging(train, "cc", WeakSpec("stump"), 2, seed=0)


def test_models_round_trip_through_dicts(small_data):
    _, train, test = small_data
    weak = WeakSpec("tree", seed=1)
    for model in (
        train_br(train, weak),
        train_lp(train, weak),
        train_adaboost_mh(train, weak, 3),
        train_bagging(train, "lp", weak, 2, seed=3),
    ):
        again = model_from_dict(model.to_dict(), train.space)
        assert list(again.predict(test.X)) == list(model.predict(test.X))


def test_predict_accepts_a_single_vector(small_data):
    _, train, test = small_data
    model = train_br(train, WeakSpec("stump"))
    v = test.vector(0)
    assert isinstance(v, SparseBinaryVector)
    assert model.predict(v)[0] == model.predict(test.X)[0]


def test_q1_br_equals_bare_stump():
    rng = np.random.default_rng(0)
    ds = random_dataset(rng, 20, 5, 1)
    model = train_br(ds, WeakSpec("stump"))
    assert isinstance(model.per_label_models[0], (StumpModel, ConstantModel))
    assert subset_accuracy(list(model.predict(ds.X)), list(ds.labelsets)) >= 0.5
