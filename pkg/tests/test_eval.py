import numpy as np
import pytest

from miselect import (
    ConfigError,
    CvConfig,
    DataError,
    bayes_error,
    cross_validate,
    fixtures,
    p_search,
    similarity_ratio,
    training_error,
    window_mean,
)
from miselect.dataset import from_arrays
from miselect.eval import (
    _fold_assignment,
    knn_predict,
    naive_bayes_predict,
    naive_bayes_train,
)


# ---------------------------------------------------------------- CvConfig

def test_cv_config_defaults_and_alias():
    cfg = CvConfig()
    assert cfg.folds == 5 and cfg.classifier == "naive-bayes"
    assert CvConfig(classifier="nb").classifier == "naive-bayes"


def test_cv_config_validation():
    with pytest.raises(ConfigError, match="unknown classifier 'svm'"):
        CvConfig(classifier="svm")
    with pytest.raises(ConfigError, match="folds must be >= 2"):
        CvConfig(folds=1)
    CvConfig(folds=1, loo=True)  # LOO ignores the fold count
    with pytest.raises(ConfigError, match="odd"):
        CvConfig(knn_k=4)
    with pytest.raises(ConfigError, match="odd"):
        CvConfig(knn_k=0)


# ---------------------------------------------------------------- fold maps

def test_stratified_folds_balance_classes():
    labels = np.array([0, 1] * 15)
    assign = _fold_assignment(labels, 2, CvConfig(folds=5, seed=3))
    for f in range(5):
        fold_labels = labels[assign == f]
        assert fold_labels.size == 6
        assert np.count_nonzero(fold_labels == 0) == 3


def test_unstratified_folds_cover_all_rows():
    labels = np.array([0] * 9 + [1] * 4)
    assign = _fold_assignment(labels, 2, CvConfig(folds=4, stratified=False))
    sizes = [int((assign == f).sum()) for f in range(4)]
    assert sum(sizes) == 13
    assert max(sizes) - min(sizes) <= 1


def test_loo_assignment():
    labels = np.array([0, 1, 0, 1])
    assign = _fold_assignment(labels, 2, CvConfig(loo=True))
    assert assign.tolist() == [0, 1, 2, 3]


def test_fold_errors():
    labels = np.array([0, 1, 0, 1])
    with pytest.raises(DataError, match=r"folds exceed rows \(9 > 4\)"):
        _fold_assignment(labels, 2, CvConfig(folds=9))
    skew = np.array([0] * 10 + [1] * 2)
    with pytest.raises(DataError, match="unstratifiable: class 1 has 2 rows < 4"):
        _fold_assignment(skew, 2, CvConfig(folds=4))


# -------------------------------------------------------------- classifiers

def test_naive_bayes_recovers_clean_structure():
    values = np.array([[0], [0], [0], [1], [1], [1]])
    labels = np.array([0, 0, 0, 1, 1, 1])
    model = naive_bayes_train(values, labels, [2], 2)
    preds = naive_bayes_predict(model, np.array([[0], [1]]))
    assert preds.tolist() == [0, 1]


def test_naive_bayes_training_errors_are_exact():
    """Two frozen single-feature resubstitution errors on the first
    walkthrough dataset; the higher-MI feature misclassifies more."""
    data = fixtures.example1_dataset()
    assert training_error(data, (0,)) == pytest.approx(0.25)
    assert training_error(data, (1,)) == pytest.approx(0.20)


def test_classifier_guards():
    with pytest.raises(DataError, match="empty training set"):
        naive_bayes_train(np.empty((0, 1), int), np.empty(0, int), [2], 2)
    with pytest.raises(DataError, match="empty training set"):
        knn_predict(np.empty((0, 1), int), np.empty(0, int),
                    np.array([[0]]), 1, 2)


def test_knn_hamming_and_tie_breaks():
    train_x = np.array([[0, 0], [0, 1], [1, 1]])
    train_y = np.array([0, 1, 1])
    assert knn_predict(train_x, train_y, np.array([[0, 0]]), 1, 2).tolist() == [0]
    assert knn_predict(train_x, train_y, np.array([[0, 0]]), 3, 2).tolist() == [1]
    # three equidistant rows, one vote each: the smaller class index wins
    even = np.zeros((3, 1), dtype=int)
    votes = np.array([2, 1, 0])
    assert knn_predict(even, votes, np.array([[0]]), 3, 3).tolist() == [0]


def test_knn_cross_validation_runs():
    data = fixtures.separable_dataset()
    rep = cross_validate(data, (0, 1), CvConfig(classifier="knn", knn_k=3))
    assert rep.mean_accuracy == pytest.approx(1.0)


# ------------------------------------------------------------ cross_validate

def test_cross_validate_feature_guards():
    data = fixtures.example1_dataset()
    with pytest.raises(ConfigError, match="empty feature set"):
        cross_validate(data, (), CvConfig())
    with pytest.raises(ConfigError, match="duplicate feature indices"):
        cross_validate(data, (0, 0), CvConfig())
    with pytest.raises(ConfigError, match="out of range"):
        cross_validate(data, (5,), CvConfig())


def test_cross_validate_report_shape_and_determinism():
    data = fixtures.separable_dataset()
    cfg = CvConfig(folds=4, seed=9)
    rep = cross_validate(data, (0, 1), cfg)
    assert len(rep.fold_accuracies) == 4
    assert rep.classifier_runs == 4
    assert rep.selected_p == 2
    assert rep.mean_accuracy == pytest.approx(np.mean(rep.fold_accuracies))
    again = cross_validate(data, (0, 1), cfg)
    assert again == rep


def test_chance_level_on_random_labels():
    """Uninformative features must land near coin-flip accuracy."""
    means = []
    for seed in range(10):
        rng = np.random.default_rng(seed)
        values = rng.integers(0, 2, size=(60, 3))
        labels = rng.integers(0, 2, size=60)
        if len(np.unique(labels)) < 2 or any(
                len(np.unique(values[:, j])) < 2 for j in range(3)):
            continue
        data = from_arrays(values, labels)
        rep = cross_validate(data, (0, 1, 2), CvConfig(folds=5, seed=seed))
        means.append(rep.mean_accuracy)
    assert 0.4 <= float(np.mean(means)) <= 0.6


def test_loo_cross_validation():
    data = fixtures.example1_dataset()
    rep = cross_validate(data, (0, 1), CvConfig(loo=True))
    assert rep.classifier_runs == data.m
    assert set(rep.fold_accuracies) <= {0.0, 1.0}


# ---------------------------------------------------------------- p_search

def test_p_search_curve_and_tie_break():
    data = fixtures.separable_dataset()
    cfg = CvConfig(folds=4, seed=0)
    rep = p_search(data, lambda p: tuple(range(p)), [1, 2, 3, 4], cfg)
    assert rep.selected_p == 2  # 3 and 4 tie at perfect accuracy; smaller P wins
    assert rep.classifier_runs == 4 * 4
    accs = [row["mean_accuracy"] for row in rep.curve]
    assert accs[0] < 1.0
    assert accs[1] == accs[2] == accs[3] == pytest.approx(1.0)
    assert [row["p"] for row in rep.curve] == [1, 2, 3, 4]
    blob = rep.to_json()
    assert blob["selected_p"] == 2 and len(blob["curve"]) == 4


def test_p_search_accepts_selection_results():
    from miselect import SelectionResult
    data = fixtures.separable_dataset()

    def selector(p):
        return SelectionResult(tuple(range(p)), 0.0, (), "fs")

    rep = p_search(data, selector, [2], CvConfig(folds=4))
    assert rep.selected_p == 2


def test_p_search_guards():
    data = fixtures.separable_dataset()
    cfg = CvConfig(folds=4)
    with pytest.raises(ConfigError, match="empty P grid"):
        p_search(data, lambda p: (0,), [], cfg)
    with pytest.raises(ConfigError, match="P grid outside"):
        p_search(data, lambda p: (0,), [0, 2], cfg)
    with pytest.raises(DataError, match="selector returned 1 features for P=2"):
        p_search(data, lambda p: (0,), [2], cfg)


# ------------------------------------------------------- stability / bounds

def test_similarity_ratio():
    ratios = similarity_ratio([(0, 1), (1, 2), (2, 3, 4)])
    assert ratios == [pytest.approx(0.5), pytest.approx(0.5)]
    assert similarity_ratio([(0, 1), (0, 1)]) == [1.0]
    with pytest.raises(ConfigError, match="at least 2 feature sets"):
        similarity_ratio([(0,)])
    with pytest.raises(ConfigError, match="empty feature set at position 1"):
        similarity_ratio([(0,), ()])


def test_window_mean():
    assert window_mean([1.0, 0.5, 0.0], 0, 2) == pytest.approx(0.75)
    assert window_mean([1.0, 0.5, 0.0], 1, 2) == pytest.approx(0.25)
    with pytest.raises(ConfigError, match="length must be >= 1"):
        window_mean([1.0], 0, 0)
    with pytest.raises(ConfigError, match="outside"):
        window_mean([1.0, 0.5], 1, 2)


def test_bayes_error_values():
    p = fixtures.xor_pmf()
    assert bayes_error(p) == pytest.approx(0.5)        # priors only
    assert bayes_error(p, (0,)) == pytest.approx(0.5)  # single xor arm is useless
    assert bayes_error(p, (0, 1)) == pytest.approx(0.0)
    p2 = fixtures.example2_pmf()
    assert bayes_error(p2, (0,)) == pytest.approx(0.05)
    assert bayes_error(p2, (1,)) == pytest.approx(0.10)


def test_bayes_error_guards():
    from miselect.infotheory import JointPmf
    no_class = JointPmf(("a", "b"), (2, 2), np.full((2, 2), 0.25))
    with pytest.raises(ConfigError, match="no class variable"):
        bayes_error(no_class)
    p = fixtures.xor_pmf()
    with pytest.raises(ConfigError, match="duplicate features"):
        bayes_error(p, (0, 0))
    with pytest.raises(ConfigError, match="out of range"):
        bayes_error(p, (4,))
