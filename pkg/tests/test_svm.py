import numpy as np
import pytest

from oracles import svm_dual_exact, svm_dual_grid
from conftest import separable_config
from mindtrack.corpus import generate_synthetic
from mindtrack.errors import DegenerateCalibration, SingleClass
from mindtrack.svm import (
    ArrayFolds,
    GridSpec,
    SmoBinarySvc,
    SvmClassifier,
    balanced_class_weights,
    class_order,
    dual_objective,
    grid_search,
    kernel_matrix,
    kkt_gap,
    platt_calibrate,
    sigmoid_probability,
    upsample,
    upsample_indices,
)


def random_binary_problem(rng, n_max=6):
    n = int(rng.integers(2, n_max + 1))
    X = rng.normal(size=(n, 2))
    y = rng.choice([-1.0, 1.0], size=n)
    if len(np.unique(y)) < 2:
        y[0] = -y[0]
    return X, y


class TestBinarySvc:
    def test_two_point_closed_form(self):
        X = np.array([[-1.0, 0.0], [1.0, 0.0]])
        y = np.array([-1.0, 1.0])
        svc = SmoBinarySvc(C=10.0, kernel="linear").fit(X, y)
        # max-margin solution: f(x) = x1, both points exactly on the margin
        assert svc.decision_function(np.array([[0.0, 0.0]]))[0] == pytest.approx(0.0, abs=1e-6)
        assert svc.decision_function(X)[0] == pytest.approx(-1.0, abs=1e-3)
        assert svc.decision_function(X)[1] == pytest.approx(1.0, abs=1e-3)
        grid = np.array([[0.3, 0.7], [-2.0, 1.0]])
        assert np.allclose(svc.decision_function(grid), grid[:, 0], atol=1e-6)

    def test_identical_point_opposite_labels(self):
        X = np.zeros((2, 2))
        y = np.array([1.0, -1.0])
        svc = SmoBinarySvc(C=5.0, kernel="linear").fit(X, y)
        assert abs(svc.decision_function(np.zeros((1, 2)))[0]) < 1e-6

    def test_xor_rbf_separates_and_matches_grid_oracle(self):
        X = np.array([[0.0, 0.0], [1.0, 1.0], [0.0, 1.0], [1.0, 0.0]])
        y = np.array([1.0, 1.0, -1.0, -1.0])
        C = 10.0
        svc = SmoBinarySvc(C=C, kernel="rbf", gamma=1.0).fit(X, y)
        assert np.all(np.sign(svc.decision_function(X)) == y)
        K = kernel_matrix("rbf", 1.0, X, X)
        got = dual_objective(K, y, svc.alpha_)
        want, _ = svm_dual_grid(K, y, C)
        assert got == pytest.approx(want, abs=1e-3)

    def test_matches_exact_oracle_on_random_problems(self):
        rng = np.random.default_rng(42)
        for trial in range(25):
            X, y = random_binary_problem(rng)
            C = float(rng.choice([0.5, 1.0, 5.0]))
            kernel = "rbf" if trial % 2 else "linear"
            gamma = 0.7 if kernel == "rbf" else None
            svc = SmoBinarySvc(C=C, kernel=kernel, gamma=gamma).fit(X, y)
            K = kernel_matrix(kernel, gamma, X, X)
            want, _ = svm_dual_exact(K, y, C)
            assert dual_objective(K, y, svc.alpha_) == pytest.approx(want, abs=1e-3)
            assert kkt_gap(K, y, svc.alpha_, svc.box_) < 1e-3 + 1e-9

    def test_box_and_equality_constraints_hold(self):
        rng = np.random.default_rng(5)
        for _ in range(20):
            X, y = random_binary_problem(rng, n_max=12)
            weights = rng.choice([0.5, 1.0, 2.0], size=len(y))
            svc = SmoBinarySvc(C=2.0, kernel="rbf", gamma=0.5)
            svc.fit(X, y, sample_weight=weights)
            assert np.all(svc.alpha_ >= -1e-12)
            assert np.all(svc.alpha_ <= svc.box_ + 1e-12)
            assert abs(svc.alpha_ @ y) <= 1e-6

    def test_decision_invariant_under_row_permutation(self):
        # the converged dual is unique, so decisions cannot depend on row
        # order once the solver runs to a tolerance tighter than the bound
        rng = np.random.default_rng(8)
        X = rng.normal(size=(20, 3))
        y = np.where(X[:, 0] + 0.3 * rng.normal(size=20) > 0, 1.0, -1.0)
        if len(np.unique(y)) < 2:
            y[0] = -y[0]
        probe = rng.normal(size=(7, 3))
        base = SmoBinarySvc(C=3.0, kernel="rbf", gamma=0.8, tol=1e-10).fit(X, y)
        for _ in range(3):
            perm = rng.permutation(20)
            shuffled = SmoBinarySvc(C=3.0, kernel="rbf", gamma=0.8,
                                    tol=1e-10).fit(X[perm], y[perm])
            assert np.allclose(base.decision_function(probe),
                               shuffled.decision_function(probe), atol=1e-8)

    def test_rbf_ignores_constant_zero_feature(self):
        rng = np.random.default_rng(9)
        X = rng.normal(size=(10, 2))
        y = np.where(X[:, 0] > 0, 1.0, -1.0)
        if len(np.unique(y)) < 2:
            y[0] = -y[0]
        probe = rng.normal(size=(5, 2))
        plain = SmoBinarySvc(C=1.0, kernel="rbf", gamma=0.4).fit(X, y)
        padded = SmoBinarySvc(C=1.0, kernel="rbf", gamma=0.4).fit(
            np.column_stack([X, np.zeros(10)]), y)
        assert np.allclose(
            plain.decision_function(probe),
            padded.decision_function(np.column_stack([probe, np.zeros(5)])),
            atol=1e-12,
        )

    def test_single_class_rejected(self):
        with pytest.raises(SingleClass):
            SmoBinarySvc().fit(np.zeros((3, 2)), np.ones(3))


class TestPlatt:
    def test_separated_scores_are_monotone_calibrated(self):
        scores = np.array([-3.0, -2.0, -1.5, 1.2, 2.0, 3.5])
        y = np.array([-1, -1, -1, 1, 1, 1])
        a, b = platt_calibrate(scores, y)
        p = sigmoid_probability(scores, a, b)
        assert np.all(p[y > 0] > 0.5)
        assert np.all(p[y < 0] < 0.5)

    def test_constant_scores_degenerate(self):
        with pytest.raises(DegenerateCalibration):
            platt_calibrate(np.ones(6), np.array([1, 1, 1, -1, -1, -1]))

    def test_symmetric_scores_give_half_at_zero(self):
        scores = np.array([-2.0, -1.0, 1.0, 2.0])
        y = np.array([-1, -1, 1, 1])
        a, b = platt_calibrate(scores, y)
        assert sigmoid_probability(np.array([0.0]), a, b)[0] == pytest.approx(0.5, abs=1e-6)

    def test_needs_both_classes(self):
        with pytest.raises(SingleClass):
            platt_calibrate(np.array([1.0, 2.0]), np.array([1, 1]))


class TestMulticlass:
    def test_three_singleton_classes(self):
        X = np.array([[0.0, 0.0], [10.0, 0.0], [0.0, 10.0]])
        y = np.array(["c", "e", "t"], dtype=object)
        clf = SvmClassifier(C=10.0, kernel="rbf", gamma=0.5).fit(X, y)
        assert list(clf.predict(X)) == ["c", "e", "t"]

    def test_two_classes_match_binary_labels(self):
        rng = np.random.default_rng(4)
        X = np.vstack([rng.normal(size=(15, 2)), rng.normal(size=(15, 2)) + 4.0])
        y = np.array(["c"] * 15 + ["e"] * 15, dtype=object)
        clf = SvmClassifier(C=5.0, kernel="linear").fit(X, y)
        svc = SmoBinarySvc(C=5.0, kernel="linear").fit(
            X, np.where(y == "e", 1.0, -1.0))
        agree = clf.predict(X) == np.where(svc.decision_function(X) > 0, "e", "c")
        assert agree.all()

    def test_probabilities_sum_to_one(self, separable_corpus):
        _, _, X, y = separable_corpus
        clf = SvmClassifier(C=10.0, kernel="rbf", gamma=0.1, seed=0).fit(X, y)
        proba = clf.predict_proba(X[::7])
        assert np.allclose(proba.sum(axis=1), 1.0, atol=1e-9)

    def test_class_order_severity_first(self):
        assert class_order(["c", "t", "e"]) == ["t", "e", "c"]
        assert class_order(["ce", "t"]) == ["t", "ce"]
        assert class_order(["c", "e"]) == ["e", "c"]

    def test_separable_corpus_classified(self, separable_corpus):
        _, _, X, y = separable_corpus
        clf = SvmClassifier(C=10.0, kernel="rbf", gamma=0.1, seed=0).fit(X, y)
        assert (clf.predict(X) == y).mean() > 0.99

    def test_balanced_weights_formula(self):
        weights = balanced_class_weights(["c"] * 8 + ["e"] * 2)
        assert weights["c"] == pytest.approx(10 / (2 * 8))
        assert weights["e"] == pytest.approx(10 / (2 * 2))

    def test_serialization_round_trip(self, separable_corpus):
        _, _, X, y = separable_corpus
        clf = SvmClassifier(C=10.0, kernel="rbf", gamma=0.1, seed=0).fit(X, y)
        restored = SvmClassifier.from_dict(clf.to_dict())
        probe = X[::11]
        assert list(restored.predict(probe)) == list(clf.predict(probe))
        assert np.allclose(restored.predict_proba(probe),
                           clf.predict_proba(probe), atol=1e-12)


class TestUpsample:
    def test_paper_counts(self):
        y = np.array(["c"] * 681 + ["e"] * 130 + ["t"] * 28, dtype=object)
        X = np.arange(839, dtype=float)[:, None]
        Xu, yu = upsample(X, y, seed=0)
        labels, counts = np.unique(yu, return_counts=True)
        assert dict(zip(labels, counts)) == {"c": 681, "e": 681, "t": 681}

    def test_majority_retained_exactly_once(self):
        y = np.array(["c"] * 6 + ["t"] * 2, dtype=object)
        idx = upsample_indices(y, seed=3)
        majority = [i for i in idx if y[i] == "c"]
        assert sorted(majority) == list(range(6))

    def test_every_original_index_kept(self):
        rng = np.random.default_rng(0)
        for seed in range(10):
            y = rng.choice(["c", "e", "t"], size=30)
            idx = upsample_indices(y, seed=seed)
            assert set(idx.tolist()) == set(range(30))

    def test_balanced_input_unchanged_multiset(self):
        y = np.array(["c", "e", "t"] * 4, dtype=object)
        X = np.arange(12, dtype=float)[:, None]
        Xu, yu = upsample(X, y, seed=1)
        assert sorted(Xu[:, 0].tolist()) == sorted(X[:, 0].tolist())

    def test_deterministic(self):
        y = np.array(["c"] * 9 + ["t"] * 3, dtype=object)
        X = np.arange(12, dtype=float)[:, None]
        a = upsample(X, y, seed=7)
        b = upsample(X, y, seed=7)
        assert np.array_equal(a[0], b[0]) and np.array_equal(a[1], b[1])


@pytest.fixture(scope="module")
def small_data():
    corpus, emb = generate_synthetic(separable_config(persons=(8, 8, 8), quotes=3))
    X = emb.matrix([q.id for q in corpus])
    y = np.array([q.label for q in corpus], dtype=object)
    return X, y


class TestGridSearch:
    def test_single_config_returned(self, small_data):
        X, y = small_data
        spec = GridSpec(c_values=(2.0,), gamma_values=(0.5,), kernels=("rbf",),
                        pca_components=(None,), n_folds=4, seed=0)
        result = grid_search(spec, X, y)
        assert result.best["C"] == 2.0
        assert result.best["kernel"] == "rbf"
        assert len(result.table) == 1

    def test_duplicate_configs_identical_metrics(self, small_data):
        X, y = small_data
        spec = GridSpec(c_values=(2.0, 2.0), gamma_values=(0.5,), kernels=("rbf",),
                        pca_components=(None,), n_folds=4, seed=0)
        result = grid_search(spec, X, y)
        assert result.table[0]["metric"] == result.table[1]["metric"]

    def test_tie_break_prefers_smaller_c(self, small_data):
        X, y = small_data
        spec = GridSpec(c_values=(0.1, 10.0), gamma_values=(), kernels=("linear",),
                        pca_components=(None,), n_folds=4, seed=0)
        result = grid_search(spec, X, y)
        metrics = {row["C"]: row["metric"] for row in result.table}
        assert metrics[0.1] == metrics[10.0] == 1.0  # separable either way
        assert result.best["C"] == 0.1

    def test_failing_config_recorded_not_raised(self, small_data):
        X, y = small_data
        spec = GridSpec(c_values=(1.0,), gamma_values=(0.5,), kernels=("rbf",),
                        pca_components=(50, None), n_folds=4, seed=0)  # 50 > d
        result = grid_search(spec, X, y)
        failed = [row for row in result.table if row["error"]]
        assert len(failed) == 1 and failed[0]["pca"] == 50
        assert result.best["pca"] is None

    def test_spec_validation(self):
        with pytest.raises(ValueError):
            GridSpec(c_values=(-1.0,)).validate()
        with pytest.raises(ValueError):
            GridSpec(n_folds=1).validate()
