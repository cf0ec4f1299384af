import json

import numpy as np
import pytest

from mindtrack.errors import DimensionMismatch, RankDeficientWarning, SingleClass
from mindtrack.reduce import LDA, PCA, projection_from_dict


def random_labelled(seed, n=10, d=6, classes=3):
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(n, d))
    y = rng.integers(0, classes, size=n)
    while len(np.unique(y)) < 2:
        y = rng.integers(0, classes, size=n)
    return X, y


class TestPCA:
    def test_points_on_a_line(self):
        t = np.array([-2.0, -1.0, 0.5, 1.5, 3.0])
        X = np.column_stack([t, 2 * t])  # y = 2x
        with pytest.warns(RankDeficientWarning):
            pca = PCA(n_components=2).fit(X)
        expected = np.array([1.0, 2.0]) / np.sqrt(5.0)
        assert np.allclose(pca.components_[0], expected, atol=1e-12)
        assert pca.eigenvalues_[1] == pytest.approx(0.0, abs=1e-12)

    def test_identical_points_rank_deficient(self):
        X = np.ones((4, 3))
        with pytest.warns(RankDeficientWarning):
            pca = PCA(n_components=2).fit(X)
        assert np.allclose(pca.eigenvalues_, 0.0)

    def test_projecting_the_mean_gives_zero(self):
        rng = np.random.default_rng(1)
        X = rng.normal(size=(12, 5))
        pca = PCA(n_components=3).fit(X)
        assert np.allclose(pca.project(X.mean(axis=0)), 0.0, atol=1e-12)

    def test_matches_dense_eigensolver_oracle(self):
        for seed in range(5):
            rng = np.random.default_rng(seed)
            X = rng.normal(size=(10, 6))
            k = 4
            pca = PCA(n_components=k).fit(X)
            cov = np.cov(X.T, ddof=1)
            w, v = np.linalg.eigh(cov)
            w = w[::-1][:k]
            v = v[:, ::-1][:, :k]
            assert np.allclose(pca.eigenvalues_, w, atol=1e-8)
            for i in range(k):
                dot = abs(pca.components_[i] @ v[:, i])
                assert dot == pytest.approx(1.0, abs=1e-8)

    def test_eigenvalue_sum_bounded_by_total_variance(self):
        rng = np.random.default_rng(7)
        X = rng.normal(size=(9, 4))
        total = np.trace(np.cov(X.T, ddof=1))
        partial = PCA(n_components=2).fit(X)
        assert partial.eigenvalues_.sum() <= total + 1e-8
        full = PCA(n_components=4).fit(X)
        assert full.eigenvalues_.sum() == pytest.approx(total, abs=1e-8)

    def test_projection_is_affine(self):
        rng = np.random.default_rng(2)
        X = rng.normal(size=(15, 6))
        pca = PCA(n_components=3).fit(X)
        x, y = rng.normal(size=6), rng.normal(size=6)
        for a in (0.0, 0.25, 0.8, 1.0):
            left = pca.project(a * x + (1 - a) * y)
            right = a * pca.project(x) + (1 - a) * pca.project(y)
            assert np.allclose(left, right, atol=1e-10)

    def test_reconstruct_then_project_idempotent(self):
        rng = np.random.default_rng(3)
        X = rng.normal(size=(8, 4))
        pca = PCA(n_components=4).fit(X)  # full rank
        x = rng.normal(size=4)
        z = pca.project(x)
        recon = pca.mean_ + pca.components_.T @ z
        assert np.allclose(pca.project(recon), z, atol=1e-8)

    def test_dimension_checks(self):
        pca = PCA(n_components=2).fit(np.random.default_rng(0).normal(size=(5, 3)))
        with pytest.raises(DimensionMismatch):
            pca.transform(np.zeros((2, 4)))
        with pytest.raises(ValueError):
            PCA(n_components=9).fit(np.zeros((4, 3)))


class TestLDA:
    def test_two_spherical_classes_fisher_direction(self):
        rng = np.random.default_rng(0)
        a = rng.normal(size=(200, 4))
        b = rng.normal(size=(200, 4))
        b[:, 0] += 6.0  # offset along e1
        X = np.vstack([a, b])
        y = np.array([0] * 200 + [1] * 200)
        lda = LDA(n_components=1).fit(X, y)
        direction = lda.components_[0]
        assert abs(direction[0]) == pytest.approx(1.0, abs=0.05)

    def test_single_class_rejected(self):
        with pytest.raises(SingleClass):
            LDA().fit(np.zeros((4, 2)), ["c", "c", "c", "c"])

    def test_at_most_classes_minus_one_components(self):
        X, y = random_labelled(4, n=30, d=6, classes=3)
        lda = LDA(n_components=5).fit(X, y)
        assert lda.components_.shape[0] <= 2

    def test_matches_generalized_eigensolver_oracle(self):
        for seed in range(5):
            X, y = random_labelled(seed, n=10, d=6, classes=3)
            lda = LDA(n_components=2).fit(X, y)
            k = lda.components_.shape[0]
            # independent route: standard eigenproblem of inv(Sw+ridge) Sb
            classes = np.unique(y)
            mean = X.mean(axis=0)
            sw = np.zeros((6, 6))
            sb = np.zeros((6, 6))
            for c in classes:
                Xc = X[y == c]
                mu = Xc.mean(axis=0)
                sw += (Xc - mu).T @ (Xc - mu)
                sb += len(Xc) * np.outer(mu - mean, mu - mean)
            lam = 1e-6 * np.trace(sw) / 6
            w, v = np.linalg.eig(np.linalg.inv(sw + lam * np.eye(6)) @ sb)
            order = np.argsort(w.real)[::-1][:k]
            assert np.allclose(lda.eigenvalues_, w.real[order], atol=1e-8)
            for i, col in enumerate(order):
                vec = v[:, col].real
                vec /= np.linalg.norm(vec)
                assert abs(vec @ lda.components_[i]) == pytest.approx(1.0, abs=1e-8)

    def test_beats_random_projection_on_separated_classes(self):
        wins = 0
        for seed in range(20):
            rng = np.random.default_rng(seed)
            means = np.array([[0, 0, 0, 0, 0, 0], [7, 0, 0, 0, 0, 0],
                              [0, 7, 0, 0, 0, 0]], dtype=float)
            X = np.vstack([rng.normal(size=(40, 6)) + m for m in means])
            y = np.repeat([0, 1, 2], 40)
            lda = LDA(n_components=2).fit(X, y)

            def ratio(Z):
                mean = Z.mean(axis=0)
                within = sum(((Z[y == c] - Z[y == c].mean(axis=0)) ** 2).sum()
                             for c in (0, 1, 2))
                between = sum(len(Z[y == c])
                              * ((Z[y == c].mean(axis=0) - mean) ** 2).sum()
                              for c in (0, 1, 2))
                return between / within

            basis = np.linalg.qr(rng.normal(size=(6, 2)))[0]
            assert ratio(lda.transform(X)) > ratio((X - X.mean(axis=0)) @ basis)
            wins += 1
        assert wins == 20

    def test_serialization_round_trip(self):
        X, y = random_labelled(9, n=20, d=5)
        lda = LDA(n_components=2).fit(X, y)
        restored = projection_from_dict(json.loads(json.dumps(lda.to_dict())))
        assert np.allclose(restored.transform(X), lda.transform(X), atol=1e-12)
        pca = PCA(n_components=3).fit(X)
        restored = projection_from_dict(pca.to_dict())
        assert np.allclose(restored.transform(X), pca.transform(X), atol=1e-12)
