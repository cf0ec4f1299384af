"""Per-author state-of-mind tracking.

Each author's latent state is a 4-vector [x1, x1', x2, x2'] (position and
velocity on the two projected axes) evolving under a nearly-constant-
velocity model. Every projected quote vector is a noisy position
measurement whose covariance comes from moment-matching a per-class
Gaussian mixture: statements typical of a class with a tight quote
distribution (terrorist) are strong evidence, so the filter trusts them
more.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from datetime import date

import numpy as np

from .corpus import LABELS, Corpus
from .errors import (
    GroupTooSmall,
    MissingAuthorType,
    MissingLabel,
    NegativeTimeStep,
    SingularInnovation,
)

DAYS_PER_YEAR = 365.25

# measurement matrix: picks the two positions out of the state
H = np.array([[1.0, 0.0, 0.0, 0.0],
              [0.0, 0.0, 1.0, 0.0]])


@dataclass(frozen=True)
class TrackState:
    x: np.ndarray          # state mean, shape (4,)
    P: np.ndarray          # state covariance, shape (4, 4)
    time: date

    def position(self) -> np.ndarray:
        return self.x[[0, 2]]


@dataclass(frozen=True)
class MotionModel:
    """Nearly-constant-velocity dynamics with time step in years."""

    process_var: float = 0.1

    def transition(self, dt: float) -> np.ndarray:
        F = np.eye(4)
        F[0, 1] = dt
        F[2, 3] = dt
        return F

    def noise(self, dt: float) -> np.ndarray:
        block = self.process_var * np.array(
            [[dt ** 3 / 3.0, dt ** 2 / 2.0],
             [dt ** 2 / 2.0, dt]]
        )
        Q = np.zeros((4, 4))
        Q[:2, :2] = block
        Q[2:, 2:] = block
        return Q


@dataclass(frozen=True)
class TrackerConfig:
    process_var: float = 0.1
    position_var: float = 16.0   # prior N(0, 4^2) per axis
    velocity_var: float = 0.09   # prior N(0, 0.3^2) per axis
    alert_threshold: float = 0.5

    def validate(self) -> None:
        if min(self.process_var, self.position_var, self.velocity_var) <= 0:
            raise ValueError("all tracker variances must be positive")
        if not 0.0 < self.alert_threshold < 1.0 and self.alert_threshold not in (0.0, 1.0):
            raise ValueError("alert threshold must lie in [0, 1]")

    def initial_state(self, when: date) -> TrackState:
        P0 = np.diag([self.position_var, self.velocity_var,
                      self.position_var, self.velocity_var])
        return TrackState(x=np.zeros(4), P=P0, time=when)


@dataclass(frozen=True)
class ClassStats:
    """Per-class Gaussians of projected quote vectors.

    ``mu_x``/``sigma_x`` group quotes by statement label, ``mu_z``/
    ``sigma_z`` by the person type of the quote's author; ``prior`` is the
    proportion of authors per type. Classes with zero prior carry
    placeholder moments and never enter the mixture.
    """

    mu_x: np.ndarray      # (3, 2)
    sigma_x: np.ndarray   # (3, 2, 2)
    mu_z: np.ndarray      # (3, 2)
    sigma_z: np.ndarray   # (3, 2, 2)
    prior: np.ndarray     # (3,)
    statement_given_person: np.ndarray | None = None

    def to_dict(self) -> dict:
        return {
            "labels": list(LABELS),
            "mu_x": self.mu_x.tolist(),
            "sigma_x": self.sigma_x.tolist(),
            "mu_z": self.mu_z.tolist(),
            "sigma_z": self.sigma_z.tolist(),
            "prior": self.prior.tolist(),
            "statement_given_person": (
                self.statement_given_person.tolist()
                if self.statement_given_person is not None else None
            ),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ClassStats":
        p_sk = data.get("statement_given_person")
        return cls(
            mu_x=np.asarray(data["mu_x"], dtype=float),
            sigma_x=np.asarray(data["sigma_x"], dtype=float),
            mu_z=np.asarray(data["mu_z"], dtype=float),
            sigma_z=np.asarray(data["sigma_z"], dtype=float),
            prior=np.asarray(data["prior"], dtype=float),
            statement_given_person=(
                np.asarray(p_sk, dtype=float) if p_sk is not None else None
            ),
        )


def _ridged_cov(rows: np.ndarray) -> np.ndarray:
    cov = np.cov(rows.T, ddof=1) if len(rows) > 1 else np.zeros((rows.shape[1],) * 2)
    cov = np.atleast_2d(cov)
    lam = 1e-6 * np.trace(cov) / cov.shape[0]
    if lam <= 0.0:
        lam = 1e-6
    return cov + lam * np.eye(cov.shape[0])


def fit_class_stats(corpus: Corpus, Z: np.ndarray,
                    statement_given_person=None) -> ClassStats:
    """Estimate per-class moments from a projected corpus.

    ``Z`` holds one projected 2-vector per quote, aligned with corpus
    order. Every quote needs a statement label and every author a person
    type. ``prior`` counts authors, not quotes.
    """
    Z = np.asarray(Z, dtype=float)
    if Z.ndim != 2 or len(Z) != len(corpus):
        raise ValueError("Z must hold one row per corpus quote")
    d = Z.shape[1]

    by_statement: dict[str, list[int]] = {lab: [] for lab in LABELS}
    by_person: dict[str, list[int]] = {lab: [] for lab in LABELS}
    authors_by_type: dict[str, set] = {lab: set() for lab in LABELS}
    for i, quote in enumerate(corpus):
        if quote.label is None:
            raise MissingLabel(f"quote {quote.id!r} has no statement label")
        if quote.author_type is None:
            raise MissingAuthorType(f"author {quote.author!r} has no person type")
        by_statement[quote.label].append(i)
        by_person[quote.author_type].append(i)
        authors_by_type[quote.author_type].add(quote.author)

    n_authors = sum(len(a) for a in authors_by_type.values())
    if n_authors == 0:
        raise GroupTooSmall("corpus has no quotes")
    prior = np.array([len(authors_by_type[lab]) / n_authors for lab in LABELS])

    mu_x = np.zeros((3, d))
    sigma_x = np.tile(np.eye(d), (3, 1, 1))
    mu_z = np.zeros((3, d))
    sigma_z = np.tile(np.eye(d), (3, 1, 1))
    for k, lab in enumerate(LABELS):
        if prior[k] == 0.0:
            continue  # inactive mixture component, placeholder moments stay
        for grouping, name, mu, sigma in (
            (by_statement, "statement", mu_x, sigma_x),
            (by_person, "person", mu_z, sigma_z),
        ):
            rows = Z[grouping[lab]]
            if len(rows) < 2:
                raise GroupTooSmall(
                    f"{name} group {lab!r} has {len(rows)} samples, need >= 2"
                )
            mu[k] = rows.mean(axis=0)
            sigma[k] = _ridged_cov(rows)
    return ClassStats(
        mu_x=mu_x, sigma_x=sigma_x, mu_z=mu_z, sigma_z=sigma_z, prior=prior,
        statement_given_person=(
            np.asarray(statement_given_person, dtype=float)
            if statement_given_person is not None else None
        ),
    )


def _log_gaussian(z: np.ndarray, mean: np.ndarray, cov: np.ndarray) -> float:
    d = len(mean)
    chol = np.linalg.cholesky(cov)
    sol = np.linalg.solve(chol, z - mean)
    log_det = 2.0 * np.log(np.diag(chol)).sum()
    return float(-0.5 * (d * math.log(2.0 * math.pi) + log_det + sol @ sol))


def measurement_noise(z: np.ndarray, stats: ClassStats) -> np.ndarray:
    """Moment-matched covariance of the class mixture implied by z.

    Class weights are proportional to N(z | mu_z^k, sigma_z^k) p(k),
    computed in log space so distant measurements never underflow to an
    error. The returned covariance pools each class's statement-vector
    covariance plus the spread of the class means around the mixture mean.
    """
    z = np.asarray(z, dtype=float)
    active = np.flatnonzero(stats.prior > 0.0)
    log_w = np.full(3, -np.inf)
    for k in active:
        log_w[k] = math.log(stats.prior[k]) + _log_gaussian(
            z, stats.mu_z[k], stats.sigma_z[k]
        )
    log_w -= log_w[active].max()
    w = np.exp(log_w)
    w /= w.sum()
    mean = w @ stats.mu_x
    R = np.zeros((2, 2))
    for k in active:
        diff = stats.mu_x[k] - mean
        R += w[k] * (stats.sigma_x[k] + np.outer(diff, diff))
    return 0.5 * (R + R.T)


def predict(state: TrackState, dt: float, model: MotionModel,
            when: date | None = None) -> TrackState:
    """Propagate the state dt years forward under the motion model."""
    if dt < 0:
        raise NegativeTimeStep(f"dt must be >= 0, got {dt}")
    F = model.transition(dt)
    Q = model.noise(dt)
    x = F @ state.x
    P = F @ state.P @ F.T + Q
    return TrackState(x=x, P=0.5 * (P + P.T), time=when or state.time)


def update(state: TrackState, z: np.ndarray, R: np.ndarray) -> TrackState:
    """Measurement update in Joseph form, which preserves symmetry and
    positive semi-definiteness of the covariance."""
    z = np.asarray(z, dtype=float)
    R = np.asarray(R, dtype=float)
    S = H @ state.P @ H.T + R
    try:
        chol = np.linalg.cholesky(S)
    except np.linalg.LinAlgError:
        raise SingularInnovation("innovation covariance is not positive definite") from None
    # K = P H^T S^{-1} via two triangular solves
    PHt = state.P @ H.T
    K = np.linalg.solve(chol.T, np.linalg.solve(chol, PHt.T)).T
    x = state.x + K @ (z - H @ state.x)
    IKH = np.eye(4) - K @ H
    P = IKH @ state.P @ IKH.T + K @ R @ K.T
    return TrackState(x=x, P=0.5 * (P + P.T), time=state.time)


@dataclass(frozen=True)
class TrackPoint:
    date: date
    state: TrackState   # posterior after the measurement
    z: np.ndarray
    R: np.ndarray


def track_author(quotes, embeddings, projection, stats: ClassStats,
                 config: TrackerConfig = TrackerConfig()) -> list[TrackPoint]:
    """Filter one author's quotes in date order.

    ``projection`` maps each quote's embedding vector to the 2-D tracking
    space (pass None when the embedding already is 2-D). Same-day quotes
    process in id order with a zero time step.
    """
    quotes = sorted(quotes, key=lambda q: (q.date, q.id))
    if not quotes:
        raise ValueError("track_author needs at least one quote")
    config.validate()
    model = MotionModel(process_var=config.process_var)
    state = config.initial_state(quotes[0].date)
    points: list[TrackPoint] = []
    prev = quotes[0].date
    for quote in quotes:
        vec = np.asarray(embeddings[quote.id], dtype=float)
        z = projection.project(vec) if projection is not None else vec
        if z.shape != (2,):
            raise ValueError("tracking needs 2-D projected measurements")
        dt = (quote.date - prev).days / DAYS_PER_YEAR
        R = measurement_noise(z, stats)
        state = predict(state, dt, model, when=quote.date)
        state = update(state, z, R)
        points.append(TrackPoint(date=quote.date, state=state, z=z, R=R))
        prev = quote.date
    return points


def fit_region_classifier(Z: np.ndarray, labels, C: float = 1.0, seed: int = 0):
    """Linear multi-class SVM over the 2-D projected space, fitted on the
    full data set; its calibrated probabilities drive alerting."""
    from .svm import SvmClassifier

    clf = SvmClassifier(C=C, kernel="linear", calibrate=True, seed=seed)
    return clf.fit(np.asarray(Z, dtype=float), labels)


@dataclass(frozen=True)
class AlertPoint:
    date: date
    p_terrorist: float
    fired: bool


def alert(trajectory, classifier, threshold: float) -> list[AlertPoint]:
    """Evaluate p(terrorist) at each posterior position of a track."""
    if "t" not in classifier.classes_:
        raise ValueError("region classifier has no terrorist class")
    positions = np.stack([p.state.position() for p in trajectory])
    proba = classifier.predict_proba(positions)
    col = classifier.classes_.index("t")
    return [
        AlertPoint(date=p.date, p_terrorist=float(proba[i, col]),
                   fired=bool(proba[i, col] > threshold))
        for i, p in enumerate(trajectory)
    ]
