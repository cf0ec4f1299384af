"""Ideology classification of time-stamped statements and per-author
state-of-mind tracking."""

from .corpus import (
    Corpus,
    Quote,
    SyntheticConfig,
    generate_synthetic,
    load_corpus,
    merge_ratings,
    save_corpus,
)
from .dates import parse_date
from .evaluate import (
    ConfusionMatrix,
    FeatureSpec,
    RocCurve,
    auc,
    balanced_accuracy,
    confusion,
    kfold,
    roc,
    run_experiment,
)
from .featurize import (
    EmbeddingMatrix,
    build_vocabulary,
    count_vector,
    extract_ngrams,
    hash_encode,
    load_embeddings,
    save_embeddings,
    tfidf_by_category,
    tokenize,
)
from .reduce import LDA, PCA, projection_from_dict
from .svm import GridSpec, SmoBinarySvc, SvmClassifier, grid_search, upsample
from .tracker import (
    ClassStats,
    MotionModel,
    TrackerConfig,
    TrackState,
    alert,
    fit_class_stats,
    fit_region_classifier,
    measurement_noise,
    predict,
    track_author,
    update,
)

__version__ = "0.1.0"
