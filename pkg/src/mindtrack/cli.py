"""Command-line interface.

Subcommands: ``synth`` (write a synthetic corpus + embeddings), ``eval``
(classification experiment with grid search and CV), ``track`` (per-author
state-of-mind trajectory), ``tfidf`` (top terms per category). A JSON
config file supplies defaults; command-line flags win. Exit codes:
0 success, 2 config error, 3 data error, 4 numerical failure.

Report directory layouts:
  eval:  summary.json, grid.csv, confusion_counts.csv,
         confusion_proportions.csv, roc.csv (binary tasks),
         projection.json, lda_scatter.svg
  track: trajectory.csv, class_stats.json, projection.json,
         track_regions.svg, track_time.svg
  tfidf: tfidf_top.csv
  synth: corpus.jsonl, embeddings.jsonl
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from datetime import date
from pathlib import Path

import numpy as np

from . import corpus as corpus_mod
from . import plots
from .errors import ConfigError, DataError, MindtrackError, NumericalError
from .evaluate import FeatureSpec, run_experiment
from .featurize import (
    count_matrix,
    build_vocabulary,
    default_stopwords,
    hash_encode,
    load_embeddings,
    load_stopwords,
    save_embeddings,
    tfidf_by_category,
)
from .reduce import LDA
from .svm import GridSpec
from .tracker import (
    TrackerConfig,
    alert,
    fit_class_stats,
    fit_region_classifier,
    track_author,
)

DEFAULT_GRID = {
    "c_values": [1.0, 10.0],
    "gamma_values": [0.125, 0.5, 2.0],
    "kernels": ["rbf"],
    "pca_components": [None],
    "n_folds": 10,
    "metric": "balanced_accuracy",
}

DEFAULT_CONFIG = {
    "corpus": None,
    "embeddings": None,
    "features": "embedding",
    "task": "threeway",
    "seed": 0,
    "out": None,
    "author": None,
    "stopwords": None,
    "day_first": True,
    "ngram_n": 1,
    "top_terms": 20,
    "hash_dim": 64,
    "grid": DEFAULT_GRID,
    "tracker": {
        "process_var": 0.1,
        "position_var": 16.0,
        "velocity_var": 0.09,
        "alert_threshold": 0.5,
    },
    "synthetic": {
        "persons_per_type": [10, 10, 10],
        "quotes_per_person": 20,
        "statement_given_person": None,
        "person_prior": None,
        "class_means": None,
        "class_covs": None,
        "start_date": "2000-01-01",
        "spacing_days": 30,
    },
}


def load_config(path: str | None, overrides: dict) -> dict:
    config = json.loads(json.dumps(DEFAULT_CONFIG))  # deep copy
    if path is not None:
        try:
            with open(path, encoding="utf-8") as fh:
                user = json.load(fh)
        except OSError as exc:
            raise ConfigError(f"cannot read config file: {exc}") from None
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config file is not valid JSON: {exc}") from None
        for key, value in user.items():
            if key not in config:
                raise ConfigError(f"unknown config key {key!r}")
            if isinstance(config[key], dict) and isinstance(value, dict):
                for sub, sub_value in value.items():
                    if sub not in config[key]:
                        raise ConfigError(f"unknown config key {key}.{sub}")
                    config[key][sub] = sub_value
            else:
                config[key] = value
    for key, value in overrides.items():
        if value is not None:
            config[key] = value
    if not isinstance(config["seed"], int) or config["seed"] < 0:
        raise ConfigError("seed must be a non-negative integer")
    return config


def _require(config: dict, key: str) -> str:
    if config.get(key) in (None, ""):
        raise ConfigError(f"missing required setting {key!r}")
    return config[key]


def _out_dir(config: dict) -> Path:
    out = Path(_require(config, "out"))
    out.mkdir(parents=True, exist_ok=True)
    return out


def _grid_spec(config: dict) -> GridSpec:
    g = config["grid"]
    try:
        spec = GridSpec(
            c_values=tuple(g["c_values"]),
            gamma_values=tuple(g["gamma_values"]),
            kernels=tuple(g["kernels"]),
            pca_components=tuple(g["pca_components"]),
            n_folds=int(g["n_folds"]),
            metric=g["metric"],
            seed=int(config["seed"]),
        )
        spec.validate()
    except (ValueError, KeyError, TypeError) as exc:
        raise ConfigError(f"invalid grid: {exc}") from None
    return spec


def _stopwords(config: dict):
    if config["stopwords"] is None:
        return default_stopwords()
    return load_stopwords(config["stopwords"])


def _feature_spec(config: dict) -> FeatureSpec:
    kind = config["features"]
    if kind not in ("unigram", "bigram", "embedding", "hash"):
        raise ConfigError(f"unknown feature kind {kind!r}")
    embeddings = None
    if kind == "embedding":
        path = config.get("embeddings")
        if not path:
            raise ConfigError("feature kind 'embedding' needs an embeddings path")
        embeddings = load_embeddings(path)
    return FeatureSpec(
        kind=kind,
        embeddings=embeddings,
        stopwords=_stopwords(config),
        hash_dim=int(config["hash_dim"]),
        hash_seed=int(config["seed"]),
    )


def _write_csv(path: Path, header: list[str], rows) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow(row)


def _fmt_cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _year_float(d: date) -> float:
    return d.year + (d.toordinal() - date(d.year, 1, 1).toordinal()) / 365.25


def _full_feature_matrix(quotes, spec: FeatureSpec) -> np.ndarray:
    if spec.kind == "embedding":
        return spec.embeddings.matrix([q.id for q in quotes])
    if spec.kind == "hash":
        return np.stack(
            [hash_encode(q.text, spec.hash_dim, spec.hash_seed) for q in quotes]
        )
    n = 1 if spec.kind == "unigram" else 2
    vocab = build_vocabulary(quotes, n, spec.stopwords)
    return count_matrix(quotes, vocab, spec.stopwords)


class _PadTo2D:
    """Pads a one-discriminant projection with a zero second axis so the
    4-D tracker still applies to two-class corpora."""

    def __init__(self, projection):
        self.projection = projection

    def project(self, x):
        z = self.projection.project(x)
        return np.array([float(z[0]), 0.0])


def _lda_projection(quotes, X: np.ndarray):
    labels = np.array([q.label for q in quotes], dtype=object)
    n_classes = len(set(labels.tolist()))
    lda = LDA(n_components=min(2, n_classes - 1)).fit(X, labels)
    Z = lda.transform(X)
    if Z.shape[1] == 1:
        Z = np.column_stack([Z[:, 0], np.zeros(len(Z))])
    return lda, Z


def cmd_synth(config: dict) -> int:
    out = _out_dir(config)
    syn = config["synthetic"]
    kwargs = {}
    if syn.get("statement_given_person") is not None:
        kwargs["statement_given_person"] = tuple(map(tuple, syn["statement_given_person"]))
    if syn.get("person_prior") is not None:
        kwargs["person_prior"] = tuple(syn["person_prior"])
    if syn.get("class_means") is not None:
        kwargs["class_means"] = tuple(map(tuple, syn["class_means"]))
    if syn.get("class_covs") is not None:
        kwargs["class_covs"] = tuple(syn["class_covs"])
    cfg = corpus_mod.SyntheticConfig(
        persons_per_type=tuple(syn["persons_per_type"]),
        quotes_per_person=int(syn["quotes_per_person"]),
        seed=int(config["seed"]),
        start_date=date.fromisoformat(syn["start_date"]),
        spacing_days=int(syn["spacing_days"]),
        **kwargs,
    )
    corpus, embeddings = corpus_mod.generate_synthetic(cfg)
    corpus_mod.save_corpus(corpus, out / "corpus.jsonl")
    save_embeddings(embeddings, out / "embeddings.jsonl")
    print(f"wrote {len(corpus)} quotes to {out / 'corpus.jsonl'}")
    return 0


def cmd_eval(config: dict) -> int:
    out = _out_dir(config)
    features = _feature_spec(config)
    corpus = corpus_mod.load_corpus(_require(config, "corpus"),
                                    day_first=config["day_first"])
    corpus_mod.require_labels(corpus)
    grid = _grid_spec(config)
    report = run_experiment(corpus, features, config["task"], grid,
                            seed=int(config["seed"]))

    _write_csv(
        out / "grid.csv",
        ["C", "kernel", "gamma", "pca", "metric", "error"],
        (
            [_fmt_cell(r["C"]), r["kernel"], _fmt_cell(r["gamma"]),
             _fmt_cell(r["pca"]), _fmt_cell(r["metric"]), r["error"]]
            for r in report.grid_table
        ),
    )
    header = ["actual"] + list(report.classes)
    _write_csv(
        out / "confusion_counts.csv",
        header,
        (
            [lab] + [str(int(v)) for v in row]
            for lab, row in zip(report.classes, report.confusion.counts)
        ),
    )
    _write_csv(
        out / "confusion_proportions.csv",
        header,
        (
            [lab] + [repr(float(v)) for v in row]
            for lab, row in zip(report.classes, report.confusion.proportions)
        ),
    )
    if report.roc is not None:
        _write_csv(
            out / "roc.csv",
            ["threshold", "fpr", "tpr"],
            (
                [repr(float(t)), repr(float(f)), repr(float(s))]
                for t, f, s in zip(report.roc.thresholds, report.roc.fpr,
                                   report.roc.tpr)
            ),
        )
    summary = {
        "task": report.task,
        "feature_kind": features.kind,
        "seed": report.seed,
        "classes": report.classes,
        "n_used": report.n_used,
        "n_excluded_terrorist": report.n_excluded,
        "best": report.best,
        "balanced_accuracy": report.balanced_accuracy,
        "auc": report.auc,
    }
    with open(out / "summary.json", "w", encoding="utf-8") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
        fh.write("\n")

    X = _full_feature_matrix(list(corpus), features)
    lda, Z = _lda_projection(list(corpus), X)
    with open(out / "projection.json", "w", encoding="utf-8") as fh:
        json.dump(lda.to_dict(), fh, sort_keys=True)
        fh.write("\n")
    svg = plots.scatter_svg(
        Z, [q.label for q in corpus],
        title=f"LDA projection ({features.kind} features)",
    )
    (out / "lda_scatter.svg").write_text(svg, encoding="utf-8")
    print(
        f"task={report.task} balanced_accuracy={report.balanced_accuracy:.4f}"
        + (f" auc={report.auc:.4f}" if report.auc is not None else "")
    )
    return 0


def cmd_track(config: dict) -> int:
    out = _out_dir(config)
    author = _require(config, "author")
    features = _feature_spec(config)
    if features.kind not in ("embedding", "hash"):
        raise ConfigError("tracking needs 'embedding' or 'hash' features")
    corpus = corpus_mod.load_corpus(_require(config, "corpus"),
                                    day_first=config["day_first"])
    corpus_mod.require_labels(corpus)
    quotes = list(corpus)
    X = _full_feature_matrix(quotes, features)
    lda, Z = _lda_projection(quotes, X)

    stats = fit_class_stats(corpus, Z)
    with open(out / "class_stats.json", "w", encoding="utf-8") as fh:
        json.dump(stats.to_dict(), fh, sort_keys=True)
        fh.write("\n")
    with open(out / "projection.json", "w", encoding="utf-8") as fh:
        json.dump(lda.to_dict(), fh, sort_keys=True)
        fh.write("\n")
    labels = np.array([q.label for q in quotes], dtype=object)
    region_clf = fit_region_classifier(Z, labels, seed=int(config["seed"]))

    t_cfg = TrackerConfig(**config["tracker"])
    author_quotes = corpus.author_quotes(author)
    row_of = {q.id: i for i, q in enumerate(quotes)}
    vectors = {q.id: X[row_of[q.id]] for q in author_quotes}
    projection = lda if lda.components_.shape[0] == 2 else _PadTo2D(lda)
    track = track_author(author_quotes, vectors, projection, stats, t_cfg)
    alerts = alert(track, region_clf, t_cfg.alert_threshold)

    header = (
        ["date", "x1", "v1", "x2", "v2"]
        + [f"p{i + 1}{j + 1}" for i in range(4) for j in range(4)]
        + ["z1", "z2", "r11", "r12", "r22", "p_terrorist", "alert"]
    )
    rows = []
    for point, alert_point in zip(track, alerts):
        s = point.state
        rows.append(
            [point.date.isoformat()]
            + [repr(float(v)) for v in (s.x[0], s.x[1], s.x[2], s.x[3])]
            + [repr(float(v)) for v in s.P.reshape(-1)]
            + [repr(float(point.z[0])), repr(float(point.z[1]))]
            + [repr(float(point.R[0, 0])), repr(float(point.R[0, 1])),
               repr(float(point.R[1, 1]))]
            + [repr(alert_point.p_terrorist), str(int(alert_point.fired))]
        )
    _write_csv(out / "trajectory.csv", header, rows)

    z_points = np.stack([p.z for p in track])
    track_xy = np.stack([p.state.position() for p in track])
    lo = np.minimum(Z.min(axis=0), track_xy.min(axis=0))
    hi = np.maximum(Z.max(axis=0), track_xy.max(axis=0))
    span = np.where(hi - lo <= 0, 1.0, hi - lo)
    extent = (
        float(lo[0] - 0.05 * span[0]), float(hi[0] + 0.05 * span[0]),
        float(lo[1] - 0.05 * span[1]), float(hi[1] + 0.05 * span[1]),
    )
    nx = ny = 48
    gx = np.linspace(extent[0], extent[1], nx)
    gy = np.linspace(extent[2], extent[3], ny)
    probe = np.array([[x, y] for y in gy for x in gx])
    grid_labels = region_clf.predict(probe).reshape(ny, nx)
    svg = plots.scatter_svg(
        z_points,
        [q.label for q in author_quotes],
        title=f"State-of-mind track: {author}",
        track=track_xy,
        regions=(grid_labels, extent),
    )
    (out / "track_regions.svg").write_text(svg, encoding="utf-8")

    times = [_year_float(p.date) for p in track]
    means = [float(p.state.x[2]) for p in track]
    sds = [float(np.sqrt(p.state.P[2, 2])) for p in track]
    band = (
        np.array([m - 2 * s for m, s in zip(means, sds)]),
        np.array([m + 2 * s for m, s in zip(means, sds)]),
    )
    svg = plots.timeline_svg(
        times,
        [float(p.z[1]) for p in track],
        [q.label for q in author_quotes],
        track_times=times,
        track_values=means,
        band=band,
        title=f"Dimension 2 over time: {author}",
    )
    (out / "track_time.svg").write_text(svg, encoding="utf-8")
    fired = [a for a in alerts if a.fired]
    first = fired[0].date.isoformat() if fired else "never"
    print(f"tracked {len(track)} quotes by {author}; first alert: {first}")
    return 0


def cmd_tfidf(config: dict) -> int:
    out = _out_dir(config)
    corpus = corpus_mod.load_corpus(_require(config, "corpus"),
                                    day_first=config["day_first"])
    scores = tfidf_by_category(corpus, int(config["ngram_n"]),
                               _stopwords(config))
    top_n = int(config["top_terms"])
    rows = []
    for category in corpus_mod.LABELS:
        ranked = sorted(
            ((score, " ".join(gram)) for gram, score in scores[category].items()
             if score > 0.0),
            key=lambda pair: (-pair[0], pair[1]),
        )[:top_n]
        for rank, (score, term) in enumerate(ranked, start=1):
            rows.append([category, str(rank), term, repr(float(score))])
    _write_csv(out / "tfidf_top.csv", ["category", "rank", "term", "score"], rows)
    print(f"wrote {len(rows)} terms to {out / 'tfidf_top.csv'}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mindtrack",
        description="Classify ideology of time-stamped statements and track "
                    "authors' state of mind.",
        epilog=__doc__,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
        ("synth", "generate a synthetic corpus and embeddings"),
        ("eval", "run a classification experiment"),
        ("track", "track one author's state of mind"),
        ("tfidf", "top TF-IDF terms per category"),
    ):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", help="JSON config file")
        p.add_argument("--seed", type=int, help="random seed (overrides config)")
        p.add_argument("--out", help="output directory")
        p.add_argument("--corpus", help="corpus JSONL path")
        p.add_argument("--embeddings", help="embeddings JSONL path")
        p.add_argument("--features", choices=["unigram", "bigram", "embedding", "hash"])
        p.add_argument("--stopwords", help="stop-word list path (one per line)")
        p.add_argument("--month-first", action="store_true",
                       help="parse ambiguous numeric dates month-first")
        if name == "eval":
            p.add_argument("--task",
                           choices=["threeway", "detect_terrorist", "detect_extremist"])
        if name == "track":
            p.add_argument("--author", help="author to track")
        if name == "tfidf":
            p.add_argument("--ngram-n", type=int, choices=[1, 2], dest="ngram_n")
            p.add_argument("--top", type=int, dest="top_terms",
                           help="terms per category (0 for header only)")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    overrides = {
        key: getattr(args, key, None)
        for key in ("seed", "out", "corpus", "embeddings", "features",
                    "stopwords", "task", "author", "ngram_n", "top_terms")
    }
    if getattr(args, "month_first", False):
        overrides["day_first"] = False
    handlers = {
        "synth": cmd_synth,
        "eval": cmd_eval,
        "track": cmd_track,
        "tfidf": cmd_tfidf,
    }
    try:
        config = load_config(args.config, overrides)
        return handlers[args.command](config)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (DataError, OSError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 3
    except (NumericalError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 4
    except MindtrackError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
