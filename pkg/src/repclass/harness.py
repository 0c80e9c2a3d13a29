"""Batch experiment machinery: dataset ingestion, experiment runs,
parameter sweeps, ROC evaluation, and timing benchmarks."""

import json
import platform
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import degradation as degrade_mod
from .classifiers import (
    classify_crc_rls,
    classify_nn,
    classify_ns,
    classify_rcrc,
    classify_rns,
    classify_src,
    compute_sci,
)
from .dictionary import build_dictionary, build_projector, default_lambda
from .errors import (
    ConfigInvalid,
    MissingPath,
    MixedImageSizes,
    OverlappingClasses,
)
from .features import fit_pca, project_pca, vectorize_image
from .io import read_matrix, read_pgm
from .solvers import AlmParams, FistaParams
from .synthetic import make_subspace_dataset

CLASSIFIERS = ("src", "crc_rls", "rcrc", "rns_l1", "rns_l2", "nn", "ns")


@dataclass
class Dataset:
    features: np.ndarray  # m x N
    labels: list
    split: list  # "train" / "test" per column
    provenance: dict = field(default_factory=dict)
    image_shape: tuple | None = None  # (H, W) when columns are flattened images

    @property
    def n_columns(self):
        return self.features.shape[1]

    def columns(self, which):
        idx = [i for i, s in enumerate(self.split) if s == which]
        return self.features[:, idx], [self.labels[i] for i in idx]


@dataclass
class ExperimentConfig:
    classifier: str = "crc_rls"
    lam: object = "auto"  # positive float, or "auto" for 0.001 * n / 700
    feature_dim: int | None = None
    degradation: degrade_mod.DegradationSpec | None = None
    seed: int = 0
    decision_variant: str = "regularized_residual"
    alm: AlmParams = field(default_factory=AlmParams)
    fista: FistaParams = field(default_factory=FistaParams)

    def __post_init__(self):
        if self.classifier not in CLASSIFIERS:
            raise ConfigInvalid(f"unknown classifier {self.classifier!r}")
        if self.lam != "auto" and (not isinstance(self.lam, (int, float)) or self.lam <= 0):
            raise ConfigInvalid(f"lambda must be positive or 'auto', got {self.lam!r}")
        if self.decision_variant not in ("plain_residual", "regularized_residual"):
            raise ConfigInvalid(f"unknown decision variant {self.decision_variant!r}")

    def resolve_lambda(self, n_train):
        return default_lambda(n_train) if self.lam == "auto" else float(self.lam)

    def to_json(self):
        out = {
            "classifier": self.classifier,
            "lambda": self.lam,
            "feature_dim": self.feature_dim,
            "seed": self.seed,
            "decision_variant": self.decision_variant,
            "alm": {
                "mu0": self.alm.mu0,
                "rho": self.alm.rho,
                "tol": self.alm.tol,
                "max_iter": self.alm.max_iter,
                "mu_max": self.alm.mu_max,
                "inner_max": self.alm.inner_max,
            },
            "fista": {"tol": self.fista.tol, "max_iter": self.fista.max_iter},
        }
        if self.degradation is not None:
            out["degradation"] = self.degradation.to_json()
        return out

    @classmethod
    def from_json(cls, obj):
        deg = obj.get("degradation")
        return cls(
            classifier=obj.get("classifier", "crc_rls"),
            lam=obj.get("lambda", "auto"),
            feature_dim=obj.get("feature_dim"),
            degradation=degrade_mod.DegradationSpec.from_json(deg) if deg else None,
            seed=int(obj.get("seed", 0)),
            decision_variant=obj.get("decision_variant", "regularized_residual"),
            alm=AlmParams(**obj.get("alm", {})),
            fista=FistaParams(**obj.get("fista", {})),
        )


@dataclass
class Report:
    recognition_rate: float
    per_class_rates: dict
    confusion: dict
    n_queries: int
    mean_query_time: float
    median_query_time: float
    offline_time: float
    config: dict
    environment: dict
    per_query: list  # JSON-ready per-query records

    def to_json(self):
        return {
            "recognition_rate": self.recognition_rate,
            "per_class_rates": self.per_class_rates,
            "confusion": self.confusion,
            "n_queries": self.n_queries,
            "mean_query_time": self.mean_query_time,
            "median_query_time": self.median_query_time,
            "offline_time": self.offline_time,
            "config": self.config,
            "environment": self.environment,
        }

    def write_query_log(self, path):
        with open(path, "w") as fh:
            for rec in self.per_query:
                fh.write(json.dumps(rec) + "\n")


def save_dataset(dataset, path):
    """Write a dataset as a matrix file plus JSON sidecar."""
    from .io import write_matrix

    path = Path(path)
    write_matrix(path, dataset.features)
    sidecar = {
        "labels": [str(lab) for lab in dataset.labels],
        "split": list(dataset.split),
        "provenance": dataset.provenance,
        "image_shape": list(dataset.image_shape) if dataset.image_shape else None,
    }
    path.with_suffix(path.suffix + ".json").write_text(json.dumps(sidecar, indent=2))


def load_dataset(path):
    path = Path(path)
    features = read_matrix(path)
    sidecar = json.loads(path.with_suffix(path.suffix + ".json").read_text())
    shape = sidecar.get("image_shape")
    return Dataset(
        features=features,
        labels=list(sidecar["labels"]),
        split=list(sidecar.get("split", ["train"] * features.shape[1])),
        provenance=sidecar.get("provenance", {}),
        image_shape=tuple(shape) if shape else None,
    )


def _environment_stamp():
    return {
        "python": platform.python_version(),
        "numpy": np.__version__,
        "platform": platform.platform(),
    }


def ingest_dataset(path, layout="class_dirs", train_per_class=None, split_seed=0):
    """Load a dataset from class subdirectories of PGM images or a matrix file.

    class_dirs: one subdirectory per class of same-size P5 images, vectorized
    column-major, ordered lexicographically by class then filename. The
    train/test split takes the first train_per_class images per class (all
    "train" when None).

    matrix_file: the harness matrix format with a JSON sidecar holding
    "labels" and optional "split".
    """
    path = Path(path)
    if not path.exists():
        raise MissingPath(str(path))
    if layout == "matrix_file":
        features = read_matrix(path)
        sidecar = json.loads(path.with_suffix(path.suffix + ".json").read_text())
        labels = list(sidecar["labels"])
        split = list(sidecar.get("split", ["train"] * len(labels)))
        return Dataset(
            features=features,
            labels=labels,
            split=split,
            provenance={"path": str(path), "layout": "matrix_file"},
        )
    if layout != "class_dirs":
        raise ConfigInvalid(f"unknown layout {layout!r}")
    cols, labels = [], []
    shape = None
    for class_dir in sorted(p for p in path.iterdir() if p.is_dir()):
        for img_path in sorted(class_dir.glob("*.pgm")):
            img = read_pgm(img_path)
            if shape is None:
                shape = img.shape
            elif img.shape != shape:
                raise MixedImageSizes(
                    f"{img_path}: size {img.shape} differs from {shape}"
                )
            cols.append(vectorize_image(img))
            labels.append(class_dir.name)
    if not cols:
        raise MissingPath(f"{path}: no class directories with PGM images")
    features = np.column_stack(cols)
    split = ["train"] * len(labels)
    if train_per_class is not None:
        seen = {}
        for i, lab in enumerate(labels):
            seen[lab] = seen.get(lab, 0) + 1
            split[i] = "train" if seen[lab] <= train_per_class else "test"
    return Dataset(
        features=features,
        labels=labels,
        split=split,
        provenance={"path": str(path), "layout": "class_dirs"},
        image_shape=shape,
    )


def synthetic_dataset(
    n_classes=10,
    subspace_dim=5,
    ambient_dim=50,
    n_train=10,
    n_test=5,
    noise_sigma=0.05,
    seed=0,
    shared_fraction=0.0,
):
    """Built-in seeded generator: one random subspace per class."""
    train, train_labels, test, test_labels = make_subspace_dataset(
        n_classes, subspace_dim, ambient_dim, n_train, n_test, noise_sigma, seed,
        shared_fraction=shared_fraction,
    )
    features = np.concatenate([train, test], axis=1)
    labels = train_labels + test_labels
    split = ["train"] * len(train_labels) + ["test"] * len(test_labels)
    provenance = {
        "source": "synthetic",
        "n_classes": n_classes,
        "subspace_dim": subspace_dim,
        "ambient_dim": ambient_dim,
        "noise_sigma": noise_sigma,
        "seed": seed,
        "shared_fraction": shared_fraction,
    }
    return Dataset(features=features, labels=labels, split=split, provenance=provenance)


def _degrade_queries(queries, spec, image_shape):
    """Apply the configured degradation to each test column (pre-PCA)."""
    out = queries.copy()
    for j in range(queries.shape[1]):
        col = queries[:, j]
        if spec.kind == "block_occlusion":
            if image_shape is None:
                raise ConfigInvalid("block occlusion needs image-shaped data")
            img = col.reshape(image_shape, order="F")
            seed = degrade_mod.derive_seed(spec.seed, j)
            rng = np.random.Generator(np.random.PCG64(degrade_mod.derive_seed(spec.seed, 2**32 + j)))
            occ = rng.uniform(spec.low, spec.high, size=image_shape)
            deg, _ = degrade_mod.occlude_block(img, spec.fraction, occ, seed)
            out[:, j] = vectorize_image(deg)
        else:
            shape = image_shape if image_shape is not None else (queries.shape[0], 1)
            img = col.reshape(shape, order="F")
            deg = degrade_mod.corrupt_pixels(
                img, spec.fraction, degrade_mod.derive_seed(spec.seed, j),
                low=spec.low, high=spec.high,
            )
            out[:, j] = deg.flatten(order="F")
    return out


class _Runner:
    """One classifier bound to a trained dictionary; times offline setup."""

    def __init__(self, config, train_features, train_labels):
        t0 = time.perf_counter()
        self.config = config
        self.dictionary = build_dictionary(
            [(train_features[:, i], train_labels[i]) for i in range(train_features.shape[1])]
        )
        lam = config.resolve_lambda(self.dictionary.n)
        self.lam = lam
        self.projector = None
        if config.classifier == "crc_rls":
            self.projector = build_projector(self.dictionary, lam)
        elif config.classifier == "rcrc":
            # warm the solver's SVD cache: this is the offline projector family
            from .solvers import _thin_svd

            _thin_svd(self.dictionary.data)
        self.offline_time = time.perf_counter() - t0

    def classify(self, y):
        c = self.config
        if c.classifier == "crc_rls":
            return classify_crc_rls(
                self.projector, self.dictionary, y, variant=c.decision_variant
            )
        if c.classifier == "src":
            return classify_src(
                self.dictionary, y, self.lam, c.fista, variant=c.decision_variant
            )
        if c.classifier == "rcrc":
            return classify_rcrc(
                self.dictionary, y, self.lam, c.alm, variant=c.decision_variant
            )
        if c.classifier == "rns_l1":
            return classify_rns(self.dictionary, y, self.lam, p=1, params=c.fista)
        if c.classifier == "rns_l2":
            return classify_rns(self.dictionary, y, self.lam, p=2)
        if c.classifier == "nn":
            return classify_nn(self.dictionary, y)
        return classify_ns(self.dictionary, y)


def run_experiment(config, data):
    """Train on the train split, classify the test split, return a Report."""
    train_raw, train_labels = data.columns("train")
    test_raw, test_labels = data.columns("test")
    if test_raw.shape[1] == 0:
        raise ConfigInvalid("dataset has no test split")

    if config.degradation is not None and config.degradation.fraction > 0:
        test_raw = _degrade_queries(test_raw, config.degradation, data.image_shape)

    offline_extra = 0.0
    if config.feature_dim is not None:
        t0 = time.perf_counter()
        pca = fit_pca(train_raw, config.feature_dim)
        train_feats = project_pca(pca, train_raw)
        offline_extra = time.perf_counter() - t0
        test_feats = project_pca(pca, test_raw)
    else:
        train_feats, test_feats = train_raw, test_raw

    runner = _Runner(config, train_feats, train_labels)

    per_query = []
    times = []
    correct_by_class = {}
    total_by_class = {}
    confusion = {}
    n_correct = 0
    for j in range(test_feats.shape[1]):
        y = test_feats[:, j]
        t0 = time.perf_counter()
        decision = runner.classify(y)
        dt = time.perf_counter() - t0
        times.append(dt)
        true = test_labels[j]
        pred = decision.predicted
        ok = pred == true
        n_correct += ok
        total_by_class[true] = total_by_class.get(true, 0) + 1
        correct_by_class[true] = correct_by_class.get(true, 0) + ok
        confusion.setdefault(str(true), {})
        confusion[str(true)][str(pred)] = confusion[str(true)].get(str(pred), 0) + 1
        sci = None
        if runner.dictionary.k >= 2 and decision.coding is not None:
            try:
                sci = compute_sci(runner.dictionary, decision.coding)
            except Exception:
                sci = None
        per_query.append(
            {
                "query": j,
                "true": str(true),
                "predicted": str(pred),
                "residuals": {str(k): _jsonable(v) for k, v in decision.per_class_residuals.items()},
                "sci": sci,
                "wall_time": dt,
            }
        )
    n = test_feats.shape[1]
    return Report(
        recognition_rate=n_correct / n,
        per_class_rates={
            str(lab): correct_by_class.get(lab, 0) / cnt for lab, cnt in total_by_class.items()
        },
        confusion=confusion,
        n_queries=n,
        mean_query_time=float(np.mean(times)),
        median_query_time=float(np.median(times)),
        offline_time=runner.offline_time + offline_extra,
        config=config.to_json(),
        environment=_environment_stamp(),
        per_query=per_query,
    )


def _jsonable(v):
    return v if np.isfinite(v) else "inf"


def lambda_sweep(config, data, lambdas):
    """One Report per lambda; lambdas must be positive and sorted."""
    lambdas = list(lambdas)
    if any(l <= 0 for l in lambdas) or any(
        b <= a for a, b in zip(lambdas, lambdas[1:])
    ):
        raise ConfigInvalid("lambdas must be positive and strictly increasing")
    reports = []
    for lam in lambdas:
        cfg = ExperimentConfig.from_json({**config.to_json(), "lambda": lam})
        reports.append(run_experiment(cfg, data))
    return reports


def run_roc(config, gallery, customers, imposters, thresholds):
    """SCI-threshold ROC: TPR over customers, FPR over imposters.

    A customer query counts as a true positive when it is both accepted at
    the threshold and correctly identified.
    """
    train_feats, train_labels = gallery.columns("train")
    gallery_classes = set(train_labels)
    imposter_feats, imposter_labels = _all_columns(imposters)
    if gallery_classes & set(imposter_labels):
        raise OverlappingClasses("imposter classes must be disjoint from the gallery")
    customer_feats, customer_labels = _all_columns(customers)

    runner = _Runner(config, train_feats, train_labels)

    def score(y):
        decision = runner.classify(y)
        return compute_sci(runner.dictionary, decision.coding), decision.predicted

    customer_scores = [score(customer_feats[:, j]) for j in range(customer_feats.shape[1])]
    imposter_scores = [score(imposter_feats[:, j])[0] for j in range(imposter_feats.shape[1])]

    points = []
    for thr in thresholds:
        tp = sum(
            1
            for (sci, pred), true in zip(customer_scores, customer_labels)
            if sci >= thr and pred == true
        )
        fp = sum(1 for sci in imposter_scores if sci >= thr)
        points.append(
            {
                "threshold": float(thr),
                "tpr": tp / len(customer_labels),
                "fpr": fp / len(imposter_labels),
            }
        )
    return points


def _all_columns(dataset):
    return dataset.features, list(dataset.labels)


def roc_auc(points):
    """Trapezoidal AUC of ROC points (any threshold order)."""
    pts = sorted((p["fpr"], p["tpr"]) for p in points)
    pts = [(0.0, 0.0)] + pts + [(1.0, 1.0)]
    auc = 0.0
    for (x0, y0), (x1, y1) in zip(pts, pts[1:]):
        auc += (x1 - x0) * (y0 + y1) / 2.0
    return auc


def bench(configs, data, repetitions=3):
    """Timing comparison across classifier configs on one dataset.

    Per-query times exclude dictionary/projector construction, which is
    reported separately as offline time. Accuracy outputs are deterministic
    across repetitions; timings are averaged over them.
    """
    if repetitions < 3:
        raise ConfigInvalid("need at least 3 repetitions")
    rows = {}
    for config in configs:
        name = config.classifier
        mean_times, median_times = [], []
        report = None
        for _ in range(repetitions):
            report = run_experiment(config, data)
            mean_times.append(report.mean_query_time)
            median_times.append(report.median_query_time)
        rows[name] = {
            "recognition_rate": report.recognition_rate,
            "mean_query_time": float(np.mean(mean_times)),
            "median_query_time": float(np.median(median_times)),
            "offline_time": report.offline_time,
        }
    fastest = min(rows, key=lambda k: rows[k]["mean_query_time"])
    for name, row in rows.items():
        row["speedup_of_fastest"] = row["mean_query_time"] / rows[fastest]["mean_query_time"]
    return {"fastest": fastest, "rows": rows}
