"""Cross-validation and scaling experiments.

Landmarks are chosen on each training fold only; test points reach the
classifier through their kernel values against the training landmarks.
"""
from __future__ import annotations

import csv
import io as _io
import json
import statistics
import time
import tracemalloc
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .classifiers import (one_vs_rest_train, train_ikfd, train_ikfd_dense,
                          train_ny_pcvm, train_pcvm_full)
from .config import TrainConfig
from .datasets import GENERATORS, gen_gauss_overlap, generate
from .errors import ValidationError
from .landmarks import kmeans_landmarks, meb_landmarks, random_landmarks, smss
from .proximity import LabeledDataset, nystrom_extend, nystrom_factorize

CLASSIFIERS = ("ikfd", "ny-ikfd", "pcvm", "ny-pcvm")
SELECTORS = ("meb", "kmeans", "random")


@dataclass
class ExperimentSpec:
    dataset: str = ""
    n: int | None = None
    kernel_file: str | None = None
    label_file: str | None = None
    classifier: str = "ny-ikfd"
    selector: str = "meb"
    eps: float = 0.01
    m: int | None = None
    folds: int = 10
    seed: int = 0
    output: str | None = None
    config: TrainConfig = field(default_factory=TrainConfig)

    def __post_init__(self):
        if self.classifier not in CLASSIFIERS:
            raise ValidationError(f"classifier must be one of {CLASSIFIERS}")
        if self.selector not in SELECTORS:
            raise ValidationError(f"selector must be one of {SELECTORS}")
        if self.folds < 2:
            raise ValidationError("folds must be at least 2")
        if self.kernel_file is None:
            if self.dataset not in GENERATORS:
                raise ValidationError(
                    f"unknown dataset {self.dataset!r}; name a generator or give kernel_file")
        else:
            for path in (self.kernel_file, self.label_file):
                if path is None or not Path(path).is_file():
                    raise ValidationError(f"file not found: {path}")
        if self.selector != "meb" and self.classifier.startswith("ny-") and self.m is None:
            raise ValidationError(f"selector {self.selector} needs m")


_INT_KEYS = {"n", "m", "folds", "seed"}
_FLOAT_KEYS = {"eps"}


def parse_spec(text: str, base_dir: str | Path | None = None) -> ExperimentSpec:
    """Parse ``key = value`` lines; ``#`` starts a comment.

    Keys matching :class:`TrainConfig` fields go into the training config.
    Relative file paths are resolved against ``base_dir``.
    """
    values, cfg = {}, {}
    cfg_fields = TrainConfig.__dataclass_fields__
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValidationError(f"line {lineno}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        try:
            if key in cfg_fields:
                cfg[key] = type(getattr(TrainConfig(), key))(value)
            elif key in _INT_KEYS:
                values[key] = int(value)
            elif key in _FLOAT_KEYS:
                values[key] = float(value)
            elif key in ("dataset", "kernel_file", "label_file", "classifier",
                         "selector", "output"):
                values[key] = value
            else:
                raise ValidationError(f"line {lineno}: unknown key {key!r}")
        except ValueError as exc:
            if isinstance(exc, ValidationError):
                raise
            raise ValidationError(f"line {lineno}: bad value for {key}: {value!r}") from exc
    if base_dir is not None:
        for key in ("kernel_file", "label_file"):
            if key in values and not Path(values[key]).is_absolute():
                values[key] = str(Path(base_dir) / values[key])
    return ExperimentSpec(**values, config=TrainConfig(**cfg))


def load_spec(path) -> ExperimentSpec:
    path = Path(path)
    return parse_spec(path.read_text(), base_dir=path.parent)


def load_dataset(spec: ExperimentSpec) -> LabeledDataset:
    from .io import read_kernel, read_labels

    if spec.kernel_file is not None:
        K = read_kernel(spec.kernel_file)
        labels = read_labels(spec.label_file)
        return LabeledDataset(labels, kernel_matrix=K, name=Path(spec.kernel_file).stem)
    return generate(spec.dataset, spec.n, spec.seed)


# --------------------------------------------------------------------------
# folds


def stratified_folds(labels, k: int, seed: int = 0) -> list:
    """Test-index arrays of a seeded stratified ``k``-fold split.

    Each class is shuffled and dealt round-robin over the folds, so every
    fold gets its share of every class.
    """
    labels = np.asarray(labels)
    n = labels.shape[0]
    if not 2 <= k <= n:
        raise ValidationError(f"need 2 <= folds <= n, got folds={k}, n={n}")
    rng = np.random.default_rng(seed)
    assignment = np.empty(n, dtype=int)
    offset = 0
    for c in np.unique(labels):
        idx = rng.permutation(np.flatnonzero(labels == c))
        assignment[idx] = (offset + np.arange(idx.size)) % k
        offset += idx.size
    folds = [np.flatnonzero(assignment == f) for f in range(k)]
    classes = np.unique(labels)
    for f, test in enumerate(folds):
        train_classes = np.unique(np.delete(labels, test))
        missing = np.setdiff1d(classes, train_classes)
        if missing.size:
            raise ValidationError(
                f"fold {f}: training part has no member of class {int(missing[0])}; "
                "use fewer folds")
    return folds


# --------------------------------------------------------------------------
# reports


@dataclass
class CvReport:
    dataset: str
    classifier: str
    selector: str | None
    folds: int
    seed: int
    fold_accuracy: list
    fold_time: list
    fold_landmarks: list
    fold_smss: list
    fold_sparsity: list
    landmark_indices: list = field(default_factory=list, repr=False)

    @property
    def mean_accuracy(self) -> float:
        return float(np.mean(self.fold_accuracy))

    @property
    def std_accuracy(self) -> float:
        return float(np.std(self.fold_accuracy, ddof=1)) if len(self.fold_accuracy) > 1 else 0.0

    @property
    def mean_landmarks(self) -> float | None:
        vals = [v for v in self.fold_landmarks if v is not None]
        return float(np.mean(vals)) if vals else None

    @property
    def mean_smss(self) -> float | None:
        vals = [v for v in self.fold_smss if v is not None]
        return float(np.mean(vals)) if vals else None

    @property
    def mean_sparsity(self) -> float:
        return float(np.mean(self.fold_sparsity))

    def summary(self) -> dict:
        return {
            "dataset": self.dataset, "classifier": self.classifier,
            "selector": self.selector, "folds": self.folds, "seed": self.seed,
            "accuracy_mean": self.mean_accuracy, "accuracy_std": self.std_accuracy,
            "landmarks_mean": self.mean_landmarks, "smss_mean": self.mean_smss,
            "sparsity_mean": self.mean_sparsity,
            "time_total": float(sum(self.fold_time)),
        }

    def to_json(self) -> str:
        doc = self.summary()
        doc["per_fold"] = [
            {"fold": f, "accuracy": a, "time": t, "landmarks": m, "smss": s, "sparsity": p}
            for f, (a, t, m, s, p) in enumerate(zip(self.fold_accuracy, self.fold_time,
                                                   self.fold_landmarks, self.fold_smss,
                                                   self.fold_sparsity))
        ]
        return json.dumps(doc, indent=2)

    def to_text(self) -> str:
        return "".join(f"{k} = {v}\n" for k, v in self.summary().items())

    def to_csv(self) -> str:
        buf = _io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["fold", "accuracy", "time", "landmarks", "smss", "sparsity"])
        for f, row in enumerate(zip(self.fold_accuracy, self.fold_time, self.fold_landmarks,
                                    self.fold_smss, self.fold_sparsity)):
            w.writerow([f, *("" if v is None else v for v in row)])
        return buf.getvalue()

    def write(self, stem) -> list:
        """Write ``stem.json``, ``stem.txt`` and ``stem.csv``."""
        stem = Path(stem)
        stem.parent.mkdir(parents=True, exist_ok=True)
        paths = []
        for ext, body in (("json", self.to_json()), ("txt", self.to_text()),
                          ("csv", self.to_csv())):
            p = stem.with_suffix("." + ext)
            p.write_text(body)
            paths.append(p)
        return paths


# --------------------------------------------------------------------------
# cross-validation


def select_landmarks(train: LabeledDataset, selector: str, eps: float = 0.01,
                     m: int | None = None, seed: int = 0):
    if selector == "meb":
        return meb_landmarks(train, epsilon=eps, seed=seed)
    if m is None:
        raise ValidationError(f"selector {selector} needs m")
    if selector == "kmeans":
        return kmeans_landmarks(train.block(), m, seed=seed, labels=train.labels)
    if selector == "random":
        return random_landmarks(train.n, m, seed=seed)
    raise ValidationError(f"unknown selector {selector!r}")


def _fit(classifier, source, y, cfg):
    if classifier == "ikfd":
        return train_ikfd_dense(source, y)
    if classifier == "ny-ikfd":
        return train_ikfd(source, y)
    if classifier == "pcvm":
        return train_pcvm_full(source, y, cfg)
    return train_ny_pcvm(source, y, cfg)


def _retained(model, threshold) -> float:
    coef = model.coef if hasattr(model, "coef") else model.alpha
    n = model.n_train
    return 100.0 * np.count_nonzero(np.abs(coef) > threshold) / n


def run_fold(data: LabeledDataset, train_idx, test_idx, classifier: str,
             selector: str = "meb", eps: float = 0.01, m: int | None = None,
             seed: int = 0, cfg: TrainConfig = TrainConfig()) -> dict:
    """Train on ``train_idx`` and score ``test_idx``.

    Only the training view is visible to landmark selection and training;
    test items contribute kernel values against training items only.
    """
    train = data.take(train_idx)
    nystrom = classifier.startswith("ny-")
    out = {"landmarks": None, "smss": None, "landmark_indices": []}
    if nystrom:
        report = select_landmarks(train, selector, eps, m, seed)
        F = nystrom_factorize(train, report.indices)
        source = F
        test_rows = nystrom_extend(F, data.block(test_idx, train_idx[F.landmarks]))
        out["landmarks"] = F.m
        out["landmark_indices"] = [int(i) for i in train_idx[F.landmarks]]
        try:
            out["smss"] = smss(F, train.block(), train.labels)
        except ArithmeticError:
            out["smss"] = None
    else:
        source = train.block()
        test_rows = data.block(test_idx, train_idx)

    model = one_vs_rest_train(lambda y: _fit(classifier, source, y, cfg), train.labels)
    pred = model.predict(test_rows)
    out["accuracy"] = 100.0 * float(np.mean(pred == data.labels[test_idx]))
    out["sparsity"] = float(np.mean([_retained(b, cfg.prune_threshold) for b in model.models]))
    return out


def cross_validate(data: LabeledDataset, classifier: str, selector: str = "meb",
                   folds: int = 10, seed: int = 0, eps: float = 0.01,
                   m: int | None = None, cfg: TrainConfig = TrainConfig()) -> CvReport:
    if classifier not in CLASSIFIERS:
        raise ValidationError(f"classifier must be one of {CLASSIFIERS}")
    splits = stratified_folds(data.labels, folds, seed)
    acc, times, counts, scores, sparsity, chosen = [], [], [], [], [], []
    all_idx = np.arange(data.n)
    for f, test_idx in enumerate(splits):
        train_idx = np.setdiff1d(all_idx, test_idx)
        start = time.perf_counter()
        res = run_fold(data, train_idx, test_idx, classifier, selector, eps, m,
                       seed + f, cfg)
        times.append(time.perf_counter() - start)
        acc.append(res["accuracy"])
        counts.append(res["landmarks"])
        scores.append(res["smss"])
        sparsity.append(res["sparsity"])
        chosen.append(res["landmark_indices"])
    return CvReport(data.name, classifier, selector if classifier.startswith("ny-") else None,
                    folds, seed, acc, times, counts, scores, sparsity, chosen)


def crossval(spec: ExperimentSpec) -> CvReport:
    data = load_dataset(spec)
    report = cross_validate(data, spec.classifier, spec.selector, spec.folds, spec.seed,
                            spec.eps, spec.m, spec.config)
    if spec.output:
        report.write(spec.output)
    return report


# --------------------------------------------------------------------------
# scaling


@dataclass
class ScalingResult:
    classifier: str
    m: int | None
    sizes: list
    times: list
    peak_bytes: list

    @property
    def slope(self) -> float:
        return loglog_slope(self.sizes, self.times)

    def to_text(self) -> str:
        lines = ["N,time,peak_bytes"]
        lines += [f"{n},{t!r},{b}" for n, t, b in zip(self.sizes, self.times, self.peak_bytes)]
        lines.append(f"slope = {self.slope!r}")
        return "\n".join(lines) + "\n"


def loglog_slope(sizes, times) -> float:
    """Least-squares slope of ``log(time)`` against ``log(N)``."""
    x = np.log(np.asarray(sizes, dtype=float))
    y = np.log(np.asarray(times, dtype=float))
    return float(np.polyfit(x, y, 1)[0])


def _bench_input(classifier, data, m, seed):
    """What the timed region starts from: the kernel matrix for the dense
    classifiers, the landmark indices for the Nyström ones."""
    if classifier in ("ikfd", "pcvm"):
        return data.block()
    return random_landmarks(data.n, m, seed).indices


def _train_for_bench(classifier, data, source, cfg):
    y = np.where(data.labels == 0, 1, -1)
    if classifier in ("ikfd", "pcvm"):
        return _fit(classifier, source, y, cfg)
    return _fit(classifier, nystrom_factorize(data, source), y, cfg)


def scaling_bench(classifier: str, sizes, m: int | None = 64, seed: int = 0,
                  repeats: int = 3, cfg: TrainConfig = TrainConfig(),
                  track_memory: bool = True) -> ScalingResult:
    """Median-of-``repeats`` training time on ``gauss_overlap`` at each N.

    Landmarks are drawn uniformly so the timing isolates the classifier.
    Dense classifiers are timed from a precomputed kernel matrix; the
    Nyström ones include building their ``N x m`` factors.  Peak traced
    allocation is recorded from one extra run per size.
    """
    if classifier not in CLASSIFIERS:
        raise ValidationError(f"classifier must be one of {CLASSIFIERS}")
    sizes = [int(n) for n in sizes]
    if sizes != sorted(sizes):
        raise ValidationError("sizes must be ascending")
    if classifier.startswith("ny-") and (m is None or m > min(sizes)):
        raise ValidationError("m must be set and not exceed the smallest N")
    times, peaks = [], []
    for n in sizes:
        data = gen_gauss_overlap(n, seed)
        source = _bench_input(classifier, data, m, seed)
        runs = []
        for _ in range(repeats):
            start = time.perf_counter()
            _train_for_bench(classifier, data, source, cfg)
            runs.append(time.perf_counter() - start)
        times.append(statistics.median(runs))
        if track_memory:
            tracemalloc.start()
            _train_for_bench(classifier, data, source, cfg)
            peaks.append(tracemalloc.get_traced_memory()[1])
            tracemalloc.stop()
        else:
            peaks.append(0)
    return ScalingResult(classifier, m, sizes, times, peaks)


__all__ = [
    "ExperimentSpec", "parse_spec", "load_spec", "load_dataset", "stratified_folds",
    "CvReport", "select_landmarks", "run_fold", "cross_validate", "crossval",
    "ScalingResult", "loglog_slope", "scaling_bench",
]
