"""K-nearest-neighbour texture classification and evaluation protocols."""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .encoding import EncoderSpec, encode
from .events import Dataset, ParameterError, ValidationError
from .metrics import MetricSpec, pairwise_matrix


@dataclass
class ClassificationReport:
    """Confusion matrix (rows actual, columns predicted) plus summary stats.

    accuracy is a fraction in [0, 1]; dispersion is the population standard
    deviation of the per-sample {0, 100} correctness scores, matching the
    mean +/- std convention of accuracy tables.
    """

    classes: list[str]
    confusion: np.ndarray
    per_sample_correct: list[int] = field(default_factory=list)

    @property
    def total(self) -> int:
        return int(self.confusion.sum())

    @property
    def accuracy(self) -> float:
        n = self.total
        return float(np.trace(self.confusion) / n) if n else 0.0

    @property
    def dispersion(self) -> float:
        if not self.per_sample_correct:
            return 0.0
        return float(np.std(np.asarray(self.per_sample_correct) * 100.0))


def _vote(distances: np.ndarray, labels: list[str], k: int) -> str:
    """Shared KNN decision rule.

    Neighbours are the k smallest distances, ties on the k-th distance
    broken by training-set order.  The majority label wins; vote ties go
    to the label with the smallest summed distance, then to the earliest
    training index.
    """
    n = len(labels)
    if n == 0:
        raise ValidationError("empty training set")
    if k < 1:
        raise ParameterError("k must be >= 1")
    if k > n:
        warnings.warn(f"k={k} exceeds training size {n}; clamping to {n}")
        k = n
    order = np.lexsort((np.arange(n), distances))[:k]
    tally: dict[str, list] = {}
    for idx in order:
        lab = labels[idx]
        entry = tally.setdefault(lab, [0, 0.0, idx])
        entry[0] += 1
        entry[1] += float(distances[idx])
    best = min(tally.items(), key=lambda kv: (-kv[1][0], kv[1][1], kv[1][2]))
    return best[0]


def knn_classify(train: list[tuple], query, k: int, metric) -> str:
    """Classify one encoded query against (code, label) training pairs
    using the distance callable `metric`."""
    labels = [lab for _, lab in train]
    distances = np.array([metric(query, code) for code, _ in train], dtype=float)
    return _vote(distances, labels, k)


def train_test_split(dataset: Dataset, ratio: float, seed: int) -> tuple[Dataset, Dataset]:
    """Stratified split: each class is shuffled by the seed and cut at
    round(ratio * class size), keeping at least one sample on each side."""
    if not 0.0 < ratio < 1.0:
        raise ParameterError("split ratio must be in (0, 1)")
    rng = np.random.default_rng(seed)
    labels = dataset.labels()
    train_idx: list[int] = []
    test_idx: list[int] = []
    for cls in dataset.classes:
        idx = np.array([i for i, lab in enumerate(labels) if lab == cls])
        if len(idx) < 2:
            raise ValidationError(
                f"class {cls!r} has {len(idx)} samples; need at least 2 to split"
            )
        perm = rng.permutation(len(idx))
        n_train = int(round(ratio * len(idx)))
        n_train = min(max(n_train, 1), len(idx) - 1)
        train_idx.extend(idx[perm[:n_train]])
        test_idx.extend(idx[perm[n_train:]])
    train_idx.sort()
    test_idx.sort()
    mk = lambda ids: Dataset(
        samples=[dataset.samples[i] for i in ids], classes=list(dataset.classes)
    )
    return mk(train_idx), mk(test_idx)


def confusion_matrix(pairs: list[tuple[str, str]], classes: list[str]) -> np.ndarray:
    """Count (actual, predicted) pairs into a C x C matrix."""
    index = {c: i for i, c in enumerate(classes)}
    out = np.zeros((len(classes), len(classes)), dtype=np.int64)
    for actual, predicted in pairs:
        if actual not in index:
            raise ValidationError(f"unknown actual label {actual!r}")
        if predicted not in index:
            raise ValidationError(f"unknown predicted label {predicted!r}")
        out[index[actual], index[predicted]] += 1
    return out


def _report_from_votes(pairs, classes) -> ClassificationReport:
    return ClassificationReport(
        classes=list(classes),
        confusion=confusion_matrix(pairs, classes),
        per_sample_correct=[1 if a == p else 0 for a, p in pairs],
    )


def loocv_from_matrix(dist: np.ndarray, labels: list[str], classes, k: int) -> ClassificationReport:
    """Leave-one-out over a precomputed pairwise distance matrix."""
    n = len(labels)
    pairs = []
    rest = np.arange(n)
    for i in range(n):
        others = rest[rest != i]
        predicted = _vote(dist[i, others], [labels[j] for j in others], k)
        pairs.append((labels[i], predicted))
    return _report_from_votes(pairs, classes)


def leave_one_out(
    dataset: Dataset, encoder: EncoderSpec, metric: MetricSpec, k: int
) -> ClassificationReport:
    """Leave-one-out cross-validation over the whole dataset."""
    codes = [encode(s, encoder) for s in dataset.samples]
    dist = pairwise_matrix(codes, metric)
    return loocv_from_matrix(dist, dataset.labels(), dataset.classes, k)


def classify_split(
    train: Dataset, test: Dataset, encoder: EncoderSpec, metric: MetricSpec, k: int
) -> ClassificationReport:
    """Classify every test sample against the training set."""
    if train.classes != test.classes:
        raise ValidationError("train and test splits disagree on classes")
    codes = [encode(s, encoder) for s in train.samples + test.samples]
    dist = pairwise_matrix(codes, metric)
    n_train = len(train.samples)
    train_labels = train.labels()
    pairs = []
    for j, actual in enumerate(test.labels()):
        row = dist[n_train + j, :n_train]
        pairs.append((actual, _vote(row, train_labels, k)))
    return _report_from_votes(pairs, train.classes)


# ---------------------------------------------------------------------------
# report serialization


def write_confusion_csv(path, report: ClassificationReport) -> None:
    with open(path, "w") as fh:
        fh.write("class," + ",".join(report.classes) + "\n")
        for cls, row in zip(report.classes, report.confusion):
            fh.write(cls + "," + ",".join(str(int(v)) for v in row) + "\n")


def write_summary_csv(path, report: ClassificationReport) -> None:
    with open(path, "w") as fh:
        fh.write("accuracy,stddev\n")
        fh.write(f"{report.accuracy:.6f},{report.dispersion:.6f}\n")


def read_confusion_csv(path) -> tuple[list[str], np.ndarray]:
    from .events import FormatError

    with open(path) as fh:
        header = fh.readline().rstrip("\n").split(",")
        if not header or header[0] != "class":
            raise FormatError(f"{path}: expected 'class' header column")
        classes = header[1:]
        rows = []
        for line in fh:
            line = line.rstrip("\n")
            if not line:
                continue
            parts = line.split(",")
            if len(parts) != len(classes) + 1:
                raise FormatError(f"{path}: ragged confusion row")
            try:
                rows.append([int(v) for v in parts[1:]])
            except ValueError as exc:
                raise FormatError(f"{path}: {exc}") from None
    if len(rows) != len(classes):
        raise FormatError(f"{path}: expected {len(classes)} rows, got {len(rows)}")
    return classes, np.array(rows, dtype=np.int64)
