"""Synthetic datasets: Gaussian blobs, corruption, mixup, splits, CSV I/O.

Blobs place one unit-sphere center per class (deterministic in the seed)
and draw isotropic Gaussian features around it; ``spread`` is the single
overlap knob, so irreducible uncertainty is tunable. Corruption adds
feature noise with sigma proportional to severity. File format is plain
CSV with header ``label,f0,...`` and repr-printed floats, which makes
round-trips lossless.
"""

from array import array
from dataclasses import dataclass
from math import sqrt

from .errors import DomainError, ShapeError
from .matrix import Matrix
from .rng import RngStream

# fixed sub-stream ids so each consumer of a seed is independent
_CENTER_STREAM = 101
_SAMPLE_STREAM = 102
_CORRUPT_STREAM = 103
_SPLIT_STREAM = 104

SEVERITY_SIGMA_FACTOR = 0.25  # sigma_base = 0.25 * feature std


@dataclass
class Dataset:
    """Feature matrix with integer class labels."""

    features: Matrix
    labels: list
    num_classes: int

    def __post_init__(self):
        if self.features.rows != len(self.labels):
            raise ShapeError(
                f"{len(self.labels)} labels for {self.features.rows} feature rows")
        for y in self.labels:
            if not 0 <= y < self.num_classes:
                raise DomainError(f"label {y} outside [0, {self.num_classes})")

    @property
    def size(self) -> int:
        return self.features.rows

    @property
    def dim(self) -> int:
        return self.features.cols

    @property
    def class_counts(self) -> list:
        counts = [0] * self.num_classes
        for y in self.labels:
            counts[y] += 1
        return counts

    def subset(self, indices) -> "Dataset":
        return Dataset(self.features.take_rows(indices),
                       [self.labels[i] for i in indices], self.num_classes)


@dataclass
class Split:
    train: Dataset
    val: Dataset
    test: Dataset


@dataclass
class MixupBatch:
    """Convex feature combinations plus the (pair, lambda) soft targets."""

    mixed_features: Matrix
    label_pairs: list
    lambdas: list
    alpha: float


def class_centers(num_classes: int, dim: int, seed: int) -> Matrix:
    """Unit-norm class centers, deterministic in the seed."""
    rng = RngStream(seed, _CENTER_STREAM)
    centers = Matrix.zeros(num_classes, dim)
    for k in range(num_classes):
        vec = [rng.normal() for _ in range(dim)]
        norm = sqrt(sum(v * v for v in vec))
        off = k * dim
        for j in range(dim):
            centers.data[off + j] = vec[j] / norm
    return centers


def gen_blobs(num_classes: int, dim: int, per_class: int, spread: float,
              seed: int) -> Dataset:
    """Isotropic Gaussian blob per class around a unit-sphere center."""
    if num_classes < 2:
        raise DomainError(f"need at least 2 classes, got {num_classes}")
    if dim < 2:
        raise DomainError(f"need at least 2 dimensions, got {dim}")
    if per_class < 1:
        raise DomainError(f"need at least 1 sample per class, got {per_class}")
    if spread <= 0.0:
        raise DomainError(f"spread must be > 0, got {spread}")
    centers = class_centers(num_classes, dim, seed)
    flat = array("d", bytes(8 * num_classes * per_class * dim))
    labels = []
    sample_root = RngStream(seed, _SAMPLE_STREAM)
    for k in range(num_classes):
        rng = sample_root.derive(k)
        coff = k * dim
        for i in range(per_class):
            roff = (k * per_class + i) * dim
            for j in range(dim):
                flat[roff + j] = centers.data[coff + j] + spread * rng.normal()
        labels.extend([k] * per_class)
    return Dataset(Matrix(num_classes * per_class, dim, flat), labels, num_classes)


def estimate_bayes_accuracy(num_classes: int, dim: int, spread: float,
                            seed: int, samples: int = 20000) -> float:
    """Monte-Carlo Bayes accuracy of the blob generative model.

    With equal priors and equal isotropic covariances the Bayes rule is
    nearest-center classification.
    """
    centers = class_centers(num_classes, dim, seed)
    rng = RngStream(seed, _SAMPLE_STREAM).derive(999)
    hits = 0
    for i in range(samples):
        k = i % num_classes
        x = [centers.data[k * dim + j] + spread * rng.normal() for j in range(dim)]
        best, arg = None, -1
        for c in range(num_classes):
            d2 = 0.0
            off = c * dim
            for j in range(dim):
                t = x[j] - centers.data[off + j]
                d2 += t * t
            if best is None or d2 < best:
                best, arg = d2, c
        hits += 1 if arg == k else 0
    return hits / samples


def feature_std(data: Dataset) -> float:
    """Population standard deviation pooled over every feature entry."""
    buf = data.features.data
    n = len(buf)
    mean = sum(buf) / n
    var = sum((v - mean) ** 2 for v in buf) / n
    return sqrt(var)


def corrupt(data: Dataset, severity: int, seed: int) -> Dataset:
    """Additive Gaussian feature noise with sigma = severity * sigma_base."""
    if not 1 <= severity <= 5:
        raise DomainError(f"severity must be in 1..5, got {severity}")
    sigma = severity * SEVERITY_SIGMA_FACTOR * feature_std(data)
    rng = RngStream(seed, _CORRUPT_STREAM)
    src = data.features.data
    flat = array("d", src)
    for i in range(len(flat)):
        flat[i] = src[i] + sigma * rng.normal()
    return Dataset(Matrix(data.features.rows, data.features.cols, flat),
                   list(data.labels), data.num_classes)


def mixup_batch(features_a: Matrix, labels_a, features_b: Matrix, labels_b,
                alpha: float, rng: RngStream) -> MixupBatch:
    """Per-row lambda ~ Beta(alpha, alpha); rows mix as lam*a + (1-lam)*b."""
    if alpha <= 0.0:
        raise DomainError(f"mixup alpha must be > 0, got {alpha}")
    if features_a.shape != features_b.shape:
        raise ShapeError(f"batch shapes differ: {features_a.shape} vs {features_b.shape}")
    if len(labels_a) != features_a.rows or len(labels_b) != features_b.rows:
        raise ShapeError("label count does not match batch size")
    n, d = features_a.shape
    lambdas = [rng.beta(alpha, alpha) for _ in range(n)]
    mixed = Matrix.zeros(n, d)
    a, b, out = features_a.data, features_b.data, mixed.data
    for i, lam in enumerate(lambdas):
        off = i * d
        inv = 1.0 - lam
        for j in range(d):
            out[off + j] = lam * a[off + j] + inv * b[off + j]
    pairs = list(zip(labels_a, labels_b))
    return MixupBatch(mixed, pairs, lambdas, alpha)


def split(data: Dataset, fractions, seed: int) -> Split:
    """Deterministic shuffled partition into train/val/test."""
    if len(fractions) != 3:
        raise DomainError("fractions must be (train, val, test)")
    if any(f < 0.0 for f in fractions) or abs(sum(fractions) - 1.0) > 1e-9:
        raise DomainError(f"fractions must be non-negative and sum to 1, got {fractions}")
    perm = RngStream(seed, _SPLIT_STREAM).permutation(data.size)
    n_train = int(data.size * fractions[0])
    n_val = int(data.size * fractions[1])
    return Split(
        train=data.subset(perm[:n_train]),
        val=data.subset(perm[n_train:n_train + n_val]),
        test=data.subset(perm[n_train + n_val:]),
    )


def save_csv(data: Dataset, path) -> None:
    """Write ``label,f0,...,f{d-1}`` rows; floats printed with repr."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        header = "label," + ",".join(f"f{j}" for j in range(data.dim))
        fh.write(header + "\n")
        buf = data.features.data
        d = data.dim
        for i, y in enumerate(data.labels):
            off = i * d
            row = ",".join(repr(buf[off + j]) for j in range(d))
            fh.write(f"{y},{row}\n")


def load_csv(path, num_classes: int | None = None) -> Dataset:
    """Inverse of save_csv; labels lossless, features parse back exactly."""
    labels = []
    flat = array("d")
    dim = None
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().strip()
        if not header.startswith("label,"):
            raise DomainError(f"{path}: not a dataset CSV (bad header)")
        dim = header.count(",")
        for line in fh:
            line = line.strip()
            if not line:
                continue
            parts = line.split(",")
            if len(parts) != dim + 1:
                raise DomainError(f"{path}: row with {len(parts)} fields, expected {dim + 1}")
            labels.append(int(parts[0]))
            flat.extend(float(p) for p in parts[1:])
    k = num_classes if num_classes is not None else (max(labels) + 1 if labels else 0)
    return Dataset(Matrix(len(labels), dim, flat), labels, k)
