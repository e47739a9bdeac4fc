"""Calibration and discrimination metrics.

ECE bins confidences into M equal-width intervals [(m-1)/M, m/M), with
confidence exactly 1.0 assigned to the top bin; AECE sorts by confidence
and cuts M equal-count groups; MCE is the largest per-bin gap over the
equal-width binning. AUROC is the Mann-Whitney pair statistic with ties
worth one half, FPR95 the false-positive rate at the loosest threshold
that still reaches 95% true-positive rate. Scores for OOD detection are
max-softmax confidences, in-distribution expected to score higher.
"""

from bisect import bisect_left, bisect_right
from dataclasses import dataclass
from math import ceil, log

from .errors import DomainError, ShapeError
from .matrix import Matrix, argmax_rows, row_max, softmax_rows

LOG_FLOOR = 1e-12


@dataclass
class PredictionSet:
    """Probabilities plus labels, with the derived per-sample confidence
    (max probability) and prediction (argmax)."""

    probs: Matrix
    labels: list
    confidences: list
    predictions: list

    @property
    def size(self) -> int:
        return self.probs.rows


def prediction_set(probs: Matrix, labels) -> PredictionSet:
    if probs.rows != len(labels):
        raise ShapeError(f"{len(labels)} labels for {probs.rows} prediction rows")
    return PredictionSet(probs, list(labels), row_max(probs), argmax_rows(probs))


def prediction_set_from_logits(logits: Matrix, labels) -> PredictionSet:
    return prediction_set(softmax_rows(logits), labels)


@dataclass
class ReliabilityBin:
    lo: float
    hi: float
    count: int
    avg_confidence: float
    avg_accuracy: float

    @property
    def gap(self) -> float:
        return self.avg_confidence - self.avg_accuracy


@dataclass
class CalibrationReport:
    accuracy: float
    avg_confidence: float
    ece: float
    aece: float
    mce: float
    nll: float
    num_bins: int
    bins: list

    def to_dict(self) -> dict:
        return {
            "accuracy": self.accuracy,
            "avg_confidence": self.avg_confidence,
            "ece": self.ece,
            "aece": self.aece,
            "mce": self.mce,
            "nll": self.nll,
            "num_bins": self.num_bins,
            "bins": [
                {
                    "lo": b.lo,
                    "hi": b.hi,
                    "count": b.count,
                    "avg_conf": b.avg_confidence,
                    "avg_acc": b.avg_accuracy,
                }
                for b in self.bins
            ],
        }


@dataclass
class OodScores:
    in_scores: list
    out_scores: list
    auroc: float
    fpr95: float


def accuracy(preds: PredictionSet) -> float:
    if preds.size == 0:
        raise DomainError("empty prediction set")
    hits = sum(1 for p, y in zip(preds.predictions, preds.labels) if p == y)
    return hits / preds.size


def avg_confidence(preds: PredictionSet) -> float:
    if preds.size == 0:
        raise DomainError("empty prediction set")
    return sum(preds.confidences) / preds.size


def nll_metric(preds: PredictionSet) -> float:
    """Mean negative log-likelihood of the true class (log floored)."""
    if preds.size == 0:
        raise DomainError("empty prediction set")
    k = preds.probs.cols
    total = 0.0
    for i, y in enumerate(preds.labels):
        p = preds.probs.data[i * k + y]
        total -= log(p if p > LOG_FLOOR else LOG_FLOOR)
    return total / preds.size


def _equal_width_bins(preds: PredictionSet, num_bins: int):
    if num_bins < 1:
        raise DomainError(f"need at least one bin, got {num_bins}")
    if preds.size == 0:
        raise DomainError("empty prediction set")
    counts = [0] * num_bins
    conf_sums = [0.0] * num_bins
    hit_sums = [0] * num_bins
    for conf, pred, label in zip(preds.confidences, preds.predictions, preds.labels):
        b = int(conf * num_bins)
        if b >= num_bins:  # confidence exactly 1.0 closes the top bin
            b = num_bins - 1
        counts[b] += 1
        conf_sums[b] += conf
        hit_sums[b] += 1 if pred == label else 0
    bins = []
    for m in range(num_bins):
        c = counts[m]
        bins.append(ReliabilityBin(
            lo=m / num_bins,
            hi=(m + 1) / num_bins,
            count=c,
            avg_confidence=conf_sums[m] / c if c else 0.0,
            avg_accuracy=hit_sums[m] / c if c else 0.0,
        ))
    return bins


def ece(preds: PredictionSet, num_bins: int = 15):
    """Expected calibration error and its reliability table."""
    bins = _equal_width_bins(preds, num_bins)
    n = preds.size
    total = 0.0
    for b in bins:
        if b.count:
            total += (b.count / n) * abs(b.avg_accuracy - b.avg_confidence)
    return total, bins


def aece(preds: PredictionSet, num_bins: int = 15):
    """Adaptive (equal-count bins) calibration error and its table."""
    n = preds.size
    if num_bins < 1:
        raise DomainError(f"need at least one bin, got {num_bins}")
    if n < num_bins:
        raise DomainError(f"{n} samples cannot fill {num_bins} equal-count bins")
    # stable sort on (confidence, original index)
    order = sorted(range(n), key=lambda i: preds.confidences[i])
    base, extra = divmod(n, num_bins)
    bins = []
    total = 0.0
    start = 0
    for m in range(num_bins):
        size = base + (1 if m < extra else 0)
        group = order[start:start + size]
        start += size
        conf_sum = sum(preds.confidences[i] for i in group)
        hits = sum(1 for i in group if preds.predictions[i] == preds.labels[i])
        avg_conf = conf_sum / size
        avg_acc = hits / size
        bins.append(ReliabilityBin(
            lo=preds.confidences[group[0]],
            hi=preds.confidences[group[-1]],
            count=size,
            avg_confidence=avg_conf,
            avg_accuracy=avg_acc,
        ))
        total += (size / n) * abs(avg_acc - avg_conf)
    return total, bins


def mce(preds: PredictionSet, num_bins: int = 15) -> float:
    """Maximum calibration error over non-empty equal-width bins."""
    bins = _equal_width_bins(preds, num_bins)
    worst = 0.0
    for b in bins:
        if b.count:
            gap = abs(b.avg_accuracy - b.avg_confidence)
            if gap > worst:
                worst = gap
    return worst


def auroc(in_scores, out_scores) -> float:
    """Fraction of (in, out) pairs with in > out; ties count one half."""
    if not in_scores or not out_scores:
        raise DomainError("both score sets must be non-empty")
    out_sorted = sorted(out_scores)
    n_out = len(out_sorted)
    gt = 0
    ties = 0
    for s in in_scores:
        lo = bisect_left(out_sorted, s)
        hi = bisect_right(out_sorted, s)
        gt += lo
        ties += hi - lo
    return (2 * gt + ties) / (2 * len(in_scores) * n_out)


def fpr95(in_scores, out_scores) -> float:
    """False-positive rate at the largest threshold with TPR >= 0.95.

    TPR and FPR both use >= threshold; the qualifying threshold is the
    k-th largest in-score with k = ceil(0.95 * #in).
    """
    if not in_scores or not out_scores:
        raise DomainError("both score sets must be non-empty")
    n_in = len(in_scores)
    k = ceil(0.95 * n_in)
    tau = sorted(in_scores, reverse=True)[k - 1]
    false_pos = sum(1 for s in out_scores if s >= tau)
    return false_pos / len(out_scores)


def ood_scores(in_preds: PredictionSet, out_probs: Matrix) -> OodScores:
    """Max-softmax OOD scoring: in-distribution should score higher."""
    in_s = list(in_preds.confidences)
    out_s = row_max(out_probs)
    return OodScores(in_s, out_s, auroc(in_s, out_s), fpr95(in_s, out_s))


def calibration_report(preds: PredictionSet, num_bins: int = 15) -> CalibrationReport:
    ece_val, bins = ece(preds, num_bins)
    aece_val, _ = aece(preds, num_bins)
    return CalibrationReport(
        accuracy=accuracy(preds),
        avg_confidence=avg_confidence(preds),
        ece=ece_val,
        aece=aece_val,
        mce=mce(preds, num_bins),
        nll=nll_metric(preds),
        num_bins=num_bins,
        bins=bins,
    )


def reliability_rows(bins) -> list:
    """Rows for the reliability CSV: bin_lo,bin_hi,count,avg_conf,avg_acc,gap."""
    return [
        (b.lo, b.hi, b.count, b.avg_confidence, b.avg_accuracy, b.gap)
        for b in bins
    ]
