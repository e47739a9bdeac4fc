"""Training objectives: cross-entropy, focal loss, label smoothing.

All losses consume row-stochastic probability matrices (softmax output)
and hard integer labels; cross-entropy additionally accepts soft target
rows, which is how mixup pairs and smoothed labels are fed through.
Logs are floored at 1e-12 so a confidence-1.0 row cannot produce -inf;
floored events are counted in the optional diagnostics object.
"""

from dataclasses import dataclass, field
from math import log

from .errors import DomainError, ShapeError
from .matrix import Matrix, scale, sub

LOG_FLOOR = 1e-12

LOSS_KINDS = ("ce", "focal", "flsd", "label_smooth")

# FLSD schedule: hard samples (low true-class probability) get the larger
# exponent, easy ones the smaller.
FLSD_THRESHOLD = 0.2
FLSD_GAMMA_LO = 5.0
FLSD_GAMMA_HI = 3.0


@dataclass(frozen=True)
class LossKind:
    """Loss selector: tag plus the parameters the tagged loss uses."""

    kind: str = "ce"
    focal_gamma: float = 3.0
    epsilon: float = 0.05

    def __post_init__(self):
        if self.kind not in LOSS_KINDS:
            raise DomainError(f"unknown loss kind {self.kind!r}")
        if self.focal_gamma < 0.0:
            raise DomainError(f"focal gamma must be >= 0, got {self.focal_gamma}")
        if not 0.0 <= self.epsilon < 1.0:
            raise DomainError(f"smoothing epsilon must be in [0, 1), got {self.epsilon}")


@dataclass
class LossDiagnostics:
    """Counters for numerical events worth reporting."""

    floored_logs: int = 0


def _floored_log(p: float, diag: LossDiagnostics | None) -> float:
    if p < LOG_FLOOR:
        if diag is not None:
            diag.floored_logs += 1
        p = LOG_FLOOR
    return log(p)


def onehot(labels, num_classes: int) -> Matrix:
    out = Matrix.zeros(len(labels), num_classes)
    for i, y in enumerate(labels):
        if not 0 <= y < num_classes:
            raise DomainError(f"label {y} outside [0, {num_classes})")
        out.data[i * num_classes + y] = 1.0
    return out


def label_smooth_targets(labels, num_classes: int, epsilon: float) -> Matrix:
    """(1 - eps) on the true class, eps/(K-1) spread over the others."""
    if not 0.0 <= epsilon < 1.0:
        raise DomainError(f"epsilon must be in [0, 1), got {epsilon}")
    if epsilon == 0.0:
        return onehot(labels, num_classes)
    off = epsilon / (num_classes - 1)
    out = Matrix.full(len(labels), num_classes, off)
    for i, y in enumerate(labels):
        if not 0 <= y < num_classes:
            raise DomainError(f"label {y} outside [0, {num_classes})")
        out.data[i * num_classes + y] = 1.0 - epsilon
    return out


def cross_entropy(probs: Matrix, targets, diag: LossDiagnostics | None = None) -> float:
    """Mean negative log-likelihood.

    ``targets`` is either a sequence of integer labels or a Matrix of soft
    target rows (mixup pairs, smoothed labels).
    """
    n, k = probs.rows, probs.cols
    if n == 0:
        raise DomainError("empty batch")
    total = 0.0
    if isinstance(targets, Matrix):
        if targets.shape != probs.shape:
            raise ShapeError(f"targets {targets.shape} vs probs {probs.shape}")
        for i in range(n):
            off = i * k
            for j in range(k):
                t = targets.data[off + j]
                if t != 0.0:
                    total -= t * _floored_log(probs.data[off + j], diag)
    else:
        if len(targets) != n:
            raise ShapeError(f"{len(targets)} labels for {n} rows")
        for i, y in enumerate(targets):
            if not 0 <= y < k:
                raise DomainError(f"label {y} outside [0, {k})")
            total -= _floored_log(probs.data[i * k + y], diag)
    return total / n


def cross_entropy_grad(probs: Matrix, targets: Matrix) -> Matrix:
    """d(mean CE)/d(logits) = (probs - targets) / batch_size."""
    return scale(sub(probs, targets), 1.0 / probs.rows)


def _focal_row_terms(p: float, gamma_f: float, diag) -> tuple[float, float]:
    """Per-sample focal loss and the coefficient of (onehot - probs) in its
    logit gradient."""
    u = 1.0 - p
    logp = _floored_log(p, diag)
    loss = -(u ** gamma_f) * logp
    if gamma_f == 0.0:
        coeff = -1.0
    elif u <= 0.0:
        coeff = 0.0
    else:
        coeff = gamma_f * p * u ** (gamma_f - 1.0) * logp - u ** gamma_f
    return loss, coeff


def _resolve_gamma(kind: LossKind, p: float) -> float:
    if kind.kind == "flsd":
        return FLSD_GAMMA_LO if p < FLSD_THRESHOLD else FLSD_GAMMA_HI
    return kind.focal_gamma


def focal_loss(probs: Matrix, labels, gamma_f: float,
               diag: LossDiagnostics | None = None) -> float:
    """Mean focal loss -(1 - p_y)^gamma * log p_y."""
    if gamma_f < 0.0:
        raise DomainError(f"focal gamma must be >= 0, got {gamma_f}")
    n, k = probs.rows, probs.cols
    if n == 0:
        raise DomainError("empty batch")
    total = 0.0
    for i, y in enumerate(labels):
        loss, _ = _focal_row_terms(probs.data[i * k + y], gamma_f, diag)
        total += loss
    return total / n


def focal_grad(probs: Matrix, labels, gamma_f: float) -> Matrix:
    """d(mean focal)/d(logits)."""
    n, k = probs.rows, probs.cols
    out = Matrix.zeros(n, k)
    inv = 1.0 / n
    for i, y in enumerate(labels):
        off = i * k
        _, coeff = _focal_row_terms(probs.data[off + y], gamma_f, None)
        for j in range(k):
            d = (1.0 if j == y else 0.0) - probs.data[off + j]
            out.data[off + j] = coeff * d * inv
    return out


def loss_and_grad(kind: LossKind, probs: Matrix, labels,
                  diag: LossDiagnostics | None = None) -> tuple[float, Matrix]:
    """Batch loss value and its logit gradient for hard labels."""
    k = probs.cols
    if kind.kind == "ce":
        targets = onehot(labels, k)
        return cross_entropy(probs, labels, diag), cross_entropy_grad(probs, targets)
    if kind.kind == "label_smooth":
        targets = label_smooth_targets(labels, k, kind.epsilon)
        return cross_entropy(probs, targets, diag), cross_entropy_grad(probs, targets)
    if kind.kind in ("focal", "flsd"):
        n = probs.rows
        out = Matrix.zeros(n, k)
        inv = 1.0 / n
        total = 0.0
        for i, y in enumerate(labels):
            off = i * k
            g = _resolve_gamma(kind, probs.data[off + y])
            loss, coeff = _focal_row_terms(probs.data[off + y], g, diag)
            total += loss
            for j in range(k):
                d = (1.0 if j == y else 0.0) - probs.data[off + j]
                out.data[off + j] = coeff * d * inv
        return total / n, out
    raise DomainError(f"unknown loss kind {kind.kind!r}")


def mixup_loss_and_grad(kind: LossKind, probs: Matrix, label_pairs, lambdas,
                        diag: LossDiagnostics | None = None) -> tuple[float, Matrix]:
    """Mixup-wrapped loss: per row, lam * L(y_i) + (1 - lam) * L(y_j).

    Works for any base loss because the wrap is linear in the per-sample
    loss and gradient.
    """
    n, k = probs.rows, probs.cols
    if len(label_pairs) != n or len(lambdas) != n:
        raise ShapeError("mixup pair/lambda count does not match batch")
    if kind.kind in ("ce", "label_smooth"):
        # linear in the target row: fold the pair into one soft target
        labels_a = [p[0] for p in label_pairs]
        labels_b = [p[1] for p in label_pairs]
        if kind.kind == "label_smooth":
            ta = label_smooth_targets(labels_a, k, kind.epsilon)
            tb = label_smooth_targets(labels_b, k, kind.epsilon)
        else:
            ta = onehot(labels_a, k)
            tb = onehot(labels_b, k)
        targets = Matrix.zeros(n, k)
        for i, lam in enumerate(lambdas):
            off = i * k
            for j in range(k):
                targets.data[off + j] = lam * ta.data[off + j] + (1.0 - lam) * tb.data[off + j]
        return cross_entropy(probs, targets, diag), cross_entropy_grad(probs, targets)
    # focal-family: combine per-sample losses and gradients directly
    out = Matrix.zeros(n, k)
    inv = 1.0 / n
    total = 0.0
    for i, ((ya, yb), lam) in enumerate(zip(label_pairs, lambdas)):
        off = i * k
        for y, w in ((ya, lam), (yb, 1.0 - lam)):
            g = _resolve_gamma(kind, probs.data[off + y])
            loss, coeff = _focal_row_terms(probs.data[off + y], g, diag)
            total += w * loss
            for j in range(k):
                d = (1.0 if j == y else 0.0) - probs.data[off + j]
                out.data[off + j] += w * coeff * d * inv
    return total / n, out
