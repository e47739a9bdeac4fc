"""Feature extractor, classifier heads, and the masked head machinery.

The extractor is a small rectified MLP (zero depth means identity). Heads
carry no bias terms: a linear head is a single d x K weight matrix, the
bottleneck head is d x h followed by h x K with a rectifier in between.
The masked head wraps either kind with per-weight binary masks applied
elementwise before every product, and its backward pass multiplies the
raw weight gradient by the same mask when gradient restriction is on, so
masked coordinates provably cannot move in a step.

Gradients are hand-derived; the finite-difference tests in the suite are
the independent check.
"""

import hashlib
import json
from array import array
from dataclasses import dataclass
from math import sqrt

from .errors import DomainError, ShapeError, StateError
from .matrix import (Matrix, add_bias, bernoulli_matrix, colsum, hadamard,
                     matmul, matmul_tn, relu, relu_grad, scale, sgd_step, sub,
                     transpose)
from .rng import RngStream

HEAD_KINDS = ("linear", "bottleneck")
BOTTLENECK_ACTIVATIONS = ("relu", "identity")
CHECKPOINT_SCHEMA = 1


def _uniform_matrix(rows: int, cols: int, bound: float, rng: RngStream) -> Matrix:
    out = Matrix.zeros(rows, cols)
    for i in range(rows * cols):
        out.data[i] = rng.uniform_symmetric(bound)
    return out


def _hash_buffers(buffers) -> str:
    h = hashlib.sha256()
    for buf in buffers:
        h.update(buf.tobytes())
    return h.hexdigest()


@dataclass
class FeatureExtractor:
    """Rectified MLP mapping inputs to d-dimensional features."""

    input_dim: int
    weights: list
    biases: list
    frozen: bool = False

    @property
    def output_dim(self) -> int:
        return self.weights[-1].cols if self.weights else self.input_dim

    @property
    def depth(self) -> int:
        return len(self.weights)

    def params_hash(self) -> str:
        return _hash_buffers([w.data for w in self.weights]
                             + [b.data for b in self.biases])

    def forward(self, x: Matrix) -> Matrix:
        if x.cols != self.input_dim:
            raise ShapeError(f"input width {x.cols}, extractor expects {self.input_dim}")
        h = x
        for w, b in zip(self.weights, self.biases):
            h = relu(add_bias(matmul(h, w), b))
        return h

    def forward_cache(self, x: Matrix):
        """Forward pass keeping (layer input, pre-activation) per layer."""
        if x.cols != self.input_dim:
            raise ShapeError(f"input width {x.cols}, extractor expects {self.input_dim}")
        h = x
        cache = []
        for w, b in zip(self.weights, self.biases):
            pre = add_bias(matmul(h, w), b)
            cache.append((h, pre))
            h = relu(pre)
        return h, cache

    def backward(self, cache, dz: Matrix):
        """Gradients for every layer given d(loss)/d(features)."""
        dws = [None] * self.depth
        dbs = [None] * self.depth
        dh = dz
        for layer in range(self.depth - 1, -1, -1):
            h_in, pre = cache[layer]
            dpre = relu_grad(pre, dh)
            dws[layer] = matmul_tn(h_in, dpre)
            dbs[layer] = colsum(dpre)
            if layer > 0:
                dh = matmul(dpre, transpose(self.weights[layer]))
        return dws, dbs


def init_extractor(input_dim: int, widths, rng: RngStream) -> FeatureExtractor:
    """Uniform +-1/sqrt(fan_in) weights, zero biases; empty widths -> identity."""
    weights, biases = [], []
    fan_in = input_dim
    for i, width in enumerate(widths):
        bound = 1.0 / sqrt(fan_in)
        weights.append(_uniform_matrix(fan_in, width, bound, rng.derive(i)))
        biases.append(Matrix.zeros(1, width))
        fan_in = width
    return FeatureExtractor(input_dim, weights, biases)


def forward_features(fe: FeatureExtractor, x: Matrix) -> Matrix:
    return fe.forward(x)


@dataclass
class LinearHead:
    """Single weight matrix d x K, no bias."""

    w: Matrix

    @property
    def weight_matrices(self) -> list:
        return [self.w]


@dataclass
class BottleneckHead:
    """Two-layer head d -> h -> K, no biases."""

    w1: Matrix
    w2: Matrix
    activation: str = "relu"

    @property
    def hidden(self) -> int:
        return self.w1.cols

    @property
    def weight_matrices(self) -> list:
        return [self.w1, self.w2]


def init_linear_head(d: int, k: int, rng: RngStream) -> LinearHead:
    return LinearHead(_uniform_matrix(d, k, 1.0 / sqrt(d), rng))


def default_hidden(d: int, k: int) -> int:
    return max(2 * k, d // 2)


@dataclass
class MaskedHead:
    """A head plus one binary mask per weight matrix and the retention q."""

    head: object
    masks: list | None = None
    q: float | None = None

    @property
    def weight_matrices(self) -> list:
        return self.head.weight_matrices

    def params_hash(self) -> str:
        return _hash_buffers([w.data for w in self.weight_matrices])

    def set_masks_ones(self) -> None:
        self.masks = [Matrix.full(w.rows, w.cols, 1.0) for w in self.weight_matrices]

    def sample_masks(self, q: float, rng: RngStream, scope: str = "all") -> None:
        """Draw fresh Bernoulli(q) masks; 'final-only' scope leaves every
        matrix except the last unmasked."""
        from .matrix import bernoulli_matrix

        if not 0.0 <= q <= 1.0:
            raise DomainError(f"retention probability must be in [0, 1], got {q}")
        mats = self.weight_matrices
        masks = []
        for i, w in enumerate(mats):
            if scope == "final-only" and i < len(mats) - 1:
                masks.append(Matrix.full(w.rows, w.cols, 1.0))
            else:
                masks.append(bernoulli_matrix(w.rows, w.cols, q, rng))
        self.masks = masks
        self.q = q


def reinit_head(d: int, k: int, kind: str, hidden: int | None,
                rng: RngStream, activation: str = "relu") -> MaskedHead:
    """Fresh randomly initialized head with all-ones masks and unset q."""
    if kind not in HEAD_KINDS:
        raise DomainError(f"head kind must be one of {HEAD_KINDS}, got {kind!r}")
    if activation not in BOTTLENECK_ACTIVATIONS:
        raise DomainError(f"activation must be one of {BOTTLENECK_ACTIVATIONS}")
    if kind == "linear":
        head = LinearHead(_uniform_matrix(d, k, 1.0 / sqrt(d), rng.derive(0)))
    else:
        h = default_hidden(d, k) if hidden is None else hidden
        if h < k:
            raise DomainError(f"bottleneck width {h} below class count {k}")
        head = BottleneckHead(
            w1=_uniform_matrix(d, h, 1.0 / sqrt(d), rng.derive(0)),
            w2=_uniform_matrix(h, k, 1.0 / sqrt(h), rng.derive(1)),
            activation=activation,
        )
    mh = MaskedHead(head)
    mh.set_masks_ones()
    mh.q = None
    return mh


def _check_masks(mh: MaskedHead) -> None:
    if mh.masks is None:
        raise StateError("masks are not set on this head")
    mats = mh.weight_matrices
    if len(mh.masks) != len(mats):
        raise StateError("mask count does not match weight matrices")
    for m, w in zip(mh.masks, mats):
        if m.shape != w.shape:
            raise ShapeError(f"mask {m.shape} for weight {w.shape}")


def masked_forward_cache(mh: MaskedHead, z: Matrix):
    """Masked logits plus the intermediates the backward pass needs."""
    _check_masks(mh)
    head = mh.head
    if isinstance(head, LinearHead):
        wm = hadamard(mh.masks[0], head.w)
        return matmul(z, wm), (z,)
    wm1 = hadamard(mh.masks[0], head.w1)
    wm2 = hadamard(mh.masks[1], head.w2)
    pre = matmul(z, wm1)
    hid = relu(pre) if head.activation == "relu" else pre
    return matmul(hid, wm2), (z, pre, hid, wm2)


def masked_logits(mh: MaskedHead, z: Matrix) -> Matrix:
    logits, _ = masked_forward_cache(mh, z)
    return logits


def masked_backward_from_cache(mh: MaskedHead, cache, dlogits: Matrix,
                               restrict: bool = True):
    """Weight gradients from a cached masked forward.

    With ``restrict`` the gradients are multiplied by the masks (masked
    coordinates get exactly zero); without it the raw gradient of the
    masked forward is applied to the unmasked weights, which is the
    straight-through ablation.
    """
    head = mh.head
    if isinstance(head, LinearHead):
        (z,) = cache
        dw = matmul_tn(z, dlogits)
        if restrict:
            dw = hadamard(mh.masks[0], dw)
        return [dw]
    z, pre, hid, wm2 = cache
    dw2 = matmul_tn(hid, dlogits)
    dhid = matmul(dlogits, transpose(wm2))
    dpre = relu_grad(pre, dhid) if head.activation == "relu" else dhid
    dw1 = matmul_tn(z, dpre)
    if restrict:
        dw1 = hadamard(mh.masks[0], dw1)
        dw2 = hadamard(mh.masks[1], dw2)
    return [dw1, dw2]


def masked_backward(mh: MaskedHead, z: Matrix, probs: Matrix,
                    targets: Matrix, restrict: bool = True):
    """Gradients of the masked mean-CE loss w.r.t. every weight matrix.

    ``targets`` are one-hot or soft rows; d(loss)/d(logits) is
    (probs - targets) / batch_size.
    """
    if probs.shape != targets.shape:
        raise ShapeError(f"probs {probs.shape} vs targets {targets.shape}")
    from .matrix import scale, sub

    _, cache = masked_forward_cache(mh, z)
    dlogits = scale(sub(probs, targets), 1.0 / probs.rows)
    return masked_backward_from_cache(mh, cache, dlogits, restrict)


def apply_update(mh: MaskedHead, grads, lr: float, velocities=None,
                 momentum: float = 0.0, weight_decay: float = 0.0) -> None:
    """SGD step over every weight matrix of the head."""
    if lr < 0.0:
        raise DomainError(f"learning rate must be >= 0, got {lr}")
    mats = mh.weight_matrices
    if len(grads) != len(mats):
        raise ShapeError("gradient count does not match weight matrices")
    if velocities is None:
        velocities = [Matrix.zeros(w.rows, w.cols) for w in mats]
    for w, v, g in zip(mats, velocities, grads):
        sgd_step(w, v, g, lr, momentum, weight_decay)


# --- checkpoint I/O ---------------------------------------------------------

def _matrix_to_json(m: Matrix) -> dict:
    return {"rows": m.rows, "cols": m.cols, "data": list(m.data)}


def _matrix_from_json(obj) -> Matrix:
    return Matrix(obj["rows"], obj["cols"], array("d", obj["data"]))


def save_checkpoint(path, fe: FeatureExtractor, head, *, num_classes: int,
                    seed: int, stage: str, extra: dict | None = None) -> None:
    """Versioned JSON checkpoint with full-precision weights."""
    if isinstance(head, MaskedHead):
        inner = head.head
    else:
        inner = head
    if isinstance(inner, LinearHead):
        head_obj = {"kind": "linear", "w": _matrix_to_json(inner.w)}
    else:
        head_obj = {"kind": "bottleneck", "w1": _matrix_to_json(inner.w1),
                    "w2": _matrix_to_json(inner.w2), "activation": inner.activation}
    obj = {
        "schema_version": CHECKPOINT_SCHEMA,
        "stage": stage,
        "seed": seed,
        "num_classes": num_classes,
        "extractor": {
            "input_dim": fe.input_dim,
            "frozen": fe.frozen,
            "weights": [_matrix_to_json(w) for w in fe.weights],
            "biases": [_matrix_to_json(b) for b in fe.biases],
        },
        "head": head_obj,
        "extra": extra or {},
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, sort_keys=True, indent=1)
        fh.write("\n")


def load_checkpoint(path):
    """Returns (extractor, head, meta dict)."""
    with open(path, "r", encoding="utf-8") as fh:
        obj = json.load(fh)
    if obj.get("schema_version") != CHECKPOINT_SCHEMA:
        raise DomainError(f"{path}: unsupported checkpoint schema "
                          f"{obj.get('schema_version')!r}")
    ex = obj["extractor"]
    fe = FeatureExtractor(
        input_dim=ex["input_dim"],
        weights=[_matrix_from_json(w) for w in ex["weights"]],
        biases=[_matrix_from_json(b) for b in ex["biases"]],
        frozen=ex["frozen"],
    )
    hd = obj["head"]
    if hd["kind"] == "linear":
        head = LinearHead(_matrix_from_json(hd["w"]))
    else:
        head = BottleneckHead(_matrix_from_json(hd["w1"]), _matrix_from_json(hd["w2"]),
                              hd.get("activation", "relu"))
    meta = {"stage": obj["stage"], "seed": obj["seed"],
            "num_classes": obj["num_classes"], "extra": obj.get("extra", {})}
    return fe, head, meta
