"""Dense row-major matrices and the kernel operations over them.

This is the numeric substrate for everything else: 64-bit floats only, a
flat ``array('d')`` buffer, and thin wrappers that validate shapes before
dispatching to the active kernel backend (compiled or pure Python).
All operations return new matrices except ``sgd_step``, which updates its
weight and velocity buffers in place.
"""

from array import array

from .backend import kernels
from .errors import DomainError, ShapeError
from .rng import RngStream


def _buffer(n: int) -> array:
    return array("d", bytes(8 * n))


class Matrix:
    """Row-major dense matrix of doubles."""

    __slots__ = ("rows", "cols", "data")

    def __init__(self, rows: int, cols: int, data: array):
        if rows < 0 or cols < 0:
            raise ShapeError(f"negative dimensions ({rows}, {cols})")
        if len(data) != rows * cols:
            raise ShapeError(
                f"buffer of length {len(data)} cannot hold a {rows}x{cols} matrix")
        self.rows = rows
        self.cols = cols
        self.data = data

    @classmethod
    def zeros(cls, rows: int, cols: int) -> "Matrix":
        return cls(rows, cols, _buffer(rows * cols))

    @classmethod
    def full(cls, rows: int, cols: int, value: float) -> "Matrix":
        return cls(rows, cols, array("d", [value]) * (rows * cols))

    @classmethod
    def from_rows(cls, rows_of_values) -> "Matrix":
        rows = len(rows_of_values)
        cols = len(rows_of_values[0]) if rows else 0
        flat = array("d")
        for row in rows_of_values:
            if len(row) != cols:
                raise ShapeError("ragged rows")
            flat.extend(row)
        return cls(rows, cols, flat)

    @classmethod
    def from_flat(cls, rows: int, cols: int, values) -> "Matrix":
        return cls(rows, cols, array("d", values))

    @property
    def shape(self) -> tuple[int, int]:
        return self.rows, self.cols

    def get(self, r: int, c: int) -> float:
        return self.data[r * self.cols + c]

    def set(self, r: int, c: int, value: float) -> None:
        self.data[r * self.cols + c] = value

    def row(self, r: int) -> array:
        return self.data[r * self.cols:(r + 1) * self.cols]

    def take_rows(self, indices) -> "Matrix":
        out = array("d")
        for r in indices:
            out.extend(self.data[r * self.cols:(r + 1) * self.cols])
        return Matrix(len(indices), self.cols, out)

    def copy(self) -> "Matrix":
        return Matrix(self.rows, self.cols, array("d", self.data))

    def tolist(self) -> list[list[float]]:
        return [list(self.row(r)) for r in range(self.rows)]

    def __eq__(self, other) -> bool:
        return (isinstance(other, Matrix) and self.shape == other.shape
                and self.data == other.data)

    def __repr__(self) -> str:
        return f"Matrix({self.rows}x{self.cols})"


def _same_shape(a: Matrix, b: Matrix, op: str) -> None:
    if a.shape != b.shape:
        raise ShapeError(f"{op}: shape mismatch {a.shape} vs {b.shape}")


def matmul(a: Matrix, b: Matrix) -> Matrix:
    if a.cols != b.rows:
        raise ShapeError(f"matmul: {a.shape} @ {b.shape}")
    out = Matrix.zeros(a.rows, b.cols)
    kernels.matmul(a.rows, a.cols, b.cols, a.data, b.data, out.data)
    return out


def matmul_tn(a: Matrix, b: Matrix) -> Matrix:
    """a^T @ b without materializing the transpose."""
    if a.rows != b.rows:
        raise ShapeError(f"matmul_tn: {a.shape} vs {b.shape}")
    out = Matrix.zeros(a.cols, b.cols)
    kernels.matmul_tn(a.rows, a.cols, b.cols, a.data, b.data, out.data)
    return out


def transpose(a: Matrix) -> Matrix:
    out = Matrix.zeros(a.cols, a.rows)
    kernels.transpose(a.rows, a.cols, a.data, out.data)
    return out


def softmax_rows(logits: Matrix) -> Matrix:
    out = Matrix.zeros(logits.rows, logits.cols)
    kernels.softmax_rows(logits.rows, logits.cols, logits.data, out.data)
    return out


def hadamard(a: Matrix, b: Matrix) -> Matrix:
    _same_shape(a, b, "hadamard")
    out = Matrix.zeros(a.rows, a.cols)
    kernels.hadamard(len(a.data), a.data, b.data, out.data)
    return out


def add(a: Matrix, b: Matrix) -> Matrix:
    _same_shape(a, b, "add")
    out = Matrix.zeros(a.rows, a.cols)
    kernels.add(len(a.data), a.data, b.data, out.data)
    return out


def sub(a: Matrix, b: Matrix) -> Matrix:
    _same_shape(a, b, "sub")
    out = Matrix.zeros(a.rows, a.cols)
    kernels.sub(len(a.data), a.data, b.data, out.data)
    return out


def scale(a: Matrix, s: float) -> Matrix:
    out = Matrix.zeros(a.rows, a.cols)
    kernels.scale(len(a.data), a.data, s, out.data)
    return out


def add_bias(a: Matrix, bias: Matrix) -> Matrix:
    if bias.rows != 1 or bias.cols != a.cols:
        raise ShapeError(f"add_bias: bias {bias.shape} for matrix {a.shape}")
    out = Matrix.zeros(a.rows, a.cols)
    kernels.add_bias(a.rows, a.cols, a.data, bias.data, out.data)
    return out


def colsum(a: Matrix) -> Matrix:
    out = Matrix.zeros(1, a.cols)
    kernels.colsum(a.rows, a.cols, a.data, out.data)
    return out


def relu(a: Matrix) -> Matrix:
    out = Matrix.zeros(a.rows, a.cols)
    kernels.relu(len(a.data), a.data, out.data)
    return out


def relu_grad(pre: Matrix, g: Matrix) -> Matrix:
    """Gradient through the rectifier: g where pre > 0, else 0."""
    _same_shape(pre, g, "relu_grad")
    out = Matrix.zeros(pre.rows, pre.cols)
    kernels.relu_bwd(len(pre.data), pre.data, g.data, out.data)
    return out


def sgd_step(w: Matrix, velocity: Matrix, grad: Matrix, lr: float,
             momentum: float = 0.0, weight_decay: float = 0.0) -> None:
    """In-place momentum-SGD update of w (and its velocity buffer)."""
    _same_shape(w, grad, "sgd_step")
    _same_shape(w, velocity, "sgd_step")
    kernels.sgd_update(len(w.data), w.data, velocity.data, grad.data,
                       lr, momentum, weight_decay)


def bernoulli_matrix(rows: int, cols: int, q: float, rng: RngStream) -> Matrix:
    """0/1 matrix with independent P(entry = 1) = q."""
    if not 0.0 <= q <= 1.0:
        raise DomainError(f"retention probability must be in [0, 1], got {q}")
    out = Matrix.zeros(rows, cols)
    key, base = rng.take_block(rows * cols)
    kernels.bernoulli(rows * cols, key, base, q, out.data)
    return out


def argmax_rows(a: Matrix) -> list[int]:
    """Index of the first maximum in each row."""
    out = []
    data, n = a.data, a.cols
    for i in range(a.rows):
        off = i * n
        best, arg = data[off], 0
        for j in range(1, n):
            v = off + j
            if data[v] > best:
                best = data[v]
                arg = j
        out.append(arg)
    return out


def row_max(a: Matrix) -> list[float]:
    """Maximum value of each row."""
    out = []
    data, n = a.data, a.cols
    for i in range(a.rows):
        off = i * n
        best = data[off]
        for j in range(1, n):
            v = data[off + j]
            if v > best:
                best = v
        out.append(best)
    return out
