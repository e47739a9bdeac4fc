"""Pure-Python kernel backend.

Every function here has a compiled twin in ``_kernels.pyx``. The two
backends must stay bit-identical: same loop order, same floating-point
expression trees, no reassociation, no fused multiply-add. Any change to
an arithmetic sequence in one file must be mirrored in the other.

Buffers are flat row-major ``array('d')`` objects; ``out`` arguments that
act as accumulators (matmul, matmul_tn, colsum) must arrive zero-filled.
"""

from math import exp

MASK64 = 0xFFFFFFFFFFFFFFFF
PHI64 = 0x9E3779B97F4A7C15
_U53 = 1.0 / 9007199254740992.0  # 2**-53


def mix64(x):
    """SplitMix64 finalizer; the per-draw hash of the counter RNG."""
    x &= MASK64
    x ^= x >> 30
    x = (x * 0xBF58476D1CE4E5B9) & MASK64
    x ^= x >> 27
    x = (x * 0x94D049BB133111EB) & MASK64
    x ^= x >> 31
    return x


def matmul(m, k, n, a, b, out):
    """out(m*n, zero-filled) = a(m*k) @ b(k*n)."""
    for i in range(m):
        ai = i * k
        oi = i * n
        for kk in range(k):
            aik = a[ai + kk]
            bk = kk * n
            for j in range(n):
                out[oi + j] += aik * b[bk + j]


def matmul_tn(p, m, n, a, b, out):
    """out(m*n, zero-filled) = a(p*m)^T @ b(p*n)."""
    for r in range(p):
        ar = r * m
        br = r * n
        for i in range(m):
            ari = a[ar + i]
            oi = i * n
            for j in range(n):
                out[oi + j] += ari * b[br + j]


def transpose(m, n, a, out):
    """out(n*m) = a(m*n)^T."""
    for i in range(m):
        ai = i * n
        for j in range(n):
            out[j * m + i] = a[ai + j]


def softmax_rows(m, n, a, out):
    """Row-wise softmax with max subtraction."""
    for i in range(m):
        off = i * n
        mx = a[off]
        for j in range(1, n):
            v = a[off + j]
            if v > mx:
                mx = v
        s = 0.0
        for j in range(n):
            e = exp(a[off + j] - mx)
            out[off + j] = e
            s = s + e
        for j in range(n):
            out[off + j] = out[off + j] / s


def relu(n, a, out):
    for i in range(n):
        v = a[i]
        out[i] = v if v > 0.0 else 0.0


def relu_bwd(n, pre, g, out):
    """out = g where pre > 0 else 0."""
    for i in range(n):
        out[i] = g[i] if pre[i] > 0.0 else 0.0


def hadamard(n, a, b, out):
    for i in range(n):
        out[i] = a[i] * b[i]


def add(n, a, b, out):
    for i in range(n):
        out[i] = a[i] + b[i]


def sub(n, a, b, out):
    for i in range(n):
        out[i] = a[i] - b[i]


def scale(n, a, s, out):
    for i in range(n):
        out[i] = a[i] * s


def add_bias(m, n, a, bias, out):
    for i in range(m):
        off = i * n
        for j in range(n):
            out[off + j] = a[off + j] + bias[j]


def colsum(m, n, a, out):
    """out(n, zero-filled) = column sums of a(m*n)."""
    for i in range(m):
        off = i * n
        for j in range(n):
            out[j] += a[off + j]


def sgd_update(n, w, v, g, lr, momentum, weight_decay):
    """In-place momentum-SGD step: v = mu*v + (g + wd*w); w -= lr*v."""
    for i in range(n):
        g2 = g[i] + weight_decay * w[i]
        vn = momentum * v[i] + g2
        v[i] = vn
        w[i] = w[i] - lr * vn


def bernoulli(n, key, base, q, out):
    """out[i] = 1.0 with probability q, from counter-based draws.

    Draw i consumes counter value base+i; the result depends only on
    (key, base+i, q), which is what makes mask sampling reproducible and
    order-independent across backends.
    """
    for i in range(n):
        x = (key + (base + i + 1) * PHI64) & MASK64
        x ^= x >> 30
        x = (x * 0xBF58476D1CE4E5B9) & MASK64
        x ^= x >> 27
        x = (x * 0x94D049BB133111EB) & MASK64
        x ^= x >> 31
        u = (x >> 11) * _U53
        out[i] = 1.0 if u < q else 0.0
