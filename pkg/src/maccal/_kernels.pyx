# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernel backend.

Bit-for-bit twin of ``_kernels_py``: identical loop order and identical
floating-point expression trees. Compiled with -ffp-contract=off so the
compiler cannot fuse multiply-adds; -ffast-math is forbidden.
"""

from libc.math cimport exp

cdef double _U53 = 1.0 / 9007199254740992.0  # 2**-53
cdef unsigned long long PHI64 = 0x9E3779B97F4A7C15


cdef inline unsigned long long _mix64(unsigned long long x) nogil:
    x ^= x >> 30
    x = x * 0xBF58476D1CE4E5B9ULL
    x ^= x >> 27
    x = x * 0x94D049BB133111EBULL
    x ^= x >> 31
    return x


def mix64(x):
    """SplitMix64 finalizer; the per-draw hash of the counter RNG."""
    return _mix64(<unsigned long long> x)


def matmul(Py_ssize_t m, Py_ssize_t k, Py_ssize_t n,
           double[::1] a, double[::1] b, double[::1] out):
    """out(m*n, zero-filled) = a(m*k) @ b(k*n)."""
    cdef Py_ssize_t i, kk, j, ai, oi, bk
    cdef double aik
    for i in range(m):
        ai = i * k
        oi = i * n
        for kk in range(k):
            aik = a[ai + kk]
            bk = kk * n
            for j in range(n):
                out[oi + j] += aik * b[bk + j]


def matmul_tn(Py_ssize_t p, Py_ssize_t m, Py_ssize_t n,
              double[::1] a, double[::1] b, double[::1] out):
    """out(m*n, zero-filled) = a(p*m)^T @ b(p*n)."""
    cdef Py_ssize_t r, i, j, ar, br, oi
    cdef double ari
    for r in range(p):
        ar = r * m
        br = r * n
        for i in range(m):
            ari = a[ar + i]
            oi = i * n
            for j in range(n):
                out[oi + j] += ari * b[br + j]


def transpose(Py_ssize_t m, Py_ssize_t n, double[::1] a, double[::1] out):
    """out(n*m) = a(m*n)^T."""
    cdef Py_ssize_t i, j, ai
    for i in range(m):
        ai = i * n
        for j in range(n):
            out[j * m + i] = a[ai + j]


def softmax_rows(Py_ssize_t m, Py_ssize_t n, double[::1] a, double[::1] out):
    """Row-wise softmax with max subtraction."""
    cdef Py_ssize_t i, j, off
    cdef double mx, s, e, v
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


def relu(Py_ssize_t n, double[::1] a, double[::1] out):
    cdef Py_ssize_t i
    cdef double v
    for i in range(n):
        v = a[i]
        out[i] = v if v > 0.0 else 0.0


def relu_bwd(Py_ssize_t n, double[::1] pre, double[::1] g, double[::1] out):
    """out = g where pre > 0 else 0."""
    cdef Py_ssize_t i
    for i in range(n):
        out[i] = g[i] if pre[i] > 0.0 else 0.0


def hadamard(Py_ssize_t n, double[::1] a, double[::1] b, double[::1] out):
    cdef Py_ssize_t i
    for i in range(n):
        out[i] = a[i] * b[i]


def add(Py_ssize_t n, double[::1] a, double[::1] b, double[::1] out):
    cdef Py_ssize_t i
    for i in range(n):
        out[i] = a[i] + b[i]


def sub(Py_ssize_t n, double[::1] a, double[::1] b, double[::1] out):
    cdef Py_ssize_t i
    for i in range(n):
        out[i] = a[i] - b[i]


def scale(Py_ssize_t n, double[::1] a, double s, double[::1] out):
    cdef Py_ssize_t i
    for i in range(n):
        out[i] = a[i] * s


def add_bias(Py_ssize_t m, Py_ssize_t n, double[::1] a, double[::1] bias,
             double[::1] out):
    cdef Py_ssize_t i, j, off
    for i in range(m):
        off = i * n
        for j in range(n):
            out[off + j] = a[off + j] + bias[j]


def colsum(Py_ssize_t m, Py_ssize_t n, double[::1] a, double[::1] out):
    """out(n, zero-filled) = column sums of a(m*n)."""
    cdef Py_ssize_t i, j, off
    for i in range(m):
        off = i * n
        for j in range(n):
            out[j] += a[off + j]


def sgd_update(Py_ssize_t n, double[::1] w, double[::1] v, double[::1] g,
               double lr, double momentum, double weight_decay):
    """In-place momentum-SGD step: v = mu*v + (g + wd*w); w -= lr*v."""
    cdef Py_ssize_t i
    cdef double g2, vn
    for i in range(n):
        g2 = g[i] + weight_decay * w[i]
        vn = momentum * v[i] + g2
        v[i] = vn
        w[i] = w[i] - lr * vn


def bernoulli(Py_ssize_t n, unsigned long long key, unsigned long long base,
              double q, double[::1] out):
    """out[i] = 1.0 with probability q, from counter-based draws.

    Draw i consumes counter value base+i; the result depends only on
    (key, base+i, q), which is what makes mask sampling reproducible and
    order-independent across backends.
    """
    cdef Py_ssize_t i
    cdef unsigned long long x
    cdef double u
    for i in range(n):
        x = _mix64(key + (base + <unsigned long long> i + 1) * PHI64)
        u = <double> (x >> 11) * _U53
        out[i] = 1.0 if u < q else 0.0
