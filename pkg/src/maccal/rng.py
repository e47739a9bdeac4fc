"""Counter-based random streams.

A stream is a pure function of (seed, stream id, counter): draw ``i`` is
the SplitMix64 hash of ``key + (i+1)*PHI64`` where ``key`` encodes the
seed and stream id. This gives the reproducibility guarantees the rest of
the package leans on:

* identical seed -> identical sequence, on every platform and backend;
* streams derived for different ids never share state;
* bulk draws (Bernoulli masks) can be delegated to the kernel backend by
  handing it (key, counter) and advancing the counter afterwards.

Distribution samplers (normal, gamma, beta) run in Python only; they are
off the hot path.
"""

from math import cos, log, pi, sin, sqrt

from .backend import kernels
from .errors import DomainError

MASK64 = 0xFFFFFFFFFFFFFFFF
PHI64 = 0x9E3779B97F4A7C15
_STREAM_SALT = 0xD1B54A32D192ED03
_U53 = 1.0 / 9007199254740992.0

mix64 = kernels.mix64


def stream_key(seed: int, stream: int) -> int:
    return mix64(mix64(seed & MASK64) ^ mix64((stream * _STREAM_SALT + 1) & MASK64))


class RngStream:
    """One independent, seedable draw sequence."""

    __slots__ = ("seed", "stream", "key", "counter", "_spare")

    def __init__(self, seed: int, stream: int = 0):
        self.seed = seed & MASK64
        self.stream = stream & MASK64
        self.key = stream_key(seed, stream)
        self.counter = 0
        self._spare = None

    def derive(self, child: int) -> "RngStream":
        """Independent child stream; deterministic in (self.stream, child)."""
        return RngStream(self.seed, mix64(self.stream ^ ((child + 1) * _STREAM_SALT & MASK64)))

    def take_block(self, n: int) -> tuple[int, int]:
        """Reserve n counter slots for a bulk kernel fill; returns (key, base)."""
        base = self.counter
        self.counter += n
        return self.key, base

    def next_u64(self) -> int:
        self.counter += 1
        return mix64((self.key + self.counter * PHI64) & MASK64)

    def uniform(self) -> float:
        """Uniform draw in [0, 1)."""
        return (self.next_u64() >> 11) * _U53

    def uniform_open(self) -> float:
        """Uniform draw in (0, 1]; safe inside log()."""
        return ((self.next_u64() >> 11) + 1) * _U53

    def uniform_symmetric(self, bound: float) -> float:
        """Uniform draw in [-bound, bound)."""
        return (2.0 * self.uniform() - 1.0) * bound

    def normal(self) -> float:
        """Standard normal via Box-Muller; caches the paired draw."""
        if self._spare is not None:
            z = self._spare
            self._spare = None
            return z
        u1 = self.uniform_open()
        u2 = self.uniform()
        r = sqrt(-2.0 * log(u1))
        t = 2.0 * pi * u2
        self._spare = r * sin(t)
        return r * cos(t)

    def gamma(self, shape: float) -> float:
        """Gamma(shape, 1) via Marsaglia-Tsang, boosted for shape < 1."""
        if shape <= 0.0:
            raise DomainError(f"gamma shape must be > 0, got {shape}")
        if shape < 1.0:
            return self.gamma(shape + 1.0) * self.uniform_open() ** (1.0 / shape)
        d = shape - 1.0 / 3.0
        c = 1.0 / sqrt(9.0 * d)
        while True:
            x = self.normal()
            v = 1.0 + c * x
            if v <= 0.0:
                continue
            v = v * v * v
            u = self.uniform_open()
            if u < 1.0 - 0.0331 * x * x * x * x:
                return d * v
            if log(u) < 0.5 * x * x + d * (1.0 - v + log(v)):
                return d * v

    def beta(self, a: float, b: float) -> float:
        """Beta(a, b) as a ratio of two Gamma draws."""
        x = self.gamma(a)
        y = self.gamma(b)
        return x / (x + y)

    def randbelow(self, n: int) -> int:
        """Unbiased integer in [0, n) by rejection."""
        if n <= 0:
            raise DomainError(f"randbelow needs n >= 1, got {n}")
        limit = MASK64 + 1 - ((MASK64 + 1) % n)
        while True:
            v = self.next_u64()
            if v < limit:
                return v % n

    def permutation(self, n: int) -> list[int]:
        """Fisher-Yates permutation of range(n)."""
        idx = list(range(n))
        for i in range(n - 1, 0, -1):
            j = self.randbelow(i + 1)
            idx[i], idx[j] = idx[j], idx[i]
        return idx
