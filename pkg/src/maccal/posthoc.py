"""Temperature scaling: the post-hoc calibration baseline.

The temperature is fitted on validation NLL over T in [0.05, 10] with a
geometric coarse grid followed by golden-section refinement; T = 1 is
always a grid candidate, so the fitted temperature can never be worse
than doing nothing.
"""

from dataclasses import dataclass
from math import log, sqrt

from .errors import DomainError
from .matrix import Matrix, scale, softmax_rows

LOG_FLOOR = 1e-12
_INVPHI = (sqrt(5.0) - 1.0) / 2.0

T_MIN = 0.05
T_MAX = 10.0
GRID_POINTS = 60
REFINE_TOL = 1e-4


@dataclass
class Temperature:
    value: float
    hit_bound: bool
    val_nll: float


def apply_temperature(logits: Matrix, t: float) -> Matrix:
    """softmax(logits / T); argmax-preserving for any T > 0."""
    if t <= 0.0:
        raise DomainError(f"temperature must be > 0, got {t}")
    return softmax_rows(scale(logits, 1.0 / t))


def _nll(logits: Matrix, labels, t: float) -> float:
    probs = apply_temperature(logits, t)
    k = probs.cols
    total = 0.0
    for i, y in enumerate(labels):
        p = probs.data[i * k + y]
        total -= log(p if p > LOG_FLOOR else LOG_FLOOR)
    return total / probs.rows


def fit_temperature(val_logits: Matrix, val_labels,
                    lo: float = T_MIN, hi: float = T_MAX,
                    tol: float = REFINE_TOL) -> Temperature:
    """Minimize validation NLL of softmax(logits / T) over T in [lo, hi]."""
    if val_logits.rows == 0:
        raise DomainError("empty validation set")
    if len(val_labels) != val_logits.rows:
        raise DomainError("label count does not match logit rows")

    def f(t):
        return _nll(val_logits, val_labels, t)

    # geometric coarse grid, with the identity temperature forced in
    ratio = (hi / lo) ** (1.0 / (GRID_POINTS - 1))
    grid = sorted({lo * ratio ** i for i in range(GRID_POINTS)} | {1.0, hi})
    values = [f(t) for t in grid]
    best = min(range(len(grid)), key=lambda i: (values[i], grid[i]))

    # golden-section refinement inside the bracket around the best point
    a = grid[best - 1] if best > 0 else grid[0]
    b = grid[best + 1] if best < len(grid) - 1 else grid[-1]
    c = b - _INVPHI * (b - a)
    d = a + _INVPHI * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - _INVPHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INVPHI * (b - a)
            fd = f(d)
    t_ref = (a + b) / 2.0
    nll_ref = f(t_ref)

    # T = 1 is in the search set: never return something worse
    candidates = [(nll_ref, t_ref), (values[best], grid[best]), (f(1.0), 1.0)]
    best_nll, best_t = min(candidates)
    hit = best_t <= lo + 2 * tol or best_t >= hi - 2 * tol
    return Temperature(value=best_t, hit_bound=hit, val_nll=best_nll)
