"""The ``{C^0, C^1}`` couple on a uniform one-dimensional grid.

Functions are sampled at ``x_i = i h`` for ``i = 0..N``.  All suprema over
pairs of points become finite maxima over the grid, so every quantity here
is exact up to floating rounding.
"""

import math
from dataclasses import dataclass

import numpy as np

from .couple import INF, Couple
from .curves import least_concave_majorant
from .kfun import k_equal_exponent


@dataclass(frozen=True, eq=False)
class GridFunction:
    """Samples ``values[i] = f(i * h)``, ``i = 0..N`` with ``N >= 1``."""

    h: float
    values: np.ndarray

    def __post_init__(self):
        h = float(self.h)
        if not (h > 0) or not math.isfinite(h):
            raise ValueError(f"grid step must be positive, got {self.h!r}")
        v = np.array(self.values, dtype=float).reshape(-1)
        if v.size < 2:
            raise ValueError("a grid function needs at least two samples")
        if not np.all(np.isfinite(v)):
            raise ValueError("grid samples must be finite")
        v.setflags(write=False)
        object.__setattr__(self, "h", h)
        object.__setattr__(self, "values", v)

    @property
    def n_steps(self):
        return self.values.size - 1

    @property
    def x(self):
        return self.h * np.arange(self.values.size)

    @classmethod
    def from_callable(cls, fn, h, n_steps):
        x = h * np.arange(n_steps + 1)
        return cls(h, np.asarray([fn(xi) for xi in x], dtype=float))


def _as_grid(f):
    return f if isinstance(f, GridFunction) else GridFunction(1.0, f)


def lag_maxima(f):
    """``m[k] = max_i |f(x_{i+k}) - f(x_i)|`` for ``k = 0..N``."""
    f = _as_grid(f)
    v = f.values
    out = np.zeros(v.size)
    for k in range(1, v.size):
        out[k] = np.max(np.abs(v[k:] - v[:-k]))
    return out


def _max_lag(f, t):
    # tolerate t/h landing a hair below an integer
    return min(f.n_steps, int(math.floor(t / f.h + 1e-9)))


def modulus_of_continuity(f, t):
    """``Omega(t, f) = max |f(x) - f(y)|`` over grid pairs with ``|x - y| <= t``."""
    f = _as_grid(f)
    t = float(t)
    if t < 0 or math.isnan(t):
        raise ValueError(f"t must be nonnegative, got {t!r}")
    k = _max_lag(f, t)
    if k == 0:
        return 0.0
    return float(np.max(lag_maxima(f)[: k + 1]))


def modulus_samples(f):
    """Lags ``k h`` and ``Omega(k h)`` for ``k = 1..N`` (a running maximum)."""
    f = _as_grid(f)
    m = np.maximum.accumulate(lag_maxima(f))
    ks = np.arange(1, f.values.size)
    return ks * f.h, m[1:]


def k_c0c1(f, t):
    """``max |f(x) - f(y)| / (2 + |x - y| / t)`` over all grid pairs."""
    f = _as_grid(f)
    t = float(t)
    if not t > 0:
        raise ValueError(f"t must be positive, got {t!r}")
    m = lag_maxima(f)
    ks = np.arange(m.size)
    return float(np.max(m / (2.0 + ks * f.h / t)))


def modulus_majorant(f):
    """Least concave majorant of ``Omega(., f)`` over the achievable distances."""
    d, om = modulus_samples(f)
    return least_concave_majorant(np.column_stack([d, om]))


def k_eq24_check(f, t):
    """Compare the pair-difference formula with half the concave majorant of ``Omega``.

    Returns
    -------
    lhs : float
        ``k_c0c1(f, t)``.
    rhs : float
        ``Omega*(t) / 2``.
    ratio : float
        ``lhs / rhs``; reported as 1 for a constant function.
    """
    f = _as_grid(f)
    lhs = k_c0c1(f, t)
    rhs = 0.5 * float(modulus_majorant(f)(t))
    if rhs == 0.0:
        return lhs, rhs, 1.0
    return lhs, rhs, lhs / rhs


def difference_embed(f):
    """The antisymmetric array ``b[i, j] = f(x_i) - f(x_j)``."""
    v = _as_grid(f).values
    return v[:, None] - v[None, :]


def pair_couple(f):
    """``{l_inf(1/2), l_inf(1/|x - y|)}`` on the off-diagonal pairs of the grid.

    Returns the couple and the index arrays ``(i, j)`` of the pairs.
    """
    f = _as_grid(f)
    size = f.values.size
    i, j = np.nonzero(~np.eye(size, dtype=bool))
    dist = np.abs(i - j) * f.h
    couple = Couple(i.size, np.full(i.size, 0.5), 1.0 / dist, INF, INF)
    return couple, (i, j)


def embedded_k(f, t):
    """``K_inf(t, b)`` of the embedded differences in the pair couple.

    Uses the equal-exponent closed form with ``p = inf``; on the grid this
    is the same finite maximum as :func:`k_c0c1`.
    """
    couple, (i, j) = pair_couple(f)
    b = difference_embed(f)[i, j]
    return k_equal_exponent(couple, b, t)
