"""Weighted sequence couples, elements and linear maps between couples.

A couple here is the pair ``{l_p0(w0), l_p1(w1)}`` on the index set
``{0, ..., n-1}`` where ``||a||_{l_p(w)} = (sum (w_i |a_i|)^p)^(1/p)``.
Both spaces live in the same coordinate space ``R^n``, so the sum and the
intersection of the couple are ``R^n`` as sets and differ only in norm.

The exponent ``p = inf`` is always handled by an explicit branch; no code
path ever raises a number to an infinite power.
"""

import enum
import math
from dataclasses import dataclass

import numpy as np

from .exceptions import (
    DimensionMismatchError,
    ExponentRangeError,
    NonpositiveWeightError,
)

INF = math.inf


class Side(enum.IntEnum):
    """Selects ``(w0, p0)`` or ``(w1, p1)`` of a couple."""

    ZERO = 0
    ONE = 1


def conjugate_exponent(p):
    """Return ``p'`` with ``1/p + 1/p' = 1``."""
    if p == 1:
        return INF
    if p == INF:
        return 1.0
    return p / (p - 1.0)


def check_exponent(p, name="p"):
    try:
        p = float(p)
    except (TypeError, ValueError):
        raise ExponentRangeError(f"exponent {name} must be a number or inf, got {p!r}") from None
    if math.isnan(p) or p < 1:
        raise ExponentRangeError(f"exponent {name}={p!r} out of range [1, inf]")
    return p


def weighted_norm(x, w, p):
    """``(sum (w_i |x_i|)^p)^(1/p)``, the maximum when ``p`` is infinite."""
    y = np.abs(np.asarray(x, dtype=float)) * w
    if y.size == 0:
        return 0.0
    if p == INF:
        return float(np.max(y))
    if p == 1:
        return float(np.sum(y))
    m = float(np.max(y))
    if m == 0.0:
        return 0.0
    # scaled to keep (.)^p away from overflow
    return m * float(np.sum((y / m) ** p)) ** (1.0 / p)


def _as_weights(w, n, name):
    w = np.array(w, dtype=float).reshape(-1)
    if w.shape[0] != n:
        raise DimensionMismatchError(f"{name} has length {w.shape[0]}, expected n={n}")
    if not np.all(np.isfinite(w)):
        raise NonpositiveWeightError(f"{name} contains a non-finite weight")
    if np.any(w <= 0):
        raise NonpositiveWeightError(f"nonpositive weight in {name}")
    w.setflags(write=False)
    return w


@dataclass(frozen=True, eq=False)
class Couple:
    """The couple ``{l_p0(w0), l_p1(w1)}`` on ``n`` coordinates.

    Build instances with :func:`make_couple`, which validates the data.
    """

    n: int
    w0: np.ndarray
    w1: np.ndarray
    p0: float
    p1: float

    def __post_init__(self):
        n = self.n
        if isinstance(n, bool) or int(n) != n or n < 1:
            raise DimensionMismatchError(f"n must be a positive integer, got {n!r}")
        object.__setattr__(self, "n", int(n))
        object.__setattr__(self, "w0", _as_weights(self.w0, self.n, "w0"))
        object.__setattr__(self, "w1", _as_weights(self.w1, self.n, "w1"))
        object.__setattr__(self, "p0", check_exponent(self.p0, "p0"))
        object.__setattr__(self, "p1", check_exponent(self.p1, "p1"))

    def weights(self, side):
        return self.w0 if Side(side) is Side.ZERO else self.w1

    def exponent(self, side):
        return self.p0 if Side(side) is Side.ZERO else self.p1

    def norm(self, side, a):
        return side_norm(self, side, a)

    def restrict(self, keep):
        """The couple on the coordinates ``keep`` with the same weights."""
        keep = np.asarray(keep, dtype=int)
        return Couple(len(keep), self.w0[keep], self.w1[keep], self.p0, self.p1)

    @property
    def is_l1_linf(self):
        """True for the unweighted ``{l_1, l_inf}`` couple."""
        return (
            self.p0 == 1
            and self.p1 == INF
            and bool(np.all(self.w0 == 1.0))
            and bool(np.all(self.w1 == 1.0))
        )

    @property
    def is_piecewise_linear(self):
        """True when K(., a) is piecewise linear for every a (p0, p1 in {1, inf})."""
        return self.p0 in (1.0, INF) and self.p1 in (1.0, INF)

    def __eq__(self, other):
        if not isinstance(other, Couple):
            return NotImplemented
        return (
            self.n == other.n
            and self.p0 == other.p0
            and self.p1 == other.p1
            and np.array_equal(self.w0, other.w0)
            and np.array_equal(self.w1, other.w1)
        )

    def __hash__(self):
        return hash((self.n, self.p0, self.p1, self.w0.tobytes(), self.w1.tobytes()))

    def __repr__(self):
        return (
            f"Couple(n={self.n}, w0={self.w0.tolist()}, w1={self.w1.tolist()}, "
            f"p0={self.p0}, p1={self.p1})"
        )


def make_couple(n, w0, w1, p0, p1):
    """Validated constructor for :class:`Couple`.

    Raises :class:`DimensionMismatchError`, :class:`NonpositiveWeightError` or
    :class:`ExponentRangeError` depending on which check fails.
    """
    return Couple(n, w0, w1, p0, p1)


def l1_linf(n):
    """The unweighted couple ``{l_1, l_inf}`` on ``n`` coordinates."""
    return Couple(n, np.ones(n), np.ones(n), 1, INF)


def check_element(couple, a, name="a"):
    """Return ``a`` as a finite float vector of length ``couple.n``."""
    a = np.asarray(a, dtype=float)
    if a.ndim != 1 or a.shape[0] != couple.n:
        raise DimensionMismatchError(
            f"{name} has shape {a.shape}, expected ({couple.n},)"
        )
    if not np.all(np.isfinite(a)):
        raise ValueError(f"{name} contains non-finite entries")
    return a


def side_norm(couple, side, a):
    """Norm of ``a`` in ``A_0`` or ``A_1``."""
    a = check_element(couple, a)
    return weighted_norm(a, couple.weights(side), couple.exponent(side))


def dual_side_norm(couple, side, y):
    """Norm of the functional ``y`` in the dual of ``A_0`` or ``A_1``.

    The dual of ``l_p(w)`` is ``l_p'(1/w)`` under the pairing ``sum y_i a_i``.
    """
    y = check_element(couple, y, "y")
    return weighted_norm(y, 1.0 / couple.weights(side), conjugate_exponent(couple.exponent(side)))


def dual_couple(couple):
    """The couple of dual spaces ``{l_p0'(1/w0), l_p1'(1/w1)}``."""
    return Couple(
        couple.n,
        1.0 / couple.w0,
        1.0 / couple.w1,
        conjugate_exponent(couple.p0),
        conjugate_exponent(couple.p1),
    )


@dataclass(frozen=True, eq=False)
class LinearMap:
    """A dense matrix ``T: source -> target`` of shape ``(target.n, source.n)``."""

    matrix: np.ndarray
    source: Couple
    target: Couple

    def __post_init__(self):
        m = np.array(self.matrix, dtype=float)
        if m.ndim != 2 or m.shape != (self.target.n, self.source.n):
            raise DimensionMismatchError(
                f"matrix shape {m.shape} does not match ({self.target.n}, {self.source.n})"
            )
        if not np.all(np.isfinite(m)):
            raise ValueError("matrix contains non-finite entries")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    def __call__(self, a):
        return self.matrix @ check_element(self.source, a)

    def __matmul__(self, other):
        """Composition ``self o other``."""
        if not isinstance(other, LinearMap):
            return NotImplemented
        if other.target != self.source:
            raise DimensionMismatchError("maps are not composable")
        return LinearMap(self.matrix @ other.matrix, other.source, self.target)

    @classmethod
    def identity(cls, couple):
        return cls(np.eye(couple.n), couple, couple)
