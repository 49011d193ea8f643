"""scikit-learn style wrappers.

Rows of ``X`` are elements of a couple.  When no couple is given the
``{l1, l_inf}`` couple of matching length is used.
"""

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .couple import l1_linf
from .exceptions import DimensionMismatchError
from .interp import KMethodParams, k_space_norm
from .kfun import DEFAULT_TOL, decreasing_rearrangement, k_values
from .orbit import hlp_construct


def _resolve_couple(couple, n_features):
    if couple is None:
        return l1_linf(n_features)
    if couple.n != n_features:
        raise DimensionMismatchError(
            f"couple has dimension {couple.n}, X has {n_features} columns"
        )
    return couple


class DecreasingRearrangement(TransformerMixin, BaseEstimator):
    """Replace each row by its absolute values sorted in nonincreasing order."""

    def fit(self, X, y=None):
        X = check_array(X)
        self.n_features_in_ = X.shape[1]
        return self

    def transform(self, X):
        check_is_fitted(self, "n_features_in_")
        X = check_array(X)
        return np.array([decreasing_rearrangement(row) for row in X])


class KFunctionalTransformer(TransformerMixin, BaseEstimator):
    """Map each row ``a`` to ``(K_p(t, a))`` over a grid of ``t``.

    Parameters
    ----------
    couple : Couple or None
        Defaults to the ``{l1, l_inf}`` couple of the data width.
    ts : array-like or None
        Parameters ``t > 0``; defaults to ``2^k`` for ``k = -4..4``.
    p : float
        Exponent of the K-functional.
    """

    def __init__(self, couple=None, ts=None, p=1, tol=DEFAULT_TOL):
        self.couple = couple
        self.ts = ts
        self.p = p
        self.tol = tol

    def fit(self, X, y=None):
        X = check_array(X)
        self.n_features_in_ = X.shape[1]
        self.couple_ = _resolve_couple(self.couple, X.shape[1])
        ts = 2.0 ** np.arange(-4, 5) if self.ts is None else self.ts
        self.ts_ = np.asarray(ts, dtype=float).reshape(-1)
        if np.any(self.ts_ <= 0):
            raise ValueError("t must be positive")
        return self

    def transform(self, X):
        check_is_fitted(self, ["couple_", "ts_"])
        X = check_array(X)
        return np.array(
            [k_values(self.couple_, row, self.ts_, self.p, self.tol) for row in X]
        )


class KSpaceNormTransformer(TransformerMixin, BaseEstimator):
    """The real-method ``(theta, q)`` norm of each row, as a single column."""

    def __init__(self, couple=None, theta=0.5, q=1.0):
        self.couple = couple
        self.theta = theta
        self.q = q

    def fit(self, X, y=None):
        X = check_array(X)
        self.n_features_in_ = X.shape[1]
        self.couple_ = _resolve_couple(self.couple, X.shape[1])
        self.params_ = KMethodParams(self.theta, self.q)
        return self

    def transform(self, X):
        check_is_fitted(self, ["couple_", "params_"])
        X = check_array(X)
        return np.array([[k_space_norm(self.couple_, row, self.params_)] for row in X])


class OrbitMap(BaseEstimator):
    """Learn a norm-one map of ``{l1, l_inf}`` sending ``a`` to ``b``.

    ``fit(a, b)`` builds the map; ``predict(X)`` applies it to each row.
    """

    def fit(self, X, y):
        a = np.asarray(X, dtype=float).reshape(-1)
        b = np.asarray(y, dtype=float).reshape(-1)
        self.map_ = hlp_construct(a, b)
        self.matrix_ = self.map_.matrix
        self.n_features_in_ = a.size
        return self

    def predict(self, X):
        check_is_fitted(self, "matrix_")
        X = np.atleast_2d(check_array(X, ensure_2d=False))
        if X.shape[1] != self.n_features_in_:
            raise DimensionMismatchError("X has the wrong number of columns")
        return X @ self.matrix_.T
