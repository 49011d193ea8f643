"""Mapping norms, subcouples, quotients, retracts, extension and duality.

Norms of maps come in two flavours.  The l-norm is the larger of the two
side operator norms.  The b-norm is the best constant in
``K(t, Ta) <= C K(t, a)``; only certified lower bounds are produced for it.
"""

import importlib.util
import itertools
import sys
import warnings
from collections import namedtuple
from dataclasses import dataclass

import numpy as np

from .couple import (
    INF,
    Couple,
    LinearMap,
    check_element,
    conjugate_exponent,
    dual_side_norm,
    weighted_norm,
)
from .exceptions import (
    ConvergenceError,
    DimensionMismatchError,
    PreconditionError,
)
from .curves import ConcaveCurve, compare_curves
from .kfun import DEFAULT_TOL, _solve_magnitudes, k_curve, k_equal_exponent, k_functional

_ENUM_LIMIT = 16


def _lazy_import(name):
    if name in sys.modules:
        return sys.modules[name]
    spec = importlib.util.find_spec(name)
    loader = importlib.util.LazyLoader(spec.loader)
    spec.loader = loader
    module = importlib.util.module_from_spec(spec)
    sys.modules[name] = module
    loader.exec_module(module)
    return module


# cvxpy is slow to import and only the convex-program routes need it
cp = _lazy_import("cvxpy")


class NormBound(namedtuple("NormBound", "lower upper")):
    """An interval ``[lower, upper]`` containing an operator norm."""

    __slots__ = ()

    def __float__(self):
        return float(self.upper)

    @property
    def exact(self):
        return self.lower == self.upper


# operator norms


def _pnorm_rows(m, p):
    if p == INF:
        return np.max(np.abs(m), axis=1)
    if p == 1:
        return np.sum(np.abs(m), axis=1)
    return np.array([weighted_norm(r, 1.0, p) for r in m])


def _sign_vectors(k):
    for signs in itertools.product((1.0, -1.0), repeat=k - 1):
        yield np.array((1.0,) + signs)


def _boyd_lower(m, p, q, iters=200):
    """Power iteration for ``||m||_{p -> q}``; every iterate is a valid lower bound."""
    pd = conjugate_exponent(p)
    best = 0.0

    def dual_map(y, r):
        # the norming functional of y in l_r, as a vector in l_r'
        ny = weighted_norm(y, 1.0, r)
        if ny == 0.0:
            return y
        return np.sign(y) * (np.abs(y) / ny) ** (r - 1.0)

    starts = [np.ones(m.shape[1])] + [np.eye(m.shape[1])[j] for j in range(m.shape[1])]
    u, s, vt = np.linalg.svd(m)
    starts.append(vt[0])
    for x in starts:
        x = x / max(weighted_norm(x, 1.0, p), 1e-300)
        for _ in range(iters):
            y = m @ x
            val = weighted_norm(y, 1.0, q)
            best = max(best, val / weighted_norm(x, 1.0, p))
            z = m.T @ dual_map(y, q)
            x_new = dual_map(z, pd)
            nx = weighted_norm(x_new, 1.0, p)
            if nx == 0.0:
                break
            x_new = x_new / nx
            if np.allclose(x_new, x, rtol=0, atol=1e-15):
                break
            x = x_new
    return best


def side_operator_norm(matrix, w_src, p, w_tgt, q):
    """``||T||`` from ``l_p(w_src)`` to ``l_q(w_tgt)`` as a :class:`NormBound`.

    Exact cases: ``p = 1`` (column norms), ``q = inf`` (row dual norms),
    ``p = q = 2`` (largest singular value), and ``p = inf`` or ``q = 1`` by
    sign-vector enumeration when the relevant dimension is at most 16.
    Other pairs get a power-iteration lower bound and a Hoelder upper bound.
    """
    m = (np.asarray(w_tgt, dtype=float)[:, None] * np.asarray(matrix, dtype=float)) / np.asarray(
        w_src, dtype=float
    )[None, :]
    if m.size == 0 or not np.any(m):
        return NormBound(0.0, 0.0)
    if p == 1:
        v = float(np.max(_pnorm_rows(m.T, q)))
        return NormBound(v, v)
    if q == INF:
        v = float(np.max(_pnorm_rows(m, conjugate_exponent(p))))
        return NormBound(v, v)
    if p == 2 and q == 2:
        v = float(np.linalg.norm(m, 2))
        return NormBound(v, v)
    if p == INF and m.shape[1] <= _ENUM_LIMIT:
        v = max(weighted_norm(m @ e, 1.0, q) for e in _sign_vectors(m.shape[1]))
        return NormBound(v, v)
    if q == 1 and m.shape[0] <= _ENUM_LIMIT:
        pd = conjugate_exponent(p)
        v = max(weighted_norm(m.T @ e, 1.0, pd) for e in _sign_vectors(m.shape[0]))
        return NormBound(v, v)
    pd = conjugate_exponent(p)
    # Hoelder on rows, or the triangle inequality over columns
    up_rows = weighted_norm(_pnorm_rows(m, pd), 1.0, q)
    up_cols = weighted_norm(_pnorm_rows(m.T, q), 1.0, pd)
    upper = min(up_rows, up_cols)
    lower = min(_boyd_lower(m, p, q), upper)
    return NormBound(float(lower), float(upper))


def side_norms(T):
    """Per-side bounds ``(||T||_{A0 -> B0}, ||T||_{A1 -> B1})``."""
    s, g = T.source, T.target
    return (
        side_operator_norm(T.matrix, s.w0, s.p0, g.w0, g.p0),
        side_operator_norm(T.matrix, s.w1, s.p1, g.w1, g.p1),
    )


def operator_norm_l_bounds(T):
    """Interval containing ``||T||_l = max`` of the two side norms."""
    b0, b1 = side_norms(T)
    return NormBound(max(b0.lower, b1.lower), max(b0.upper, b1.upper))


def operator_norm_l(T):
    """``||T||_l``; exact in the closed-form cases, otherwise the upper bound."""
    return float(operator_norm_l_bounds(T).upper)


# K evaluation with bounds


def k_bounds(couple, a, t, tol=DEFAULT_TOL):
    """Certified ``(lower, upper)`` for ``K(t, a)``.

    Piecewise-linear couples use the exact curve; otherwise the general
    solver provides the achieved value and its convexity certificate.
    """
    a = check_element(couple, a)
    if couple.is_piecewise_linear:
        v = float(k_curve(couple, a)(t))
        return v, v
    x = np.abs(a)
    if not np.any(x):
        return 0.0, 0.0
    value, _ = k_functional(couple, a, t, 1, tol)
    _, lower = _solve_magnitudes(couple, x, float(t), 1.0, tol)
    return min(lower, value), value


def k_eval(couple, a, t, tol=DEFAULT_TOL):
    """``K(t, a)``: exact for piecewise-linear couples, solver value otherwise."""
    a = check_element(couple, a)
    if couple.is_piecewise_linear:
        return float(k_curve(couple, a)(t))
    return k_functional(couple, a, t, 1, tol)[0]


def dyadic_grid(lo=-6, hi=6):
    return 2.0 ** np.arange(lo, hi + 1)


def operator_norm_b_lower(T, samples, t_grid=None):
    """Certified lower bound ``max K(t, Ta; B) / K(t, a; A)`` over samples and ``t``.

    Samples with ``K(t, a) = 0`` are skipped.
    """
    if t_grid is None:
        t_grid = dyadic_grid()
    best = None
    for a in samples:
        a = check_element(T.source, a)
        if not np.any(a):
            continue
        ta = T(a)
        for t in t_grid:
            _, den = k_bounds(T.source, a, t)
            if den == 0.0:
                continue
            num, _ = k_bounds(T.target, ta, t)
            r = num / den
            best = r if best is None else max(best, r)
    if best is None:
        raise PreconditionError("every sample is degenerate (K = 0)")
    return float(best)


# subcouples and quotients


@dataclass(frozen=True, eq=False)
class SubcoupleSpec:
    """A subcouple of ``ambient`` with the inherited norms.

    Either ``keep`` (a set of coordinates) or ``basis`` (rows spanning the
    subspace) is given.  Elements of the subcouple are ambient vectors that
    lie in the subspace.
    """

    ambient: Couple
    keep: tuple = None
    basis: np.ndarray = None

    def __post_init__(self):
        n = self.ambient.n
        if (self.keep is None) == (self.basis is None):
            raise ValueError("give exactly one of keep or basis")
        if self.keep is not None:
            keep = tuple(sorted(int(i) for i in self.keep))
            if not keep:
                raise ValueError("keep must be nonempty")
            if len(set(keep)) != len(keep) or keep[0] < 0 or keep[-1] >= n:
                raise DimensionMismatchError(f"invalid coordinate set {self.keep!r}")
            object.__setattr__(self, "keep", keep)
        else:
            b = np.array(self.basis, dtype=float)
            if b.ndim == 1:
                b = b[None, :]
            if b.ndim != 2 or b.shape[1] != n:
                raise DimensionMismatchError(f"basis rows must have length {n}")
            if np.linalg.matrix_rank(b) != b.shape[0]:
                raise ValueError("basis vectors must be linearly independent")
            b.setflags(write=False)
            object.__setattr__(self, "basis", b)

    @property
    def dim(self):
        return len(self.keep) if self.keep is not None else self.basis.shape[0]

    @property
    def basis_matrix(self):
        """``n x dim`` matrix whose columns span the subspace."""
        if self.keep is not None:
            return np.eye(self.ambient.n)[:, list(self.keep)]
        return self.basis.T

    def coords(self, a):
        """Coordinates ``c`` with ``a = B c``; raises if ``a`` is outside the subspace."""
        a = check_element(self.ambient, a)
        B = self.basis_matrix
        c, *_ = np.linalg.lstsq(B, a, rcond=None)
        if np.linalg.norm(B @ c - a) > 1e-10 * max(1.0, np.linalg.norm(a)):
            raise PreconditionError("element is not in the subcouple")
        return c

    def element(self, c):
        return self.basis_matrix @ np.asarray(c, dtype=float)

    def injection(self):
        """The inclusion as a map from the coordinate couple (keep subcouples only)."""
        if self.keep is None:
            raise PreconditionError("injection is defined for coordinate subcouples")
        sub = self.ambient.restrict(self.keep)
        return LinearMap(self.basis_matrix, sub, self.ambient)

    def projection(self):
        """Coordinate projection from the ambient couple (keep subcouples only)."""
        if self.keep is None:
            raise PreconditionError("projection is defined for coordinate subcouples")
        sub = self.ambient.restrict(self.keep)
        return LinearMap(self.basis_matrix.T, self.ambient, sub)


def _cvx_norm(w, expr, p):
    return cp.norm(cp.multiply(w, expr), 1 if p == 1 else ("inf" if p == INF else p))


_SOLVE_TOL = dict(tol_gap_abs=1e-11, tol_gap_rel=1e-11, tol_feas=1e-11)


def _solve(problem):
    with warnings.catch_warnings():
        # inaccurate-status warnings are handled through the status below
        warnings.simplefilter("ignore", UserWarning)
        try:
            problem.solve(solver=cp.CLARABEL, **_SOLVE_TOL)
        except cp.SolverError:
            problem.solve(solver=cp.CLARABEL)
    if problem.status not in (cp.OPTIMAL, cp.OPTIMAL_INACCURATE):
        raise ConvergenceError(np.nan, np.nan, f"convex solver status {problem.status}")
    return problem.value


def subcouple_k(spec, a, t):
    """``K(t, a)`` computed with splits restricted to the subspace."""
    c = spec.coords(a)
    amb = spec.ambient
    if spec.keep is not None:
        return k_eval(amb.restrict(spec.keep), np.asarray(a)[list(spec.keep)], t)
    B = spec.basis_matrix
    if spec.dim == 1:
        v = B[:, 0]
        n0 = weighted_norm(v, amb.w0, amb.p0)
        n1 = weighted_norm(v, amb.w1, amb.p1)
        # |c - d| n0 + t |d| n1 is piecewise linear in d; optimum at d = 0 or d = c
        return abs(c[0]) * min(n0, t * n1)
    d = cp.Variable(spec.dim)
    obj = _cvx_norm(amb.w0, B @ (c - d), amb.p0) + t * _cvx_norm(amb.w1, B @ d, amb.p1)
    return float(_solve(cp.Problem(cp.Minimize(obj))))


def subcouple_curve(spec, a):
    """Exact K-curve of ``a`` inside the subcouple, or ``None`` if unavailable.

    Available for piecewise-linear ambient couples when the subcouple is a
    coordinate block or one-dimensional.
    """
    amb = spec.ambient
    if not amb.is_piecewise_linear:
        return None
    c = spec.coords(a)
    if spec.keep is not None:
        return k_curve(amb.restrict(spec.keep), np.asarray(a, dtype=float)[list(spec.keep)])
    if spec.dim == 1:
        v = spec.basis_matrix[:, 0]
        n0 = abs(c[0]) * weighted_norm(v, amb.w0, amb.p0)
        n1 = abs(c[0]) * weighted_norm(v, amb.w1, amb.p1)
        if n0 == 0.0:
            return ConcaveCurve.zero()
        return ConcaveCurve([n0 / n1], [n0], 0.0, n1, 0.0)
    return None


def _default_sub_samples(spec, rng):
    k = spec.dim
    cs = list(np.eye(k)) + [np.ones(k)] + list(rng.normal(size=(4, k)))
    return [spec.element(c) for c in cs]


SubcoupleResult = namedtuple("SubcoupleResult", "holds witness")


def is_b_subcouple(spec, samples=None, t_grid=None, rtol=1e-7, seed=0):
    """Check ``K(t, a; sub) = K(t, a; ambient)`` on sample elements.

    Exact curves are compared when available (piecewise-linear ambient
    couples with a coordinate or one-dimensional subcouple); otherwise the
    values are compared on a grid of ``t`` spaced by ``2^(1/4)``.

    The inequality ``K_ambient <= K_sub`` holds for every subcouple; a
    violation beyond rounding raises ``AssertionError``.

    Returns
    -------
    SubcoupleResult
        ``holds`` and, when it fails, ``witness = (a, t)``.
    """
    if t_grid is None:
        t_grid = 2.0 ** (np.arange(-24, 25) / 4.0)
    if samples is None:
        samples = _default_sub_samples(spec, np.random.default_rng(seed))
    for a in samples:
        a = np.asarray(a, dtype=float)
        sub = subcouple_curve(spec, a)
        if sub is not None:
            amb = k_curve(spec.ambient, a)
            ok, t_bad, _ = compare_curves(amb, sub, 1e-12)
            if not ok:
                raise AssertionError(f"ambient K exceeds subcouple K at t={t_bad}")
            ok, t_bad, _ = compare_curves(sub, amb, rtol)
            if not ok:
                return SubcoupleResult(False, (a, float(t_bad)))
            continue
        for t in t_grid:
            ks = subcouple_k(spec, a, t)
            ka = k_eval(spec.ambient, a, t)
            scale = max(ks, ka, 1e-300)
            if ka > ks + 1e-7 * scale:
                raise AssertionError(
                    f"ambient K exceeds subcouple K at t={t}: {ka} > {ks}"
                )
            if ks - ka > rtol * scale:
                return SubcoupleResult(False, (a, float(t)))
    return SubcoupleResult(True, None)


def is_l_subcouple(spec, samples=None, seed=0):
    """Norms are inherited by construction; kept for symmetry of the API."""
    return True


def quotient_couple(ambient, kill):
    """The quotient by the coordinate subspace ``kill``.

    For diagonal couples the quotient norm of a class is attained by zeroing
    the killed coordinates, so the quotient is the restriction to the rest.
    """
    kill = sorted({int(i) for i in kill})
    if kill and (kill[0] < 0 or kill[-1] >= ambient.n):
        raise DimensionMismatchError(f"invalid coordinate set {kill!r}")
    rest = [i for i in range(ambient.n) if i not in kill]
    if not rest:
        raise PreconditionError("cannot kill every coordinate")
    if not kill:
        return ambient
    return ambient.restrict(rest)


def quotient_map(ambient, kill):
    """The canonical surjection onto :func:`quotient_couple`."""
    q = quotient_couple(ambient, kill)
    kill = {int(i) for i in kill}
    rest = [i for i in range(ambient.n) if i not in kill]
    return LinearMap(np.eye(ambient.n)[rest], ambient, q)


def is_b_quotient(ambient, kill, samples=None, t_grid=None, rtol=1e-9, seed=0):
    """Check ``K(t, [a]; quotient) = inf_c K(t, a + c; ambient)`` on samples.

    The infimum over the killed subspace is attained at ``c = -a`` on the
    killed coordinates (each side norm is a lattice norm), which gives the
    ambient side exactly.  Random shifts ``c`` are also tested against it.
    """
    q = quotient_couple(ambient, kill)
    kill = sorted({int(i) for i in kill})
    rest = [i for i in range(ambient.n) if i not in kill]
    rng = np.random.default_rng(seed)
    if t_grid is None:
        t_grid = dyadic_grid(-4, 4)
    if samples is None:
        samples = list(rng.normal(size=(4, ambient.n)))
    for a in samples:
        a = check_element(ambient, a)
        zeroed = a.copy()
        zeroed[kill] = 0.0
        for t in t_grid:
            kq = k_eval(q, a[rest], t)
            ka = k_eval(ambient, zeroed, t)
            if abs(kq - ka) > rtol * max(kq, ka, 1e-300):
                return SubcoupleResult(False, (a, float(t)))
            for _ in range(2):
                shifted = zeroed.copy()
                shifted[kill] = rng.normal(size=len(kill))
                if k_eval(ambient, shifted, t) < kq * (1 - rtol):
                    return SubcoupleResult(False, (shifted, float(t)))
    return SubcoupleResult(True, None)


# retracts

RetractReport = namedtuple("RetractReport", "ok clause")

_CATEGORIES = {"l": "ll", "b": "bb", "lb": "lb", "bl": "bl"}


def _map_samples(couple, rng):
    return list(np.eye(couple.n)) + list(rng.normal(size=(6, couple.n)))


def retract_check(alpha, beta, category, samples=None, t_grid=None, seed=0):
    """Check that ``(alpha, beta)`` exhibits a retract in the given category.

    ``category`` is ``"l"``, ``"b"``, ``"lb"`` or ``"bl"``; the first letter
    constrains ``alpha``, the second ``beta``.  An l-map needs
    ``||.||_l <= 1``; a b-map needs a sampled b-bound ``<= 1 + 1e-9``.

    Returns
    -------
    RetractReport
        ``ok`` and the first failing clause (``None`` on success).
    """
    if category not in _CATEGORIES:
        raise ValueError(f"unknown category {category!r}")
    if alpha.target != beta.source:
        raise DimensionMismatchError("alpha and beta are not composable")
    if alpha.source != beta.target:
        raise DimensionMismatchError("beta o alpha must map the couple to itself")
    comp = beta.matrix @ alpha.matrix
    if np.max(np.abs(comp - np.eye(comp.shape[0]))) > 1e-12:
        return RetractReport(False, "not identity")
    rng = np.random.default_rng(seed)
    for name, m, kind in (("alpha", alpha, _CATEGORIES[category][0]),
                          ("beta", beta, _CATEGORIES[category][1])):
        if kind == "l":
            bound = operator_norm_l_bounds(m)
            if bound.upper > 1 + 1e-12:
                return RetractReport(False, f"{name} l-norm exceeds 1")
        else:
            smp = samples if samples is not None and name == "alpha" else None
            smp = smp or _map_samples(m.source, rng)
            if operator_norm_b_lower(m, smp, t_grid) > 1 + 1e-9:
                return RetractReport(False, f"{name} b-norm exceeds 1")
    return RetractReport(True, None)


# functionals and Hahn-Banach


@dataclass(frozen=True, eq=False)
class Functional:
    """A linear functional ``c -> <coeffs, c>``.

    On a :class:`Couple` the coefficients pair with ambient vectors.  On a
    :class:`SubcoupleSpec` they pair with the subspace coordinates (see
    :meth:`SubcoupleSpec.coords`).
    """

    coeffs: np.ndarray
    domain: object

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=float).reshape(-1)
        dim = self.domain.n if isinstance(self.domain, Couple) else self.domain.dim
        if c.size != dim:
            raise DimensionMismatchError(f"coeffs have length {c.size}, expected {dim}")
        if not np.all(np.isfinite(c)):
            raise ValueError("coefficients must be finite")
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    def __call__(self, a):
        if isinstance(self.domain, Couple):
            return float(self.coeffs @ check_element(self.domain, a))
        return float(self.coeffs @ self.domain.coords(a))

    def ambient_coeffs(self):
        """Ambient vector ``y`` with ``<y, B c> = <coeffs, c>``; least-norm choice."""
        if isinstance(self.domain, Couple):
            return self.coeffs
        B = self.domain.basis_matrix
        return np.linalg.lstsq(B.T, self.coeffs, rcond=None)[0]


def _extension_norm_ok(ambient, y, omega0, omega1, slack=1e-9):
    return (
        dual_side_norm(ambient, 0, y) <= omega0 * (1 + slack)
        and dual_side_norm(ambient, 1, y) <= omega1 * (1 + slack)
    )


def hahn_banach_precondition(T, ambient, omega0, omega1):
    """``max T(a)`` over the subspace subject to ``omega0 K(omega1/omega0, a) <= 1``.

    Returns the value and a maximizing element; the precondition holds when
    the value is at most 1.
    """
    spec = T.domain
    B = spec.basis_matrix
    c = cp.Variable(spec.dim)
    d = cp.Variable(ambient.n)
    a = B @ c
    cons = [omega0 * _cvx_norm(ambient.w0, a - d, ambient.p0)
            + omega1 * _cvx_norm(ambient.w1, d, ambient.p1) <= 1]
    val = _solve(cp.Problem(cp.Maximize(T.coeffs @ c), cons))
    return float(val), B @ c.value


def hahn_banach_extend(T, ambient, omega0, omega1):
    """Extend ``T`` from a subcouple to the ambient couple.

    The extension ``S`` satisfies ``|S b| <= omega0 K(omega1/omega0, b)``,
    equivalently ``||S||_{A0'} <= omega0`` and ``||S||_{A1'} <= omega1``.
    It is built one dimension at a time, each coefficient taken at the
    midpoint of its feasible interval.

    Raises
    ------
    PreconditionError
        If ``|T a| > omega0 K(omega1/omega0, a)`` for some ``a`` in the
        subspace; the violating element is attached as ``witness``.
    """
    omega0, omega1 = float(omega0), float(omega1)
    if not (omega0 > 0 and omega1 > 0):
        raise ValueError("omega0 and omega1 must be positive")
    if isinstance(T.domain, Couple):
        y = T.coeffs
        if not _extension_norm_ok(ambient, y, omega0, omega1):
            raise PreconditionError("functional already exceeds the bound")
        return T
    spec = T.domain
    if spec.ambient != ambient:
        raise DimensionMismatchError("subcouple does not live in this ambient couple")
    if not np.any(T.coeffs):
        return Functional(np.zeros(ambient.n), ambient)
    val, worst = hahn_banach_precondition(T, ambient, omega0, omega1)
    if val > 1 + 1e-9:
        err = PreconditionError(
            f"|T a| exceeds omega0 K(omega1/omega0, a) by factor {val:.6g}"
        )
        err.witness = worst
        raise err
    if spec.keep is not None:
        # lattice norms: each free coordinate has a symmetric interval, midpoint 0
        y = np.zeros(ambient.n)
        y[list(spec.keep)] = T.coeffs
    else:
        # a functional on the boundary of the precondition has a single
        # extension; widen by the certified slack so rounding keeps it feasible
        relax = max(val, 1.0) * (1 + 5e-10)
        y = _extend_by_steps(T, ambient, omega0 * relax, omega1 * relax)
    if not _extension_norm_ok(ambient, y, omega0, omega1):
        raise AssertionError("extension violates the bound: empty interval")
    return Functional(y, ambient)


def _extend_by_steps(T, ambient, omega0, omega1):
    B = T.domain.basis_matrix
    y_part = T.ambient_coeffs()
    # null space of B^T: directions that do not change T on the subspace
    u, s, vt = np.linalg.svd(B.T)
    rank = int(np.sum(s > 1e-12 * s[0]))
    N = vt[rank:].T
    k = N.shape[1]
    z = cp.Variable(k)
    y = y_part + N @ z
    pd0 = conjugate_exponent(ambient.p0)
    pd1 = conjugate_exponent(ambient.p1)
    cons = [
        _cvx_norm(1.0 / ambient.w0, y, pd0) <= omega0,
        _cvx_norm(1.0 / ambient.w1, y, pd1) <= omega1,
    ]
    zv = np.zeros(k)
    for j in range(k):
        fixed = [z[i] == zv[i] for i in range(j)]
        lo = _solve(cp.Problem(cp.Minimize(z[j]), cons + fixed))
        hi = _solve(cp.Problem(cp.Maximize(z[j]), cons + fixed))
        if lo > hi + 1e-8:
            raise AssertionError("empty feasible interval")
        zv[j] = 0.5 * (lo + hi)
    return y_part + N @ zv


# duality and embedding


def dual_ball_sup(couple, a, t):
    """``max <y, a>`` subject to ``||y||_{A0'} + ||y||_{A1'} / t <= 1``.

    Returns the value and the optimizer.
    """
    a = check_element(couple, a)
    y = cp.Variable(couple.n)
    pd0 = conjugate_exponent(couple.p0)
    pd1 = conjugate_exponent(couple.p1)
    cons = [_cvx_norm(1.0 / couple.w0, y, pd0) + _cvx_norm(1.0 / couple.w1, y, pd1) / t <= 1]
    val = _solve(cp.Problem(cp.Maximize(a @ y), cons))
    return float(val), np.asarray(y.value, dtype=float)


DualityResult = namedtuple("DualityResult", "k_value dual_value optimizer")


def dual_k_identity(couple, a, t, rtol=1e-6):
    """``K_inf(t, a)`` from the primal solver and from the dual unit ball.

    Raises
    ------
    ConvergenceError
        If the two values differ by more than ``rtol`` relative.
    """
    a = check_element(couple, a)
    t = float(t)
    if not t > 0:
        raise ValueError("t must be positive")
    if not np.any(a):
        return DualityResult(0.0, 0.0, np.zeros(couple.n))
    kv = k_functional(couple, a, t, INF)[0]
    dv, y = dual_ball_sup(couple, a, t)
    if abs(kv - dv) > rtol * max(kv, dv):
        raise ConvergenceError(min(kv, dv), max(kv, dv), "primal and dual values disagree")
    return DualityResult(kv, dv, y)


def embed_linf(couple, dual_samples):
    """Embed ``couple`` into an ``l_inf`` couple indexed by dual samples.

    ``a`` maps to ``f_a(a') = <a', a>``; the target weights are
    ``1 / ||a'||_{A0'}`` and ``1 / ||a'||_{A1'}`` so that
    ``||f_a|| <= ||a||`` on each side.  Zero samples are dropped.

    Returns
    -------
    LinearMap
        From ``couple`` to the weighted ``{l_inf, l_inf}`` couple.
    """
    ys = np.atleast_2d(np.asarray(dual_samples, dtype=float))
    if ys.size == 0:
        raise ValueError("empty dual sample set")
    if ys.shape[1] != couple.n:
        raise DimensionMismatchError(f"dual samples must have length {couple.n}")
    ys = ys[np.any(ys != 0, axis=1)]
    if ys.shape[0] == 0:
        raise ValueError("every dual sample is zero")
    n0 = np.array([dual_side_norm(couple, 0, y) for y in ys])
    n1 = np.array([dual_side_norm(couple, 1, y) for y in ys])
    target = Couple(ys.shape[0], 1.0 / n0, 1.0 / n1, INF, INF)
    return LinearMap(ys, couple, target)


def embedded_k_inf(embedding, a, t):
    """``K_inf(t, f_a)`` in the target ``l_inf`` couple (closed form)."""
    return k_equal_exponent(embedding.target, embedding(a), t)


def sign_pattern_dual_sup(couple, a, t):
    """Dual supremum for ``{l_1(w0), l_inf(w1)}`` or ``{l_inf(w0), l_1(w1)}`` at small ``n``.

    The dual unit ball is a polytope whose vertices point along
    ``sign(a) w0 1_S`` (resp. ``sign(a) w1 1_S``); enumerate all nonempty ``S``.
    """
    a = check_element(couple, a)
    x = np.abs(a)
    best = 0.0
    n = couple.n
    for r in range(1, n + 1):
        for S in itertools.combinations(range(n), r):
            S = list(S)
            if couple.p0 == 1 and couple.p1 == INF:
                num = float(np.sum(couple.w0[S] * x[S]))
                den = 1.0 + float(np.sum(couple.w0[S] / couple.w1[S])) / t
            elif couple.p0 == INF and couple.p1 == 1:
                num = float(np.sum(couple.w1[S] * x[S]))
                den = float(np.sum(couple.w1[S] / couple.w0[S])) + 1.0 / t
            else:
                raise ValueError("sign-pattern oracle needs a mixed {1, inf} couple")
            best = max(best, num / den)
    return best


def scalar_couple(omega0, omega1):
    """The one-point couple with norms ``|x| / omega0`` and ``|x| / omega1``."""
    return Couple(1, [1.0 / omega0], [1.0 / omega1], INF, INF)
