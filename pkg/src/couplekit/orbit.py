"""The orbit problem: when is ``b = T a`` for a norm-one map ``T``?

Domination of K-curves is the necessary condition.  For the ``{l1, l_inf}``
couple it is also sufficient, and :func:`hlp_construct` builds the map
explicitly (sign and permutation diagonals, a diagonal contraction and a
chain of T-transforms).  The module also has the level-interpolation
operator for sampled functions, the kernel test for weighted ``l1`` couples,
and a dyadic version of the fundamental decomposition.
"""

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .couple import LinearMap, check_element, l1_linf
from .curves import compare_curves, monotone_upper_hull
from .exceptions import DominationError, PreconditionError
from .kfun import DEFAULT_TOL, j_functional, k_curve, k_functional, k_values

# dyadic grid used when at least one curve has no closed form
_SAMPLED_GRID = 2.0 ** (np.arange(-80, 81) / 4.0)


@dataclass(frozen=True, eq=False)
class OrbitProblem:
    """``a`` in the couple ``coupleA`` and ``b`` in ``coupleB``."""

    coupleA: object
    coupleB: object
    a: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "a", check_element(self.coupleA, self.a, "a"))
        object.__setattr__(self, "b", check_element(self.coupleB, self.b, "b"))


@dataclass(frozen=True)
class Domination:
    """Outcome of the curve comparison ``K(t, b) <= K(t, a)``.

    ``witness_t`` is set when domination fails; ``margin`` (the smallest gap
    ``K(t, a) - K(t, b)`` seen) when it holds.  ``exact`` tells whether the
    comparison covered all ``t > 0`` or only a dyadic grid.
    """

    holds: bool
    witness_t: float = None
    margin: float = None
    exact: bool = True

    def __bool__(self):
        return self.holds


def dominates(problem, p=1, rtol=1e-9, tol=DEFAULT_TOL):
    """Test ``K_p(t, b; B) <= K_p(t, a; A)`` for every ``t > 0``.

    With both couples piecewise linear (exponents in ``{1, inf}``) and
    ``p = 1`` the exact curves are compared at their breakpoints.  Otherwise
    the solver is run on a dyadic grid ``2^(k/4)``, ``|k| <= 80``, and the
    end behaviour is compared through the side norms.
    """
    A, B = problem.coupleA, problem.coupleB
    a, b = problem.a, problem.b
    if p == 1 and A.is_piecewise_linear and B.is_piecewise_linear:
        holds, witness, margin = compare_curves(k_curve(B, b), k_curve(A, a), rtol)
        return Domination(holds, witness, margin, True)
    ts = _SAMPLED_GRID
    ka = np.asarray(k_values(A, a, ts, p, tol))
    kb = np.asarray(k_values(B, b, ts, p, tol))
    slack = rtol * np.maximum(ka, kb) + 2 * tol * ka
    bad = np.nonzero(kb > ka + slack)[0]
    if bad.size:
        return Domination(False, float(ts[bad[0]]), None, False)
    # K(t)/t tends to the side-1 norm at 0 and K(t) to the side-0 norm at infinity
    if B.norm(1, b) > A.norm(1, a) * (1 + rtol):
        return Domination(False, float(ts[0]), None, False)
    if B.norm(0, b) > A.norm(0, a) * (1 + rtol):
        return Domination(False, float(ts[-1]), None, False)
    return Domination(True, None, float(np.min(ka - kb)), False)


# Hardy-Littlewood-Polya construction on {l1, l_inf}


@dataclass(frozen=True, eq=False)
class HLPFactorization:
    """``T = S_b P_b^T (T_r ... T_1) D P_a S_a`` on the padded length ``m``.

    ``transforms`` lists ``(j, k, lam)`` for ``T_i = lam I + (1 - lam) Q_jk``
    where ``Q_jk`` swaps coordinates ``j`` and ``k``.
    """

    sign_a: np.ndarray
    perm_a: np.ndarray
    contraction: np.ndarray
    transforms: list
    perm_b: np.ndarray
    sign_b: np.ndarray
    matrix: np.ndarray = field(repr=False)

    @property
    def n_transforms(self):
        return len(self.transforms)


def _pad(v, m):
    out = np.zeros(m)
    out[: v.size] = v
    return out


def _majorization_witness(a_star, b_star, tol):
    """First ``t`` (a prefix length) with ``sum b* > sum a*``, or ``None``."""
    ca, cb = np.cumsum(a_star), np.cumsum(b_star)
    bad = np.nonzero(cb > ca + tol)[0]
    return None if bad.size == 0 else float(bad[0] + 1)


def _perm_matrix(order):
    m = order.size
    P = np.zeros((m, m))
    P[np.arange(m), order] = 1.0
    return P


def _t_transform(m, j, k, lam):
    """``lam I + (1 - lam) Q_jk``."""
    T = np.eye(m)
    T[j, j] = T[k, k] = lam
    T[j, k] = T[k, j] = 1.0 - lam
    return T


def hlp_factorization(a, b):
    """Factor a map ``T`` with ``T a = b`` and both side norms at most one.

    Raises :class:`DominationError` with the first violating ``t`` when the
    partial sums of ``b*`` exceed those of ``a*``.
    """
    a = np.asarray(a, dtype=float).reshape(-1)
    b = np.asarray(b, dtype=float).reshape(-1)
    if not (np.all(np.isfinite(a)) and np.all(np.isfinite(b))):
        raise ValueError("vectors must be finite")
    m = max(a.size, b.size)
    a, b = _pad(a, m), _pad(b, m)
    scale = max(float(np.sum(np.abs(a))), float(np.sum(np.abs(b))), 1e-300)
    tol = 1e-12 * scale

    sign_a = np.where(a < 0, -1.0, 1.0)
    sign_b = np.where(b < 0, -1.0, 1.0)
    perm_a = np.argsort(-np.abs(a), kind="stable")
    perm_b = np.argsort(-np.abs(b), kind="stable")
    a_star = np.abs(a)[perm_a]
    b_star = np.abs(b)[perm_b]
    witness = _majorization_witness(a_star, b_star, tol)
    if witness is not None:
        raise DominationError(
            witness, f"K(t, b) > K(t, a) at t = {witness:g}; b is not in the orbit of a"
        )

    # remove the surplus mass from the tail of a*
    surplus = max(float(a_star.sum() - b_star.sum()), 0.0)
    c = a_star.copy()
    for i in range(m - 1, -1, -1):
        if surplus <= 0:
            break
        cut = min(c[i], surplus)
        c[i] -= cut
        surplus -= cut
    with np.errstate(invalid="ignore", divide="ignore"):
        contraction = np.where(a_star > 0, c / a_star, 0.0)

    # T-transform chain from c down to b* (both nonincreasing, c majorizes b*)
    transforms = []
    core = np.eye(m)
    for _ in range(2 * m):
        over = np.nonzero(c - b_star > tol)[0]
        if over.size == 0:
            break
        j = int(over[-1])
        under = np.nonzero(b_star[j + 1 :] - c[j + 1 :] > tol)[0]
        if under.size == 0:
            break
        k = j + 1 + int(under[0])
        delta = min(c[j] - b_star[j], b_star[k] - c[k])
        lam = 1.0 - delta / (c[j] - c[k])
        Tjk = _t_transform(m, j, k, lam)
        c = Tjk @ c
        # pin the coordinate that was matched
        if c[j] - b_star[j] <= b_star[k] - c[k]:
            c[j] = b_star[j]
        else:
            c[k] = b_star[k]
        core = Tjk @ core
        transforms.append((j, k, float(lam)))

    Pa, Pb = _perm_matrix(perm_a), _perm_matrix(perm_b)
    matrix = (
        np.diag(sign_b) @ Pb.T @ core @ np.diag(contraction) @ Pa @ np.diag(sign_a)
    )
    return HLPFactorization(
        sign_a, perm_a, contraction, transforms, perm_b, sign_b, matrix
    )


def hlp_construct(a, b):
    """``T: {l1, l_inf}^n_a -> {l1, l_inf}^n_b`` with ``T a = b`` and norms <= 1."""
    a = np.asarray(a, dtype=float).reshape(-1)
    b = np.asarray(b, dtype=float).reshape(-1)
    fac = hlp_factorization(a, b)
    T = fac.matrix[: b.size, : a.size]
    return LinearMap(T, l1_linf(a.size), l1_linf(b.size))


def hlp_certificate(T, a, b):
    """Column sums, row sums and the reconstruction error of ``T``."""
    M = np.abs(T.matrix)
    return {
        "max_column_sum": float(M.sum(axis=0).max()) if M.size else 0.0,
        "max_row_sum": float(M.sum(axis=1).max()) if M.size else 0.0,
        "reconstruction_error": float(np.max(np.abs(T(a) - np.asarray(b, float)), initial=0.0)),
    }


# level interpolation for sampled functions


def level_majorant(x, a):
    """Least concave majorant of the samples on ``[x_0, inf)``.

    It runs through the upper hull of the points and is constant after the
    maximum, so it is also nondecreasing.  Returns the majorant values at
    ``x`` and the indices of the contact points (where it equals ``a``).
    """
    x, a = _check_level_input(x, a)
    hull = monotone_upper_hull(x, a, 0.0)
    hx, ha = x[hull], a[hull]
    hat = np.interp(x, hx, ha)  # flat past the last hull vertex
    hat = np.maximum(hat, a)
    atol = 1e-13 * max(1.0, float(a.max()))
    contact = np.nonzero(hat - a <= atol)[0]
    return hat, contact


def _check_level_input(x, a):
    x = np.asarray(x, dtype=float).reshape(-1)
    a = np.asarray(a, dtype=float).reshape(-1)
    if x.shape != a.shape:
        raise ValueError("grid and samples differ in length")
    if x.size == 0:
        raise ValueError("need at least one sample")
    if np.any(x <= 0) or np.any(np.diff(x) <= 0):
        raise ValueError("grid must be positive and strictly increasing")
    if np.any(a < 0) or not np.all(np.isfinite(a)):
        raise ValueError("a must be finite and nonnegative")
    return x, a


def level_interp_matrix(x, a):
    """Matrix of ``T_1`` on the grid: identity at contact points, chord blends between.

    Between consecutive contact points ``x_1 < x < x_2`` the row is the convex
    blend ``(1 - lam) e_{x_1} + lam e_{x_2}``, ``lam = (x - x_1)/(x_2 - x_1)``.
    Past the last contact point the majorant is flat and the row copies
    ``x_1``.
    """
    x, a = _check_level_input(x, a)
    _, contact = level_majorant(x, a)
    n = x.size
    M = np.zeros((n, n))
    for i in range(n):
        pos = np.searchsorted(contact, i)
        if pos < contact.size and contact[pos] == i:
            M[i, i] = 1.0
        elif pos == contact.size:
            M[i, contact[-1]] = 1.0
        else:
            i1, i2 = contact[pos - 1], contact[pos]
            lam = (x[i] - x[i1]) / (x[i2] - x[i1])
            M[i, i1] = 1.0 - lam
            M[i, i2] = lam
    return M


def level_interp_operator(x, a, abar):
    """Apply ``T_1`` (built from ``a``) to the samples ``abar``.

    ``T_1 a`` is the least concave majorant of ``a``; ``T_1`` has norm at
    most one on both ``l_inf(1)`` and ``l_inf(1/x)`` over the grid.
    """
    M = level_interp_matrix(x, a)
    abar = np.asarray(abar, dtype=float).reshape(-1)
    if abar.shape[0] != M.shape[0]:
        raise ValueError("grid mismatch between a and abar")
    return M @ abar


# weighted l1 kernel condition


def min_kernel_bound(omega0, omega1, a):
    """``sum_n min(w0(m)/w0(n), w1(m)/w1(n)) |a(n)|`` for every ``m``, exactly."""
    w0 = [Fraction(float(v)) for v in np.asarray(omega0, float).reshape(-1)]
    w1 = [Fraction(float(v)) for v in np.asarray(omega1, float).reshape(-1)]
    av = [abs(Fraction(float(v))) for v in np.asarray(a, float).reshape(-1)]
    if not (len(w0) == len(w1) == len(av)):
        raise ValueError("weights and a differ in length")
    if any(w <= 0 for w in w0 + w1):
        raise ValueError("weights must be positive")
    n = len(av)
    return [
        sum((min(w0[m] / w0[k], w1[m] / w1[k]) * av[k] for k in range(n)), Fraction(0))
        for m in range(n)
    ]


def min_kernel_check(omega0, omega1, a, b):
    """Check ``|b(m)| <= sum_n min(w0(m)/w0(n), w1(m)/w1(n)) |a(n)|`` for all ``m``.

    Arithmetic is done in exact rationals.  Returns ``(ok, m)`` with the
    first violating index, or ``(True, None)``.
    """
    bound = min_kernel_bound(omega0, omega1, a)
    bv = [abs(Fraction(float(v))) for v in np.asarray(b, float).reshape(-1)]
    if len(bv) != len(bound):
        raise ValueError("b has the wrong length")
    for m, (bm, cm) in enumerate(zip(bv, bound)):
        if bm > cm:
            return False, m
    return True, None


# dyadic fundamental decomposition


@dataclass(frozen=True, eq=False)
class Decomposition:
    """``a = sum_nu u_nu`` with ``u_nu`` attached to ``t = base^(nu + offset)``."""

    levels: list
    parts: list
    c_meas: float
    ratios: np.ndarray
    base: float = 2.0
    offset: float = 0.0

    def t(self, nu):
        return self.base ** (nu + self.offset)

    def recompose(self):
        return np.sum(np.array(self.parts), axis=0)


def default_level_range(couple, a, eps=0.5, offset=0.0, tol=DEFAULT_TOL, max_level=60):
    """Levels ``L <= 0 <= H`` past which ``K`` matches its end behaviour.

    At ``t = 2^L``, ``K(t, a) >= t ||a||_1 / (1 + eps)``; at ``2^H``,
    ``K(t, a) >= ||a||_0 / (1 + eps)``.
    """
    n0, n1 = couple.norm(0, a), couple.norm(1, a)
    lo = 0
    while lo > -max_level:
        t = 2.0 ** (lo + offset)
        if k_functional(couple, a, t, 1, tol)[0] * (1 + eps) >= t * n1:
            break
        lo -= 1
    hi = 0
    while hi < max_level:
        t = 2.0 ** (hi + offset)
        if k_functional(couple, a, t, 1, tol)[0] * (1 + eps) >= n0:
            break
        hi += 1
    return lo, hi


def fundamental_decomposition(couple, a, eps=0.5, level_range=None, offset=0.0, tol=DEFAULT_TOL):
    """Split ``a`` into dyadic parts ``u_nu`` with ``J(t_nu, u_nu) <= c K(t_nu, a)``.

    At each ``t_nu = 2^(nu + offset)`` an optimal split ``a = a0 + a1`` is
    computed.  With ``s_nu`` the ``a0`` part (``s_L = 0`` below the range and
    ``s_(H+1) = a`` above it) the parts are ``u_nu = s_(nu+1) - s_nu``, so
    they telescope to ``a``; the extreme parts absorb the tails.  In finite
    dimensions every element is regular, so no limit argument is needed.
    """
    a = check_element(couple, a)
    if not np.any(a):
        raise PreconditionError("the fundamental decomposition needs a != 0")
    if not eps > 0:
        raise PreconditionError("eps must be positive")
    if level_range is None:
        lo, hi = default_level_range(couple, a, eps, offset, tol)
    else:
        lo, hi = int(level_range[0]), int(level_range[1])
        if lo > hi:
            raise PreconditionError("empty level range")
    levels = list(range(lo, hi + 1))
    ts = [2.0 ** (nu + offset) for nu in levels]
    splits = [k_functional(couple, a, t, 1, tol) for t in ts]
    s = [np.zeros_like(a)] + [sp[1].a0 for sp in splits[1:]] + [a]
    parts = [s[i + 1] - s[i] for i in range(len(levels))]
    ratios = np.array(
        [j_functional(couple, u, t) / kv for u, t, (kv, _) in zip(parts, ts, splits)]
    )
    return Decomposition(levels, parts, float(ratios.max()), ratios, 2.0, float(offset))


def _candidate_offsets(couple, a):
    offs = {0.0, 0.25, 0.5, 0.75}
    if couple.is_piecewise_linear:
        bps = k_curve(couple, a).breakpoints
        for t in bps[:8]:
            o = round(math.log2(t) % 1.0, 12) % 1.0
            # at a kink the solver may return either optimal split; a level just
            # to the left of it sees the jump from the correct side
            offs.update((o, (o - 1e-9) % 1.0))
    return sorted(offs)


def best_decomposition(couple, a, eps=0.5, tol=DEFAULT_TOL):
    """The decomposition with the smallest ``c_meas`` over a few grid offsets."""
    best = None
    for off in _candidate_offsets(couple, check_element(couple, a)):
        d = fundamental_decomposition(couple, a, eps, None, off, tol)
        if best is None or d.c_meas < best.c_meas:
            best = d
    return best


def gamma_estimate(couple, sample_elements, eps=0.5, tol=DEFAULT_TOL):
    """Largest optimized ``c_meas`` over the samples.

    This is an upper estimate of the decomposition constant restricted to
    the sample set, not a statement about the couple as a whole.
    """
    samples = list(sample_elements)
    if not samples:
        raise PreconditionError("gamma_estimate needs at least one sample")
    return max(best_decomposition(couple, a, eps, tol).c_meas for a in samples)
