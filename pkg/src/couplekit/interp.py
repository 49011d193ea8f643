"""Real-method interpolation norms and the checks built on them.

The ``(theta, q)`` norm of ``a`` is ``(int_0^inf (t^-theta K(t, a))^q dt/t)^(1/q)``.
For couples with exact piecewise-linear K-curves the integral is summed
piece by piece: on a piece ``K(t) = alpha + beta t`` with ``alpha, beta >= 0``
and for integer ``q`` the integrand expands into powers of ``t``.
Other ``q`` fall back to adaptive quadrature on each piece.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .couple import INF, check_element
from .exceptions import CurveError, PreconditionError, UnsupportedOperationError
from .kfun import DEFAULT_TOL, k_curve, k_value
from .structure import is_b_subcouple, operator_norm_l_bounds, subcouple_curve, subcouple_k


@dataclass(frozen=True)
class KMethodParams:
    """``theta`` in ``(0, 1)`` and ``q`` in ``[1, inf]``."""

    theta: float
    q: float

    def __post_init__(self):
        theta, q = float(self.theta), float(self.q)
        if not 0.0 < theta < 1.0:
            raise ValueError(f"theta must lie in (0, 1), got {self.theta!r}")
        if not q >= 1.0:
            raise ValueError(f"q must lie in [1, inf], got {self.q!r}")
        object.__setattr__(self, "theta", theta)
        object.__setattr__(self, "q", q)


def _power_integral(e, t1, t2):
    """``int_t1^t2 t^(e-1) dt`` with ``t1`` possibly 0 and ``t2`` possibly inf."""
    if e == 0.0:
        if t1 == 0.0 or math.isinf(t2):
            return math.inf
        return math.log(t2 / t1)
    if t1 == 0.0:
        if e < 0:
            return math.inf
        return t2**e / e
    if math.isinf(t2):
        if e > 0:
            return math.inf
        return t1**e / (-e)
    # t1^e (exp(e log(t2/t1)) - 1) / e, stable for short pieces
    return t1**e * math.expm1(e * math.log(t2 / t1)) / e


def _piece_integral(alpha, beta, t1, t2, theta, q):
    """``int_t1^t2 (t^-theta (alpha + beta t))^q dt/t``."""
    if alpha == 0.0 and beta == 0.0:
        return 0.0
    if alpha == 0.0:
        return beta**q * _power_integral(q * (1.0 - theta), t1, t2)
    if beta == 0.0:
        return alpha**q * _power_integral(-theta * q, t1, t2)
    if float(q).is_integer():
        qi = int(q)
        total = 0.0
        for j in range(qi + 1):
            coef = math.comb(qi, j) * alpha ** (qi - j) * beta**j
            if coef == 0.0:
                continue
            total += coef * _power_integral(j - theta * q, t1, t2)
        return total

    def f(u):
        t = math.exp(u)
        return (t**-theta * (alpha + beta * t)) ** q

    lo = -math.inf if t1 == 0.0 else math.log(t1)
    hi = math.inf if math.isinf(t2) else math.log(t2)
    val, _ = integrate.quad(f, lo, hi, epsabs=0.0, epsrel=1e-13, limit=200)
    return val


def curve_norm(curve, params):
    """The ``(theta, q)`` norm of a concave piecewise-linear curve."""
    theta, q = params.theta, params.q
    bps, vals = curve.breakpoints, curve.values
    # only curves vanishing at 0 and bounded at infinity are integrable;
    # ends at rounding level (relative to the curve's size) count as zero
    size = float(np.max(np.abs(vals))) if bps.size else 0.0
    noise = 1e-12 * size
    left = curve.left_value if abs(curve.left_value) > noise else 0.0
    tail = curve.terminal_slope * (bps[-1] if bps.size else 1.0)
    if left > 0 or tail > noise:
        raise CurveError("K-curve is not integrable: nonzero at 0+ or unbounded")
    if bps.size == 0:
        return 0.0
    if math.isinf(q):
        return float(np.max(bps**-theta * vals))
    slopes = curve.slopes
    edges = np.concatenate([[0.0], bps, [math.inf]])
    total = 0.0
    for i, beta in enumerate(slopes):
        t1 = edges[i]
        if i == len(slopes) - 1:
            beta = 0.0
        alpha = (left if i == 0 else vals[i - 1] - beta * bps[i - 1])
        alpha = max(float(alpha), 0.0)  # rounding can push a zero intercept negative
        total += _piece_integral(alpha, max(float(beta), 0.0), t1, edges[i + 1], theta, q)
    if not math.isfinite(total):
        raise CurveError("K-curve is not integrable")
    return float(total ** (1.0 / q))


def _sampled_norm(kvals, params, lo=-30.0, hi=30.0, step=0.125):
    """Quadrature route for couples without an exact curve.

    ``kvals(ts)`` returns ``K`` on an array of ``t``.  Simpson's rule runs
    over ``log2 t`` in ``[lo, hi]``; outside that range ``K`` is taken as
    linear (below) or constant (above), which gives the tails in closed form.
    """
    theta, q = params.theta, params.q
    us = np.arange(lo, hi + step / 2, step)
    ts = 2.0**us
    ks = np.asarray(kvals(ts), dtype=float)
    if math.isinf(q):
        return float(np.max(ts**-theta * ks))
    g = (ts**-theta * ks) ** q * math.log(2.0)
    total = float(integrate.simpson(g, x=us))
    total += (ts[0] ** -theta * ks[0]) ** q / (q * (1.0 - theta))
    total += (ts[-1] ** -theta * ks[-1]) ** q / (q * theta)
    return float(total ** (1.0 / q))


def _last_true(pred, lo, hi, iters=48):
    """Largest ``u`` in ``[lo, hi]`` with ``pred(u)`` for a predicate true then false."""
    if not pred(lo):
        return lo
    if pred(hi):
        return hi
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if pred(mid):
            lo = mid
        else:
            hi = mid
    return lo


def _transition_norm(kval, n0, n1, params, lo=-30.0, hi=30.0, step=0.125, rtol=1e-9):
    """``(theta, q)`` norm from a scalar ``K`` evaluator with known end behaviour.

    ``K(t) = t n1`` up to some ``t_lo`` and ``K(t) = n0`` from some ``t_hi`` on;
    both ends are located by bisection in ``log2 t``.  Those two pieces are
    integrated in closed form and Simpson's rule covers ``[t_lo, t_hi]``,
    where ``K`` is smooth apart from interior kinks of its derivative.
    """
    theta, q = params.theta, params.q
    u_lo = _last_true(lambda u: kval(2.0**u) >= 2.0**u * n1 * (1 - rtol), lo, hi)
    u_hi = hi - _last_true(lambda u: kval(2.0 ** (hi - u)) >= n0 * (1 - rtol), 0.0, hi - u_lo)
    m = max(64, 2 * math.ceil((u_hi - u_lo) / (2 * step)))
    us = np.linspace(u_lo, u_hi, m + 1)
    ts = 2.0**us
    ks = np.array([kval(t) for t in ts])
    ks[0], ks[-1] = ts[0] * n1, n0
    if math.isinf(q):
        return float(np.max(ts**-theta * ks))
    total = 0.0
    if u_hi > u_lo:
        total = float(integrate.simpson((ts**-theta * ks) ** q * math.log(2.0), x=us))
    total += (ts[0] ** (1.0 - theta) * n1) ** q / (q * (1.0 - theta))
    total += (ts[-1] ** -theta * n0) ** q / (q * theta)
    return float(total ** (1.0 / q))


def k_space_norm(couple, a, params, tol=DEFAULT_TOL):
    """``||a||_(theta, q; K)`` in the couple.

    Exact (up to rounding) for couples with exponents in ``{1, inf}``;
    otherwise the solver values are integrated numerically (relative
    accuracy around 1e-6).
    """
    a = check_element(couple, a)
    if not np.any(a):
        return 0.0
    if couple.is_piecewise_linear:
        return curve_norm(k_curve(couple, a), params)
    return _transition_norm(
        lambda t: k_value(couple, a, t, 1, tol), couple.norm(0, a), couple.norm(1, a), params
    )


def k_space_norm_quadrature(curve, params):
    """Plain quadrature of a curve; a cross-check for :func:`curve_norm`."""
    return _sampled_norm(curve, params, step=1.0 / 64)


def _default_samples(couple, rng, count=8):
    n = couple.n
    return list(np.eye(n)) + list(rng.normal(size=(count, n)))


def interpolation_property_check(T, coupleA, coupleB, params, samples=None, seed=0, check=True):
    """``max ||T a||_B / ||a||_A`` over sample elements of ``coupleA``.

    ``T`` must have certified ``||T||_l <= 1``.  With ``check`` the exact
    interpolation property (ratio at most ``1 + 1e-9``) is asserted.
    """
    if T.source != coupleA or T.target != coupleB:
        raise PreconditionError("T does not map coupleA to coupleB")
    bound = operator_norm_l_bounds(T)
    if bound.upper > 1.0 + 1e-12:
        raise PreconditionError(
            f"||T||_l must be at most 1 (certified upper bound {bound.upper:.6g})"
        )
    if samples is None:
        samples = _default_samples(coupleA, np.random.default_rng(seed))
    ratio = 0.0
    for a in samples:
        a = check_element(coupleA, a)
        na = k_space_norm(coupleA, a, params)
        if na == 0.0:
            continue
        ratio = max(ratio, k_space_norm(coupleB, T(a), params) / na)
    if check and ratio > 1.0 + 1e-9:
        raise AssertionError(f"interpolation property fails: ratio {ratio!r}")
    return ratio


@dataclass(frozen=True)
class Prop41Result:
    """Outcome of comparing subcouple and ambient ``(theta, q)`` norms.

    ``b_subcouple`` records the structural check.  When it holds, ``equal``
    says whether all norms agreed to ``rtol``.  ``inclusion`` says whether
    the subcouple norm dominated the ambient one on every sample, and
    ``strict`` whether it did so strictly somewhere.
    """

    b_subcouple: bool
    equal: bool
    inclusion: bool
    strict: bool
    max_rel_diff: float

    def __bool__(self):
        return self.b_subcouple and self.equal


def _sub_norm(spec, a, params):
    curve = subcouple_curve(spec, a)
    if curve is not None:
        return curve_norm(curve, params)
    amb = spec.ambient
    return _transition_norm(lambda t: subcouple_k(spec, a, t), amb.norm(0, a), amb.norm(1, a), params)


def prop41_check(spec, params, samples=None, rtol=1e-8, seed=0):
    """Compare ``(theta, q)`` norms computed in a subcouple and in its ambient couple.

    For a b-subcouple the K-curves agree, so the norms must agree.  Otherwise
    only the inclusion (subcouple norm at least the ambient norm) is
    guaranteed; the result reports it and whether it is strict.
    """
    if samples is None:
        rng = np.random.default_rng(seed)
        cs = list(np.eye(spec.dim)) + list(rng.normal(size=(4, spec.dim)))
        samples = [spec.element(c) for c in cs]
    samples = [np.asarray(a, dtype=float) for a in samples]
    b_sub = is_b_subcouple(spec, samples=samples).holds
    worst, inclusion, strict = 0.0, True, False
    for a in samples:
        if not np.any(a):
            continue
        ns = _sub_norm(spec, a, params)
        na = k_space_norm(spec.ambient, a, params)
        rel = abs(ns - na) / max(ns, na)
        worst = max(worst, rel)
        if na > ns * (1 + rtol):
            inclusion = False
        if ns > na * (1 + rtol):
            strict = True
    return Prop41Result(b_sub, b_sub and worst <= rtol, inclusion, strict, worst)


# discrete Lorentz couples


@dataclass(frozen=True, eq=False)
class LorentzEquivalence:
    """Both K-functionals on a ``t`` grid and the extreme ratios ``rhs / lhs``."""

    ts: np.ndarray
    lhs: np.ndarray
    rhs: np.ndarray
    min_ratio: float
    max_ratio: float
    window: tuple = (0.125, 8.0)

    @property
    def within_window(self):
        return self.window[0] <= self.min_ratio and self.max_ratio <= self.window[1]


def lorentz_k(p0, b, t):
    """``K(t, b)`` for the pair ``{L_(p0, inf), l_inf}`` on ``x = 1..n``.

    The quasi-norm of the first space is ``sup_x x^(1/p0) b*(x)``.  For
    nonnegative nonincreasing ``b`` truncation at a level ``s`` is an
    optimal split, so ``K = min_s max_x x^(1/p0) (b_x - s)_+ + t s``.  The
    objective is convex and piecewise linear in ``s``; it is minimized
    exactly over its kinks.
    """
    b = np.asarray(b, dtype=float)
    n = b.size
    if n == 0 or not np.any(b):
        return 0.0
    c = np.arange(1, n + 1) ** (1.0 / p0)
    cand = [0.0, *b.tolist()]
    # crossings of the lines c_i (b_i - s) and c_j (b_j - s)
    ci, cj = np.meshgrid(c, c, indexing="ij")
    bi, bj = np.meshgrid(b, b, indexing="ij")
    with np.errstate(divide="ignore", invalid="ignore"):
        s = (ci * bi - cj * bj) / (ci - cj)
    s = s[np.isfinite(s)]
    cand.extend(s[(s >= 0) & (s <= b[0])].tolist())
    cand = np.unique(np.array(cand))
    vals = np.max(c[None, :] * np.maximum(b[None, :] - cand[:, None], 0.0), axis=1) + t * cand
    return float(vals.min())


def weighted_linf_k(p0, p1, b, t):
    """``K`` of the couple ``{l_inf(x^(1/p0)), l_inf(x^(1/p1))}``: a closed form."""
    b = np.abs(np.asarray(b, dtype=float))
    if b.size == 0:
        return 0.0
    x = np.arange(1, b.size + 1, dtype=float)
    inv0 = x ** (-1.0 / p0)
    inv1 = np.ones_like(x) if math.isinf(p1) else x ** (-1.0 / p1)
    return float(np.max(b / (inv0 + inv1 / t)))


def lorentz_k_equiv(p0, p1, b, t_grid=None, window=(0.125, 8.0), check=True):
    """Compare the Lorentz-couple K-functional with the weighted ``l_inf`` one.

    Only ``p1 = inf`` is supported, where the Lorentz K-functional is exact.
    Returns both curves on the grid and the extreme ratios ``rhs / lhs``;
    with ``check`` a ratio outside ``window`` raises ``AssertionError``.
    """
    p0 = float(p0)
    p1 = float(p1)
    if not 1.0 <= p0 < p1:
        raise PreconditionError("need 1 <= p0 < p1")
    if not math.isinf(p1):
        raise UnsupportedOperationError("only p1 = inf is supported")
    b = np.asarray(b, dtype=float).reshape(-1)
    if np.any(b < 0) or np.any(np.diff(b) > 0):
        raise PreconditionError("b must be nonnegative and nonincreasing")
    ts = np.asarray(2.0 ** np.arange(-10, 11) if t_grid is None else t_grid, dtype=float)
    lhs = np.array([lorentz_k(p0, b, t) for t in ts])
    rhs = np.array([weighted_linf_k(p0, INF, b, t) for t in ts])
    if not np.any(b):
        lo = hi = 1.0
    else:
        r = rhs / lhs
        lo, hi = float(r.min()), float(r.max())
    res = LorentzEquivalence(ts, lhs, rhs, lo, hi, tuple(window))
    if check and not res.within_window:
        raise AssertionError(f"ratios [{lo}, {hi}] leave the window {window}")
    return res


__all__ = [
    "KMethodParams",
    "curve_norm",
    "k_space_norm",
    "k_space_norm_quadrature",
    "interpolation_property_check",
    "Prop41Result",
    "prop41_check",
    "LorentzEquivalence",
    "lorentz_k",
    "weighted_linf_k",
    "lorentz_k_equiv",
]
