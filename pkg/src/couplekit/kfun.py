"""K- and J-functionals, exact K-curves and curve realization.

``k_functional`` is the general route: a certified one-dimensional search
along the Pareto frontier of split norms.  The closed forms
(``k_l1_linf``, ``k_equal_exponent``) and the exact piecewise-linear curve
(``k_curve``) are independent routes used to cross-check it.
"""

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.special import expit, log_expit

from ._solve1d import golden_certified
from .couple import INF, check_element, conjugate_exponent, weighted_norm, check_exponent
from .curves import ConcaveCurve, least_concave_majorant  # noqa: F401 (re-export)
from .exceptions import (
    ConvergenceError,
    CurveError,
    ExponentRangeError,
    InadmissibleCurveError,
    PreconditionError,
    UnsupportedOperationError,
)

DEFAULT_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class Split:
    """A decomposition ``a = a0 + a1`` and the objective value it achieves."""

    a0: np.ndarray
    a1: np.ndarray
    value: float


def phi_p(x, y, p):
    """The l_p norm of the pair ``(x, y)`` of nonnegative numbers."""
    if p == INF:
        return max(x, y)
    if p == 1:
        return x + y
    m = max(x, y)
    if m == 0.0:
        return 0.0
    return m * ((x / m) ** p + (y / m) ** p) ** (1.0 / p)


def _check_t(t):
    t = float(t)
    if not (t > 0) or not math.isfinite(t):
        raise ValueError(f"t must be positive and finite, got {t!r}")
    return t


def j_functional(couple, a, t, p=INF):
    """``J_p(t, a) = (||a||_0^p + t^p ||a||_1^p)^(1/p)``; ``J = J_inf``."""
    a = check_element(couple, a)
    t = _check_t(t)
    p = check_exponent(p)
    n0 = weighted_norm(a, couple.w0, couple.p0)
    n1 = weighted_norm(a, couple.w1, couple.p1)
    return phi_p(n0, t * n1, p)


def decreasing_rearrangement(a):
    """``|a|`` sorted nonincreasing; ties keep their original order."""
    a = np.abs(np.asarray(a, dtype=float).reshape(-1))
    return a[np.argsort(-a, kind="stable")]


# general solver


def _frontier_l1_l1(x, w0, w1):
    """Vertices of ``g(v) = min ||x - y||_0`` s.t. ``||y||_1 <= v`` (both weighted l_1).

    Greedy fractional knapsack: spend the l_1(w1) budget on coordinates with the
    largest saving ratio ``w0 / w1`` first.
    """
    order = np.argsort(-(w0 / w1), kind="stable")
    cost = np.cumsum((w1 * x)[order])
    saved = np.cumsum((w0 * x)[order])
    v = np.concatenate([[0.0], cost])
    g = float(np.sum(w0 * x)) - np.concatenate([[0.0], saved])
    return order, v, np.maximum(g, 0.0)


def _fill_l1(x, w1, order, v):
    """The greedy ``y`` with ``||y||_{l_1(w1)} = v`` along ``order``."""
    y = np.zeros_like(x)
    left = v
    for i in order:
        c = w1[i] * x[i]
        if c <= left:
            y[i] = x[i]
            left -= c
        else:
            y[i] = left / w1[i]
            break
    return y


def _frontier_point(x, w0, w1, p0, p1, lam):
    """Minimizer ``y`` of ``||x - y||_0^p0 + mu ||y||_1^p1`` over ``0 <= y <= x``.

    Up to constants absorbed into ``mu``, each coordinate solves
    ``w0^p0 (x - y)^(p0 - 1) = mu w1^p1 y^(p1 - 1)``.  The multiplier is
    parametrized by ``lam`` so that ``y`` moves at a linear rate near both
    ends of the frontier:

    * ``p0 = 1``: ``y = min(x, lam * k)``;
    * ``p1 = 1``: ``x - y = min(x, lam * k)``;
    * otherwise ``lam`` is ``log(mu)``.
    """
    y = np.zeros_like(x)
    pos = x > 0
    xp, a0, a1 = x[pos], np.log(w0[pos]), np.log(w1[pos])
    if p0 == 1:
        k = np.exp((a0 - p1 * a1) / (p1 - 1.0))
        y[pos] = np.minimum(xp, lam * k)
        return y
    if p1 == 1:
        k = np.exp((a1 - p0 * a0) / (p0 - 1.0))
        y[pos] = xp - np.minimum(xp, lam * k)
        return y
    # remaining case: lam is log(mu)
    u = lam
    if u == -np.inf:
        return x.copy()
    if u == np.inf:
        return y
    if p0 == p1:
        e = np.clip((u + p1 * a1 - p0 * a0) / (p0 - 1.0), -700.0, 700.0)
        y[pos] = xp / (1.0 + np.exp(e))
        return y
    # Newton in z = logit(y / x); F is monotone and convex or concave in z
    lx = np.log(xp)
    c = p0 * a0 - u - p1 * a1 + (p0 - p1) * lx
    z = np.zeros_like(xp)
    for _ in range(60):
        fz = c + (p0 - 1.0) * log_expit(-z) - (p1 - 1.0) * log_expit(z)
        dz = -(p0 - 1.0) * expit(z) - (p1 - 1.0) * expit(-z)
        step = fz / dz
        z = z - step
        if np.all(np.abs(step) <= 1e-13 * np.maximum(1.0, np.abs(z))):
            break
    y[pos] = xp * expit(z)
    return y


def _solve_magnitudes(couple, x, t, p, tol):
    """Optimal ``|a_1|`` for nonnegative ``x``; returns ``(a1, lower_bound)``."""
    # K is homogeneous but the frontier parametrization is not when p0 != p1
    scale = float(np.max(x))
    y, lower = _solve_unit(couple, x / scale, t, p, tol)
    return y * scale, lower * scale


def _solve_unit(couple, x, t, p, tol):
    w0, w1, p0, p1 = couple.w0, couple.w1, couple.p0, couple.p1

    def n0(y):
        return weighted_norm(y, w0, p0)

    def n1(y):
        return weighted_norm(y, w1, p1)

    if p1 == INF:
        def f(s):
            y = np.minimum(x, s / w1)
            return s, phi_p(n0(x - y), t * s, p), y

        best, lower = golden_certified(f, 0.0, float(np.max(w1 * x)), tol)
        return best[2], lower
    if p0 == INF:
        def f(r):
            z = np.minimum(x, r / w0)
            y = x - z
            return r, phi_p(r, t * n1(y), p), y

        best, lower = golden_certified(f, 0.0, float(np.max(w0 * x)), tol)
        return best[2], lower
    if p0 == 1 and p1 == 1:
        order, vs, gs = _frontier_l1_l1(x, w0, w1)

        def f(v):
            return v, phi_p(float(np.interp(v, vs, gs)), t * v, p), v

        best, lower = golden_certified(f, 0.0, float(vs[-1]), tol)
        return _fill_l1(x, w1, order, best[2]), lower

    total1 = n1(x)
    ends = [
        (0.0, phi_p(n0(x), 0.0, p), np.zeros_like(x)),
        (total1, phi_p(0.0, t * total1, p), x.copy()),
    ]
    pos = x > 0
    if p0 == 1 or p1 == 1:
        # the frontier is traversed for lam in [0, lam_max]
        if p0 == 1:
            k = np.exp((np.log(w0[pos]) - p1 * np.log(w1[pos])) / (p1 - 1.0))
        else:
            k = np.exp((np.log(w1[pos]) - p0 * np.log(w0[pos])) / (p0 - 1.0))
        lam_max = float(np.max(x[pos] / k))

        def f(lam):
            y = _frontier_point(x, w0, w1, p0, p1, lam)
            v = n1(y)
            return v, phi_p(n0(x - y), t * v, p), y

        best, lower = golden_certified(f, 0.0, lam_max, tol, extra=ends)
        return best[2], lower

    def g(u):
        y = _frontier_point(x, w0, w1, p0, p1, u)
        v = n1(y)
        return v, phi_p(n0(x - y), t * v, p), y

    def to_u(sig):
        if sig <= 0.0:
            return -np.inf
        if sig >= 1.0:
            return np.inf
        return (p0 - 1.0) * math.log(sig) - (p1 - 1.0) * math.log1p(-sig)

    seen = []

    def f(sig):
        # mu = sig^(p0-1) / (1-sig)^(p1-1): x - y ~ sig near 0 and y ~ 1 - sig near 1
        r = g(to_u(sig))
        seen.append((sig, r))
        return r

    try:
        best, lower = golden_certified(f, 0.0, 1.0, tol, extra=ends)
    except ConvergenceError:
        # sig is too coarse next to 0 or 1; search log(mu) around the best sample
        sigs = sorted(seen, key=lambda e: e[0])
        i = min(range(len(sigs)), key=lambda j: sigs[j][1][1])
        lo = to_u(sigs[max(i - 1, 0)][0])
        hi = to_u(sigs[min(i + 1, len(sigs) - 1)][0])
        lo = lo if np.isfinite(lo) else hi - 80.0
        hi = hi if np.isfinite(hi) else lo + 80.0
        prior = ends + [r for _, r in seen]
        best, lower = golden_certified(g, lo, hi, tol, extra=prior)
    return best[2], lower


def k_functional(couple, a, t, p=1, tol=DEFAULT_TOL):
    """``K_p(t, a) = inf (||a0||_0^p + t^p ||a1||_1^p)^(1/p)`` over ``a = a0 + a1``.

    The search runs over a scalar parametrization of the Pareto frontier of
    ``(||a0||_0, ||a1||_1)`` and stops once a convexity certificate brackets
    the optimum to relative tolerance ``tol``.

    Returns
    -------
    value : float
    split : Split
        A split achieving ``value``.

    Raises
    ------
    ConvergenceError
        If the certificate cannot be closed; carries the bound pair.
    """
    a = check_element(couple, a)
    t = _check_t(t)
    p = check_exponent(p)
    if not tol > 0:
        raise ValueError("tol must be positive")
    x = np.abs(a)
    if not np.any(x):
        z = np.zeros_like(a)
        return 0.0, Split(z, z.copy(), 0.0)
    y, _ = _solve_magnitudes(couple, x, t, p, tol)
    a1 = np.sign(a) * np.minimum(y, x)
    a0 = a - a1
    value = phi_p(
        weighted_norm(a0, couple.w0, couple.p0),
        t * weighted_norm(a1, couple.w1, couple.p1),
        p,
    )
    return value, Split(a0, a1, value)


def k_value(couple, a, t, p=1, tol=DEFAULT_TOL):
    """Shorthand for ``k_functional(...)[0]``."""
    return k_functional(couple, a, t, p, tol)[0]


def _threads():
    raw = os.environ.get("COUPLEKIT_THREADS", "")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def k_values(couple, a, ts, p=1, tol=DEFAULT_TOL):
    """``K_p(t, a)`` over a grid of ``t``.

    Evaluations run on up to ``COUPLEKIT_THREADS`` worker threads; the result
    order follows ``ts`` regardless of scheduling.
    """
    ts = [float(t) for t in np.asarray(ts, dtype=float).reshape(-1)]
    workers = _threads()
    if workers == 1 or len(ts) < 2:
        return np.array([k_value(couple, a, t, p, tol) for t in ts])
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return np.array(list(pool.map(lambda t: k_value(couple, a, t, p, tol), ts)))


# closed forms


def k_l1_linf(a, t):
    """``K(t, a)`` for the unweighted ``{l_1, l_inf}`` couple: the integral of ``a*``."""
    t = _check_t(t)
    s = decreasing_rearrangement(a)
    n = s.size
    if t >= n:
        return float(np.sum(s))
    k = int(math.floor(t))
    return float(np.sum(s[:k]) + (t - k) * s[k])


def k_l1_linf_curve(a):
    """Exact K-curve of ``a`` in ``{l_1, l_inf}``: breakpoints ``1..n``, slopes ``a*``."""
    s = decreasing_rearrangement(a)
    n = s.size
    return ConcaveCurve.from_slopes(np.arange(1, n + 1), np.concatenate([s, [0.0]]))


def equal_exponent_coefficients(couple, t):
    """Per-coordinate factors ``c_m`` with ``K_p(t, a) = ||c a||_p`` when ``p0 = p1 = p``.

    ``c = (w0^(-p') + (t w1)^(-p'))^(-1/p')``; the cases ``p = 1`` and
    ``p = inf`` are the exact limits ``min(w0, t w1)`` and the harmonic form.
    """
    t = _check_t(t)
    if couple.p0 != couple.p1:
        raise ExponentRangeError(
            f"equal exponents required, got p0={couple.p0}, p1={couple.p1}"
        )
    p = couple.p0
    w0, tw1 = couple.w0, t * couple.w1
    if p == 1:
        return np.minimum(w0, tw1)
    if p == INF:
        return 1.0 / (1.0 / w0 + 1.0 / tw1)
    q = conjugate_exponent(p)
    return np.exp(-np.logaddexp(-q * np.log(w0), -q * np.log(tw1)) / q)


def k_equal_exponent(couple, a, t):
    """Closed form of ``K_p(t, a)`` for a couple with ``p0 = p1 = p``."""
    a = check_element(couple, a)
    c = equal_exponent_coefficients(couple, t)
    return weighted_norm(a, c, couple.p0)


# exact K-curves for exponents in {1, inf}


def _frontier_vertices(couple, x):
    """Points ``(v, g(v))`` containing every vertex of the split frontier.

    ``g(v) = min ||a0||_0`` over splits with ``||a1||_1 <= v``; for
    exponents in ``{1, inf}`` it is convex and piecewise linear.
    """
    w0, w1, p0, p1 = couple.w0, couple.w1, couple.p0, couple.p1
    if p0 == 1 and p1 == 1:
        _, v, g = _frontier_l1_l1(x, w0, w1)
        return v, g
    if p1 == INF:
        cand = [0.0] + list(w1 * x)
        if p0 == INF:
            # crossings of the lines w0_i (x_i - s / w1_i)
            sl = w0 / w1
            ic = w0 * x
            n = x.size
            for i in range(n):
                for j in range(i + 1, n):
                    if sl[i] != sl[j]:
                        s = (ic[i] - ic[j]) / (sl[i] - sl[j])
                        if s > 0:
                            cand.append(s)
        s = np.unique(np.clip(np.array(cand), 0.0, float(np.max(w1 * x))))
        g = np.array([weighted_norm(np.maximum(x - si / w1, 0.0), w0, p0) for si in s])
        return s, g
    # p0 == inf, p1 == 1: parametrize by r = ||a0||_0
    r = np.unique(np.concatenate([[0.0], w0 * x]))
    v = np.array([float(np.sum(w1 * np.maximum(x - ri / w0, 0.0))) for ri in r])
    order = np.argsort(v, kind="stable")
    return v[order], r[order]


def k_curve(couple, a):
    """Exact piecewise-linear curve ``t -> K(t, a)`` (the ``p = 1`` functional).

    Available when both exponents lie in ``{1, inf}``.  ``K`` is the lower
    envelope of the lines ``g(v_j) + t v_j`` over frontier vertices.
    """
    a = check_element(couple, a)
    if not couple.is_piecewise_linear:
        raise UnsupportedOperationError(
            "exact K-curves need both exponents in {1, inf}"
        )
    x = np.abs(a)
    if not np.any(x):
        return ConcaveCurve.zero()
    v, g = _frontier_vertices(couple, x)
    # dedupe v keeping the smallest g
    keep = np.concatenate([np.diff(v) > 0, [True]])
    v, g = v[keep], g[keep]
    # lower envelope of the lines g_j + t v_j, taken in order of decreasing slope
    lines = []
    for vj, gj in zip(v[::-1], g[::-1]):
        while lines:
            vb, gb = lines[-1]
            tb = (gj - gb) / (vb - vj)
            if tb <= 0:
                lines.pop()
                continue
            if len(lines) >= 2:
                va, ga = lines[-2]
                # collinear vertices give (numerically) equal crossings
                if (gj - ga) / (va - vj) <= (gb - ga) / (va - vb) * (1 + 1e-12):
                    lines.pop()
                    continue
            break
        lines.append((vj, gj))
    v = np.array([ln[0] for ln in lines])
    g = np.array([ln[1] for ln in lines])
    bps = (g[1:] - g[:-1]) / (v[:-1] - v[1:])
    return ConcaveCurve.from_slopes(bps, v)


# realization and the cone of K-curves


def _is_integer(t):
    return abs(t - round(t)) <= 1e-12 * max(1.0, abs(t))


def realize_k(phi):
    """An element of unweighted ``{l_1, l_inf}`` whose K-curve is ``phi``.

    ``phi`` must vanish at ``0+``, be linear between consecutive integers
    and be eventually constant.  The element is the vector of slopes on the
    unit intervals.

    Raises
    ------
    InadmissibleCurveError
        Naming the failing clause.
    """
    vscale = max(abs(phi.left_value), float(np.max(np.abs(phi.values), initial=0.0)), 1.0)
    if abs(phi.left_value) > 1e-12 * vscale:
        raise InadmissibleCurveError("phi(0+)!=0", "phi(0+)!=0: a K-curve vanishes at 0+")
    for b in phi.breakpoints:
        if not _is_integer(b):
            raise InadmissibleCurveError(
                "non-integer breakpoint", f"non-integer breakpoint at t={b!r}"
            )
    if phi.terminal_slope > 1e-12 * max(1.0, float(np.max(np.abs(phi.slopes)))):
        raise InadmissibleCurveError(
            "not eventually constant", "terminal slope must be 0 (phi eventually constant)"
        )
    if phi.breakpoints.size == 0:
        return np.zeros(1)
    m = int(round(phi.breakpoints[-1]))
    grid = np.arange(1, m + 1, dtype=float)
    vals = np.concatenate([[0.0], phi(grid)])
    return np.diff(vals)


CONE_KINDS = ("halfline", "unit_interval", "discrete")


def cone_membership(phi, m_kind):
    """Whether ``phi`` satisfies the characterization of K-curves for ``m_kind``.

    ``discrete``: ``phi(0+) = 0`` and ``phi`` linear between integers.
    ``halfline``: ``phi(0+) = 0``.
    ``unit_interval``: ``phi(0+) = 0`` and ``phi`` constant on ``[1, inf)``.
    """
    if m_kind not in CONE_KINDS:
        raise ValueError(f"unknown kind {m_kind!r}; expected one of {CONE_KINDS}")
    if not isinstance(phi, ConcaveCurve):
        raise CurveError("phi must be a ConcaveCurve")
    scale = max(float(np.max(np.abs(phi.values), initial=0.0)), abs(phi.left_value), 1.0)
    if abs(phi.left_value) > 1e-12 * scale:
        return False
    if m_kind == "halfline":
        return True
    if m_kind == "discrete":
        return all(_is_integer(b) for b in phi.breakpoints)
    sscale = max(float(np.max(np.abs(phi.slopes))), 1e-300)
    if phi.terminal_slope > 1e-12 * sscale:
        return False
    return bool(np.all(phi.breakpoints <= 1.0 + 1e-12))


def check_curve_admissible(phi):
    """Raise unless ``phi`` is realizable by :func:`realize_k`."""
    realize_k(phi)
    return True


def k_inf_l1_linf_clip(a, t):
    """``K_inf(t, a)`` in ``{l_1, l_inf}`` through the clipping level ``s``.

    Minimizes ``max(sum (|a_i| - s)_+, t s)``: the left term is convex,
    piecewise linear and decreasing, so the optimum is the crossing point.
    """
    t = _check_t(t)
    x = np.sort(np.abs(np.asarray(a, dtype=float).reshape(-1)))[::-1]
    if not np.any(x):
        return 0.0
    # on [x_{k}, x_{k-1}] the tail sum is c_k - k s with c_k = sum of the k largest
    c = np.cumsum(x)
    nxt = np.concatenate([x[1:], [0.0]])
    for k in range(1, x.size + 1):
        s = c[k - 1] / (k + t)
        if nxt[k - 1] <= s <= x[k - 1]:
            return t * s
    raise PreconditionError("no crossing found")  # unreachable for finite input
