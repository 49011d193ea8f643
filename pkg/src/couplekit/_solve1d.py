"""Golden-section search with a convexity certificate.

The search runs over a scalar parameter ``u`` on which the objective is
unimodal.  Every evaluation also reports a coordinate ``v`` (monotone in
``u``) in which the objective is convex.  Secant lines through sampled
``(v, h)`` pairs then bound the objective from below between samples, which
gives a certified bracket ``[lower, upper]`` for the minimum.
"""

import math

import numpy as np

from .exceptions import ConvergenceError

_GOLD = (math.sqrt(5.0) - 1.0) / 2.0


def convex_lower_bound(vs, hs, floor=0.0):
    """Lower bound for ``min h`` over ``[min vs, max vs]`` for convex ``h``.

    On the segment between samples ``i`` and ``i + 1`` the secant lines of
    the neighbouring segments, extended, lie below ``h``.
    """
    vs = np.asarray(vs, dtype=float)
    hs = np.asarray(hs, dtype=float)
    order = np.argsort(vs, kind="stable")
    vs, hs = vs[order], hs[order]
    keep = np.concatenate([[True], np.diff(vs) > 0])
    if not np.all(keep):
        # duplicate abscissae: keep the smaller value
        uniq, inv = np.unique(vs, return_inverse=True)
        best = np.full(uniq.shape, np.inf)
        np.minimum.at(best, inv, hs)
        vs, hs = uniq, best
    m = vs.size
    if m == 1:
        return float(hs[0])
    if m == 2:
        return floor
    s = np.diff(hs) / np.diff(vs)
    x0, x1 = vs[:-1], vs[1:]
    h0, h1 = hs[:-1], hs[1:]
    nan = np.full(1, np.nan)
    sl = np.concatenate([nan, s[:-1]])  # secant of the segment to the left
    sr = np.concatenate([s[1:], nan])  # secant of the segment to the right
    with np.errstate(invalid="ignore", divide="ignore"):
        # left line passes through (x0, h0); right line through (x1, h1)
        l0, l1 = h0, h0 + sl * (x1 - x0)
        r0, r1 = h1 + sr * (x0 - x1), h1
        both = np.isfinite(sl) & np.isfinite(sr)
        b_end = np.minimum(np.maximum(l0, r0), np.maximum(l1, r1))
        xc = (h1 - sr * x1 - h0 + sl * x0) / (sl - sr)
        inside = both & (sl != sr) & (xc > x0) & (xc < x1)
        b_cross = np.where(inside, h0 + sl * (xc - x0), np.inf)
        bounds = np.where(both, np.minimum(b_end, b_cross), floor)
        only_l = np.isfinite(sl) & ~np.isfinite(sr)
        only_r = np.isfinite(sr) & ~np.isfinite(sl)
        bounds = np.where(only_l, np.minimum(l0, l1), bounds)
        bounds = np.where(only_r, np.minimum(r0, r1), bounds)
    return max(floor, float(bounds.min()))


def _thin(vs, hs, rel):
    """Merge samples closer than ``rel * max|v|``, keeping the lower one.

    Secants through numerically coincident points are pure rounding noise.
    """
    order = np.argsort(vs, kind="stable")
    vs, hs = vs[order], hs[order]
    gap = rel * float(np.max(np.abs(vs)))
    kv, kh = [vs[0]], [hs[0]]
    for v, h in zip(vs[1:], hs[1:]):
        if v - kv[-1] > gap:
            kv.append(v)
            kh.append(h)
        elif h < kh[-1]:
            kv[-1], kh[-1] = v, h
    return np.array(kv), np.array(kh)


def golden_certified(f, lo, hi, rtol=1e-9, max_iter=200, extra=(), check_every=4):
    """Minimize ``h`` over ``u in [lo, hi]`` with a certified stopping rule.

    Parameters
    ----------
    f : callable
        ``f(u) -> (v, h, payload)``; ``h`` unimodal in ``u``, convex in ``v``,
        ``v`` monotone in ``u``, ``h >= 0``.
    extra : iterable of (v, h, payload)
        Samples outside the ``u`` bracket (for example exact endpoints) that
        take part in the certificate and in the choice of the best point.

    Returns
    -------
    best : tuple
        ``(v, h, payload)`` of the best sample.
    lower : float
        Certified lower bound for the minimum.

    Raises
    ------
    ConvergenceError
        When the gap stays above ``rtol * h_best`` after ``max_iter`` steps.
    """
    samples = list(extra)

    def ev(u):
        r = f(u)
        samples.append(r)
        return r[1]

    a, b = float(lo), float(hi)
    width = b - a
    ev(a)
    if b == a:
        best = min(samples, key=lambda r: r[1])
        return best, best[1]
    ev(b)
    c = b - _GOLD * (b - a)
    d = a + _GOLD * (b - a)
    fc, fd = ev(c), ev(d)
    lower = 0.0
    for it in range(max_iter):
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - _GOLD * (b - a)
            fc = ev(c)
        else:
            a, c, fc = c, d, fd
            d = a + _GOLD * (b - a)
            fd = ev(d)
        collapsed = (b - a) <= 1e-15 * width
        if (it >= 12 and it % check_every == 0) or collapsed:
            best = min(samples, key=lambda r: r[1])
            upper = best[1]
            if upper == 0.0:
                return best, 0.0
            vs = np.array([r[0] for r in samples])
            hs = np.array([r[1] for r in samples])
            tv, th = _thin(vs, hs, 1e-12)
            lower = convex_lower_bound(tv, th)
            if upper - lower <= rtol * upper:
                return best, lower
            if collapsed:
                break
    best = min(samples, key=lambda r: r[1])
    raise ConvergenceError(lower, best[1])
