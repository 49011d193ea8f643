"""Exact piecewise-linear concave curves on ``(0, inf)``.

A :class:`ConcaveCurve` is stored as its breakpoints, the values there, the
limit ``phi(0+)``, the slope on ``(0, t_1]`` and the slope on
``[t_k, inf)``.  Slopes between breakpoints are derived from the values; the
initial slope is stored redundantly and cross-checked on construction.
"""

import numpy as np

from .exceptions import CurveError

_RTOL = 1e-9


def _scale(*arrays):
    s = 0.0
    for a in arrays:
        a = np.abs(np.atleast_1d(np.asarray(a, dtype=float)))
        if a.size:
            s = max(s, float(a.max()))
    return s


class ConcaveCurve:
    """Nonnegative, nondecreasing, concave, piecewise linear ``phi`` on ``(0, inf)``.

    Parameters
    ----------
    breakpoints : array_like
        Strictly increasing positive reals ``t_1 < ... < t_k`` (``k`` may be 0).
    values : array_like
        ``phi(t_i)``.
    left_value : float
        ``phi(0+)``.
    initial_slope, terminal_slope : float
        Slopes on ``(0, t_1]`` and ``[t_k, inf)``.
    """

    __slots__ = ("breakpoints", "values", "left_value", "initial_slope", "terminal_slope")

    def __init__(self, breakpoints, values, left_value, initial_slope, terminal_slope):
        t = np.array(breakpoints, dtype=float).reshape(-1)
        v = np.array(values, dtype=float).reshape(-1)
        if t.shape != v.shape:
            raise CurveError("breakpoints and values differ in length")
        left_value = float(left_value)
        initial_slope = float(initial_slope)
        terminal_slope = float(terminal_slope)
        numbers = np.concatenate([t, v, [left_value, initial_slope, terminal_slope]])
        if not np.all(np.isfinite(numbers)):
            raise CurveError("curve data must be finite")
        if t.size and (t[0] <= 0 or np.any(np.diff(t) <= 0)):
            raise CurveError("breakpoints must be positive and strictly increasing")
        t.setflags(write=False)
        v.setflags(write=False)
        object.__setattr__(self, "breakpoints", t)
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "left_value", left_value)
        object.__setattr__(self, "initial_slope", initial_slope)
        object.__setattr__(self, "terminal_slope", terminal_slope)
        self._check()

    def __setattr__(self, name, value):
        raise AttributeError("ConcaveCurve is immutable")

    def _check(self):
        t, v = self.breakpoints, self.values
        slopes = self.slopes
        vscale = _scale(v, self.left_value)
        sscale = _scale(slopes)
        if self.left_value < -_RTOL * vscale:
            raise CurveError("phi(0+) must be nonnegative")
        if self.terminal_slope < -_RTOL * sscale:
            raise CurveError("terminal slope must be nonnegative")
        if t.size:
            implied = self.left_value + self.initial_slope * t[0]
            if abs(implied - v[0]) > _RTOL * max(vscale, sscale * t[0]) + np.finfo(float).tiny:
                raise CurveError(
                    f"initial slope inconsistent with values: {implied!r} != {v[0]!r}"
                )
        elif abs(self.initial_slope - self.terminal_slope) > _RTOL * sscale:
            raise CurveError("a curve without breakpoints must have one slope")
        # a slope taken over a short piece carries rounding noise ~ eps |v| / dt
        noise = np.zeros(slopes.size)
        if t.size > 1:
            noise[1:-1] = 8 * np.finfo(float).eps * vscale / np.diff(t)
        if np.any(np.diff(slopes) > _RTOL * sscale + noise[:-1] + noise[1:]):
            raise CurveError("slopes must be nonincreasing (concavity)")
        if v.size and v.min() < -_RTOL * vscale:
            raise CurveError("values must be nonnegative")

    # construction helpers

    @classmethod
    def from_slopes(cls, breakpoints, slopes, left_value=0.0):
        """Build from ``k`` breakpoints and ``k + 1`` slopes."""
        t = np.asarray(breakpoints, dtype=float).reshape(-1)
        s = np.asarray(slopes, dtype=float).reshape(-1)
        if s.shape[0] != t.shape[0] + 1:
            raise CurveError("need one more slope than breakpoints")
        widths = np.diff(np.concatenate([[0.0], t]))
        values = left_value + np.cumsum(s[:-1] * widths)
        return cls(t, values, left_value, s[0], s[-1])

    @classmethod
    def constant(cls, c):
        return cls([], [], c, 0.0, 0.0)

    @classmethod
    def zero(cls):
        return cls.constant(0.0)

    # derived data

    @property
    def slopes(self):
        """All slopes: initial, interior pieces, terminal (length ``k + 1``)."""
        t, v = self.breakpoints, self.values
        if t.size == 0:
            return np.array([self.initial_slope])
        inner = np.diff(v) / np.diff(t)
        return np.concatenate([[self.initial_slope], inner, [self.terminal_slope]])

    @property
    def limit(self):
        """``phi(inf)``, finite only when the terminal slope vanishes."""
        if self.terminal_slope > 0:
            return np.inf
        return float(self.values[-1]) if self.values.size else self.left_value

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        if np.any(t <= 0):
            raise CurveError("curves are evaluated at t > 0 only")
        bp, v = self.breakpoints, self.values
        if bp.size == 0:
            return self.left_value + self.initial_slope * t
        out = np.interp(t, bp, v)
        lo = t < bp[0]
        hi = t > bp[-1]
        out = np.where(lo, self.left_value + self.initial_slope * t, out)
        out = np.where(hi, v[-1] + self.terminal_slope * (t - bp[-1]), out)
        return out if out.ndim else float(out)

    def scaled(self, c):
        """``c * phi`` for ``c >= 0``."""
        if c < 0:
            raise CurveError("cone scaling needs c >= 0")
        return ConcaveCurve(
            self.breakpoints,
            c * self.values,
            c * self.left_value,
            c * self.initial_slope,
            c * self.terminal_slope,
        )

    def __repr__(self):
        return (
            f"ConcaveCurve(breakpoints={self.breakpoints.tolist()}, "
            f"values={self.values.tolist()}, left_value={self.left_value}, "
            f"initial_slope={self.initial_slope}, terminal_slope={self.terminal_slope})"
        )


def curve_eval(curve, t):
    """``phi(t)`` for ``t > 0``; raises :class:`CurveError` otherwise."""
    return curve(t)


def _upper_hull(xs, ys):
    """Indices of the upper convex hull of points sorted by strictly increasing x.

    Collinear middle points are dropped.
    """
    hull = []
    for i in range(len(xs)):
        while len(hull) >= 2:
            o, a = hull[-2], hull[-1]
            cross = (xs[a] - xs[o]) * (ys[i] - ys[o]) - (ys[a] - ys[o]) * (xs[i] - xs[o])
            if cross >= 0:
                hull.pop()
            else:
                break
        hull.append(i)
    return hull


def monotone_upper_hull(xs, ys, terminal_slope=0.0):
    """Upper hull indices, cut where the hull slope falls to ``terminal_slope``.

    ``xs`` must be strictly increasing.  Past the last returned vertex the
    majorant continues with slope ``terminal_slope``.
    """
    hull = _upper_hull(xs, ys)
    while len(hull) >= 2:
        a, b = hull[-2], hull[-1]
        if (ys[b] - ys[a]) <= terminal_slope * (xs[b] - xs[a]):
            hull.pop()
        else:
            break
    return hull


def _dedupe_max(ts, ys):
    order = np.lexsort((-ys, ts))
    ts, ys = ts[order], ys[order]
    keep = np.concatenate([[True], np.diff(ts) > 0])
    return ts[keep], ys[keep]


def hull_curve(ts, ys, left_value=0.0, terminal_slope=0.0):
    """Least concave majorant anchored at ``(0, left_value)``.

    The result majorizes every ``(ts[i], ys[i])`` and grows with slope
    ``max(terminal_slope, 0)`` past the last vertex.
    """
    ts = np.asarray(ts, dtype=float).reshape(-1)
    ys = np.asarray(ys, dtype=float).reshape(-1)
    if ts.size and np.any(ts <= 0):
        raise CurveError("majorant points need t > 0")
    terminal_slope = max(float(terminal_slope), 0.0)
    ts, ys = _dedupe_max(ts, ys)
    xs = np.concatenate([[0.0], ts])
    zs = np.concatenate([[float(left_value)], ys])
    hull = monotone_upper_hull(xs, zs, terminal_slope)
    bp = xs[hull[1:]]
    vals = zs[hull[1:]]
    if bp.size == 0:
        return ConcaveCurve([], [], zs[0], terminal_slope, terminal_slope)
    initial = (vals[0] - zs[0]) / bp[0]
    return ConcaveCurve(bp, vals, zs[0], initial, terminal_slope)


def least_concave_majorant(points):
    """Least concave nondecreasing majorant of finitely many ``(t, y)`` points.

    The curve is anchored at the origin (``phi(0+) = 0``) and is constant
    after its last vertex.  Points must have ``t > 0`` and ``y >= 0``.
    """
    pts = np.asarray(points, dtype=float)
    if pts.size == 0:
        raise CurveError("least_concave_majorant needs at least one point")
    pts = pts.reshape(-1, 2)
    if np.any(pts[:, 0] <= 0) or np.any(pts[:, 1] < 0):
        raise CurveError("points need t > 0 and y >= 0")
    return hull_curve(pts[:, 0], pts[:, 1], 0.0, 0.0)


def _check_points(f, g):
    return np.union1d(f.breakpoints, g.breakpoints)


def curve_max(f, g):
    """Least concave majorant of ``max(f, g)``."""
    ts = _check_points(f, g)
    ys = np.maximum(f(ts), g(ts)) if ts.size else np.array([])
    return hull_curve(
        ts, ys, max(f.left_value, g.left_value), max(f.terminal_slope, g.terminal_slope)
    )


def compare_curves(f, g, rtol=1e-12):
    """Test ``f <= g`` on all of ``(0, inf)``.

    Both functions are linear between the union of their breakpoints, so the
    test at ``0+``, at the breakpoints and on the terminal slopes is exact.

    Returns
    -------
    holds : bool
    witness_t : float or None
        A parameter where ``f(t) > g(t)`` when the test fails.
    margin : float or None
        ``min (g - f)`` over the check points when the test holds.
    """
    ts = _check_points(f, g)
    fv = f(ts) if ts.size else np.array([])
    gv = g(ts) if ts.size else np.array([])
    tol = rtol * max(_scale(fv, gv, f.left_value, g.left_value), np.finfo(float).tiny)
    d0 = f.left_value - g.left_value
    diffs = fv - gv
    if d0 > tol:
        if ts.size == 0 or diffs[0] > tol:
            return False, float(ts[0]) if ts.size else 1.0, None
        # linear on (0, t_1]: f - g falls from d0 to diffs[0]
        cross = ts[0] * d0 / (d0 - diffs[0])
        return False, float(cross / 2), None
    bad = np.nonzero(diffs > tol)[0]
    if bad.size:
        return False, float(ts[bad[0]]), None
    dslope = f.terminal_slope - g.terminal_slope
    if ts.size == 0:
        dslope = f.initial_slope - g.initial_slope
    if dslope > rtol * max(_scale(f.slopes, g.slopes), np.finfo(float).tiny):
        last = float(ts[-1]) if ts.size else 0.0
        d_last = float(diffs[-1]) if ts.size else d0
        t_w = last + 2.0 * (max(0.0, -d_last) + tol) / dslope + 1.0
        return False, t_w, None
    margin = min([-d0] + list(-diffs))
    return True, None, (max(float(margin), 0.0) if margin > -tol else float(margin)) + 0.0


def curve_leq(f, g, rtol=1e-12):
    """``f(t) <= g(t)`` for every ``t > 0`` (exact for piecewise-linear curves)."""
    return compare_curves(f, g, rtol)[0]


def curves_equal(f, g, rtol=1e-12):
    return curve_leq(f, g, rtol) and curve_leq(g, f, rtol)
