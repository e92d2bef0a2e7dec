"""Piecewise null curves on a generalized cone.

Between any two cone points there is a piecewise null curve: segments solve
the null equation |alpha'(s)| = f(alpha(s)) at unit fiber speed, so along a
segment the t-component is the inverse of the reciprocal antiderivative G,
alpha(s) = G^{-1}(G(t_0) +/- s). The fiber component is tracked by its arc
coordinate u along a unit-speed rectified path of length d(x_p, x_q); burning
surplus t-budget at a fixed fiber endpoint uses out-and-back excursions along
the nearest neighbor direction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .cone import ConeGrid
from .errors import InvalidInputError, ParameterError

_BISECT_TOL = 1e-12
_MAX_SPLITS = 60


@dataclass(frozen=True)
class NullSegment:
    """One null piece: alpha monotone with |alpha'| = f(alpha), |u'| = 1."""

    t_start: float
    t_end: float
    u_start: float
    u_end: float
    direction: int  # +1 future, -1 past

    @property
    def s_length(self) -> float:
        return abs(self.u_end - self.u_start)


@dataclass
class PiecewiseNullCurve:
    grid: ConeGrid
    p: tuple
    q: tuple
    segments: list = field(default_factory=list)
    splits_used: int = 0

    def null_length(self) -> float:
        """Sum of |t increments| over maximal monotone runs."""
        total, run_start, run_dir = 0.0, None, 0
        for seg in self.segments:
            if run_start is None:
                run_start = seg.t_start
            if run_dir and seg.direction != run_dir:
                total += abs(seg.t_start - run_start)
                run_start = seg.t_start
            run_dir = seg.direction
        if run_start is not None and self.segments:
            total += abs(self.segments[-1].t_end - run_start)
        return total

    def total_variation(self) -> float:
        return sum(abs(seg.t_end - seg.t_start) for seg in self.segments)

    def endpoint(self) -> tuple[float, float]:
        if not self.segments:
            i, j = self.p
            return float(self.grid.t_levels[i]), 0.0
        last = self.segments[-1]
        return last.t_end, last.u_end

    def alpha(self, seg: NullSegment, s: float) -> float:
        """t-coordinate at parameter s in [0, s_length] along the segment."""
        if not (0.0 <= s <= seg.s_length + 1e-12):
            raise ParameterError("parameter outside the segment")
        w = self.grid.warping
        g0 = float(w.recip_integral(seg.t_start))
        g_lo = float(w.recip_integral(self.grid.interval.a))
        g_hi = float(w.recip_integral(self.grid.interval.b))
        # bisection residue can overshoot the boundary by ~1e-12
        return w.recip_integral_inverse(min(max(g0 + seg.direction * s, g_lo), g_hi))


def _nearest_neighbor_distance(grid: ConeGrid, j: int) -> float:
    d = grid.fiber.dist[j].copy()
    d[j] = np.inf
    val = float(d.min())
    if not math.isfinite(val):
        raise InvalidInputError("fiber has a single point; no null curve can move")
    return val


def _cross_parameter(grid: ConeGrid, t0: float, s1: float, go_up: bool) -> float:
    """Crossing parameter of the two null legs of a zigzag based at t0: the
    outgoing leg and the returning leg meet where their t-values agree.
    Bisection on the difference of the legs over [0, s1]."""
    w = grid.warping
    g0 = float(w.recip_integral(t0))
    g_lo = float(w.recip_integral(grid.interval.a))
    g_hi = float(w.recip_integral(grid.interval.b))

    def inv(target: float) -> float:
        # the legs are only realized up to the crossing; clamping the
        # out-of-interval tail keeps the bisection signs intact as long as
        # s1 <= 2 * headroom in the zigzag's own direction
        return w.recip_integral_inverse(min(max(target, g_lo), g_hi))

    if go_up:
        def diff(s: float) -> float:
            return inv(g0 + s) - inv(g0 + (s1 - s))
    else:
        def diff(s: float) -> float:
            return inv(g0 - (s1 - s)) - inv(g0 - s)

    lo, hi = 0.0, s1
    if diff(lo) > 0 or diff(hi) < 0:
        raise InvalidInputError("no crossing in the requested leg")
    while hi - lo > _BISECT_TOL:
        mid = 0.5 * (lo + hi)
        if diff(mid) < 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def null_curve(grid: ConeGrid, p: tuple[int, int], q: tuple[int, int]) -> PiecewiseNullCurve:
    """Construct a piecewise null curve from grid point p to grid point q.

    Endpoints are exact in the fiber; the t-endpoint is accurate to the
    bisection tolerance. Legs whose apex would leave the interval are re-split
    with half the leg length, up to a bounded number of attempts.
    """
    p = (int(p[0]), int(p[1]))
    q = (int(q[0]), int(q[1]))
    grid._check_point(*p)
    grid._check_point(*q)
    curve = PiecewiseNullCurve(grid, p, q)
    if p == q:
        return curve
    if grid.t_levels[p[0]] > grid.t_levels[q[0]]:
        rev = null_curve(grid, q, p)
        total = rev.endpoint()[1]
        curve.segments = [
            NullSegment(s.t_end, s.t_start, total - s.u_end, total - s.u_start, -s.direction)
            for s in reversed(rev.segments)
        ]
        curve.splits_used = rev.splits_used
        return curve

    w = grid.warping
    a, b = grid.interval.a, grid.interval.b
    t_p, t_q = float(grid.t_levels[p[0]]), float(grid.t_levels[q[0]])
    fiber_len = float(grid.fiber.dist[p[1], q[1]])
    u = 0.0
    t_cur = t_p

    # ascent phase: reach the target level along the fiber track
    if t_q > t_p:
        budget = float(w.recip_integral(t_q) - w.recip_integral(t_p))
        forward = min(budget, fiber_len)
        if forward > 0:
            t_mid = w.recip_integral_inverse(float(w.recip_integral(t_p)) + forward)
            curve.segments.append(NullSegment(t_p, t_mid, u, u + forward, +1))
            u += forward
            t_cur = t_mid
        surplus = budget - forward
        if surplus > 0:
            # out-and-back excursions at a fixed fiber endpoint, still
            # ascending; targets hit G(t_q) exactly to avoid drift
            room = _nearest_neighbor_distance(grid, q[1] if fiber_len > 0 else p[1])
            bounces = max(1, math.ceil(surplus / (2.0 * room)))
            g_here = float(w.recip_integral(t_cur))
            g_end = float(w.recip_integral(t_q))
            targets = np.linspace(g_here, g_end, 2 * bounces + 1)[1:]
            u_anchor = u
            g_prev = g_here
            sign = -1.0
            for tgt in targets:
                t_next = w.recip_integral_inverse(tgt)
                u_next = u + sign * (tgt - g_prev)
                curve.segments.append(NullSegment(t_cur, t_next, u, u_next, +1))
                u, t_cur, g_prev, sign = u_next, t_next, float(tgt), -sign
            u = u_anchor  # exact out-and-back
        if abs(t_cur - t_q) < 1e-9:
            t_cur = t_q

    # zigzag phase: remaining fiber length at constant level
    remaining = fiber_len - u
    guard = 0
    while remaining > 1e-12:
        guard += 1
        if guard > 10000:
            raise RuntimeError("zigzag phase failed to terminate")
        g_cur = float(w.recip_integral(t_cur))
        g_lo = float(w.recip_integral(a))
        g_hi = float(w.recip_integral(b))
        head_up = g_hi - g_cur
        head_dn = g_cur - g_lo
        go_up = head_up >= head_dn
        head = head_up if go_up else head_dn
        if head <= 0:
            raise InvalidInputError("degenerate interval: no room for a zigzag")
        s1 = min(remaining, 2.0 * head)
        for _ in range(_MAX_SPLITS):
            s_bar = _cross_parameter(grid, t_cur, s1, go_up)
            if s_bar <= head + 1e-12:
                break
            s1 *= 0.5
            curve.splits_used += 1
        else:
            raise InvalidInputError(
                "leg splitting failed: apex cannot stay inside the interval"
            )
        if go_up:
            t_apex = w.recip_integral_inverse(min(g_cur + s_bar, g_hi))
            curve.segments.append(NullSegment(t_cur, t_apex, u, u + s_bar, +1))
            curve.segments.append(NullSegment(t_apex, t_cur, u + s_bar, u + s1, -1))
        else:
            t_valley = w.recip_integral_inverse(max(g_cur - s_bar, g_lo))
            curve.segments.append(NullSegment(t_cur, t_valley, u, u + s_bar, -1))
            curve.segments.append(NullSegment(t_valley, t_cur, u + s_bar, u + s1, +1))
        u += s1
        remaining = fiber_len - u
    return curve


def verify_null_curve(
    grid: ConeGrid,
    curve: PiecewiseNullCurve,
    n_samples: int = 9,
) -> dict:
    """Measure endpoint accuracy, per-segment nullity defect |alpha'| - f(alpha)
    by central differences, and the null length vs total variation gap."""
    t_end, u_end = curve.endpoint()
    t_target = float(grid.t_levels[curve.q[0]])
    fiber_target = float(grid.fiber.dist[curve.p[1], curve.q[1]])
    worst_null = 0.0
    for seg in curve.segments:
        if seg.s_length == 0:
            continue
        h = max(seg.s_length * 1e-4, 1e-9)
        ss = np.linspace(h, seg.s_length - h, n_samples)
        for s in ss:
            if s - h < 0 or s + h > seg.s_length:
                continue
            da = (curve.alpha(seg, s + h) - curve.alpha(seg, s - h)) / (2.0 * h)
            f_here = float(grid.warping.value(curve.alpha(seg, s)))
            worst_null = max(worst_null, abs(abs(da) - f_here))
    return {
        "t_endpoint_error": abs(t_end - t_target) if curve.segments else (
            0.0 if curve.p == curve.q else abs(t_end - t_target)
        ),
        "fiber_endpoint_error": abs(u_end - fiber_target),
        "max_nullity_defect": worst_null,
        "null_length": curve.null_length(),
        "total_variation": curve.total_variation(),
        "n_segments": len(curve.segments),
    }
