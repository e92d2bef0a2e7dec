"""Generalized cones over finite length spaces.

A cone grid discretizes I x_f X: a uniform t-grid times the fiber points.
The causal predicate is exact (it uses the reciprocal antiderivative G of
the warping function, never the grid):

    (t_p, x_p) <= (t_q, x_q)   iff   t_p <= t_q  and  d(x_p, x_q) <= G(t_q) - G(t_p)

with strict inequalities for the chronological relation. Null distances are
shortest paths over *all* causally related pairs, weight |t_u - t_v|; causal
pairs therefore come out exactly |t_q - t_p|, and discretization error is
confined to non-causal pairs.

The shortest-path engine never materializes the O(N^2) edge set. Monotone
runs of causal edges compose into single edges, so distances are reached by
alternating sweeps of "relax every future edge" / "relax every past edge";
each sweep reduces to per-level prefix/suffix minima gathered through
precomputed threshold index tables.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import InvalidInputError, ParameterError, SizeBoundError
from .metric_core import FiniteLengthSpace
from .reporting import GuaranteeReport
from .warping import Interval, WarpingFunction

DEFAULT_N_T = 200
_TABLE_CAP = 3e8  # entries per threshold table
CHRONOLOGICAL, CAUSAL, NONE = "chronological", "causal", "none"


@dataclass(eq=False)
class ConeGrid:
    interval: Interval
    fiber: FiniteLengthSpace
    warping: WarpingFunction
    n_t: int = DEFAULT_N_T

    def __post_init__(self):
        if self.n_t < 1:
            raise ParameterError("need at least one t-step")
        if not (self.warping.domain.a <= self.interval.a and self.interval.b <= self.warping.domain.b):
            raise InvalidInputError("warping domain does not cover the interval")
        if not np.all(np.isfinite(self.fiber.dist)):
            raise InvalidInputError("fiber must be connected (finite distances)")
        self.t_levels = np.linspace(self.interval.a, self.interval.b, self.n_t + 1)
        self.g_levels = np.asarray(self.warping.recip_integral(self.t_levels), dtype=float)
        # strict monotonicity of G is equivalent to positivity of f
        if np.any(np.diff(self.g_levels) <= 0):
            raise InvalidInputError("warping must be strictly positive on the interval")
        fine = self.interval.grid(10 * self.n_t)
        fine_vals = np.asarray(self.warping.value(fine), dtype=float)
        self.f_min = float(fine_vals.min())
        self.f_max = float(fine_vals.max())
        if self.f_min <= 0:
            raise InvalidInputError("warping must be strictly positive on the interval")
        # Exactly-null relations (d equal to the G-gap) must stay causal under
        # floating-point grid construction; the slack is far below one grid
        # quantum, so no genuinely timelike/spacelike pair can flip class.
        scale = max(
            1.0,
            float(self.g_levels[-1]),
            float(np.max(self.fiber.dist)),
        )
        self.causal_slack = 32.0 * np.finfo(float).eps * scale
        self._tables: Optional[tuple[np.ndarray, np.ndarray]] = None
        self._offset_min_dist: Optional[np.ndarray] = None

    # -- indexing ----------------------------------------------------------

    @property
    def n_levels(self) -> int:
        return self.n_t + 1

    @property
    def m(self) -> int:
        return self.fiber.n

    @property
    def n_points(self) -> int:
        return self.n_levels * self.m

    def node(self, i: int, j: int) -> int:
        self._check_point(i, j)
        return i * self.m + j

    def point(self, node: int) -> tuple[int, int]:
        return divmod(int(node), self.m)

    def coords(self, i: int, j: int) -> tuple[float, float]:
        return float(self.t_levels[i]), j

    def _check_point(self, i: int, j: int) -> None:
        if not (0 <= i < self.n_levels):
            raise ParameterError(f"t-index {i} outside the interval grid")
        if not (0 <= j < self.m):
            raise ParameterError(f"fiber index {j} out of range")

    def grid_step(self) -> float:
        return self.interval.length / self.n_t

    # -- causal structure ----------------------------------------------------

    def causal_relation(self, p: tuple[int, int], q: tuple[int, int]) -> str:
        """Classify q relative to the causal future of p."""
        i, j = p
        k, l = q
        self._check_point(i, j)
        self._check_point(k, l)
        if k < i:
            return NONE
        gap = self.g_levels[k] - self.g_levels[i]
        d = self.fiber.dist[j, l]
        if d > gap + self.causal_slack:
            return NONE
        if d < gap - self.causal_slack and k > i:
            return CHRONOLOGICAL
        return CAUSAL

    def causal_row(self, i: int, j: int) -> np.ndarray:
        """Boolean (n_levels, m) array: points causally comparable with (i, j)
        in either time direction."""
        gaps = np.abs(self.g_levels - self.g_levels[i])[:, None]
        return self.fiber.dist[j][None, :] <= gaps + self.causal_slack

    def product_metric(self, p: tuple[int, int], q: tuple[int, int]) -> float:
        """Background product metric |dt| + d(x, x')."""
        return abs(self.t_levels[p[0]] - self.t_levels[q[0]]) + float(
            self.fiber.dist[p[1], q[1]]
        )

    # -- threshold tables for the sweep engine -----------------------------

    def _threshold_tables(self) -> tuple[np.ndarray, np.ndarray]:
        if self._tables is not None:
            return self._tables
        n_lv, m = self.n_levels, self.m
        if n_lv * m * m > _TABLE_CAP:
            raise SizeBoundError(
                "threshold tables would exceed the memory cap; "
                "use a coarser fiber or time_separation-style queries"
            )
        g = self.g_levels
        d = self.fiber.dist
        slack = self.causal_slack
        t_up = np.empty((n_lv, m, m), dtype=np.int32)
        t_dn = np.empty((n_lv, m, m), dtype=np.int32)
        # Admissibility must evaluate the predicate d <= G_k - G_i in exactly
        # that floating-point form (plus the slack); IEEE subtraction is
        # monotone, so admissible levels form a prefix (resp. suffix). A
        # searchsorted guess lands within an index or two of that boundary
        # and is corrected against the predicate itself.
        for k in range(n_lv):
            # largest source level i with d <= G_k - G_i (future edge into k)
            base = (np.searchsorted(g, g[k] - d, side="right") - 1).astype(np.int32)
            while True:
                nxt = base + 1
                ok = nxt <= k
                cand = np.clip(nxt, 0, n_lv - 1)
                move = ok & (d <= (g[k] - g[cand]) + slack)
                if not move.any():
                    break
                base[move] += 1
            while True:
                cur = np.clip(base, 0, n_lv - 1)
                move = (base >= 0) & ~(d <= (g[k] - g[cur]) + slack)
                if not move.any():
                    break
                base[move] -= 1
            t_up[k] = base  # -1 when no admissible level; wraps to the pad row
            # smallest source level i with d <= G_i - G_k (past edge into k)
            base = np.searchsorted(g, g[k] + d, side="left").astype(np.int32)
            while True:
                prv = base - 1
                ok = prv >= k
                cand = np.clip(prv, 0, n_lv - 1)
                move = ok & (d <= (g[cand] - g[k]) + slack)
                if not move.any():
                    break
                base[move] -= 1
            while True:
                cur = np.clip(base, 0, n_lv - 1)
                move = (base <= n_lv - 1) & ~(d <= (g[cur] - g[k]) + slack)
                if not move.any():
                    break
                base[move] += 1
            t_dn[k] = base  # n_lv when no admissible level; that is the pad row
        self._tables = (t_up, t_dn)
        return self._tables

    def offset_min_dist(self) -> np.ndarray:
        """min_j d(j, (j+o) mod m) per offset o; bounds the index window that
        contains all fiber moves below a distance threshold."""
        if self._offset_min_dist is None:
            m = self.m
            d = self.fiber.dist
            idx = np.arange(m)
            self._offset_min_dist = np.array(
                [d[idx, (idx + o) % m].min() for o in range(m)]
            )
        return self._offset_min_dist


def build_cone(
    interval: tuple[float, float],
    fiber: FiniteLengthSpace,
    warping: WarpingFunction,
    n_t: int = DEFAULT_N_T,
) -> ConeGrid:
    return ConeGrid(Interval(*interval), fiber, warping, n_t)


# ---------------------------------------------------------------------------
# null distance


@dataclass(eq=False)
class NullDistanceResult:
    grid: ConeGrid
    sources: tuple
    rows: np.ndarray  # (len(sources), n_points)
    weight_levels: np.ndarray  # node weights per t-level used for |.|-edge costs

    def value(self, p: tuple[int, int], q: tuple[int, int]) -> float:
        try:
            s = self.sources.index(tuple(p))
        except ValueError:
            raise ParameterError(f"{p} is not one of the computed sources") from None
        return float(self.rows[s, self.grid.node(*q)])

    def full_matrix(self) -> np.ndarray:
        if len(self.sources) != self.grid.n_points:
            raise ParameterError("result does not cover all sources")
        return self.rows


def all_grid_points(grid: ConeGrid) -> list[tuple[int, int]]:
    return [(i, j) for i in range(grid.n_levels) for j in range(grid.m)]


def stratified_sources(
    grid: ConeGrid, max_entries: float = 1e6, seed: int = 0
) -> list[tuple[int, int]]:
    """Deterministic stratified source sample: all pairs from these rows stay
    below `max_entries` checked entries. Strata cover both endpoints and the
    interior of the t-grid and of the fiber."""
    n = grid.n_points
    n_src = max(2, int(max_entries // n))
    if n_src >= n:
        return all_grid_points(grid)
    rng = np.random.default_rng(seed)
    levels = np.unique(np.linspace(0, grid.n_levels - 1, n_src).round().astype(int))
    fibers = np.unique(np.linspace(0, grid.m - 1, n_src).round().astype(int))
    picks: list[tuple[int, int]] = []
    fib_perm = rng.permutation(fibers)
    for idx, lev in enumerate(levels):
        picks.append((int(lev), int(fib_perm[idx % fib_perm.size])))
    seen = set()
    out = []
    for p in picks[:n_src]:
        if p not in seen:
            seen.add(p)
            out.append(p)
    return out


def null_distance(
    grid: ConeGrid,
    sources: Optional[Sequence[tuple[int, int]]] = None,
    weight_levels: Optional[np.ndarray] = None,
    batch: int = 64,
    max_sweeps: Optional[int] = None,
) -> NullDistanceResult:
    """Null distances from the given source points to every grid point.

    `weight_levels` replaces the per-level node weights (default: the t-values
    themselves); it must be strictly increasing. Edge cost between causally
    related points is the absolute weight gap, so any generalized time
    function of the form phi(t) reuses this engine.
    """
    if sources is None:
        sources = all_grid_points(grid)
        if grid.n_points > 6000:
            raise SizeBoundError(
                f"full matrix over {grid.n_points} points refused; pass explicit sources"
            )
    sources = [tuple(map(int, s)) for s in sources]
    for i, j in sources:
        grid._check_point(i, j)
    pi = np.asarray(
        grid.t_levels if weight_levels is None else weight_levels, dtype=float
    )
    if pi.shape != (grid.n_levels,):
        raise InvalidInputError("weight_levels must have one value per t-level")
    if np.any(np.diff(pi) <= 0):
        raise InvalidInputError("weight_levels must be strictly increasing")

    rows = np.empty((len(sources), grid.n_points))
    for lo in range(0, len(sources), batch):
        chunk = sources[lo : lo + batch]
        rows[lo : lo + len(chunk)] = _sweep_rows(grid, chunk, pi, max_sweeps)
    return NullDistanceResult(grid, tuple(sources), rows, pi)


def _sweep_rows(
    grid: ConeGrid,
    sources: Sequence[tuple[int, int]],
    pi: np.ndarray,
    max_sweeps: Optional[int],
) -> np.ndarray:
    t_up, t_dn = grid._threshold_tables()
    n_lv, m, b = grid.n_levels, grid.m, len(sources)
    d = grid.fiber.dist
    g = grid.g_levels

    val = np.full((n_lv, m, b), np.inf)
    for s, (i0, j0) in enumerate(sources):
        mask = d[j0][None, :] <= np.abs(g - g[i0])[:, None] + grid.causal_slack
        w = np.abs(pi - pi[i0])[:, None]
        col = val[:, :, s]
        col[mask] = np.broadcast_to(w, (n_lv, m))[mask]
        val[i0, j0, s] = 0.0

    jj = np.broadcast_to(np.arange(m)[None, :], (m, m))
    prefix = np.empty((n_lv + 1, m, b))  # row n_lv stays +inf (pad for "no level")
    suffix = np.empty((n_lv + 1, m, b))
    prefix[n_lv] = np.inf
    suffix[n_lv] = np.inf
    # Gauss-Seidel passes reassociate sums, so late iterations can keep
    # shaving single ulps; improvements below this threshold do not count
    # as progress (they are still applied). Scales exactly with the weights,
    # keeping rescaled time functions bitwise proportional.
    eps_stop = 1e3 * np.finfo(float).eps * float(pi[-1] - pi[0])
    cap = max_sweeps if max_sweeps is not None else 4 * (n_lv + 2)
    for _ in range(cap):
        changed = False
        # ascending pass resolves all future-directed runs in one go; the
        # clamp to k-1 drops only same-level self edges
        for k in range(n_lv):
            cand = prefix[np.minimum(t_up[k], k - 1), jj, :].min(axis=1) + pi[k]
            if np.any(cand < val[k] - eps_stop):
                changed = True
            np.minimum(val[k], cand, out=val[k])
            row = val[k] - pi[k]
            prefix[k] = row if k == 0 else np.minimum(prefix[k - 1], row)
        # descending pass for past-directed runs
        for k in range(n_lv - 1, -1, -1):
            cand = suffix[np.maximum(t_dn[k], k + 1), jj, :].min(axis=1) - pi[k]
            if np.any(cand < val[k] - eps_stop):
                changed = True
            np.minimum(val[k], cand, out=val[k])
            suffix[k] = np.minimum(suffix[k + 1], val[k] + pi[k])
        if not changed:
            break
    else:
        raise RuntimeError("null-distance sweeps did not stabilize")
    return val.reshape(n_lv * m, b).T


def null_distance_guarantees(
    grid: ConeGrid,
    result: NullDistanceResult,
    unit_result: Optional[NullDistanceResult] = None,
    grid_tol: Optional[float] = None,
) -> GuaranteeReport:
    """Check the structural inequalities on computed null-distance rows.

    Exact claims (violations are reported at tolerance 1e-12):
      * causal pairs realize the weight gap exactly,
      * f_min * d(x_p, x_q) <= dhat(p, q),
      * no zero off-diagonal entries,
      * anti-Lipschitz of t on causal pairs: dt >= f_min * d.
    Grid-tolerant claims (violations beyond the tolerance are reported with a
    refinement hint):
      * dhat(p, q) <= f_max * d(x_p, x_q) on non-causal pairs, within
        (2 + f_max) * step by default (fiber quantization enters at the
        local speed of the warping),
      * the two-sided comparison with a unit-warping result on the same
        grid, within 2/n_t by default.
    """
    tol = 2.0 / grid.n_t if grid_tol is None else grid_tol
    tol_fmax = (2.0 + grid.f_max) * grid.grid_step() if grid_tol is None else grid_tol
    rep = GuaranteeReport()
    d = grid.fiber.dist
    g = grid.g_levels
    pi = result.weight_levels
    lv = np.repeat(np.arange(grid.n_levels), grid.m)
    fb = np.tile(np.arange(grid.m), grid.n_levels)
    for s, (i0, j0) in enumerate(result.sources):
        row = result.rows[s]
        gaps = np.abs(g[lv] - g[i0])
        dists = d[j0, fb]
        causal = dists <= gaps + grid.causal_slack
        wgap = np.abs(pi[lv] - pi[i0])

        err = np.abs(row[causal] - wgap[causal])
        worst = float(err.max()) if err.size else 0.0
        rep.record("causal-exact", -worst if worst > 1e-12 else 0.0)
        if worst > 1e-12:
            rep.violations.setdefault("causal-exact", []).append((result.sources[s], worst))

        lower = row - grid.f_min * dists
        wl = float(lower.min())
        rep.record("lower-bound", wl)
        if wl < -1e-12:
            bad = int(np.argmin(lower))
            rep.violations.setdefault("lower-bound", []).append(
                (result.sources[s], grid.point(bad), float(lower[bad]))
            )

        noncausal = ~causal
        if np.any(noncausal):
            upper = grid.f_max * dists[noncausal] - row[noncausal]
            wu = float(upper.min())
            rep.record("upper-bound", wu + tol_fmax)
            if wu < -tol_fmax:
                rep.violations.setdefault("upper-bound", []).append(
                    (result.sources[s], float(-wu))
                )
                rep.notes.append(
                    f"upper bound missed by {-wu:.3g} at source {result.sources[s]}; "
                    "refine the grid (error shrinks with 1/n_t)"
                )

        off = row > 0
        off[grid.node(i0, j0)] = True
        if not np.all(off):
            rep.violations.setdefault("definiteness", []).append(result.sources[s])
        rep.record("definiteness", 0.0)

        fut = causal & (lv != i0)
        dt = np.abs(grid.t_levels[lv[fut]] - grid.t_levels[i0])
        wa = float((dt - grid.f_min * dists[fut]).min()) if np.any(fut) else 0.0
        rep.record("anti-lipschitz", wa)
        if wa < -1e-12:
            rep.violations.setdefault("anti-lipschitz", []).append(result.sources[s])

        if unit_result is not None:
            unit_row = unit_result.rows[list(unit_result.sources).index((i0, j0))]
            lo = row - min(1.0, grid.f_min) * unit_row
            hi = max(1.0, grid.f_max) * unit_row - row
            rep.record("sandwich-lower", float(lo.min()))
            rep.record("sandwich-upper", float(hi.min()) + tol)
            if lo.min() < -1e-12:
                rep.violations.setdefault("sandwich-lower", []).append(result.sources[s])
            if hi.min() < -tol:
                rep.violations.setdefault("sandwich-upper", []).append(result.sources[s])
    return rep


# ---------------------------------------------------------------------------
# time separation


@dataclass(eq=False)
class TimeSeparationResult:
    grid: ConeGrid
    sources: tuple
    rows: np.ndarray

    def value(self, p: tuple[int, int], q: tuple[int, int]) -> float:
        try:
            s = self.sources.index(tuple(p))
        except ValueError:
            raise ParameterError(f"{p} is not one of the computed sources") from None
        return float(self.rows[s, self.grid.node(*q)])


def _level_step_weights(grid: ConeGrid, i: int, offsets: np.ndarray):
    """Per-offset fiber moves for the step level i -> i+1: admissible mask and
    segment lengths sqrt(dt^2 - f(mid)^2 d^2), zero on exactly-null moves."""
    d = grid.fiber.dist
    m = grid.m
    idx = np.arange(m)
    gap = grid.g_levels[i + 1] - grid.g_levels[i]
    dt = grid.t_levels[i + 1] - grid.t_levels[i]
    f_mid = float(grid.warping.value(0.5 * (grid.t_levels[i] + grid.t_levels[i + 1])))
    dest = (idx[None, :] + offsets[:, None]) % m
    dist = d[idx[None, :], dest]
    allowed = dist <= gap + grid.causal_slack
    strict = dist < gap - grid.causal_slack
    disc = dt * dt - (f_mid * dist) ** 2
    w = np.sqrt(np.clip(disc, 0.0, None))
    w = np.where(strict, w, 0.0)
    return dest, allowed, w


def time_separation(
    grid: ConeGrid, sources: Optional[Sequence[tuple[int, int]]] = None
) -> TimeSeparationResult:
    """Longest-path approximation of the time separation from below.

    Dynamic program over the DAG of causally related pairs on consecutive
    t-levels; segment length sqrt(dt^2 - f(mid)^2 d^2) clamped at zero, and
    exactly-null steps contribute zero, so a positive output certifies a
    chronological pair.
    """
    if sources is None:
        sources = all_grid_points(grid)
        if grid.n_points > 6000:
            raise SizeBoundError(
                f"full matrix over {grid.n_points} points refused; pass explicit sources"
            )
    sources = [tuple(map(int, s)) for s in sources]
    for i, j in sources:
        grid._check_point(i, j)
    m, n_lv = grid.m, grid.n_levels
    dmin = grid.offset_min_dist()
    rows = np.full((len(sources), grid.n_points), -np.inf)
    order = np.argsort([s[0] for s in sources], kind="stable")
    val = np.full((m, len(sources)), -np.inf)
    started = np.zeros(len(sources), dtype=bool)
    by_level: dict[int, list[int]] = {}
    for s, (i0, j0) in enumerate(sources):
        by_level.setdefault(i0, []).append(s)
        rows[s, grid.node(i0, j0)] = 0.0

    for i in range(n_lv):
        for s in by_level.get(i, ()):
            val[sources[s][1], s] = np.maximum(val[sources[s][1], s], 0.0)
            started[s] = True
        if i == n_lv - 1 or not started.any():
            continue
        gap = grid.g_levels[i + 1] - grid.g_levels[i]
        thr = gap + grid.causal_slack
        win = int(np.max(np.nonzero(dmin <= thr)[0])) if np.any(dmin <= thr) else 0
        offs = np.arange(-win, win + 1) if win < m / 2 else np.arange(m)
        dest, allowed, w = _level_step_weights(grid, i, offs)
        nxt = np.full_like(val, -np.inf)
        for o in range(offs.size):
            ok = allowed[o]
            if not np.any(ok):
                continue
            cand = val[ok] + w[o][ok][:, None]
            tgt = dest[o][ok]
            nxt[tgt] = np.maximum(nxt[tgt], cand)
        val = nxt
        lvl_nodes = (i + 1) * m + np.arange(m)
        rows[:, lvl_nodes] = np.maximum(rows[:, lvl_nodes], val.T)

    out = np.where(np.isfinite(rows), np.maximum(rows, 0.0), 0.0)
    return TimeSeparationResult(grid, tuple(sources), out)


def time_separation_path(
    grid: ConeGrid, p: tuple[int, int], q: tuple[int, int]
) -> tuple[float, list[tuple[int, int]]]:
    """One maximizing single-step path realizing the DP value (empty when the
    value is zero and the pair is not a trivial/causal-start pair)."""
    i0, j0 = map(int, p)
    i1, j1 = map(int, q)
    grid._check_point(i0, j0)
    grid._check_point(i1, j1)
    if (i0, j0) == (i1, j1):
        return 0.0, [(i0, j0)]
    if i1 < i0:
        return 0.0, []
    m = grid.m
    dmin = grid.offset_min_dist()
    vals = [np.full(m, -np.inf)]
    vals[0][j0] = 0.0
    steps = []
    for i in range(i0, i1):
        gap = grid.g_levels[i + 1] - grid.g_levels[i]
        thr = gap + grid.causal_slack
        win = int(np.max(np.nonzero(dmin <= thr)[0])) if np.any(dmin <= thr) else 0
        offs = np.arange(-win, win + 1) if win < m / 2 else np.arange(m)
        dest, allowed, w = _level_step_weights(grid, i, offs)
        cur = vals[-1]
        nxt = np.full(m, -np.inf)
        for o in range(offs.size):
            ok = allowed[o] & np.isfinite(cur)
            if not np.any(ok):
                continue
            cand = cur[ok] + w[o][ok]
            np.maximum.at(nxt, dest[o][ok], cand)
        steps.append((offs, dest, allowed, w))
        vals.append(nxt)
    total = vals[-1][j1]
    if not math.isfinite(total):
        return 0.0, []
    # backtrack deterministically: smallest admissible predecessor index
    path = [(i1, j1)]
    cur_j = j1
    for back, (offs, dest, allowed, w) in enumerate(reversed(steps)):
        i = i1 - back - 1
        level_vals = vals[i - i0]
        best = None
        for o in range(offs.size):
            srcs = np.nonzero(allowed[o] & (dest[o] == cur_j))[0]
            for j in srcs:
                v = level_vals[j] + w[o][j]
                if math.isfinite(v) and abs(v - vals[i - i0 + 1][cur_j]) <= 1e-12:
                    if best is None or j < best:
                        best = int(j)
        if best is None:
            raise RuntimeError("backtracking lost the maximizing path")
        path.append((i, best))
        cur_j = best
    return float(max(total, 0.0)), path[::-1]


# ---------------------------------------------------------------------------
# reparametrized time functions phi(t)


@dataclass
class PhiReport:
    causal_exact: bool
    worst_causal_error: float
    gap_bound_holds: bool
    worst_gap_margin: float
    c_constant: float
    n_checked: int
    witness: Optional[tuple] = None


def null_distance_phi(
    grid: ConeGrid,
    phi: Callable[[np.ndarray], np.ndarray],
    sources: Optional[Sequence[tuple[int, int]]] = None,
    oversample: int = 10,
    tol: float = 1e-9,
) -> tuple[NullDistanceResult, PhiReport]:
    """Null distance for the time function phi(t) with a verification report.

    Checks on every computed pair: causal pairs realize phi(t_q) - phi(t_p)
    exactly, and non-causal pairs (ordered so t_p <= t_q) obey

        dhat_phi(p, q) >= phi(t_q) - phi(t_p) + (d(x_p, x_q) - (G(t_q) - G(t_p))) / c

    with c = max over the interval of 1 / (phi'(t) f(t)), evaluated on an
    oversampled grid by central differences.
    """
    fine = grid.interval.grid(oversample * grid.n_t)
    phi_fine = np.asarray(phi(fine), dtype=float)
    if np.any(np.diff(phi_fine) <= 0):
        raise InvalidInputError("phi must be strictly increasing on the interval")
    phi_levels = np.asarray(phi(grid.t_levels), dtype=float)

    result = null_distance(grid, sources=sources, weight_levels=phi_levels)

    # c := max (phi^{-1})'(s) / f(phi^{-1}(s)) = max 1 / (phi'(t) f(t)),
    # via secant slopes on the fine grid, inflated a little so the reported
    # bound is never spuriously strong
    secant = np.diff(phi_fine) / np.diff(fine)
    f_fine = np.asarray(grid.warping.value(fine), dtype=float)
    f_seg = np.minimum(f_fine[:-1], f_fine[1:])
    c_const = float(np.max(1.0 / (secant * f_seg))) * (1.0 + 1e-3)

    d = grid.fiber.dist
    g = grid.g_levels
    lv = np.repeat(np.arange(grid.n_levels), grid.m)
    fb = np.tile(np.arange(grid.m), grid.n_levels)
    worst_causal = 0.0
    worst_margin = np.inf
    witness = None
    n_checked = 0
    for s, (i0, j0) in enumerate(result.sources):
        row = result.rows[s]
        gaps = np.abs(g[lv] - g[i0])
        dists = d[j0, fb]
        causal = dists <= gaps + grid.causal_slack
        n_checked += row.size
        err = np.abs(row[causal] - np.abs(phi_levels[lv[causal]] - phi_levels[i0]))
        if err.size:
            worst_causal = max(worst_causal, float(err.max()))
        non = ~causal
        if np.any(non):
            phigap = np.abs(phi_levels[lv[non]] - phi_levels[i0])
            bound = phigap + (dists[non] - gaps[non]) / c_const
            margin = row[non] - bound
            k = int(np.argmin(margin))
            if float(margin[k]) < worst_margin:
                worst_margin = float(margin[k])
                witness = ((i0, j0), grid.point(int(np.nonzero(non)[0][k])))
    return result, PhiReport(
        causal_exact=worst_causal <= tol,
        worst_causal_error=worst_causal,
        gap_bound_holds=bool(worst_margin >= -tol),
        worst_gap_margin=worst_margin if math.isfinite(worst_margin) else 0.0,
        c_constant=c_const,
        n_checked=n_checked,
        witness=witness,
    )


# ---------------------------------------------------------------------------
# induced fiber metric


@dataclass
class FiberComparisonReport:
    t_index: int
    lower_ok: bool
    upper_ok: bool
    worst_lower_margin: float
    worst_upper_margin: float
    unit_equal_count: int
    unit_max_deviation: float
    n_pairs: int
    note: str = ""


def fiber_metric_comparison(
    grid: ConeGrid, t0: float, grid_tol: Optional[float] = None
) -> FiberComparisonReport:
    """Compare the null distance restricted to the slice t = t0 with the fiber
    metric: f_min * d <= dhat <= f_max * d + grid tolerance.

    For unit warping the slice metric equals d up to at most one t-step: a
    closed path must balance its up and down moves, so slice costs live on the
    lattice of doubled t-steps and odd fiber gaps cannot be hit exactly.
    """
    if not grid.interval.contains(t0):
        raise ParameterError(f"t0={t0!r} outside the interval")
    i0 = int(np.argmin(np.abs(grid.t_levels - t0)))
    tol = (2.0 + grid.f_max) * grid.grid_step() if grid_tol is None else grid_tol
    sources = [(i0, j) for j in range(grid.m)]
    res = null_distance(grid, sources=sources)
    m = grid.m
    slice_nodes = [grid.node(i0, j) for j in range(m)]
    sub = res.rows[:, slice_nodes]
    d = grid.fiber.dist
    lower = sub - grid.f_min * d
    upper = grid.f_max * d + tol - sub
    is_unit = grid.f_min == 1.0 == grid.f_max
    dev = np.abs(sub - d)
    return FiberComparisonReport(
        t_index=i0,
        lower_ok=bool(lower.min() >= -1e-12),
        upper_ok=bool(upper.min() >= -1e-12),
        worst_lower_margin=float(lower.min()),
        worst_upper_margin=float(upper.min()),
        unit_equal_count=int(np.sum(dev <= 1e-12)) if is_unit else 0,
        unit_max_deviation=float(dev.max()) if is_unit else float("nan"),
        n_pairs=m * m,
        note="unit warping: equality up to one t-step (parity of closed paths)"
        if is_unit
        else "",
    )


# ---------------------------------------------------------------------------
# minimizer structure


@dataclass
class MinimizerAnalysis:
    path: list
    run_defects: list
    grid_step: float
    diagnostic: str = ""


def _dijkstra_pair(grid: ConeGrid, p: tuple[int, int], q: tuple[int, int]):
    """Dense Dijkstra over the implicit causal graph, with predecessors."""
    n = grid.n_points
    if n > 40000:
        raise SizeBoundError("per-pair minimizer extraction capped at 40000 points")
    lv = np.repeat(np.arange(grid.n_levels), grid.m)
    fb = np.tile(np.arange(grid.m), grid.n_levels)
    g = grid.g_levels
    t = grid.t_levels
    d = grid.fiber.dist
    src = grid.node(*p)
    dst = grid.node(*q)
    dist = np.full(n, np.inf)
    pred = np.full(n, -1, dtype=np.int64)
    done = np.zeros(n, dtype=bool)
    dist[src] = 0.0
    for _ in range(n):
        u = int(np.argmin(np.where(done, np.inf, dist)))
        if not math.isfinite(dist[u]) or done[u]:
            break
        if u == dst:
            break
        done[u] = True
        iu, ju = grid.point(u)
        mask = d[ju, fb] <= np.abs(g[lv] - g[iu]) + grid.causal_slack
        cand = dist[u] + np.abs(t[lv] - t[iu])
        better = mask & (cand < dist)
        pred[better] = u
        dist = np.where(better, cand, dist)
    if not math.isfinite(dist[dst]):
        return None, None
    path = [dst]
    while path[-1] != src:
        path.append(int(pred[path[-1]]))
    return dist[dst], [grid.point(v) for v in path[::-1]]


def minimizer_analysis(grid: ConeGrid, p: tuple[int, int], q: tuple[int, int]) -> MinimizerAnalysis:
    """Extract one minimizing path and report, per maximal monotone run, the
    nullity defect (G(t_end) - G(t_start)) - d(fiber endpoints of the run)."""
    p, q = tuple(map(int, p)), tuple(map(int, q))
    grid._check_point(*p)
    grid._check_point(*q)
    if p == q:
        return MinimizerAnalysis([], [], grid.grid_step(), "trivial pair")
    rel = grid.causal_relation(p, q)
    rel_back = grid.causal_relation(q, p)
    if rel != NONE or rel_back != NONE:
        return MinimizerAnalysis(
            [p, q], [], grid.grid_step(), "causal pair: the direct edge minimizes"
        )
    _, path = _dijkstra_pair(grid, p, q)
    if path is None:
        return MinimizerAnalysis([], [], grid.grid_step(), "unreachable pair")
    runs = []
    start = 0
    for k in range(1, len(path)):
        direction = np.sign(path[k][0] - path[k - 1][0])
        if k > 1:
            prev = np.sign(path[k - 1][0] - path[start][0]) or direction
            if direction != prev and direction != 0:
                runs.append((start, k - 1))
                start = k - 1
    runs.append((start, len(path) - 1))
    defects = []
    for a, b in runs:
        ia, ja = path[a]
        ib, jb = path[b]
        gap = abs(grid.g_levels[ib] - grid.g_levels[ia])
        defects.append(((path[a], path[b]), float(gap - grid.fiber.dist[ja, jb])))
    return MinimizerAnalysis(path, defects, grid.grid_step())
