"""Optimal admissible covers of interval sets and an empirical dimension estimator.

A cover is admissible at scale ``delta`` and parameter ``theta`` when every
interval length lies in ``[delta**(1/theta), delta]``.  Its cost at exponent
``s`` is the sum of length**s.  The transition exponent where the minimal cost
crosses 1 is the finite-scale stand-in for the theta-intermediate dimension.

Conventions of the exact solver:

* components of the target are atomic: each is covered by a single interval,
  which may also cover neighbouring components (a run);
* a component longer than ``delta`` is tiled from its left end by intervals of
  length ``delta`` and its remainder is treated as an ordinary component;
* lengths are compared with a relative slack of 1e-12.

Over atomic components an optimal cover may be taken to consist of runs of
consecutive components, each covered by the hull of the run (stretched to the
minimum length if needed).  The dynamic program over runs is exact for that
model, and ``brute_force_cover`` enumerates the same model exhaustively.
"""

from __future__ import annotations

import itertools
import math
import time
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from ._kernels import solve_runs
from .errors import PrecisionError, ValidationError
from .setforge import (IntervalSet, build_cantor, build_countable, build_mixed,
                       count_for_resolution, depth_for_resolution)

__all__ = [
    "CoverProblem", "CoverSolution", "optimal_cover", "optimal_cost", "brute_force_cover",
    "regularize_cover", "cost_profile", "estimate_dimension", "EstimateResult",
    "cantor_recipe", "countable_recipe", "mixed_recipe", "check_cover",
]

REL_TOL = 1e-12
BRUTE_FORCE_LIMIT = 12


@dataclass(frozen=True)
class CoverProblem:
    """Cover ``target`` with intervals of length in [delta**(1/theta), delta].

    ``lengths`` overrides the admissible range directly, as (min, max).
    """

    target: IntervalSet
    delta: float
    theta: float = 1.0
    exponent: float = 1.0
    lengths: Optional[tuple] = None

    def __post_init__(self):
        if self.lengths is None:
            if not 0.0 < self.delta < 1.0:
                raise ValidationError(f"delta must lie in (0, 1), got {self.delta}")
            if not 0.0 < self.theta <= 1.0:
                raise ValidationError(f"theta must lie in (0, 1], got {self.theta}")
            lo = self.delta ** (1.0 / self.theta)
            object.__setattr__(self, "lengths", (lo, float(self.delta)))
        lo, hi = self.lengths
        if not 0.0 < lo <= hi:
            raise ValidationError(f"admissible lengths must satisfy 0 < min <= max, got {self.lengths}")
        if not 0.0 <= self.exponent <= 1.0:
            raise ValidationError(f"exponent must lie in [0, 1], got {self.exponent}")
        if self.target.residual_bound > lo * (1.0 + 1e-9):
            raise PrecisionError(
                f"set resolved only to {self.target.residual_bound:.3e}, "
                f"above the smallest admissible length {lo:.3e}",
                residual_bound=self.target.residual_bound, min_length=lo)

    def with_exponent(self, s):
        return CoverProblem(self.target, self.delta, self.theta, s, self.lengths)


@dataclass(frozen=True)
class CoverSolution:
    left: np.ndarray
    length: np.ndarray
    exponent: float
    cost: float = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "cost", math.fsum(np.asarray(self.length) ** self.exponent))

    @property
    def intervals(self):
        return list(zip(self.left.tolist(), (self.left + self.length).tolist()))

    def __len__(self):
        return len(self.left)


# ----------------------------------------------------------------------------
# preparation: tiling of long components, splitting into independent pieces

@dataclass
class _Group:
    l: np.ndarray          # representative piece, shifted to start at 0
    r: np.ndarray
    shifts: list           # left ends of the pieces congruent to it
    aux: tuple = ()


class _Prepared:
    """Geometry shared by every exponent: pieces grouped by congruence."""

    def __init__(self, target, m, M):
        self.m, self.M = m, M
        l, r = target.left.copy(), target.right.copy()
        long_ = (r - l) > M * (1.0 + REL_TOL)
        tiles = []
        if np.any(long_):
            for idx in np.flatnonzero(long_):
                q = math.ceil((r[idx] - l[idx]) / M * (1.0 - REL_TOL)) - 1
                tiles.extend(l[idx] + M * np.arange(q))
                l[idx] = l[idx] + q * M
        self.tiles = np.array(tiles, dtype=float)
        self.n_components = len(target)
        self.groups = []
        if len(l) == 0:
            return
        # consecutive components i, i+1 can share a run only if r[i+1] - l[i] <= M
        cut = np.flatnonzero(r[1:] - l[:-1] > M * (1.0 + REL_TOL)) + 1
        bounds = np.concatenate([[0], cut, [len(l)]])
        index = {}
        for a, b in zip(bounds[:-1], bounds[1:]):
            pl, pr = l[a:b] - l[a], r[a:b] - l[a]
            scale = max(pr[-1], M)
            key = (b - a, round(pr[-1] / scale, 9), round(float(pl[-1]) / scale, 9))
            found = None
            for g in index.get(key, ()):
                if np.allclose(g.l, pl, rtol=0, atol=1e-11 * scale) and \
                        np.allclose(g.r, pr, rtol=0, atol=1e-11 * scale):
                    found = g
                    break
            if found is None:
                found = _Group(pl, pr, [])
                found.aux = self._aux(pl, pr)
                index.setdefault(key, []).append(found)
                self.groups.append(found)
            found.shifts.append(float(l[a]))

    def _aux(self, l, r):
        m, M = self.m, self.M
        jm = np.searchsorted(r, l + m * (1.0 + REL_TOL), side="right") - 1
        jM = np.searchsorted(r, l + M * (1.0 + REL_TOL), side="right") - 1
        j = np.arange(len(l))
        lo_of = np.searchsorted(jM, j, side="left")
        hi_of = np.minimum(j, np.searchsorted(jm, j, side="left") - 1)
        order = np.argsort(-hi_of, kind="stable")
        return jm.astype(np.int64), order.astype(np.int64), hi_of.astype(np.int64), lo_of.astype(np.int64)

    def solve_group(self, g, s):
        jm, order, hi_of, lo_of = g.aux
        return solve_runs(g.l, g.r, jm, order, hi_of, lo_of, self.m, float(s))

    def cost(self, s):
        parts = [len(self.tiles) * self.M ** s] if len(self.tiles) else []
        for g in self.groups:
            f, _ = self.solve_group(g, s)
            parts.append(len(g.shifts) * f[0])
        return math.fsum(parts)

    def solution(self, s):
        lefts, lengths = [self.tiles], [np.full(len(self.tiles), self.M)]
        for g in self.groups:
            f, last = self.solve_group(g, s)
            i, ls, ln = 0, [], []
            while i < len(g.l):
                j = last[i]
                span = g.r[j] - g.l[i]
                ls.append(g.l[i])
                ln.append(min(max(span, self.m), self.M))
                i = j + 1
            ls, ln = np.array(ls), np.array(ln)
            for shift in g.shifts:
                lefts.append(ls + shift)
                lengths.append(ln)
        left = np.concatenate(lefts) if lefts else np.zeros(0)
        length = np.concatenate(lengths) if lengths else np.zeros(0)
        order = np.argsort(left, kind="stable")
        return CoverSolution(left[order], length[order], float(s))


def optimal_cover(problem: CoverProblem) -> CoverSolution:
    """Minimal-cost admissible cover (exact over atomic components)."""
    m, M = problem.lengths
    return _Prepared(problem.target, m, M).solution(problem.exponent)


def optimal_cost(problem: CoverProblem) -> float:
    m, M = problem.lengths
    return _Prepared(problem.target, m, M).cost(problem.exponent)


def check_cover(solution: CoverSolution, target: IntervalSet, lengths, rel_tol=REL_TOL):
    """True when every component lies inside one interval and lengths are admissible."""
    m, M = lengths
    ln = solution.length
    if len(ln) and (ln.min() < m * (1 - rel_tol) or ln.max() > M * (1 + rel_tol)):
        return False
    if len(target) == 0:
        return True
    if len(ln) == 0:
        return False
    left, right = solution.left, solution.left + ln
    # long components may be covered by several abutting intervals
    order = np.argsort(left)
    left, right = left[order], right[order]
    slack = 1e-12 * max(M, 1e-300)
    for a, b in zip(target.left, target.right):
        k = np.searchsorted(left, a + slack, side="right") - 1
        if k < 0:
            return False
        reach = right[k]
        if reach + slack < a:
            return False
        while reach + slack < b:
            k += 1
            if k >= len(left) or left[k] > reach + slack:
                return False
            reach = max(reach, right[k])
    return True


# ----------------------------------------------------------------------------
# exhaustive oracle

def brute_force_cover(target: IntervalSet, length_grid, s) -> CoverSolution:
    """Cheapest cover by runs of consecutive components, lengths from the grid.

    Every partition of the components into consecutive runs is enumerated;
    a run uses the smallest grid length at least its span.
    """
    n = len(target)
    if n > BRUTE_FORCE_LIMIT:
        raise ValidationError(f"brute force is limited to {BRUTE_FORCE_LIMIT} components, got {n}")
    grid = np.sort(np.asarray(length_grid, dtype=float))
    if n == 0:
        return CoverSolution(np.zeros(0), np.zeros(0), float(s))
    l, r = target.left, target.right
    best, best_cover = math.inf, None
    for cuts in itertools.product((False, True), repeat=n - 1):
        starts = [0] + [i + 1 for i, c in enumerate(cuts) if c]
        ends = starts[1:] + [n]
        lefts, lens = [], []
        for a, b in zip(starts, ends):
            span = r[b - 1] - l[a]
            k = np.searchsorted(grid, span * (1.0 - REL_TOL), side="left")
            if k == len(grid):
                break
            lefts.append(l[a])
            lens.append(grid[k])
        else:
            cost = math.fsum(x ** s for x in lens)
            if cost < best:
                best, best_cover = cost, (lefts, lens)
    if best_cover is None:
        raise ValidationError("no cover exists with the given length grid")
    return CoverSolution(np.array(best_cover[0]), np.array(best_cover[1]), float(s))


# ----------------------------------------------------------------------------
# regularisation

def regularize_cover(intervals, c):
    """Replace m intervals of total length <= c m by at most 2m intervals of length c.

    The union is split into its connected pieces; a piece of length L gets
    max(1, ceil(L / c)) abutting intervals of length c from its left end.
    """
    arr = np.asarray(intervals, dtype=float).reshape(-1, 2)
    m = len(arr)
    if m == 0:
        return []
    if c <= 0:
        raise ValidationError(f"length c must be positive, got {c}")
    total = math.fsum(arr[:, 1] - arr[:, 0])
    if total > c * m * (1.0 + 1e-12):
        raise ValidationError(f"total length {total:.6g} exceeds c*m = {c * m:.6g}")
    pieces = IntervalSet(arr[:, 0], arr[:, 1])
    out = []
    for a, b in zip(pieces.left, pieces.right):
        k = max(1, math.ceil((b - a) / c - 1e-12))
        out.extend((a + i * c, a + (i + 1) * c) for i in range(k))
    return out


def cost_profile(target, theta, delta, s_grid, lengths=None):
    """Minimal cover cost for each exponent in ``s_grid``."""
    s_grid = [float(s) for s in s_grid]
    if any(b < a for a, b in zip(s_grid, s_grid[1:])):
        raise ValidationError("s_grid must be sorted")
    prob = CoverProblem(target, delta, theta, 0.0, lengths)
    prep = _Prepared(target, *prob.lengths)
    return {s: prep.cost(s) for s in s_grid}


# ----------------------------------------------------------------------------
# estimator

def cantor_recipe(seq):
    """Resolution -> C_a at the least depth whose intervals are all <= resolution."""
    def build(resolution):
        return build_cantor(seq, depth_for_resolution(seq, resolution))
    return build


def countable_recipe(seq):
    """Resolution -> D_a with enough points that the residual spacing is resolved."""
    def build(resolution):
        return build_countable(seq, count_for_resolution(seq, resolution))
    return build


def mixed_recipe(plan):
    """Resolution -> C_b u D_a' for a construction plan."""
    r = plan.split_r

    def build(resolution):
        depth = depth_for_resolution(plan.b_model, resolution, scale=r)
        count = count_for_resolution(plan.a_prime, resolution, scale=1.0 - r)
        return build_mixed(plan, depth, count)
    return build


@dataclass(frozen=True)
class EstimateResult:
    theta: float
    rows: list
    estimate: float
    extrapolated: Optional[float]

    @property
    def s_star(self):
        return [row["s_star"] for row in self.rows]


def _bisect(cost, tol):
    lo, hi = 0.0, 1.0
    if cost(hi) >= 1.0:
        return 1.0
    if cost(lo) <= 1.0:
        return 0.0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if cost(mid) > 1.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def estimate_dimension(recipe: Callable, theta, delta_ladder, tol=1e-4, timing=True):
    """Transition exponent s*(delta) where the minimal admissible cost equals 1.

    ``recipe(resolution)`` must return a set resolved to at least
    ``resolution = delta**(1/theta)``.  The estimate is s* at the finest
    delta; with three or more rungs a least-squares fit of s* against
    1/|log delta| is reported as ``extrapolated``.
    """
    ladder = [float(d) for d in delta_ladder]
    if any(b >= a for a, b in zip(ladder, ladder[1:])):
        raise ValidationError("delta ladder must be strictly decreasing")
    rows = []
    for delta in ladder:
        t0 = time.perf_counter()
        resolution = delta ** (1.0 / theta)
        target = recipe(resolution)
        prob = CoverProblem(target, delta, theta)
        prep = _Prepared(target, *prob.lengths)
        s_star = _bisect(prep.cost, tol)
        rows.append({
            "theta": float(theta), "delta": delta, "s_star": s_star,
            "cost_at_s_star": prep.cost(s_star), "components": len(target),
            "runtime_ms": round(1000.0 * (time.perf_counter() - t0), 1) if timing else None,
        })
    extrapolated = None
    if len(rows) >= 3:
        x = np.array([1.0 / abs(math.log(r["delta"])) for r in rows])
        y = np.array([r["s_star"] for r in rows])
        extrapolated = float(np.polyfit(x, y, 1)[1])
    return EstimateResult(float(theta), rows, rows[-1]["s_star"], extrapolated)
