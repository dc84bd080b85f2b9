"""Finite-precision realisations of complementary sets.

Every builder returns an :class:`IntervalSet`, a sorted list of disjoint
closed components of [0, 1].  A component with ``left == right`` is an
isolated point.  ``residual_bound`` records the size of the structure that
was *not* resolved inside a component, which is what downstream coverers must
stay above.

Three sets are built here:

* the decreasing Cantor set ``C_a`` (step ``k`` removes the gap
  ``a_{2**k + j - 1}`` from the j-th interval);
* the countable set ``D_a = {x_1 > x_2 > ...}``;
* the union ``E = C_b u D_a'`` obtained by splitting ``a`` into a block
  subsequence ``b`` and the leftover ``a'``, which realises intermediate
  values of the upper theta-intermediate dimension.
"""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import InfeasibleTargetError, PrecisionError, SequenceIndexError, ValidationError
from .seqcore import LOG2, NEG_INF, SequenceModel, _logsumexp, hypothesis_report, log_sub

__all__ = [
    "IntervalSet", "GapReport", "ConstructionPlan", "SubsequenceModel", "LeftoverSequence",
    "build_cantor", "build_countable", "plan_construction", "build_mixed", "verify_gaps",
    "depth_for_resolution", "count_for_resolution", "j_index", "dumps_set", "loads_set",
]

MAX_DEPTH = 26
# leaves shorter than this cannot be placed reliably in absolute coordinates
LEAF_FLOOR = 1e-13
# a finite window cannot show sup s_n/s_(n+1) = infinity; ratios above this are refused
RATIO_CEILING = 1e6


@dataclass(frozen=True)
class IntervalSet:
    """Sorted, disjoint closed components ``[left[i], right[i]]``."""

    left: np.ndarray
    right: np.ndarray
    residual_bound: float = 0.0
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        left = np.asarray(self.left, dtype=float).ravel()
        right = np.asarray(self.right, dtype=float).ravel()
        if left.shape != right.shape:
            raise ValidationError("left and right endpoint arrays differ in length")
        if np.any(right < left):
            raise ValidationError("component with right < left")
        order = np.argsort(left, kind="stable")
        left, right = left[order], right[order]
        if len(left) > 1 and np.any(left[1:] <= np.maximum.accumulate(right)[:-1]):
            left, right = _merge(left, right)
        left.setflags(write=False)
        right.setflags(write=False)
        object.__setattr__(self, "left", left)
        object.__setattr__(self, "right", right)
        object.__setattr__(self, "residual_bound", float(self.residual_bound))

    def __len__(self):
        return len(self.left)

    @property
    def lengths(self):
        return self.right - self.left

    @property
    def total_length(self):
        return math.fsum(self.lengths)

    def gaps(self):
        """Lengths of the open complementary intervals between components."""
        return self.left[1:] - self.right[:-1]

    def affine(self, scale, shift=0.0):
        return IntervalSet(self.left * scale + shift, self.right * scale + shift,
                           self.residual_bound * scale, dict(self.meta))

    def union(self, other, **meta):
        return IntervalSet(np.concatenate([self.left, other.left]),
                           np.concatenate([self.right, other.right]),
                           max(self.residual_bound, other.residual_bound), meta)


def _merge(left, right):
    reach = np.maximum.accumulate(right)
    starts = np.ones(len(left), dtype=bool)
    starts[1:] = left[1:] > reach[:-1]
    idx = np.flatnonzero(starts)
    ends = np.append(idx[1:], len(left)) - 1
    return left[idx].copy(), reach[ends].copy()


# ----------------------------------------------------------------------------
# Cantor set

def _leaf_log_lengths(seq, K):
    """log of the total gap mass hanging below each depth-K interval."""
    n = 2 ** K
    if seq.block_constant:
        return np.full(n, seq.log_s(K))
    start = np.arange(n) / n
    width = 1.0 / n
    acc = np.full(n, NEG_INF)
    m = K
    while True:
        if seq.max_index is not None and 2 ** m > seq.max_index:
            return acc
        if seq.max_index is not None and 2 ** (m + 1) - 1 > seq.max_index:
            acc = np.logaddexp(acc, _partial_level(seq, m, K))
            return acc
        acc = np.logaddexp(acc, seq.log_block_range_sums(m, start, width))
        m += 1
        # mass below level m, spread evenly over the leaves
        rest = seq.log_tail(2 ** m) - K * LOG2
        if rest < acc.min() + math.log(1e-17):
            return np.logaddexp(acc, rest)
        if m - K > 4096:
            raise PrecisionError(f"subtree sums at depth {K} did not converge", depth=K)


def _partial_level(seq, m, K):
    # listed terms end inside block m; sum what exists per leaf
    per = 2 ** (m - K)
    out = np.full(2 ** K, NEG_INF)
    for j in range(2 ** K):
        lo = 2 ** m + j * per
        hi = min(lo + per, seq.max_index + 1)
        if hi > lo:
            out[j] = seq.log_range_sum(lo, hi)
    return out


def build_cantor(seq: SequenceModel, depth: int) -> IntervalSet:
    """The 2**depth closed intervals left after ``depth`` removal steps.

    Leaf lengths are subtree gap sums, so the gap positions are forced; the
    layout is computed bottom-up (node lengths) then top-down (left ends) to
    keep rounding local to each level.
    """
    K = int(depth)
    if K < 0:
        raise ValidationError(f"depth must be non-negative, got {depth}")
    if K > MAX_DEPTH:
        raise PrecisionError(f"depth {K} exceeds the supported maximum {MAX_DEPTH}", depth=K)
    if seq.max_index is not None and 2 ** K - 1 > seq.max_index:
        raise SequenceIndexError(f"depth {K} needs gaps beyond index {seq.max_index}", depth=K)
    leaf = np.exp(_leaf_log_lengths(seq, K))
    if leaf.min() < LEAF_FLOOR:
        raise PrecisionError(
            f"depth {K} leaves reach {leaf.min():.3e}, below the placement floor {LEAF_FLOOR:g}",
            depth=K)
    lengths = [None] * (K + 1)
    gaps = [None] * K
    lengths[K] = leaf
    for k in range(K - 1, -1, -1):
        gaps[k] = np.exp(seq.log_block_range_sums(k, np.arange(2 ** k) / 2 ** k, 2.0 ** -k))
        child = lengths[k + 1]
        lengths[k] = child[0::2] + gaps[k] + child[1::2]
    left = np.zeros(1)
    for k in range(K):
        nxt = np.empty(2 ** (k + 1))
        nxt[0::2] = left
        nxt[1::2] = left + lengths[k + 1][0::2] + gaps[k]
        left = nxt
        lengths[k] = gaps[k] = None
    return IntervalSet(left, left + leaf, float(leaf.max()),
                       {"builder": "cantor", "depth": K, "family": seq.family})


# ----------------------------------------------------------------------------
# countable set

def build_countable(seq: SequenceModel, count: int) -> IntervalSet:
    """Points x_1 > ... > x_M plus the unresolved solid residual [0, x_{M+1}]."""
    M = int(count)
    if M < 1:
        raise ValidationError(f"count must be at least 1, got {count}")
    log_x = np.array([seq.log_tail(n) for n in range(1, M + 2)])
    x = np.exp(log_x)
    left = np.concatenate([[0.0], x[M - 1::-1]])
    right = np.concatenate([[x[M]], x[M - 1::-1]])
    try:
        residual = math.exp(seq.log_term(M + 1))
    except SequenceIndexError:
        residual = 0.0
    return IntervalSet(left, right, residual,
                       {"builder": "countable", "count": M, "family": seq.family})


def _first_index_below(log_term, target, lo=1, cap=None):
    """Smallest n >= lo with log_term(n) <= target (terms non-increasing)."""
    if log_term(lo) <= target:
        return lo
    hi = lo * 2
    while log_term(hi) > target:
        lo = hi
        hi *= 2
        if cap is not None and hi > cap:
            raise PrecisionError("resolution not reachable within the planned index range")
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if log_term(mid) > target:
            lo = mid
        else:
            hi = mid
    return hi


def count_for_resolution(seq, resolution, scale=1.0):
    """Least M with scale * a_{M+1} <= resolution (point spacing resolved)."""
    target = math.log(resolution) - math.log(scale) + 1e-12
    return _first_index_below(seq.log_term, target, cap=seq.max_index) - 1 or 1


def depth_for_resolution(seq, resolution, scale=1.0, max_depth=MAX_DEPTH):
    """Least depth whose largest interval is at most ``resolution``.

    For block-constant sequences every depth-K interval has length s_K, so
    the first K with scale * s_K <= resolution is exact.  Otherwise the bound
    |I_{K,j}| < s_{K-1} brackets the search and the candidate depths are
    checked on the actual subtree sums.
    """
    lim = math.log(resolution) - math.log(scale) + 1e-12
    K = 0
    while seq.log_s(K + 1) > lim:
        K += 1
        if K > max_depth:
            raise PrecisionError(f"resolution {resolution:g} needs depth beyond {max_depth}")
    if seq.block_constant:
        return K if seq.log_s(K) <= lim else K + 1
    for cand in range(max(K, 0), max_depth + 1):
        if cand > 22 or _leaf_log_lengths(seq, cand).max() <= lim:
            return cand
    raise PrecisionError(f"resolution {resolution:g} needs depth beyond {max_depth}")


# ----------------------------------------------------------------------------
# splitting a into b and a'

class SubsequenceModel(SequenceModel):
    """b_{2**k + i} = a_{2**J_k + o_k + i}, normalised to total mass one."""

    family = "block_subsequence"

    def __init__(self, parent, blocks, offsets):
        self.parent = parent
        self.blocks = tuple(blocks)
        self.offsets = tuple(offsets)
        self.kmax = len(self.blocks) - 1
        self.max_index = 2 ** (self.kmax + 1) - 1
        raw = np.array([self._raw_block(k, 0.0, 1.0) for k in range(self.kmax + 1)])
        if raw[-1] > raw[0] + math.log(1e-30):
            raise PrecisionError("planned blocks do not exhaust the subsequence mass")
        self.log_mass = _logsumexp(list(raw))
        self.log_scale = -self.log_mass
        suffix = np.full(self.kmax + 2, NEG_INF)
        for k in range(self.kmax, -1, -1):
            suffix[k] = np.logaddexp(suffix[k + 1], raw[k])
        self._suffix = suffix + self.log_scale

    def source_index(self, n):
        self._check_index(n)
        k = n.bit_length() - 1
        return 2 ** self.blocks[k] + self.offsets[k] + (n - 2 ** k)

    def _raw_block(self, k, start, width):
        J = self.blocks[k]
        frac = self.offsets[k] / 2 ** J + np.asarray(start, dtype=float) * 2.0 ** (k - J)
        return self.parent.log_block_range_sums(J, frac, width * 2.0 ** (k - J))

    def log_term(self, n):
        return self.parent.log_term(self.source_index(n)) + self.log_scale

    def log_block_range_sums(self, k, start, width):
        if k > self.kmax:
            raise SequenceIndexError(f"block {k} beyond the planned range", index=2 ** k)
        return np.atleast_1d(self._raw_block(k, start, width)) + self.log_scale

    def log_tail(self, n):
        self._check_index(n)
        k = n.bit_length() - 1
        head = self.log_range_sum(n, 2 ** (k + 1)) if n > 2 ** k else NEG_INF
        if n == 2 ** k:
            return float(self._suffix[k])
        return float(np.logaddexp(head, self._suffix[k + 1]))

    def log_range_sum(self, lo, hi=None):
        if hi is None:
            return self.log_tail(lo)
        self._check_index(lo)
        if hi <= lo:
            return NEG_INF
        parts = []
        while lo < hi:
            k = lo.bit_length() - 1
            end = min(hi, 2 ** (k + 1))
            src = self.source_index(lo)
            parts.append(self.parent.log_range_sum(src, src + (end - lo)) + self.log_scale)
            lo = end
        return _logsumexp(parts)


class LeftoverSequence(SequenceModel):
    """The terms of a not taken by b, in their original (non-increasing) order."""

    family = "leftover"

    def __init__(self, parent, used):
        self.parent = parent
        self.jmax = max(used)
        # complement pieces (offset, width) inside each parent block
        self.pieces = []
        counts = []
        for J in range(self.jmax + 1):
            taken = sorted(used.get(J, ()))
            free, cursor = [], 0
            for off, w in taken:
                if off > cursor:
                    free.append((cursor, off - cursor))
                cursor = off + w
            if cursor < 2 ** J:
                free.append((cursor, 2 ** J - cursor))
            self.pieces.append(free)
            counts.append(sum(w for _, w in free))
        self.cum = [0]
        for c in counts:
            self.cum.append(self.cum[-1] + c)
        self.max_index = self.cum[-1]
        self._piece_log = [[parent.log_range_sum(2 ** J + o, 2 ** J + o + w) for o, w in free]
                           for J, free in enumerate(self.pieces)]
        block_log = [_logsumexp(p) for p in self._piece_log]
        suffix = np.full(self.jmax + 2, NEG_INF)
        for J in range(self.jmax, -1, -1):
            suffix[J] = np.logaddexp(suffix[J + 1], block_log[J])
        self.log_mass = float(suffix[0])
        self.log_scale = -self.log_mass
        self._suffix = suffix

    def _locate(self, n):
        self._check_index(n)
        J = bisect.bisect_left(self.cum, n) - 1
        pos = n - self.cum[J] - 1
        for p, (off, w) in enumerate(self.pieces[J]):
            if pos < w:
                return J, p, 2 ** J + off + pos
            pos -= w
        raise AssertionError("leftover index bookkeeping is inconsistent")

    def source_index(self, n):
        return self._locate(n)[2]

    def log_term(self, n):
        return self.parent.log_term(self.source_index(n)) + self.log_scale

    def log_tail(self, n):
        if n == self.max_index + 1:
            return NEG_INF
        J, p, src = self._locate(n)
        off, w = self.pieces[J][p]
        parts = [self.parent.log_range_sum(src, 2 ** J + off + w)]
        parts.extend(self._piece_log[J][p + 1:])
        parts.append(float(self._suffix[J + 1]))
        return _logsumexp(parts) + self.log_scale


@dataclass(frozen=True)
class ConstructionPlan:
    """Bookkeeping for the set E = C_b u D_a' with upper theta-dimension t.

    ``j_map[n]`` solves a_{2**(j+1)} < (a_{2**n})**s <= a_{2**j}, j >= n, with
    the convention j(0) = 0.  b-block k copies 2**k consecutive terms of
    a-block ``j(k) + 1`` starting at ``offsets[k]``.
    """

    seq: SequenceModel
    theta: float
    t: float
    s_exponent: float
    j_map: tuple
    offsets: tuple
    split_r: float
    b_model: SubsequenceModel = field(repr=False)
    a_prime: LeftoverSequence = field(repr=False)
    upper_cantor: float = float("nan")
    upper_countable: float = float("nan")

    @property
    def b_blocks(self):
        return self.b_model.blocks

    def b_term(self, n):
        return math.exp(self.b_model.log_term(n) + self.b_model.log_mass)

    def a_prime_term(self, n):
        return math.exp(self.a_prime.log_term(n) + self.a_prime.log_mass)

    @property
    def mass_b(self):
        return math.exp(self.b_model.log_mass)

    @property
    def mass_a_prime(self):
        return math.exp(self.a_prime.log_mass)

    def summary(self):
        return {
            "theta": self.theta, "t": self.t, "s_exponent": self.s_exponent,
            "upper_cantor": self.upper_cantor, "upper_countable": self.upper_countable,
            "split_r": self.split_r, "mass_b": self.mass_b,
            "mass_a_prime": self.mass_a_prime,
            "j_head": " ".join(str(j) for j in self.j_map[:12]),
        }


def _j_of(log_a2, n, s):
    """Largest j >= n with log a_{2**j} >= s * log a_{2**n}."""
    target = s * log_a2(n)
    tol = 1e-12 * abs(target)
    ok = lambda j: log_a2(j) >= target - tol  # noqa: E731
    lo, step = n, 1
    while ok(lo + step):
        lo += step
        step *= 2
    hi = lo + step
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if ok(mid):
            lo = mid
        else:
            hi = mid
    return lo


def j_index(seq, n, s):
    """j(n) for exponent s: a_{2**(j+1)} < (a_{2**n})**s <= a_{2**j}, j >= n."""
    return _j_of(lambda m: seq.log_term(2 ** m), int(n), float(s))


def plan_construction(seq, theta, t, kmax=256, upper_cantor=None, upper_countable=None):
    """Split ``seq`` into b and a' so that C_b u D_a' has upper theta-dimension t.

    ``upper_cantor``/``upper_countable`` default to the values computed by
    :mod:`compdim.dimcalc`; they may be passed in when already known.
    """
    from . import dimcalc

    theta = float(theta)
    t = float(t)
    if not 0.0 < theta <= 1.0:
        raise ValidationError(f"theta must lie in (0, 1], got {theta}")
    report = hypothesis_report(seq, (0, 64))
    if not report.inf_ratio > 2.0:
        raise ValidationError(
            f"ratio condition fails: inf s_n/s_(n+1) = {report.inf_ratio:.6g} must exceed 2",
            **report.to_record())
    if not report.sup_ratio <= RATIO_CEILING:
        raise ValidationError(
            f"ratio condition fails: sup s_n/s_(n+1) = {report.sup_ratio:.6g} is unbounded "
            f"on the window (ceiling {RATIO_CEILING:g})", **report.to_record())
    if upper_cantor is None:
        upper_cantor = dimcalc.interm_cantor_upper(seq, theta).value
    if upper_countable is None:
        upper_countable = dimcalc.interm_countable(seq, theta)[0].value
    if not upper_countable < t < upper_cantor:
        raise InfeasibleTargetError(
            f"target t = {t} outside the open interval ({upper_countable:.6g}, {upper_cantor:.6g})",
            lower=upper_countable, upper=upper_cantor, t=t)
    s = upper_cantor / t

    cache = {}

    def log_a2(m):
        if m not in cache:
            cache[m] = seq.log_term(2 ** m)
        return cache[m]

    j_map = [0] + [_j_of(log_a2, n, s) for n in range(1, kmax + 1)]
    blocks, offsets = [1], [0]
    for k in range(1, kmax + 1):
        if k >= 2 and j_map[k] == j_map[k - 1]:
            offsets.append(offsets[-1] + 2 ** (k - 1))
        else:
            offsets.append(0)
        blocks.append(j_map[k] + 1)
    b_model = SubsequenceModel(seq, blocks, offsets)
    used = {}
    for k, (J, o) in enumerate(zip(blocks, offsets)):
        used.setdefault(J, []).append((o, 2 ** k))
    a_prime = LeftoverSequence(seq, used)
    total = math.exp(b_model.log_mass) + math.exp(a_prime.log_mass)
    if abs(total - 1.0) > 1e-10:
        raise PrecisionError(f"b and a' masses sum to {total!r}, not 1")
    return ConstructionPlan(
        seq=seq, theta=theta, t=t, s_exponent=s, j_map=tuple(j_map), offsets=tuple(offsets),
        split_r=math.exp(b_model.log_mass), b_model=b_model, a_prime=a_prime,
        upper_cantor=upper_cantor, upper_countable=upper_countable)


def build_mixed(plan: ConstructionPlan, depth: int, count: int) -> IntervalSet:
    """C_b scaled into [0, r] together with the points y_k = r + sum_{i>=k} a'_i."""
    r = plan.split_r
    if not 0.0 < r < 1.0:
        raise PrecisionError(f"split point r = {r!r} is not inside (0, 1)")
    cb = build_cantor(plan.b_model, depth)
    cb = cb.affine(r / cb.right[-1])
    d = build_countable(plan.a_prime, count)
    d = d.affine(1.0 - r, r)
    meta = {"builder": "mixed", "depth": int(depth), "count": int(count),
            "theta": plan.theta, "t": plan.t, "family": plan.seq.family}
    return cb.union(d, **meta)


# ----------------------------------------------------------------------------
# gap verification

@dataclass(frozen=True)
class GapReport:
    ok: bool
    n_checked: int
    matched_indices: tuple
    max_error: float
    first_mismatch: Optional[dict] = None


def verify_gaps(iset: IntervalSet, seq: SequenceModel, n_gaps: int, tol: float = 1e-10):
    """Check that the ``n_gaps`` largest gaps of the set are terms of ``seq``.

    Both lists are walked in non-increasing order; each set gap must match an
    unused term within ``tol``.  Terms that are skipped are simply not placed
    (yet) in the set.
    """
    gaps = np.sort(iset.gaps())[::-1][:int(n_gaps)]
    matched, max_err = [], 0.0
    n = 1
    for i, g in enumerate(gaps):
        while True:
            try:
                a = math.exp(seq.log_term(n))
            except SequenceIndexError:
                a = -math.inf
            if a > g + tol:
                n += 1
                continue
            break
        if abs(a - g) <= tol:
            matched.append(n)
            max_err = max(max_err, abs(a - g))
            n += 1
            continue
        return GapReport(False, len(gaps), tuple(matched), float(max_err),
                         {"gap_rank": i, "gap": float(g), "nearest_index": n,
                          "nearest_term": a})
    return GapReport(True, len(gaps), tuple(matched), float(max_err))


# ----------------------------------------------------------------------------
# dump format

def dumps_set(iset: IntervalSet) -> str:
    lines = [f"# {key} = {value}" for key, value in iset.meta.items()]
    lines.append(f"# residual_bound = {iset.residual_bound:.16e}")
    lines.append(f"# components = {len(iset)}")
    lines.extend(f"{a:.16e} {b:.16e}" for a, b in zip(iset.left, iset.right))
    return "\n".join(lines) + "\n"


def loads_set(text: str) -> IntervalSet:
    meta, rows, residual = {}, [], 0.0
    for line in text.splitlines():
        line = line.strip()
        if not line:
            continue
        if line.startswith("#"):
            key, _, value = line[1:].partition("=")
            key, value = key.strip(), value.strip()
            if key == "residual_bound":
                residual = float(value)
            elif key != "components":
                meta[key] = value
            continue
        a, b = line.split()
        rows.append((float(a), float(b)))
    arr = np.array(rows, dtype=float).reshape(-1, 2)
    return IntervalSet(arr[:, 0], arr[:, 1], residual, meta)
