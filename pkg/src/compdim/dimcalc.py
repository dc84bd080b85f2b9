"""Dimension formulas for complementary sets, evaluated on finite windows.

Every formula here is a liminf or limsup of an explicit sequence built from
the tails of the gap sequence.  A window of that sequence is evaluated and
summarised in a :class:`DimensionReport`: ``value`` is the extreme (min for
liminf kinds, max for limsup kinds) over the last half of the window, and
``running`` holds the suffix running extreme so a reader can judge whether
the window has settled.  Nothing is extrapolated past the window.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import PrecisionError, ValidationError
from .seqcore import LOG2

__all__ = [
    "DimensionReport", "SelectorPair", "RangeRecord", "box_dims", "hausdorff_cantor",
    "assouad_pair", "selectors", "interm_cantor_upper", "interm_countable",
    "countable_formula", "assouad_interpolation_bound", "range_for_theta",
]

SPREAD_CAVEAT = 0.01
TREND_CAVEAT = 1.05
TIE_TOL = 1e-12


@dataclass(frozen=True)
class DimensionReport:
    kind: str
    value: float
    window: tuple
    window_values: np.ndarray = field(repr=False)
    proxy: tuple = (float("nan"), float("nan"))
    running: np.ndarray = field(default=None, repr=False)
    caveat: str = ""

    def to_record(self):
        return {
            "kind": self.kind, "value": self.value,
            "window_lo": self.window[0], "window_hi": self.window[1],
            "proxy_min": self.proxy[0], "proxy_max": self.proxy[1],
            "caveat": self.caveat,
        }


def _summarise(kind, values, window, mode, caveats=()):
    values = np.asarray(values, dtype=float)
    if values.size == 0:
        raise ValidationError(f"{kind}: empty window {window}")
    half = values[len(values) // 2:]
    if mode == "inf":
        running = np.minimum.accumulate(values[::-1])[::-1]
        value = float(half.min())
    else:
        running = np.maximum.accumulate(values[::-1])[::-1]
        value = float(half.max())
    notes = list(caveats)
    spread = float(half.max() - half.min())
    if spread > SPREAD_CAVEAT:
        notes.append(f"window spread {spread:.3g} in the last half")
    value = min(max(value, 0.0), 1.0)
    return DimensionReport(kind, value, tuple(window), values,
                           (float(half.min()), float(half.max())), running, "; ".join(notes))


class _LogS:
    """Growing cache of log s_k, k = 0, 1, ..."""

    def __init__(self, seq, size=64):
        self.seq = seq
        self.arr = np.array([seq.log_s(k) for k in range(size)])

    def upto(self, k):
        if k >= len(self.arr):
            size = max(k + 1, 2 * len(self.arr))
            extra = [self.seq.log_s(j) for j in range(len(self.arr), size)]
            self.arr = np.concatenate([self.arr, extra])
        return self.arr


def _window_indices(seq, window, per_block):
    k_lo, k_hi = int(window[0]), int(window[1])
    if k_lo < 1 or k_hi < k_lo:
        raise ValidationError(f"box window must satisfy 1 <= lo <= hi, got {window}")
    if seq.max_index is not None:
        k_hi = min(k_hi, seq.max_index.bit_length() - 2)
        if k_hi < k_lo:
            raise ValidationError(f"window {window} exceeds the listed terms")
    ns = []
    for k in range(k_lo, k_hi + 1):
        base = 2 ** k
        ns.extend(base + (base * i) // per_block for i in range(per_block))
    return ns, (k_lo, k_hi)


def box_dims(seq, window=(1, 1024), per_block=8):
    """(lower, upper, a_form_lower) box-dimension reports of C_a.

    ``window`` is a range of dyadic levels k; each level contributes
    ``per_block`` indices 2**k <= n < 2**(k+1).  lower/upper use
    log n / -log(x_n / n); a_form_lower uses log n / -log a_n, which never
    exceeds it and can be strictly smaller.
    """
    ns, window = _window_indices(seq, window, per_block)
    log_n = np.array([math.log(n) for n in ns])
    log_x = np.array([seq.log_tail(n) for n in ns])
    log_a = np.array([seq.log_term(n) for n in ns])
    vals = log_n / (log_n - log_x)
    a_vals = log_n / (-log_a)
    return (_summarise("box_lower", vals, window, "inf"),
            _summarise("box_upper", vals, window, "sup"),
            _summarise("box_lower_a_form", a_vals, window, "inf"))


def hausdorff_cantor(seq, window=(1, 1024), per_block=8):
    """Hausdorff dimension of C_a, which coincides with its lower box dimension."""
    lower = box_dims(seq, window, per_block)[0]
    return DimensionReport("hausdorff", lower.value, lower.window, lower.window_values,
                           lower.proxy, lower.running, lower.caveat)


def assouad_pair(seq, n_window=(1, 64), k_window=(0, 512)):
    """(dim_A, dim_L) of C_a from n log 2 / log(s_k / s_{k+n}).

    The inner sup/inf runs over k in ``k_window``; the outer limsup/liminf
    over n in ``n_window`` is summarised like every other report.
    """
    n_lo, n_hi = int(n_window[0]), int(n_window[1])
    k_lo, k_hi = int(k_window[0]), int(k_window[1])
    if n_lo < 1 or n_hi < n_lo or k_lo < 0 or k_hi < k_lo:
        raise ValidationError(f"bad windows n={n_window} k={k_window}")
    log_s = _LogS(seq).upto(k_hi + n_hi)
    ks = np.arange(k_lo, k_hi + 1)
    sup_vals, inf_vals = [], []
    for n in range(n_lo, n_hi + 1):
        q = n * LOG2 / (log_s[ks] - log_s[ks + n])
        sup_vals.append(q.max())
        inf_vals.append(q.min())
    win = (n_lo, n_hi)
    return (_summarise("assouad", sup_vals, win, "sup"),
            _summarise("lower_assouad", inf_vals, win, "inf"))


@dataclass(frozen=True)
class SelectorPair:
    gamma: int
    rho: int


def _gamma(log_s, r, theta, limit):
    target = log_s.upto(r)[r] / theta
    tol = TIE_TOL * abs(target)
    ok = lambda m: log_s.upto(m)[m] >= target - tol  # noqa: E731
    lo, step = r, 1
    while ok(lo + step):
        lo += step
        step *= 2
        if lo > limit:
            raise PrecisionError(f"selector window exhausted before bracketing gamma({r})",
                                 r=r, theta=theta)
    hi = lo + step
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if ok(mid):
            lo = mid
        else:
            hi = mid
    return lo


def _rho(log_s, r, gamma):
    ms = np.arange(r, gamma + 2)
    roots = log_s.upto(gamma + 1)[ms] / np.maximum(ms, 1)
    if r == 0:
        roots[0] = 0.0  # s_0 = 1, the root is 1 (log 0), never below others
    best = roots.min()
    tied = np.flatnonzero(roots <= best + TIE_TOL * max(abs(best), 1e-300))
    return int(ms[tied[-1]])


def selectors(seq, theta, r, _cache=None, limit=1 << 22):
    """gamma(r) = max{m : s_m >= s_r**(1/theta)} and rho(r), the largest
    minimiser of s_m**(1/m) over r <= m <= gamma(r) + 1."""
    theta = float(theta)
    if not 0.0 < theta <= 1.0:
        raise ValidationError(f"theta must lie in (0, 1], got {theta}")
    if r < 1:
        raise ValidationError(f"r must be at least 1, got {r}")
    log_s = _cache if _cache is not None else _LogS(seq)
    g = _gamma(log_s, int(r), theta, limit)
    return SelectorPair(g, _rho(log_s, int(r), g))


def interm_cantor_upper(seq, theta, window=(1, 256)):
    """Upper theta-intermediate dimension of C_a: limsup of -rho log 2 / log s_rho."""
    n_lo, n_hi = int(window[0]), int(window[1])
    cache = _LogS(seq)
    vals = []
    for n in range(n_lo, n_hi + 1):
        rho = selectors(seq, theta, n, _cache=cache).rho
        vals.append(-rho * LOG2 / cache.upto(rho)[rho])
    arr = cache.upto(n_hi + 1)
    trend = math.exp((arr[n_hi] - arr[n_hi + 1]) / n_hi)
    caveats = []
    if trend > TREND_CAVEAT:
        caveats.append(f"(s_n/s_(n+1))^(1/n) = {trend:.4f} at the window end")
    return _summarise("interm_cantor_upper", vals, (n_lo, n_hi), "sup", caveats)


def countable_formula(B, theta):
    """theta B / (1 - (1 - theta) B), with the value 1 when B = 1."""
    B = np.asarray(B, dtype=float)
    with np.errstate(invalid="ignore", divide="ignore"):
        out = theta * B / (1.0 - (1.0 - theta) * B)
    out = np.where(B >= 1.0, 1.0, out)
    return float(out) if out.ndim == 0 else out


def interm_countable(seq, theta, box=None):
    """(upper, lower) theta-intermediate dimensions of D_a.

    The closed form is applied to the upper and lower box reports; since it
    is increasing in B, the same map applied to the window values gives the
    window of the composed quantity.
    """
    theta = float(theta)
    if not 0.0 <= theta <= 1.0:
        raise ValidationError(f"theta must lie in [0, 1], got {theta}")
    lower, upper = (box or box_dims(seq))[:2]
    out = []
    for kind, rep in (("interm_countable_upper", upper), ("interm_countable_lower", lower)):
        vals = countable_formula(rep.window_values, theta)
        value = countable_formula(rep.value, theta)
        out.append(DimensionReport(
            kind, value, rep.window, vals,
            (countable_formula(rep.proxy[0], theta), countable_formula(rep.proxy[1], theta)),
            countable_formula(rep.running, theta), rep.caveat))
    return tuple(out)


def assouad_interpolation_bound(dim_A, dim_L, ubd, theta):
    """Upper bound for the upper theta-intermediate dimension from (A, L, B)."""
    if not dim_L < dim_A:
        raise ValidationError(f"bound needs dim_L < dim_A, got L={dim_L}, A={dim_A}")
    if not dim_L <= ubd <= dim_A:
        raise ValidationError(f"upper box dimension {ubd} not between {dim_L} and {dim_A}")
    num = theta * dim_A * (ubd - dim_L) + dim_L * (dim_A - ubd)
    den = theta * (ubd - dim_L) + (dim_A - ubd)
    return num / den


@dataclass(frozen=True)
class RangeRecord:
    theta: float
    lower_interval: tuple
    upper_interval: tuple

    def to_record(self):
        return {"theta": self.theta,
                "lower_countable": self.lower_interval[0],
                "lower_cantor": self.lower_interval[1],
                "upper_countable": self.upper_interval[0],
                "upper_cantor": self.upper_interval[1]}


def range_for_theta(seq, theta, box=None, hausdorff=None):
    """Attainable theta-intermediate values over the class of complementary sets."""
    box = box or box_dims(seq)
    up_d, low_d = interm_countable(seq, theta, box)
    haus = hausdorff if hausdorff is not None else hausdorff_cantor(seq).value
    up_c = interm_cantor_upper(seq, theta).value
    return RangeRecord(float(theta), (low_d.value, haus), (up_d.value, up_c))
