"""Gap sequences with exact term access and log-space tail quantities.

A gap sequence ``a`` is positive, non-increasing and sums to one.  Everything
the dimension formulas need is tail driven:

    x_n = sum_{i >= n} a_i          (tail)
    s_k = 2**-k * x_{2**k}          (dyadic average)
    r_k = 2**-k * sum_{2**k <= i < 2**(k+1)} a_i

``s_k`` decays geometrically or faster, so all scale quantities are carried as
natural logarithms.  Indices are 1-based; dyadic block ``k`` holds the indices
``2**k <= n < 2**(k+1)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import SequenceIndexError, ValidationError

LOG2 = math.log(2.0)
NEG_INF = float("-inf")

__all__ = [
    "LogScaleValue", "SequenceModel", "PowerLawTelescoping", "DyadicBlockSchedule",
    "DyadicBlockGeometric", "ExplicitFinite", "TelescopingTail", "ScaleTable",
    "HypothesisReport", "term", "tail", "s_value", "block_average", "scale_table",
    "hypothesis_report", "dumps_spec", "loads_spec", "load_spec", "dump_spec",
    "log_add", "log_sub",
]


# ----------------------------------------------------------------------------
# log-space helpers

def log_add(a, b):
    """log(e**a + e**b)."""
    return float(np.logaddexp(a, b))


def log_sub(a, b):
    """log(e**a - e**b) for a >= b; returns -inf when the two agree."""
    if b == NEG_INF:
        return a
    d = b - a
    if d > 1e-12:
        raise ArithmeticError("log_sub: subtrahend exceeds minuend")
    if d >= 0.0:
        return NEG_INF
    return a + math.log(-math.expm1(d))


def _logsumexp(values):
    values = [v for v in values if v != NEG_INF]
    if not values:
        return NEG_INF
    top = max(values)
    return top + math.log(math.fsum(math.exp(v - top) for v in values))


def _log_one_minus_pow(q, log_ratio):
    """log(1 - (1 + e**log_ratio)**-q), stable when the ratio underflows."""
    if log_ratio < -30.0:
        ratio = math.exp(log_ratio)
        return math.log(q) + log_ratio + math.log1p(-0.5 * (q + 1.0) * ratio)
    return math.log(-math.expm1(-q * math.log1p(math.exp(log_ratio))))


def _block_of(n):
    return n.bit_length() - 1


@dataclass(frozen=True, order=True)
class LogScaleValue:
    """A positive quantity stored as its natural logarithm."""

    log: float

    @property
    def value(self):
        return math.exp(self.log)

    def __float__(self):
        return self.value

    def __mul__(self, other):
        return LogScaleValue(self.log + other.log)

    def __truediv__(self, other):
        return LogScaleValue(self.log - other.log)

    def __pow__(self, exponent):
        return LogScaleValue(self.log * exponent)


# ----------------------------------------------------------------------------
# sequence families

class SequenceModel:
    """Common interface of every gap sequence family.

    Subclasses provide ``log_term`` and ``log_tail``; the remaining
    quantities are derived here.  ``log_block_range_sums`` is the vectorised
    entry point used by the set builders: it sums the terms of block ``k``
    whose position inside the block, as a fraction of the block length
    ``2**k``, lies in ``[start, start + width)``.
    """

    family = "abstract"
    block_constant = False
    max_index: Optional[int] = None

    def log_term(self, n):
        raise NotImplementedError

    def log_tail(self, n):
        raise NotImplementedError

    def _check_index(self, n):
        if n < 1:
            raise SequenceIndexError(f"index {n} < 1", index=int(n))
        if self.max_index is not None and n > self.max_index:
            raise SequenceIndexError(
                f"index {n} beyond the last listed term {self.max_index}", index=int(n))

    def log_range_sum(self, lo, hi=None):
        """log of sum_{lo <= i < hi} a_i (hi=None means to infinity)."""
        if hi is None:
            return self.log_tail(lo)
        if hi <= lo:
            return NEG_INF
        if hi - lo <= 32:
            return _logsumexp([self.log_term(i) for i in range(lo, hi)])
        return log_sub(self.log_tail(lo), self.log_tail(hi))

    def log_block_range_sums(self, k, start, width):
        start = np.atleast_1d(np.asarray(start, dtype=float))
        size = 2 ** k
        out = np.empty(start.shape)
        w = int(round(width * size))
        for idx, f in enumerate(start):
            lo = size + int(round(f * size))
            out[idx] = self.log_range_sum(lo, lo + w)
        return out

    def log_s(self, k):
        return -k * LOG2 + self.log_tail(2 ** k)

    def log_r(self, k):
        return -k * LOG2 + self.log_range_sum(2 ** k, 2 ** (k + 1))

    def to_spec(self):
        raise NotImplementedError


@dataclass(frozen=True)
class PowerLawTelescoping(SequenceModel):
    """a_n = n**-(p-1) - (n+1)**-(p-1), so that x_n = n**-(p-1).

    ``p = 2`` gives a_n = 1/(n(n+1)), x_n = 1/n and s_k = 4**-k.
    """

    p: float
    family = "power_law_telescoping"

    def __post_init__(self):
        if not self.p > 1.0:
            raise ValidationError(f"power law exponent must exceed 1, got {self.p}")

    @property
    def q(self):
        return self.p - 1.0

    def log_tail(self, n):
        self._check_index(n)
        return -self.q * math.log(n)

    def log_range_sum(self, lo, hi=None):
        if hi is None:
            return self.log_tail(lo)
        self._check_index(lo)
        if hi <= lo:
            return NEG_INF
        log_lo = math.log(lo)
        return -self.q * log_lo + _log_one_minus_pow(self.q, math.log(hi - lo) - log_lo)

    def log_term(self, n):
        return self.log_range_sum(n, n + 1)

    def log_block_range_sums(self, k, start, width):
        start = np.asarray(start, dtype=float)
        log_lo = k * LOG2 + np.log1p(start)
        ratio = width / (1.0 + start)
        return -self.q * log_lo + np.log(-np.expm1(-self.q * np.log1p(ratio)))

    def to_spec(self):
        return {"family": self.family, "p": self.p}


@dataclass(frozen=True)
class DyadicBlockSchedule(SequenceModel):
    """Block-constant sequence driven by a periodic schedule of ratios.

    The schedule ``ratios[i]`` repeated ``runs[i]`` times, cycled forever,
    gives tau_k for block k.  With s_0 = 1 and s_{k+1} = tau_k s_k every term of
    block k equals s_k (1 - 2 tau_k); the total sum is s_0 = 1 by telescoping.
    """

    ratios: tuple
    runs: tuple
    family = "dyadic_block_schedule"
    block_constant = True
    _period: np.ndarray = field(init=False, repr=False, compare=False)
    _prefix: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        ratios = tuple(float(t) for t in self.ratios)
        runs = tuple(int(r) for r in self.runs)
        if not ratios or len(ratios) != len(runs):
            raise ValidationError("ratios and runs must be non-empty and of equal length")
        for t in ratios:
            if not 0.0 < t < 0.5:
                raise ValidationError(f"block ratio {t} outside (0, 1/2)")
        if any(r < 1 for r in runs):
            raise ValidationError("run lengths must be positive")
        object.__setattr__(self, "ratios", ratios)
        object.__setattr__(self, "runs", runs)
        period = np.repeat(np.array(ratios), runs)
        object.__setattr__(self, "_period", period)
        object.__setattr__(self, "_prefix", np.concatenate([[0.0], np.cumsum(np.log(period))]))
        # term of block k+1 <= term of block k  <=>  tau_k (1 - 2 tau_{k+1}) <= 1 - 2 tau_k
        P = len(period)
        for k in range(P):
            t0, t1 = period[k], period[(k + 1) % P]
            if t0 * (1.0 - 2.0 * t1) > (1.0 - 2.0 * t0) * (1.0 + 1e-15):
                raise ValidationError(
                    f"schedule is not non-increasing at index {2 ** (k + 1)}",
                    index=2 ** (k + 1))

    def tau(self, k):
        return float(self._period[k % len(self._period)])

    def log_s(self, k):
        P = len(self._period)
        q, rem = divmod(k, P)
        return q * float(self._prefix[-1]) + float(self._prefix[rem])

    def log_block_value(self, k):
        return self.log_s(k) + math.log1p(-2.0 * self.tau(k))

    def log_term(self, n):
        self._check_index(n)
        return self.log_block_value(_block_of(n))

    def log_tail(self, n):
        self._check_index(n)
        if n == 1:
            return 0.0  # the schedule telescopes to total mass s_0 = 1
        k = _block_of(n)
        head = math.log(2 ** (k + 1) - n) + self.log_block_value(k)
        return log_add(head, (k + 1) * LOG2 + self.log_s(k + 1))

    def log_r(self, k):
        return self.log_block_value(k)

    def log_range_sum(self, lo, hi=None):
        if hi is None:
            return self.log_tail(lo)
        self._check_index(lo)
        if hi <= lo:
            return NEG_INF
        k1, k2 = _block_of(lo), _block_of(hi - 1)
        if k1 == k2:
            return math.log(hi - lo) + self.log_block_value(k1)
        parts = [math.log(2 ** (k1 + 1) - lo) + self.log_block_value(k1),
                 math.log(hi - 2 ** k2) + self.log_block_value(k2)]
        if k2 - k1 - 1 <= 64:
            parts.extend(k * LOG2 + self.log_block_value(k) for k in range(k1 + 1, k2))
        else:
            x_a = (k1 + 1) * LOG2 + self.log_s(k1 + 1)
            x_b = k2 * LOG2 + self.log_s(k2)
            parts.append(log_sub(x_a, x_b))
        return _logsumexp(parts)

    def log_block_range_sums(self, k, start, width):
        start = np.asarray(start, dtype=float)
        return np.full(start.shape, math.log(width) + k * LOG2 + self.log_block_value(k))

    def to_spec(self):
        return {"family": self.family, "ratios": list(self.ratios), "runs": list(self.runs)}


class DyadicBlockGeometric(DyadicBlockSchedule):
    """a_n = (1 - 2 tau) tau**k on block k; s_k = tau**k.

    tau = 1/3 realises the middle-third Cantor set.
    """

    family = "dyadic_block_geometric"

    def __init__(self, tau):
        super().__init__(ratios=(tau,), runs=(1,))

    def __repr__(self):
        return f"DyadicBlockGeometric(tau={self.ratios[0]!r})"

    @property
    def tau_value(self):
        return self.ratios[0]

    def to_spec(self):
        return {"family": self.family, "tau": self.ratios[0]}


@dataclass(frozen=True)
class TelescopingTail:
    """Closed-form remainder a_n = scale (n**-q - (n+1)**-q) after the listed terms."""

    q: float
    scale: float

    def __post_init__(self):
        if not (self.q > 0 and self.scale > 0):
            raise ValidationError("telescoping tail needs q > 0 and scale > 0")

    def log_tail(self, n):
        return math.log(self.scale) - self.q * math.log(n)

    def log_term(self, n):
        log_n = math.log(n)
        return math.log(self.scale) - self.q * log_n + _log_one_minus_pow(self.q, -log_n)


@dataclass(frozen=True)
class ExplicitFinite(SequenceModel):
    """Listed terms a_1..a_N, optionally continued by a closed-form tail.

    With ``normalize`` the whole sequence is scaled by 1/S where S is the raw
    total; otherwise the raw total must already be 1 within 1e-12.
    """

    terms: tuple
    tail_model: Optional[TelescopingTail] = None
    normalize: bool = True
    family = "explicit_finite"
    _log_scale: float = field(init=False, repr=False, compare=False)
    _suffix: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        terms = tuple(float(t) for t in self.terms)
        object.__setattr__(self, "terms", terms)
        if not terms:
            raise ValidationError("explicit sequence needs at least one term")
        for i, t in enumerate(terms, start=1):
            if not t > 0:
                raise ValidationError(f"term a_{i} = {t} is not positive", index=i)
            if i > 1 and t > terms[i - 2]:
                raise ValidationError(
                    f"sequence increases at index {i}: a_{i} = {t} > a_{i - 1} = {terms[i - 2]}",
                    index=i)
        N = len(terms)
        tail_mass = 0.0
        if self.tail_model is not None:
            first = math.exp(self.tail_model.log_term(N + 1))
            if first > terms[-1]:
                raise ValidationError(
                    f"sequence increases at index {N + 1}: tail term {first} > a_{N} = {terms[-1]}",
                    index=N + 1)
            tail_mass = math.exp(self.tail_model.log_tail(N + 1))
        arr = np.array(terms)
        suffix = np.cumsum(arr[::-1])[::-1] + tail_mass
        total = float(suffix[0])
        if self.normalize:
            log_scale = -math.log(total)
        else:
            if abs(total - 1.0) > 1e-12:
                raise ValidationError(f"terms sum to {total!r}, not 1 (normalize = false)")
            log_scale = 0.0
        object.__setattr__(self, "_log_scale", log_scale)
        object.__setattr__(self, "_suffix", np.append(suffix, tail_mass))

    @property
    def max_index(self):
        return None if self.tail_model is not None else len(self.terms)

    def log_term(self, n):
        self._check_index(n)
        N = len(self.terms)
        if n <= N:
            return math.log(self.terms[n - 1]) + self._log_scale
        return self.tail_model.log_term(n) + self._log_scale

    def log_tail(self, n):
        N = len(self.terms)
        if n < 1:
            raise SequenceIndexError(f"index {n} < 1", index=int(n))
        if n <= N + 1:
            raw = float(self._suffix[n - 1])
            return math.log(raw) + self._log_scale if raw > 0 else NEG_INF
        if self.tail_model is None:
            raise SequenceIndexError(f"index {n} beyond the listed terms", index=int(n))
        return self.tail_model.log_tail(n) + self._log_scale

    def log_range_sum(self, lo, hi=None):
        N = len(self.terms)
        if hi is not None and hi <= N + 1 and 0 < hi - lo <= 64:
            self._check_index(lo)
            return math.log(math.fsum(self.terms[lo - 1:hi - 1])) + self._log_scale
        return super().log_range_sum(lo, hi)

    def to_spec(self):
        spec = {"family": self.family, "terms": list(self.terms)}
        if self.tail_model is None:
            spec["tail"] = "none"
        else:
            spec.update(tail="telescoping", tail_q=self.tail_model.q,
                        tail_scale=self.tail_model.scale)
        spec["normalize"] = self.normalize
        return spec


# ----------------------------------------------------------------------------
# operations

def term(seq, n):
    """a_n as a float."""
    return math.exp(seq.log_term(n))


def tail(seq, n):
    """x_n = sum_{i >= n} a_i."""
    return LogScaleValue(seq.log_tail(n))


def s_value(seq, k):
    """s_k = 2**-k x_{2**k}."""
    if k < 0:
        raise SequenceIndexError(f"dyadic level {k} < 0", index=int(k))
    return LogScaleValue(seq.log_s(k))


def block_average(seq, k):
    """r_k = 2**-k sum over block k."""
    return LogScaleValue(seq.log_r(k))


@dataclass(frozen=True)
class ScaleTable:
    """log x_{2**k}, log s_k and log r_k for k = 0..kmax."""

    log_x: np.ndarray
    log_s: np.ndarray
    log_r: np.ndarray

    @property
    def kmax(self):
        return len(self.log_s) - 1


def scale_table(seq, kmax):
    ks = range(kmax + 1)
    log_s = np.array([seq.log_s(k) for k in ks])
    log_x = log_s + np.arange(kmax + 1) * LOG2
    log_r = np.array([seq.log_r(k) for k in ks])
    return ScaleTable(log_x=log_x, log_s=log_s, log_r=log_r)


@dataclass(frozen=True)
class HypothesisReport:
    window: tuple
    inf_ratio: float
    sup_ratio: float
    nth_root_trend: tuple
    doubling_constant: float

    def to_record(self):
        return {
            "window_lo": self.window[0], "window_hi": self.window[1],
            "inf_ratio": self.inf_ratio, "sup_ratio": self.sup_ratio,
            "nth_root_trend_lo": self.nth_root_trend[0],
            "nth_root_trend_hi": self.nth_root_trend[1],
            "doubling_constant": self.doubling_constant,
        }


def hypothesis_report(seq, window=(1, 64)):
    """Ratio diagnostics for the standing hypotheses; reports, never judges.

    ``inf_ratio``/``sup_ratio`` are the extremes of s_n/s_{n+1} over the
    window, ``nth_root_trend`` is (s_n/s_{n+1})**(1/n) at both window ends and
    ``doubling_constant`` the largest a_n/a_{2n} seen for n in the window and
    for the dyadic indices 2**n.
    """
    lo, hi = int(window[0]), int(window[1])
    if hi < lo or lo < 0:
        raise ValidationError(f"empty window {window}")
    log_s = np.array([seq.log_s(k) for k in range(lo, hi + 2)])
    log_ratio = log_s[:-1] - log_s[1:]
    ends = [max(lo, 1), max(hi, 1)]
    trend = tuple(math.exp((seq.log_s(n) - seq.log_s(n + 1)) / n) for n in ends)
    idx = set(range(max(lo, 1), hi + 1)) | {2 ** k for k in range(lo, hi + 1)}
    doubling = max(seq.log_term(n) - seq.log_term(2 * n) for n in sorted(idx))
    return HypothesisReport(
        window=(lo, hi),
        inf_ratio=math.exp(float(log_ratio.min())),
        sup_ratio=math.exp(float(log_ratio.max())),
        nth_root_trend=trend,
        doubling_constant=math.exp(doubling),
    )


# ----------------------------------------------------------------------------
# sequence-spec files

_FIELDS = {
    "power_law_telescoping": ("p",),
    "dyadic_block_geometric": ("tau",),
    "dyadic_block_schedule": ("ratios", "runs"),
    "explicit_finite": ("terms", "tail", "tail_q", "tail_scale", "normalize"),
}


def _fmt(value):
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (list, tuple)):
        return ", ".join(_fmt(v) for v in value)
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        return repr(value)
    return str(value)


def dumps_spec(seq):
    """Canonical key = value text for a sequence model."""
    spec = seq.to_spec()
    lines = [f"family = {spec['family']}"]
    for key in _FIELDS[spec["family"]]:
        if key in spec:
            lines.append(f"{key} = {_fmt(spec[key])}")
    return "\n".join(lines) + "\n"


def _floats(text):
    return [float(v) for v in text.split(",") if v.strip()]


def loads_spec(text):
    values = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValidationError(f"line {lineno}: expected 'key = value'", line=lineno)
        key, value = (part.strip() for part in line.split("=", 1))
        if key in values:
            raise ValidationError(f"line {lineno}: duplicate key {key!r}", line=lineno)
        values[key] = value
    family = values.pop("family", None)
    if family not in _FIELDS:
        raise ValidationError(f"unknown or missing family {family!r}")
    unknown = set(values) - set(_FIELDS[family])
    if unknown:
        raise ValidationError(f"unknown keys for {family}: {sorted(unknown)}")
    try:
        if family == "power_law_telescoping":
            return PowerLawTelescoping(float(values["p"]))
        if family == "dyadic_block_geometric":
            return DyadicBlockGeometric(float(values["tau"]))
        if family == "dyadic_block_schedule":
            runs = [int(v) for v in values["runs"].split(",") if v.strip()]
            return DyadicBlockSchedule(tuple(_floats(values["ratios"])), tuple(runs))
        tail_kind = values.get("tail", "none")
        tail_model = None
        if tail_kind == "telescoping":
            tail_model = TelescopingTail(float(values["tail_q"]), float(values["tail_scale"]))
        elif tail_kind != "none":
            raise ValidationError(f"unknown tail model {tail_kind!r}")
        normalize = values.get("normalize", "true").lower()
        if normalize not in ("true", "false"):
            raise ValidationError(f"normalize must be true or false, got {normalize!r}")
        return ExplicitFinite(tuple(_floats(values["terms"])), tail_model, normalize == "true")
    except KeyError as exc:
        raise ValidationError(f"missing key {exc.args[0]!r} for {family}") from None


def load_spec(path):
    with open(path, encoding="utf-8") as fh:
        return loads_spec(fh.read())


def dump_spec(seq, path):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps_spec(seq))
