import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from compdim.errors import ValidationError
from compdim.dimcalc import (assouad_pair, assouad_interpolation_bound, box_dims, countable_formula,
                             hausdorff_cantor, interm_cantor_upper, interm_countable,
                             range_for_theta, selectors)
from compdim.seqcore import DyadicBlockGeometric, DyadicBlockSchedule, PowerLawTelescoping

LOG23 = math.log(2) / math.log(3)
# finite windows sample non-dyadic n too; for tau = 1/3 that costs O(1/k) ~ 1e-4
WINDOW_SLACK = 1e-3


def box_oracle(seq, n):
    """log n / -log(x_n / n) evaluated independently from the closed forms."""
    if isinstance(seq, PowerLawTelescoping):
        x = n ** -(seq.p - 1)
    else:
        tau = seq.tau_value
        k = n.bit_length() - 1
        x = (2 ** (k + 1) - n) * (1 - 2 * tau) * tau ** k + (2 * tau) ** (k + 1)
    return math.log(n) / -math.log(x / n)


# --- examples -----------------------------------------------------------------

def test_box_family1(family1):
    lo, up, af = box_dims(family1, (1, 20))
    assert lo.value == pytest.approx(0.5, abs=1e-3)
    assert up.value == pytest.approx(0.5, abs=1e-3)
    assert af.value <= lo.value + 1e-12


def test_box_family2(family2):
    lo, up, af = box_dims(family2)
    assert lo.value == pytest.approx(LOG23, abs=5e-3)
    assert up.value == pytest.approx(LOG23, abs=5e-3)
    for n in [2 ** 10 + 17, 2 ** 40 + 3 * 2 ** 37, 2 ** 200]:
        assert box_oracle(family2, n) == pytest.approx(
            math.log(n) / (math.log(n) - family2.log_tail(n)), rel=1e-12)


def test_a_form_can_differ():
    seq = DyadicBlockGeometric(0.49)
    lo, _, af = box_dims(seq)
    assert af.value < lo.value - 1e-3


def test_hausdorff(family1, family2):
    assert hausdorff_cantor(family1).value == pytest.approx(0.5, abs=1e-3)
    assert hausdorff_cantor(family2).value == pytest.approx(LOG23, abs=5e-3)
    assert hausdorff_cantor(family2).value == box_dims(family2)[0].value


def test_assouad(family1, family2, alternating):
    A, L = assouad_pair(family1)
    assert A.value == pytest.approx(0.5, abs=1e-9) and L.value == pytest.approx(0.5, abs=1e-9)
    A, L = assouad_pair(family2)
    assert A.value == pytest.approx(LOG23, abs=1e-9) and L.value == pytest.approx(LOG23, abs=1e-9)
    A, L = assouad_pair(alternating)
    assert A.value == pytest.approx(LOG23, abs=1e-9)
    assert L.value == pytest.approx(math.log(2) / math.log(5), abs=1e-9)


def test_selector_examples(family1, family2):
    p = selectors(family1, 0.5, 3)
    assert (p.gamma, p.rho) == (6, 7)
    p = selectors(family2, 0.25, 4)
    assert (p.gamma, p.rho) == (16, 17)
    for r in range(1, 30):
        p = selectors(family2, 1.0, r)
        assert p.gamma == r and p.rho in (r, r + 1)


def test_selector_brute_force(alternating):
    for theta in (0.2, 0.5, 0.9):
        for r in range(1, 65):
            p = selectors(alternating, theta, r)
            log_s = [alternating.log_s(m) for m in range(0, 8 * r + 8)]
            gamma = max(m for m in range(len(log_s)) if log_s[m] >= log_s[r] / theta - 1e-12)
            vals = [log_s[m] / m for m in range(r, gamma + 2)]
            best = min(vals)
            rho = max(r + i for i, v in enumerate(vals) if v <= best + 1e-12 * abs(best))
            assert (p.gamma, p.rho) == (gamma, rho)


def test_interm_cantor(family1, family2):
    for theta in (0.1, 0.25, 0.5, 1.0):
        assert interm_cantor_upper(family1, theta).value == pytest.approx(0.5, abs=1e-12)
    assert interm_cantor_upper(family2, 0.3).value == pytest.approx(LOG23, abs=5e-3)
    one = interm_cantor_upper(family2, 1.0, window=(1, 512)).value
    assert one == pytest.approx(box_dims(family2, (1, 512))[1].value, abs=WINDOW_SLACK)


def test_interm_countable_examples(family1):
    up, lo = interm_countable(family1, 0.5)
    assert up.value == pytest.approx(1 / 3, abs=1e-12) and lo.value == pytest.approx(1 / 3, abs=1e-12)
    assert interm_countable(family1, 1.0)[0].value == pytest.approx(0.5, abs=1e-12)
    assert interm_countable(family1, 1e-9)[0].value < 1e-8
    assert interm_countable(family1, 0.0)[0].value == 0.0
    assert countable_formula(1.0, 0.3) == 1.0


def test_interpolation_bound_examples():
    assert assouad_interpolation_bound(1, 0, 0.5, 0.5) == pytest.approx(1 / 3, abs=1e-15)
    assert assouad_interpolation_bound(0.8, 0.2, 0.5, 1.0) == pytest.approx(0.5, abs=1e-15)
    assert assouad_interpolation_bound(0.8, 0.2, 0.5, 0.5) == pytest.approx(0.4, abs=1e-15)
    with pytest.raises(ValidationError):
        assouad_interpolation_bound(0.5, 0.5, 0.5, 0.5)


def test_range_examples(family1, family2):
    rec = range_for_theta(family1, 0.5)
    assert np.allclose(rec.lower_interval, (1 / 3, 0.5), atol=1e-3)
    assert np.allclose(rec.upper_interval, (1 / 3, 0.5), atol=1e-3)
    rec = range_for_theta(family2, 1.0)
    assert np.allclose(rec.lower_interval + rec.upper_interval, LOG23, atol=5e-3)


# --- properties ---------------------------------------------------------------

@pytest.mark.parametrize("seq_name", ["family1", "family2", "alternating"])
def test_selector_invariants(seq_name, request):
    seq = request.getfixturevalue(seq_name)
    for theta in (0.1, 0.3, 0.5, 0.8, 1.0):
        for r in range(1, 65):
            p = selectors(seq, theta, r)
            assert r <= p.rho <= p.gamma + 1
            target = seq.log_s(r) / theta
            assert seq.log_s(p.gamma) >= target - 1e-12 * abs(target)
            assert seq.log_s(p.gamma + 1) < target


def test_countable_monotone_in_theta(family1, family2, alternating):
    grid = np.linspace(0.0, 1.0, 41)
    for seq in (family1, family2, alternating):
        box = box_dims(seq)
        vals = [interm_countable(seq, t, box)[0].value for t in grid]
        assert all(b >= a for a, b in zip(vals, vals[1:]))


def test_cantor_window_values_monotone_in_theta(alternating, family2):
    for seq in (alternating, family2):
        thetas = [0.1, 0.2, 0.4, 0.6, 0.8, 1.0]
        windows = [interm_cantor_upper(seq, t, (1, 128)).window_values for t in thetas]
        for lo, hi in zip(windows, windows[1:]):
            assert np.all(hi >= lo - 1e-12)


def test_interpolation_bound_matches_countable_formula():
    B = np.linspace(0.005, 0.995, 100)
    th = np.linspace(0.01, 1.0, 100)
    worst = 0.0
    for b in B:
        for t in th:
            worst = max(worst, abs(assouad_interpolation_bound(1.0, 0.0, b, t) - countable_formula(b, t)))
    assert worst <= 1e-12


@settings(max_examples=200, deadline=None)
@given(st.floats(0.0, 0.9), st.floats(0.05, 1.0), st.floats(0.0, 1.0), st.floats(0.01, 1.0))
def test_interpolation_bound_between_bounds(L, width, frac, theta):
    A = min(1.0, L + width)
    if A <= L:
        return
    B = L + frac * (A - L)
    v = assouad_interpolation_bound(A, L, B, theta)
    assert L - 1e-12 <= v <= B + 1e-12
    assert assouad_interpolation_bound(A, L, B, 1.0) == pytest.approx(B, abs=1e-12)


@pytest.mark.parametrize("seq_name", ["family1", "family2"])
def test_range_ordering(seq_name, request):
    seq = request.getfixturevalue(seq_name)
    box = box_dims(seq)
    haus = hausdorff_cantor(seq).value
    for theta in (0.1, 0.25, 0.5, 0.75, 1.0):
        rec = range_for_theta(seq, theta, box, haus)
        assert rec.lower_interval[0] <= rec.lower_interval[1] + WINDOW_SLACK
        assert rec.upper_interval[0] <= rec.upper_interval[1] + WINDOW_SLACK
        assert rec.lower_interval[0] <= rec.upper_interval[0] + 1e-12


@pytest.mark.parametrize("seq_name", ["family1", "family2", "alternating"])
def test_ordering_chain(seq_name, request):
    seq = request.getfixturevalue(seq_name)
    # same level window as interm_cantor_upper's default (n = 1..256)
    box = box_dims(seq, (1, 256))
    lo, up, _ = box
    A, L = assouad_pair(seq)
    haus = hausdorff_cantor(seq, (1, 256)).value
    for theta in (0.25, 0.5, 1.0):
        rec = range_for_theta(seq, theta, box, haus)
        chain = [L.value, haus, rec.lower_interval[1], rec.upper_interval[1], up.value, A.value]
        for a, b in zip(chain, chain[1:]):
            assert a <= b + WINDOW_SLACK, chain


def test_reports_within_proxies(alternating):
    for rep in box_dims(alternating) + assouad_pair(alternating):
        assert rep.proxy[0] <= rep.value <= rep.proxy[1]
        assert 0.0 <= rep.value <= 1.0
    assert box_dims(alternating)[0].caveat  # long runs: the window has not settled


def test_trend_caveat():
    rep = interm_cantor_upper(DyadicBlockGeometric(0.3), 0.5, window=(1, 4))
    assert "window end" in rep.caveat
