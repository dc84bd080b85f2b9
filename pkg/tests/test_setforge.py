import math

import numpy as np
import pytest

from compdim.errors import InfeasibleTargetError, PrecisionError, ValidationError
from compdim.seqcore import (DyadicBlockGeometric, DyadicBlockSchedule, ExplicitFinite,
                             PowerLawTelescoping, TelescopingTail, s_value, tail, term)
from compdim.setforge import (IntervalSet, build_cantor, build_countable, build_mixed,
                              depth_for_resolution, dumps_set, j_index, loads_set,
                              plan_construction, verify_gaps)


def subtree_oracle(K, n_terms=10 ** 6):
    """Leaf lengths of C_a for a_n = 1/(n(n+1)) by direct summation of n_terms terms."""
    n = np.arange(1, n_terms + 1, dtype=float)
    a = 1.0 / (n * (n + 1.0))
    out = np.zeros(2 ** K)
    m = K
    while 2 ** (m + 1) - 1 <= n_terms:
        block = a[2 ** m - 1:2 ** (m + 1) - 1].reshape(2 ** K, -1)
        out += block.sum(axis=1)
        m += 1
    return out, 1.0 / 2 ** m  # the unsummed mass x_{2^m}


# --- Cantor -------------------------------------------------------------------

def test_middle_third_depth_two(family2):
    c = build_cantor(family2, 2)
    expect = [(0, 1 / 9), (2 / 9, 1 / 3), (2 / 3, 7 / 9), (8 / 9, 1)]
    assert np.allclose(np.c_[c.left, c.right], expect, atol=1e-15)


def test_family1_depth_three_against_direct_sums(family1):
    c = build_cantor(family1, 3)
    oracle, rest = subtree_oracle(3)
    assert np.all(np.abs(c.lengths - oracle) <= rest)
    assert np.all(c.lengths > 4.0 ** -4) and np.all(c.lengths < 4.0 ** -2)


@pytest.mark.parametrize("seq", [
    PowerLawTelescoping(2.0), PowerLawTelescoping(3.0), DyadicBlockGeometric(1 / 3),
    DyadicBlockGeometric(0.42), DyadicBlockSchedule((1 / 3, 0.2), (3, 3)),
], ids=lambda s: s.family)
@pytest.mark.parametrize("K", [1, 4, 9, 12])
def test_cantor_invariants(seq, K):
    c = build_cantor(seq, K)
    assert len(c) == 2 ** K
    assert c.left[0] == 0.0 and c.right[-1] == pytest.approx(1.0, abs=1e-12)
    assert c.total_length == pytest.approx(tail(seq, 2 ** K).value, rel=1e-10, abs=1e-10)
    lo, hi = s_value(seq, K + 1).value, s_value(seq, K - 1).value
    assert np.all(c.lengths > lo) and np.all(c.lengths < hi)
    assert np.all(c.gaps() > 0)
    assert verify_gaps(c, seq, min(2 ** K - 1, 255)).ok


def test_cantor_gap_positions(family1):
    # the gap removed at step k from interval j is a_{2^k + j - 1}
    c = build_cantor(family1, 3)
    g = c.gaps()
    assert g[3] == pytest.approx(term(family1, 1), rel=1e-12)           # middle gap
    assert g[1] == pytest.approx(term(family1, 2), rel=1e-12)
    assert g[5] == pytest.approx(term(family1, 3), rel=1e-12)
    assert np.allclose(g[[0, 2, 4, 6]], [term(family1, n) for n in (4, 5, 6, 7)], rtol=1e-12)


def test_cantor_refuses_beyond_floor(family2):
    with pytest.raises(PrecisionError):
        build_cantor(family2, 27)
    with pytest.raises(PrecisionError):
        build_cantor(DyadicBlockGeometric(0.2), 20)  # leaves 5**-20 < 1e-13


def test_cantor_explicit_without_tail():
    seq = ExplicitFinite(tuple(np.linspace(1.0, 0.5, 15)))
    c = build_cantor(seq, 3)
    assert len(c) == 8
    assert c.total_length == pytest.approx(tail(seq, 8).value, rel=1e-12)


def test_depth_for_resolution(family1, family2):
    assert depth_for_resolution(family2, 3.0 ** -7) == 7
    assert depth_for_resolution(family2, 3.0 ** (-7 / 0.3)) == 24
    K = depth_for_resolution(family1, 1e-5)
    assert build_cantor(family1, K).lengths.max() <= 1e-5
    assert build_cantor(family1, K - 1).lengths.max() > 1e-5


# --- countable ----------------------------------------------------------------

def test_countable_examples(family1, family2):
    d = build_countable(family1, 4)
    assert np.allclose(d.left, [0, 1 / 4, 1 / 3, 1 / 2, 1])
    assert np.allclose(d.right, [1 / 5, 1 / 4, 1 / 3, 1 / 2, 1])
    d1 = build_countable(family2, 1)
    assert d1.right[-1] == 1.0 and d1.right[0] == pytest.approx(tail(family2, 2).value)
    d3 = build_countable(family2, 3)
    assert np.allclose(np.sort(d3.gaps())[::-1][:2], [1 / 3, 1 / 9])


def test_countable_gaps_are_terms(family1):
    d = build_countable(family1, 500)
    pts = d.right[1:][::-1]  # x_1 > x_2 > ...
    assert np.all(np.diff(pts) < 0)
    expect = np.array([term(family1, k) for k in range(1, 500)])
    assert np.allclose(-np.diff(pts), expect, rtol=1e-9, atol=1e-16)
    assert d.residual_bound == pytest.approx(term(family1, 501))


def test_verify_gaps_examples(family1, family2):
    rep = verify_gaps(build_cantor(family2, 3), family2, 7)
    assert rep.ok and rep.matched_indices == tuple(range(1, 8))
    assert verify_gaps(build_countable(family1, 5), family1, 4).ok


def test_verify_gaps_negative_control(family1):
    d = build_countable(family1, 10)
    left, right = d.left.copy(), d.right.copy()
    left[-2] += 1e-4  # perturb the point x_2
    right[-2] += 1e-4
    rep = verify_gaps(IntervalSet(left, right), family1, 6)
    assert not rep.ok
    assert rep.first_mismatch["gap_rank"] == 0


# --- plan and mixed set -------------------------------------------------------

@pytest.fixture(scope="module")
def plan(family1):
    return plan_construction(family1, 0.5, 0.42)


def test_plan_exponent(plan):
    assert plan.s_exponent == pytest.approx(0.5 / 0.42, abs=1e-12)
    assert plan.upper_cantor == pytest.approx(0.5, abs=1e-12)
    assert plan.upper_countable == pytest.approx(1 / 3, abs=1e-12)


def test_j_bracketing_against_scan(family1):
    # exponent 2: j(n) = 2n + O(1), checked against a brute-force scan
    s = 2.0
    for n in range(1, 40):
        j = j_index(family1, n, s)
        target = s * family1.log_term(2 ** n)
        scan = [jj for jj in range(0, 4 * n + 4)
                if family1.log_term(2 ** (jj + 1)) < target <= family1.log_term(2 ** jj)]
        assert scan == [j] and j >= n
        assert abs(j - 2 * n) <= 2


def test_plan_j_map_invariants(plan, family1):
    s = plan.s_exponent
    j = plan.j_map
    assert j[0] == 0
    assert all(b >= a for a, b in zip(j, j[1:]))
    for n in range(1, 100):
        target = s * family1.log_term(2 ** n)
        assert family1.log_term(2 ** (j[n] + 1)) < target <= family1.log_term(2 ** j[n]) + 1e-12
        assert j[n] >= n


def test_b_sources_increase_and_partition(plan):
    src = [plan.b_model.source_index(n) for n in range(1, 2 ** 12)]
    assert src[0] == 2  # b_1 = a_2
    assert all(b > a for a, b in zip(src, src[1:]))
    left = [plan.a_prime.source_index(n) for n in range(1, 5000)]
    assert all(b > a for a, b in zip(left, left[1:]))
    assert not set(src) & set(left)
    upto = min(max(src), max(left))
    covered = {i for i in src + left if i <= upto}
    assert covered == set(range(1, upto + 1))


def test_plan_masses(plan):
    assert plan.mass_b + plan.mass_a_prime == pytest.approx(1.0, abs=1e-10)
    assert plan.split_r == pytest.approx(plan.mass_b)
    bsum = math.fsum(plan.b_term(n) for n in range(1, 2 ** 14))
    assert bsum <= plan.split_r and bsum == pytest.approx(plan.split_r, rel=1e-3)


def test_plan_determinism(family1, plan):
    again = plan_construction(family1, 0.5, 0.42)
    assert again.j_map == plan.j_map and again.offsets == plan.offsets
    assert again.split_r == plan.split_r


def test_plan_refusals(family1):
    with pytest.raises(InfeasibleTargetError):
        plan_construction(family1, 0.5, 0.25)
    with pytest.raises(InfeasibleTargetError):
        plan_construction(family1, 0.5, 0.5)
    # a_n = 2**-n makes s_n / s_(n+1) explode
    steep = ExplicitFinite(tuple(2.0 ** -n for n in range(1, 61)), TelescopingTail(1.0, 1e-16))
    with pytest.raises(ValidationError):
        plan_construction(steep, 0.5, 0.3)


def test_plan_shared_blocks():
    # unequal block ratios make j repeat; repeated blocks share a-blocks via offsets
    from compdim import dimcalc
    seq = DyadicBlockSchedule((0.4, 0.3), (8, 8))
    t = dimcalc.interm_cantor_upper(seq, 0.5).value / 1.1
    p = plan_construction(seq, 0.5, t)
    rep = [k for k in range(2, 65) if p.j_map[k] == p.j_map[k - 1]]
    assert rep, "expected repeated j values"
    for k in rep:
        assert p.offsets[k] == p.offsets[k - 1] + 2 ** (k - 1)
    src = [p.b_model.source_index(n) for n in range(1, 2 ** 10)]
    assert len(set(src)) == len(src)
    assert p.mass_b + p.mass_a_prime == pytest.approx(1.0, abs=1e-10)


def test_build_mixed(plan, family1):
    E = build_mixed(plan, 6, 10 ** 4)
    assert E.left[0] >= 0.0 and E.right[-1] == pytest.approx(1.0, abs=1e-15)
    # C_b ends at r where the D part accumulates; they merge into one component
    k = np.searchsorted(E.left, plan.split_r, side="right") - 1
    assert E.left[k] < plan.split_r <= E.right[k]
    rep = verify_gaps(E, family1, 100)
    assert rep.ok, rep.first_mismatch
    assert len(set(rep.matched_indices)) == 100


def test_mixed_near_upper_end(family1):
    # s close to 1 gives j(n) = n: b takes the first half of every block
    p = plan_construction(family1, 0.5, 0.4999)
    assert p.j_map[1:20] == tuple(range(1, 20))
    assert all(o == 0 for o in p.offsets)
    half = math.fsum(math.fsum(term(family1, i) for i in range(2 ** (k + 1), 2 ** (k + 1) + 2 ** k))
                     for k in range(0, 14))
    assert p.split_r == pytest.approx(half, abs=1e-4)
    assert 0.3 < p.split_r < 0.4


def test_dump_round_trip(family1):
    for iset in (build_cantor(family1, 5), build_countable(family1, 50)):
        again = loads_set(dumps_set(iset))
        assert np.array_equal(again.left, iset.left) and np.array_equal(again.right, iset.right)
        assert again.residual_bound == iset.residual_bound
        assert again.meta["builder"] == iset.meta["builder"]


def test_interval_set_normalises():
    s = IntervalSet([0.5, 0.0, 0.2, 0.3], [0.6, 0.1, 0.3, 0.35])
    assert np.allclose(s.left, [0.0, 0.2, 0.5]) and np.allclose(s.right, [0.1, 0.35, 0.6])
    with pytest.raises(ValidationError):
        IntervalSet([0.2], [0.1])
