import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fockriesz.criteria import (RESOLUTION, compare, cond2_sup, cond2_trend, delta_N, delta_N_detail,
                                delta_N_u_form, delta_threshold, kadets_check, kadets_denominator_band,
                                kadets_threshold, limsup_stability, theorem_verdict, u_threshold)
from fockriesz.sequences import SequenceSpec, linear_spec, reference_spec


def test_thresholds_closed_form():
    assert delta_threshold(0.5) == pytest.approx(2.0 / 9.0, abs=1e-16)
    assert kadets_threshold(0.5) == pytest.approx(4.0 / 9.0, abs=1e-16)
    assert u_threshold() == 0.5
    for beta in (0.3, 0.7, 1.0):
        assert kadets_threshold(beta) == pytest.approx(delta_threshold(beta) / beta, rel=1e-15)


def test_compare_resolution_band():
    assert compare(0.1, 0.2) == "below"
    assert compare(0.3, 0.2) == "above"
    assert compare(0.2 + RESOLUTION / 2, 0.2) == "boundary"


def test_delta_N_against_exact_rational_oracle():
    rng = np.random.default_rng(3)
    d = rng.normal(size=40)
    beta, N, lo, hi = 0.5, 3, 5, 30
    best = Fraction(0)
    for n in range(lo, hi - N + 1):
        num = abs(sum(Fraction(x) for x in d[n + 1:n + N + 1]))
        den = Fraction(1 + n + N) ** 2 - Fraction(1 + n) ** 2
        best = max(best, num / den)
    val, arg = delta_N_detail(d, beta, N, lo, hi)
    assert val == pytest.approx(float(best), rel=1e-15)
    num = abs(math.fsum(d[arg + 1:arg + N + 1]))
    assert val == num / ((arg + 1 + N) ** 2 - (arg + 1) ** 2)


@settings(max_examples=100, deadline=None)
@given(st.lists(st.floats(-10, 10, allow_nan=False), min_size=12, max_size=60),
       st.sampled_from([0.3, 0.5, 0.7, 1.0]), st.integers(1, 5))
def test_u_form_is_rescaled_delta_form(deltas, beta, N):
    hi = len(deltas) - 1
    lo = 2
    if lo + N > hi:
        return
    a = delta_N(deltas, beta, N, lo, hi)
    b = delta_N_u_form(deltas, beta, N, lo, hi)
    k = (1.0 + beta) ** (1.0 / beta)
    assert b == pytest.approx(k * a, rel=1e-12, abs=1e-300)
    side_a = compare(a, delta_threshold(beta), 0.0)
    side_b = compare(b, u_threshold(), 0.0)
    if abs(a - delta_threshold(beta)) > 1e-12:
        assert side_a == side_b


def test_window_errors():
    d = np.zeros(10)
    with pytest.raises(ValueError):
        delta_N(d, 0.5, 0, 0, 9)
    with pytest.raises(ValueError):
        delta_N(d, 0.5, 3, 7, 9)
    with pytest.raises(ValueError):
        delta_N(d, 0.5, 1, 0, 10)


def test_cond2():
    n = np.arange(50, dtype=float)
    d = 0.3 * (1 + n)  # (1+n)^(1/beta - 1) = 1+n at beta = 0.5
    assert cond2_sup(d, 0.5, 49) == pytest.approx(0.3)
    assert cond2_trend(d, 0.5, 49) == "bounded"
    assert cond2_trend(0.3 * (1 + n) ** 1.5, 0.5, 49) == "unbounded-trend"


def test_kadets_check_sides_and_band():
    n = np.arange(100, dtype=float)
    r = kadets_check(0.5 * n, 0.5, 99)
    assert r.verdict == "violates" and r.sup_value == pytest.approx(0.5)
    assert kadets_check(0.4 * n, 0.5, 99).verdict == "satisfies"
    assert kadets_check((4.0 / 9.0) * n, 0.5, 99).verdict == "boundary"
    assert kadets_denominator_band(0.5, 100, 400) == pytest.approx(1.0 / 202.0, rel=1e-12)


def test_limsup_stability_and_prefix_guard():
    d = linear_spec(0.5, 64, 0.3).deltas
    assert limsup_stability(d, 0.5, 2, 9, 10, 63, trials=20)
    with pytest.raises(ValueError):
        limsup_stability(d, 0.5, 2, 10, 10, 63)


@pytest.mark.parametrize("c,verdict", [(0.0, "satisfies"), (0.1, "satisfies"), (0.3, "satisfies"),
                                       (0.5, "violates"), (0.7, "violates")])
def test_linear_family_verdicts(c, verdict):
    rep = theorem_verdict(linear_spec(0.5, 256, c))
    assert rep.verdict == verdict
    if verdict == "violates":
        assert rep.violated_condition == 3
        assert rep.witness["tail_value"] > delta_threshold(0.5)


def test_near_threshold_is_inconclusive_on_short_horizon():
    rep = theorem_verdict(linear_spec(0.5, 100, 0.44))
    assert rep.verdict == "inconclusive" and rep.reason


def test_separation_failure_is_condition_one():
    # move gamma_19 onto gamma_18
    u = ((1 + np.arange(20)) / 1.5) ** 2
    deltas = np.r_[np.zeros(19), [u[18] - u[19]]]
    rep = theorem_verdict(SequenceSpec.from_dict({"beta": 0.5, "count": 20, "deltas": deltas.tolist()}))
    assert rep.verdict == "violates" and rep.violated_condition == 1
    assert sorted(rep.witness["pair"]) == [18, 19]


def test_report_serializes():
    rep = theorem_verdict(reference_spec(0.5, 40)).to_dict()
    assert rep["verdict"] == "satisfies"
    assert set(rep["cond3"]) == {"1", "2", "3", "4"}
