import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from thetaspline.bspline import (
    DomainError,
    eval_assoc,
    eval_assoc_log,
    eval_assoc_many,
    eval_divided_difference,
    eval_many,
    eval_recurrence,
    first_interval_value,
    integrate_bspline,
)
from thetaspline.numerics import PrecisionContext
from thetaspline.polyfamilies import PolyFamily, build_knotset, custom_knots
from thetaspline.thetafn import theta_eval


def exact_b(knots, t):
    """Truncated-power divided difference in exact rational arithmetic."""
    knots = [Fraction(k) for k in knots]
    t = Fraction(t)
    N = len(knots) - 2
    total = Fraction(0)
    for i, v in enumerate(knots):
        if v > t:
            w = Fraction(1)
            for j, x in enumerate(knots):
                if j != i:
                    w *= v - x
            total += (v - t) ** N / w
    return (N + 1) * total if knots[0] <= t <= knots[-1] else Fraction(0)


def test_small_examples():
    assert float(eval_divided_difference(custom_knots([0, 1, 2]), 1).b_value) == 1
    assert float(eval_divided_difference(custom_knots([0, 1, 2, 3]), Fraction(3, 2)).b_value) == 0.75


rational_knots = st.lists(st.fractions(min_value=-5, max_value=5, max_denominator=20), min_size=3, max_size=9, unique=True)


@settings(max_examples=60, deadline=None)
@given(rational_knots, st.fractions(min_value=0, max_value=1, max_denominator=50))
def test_matches_exact_rational(knots, frac):
    ks = sorted(knots)
    t = ks[0] + frac * (ks[-1] - ks[0])
    got = eval_divided_difference(custom_knots(ks), t).b_value
    ref = exact_b(ks, t)
    assert float(got) == pytest.approx(float(ref), rel=1e-15, abs=1e-300)


@settings(max_examples=40, deadline=None)
@given(rational_knots, st.floats(0.01, 0.99))
def test_symmetry_under_reflection(knots, frac):
    # B(t, Omega) = B(-t, -Omega)
    ks = sorted(knots)
    t = ks[0] + frac * (ks[-1] - ks[0])
    a = float(eval_divided_difference(custom_knots(ks), t).b_value)
    b = float(eval_divided_difference(custom_knots([-k for k in ks]), -t).b_value)
    assert a == pytest.approx(b, rel=1e-14, abs=1e-300)


@settings(max_examples=30, deadline=None)
@given(rational_knots)
def test_integral_one(knots):
    assert integrate_bspline(custom_knots(knots)) == pytest.approx(1, abs=1e-10)


@settings(max_examples=40, deadline=None)
@given(rational_knots, st.floats(0.001, 0.999))
def test_recurrence_oracle(knots, frac):
    ks = sorted(float(k) for k in knots)
    t = ks[0] + frac * (ks[-1] - ks[0])
    a = float(eval_divided_difference(custom_knots(sorted(knots)), t).b_value)
    assert eval_recurrence(ks, t) == pytest.approx(a, rel=1e-9, abs=1e-12)


def test_support():
    ks = custom_knots([0, 1, 3, 4])
    for t in (-1, 0, 4, 5):
        assert float(eval_divided_difference(ks, t).b_value) == 0
    assert eval_recurrence(ks, 4.0) == 0


def test_interval_index():
    r = eval_divided_difference(custom_knots([0, 1, 3, 4]), 2)
    assert r.interval_index == 1


def test_assoc_first_interval_constant():
    ks = build_knotset("omega_squared", PolyFamily("chebyshev_T", 0, 6))
    x1 = ks.floats()[1]
    vals = [float(eval_assoc(ks, x1 * f)) for f in (0.1, 0.5, 0.9)]
    assert vals[0] == pytest.approx(vals[1], rel=1e-25) and vals[1] == pytest.approx(vals[2], rel=1e-25)
    assert float(eval_assoc(ks, 0)) == pytest.approx(vals[0], rel=1e-25)
    assert float(first_interval_value(ks, 128)) == pytest.approx(vals[0], rel=1e-25)


def test_assoc_log_matches_plain():
    ks = build_knotset("omega_squared", PolyFamily("chebyshev_U", 1, 10))
    t = 0.3
    assert float(eval_assoc_log(ks, t)) == pytest.approx(float(eval_assoc(ks, t)), rel=1e-13)


def test_assoc_log_huge_N():
    # B*_N ~ N 2^(2N-1) Theta_0(t) at N t/beta^2; compare in log space
    N = 128
    fam = PolyFamily("chebyshev_T", 0, N)
    ks = build_knotset("omega_squared", fam)
    v = eval_assoc_log(ks, N * 1.0 / fam.beta_N**2)
    assert v.sign == 1
    predicted = math.log(N) + (2 * N - 1) * math.log(2) + math.log(theta_eval(0, 1.0))
    assert v.log_mag == pytest.approx(predicted, abs=0.02)


def test_assoc_domain():
    with pytest.raises(DomainError):
        eval_assoc(custom_knots([0, 1, 2]), -0.5)
    with pytest.raises(DomainError):
        eval_assoc(custom_knots([-1, 1, 2]), 0.5)
    with pytest.raises(DomainError):
        eval_assoc_many(custom_knots([-1, 1, 2]), [0.5])


def test_many_matches_single():
    ks = custom_knots([0, "0.25", 1, 2, 5])
    ts = [0.1, 0.5, 1.5, 4.0]
    vals, bits = eval_many(ks, ts)
    for t, v in zip(ts, vals):
        assert float(v) == pytest.approx(float(exact_b([0, Fraction(1, 4), 1, 2, 5], Fraction(t))), rel=1e-15)
    avals, _ = eval_assoc_many(ks, ts)
    for t, v, a in zip(ts, vals, avals):
        assert float(a) == pytest.approx(float(v) / t**3, rel=1e-15)


def test_precision_escalates_for_clustered_knots():
    ks = build_knotset("omega_squared", PolyFamily("chebyshev_T", 0, 64))
    r = eval_divided_difference(ks, 0.5, PrecisionContext(start_bits=64))
    assert r.precision_used > 64
    assert float(r.b_value) > 0
