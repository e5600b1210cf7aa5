from fractions import Fraction

import mpmath as mp
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from thetaspline.experiments import trend_ok
from thetaspline.interp import (
    DuplicateNode,
    InterpProblem,
    M_log,
    M_power,
    identity_cor39,
    identity_prop26,
    lagrange_eval,
    limit_cor24,
    limit_cor24_target,
    power_function,
)
from thetaspline.polyfamilies import PolyFamily, build_knotset, custom_knots


def test_constants():
    assert M_power(2, 1.0, 0) == pytest.approx(1 / 16, rel=1e-15)
    assert M_log(2, 1) == pytest.approx(-1 / 12, rel=1e-15)
    with pytest.raises(ValueError):
        M_power(3, 4.0, 0)
    with pytest.raises(ValueError):
        M_log(2, 3)


def test_cor39_example():
    # lhs = sqrt(2) - L(2) with L interpolating sqrt on {0, 1, 3}; mpmath value
    lhs, rhs, gap = identity_cor39(custom_knots([0, 1, 2, 3]), 2, s=1.0)
    assert lhs == pytest.approx(-0.16313670681653068366, rel=1e-14)
    assert gap <= 1e-12


def test_cor39_log_example():
    lhs, rhs, gap = identity_cor39(custom_knots([0, 1, 2, 3]), 2, m=1)
    assert lhs == pytest.approx(0.14384103622589049421, rel=1e-14)
    assert gap <= 1e-12


def test_cor39_index_form():
    ks = build_knotset("omega_squared", PolyFamily("chebyshev_U", 1, 6))
    a = identity_cor39(ks, "#3", s=2.5, d=1)
    b = identity_cor39(ks, float(ks.floats()[3]), s=2.5, d=1)
    assert a == b
    assert identity_cor39(ks, "#-1", s=1.5, d=1)[2] <= 1e-10


@pytest.mark.parametrize("kw", [{}, {"s": 1.0, "m": 1}, {"s": 4.0}, {"s": -1.0}])
def test_cor39_validation(kw):
    with pytest.raises(ValueError):
        identity_cor39(custom_knots([0, 1, 2, 3]), 2, **kw)


def test_cor39_needs_zero_and_positive_u():
    with pytest.raises(ValueError):
        identity_cor39(custom_knots([1, 2, 3, 4]), 2, s=1.0)
    with pytest.raises(ValueError):
        identity_cor39(custom_knots([0, 1, 2, 3]), 0, s=1.0)
    with pytest.raises(ValueError):
        identity_cor39(custom_knots([0, 1, 2, 3]), 1.5, s=1.0)
    with pytest.raises(TypeError):
        identity_cor39(custom_knots([0, 1, 2, 3]), 2, s=1 + 1j)


def test_prop26_hand_case():
    lhs, rhs, gap = identity_prop26([1], 2, 1)
    assert lhs == pytest.approx(-2, abs=1e-14)
    assert rhs == pytest.approx(-2, abs=1e-12)


def test_prop26_validation():
    with pytest.raises(ValueError):
        identity_prop26([1], 2, 2.0)
    with pytest.raises(ValueError):
        identity_prop26([1], 2, 5.0)


@settings(max_examples=25, deadline=None)
@given(st.lists(st.fractions(min_value=-4, max_value=4, max_denominator=12), min_size=2, max_size=7, unique=True), st.fractions(-4, 4, max_denominator=7))
def test_lagrange_matches_mpmath(nodes, x):
    f = lambda v: v**3 - 2 * v + 1 if not hasattr(v, "precision") else v**3 - 2 * v + 1
    got = float(lagrange_eval(InterpProblem(nodes, f, x)))
    xs = [mp.mpf(n.numerator) / n.denominator for n in nodes]
    xx = mp.mpf(x.numerator) / x.denominator
    ref = mp.fsum(
        (xi**3 - 2 * xi + 1) * mp.fprod([(xx - xj) / (xi - xj) for xj in xs if xj != xi]) for xi in xs
    )
    assert got == pytest.approx(float(ref), rel=1e-12, abs=1e-12)


def test_lagrange_reproduces_polynomials_exactly():
    p = InterpProblem([0, 1, 2, 5], lambda v: 3 * v**3 - v, Fraction(7, 3))
    assert float(lagrange_eval(p)) == pytest.approx(3 * (7 / 3) ** 3 - 7 / 3, rel=1e-15)


def test_duplicate_nodes():
    with pytest.raises(DuplicateNode):
        lagrange_eval(InterpProblem([0, 1, "1.0"], power_function(0.5), 2))


def test_limit_target_values():
    import math

    from thetaspline.specialfn import hd_mellin

    assert limit_cor24_target(0, s=1.5) == pytest.approx(2 * math.sin(1.5 * math.pi / 2) / math.pi * hd_mellin(0, 1.5))
    assert limit_cor24_target(1, m=1) == pytest.approx(-2 * hd_mellin(1, 3))


@pytest.mark.parametrize("kw", [{"s": 1.5}, {"m": 1}])
def test_limit_cor24_trend(kw):
    recs = limit_cor24("chebyshev_T", 0, (8, 16, 32, 64), **kw)
    assert all(trend_ok(recs).values())
    assert recs[-1].rel_err < 0.05
