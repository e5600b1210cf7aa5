import math

import gmpy2
import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from thetaspline.numerics import (
    Decay,
    LogValue,
    NonConvergent,
    PrecisionContext,
    PrecisionExhausted,
    QuadratureRule,
    XReal,
    adaptive_eval,
    integrate,
    to_mpfr,
    working_precision,
)

finite = st.floats(min_value=-1e6, max_value=1e6, allow_nan=False).filter(lambda x: abs(x) > 1e-6)


def test_working_precision_scopes():
    with working_precision(300):
        assert gmpy2.get_context().precision == 300
        x = to_mpfr(1) / 3
    assert x.precision == 300


def test_precision_context_env(monkeypatch):
    monkeypatch.setenv("THETASPLINE_MAX_BITS", "512")
    assert PrecisionContext.from_env().max_bits == 512
    assert PrecisionContext.from_env(max_bits=1024).max_bits == 1024


@pytest.mark.parametrize("kw", [{"start_bits": 1}, {"target_rel_tol": 0}, {"escalation_factor": 1}, {"start_bits": 64, "max_bits": 32}])
def test_precision_context_validation(kw):
    with pytest.raises(ValueError):
        PrecisionContext(**kw)


def test_adaptive_eval_settles_on_cancellation():
    # 2^100 ((1 + 2^-100) - 1) is 0 below ~100 bits and 1 above
    def comp(bits):
        return ((1 + to_mpfr(2) ** -100) - 1) * to_mpfr(2) ** 100 + 1

    v = adaptive_eval(comp, PrecisionContext(start_bits=64))
    assert v.value == 2
    assert v.precision_bits == 128


def test_adaptive_eval_exhausts():
    with pytest.raises(PrecisionExhausted):
        adaptive_eval(lambda bits: to_mpfr(bits), PrecisionContext(max_bits=1024))


def test_exceptions_are_arithmetic():
    assert issubclass(PrecisionExhausted, ArithmeticError)
    assert issubclass(NonConvergent, ArithmeticError)


@given(finite, finite)
def test_logvalue_mul_div(a, b):
    la, lb = LogValue.from_float(a), LogValue.from_float(b)
    assert math.isclose(float(la * lb), a * b, rel_tol=1e-12)
    assert math.isclose(float(la / lb), a / b, rel_tol=1e-12)


@given(finite, st.integers(min_value=-5, max_value=5))
def test_logvalue_pow(a, n):
    assert math.isclose(float(LogValue.from_float(a) ** n), a**n, rel_tol=1e-10)


def test_logvalue_far_outside_double():
    big = LogValue.from_float(2.0) ** 5000
    assert float(big) == math.inf
    assert big.ratio_to(LogValue.from_float(2.0) ** 4999) == pytest.approx(2.0)
    assert float(LogValue.zero()) == 0.0
    with pytest.raises(ZeroDivisionError):
        LogValue.from_float(1.0) / LogValue.zero()


@given(finite, finite)
def test_xreal_arithmetic(a, b):
    x, y = XReal.of(a), XReal.of(b)
    assert float(x + y) == pytest.approx(a + b, rel=1e-12, abs=1e-9)
    assert float(x * y) == pytest.approx(a * b, rel=1e-12)
    assert float(x / y) == pytest.approx(a / b, rel=1e-12)


def test_integrate_polynomial_exact():
    r = integrate(lambda t: t**5 - 3 * t**2, 0.0, 2.0)
    assert r.value == pytest.approx(64 / 6 - 8, abs=1e-13)


def test_integrate_infinite_exponential():
    r = integrate(lambda t: np.exp(-2 * t), 0.0, math.inf, decay=Decay("exp", 2.0))
    assert r.value == pytest.approx(0.5, abs=1e-13)


def test_integrate_power_decay():
    r = integrate(lambda t: 1 / (1 + t * t), 0.0, math.inf, decay=Decay("power", 2.0))
    assert r.value == pytest.approx(math.pi / 2, rel=1e-10)


def test_integrate_singular_endpoint():
    # int_0^1 t^-1/2 cos t dt, oracle from mpmath
    with mp.workdps(30):
        ref = float(mp.quad(lambda t: mp.cos(t) / mp.sqrt(t), [0, 1]))
    r = integrate(lambda t: np.cos(t) / np.sqrt(t), 0.0, 1.0, singular_power=0.5)
    assert r.value == pytest.approx(ref, rel=1e-12)


def test_integrate_tanh_sinh():
    r = integrate(lambda t: np.sqrt(1 - t * t), -1.0, 1.0, QuadratureRule(kind="tanh_sinh"))
    assert r.value == pytest.approx(math.pi / 2, rel=1e-12)


def test_integrate_complex():
    r = integrate(lambda t: np.exp(1j * t), 0.0, math.pi)
    assert r.value == pytest.approx(2j, abs=1e-13)


def test_infinite_needs_decay():
    with pytest.raises(ValueError):
        integrate(lambda t: np.exp(-t), 0.0, math.inf)


@pytest.mark.parametrize("kw", [{"kind": "simpson"}, {"points_per_panel": 0}])
def test_rule_validation(kw):
    with pytest.raises(ValueError):
        QuadratureRule(**kw)
