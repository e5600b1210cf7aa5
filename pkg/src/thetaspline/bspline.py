"""B-splines with arbitrary simple knots and their associated splines ``t^-N B_N``.

The primary evaluator is the truncated-power divided difference

    B_N(t) = (N+1) * sum_v (v - t)_+^N / W'(v),     W(x) = prod_v (x - v),

evaluated under adaptive precision.  Since the full sum of ``(v - t)^N / W'(v)``
is a divided difference of a degree-N polynomial over N+2 points it vanishes,
so the same value is obtained from the knots *left* of ``t``:

    B_N(t) = (-1)^(N+1) * (N+1) * sum_{v < t} (t - v)^N / W'(v).

Whichever side holds fewer knots is summed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import gmpy2
import numpy as np
from gmpy2 import mpfr

from .numerics import (
    LogValue,
    PrecisionContext,
    QuadratureRule,
    XReal,
    _gl_nodes,
    adaptive_eval,
    adaptive_eval_many,
    to_mpfr,
    working_precision,
)
from .polyfamilies import KnotSet

__all__ = [
    "DomainError",
    "SplineEval",
    "eval_divided_difference",
    "eval_recurrence",
    "eval_assoc",
    "eval_assoc_log",
    "eval_many",
    "eval_assoc_many",
    "integrate_bspline",
    "first_interval_value",
]


class DomainError(ValueError):
    """Argument outside the domain of the associated spline."""


@dataclass(frozen=True)
class SplineEval:
    t: XReal
    b_value: XReal
    assoc_value: XReal | LogValue | None
    precision_used: int
    interval_index: int


def _interval_index(ks: Sequence[mpfr], t: mpfr) -> int:
    # -1 left of the support, N+1 at or right of max, else i with ks[i] <= t < ks[i+1]
    lo, hi = 0, len(ks)
    while lo < hi:
        mid = (lo + hi) // 2
        if ks[mid] <= t:
            lo = mid + 1
        else:
            hi = mid
    return lo - 1


def _b_at(knots: KnotSet, t, bits: int) -> mpfr:
    ks = knots.at(bits)
    N = knots.N
    x = to_mpfr(t)
    if x <= ks[0] or x >= ks[-1]:
        if N == 0 and x == ks[0]:
            return 1 / (ks[1] - ks[0])
        return mpfr(0)
    wp = knots.wprime(bits)
    j = _interval_index(ks, x) + 1  # knots ks[:j] are <= t
    s = mpfr(0)
    if j <= len(ks) - j:
        for v, w in zip(ks[:j], wp[:j]):
            s += (x - v) ** N / w
        if N % 2 == 0:
            s = -s
    else:
        for v, w in zip(ks[j:], wp[j:]):
            s += (v - x) ** N / w
    return (N + 1) * s


def _assoc_at(knots: KnotSet, t, bits: int) -> mpfr:
    x = to_mpfr(t)
    ks = knots.at(bits)
    if x == 0:
        if ks[0] != 0:
            return mpfr(0)
        return first_interval_value(knots, bits)
    return _b_at(knots, x, bits) / x**knots.N


def first_interval_value(knots: KnotSet, bits: int) -> mpfr:
    """``(-1)^(N+1) (N+1) / W'(min)``, the constant of ``B_N / (t - min)^N`` on the first interval."""
    with working_precision(bits):
        w = knots.wprime(bits)[0]
        c = (knots.N + 1) / w
        return c if knots.N % 2 else -c


def eval_divided_difference(knots: KnotSet, t, ctx: PrecisionContext | None = None) -> SplineEval:
    ctx = ctx or PrecisionContext()
    val = adaptive_eval(lambda bits: _b_at(knots, t, bits), ctx)
    with working_precision(val.precision_bits):
        idx = _interval_index(knots.at(val.precision_bits), to_mpfr(t))
    return SplineEval(XReal.of(t, val.precision_bits), val, None, val.precision_bits, idx)


def eval_assoc(knots: KnotSet, t, ctx: PrecisionContext | None = None, *, log: bool = False):
    """``B*_N(t) = t^-N B_N(t)`` for knots in ``[0, inf)``.

    At ``t = 0`` with ``min = 0`` the first-interval constant is returned.
    With ``log=True`` the result is a :class:`LogValue`.
    """
    ctx = ctx or PrecisionContext()
    if float(to_mpfr(t)) < 0 or to_mpfr(t) < 0:
        raise DomainError("the associated spline is defined for t >= 0")
    if knots.lo < 0:
        raise DomainError("the associated spline needs knots in [0, inf)")
    val = adaptive_eval(lambda bits: _assoc_at(knots, t, bits), ctx)
    return val.to_log() if log else val


def eval_assoc_log(knots: KnotSet, t, ctx: PrecisionContext | None = None) -> LogValue:
    return eval_assoc(knots, t, ctx, log=True)


def eval_many(knots: KnotSet, ts: Sequence, ctx: PrecisionContext | None = None) -> tuple[list, int]:
    """``B_N`` at many points under one shared precision schedule."""
    ctx = ctx or PrecisionContext()
    return adaptive_eval_many(lambda bits: [_b_at(knots, t, bits) for t in ts], ctx)


def eval_assoc_many(knots: KnotSet, ts: Sequence, ctx: PrecisionContext | None = None) -> tuple[list, int]:
    ctx = ctx or PrecisionContext()
    if knots.lo < 0:
        raise DomainError("the associated spline needs knots in [0, inf)")
    return adaptive_eval_many(lambda bits: [_assoc_at(knots, t, bits) for t in ts], ctx)


def eval_recurrence(knots: KnotSet | Sequence[float], t: float) -> float:
    """Double-precision Cox-de Boor value, rescaled to unit integral.

    Every term of the recurrence is non-negative, which makes this an
    independent and well-conditioned check of the divided-difference sum.
    """
    ks = knots.floats() if isinstance(knots, KnotSet) else np.sort(np.asarray(knots, dtype=float))
    n = len(ks) - 1  # order N+1
    if t < ks[0] or t >= ks[-1]:
        return 0.0
    basis = np.zeros(n)
    i = int(np.searchsorted(ks, t, side="right")) - 1
    basis[i] = 1.0
    for k in range(2, n + 1):
        nxt = np.zeros(n - k + 1)
        for j in range(n - k + 1):
            acc = 0.0
            if basis[j] != 0.0:
                acc += (t - ks[j]) / (ks[j + k - 1] - ks[j]) * basis[j]
            if basis[j + 1] != 0.0:
                acc += (ks[j + k] - t) / (ks[j + k] - ks[j + 1]) * basis[j + 1]
            nxt[j] = acc
        basis = nxt
    return float(basis[0] * n / (ks[-1] - ks[0]))


def integrate_bspline(knots: KnotSet, rule: QuadratureRule | None = None, ctx: PrecisionContext | None = None) -> float:
    """``int B_N`` over the support by Gauss-Legendre on each knot interval.

    ``B_N`` is a degree-N polynomial on each interval, so ``ceil((N+1)/2)``
    nodes already integrate it exactly; the rule's panel size is used when
    larger.
    """
    rule = rule or QuadratureRule()
    ctx = ctx or PrecisionContext()
    n = max(math.ceil((knots.N + 1) / 2), min(rule.points_per_panel, knots.N + 1))
    x, w = _gl_nodes(n)

    def total(bits: int) -> list:
        ks = knots.at(bits)
        xs = [to_mpfr(float(v)) for v in x]
        ws = [to_mpfr(float(v)) for v in w]
        s = mpfr(0)
        for a, b in zip(ks, ks[1:]):
            half, mid = (b - a) / 2, (a + b) / 2
            part = mpfr(0)
            for xi, wi in zip(xs, ws):
                part += wi * _b_at(knots, mid + half * xi, bits)
            s += half * part
        return [s]

    vals, _ = adaptive_eval_many(total, PrecisionContext(ctx.start_bits, ctx.max_bits, 1e-15, ctx.escalation_factor))
    return float(vals[0])
