"""Theta-like functions

    Theta_0(t) = 1 - (4/pi) sum_{k>=0} (-1)^k exp(-(pi^2/4)(2k+1)^2/t) / (2k+1)
    Theta_1(t) = 1 + 2 sum_{k>=1} (-1)^k exp(-pi^2 k^2 / t)

Both series converge fast for small t.  For large t we use

    Theta_1(t) = 2 sqrt(t/pi) exp(-t/4) (1 + sum_{k>=1} exp(-k(k+1) t))
    Theta_0(t) = 2 sum_{k>=0} (-1)^k erfc((2k+1) sqrt(t) / 2)

The second identity comes from writing Theta_0 as an integral of its
derivative series in a = pi^2/(4t), transforming that series by Poisson
summation (character mod 4, Gauss sum 2i) and integrating termwise.  The test
suite checks it against the direct series on the overlap window.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .numerics import Decay, QuadratureRule, integrate

__all__ = [
    "SlowConvergence",
    "ThetaSpec",
    "theta_direct",
    "theta_transformed",
    "theta_eval",
    "theta_star0",
    "theta_leading",
    "laplace_identity_residual",
]


class SlowConvergence(ArithmeticError):
    """Series hit ``max_terms``; the argument is in the wrong regime."""


@dataclass(frozen=True)
class ThetaSpec:
    d: int = 0
    switch_t: float = 3.0
    tail_tol: float = 1e-18
    max_terms: int = 10**6

    def __post_init__(self) -> None:
        if self.d not in (0, 1):
            raise ValueError("d must be 0 or 1")
        if not self.switch_t > 0:
            raise ValueError("switch_t must be positive")

    @property
    def overlap(self) -> tuple[float, float]:
        return self.switch_t / 2, 2 * self.switch_t


def _spec(d: int, spec: ThetaSpec | None) -> ThetaSpec:
    if spec is None:
        return ThetaSpec(d)
    if spec.d != d:
        spec = ThetaSpec(d, spec.switch_t, spec.tail_tol, spec.max_terms)
    return spec


def theta_direct(d: int, t: float, spec: ThetaSpec | None = None) -> float:
    spec = _spec(d, spec)
    if not t > 0:
        raise ValueError("t must be positive")
    c = math.pi**2 / t
    s = 0.0
    for k in range(spec.max_terms):
        if d == 0:
            term = math.exp(-c * (2 * k + 1) ** 2 / 4) / (2 * k + 1)
        else:
            term = math.exp(-c * (k + 1) ** 2)
        # alternating with decreasing terms: first omitted term bounds the tail
        if term <= spec.tail_tol * abs(1.0 - s if d == 0 else 1.0 + s):
            break
        s += term if k % 2 == 0 else -term
    else:
        raise SlowConvergence(f"direct theta series did not settle at t={t}")
    if d == 0:
        return 1.0 - 4 / math.pi * s
    return 1.0 - 2 * s


def theta_transformed(d: int, t: float, spec: ThetaSpec | None = None) -> float:
    spec = _spec(d, spec)
    if not t > 0:
        raise ValueError("t must be positive")
    if d == 1:
        s = 1.0
        for k in range(1, spec.max_terms):
            term = math.exp(-k * (k + 1) * t)
            if term <= spec.tail_tol * s:
                break
            s += term
        else:
            raise SlowConvergence(f"transformed theta series did not settle at t={t}")
        return 2 * math.sqrt(t / math.pi) * math.exp(-t / 4) * s
    r = math.sqrt(t) / 2
    s = 0.0
    for k in range(spec.max_terms):
        term = math.erfc((2 * k + 1) * r)
        if term == 0.0 or (k > 0 and term <= spec.tail_tol * abs(s)):
            break
        s += term if k % 2 == 0 else -term
    else:
        raise SlowConvergence(f"transformed theta series did not settle at t={t}")
    return 2 * s


def theta_eval(d: int, t: float, spec: ThetaSpec | None = None) -> float:
    """``Theta_d(t)`` for ``t >= 0``; ``t = 0`` returns the limit value 1."""
    spec = _spec(d, spec)
    if t < 0:
        raise ValueError("t must be non-negative")
    if t == 0:
        return 1.0
    if t <= spec.switch_t:
        return theta_direct(d, t, spec)
    return theta_transformed(d, t, spec)


def theta_star0(t: float, terms: int = 200) -> float:
    """``sum_{k>=0} (-1)^k (2k+1) exp(-(pi^2/4)(2k+1)^2/t)``, the derivative kernel of Theta_0."""
    c = math.pi**2 / (4 * t)
    return sum((-1) ** k * (2 * k + 1) * math.exp(-c * (2 * k + 1) ** 2) for k in range(terms))


def theta_leading(d: int, t: float) -> float:
    """Leading large-t form: ``4 (pi t)^(-1/2) e^(-t/4)`` for d=0, ``2 (t/pi)^(1/2) e^(-t/4)`` for d=1."""
    if d == 0:
        return 4 / math.sqrt(math.pi * t) * math.exp(-t / 4)
    return 2 * math.sqrt(t / math.pi) * math.exp(-t / 4)


def laplace_identity_residual(d: int, t: float, rule: QuadratureRule | None = None) -> float:
    """``|t * int_0^inf Theta_d(1/z) e^{-tz} dz - t^{d/2} / h_d(sqrt t)|``."""
    import numpy as np

    rule = rule or QuadratureRule(abs_tol=1e-15, rel_tol=1e-13)

    def f(z):
        z = np.atleast_1d(z)
        out = np.empty(z.shape)
        for i, zi in enumerate(z):
            out[i] = 0.0 if zi == 0 else theta_eval(d, 1 / zi) * math.exp(-t * zi)
        return out

    val = integrate(f, 0.0, math.inf, rule, decay=Decay("exp", t), scale=min(1.0, 1 / t))
    r = math.sqrt(t)
    target = (r if d == 1 else 1.0) / (math.sinh(r) if d == 1 else math.cosh(r))
    return abs(t * val.value - target)
