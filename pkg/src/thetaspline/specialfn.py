"""Real-argument special functions: gamma, incomplete gamma, zeta, Dirichlet beta,
and the hyperbolic kernels cosh/sinh."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "PoleError",
    "HyperbolicKernel",
    "gamma",
    "log_gamma",
    "gamma_sign",
    "upper_inc_gamma",
    "zeta",
    "dirichlet_beta",
    "hd_eval",
    "inv_hd",
    "hd_mellin",
]


class PoleError(ValueError):
    """Argument sits on a pole of the function."""


def _check_pole(x: float) -> None:
    if x <= 0 and x == math.floor(x):
        raise PoleError(f"gamma has a pole at {x}")


def gamma(x: float) -> float:
    """Gamma function for real ``x`` (negative non-integers via reflection)."""
    _check_pole(x)
    if x > 171.6:
        raise OverflowError("gamma overflows double; use log_gamma")
    return math.gamma(x)


def log_gamma(x: float) -> float:
    """``ln|Gamma(x)|``; pair with :func:`gamma_sign` for negative ``x``."""
    _check_pole(x)
    return math.lgamma(x)


def gamma_sign(x: float) -> int:
    _check_pole(x)
    if x > 0:
        return 1
    return -1 if math.floor(x) % 2 else 1


def upper_inc_gamma(s: float, tau: float) -> float:
    """``Gamma(1/2, tau) = sqrt(pi) * erfc(sqrt(tau))``; only ``s = 1/2`` is supported."""
    if s != 0.5:
        raise ValueError("upper_inc_gamma is implemented for s = 1/2 only")
    if tau < 0:
        raise ValueError("tau must be non-negative")
    return math.sqrt(math.pi) * math.erfc(math.sqrt(tau))


_CVZ_TERMS = 40


def _alternating_sum(term) -> float:
    # Cohen-Villegas-Zagier acceleration of sum_k (-1)^k term(k) for
    # completely monotone terms; error ~ 5.83**-n relative to term(0).
    n = _CVZ_TERMS
    d = (3 + math.sqrt(8)) ** n
    d = (d + 1 / d) / 2
    b, c, s = -1.0, -d, 0.0
    for k in range(n):
        c = b - c
        s += c * term(k)
        b = (k + n) * (k - n) * b / ((k + 0.5) * (k + 1))
    return s / d


def zeta(s: float) -> float:
    """Riemann zeta for real ``s > 1`` via the alternating eta series."""
    if not s > 1:
        raise ValueError("zeta is implemented for s > 1")
    eta = _alternating_sum(lambda k: (k + 1.0) ** -s)
    return eta / -math.expm1((1 - s) * math.log(2))


def dirichlet_beta(s: float) -> float:
    """Dirichlet beta ``sum (-1)^k (2k+1)^-s`` for real ``s > 0``."""
    if not s > 0:
        raise ValueError("dirichlet_beta is implemented for s > 0")
    return _alternating_sum(lambda k: (2.0 * k + 1.0) ** -s)


def hd_eval(d: int, z):
    """``cosh z`` for ``d = 0`` and ``sinh z`` for ``d = 1``."""
    if d == 0:
        return np.cosh(z)
    if d == 1:
        return np.sinh(z)
    raise ValueError("d must be 0 or 1")


def inv_hd(d: int, t):
    """``1 / h_d(t)`` without overflow for large ``|t|``."""
    t = np.asarray(t, dtype=float)
    e = np.exp(-np.abs(t))
    if d == 0:
        return 2 * e / (1 + e * e)
    if d == 1:
        with np.errstate(divide="ignore"):
            return np.sign(t) * 2 * e / -np.expm1(-2 * np.abs(t))
    raise ValueError("d must be 0 or 1")


def hd_mellin(d: int, s: float) -> float:
    """Closed form of ``int_0^inf t^(s-1) / h_d(t) dt`` for real ``s > d``."""
    if not s > d:
        raise ValueError("need s > d")
    if d == 0:
        return 2 * gamma(s) * dirichlet_beta(s)
    return 2 * gamma(s) * -math.expm1(-s * math.log(2)) * zeta(s)


@dataclass(frozen=True)
class HyperbolicKernel:
    d: int

    def __post_init__(self) -> None:
        if self.d not in (0, 1):
            raise ValueError("d must be 0 or 1")

    def __call__(self, z):
        return hd_eval(self.d, z)

    def reciprocal(self, t):
        return inv_hd(self.d, t)

    def mellin(self, s: float) -> float:
        return hd_mellin(self.d, s)
