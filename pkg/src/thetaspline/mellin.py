"""Mellin transforms, Mellin convolution and the two routes to g_N(s).

For a monic ``P(z) = z^d prod_k (z^2 - x_k^2)``,

    P^(d)(0) / P(it) = 1 / (i^d t^d prod_k (1 + t^2/x_k^2)),

so the contour route

    g_N(s) = 2 / Gamma(1+sigma) * (N+1)! / (N^(1+sigma) Gamma(N+1-sigma))
             * beta^(s-d) * int_0^inf t^(s-1-d) dt / ((1 + (t/u)^2) prod_k (1 + t^2/x_k^2))

(with sigma = (s-d)/2) has a real, positive integrand for real s.  The
direct route is

    g_N(s) = u^2 beta^(s-d) N^(-1-sigma) prod_k x_k^2 * int_0^maxOmega B*_N(t) t^(sigma-1) dt.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from gmpy2 import mpfr

from . import specialfn
from .bspline import _assoc_at
from .numerics import (
    Decay,
    LogValue,
    PrecisionContext,
    QuadratureRule,
    adaptive_eval_many,
    integrate,
    oscillation_breakpoints,
    to_mpfr,
    working_precision,
)
from .polyfamilies import KnotSet, PolyFamily, build_knotset

__all__ = [
    "IntegrandOverflow",
    "MellinPoint",
    "mellin_transform",
    "mellin_assoc_bspline",
    "mellin_theta_closed",
    "mellin_convolve",
    "contour_integral",
    "gn_contour",
    "gn_direct",
    "gn_prefactor",
    "rbeta_mu",
    "rbeta_probe",
]


class IntegrandOverflow(ArithmeticError):
    """The log-scaled integrand left the double range."""


@dataclass(frozen=True)
class MellinPoint:
    s: complex
    value: complex
    err_estimate: float

    def __post_init__(self) -> None:
        if self.err_estimate < 0:
            raise ValueError("err_estimate must be non-negative")
        if not cmath.isfinite(complex(self.value)):
            raise IntegrandOverflow(f"non-finite Mellin value at s={self.s}")


def _real_if_real(s, value):
    if isinstance(s, complex) and s.imag != 0:
        return complex(value)
    return float(value.real) if isinstance(value, complex) else float(value)


def mellin_transform(
    f: Callable[[np.ndarray], np.ndarray],
    sigma: complex,
    *,
    decay: Decay,
    rule: QuadratureRule | None = None,
    scale: float = 1.0,
    breakpoints: Sequence[float] = (),
) -> MellinPoint:
    """``int_0^inf f(t) t^(sigma-1) dt`` for ``f`` bounded near 0."""
    sigma = complex(sigma)
    if sigma.real <= 0:
        raise specialfn.PoleError("need Re sigma > 0")
    v = sigma.imag

    def g(t):
        t = np.asarray(t, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            p = np.where(t > 0, t ** (sigma.real - 1), 0.0)
            val = np.asarray(f(t)) * p
            if v:
                lt = np.log(np.where(t > 0, t, 1.0))
                val = val * (np.cos(v * lt) + 1j * np.sin(v * lt))
        return val

    bps = list(breakpoints)
    if abs(v) > 5:
        bps += oscillation_breakpoints(v, scale * 1e-3, scale * 1e3)
    r = integrate(g, 0.0, math.inf, rule, decay=decay, singular_power=sigma.real, breakpoints=bps, scale=scale)
    return MellinPoint(sigma, _real_if_real(sigma, r.value), r.err_estimate)


def mellin_assoc_bspline(
    knots: KnotSet,
    sigma: complex,
    rule: QuadratureRule | None = None,
    ctx: PrecisionContext | None = None,
    *,
    log_scale: LogValue | None = None,
) -> MellinPoint:
    """``int_0^maxOmega B*_N(t) t^(sigma-1) dt`` for knots with ``min = 0``.

    ``B*_N`` is constant on the first interval, which contributes
    ``c t_1^sigma / sigma`` in closed form; the remaining intervals go to the
    adaptive quadrature with spline samples computed at extended precision.
    ``log_scale`` multiplies the integrand before it is rounded to double.
    """
    sigma = complex(sigma)
    if sigma.real <= 0:
        raise specialfn.PoleError("need Re sigma > 0")
    ctx = ctx or PrecisionContext()
    rule = rule or QuadratureRule(abs_tol=1e-15, rel_tol=1e-12)
    ks128 = knots.at(128)
    if ks128[0] != 0:
        raise ValueError("knots must start at 0")
    v = sigma.imag

    def scaled(ts):
        def comp(bits):
            sc = log_scale.to_mpfr() if log_scale is not None else mpfr(1)
            return [_assoc_at(knots, t, bits) * sc for t in ts]

        vals, _ = adaptive_eval_many(comp, ctx)
        return np.array([float(x) for x in vals])

    def g(t):
        t = np.asarray(t, dtype=float)
        out = scaled(list(t)) * t ** (sigma.real - 1)
        if v:
            lt = np.log(t)
            out = out * (np.cos(v * lt) + 1j * np.sin(v * lt))
        return out

    t1 = float(ks128[1])
    c = float(scaled([t1 / 2])[0])
    first = c * cmath.exp(sigma * math.log(t1)) / sigma
    edges = [float(k) for k in ks128[1:]]
    bps = edges[1:-1]
    if abs(v) > 5:
        bps = sorted(set(bps) | set(oscillation_breakpoints(v, edges[0], edges[-1])))
    r = integrate(g, edges[0], edges[-1], rule, breakpoints=bps)
    return MellinPoint(sigma, _real_if_real(sigma, first + r.value), r.err_estimate)


def mellin_theta_closed(d: int, sigma: float) -> float:
    """``M(Theta_d, sigma) = 4 Gamma(2 sigma + d) c_d(2 sigma + d) / Gamma(1 + sigma)``.

    ``c_0`` is the Dirichlet beta function and ``c_1(x) = (1 - 2^-x) zeta(x)``.
    """
    if isinstance(sigma, complex):
        raise TypeError("closed form is implemented for real sigma only")
    if not sigma > 0:
        raise specialfn.PoleError("M(Theta_d, sigma) needs sigma > 0")
    x = 2 * sigma + d
    c = specialfn.dirichlet_beta(x) if d == 0 else -math.expm1(-x * math.log(2)) * specialfn.zeta(x)
    return 4 * math.exp(specialfn.log_gamma(x) - specialfn.log_gamma(1 + sigma)) * c


def mellin_convolve(
    F: Callable[[float], float],
    G: Callable[[float], float],
    t: float,
    rule: QuadratureRule | None = None,
    *,
    order: str = "FG",
    decay_rate: float = 1.0,
) -> float:
    """``H(t) = int_0^inf F(tau) G(t/tau) dtau/tau`` in the variable ``tau = sqrt(t) e^x``.

    ``order="GF"`` swaps the roles of ``F`` and ``G``.  ``decay_rate`` bounds the
    exponential decay of the integrand in ``|x|`` (1 is right for factors that
    vanish like ``tau`` at 0).
    """
    if not t > 0:
        raise ValueError("t must be positive")
    if order == "GF":
        F, G = G, F
    elif order != "FG":
        raise ValueError("order must be 'FG' or 'GF'")
    rule = rule or QuadratureRule(abs_tol=1e-14, rel_tol=1e-12)
    c = 0.5 * math.log(t)

    def h(x):
        x = np.atleast_1d(np.asarray(x, dtype=float))
        out = np.empty(x.shape)
        for i, xi in enumerate(x):
            a, b = math.exp(c + xi), math.exp(c - xi)
            out[i] = F(a) * G(t / a) + F(b) * G(t / b)
        return out

    return integrate(h, 0.0, math.inf, rule, decay=Decay("exp", decay_rate)).value


def _log_denominator(tz: np.ndarray, zeros: np.ndarray, u: float) -> np.ndarray:
    # log((1 + (t/u)^2) * prod_k (1 + t^2/x_k^2)) for real or complex t
    z2 = tz * tz
    if np.iscomplexobj(tz):
        acc = np.log(1 + z2 / (u * u))
        for x in zeros:
            acc = acc + np.log(1 + z2 / (x * x))
        return acc
    acc = np.log1p(z2 / (u * u))
    for x in zeros:
        acc = acc + np.log1p(z2 / (x * x))
    return acc


def contour_integral(
    zeros: Sequence[float],
    u: float,
    s: complex,
    d: int = 0,
    rule: QuadratureRule | None = None,
    *,
    rotate: bool | None = None,
    alpha: float | None = None,
) -> MellinPoint:
    """``int_0^inf t^(s-1-d) / ((1 + (t/u)^2) prod_k (1 + t^2/x_k^2)) dt``.

    The integrand is analytic in ``Re t > 0`` (its poles sit at ``+-iu`` and
    ``+-i x_k``), so for complex ``s`` the ray can be turned to
    ``arg t = sign(Im s) (pi/2 - alpha)``.  That removes almost all of the
    ``e^(-(pi/2)|Im s|)`` cancellation that plagues the real axis.
    ``rotate=False`` forces the real axis, using panel breaks at the zeros
    of ``cos(Im s * ln t)``.
    """
    zs = np.asarray(sorted(zeros), dtype=float)
    s = complex(s)
    a = s.real - d
    if not a > 0:
        raise specialfn.PoleError("need Re s > d")
    rate = 2 * len(zs) + 2 - a + 1
    if rate <= 1:
        raise ValueError("need Re s < 2N + d + 2 for convergence")
    rule = rule or QuadratureRule(abs_tol=1e-300, rel_tol=1e-12, panel_limit=20000)
    v = s.imag
    scale = float(min(zs.min() if len(zs) else u, u))
    if rotate is None:
        rotate = v != 0
    if not rotate:

        def f(t):
            t = np.asarray(t, dtype=float)
            with np.errstate(divide="ignore"):
                lt = np.log(t)
            mag = np.exp((a - 1) * lt - _log_denominator(t, zs, u))
            mag = np.where(t > 0, mag, 0.0)
            if v:
                return mag * (np.cos(v * lt) + 1j * np.sin(v * lt))
            return mag

        bps: list[float] = []
        if abs(v) > 5:
            bps = oscillation_breakpoints(v, scale * 1e-2, max(u, zs.max() if len(zs) else u) * 1e2)
        r = integrate(f, 0.0, math.inf, rule, decay=Decay("power", rate), singular_power=a, scale=scale, breakpoints=bps)
        return MellinPoint(s, _real_if_real(s, r.value), r.err_estimate)

    if alpha is None:
        alpha = min(0.3, 2.0 / abs(v)) if v else 0.3
    phi = math.copysign(math.pi / 2 - alpha, v if v else 1.0)
    e = cmath.exp(1j * phi)
    w = s - d  # t^(s-1-d) dt = R^(w-1) e^(i phi w) dR

    def g(R):
        R = np.asarray(R, dtype=float)
        with np.errstate(divide="ignore"):
            lR = np.log(R)
        logv = (w - 1) * lR - _log_denominator(R * e, zs, u)
        out = np.exp(logv)
        return np.where(R > 0, out, 0.0)

    phase = cmath.exp(1j * phi * w)
    r = integrate(g, 0.0, math.inf, rule, decay=Decay("power", rate), singular_power=a, scale=scale)
    return MellinPoint(s, complex(phase * r.value), abs(phase) * r.err_estimate)


def gn_prefactor(N: int, d: int, s: complex, beta: float) -> complex:
    """``2/Gamma(1+sigma) * (N+1)!/(N^(1+sigma) Gamma(N+1-sigma)) * beta^(s-d)``."""
    sig = (s - d) / 2
    if isinstance(s, complex) and s.imag != 0:
        from scipy.special import loggamma

        lg = loggamma(N + 2) - loggamma(1 + sig) - loggamma(N + 1 - sig)
        return 2 * cmath.exp(lg - (1 + sig) * math.log(N) + (s - d) * math.log(beta))
    sig = float(sig.real if isinstance(sig, complex) else sig)
    sign = specialfn.gamma_sign(1 + sig) * specialfn.gamma_sign(N + 1 - sig)
    lg = math.lgamma(N + 2) - specialfn.log_gamma(1 + sig) - specialfn.log_gamma(N + 1 - sig)
    return sign * 2 * math.exp(lg - (1 + sig) * math.log(N) + (float(s.real if isinstance(s, complex) else s) - d) * math.log(beta))


def gn_contour(fam: PolyFamily, u_N: float, s: complex, rule: QuadratureRule | None = None) -> MellinPoint:
    """``g_N(s)`` by the contour route, evaluated in double with log-scaled products."""
    d, N = fam.d, fam.N
    if not (d < complex(s).real < 2 * N + d + 1):
        raise ValueError("need d < Re s < 2N + d + 1")
    zs = fam.zeros_float()
    I = contour_integral(zs, float(u_N), s, d, rule)
    pre = gn_prefactor(N, d, s, fam.beta_N)
    val = pre * I.value
    return MellinPoint(s, _real_if_real(s, val), abs(pre) * I.err_estimate)


def gn_direct(
    fam: PolyFamily,
    u_N: float,
    s: complex,
    rule: QuadratureRule | None = None,
    ctx: PrecisionContext | None = None,
    knots: KnotSet | None = None,
) -> MellinPoint:
    """``g_N(s)`` by the direct route through the associated spline."""
    d, N = fam.d, fam.N
    knots = knots or build_knotset("omega_squared", fam, u=u_N)
    sig = (complex(s) - d) / 2
    with working_precision(256):
        prod = knots.interior_product(256)  # u^2 prod x_k^2
        scale = LogValue.from_mpfr(prod)
    lpre = scale.log_mag + (complex(s).real - d) * math.log(fam.beta_N) - (1 + sig.real) * math.log(N)
    phase = cmath.exp(1j * sig.imag * (2 * math.log(fam.beta_N) - math.log(N))) if sig.imag else 1.0
    r = mellin_assoc_bspline(knots, sig, rule, ctx, log_scale=LogValue(1, lpre))
    return MellinPoint(s, _real_if_real(s, phase * r.value), r.err_estimate)


def rbeta_mu(r: float, d: int) -> float:
    return 3 + max(r + d - 2, 0.0)


def rbeta_probe(
    fam: PolyFamily,
    u_N: float,
    r: float,
    v_grid: Sequence[float],
    rule: QuadratureRule | None = None,
    *,
    N_list: Sequence[int] = (10, 20, 40),
) -> list[dict]:
    """Probe ``beta_N^r |int t^(s-1) / ((1+(t/u)^2) G_2N(it)) dt|`` against ``|v|^mu e^(-pi|v|/2)``.

    ``G_2N(it) = prod (1 + t^2/x_k^2)`` for the family's positive zeros; one
    row per (v, N).  ``fam.N`` is ignored in favour of ``N_list``.
    """
    if fam.family not in ("chebyshev_T", "chebyshev_U"):
        raise ValueError("the probe is stated for the Chebyshev families")
    if not r > 1 - fam.d:
        raise ValueError("need r > 1 - d")
    mu = rbeta_mu(r, fam.d)
    rows = []
    for N in N_list:
        f = PolyFamily(fam.family, fam.d, N)
        zs = f.zeros_float()
        for v in v_grid:
            if v == 0:
                raise ValueError("the envelope degenerates at v = 0; use |v| >= 1")
            I = contour_integral(zs, float(u_N), complex(r, v), 0, rule)
            lhs = f.beta_N**r * abs(I.value)
            env = abs(v) ** mu * math.exp(-math.pi / 2 * abs(v))
            rows.append({"N": N, "v": float(v), "lhs": lhs, "envelope": env, "ratio": lhs / env, "err": I.err_estimate})
    return rows
