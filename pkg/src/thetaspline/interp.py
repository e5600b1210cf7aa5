"""Lagrange interpolation at extended precision and the exact interpolation identities.

Two identities tie interpolation errors to integrals:

* power/log functions interpolated on ``Omega \\ {u}`` (knots with min 0) differ
  from the function at ``u`` by a constant times ``w(u)`` times a Mellin
  moment of the associated B-spline;
* ``|y|^s`` interpolated on ``{0, +-z_k}`` differs from ``|y|^s`` by a contour
  integral over ``1 / G(it)``.

Both are exact for every N and so serve as end-to-end oracles.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Sequence

import gmpy2
from gmpy2 import mpfr

from . import specialfn
from .mellin import contour_integral, mellin_assoc_bspline
from .numerics import PrecisionContext, QuadratureRule, XReal, adaptive_eval, to_mpfr, working_precision
from .polyfamilies import KnotSet, PolyFamily, build_knotset

__all__ = [
    "DuplicateNode",
    "InterpProblem",
    "lagrange_eval",
    "power_function",
    "log_power_function",
    "abs_power_function",
    "M_power",
    "M_log",
    "identity_cor39",
    "identity_prop26",
    "limit_cor24",
    "limit_cor24_target",
]


class DuplicateNode(ValueError):
    """Interpolation nodes coincide at working precision."""


@dataclass(frozen=True)
class InterpProblem:
    """Interpolate ``f`` (mpfr -> mpfr) on ``nodes`` and evaluate at ``eval_point``.

    Nodes are kept in whatever exact form they were given (int, Fraction,
    decimal string, XReal, or a callable ``bits -> list of mpfr``) so that they
    can be materialised at any precision.
    """

    nodes: Sequence | Callable[[int], Sequence]
    f: Callable[[mpfr], mpfr]
    eval_point: object

    def nodes_at(self, bits: int) -> list:
        src = self.nodes(bits) if callable(self.nodes) else self.nodes
        return [to_mpfr(v) for v in src]


def _barycentric(xs: list, fs: list, x: mpfr) -> mpfr:
    n = len(xs)
    for i in range(n):
        for j in range(i + 1, n):
            if xs[i] == xs[j]:
                raise DuplicateNode(f"nodes {i} and {j} coincide near {float(xs[i])!r}")
    for xj, fj in zip(xs, fs):
        if x == xj:
            return +fj
    num = mpfr(0)
    den = mpfr(0)
    for j, xj in enumerate(xs):
        w = mpfr(1)
        for k, xk in enumerate(xs):
            if k != j:
                w *= xj - xk
        c = 1 / (w * (x - xj))
        num += c * fs[j]
        den += c
    return num / den


def lagrange_eval(p: InterpProblem, ctx: PrecisionContext | None = None) -> XReal:
    """Barycentric (second form) evaluation of the interpolant, adaptive precision."""

    def comp(bits):
        xs = p.nodes_at(bits)
        return _barycentric(xs, [p.f(x) for x in xs], to_mpfr(p.eval_point))

    return adaptive_eval(comp, ctx or PrecisionContext())


def power_function(sigma: float | Fraction) -> Callable[[mpfr], mpfr]:
    """``u -> u^sigma`` on ``u >= 0``."""

    def f(x):
        if x == 0:
            return mpfr(0)
        return x ** to_mpfr(sigma)

    return f


def log_power_function(m: int, half: bool = True) -> Callable[[mpfr], mpfr]:
    """``u -> (1/2) u^m log u`` (or without the 1/2), 0 at ``u = 0``."""

    def f(x):
        if x == 0:
            return mpfr(0)
        v = x**m * gmpy2.log(x)
        return v / 2 if half else v

    return f


def abs_power_function(s: float) -> Callable[[mpfr], mpfr]:
    def f(x):
        if x == 0:
            return mpfr(0)
        return abs(x) ** to_mpfr(s)

    return f


def M_power(N: int, s: float, d: int) -> float:
    """``(-1)^(N+1) Gamma(N+1-(s-d)/2) / (Gamma((d-s)/2) (N+1)!)`` for real ``s``."""
    sig = (s - d) / 2
    if sig > 0 and sig == int(sig):
        raise ValueError("s - d must not be 2, 4, ...")
    a, b = N + 1 - sig, -sig
    sign = (-1) ** (N + 1) * specialfn.gamma_sign(a) * specialfn.gamma_sign(b)
    return sign * math.exp(specialfn.log_gamma(a) - specialfn.log_gamma(b) - math.lgamma(N + 2))


def M_log(N: int, m: int) -> float:
    """``(1/2)(-1)^(m+N) m! (N-m)! / (N+1)!``."""
    if not 1 <= m < N + 1:
        raise ValueError("need 1 <= m < N + 1")
    return 0.5 * (-1) ** (m + N) * math.exp(math.lgamma(m + 1) + math.lgamma(N - m + 1) - math.lgamma(N + 2))


def _match_knot(knots: KnotSet, u) -> int:
    ks = knots.floats()
    uf = float(to_mpfr(u)) if not isinstance(u, float) else u
    j = min(range(len(ks)), key=lambda i: abs(ks[i] - uf))
    if abs(ks[j] - uf) > 1e-12 * max(1.0, abs(uf)):
        raise ValueError(f"u = {uf!r} is not a knot")
    return j


def identity_cor39(
    knots: KnotSet,
    u,
    *,
    s: float | None = None,
    m: int | None = None,
    d: int = 0,
    ctx: PrecisionContext | None = None,
    rule: QuadratureRule | None = None,
) -> tuple[float, float, float]:
    """Both sides of the associated-spline interpolation identity.

    Power case (``s`` given):
        u^sigma - L(u) = M_{N,s,d} w(u) int_0^max B*_N t^(sigma-1) dt, sigma = (s-d)/2.
    Log case (``m`` given), with f(u) = (1/2) u^m log u:
        f(u) - L(u) = M~_{N,m} w(u) int_0^max B*_N t^(m-1) dt.
    Interpolation is on ``Omega \\ {u}``; ``w(u) = prod_{v != u} (u - v)``.
    ``u`` may be given as any knot value (matched to 1e-12) or as the string
    ``"#j"`` for the j-th knot in sorted order.
    """
    if (s is None) == (m is None):
        raise ValueError("give exactly one of s (power case) or m (log case)")
    if isinstance(s, complex):
        raise TypeError("identity_cor39 is implemented for real s")
    ctx = ctx or PrecisionContext()
    N = knots.N
    if knots.at(128)[0] != 0:
        raise ValueError("identity needs min Omega = 0")
    j = int(u[1:]) if isinstance(u, str) and u.startswith("#") else _match_knot(knots, u)
    if not -(N + 2) <= j < N + 2:
        raise ValueError(f"knot index {j} out of range")
    j %= N + 2
    if j == 0:
        raise ValueError("u must be a positive knot")
    if s is not None:
        sig = (s - d) / 2
        if not sig > 0:
            raise ValueError("need Re s > d")
        if sig == int(sig):
            raise ValueError("s - d in {2, 4, ...}: use the log case")
        f = power_function(sig)
        const = M_power(N, s, d)
        moment_sigma = sig
    else:
        f = log_power_function(m)
        const = M_log(N, m)
        moment_sigma = m

    def lhs_at(bits):
        ks = knots.at(bits)
        uu = ks[j]
        nodes = [v for i, v in enumerate(ks) if i != j]
        return f(uu) - _barycentric(nodes, [f(x) for x in nodes], uu)

    def w_at(bits):
        ks = knots.at(bits)
        p = mpfr(1)
        for i, v in enumerate(ks):
            if i != j:
                p *= ks[j] - v
        return p

    lhs = float(adaptive_eval(lhs_at, ctx))
    w = float(adaptive_eval(w_at, ctx))
    moment = mellin_assoc_bspline(knots, moment_sigma, rule, ctx).value
    rhs = const * w * float(moment)
    gap = abs(lhs - rhs) / max(abs(lhs), 1e-300)
    return lhs, rhs, gap


def identity_prop26(
    G_zeros: Sequence,
    y_N: float,
    s: float,
    ctx: PrecisionContext | None = None,
    rule: QuadratureRule | None = None,
) -> tuple[float, float, float]:
    """Both sides of the even-interpolation identity for ``|y|^s``.

    lhs = |y|^s - L_{2N}(y) with nodes {0, +-z_k};
    rhs = (2 sin(s pi/2)/pi) G(y) int_0^inf t^(s-1) / ((1+(t/y)^2) G(it)) dt.
    Only the ratio ``G(y)/G(it) = prod (1 - y^2/z^2) / prod (1 + t^2/z^2)``
    enters, so the normalisation of ``G`` is irrelevant.
    """
    N = len(G_zeros)
    if not 0 < s < 2 * N + 1:
        raise ValueError("need 0 < s < 2N + 1")
    if s % 2 == 0:
        raise ValueError("s must not be an even integer")
    ctx = ctx or PrecisionContext()
    zs = [v if isinstance(v, (int, Fraction, str)) else float(v) for v in G_zeros]
    f = abs_power_function(s)

    def lhs_at(bits):
        z = [to_mpfr(v) for v in zs]
        nodes = [mpfr(0)] + z + [-v for v in z]
        y = to_mpfr(y_N)
        return f(y) - _barycentric(nodes, [f(x) for x in nodes], y)

    lhs = float(adaptive_eval(lhs_at, ctx))
    y = abs(float(y_N))
    ratio = 1.0
    for v in zs:
        zf = float(to_mpfr(v))
        ratio *= 1 - y * y / (zf * zf)
    I = contour_integral([float(to_mpfr(v)) for v in zs], y, s, 0, rule)
    rhs = 2 * math.sin(s * math.pi / 2) / math.pi * ratio * float(I.value)
    gap = abs(lhs - rhs) / max(abs(lhs), 1e-300)
    return lhs, rhs, gap


def limit_cor24_target(d: int, *, s: float | None = None, m: int | None = None) -> float:
    """``(2 sin((s-d)pi/2)/pi) int t^(s-1)/h_d`` or ``2 (-1)^m int t^(2m+d-1)/h_d``.

    The log case is stated for ``f(v) = v^m log v``, which is twice
    ``|y|^(2m) log|y|`` after ``v = y^2``; hence the factor 2.
    """
    if s is not None:
        return 2 * math.sin((s - d) * math.pi / 2) / math.pi * specialfn.hd_mellin(d, s)
    return 2 * (-1) ** m * specialfn.hd_mellin(d, 2 * m + d)


def limit_cor24(
    family: str,
    d: int,
    N_list: Sequence[int],
    *,
    s: float | None = None,
    m: int | None = None,
    lam: float = 0,
    u_rule: Callable[[int], float] = lambda N: 1.0,
    ctx: PrecisionContext | None = None,
):
    """Scaled interpolation differences against their N -> inf limits.

    Power case: beta^(s-d) Q(0)/Q(u^2) (u^(s-d) - L(u^2)) for f(v) = v^((s-d)/2).
    Log case:   beta^(2m) Q(0)/Q(u^2) (u^(2m) log u^2 - L(u^2)) for f(v) = v^m log v.
    Interpolation nodes are ``{0, x_k^2}``; ``Q(v) = prod (v - x_k^2)``.
    """
    from .experiments import ConvergenceRecord, make_record

    if (s is None) == (m is None):
        raise ValueError("give exactly one of s or m")
    ctx = ctx or PrecisionContext()
    limit = limit_cor24_target(d, s=s, m=m)
    f = power_function((s - d) / 2) if s is not None else log_power_function(m, half=False)
    point = float(s) if s is not None else float(m)
    exp_id = f"cor24_{'power' if s is not None else 'log'}_{family}_d{d}"
    out: list[ConvergenceRecord] = []
    for N in N_list:
        fam = PolyFamily(family, d, N, lam=lam)
        u = u_rule(N)

        def comp(bits, fam=fam, u=u):
            xs = fam.zeros(bits + 8)
            nodes = [mpfr(0)] + [x * x for x in xs]
            u2 = to_mpfr(u) ** 2
            diff = f(u2) - _barycentric(nodes, [f(x) for x in nodes], u2)
            q0 = mpfr(1)
            qu = mpfr(1)
            for x2 in nodes[1:]:
                q0 *= -x2
                qu *= u2 - x2
            expo = (s - d) if s is not None else 2 * m
            return to_mpfr(fam.beta_N) ** to_mpfr(expo) * q0 / qu * diff

        val = adaptive_eval(comp, ctx)
        out.append(make_record(exp_id, N, point, val.to_log(), limit, val.precision_bits))
    return out
