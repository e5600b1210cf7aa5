"""Extended-precision reals, log-magnitude values and deterministic quadrature.

Extended precision is backed by MPFR through :mod:`gmpy2`.  Working precision
is set with :func:`working_precision`, which installs a thread-local MPFR
context, so concurrent evaluations at different precisions do not interfere.
"""

from __future__ import annotations

import heapq
import math
import os
from contextlib import contextmanager
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Iterator, Sequence

import gmpy2
import numpy as np
from gmpy2 import mpfr

__all__ = [
    "PrecisionExhausted",
    "NonConvergent",
    "PrecisionContext",
    "XReal",
    "LogValue",
    "Decay",
    "QuadratureRule",
    "QuadResult",
    "working_precision",
    "to_mpfr",
    "adaptive_eval",
    "adaptive_eval_many",
    "integrate",
    "gauss_legendre",
    "oscillation_breakpoints",
]


class PrecisionExhausted(ArithmeticError):
    """Successive precisions never agreed before ``max_bits`` was reached."""


class NonConvergent(ArithmeticError):
    """Adaptive quadrature ran out of panels before meeting its tolerance."""


@contextmanager
def working_precision(bits: int) -> Iterator[None]:
    """Run the body with MPFR working precision ``bits`` (thread-local)."""
    with gmpy2.context(gmpy2.get_context(), precision=int(bits)):
        yield


def to_mpfr(x) -> mpfr:
    """Convert ints, Fractions, strings, floats or mpfr at the current precision.

    Fractions and decimal strings are rounded once, directly to the current
    precision, so exact knot data is never pre-rounded to double.
    """
    if isinstance(x, str):
        if "/" in x:
            num, den = x.split("/")
            return mpfr(int(num.strip())) / mpfr(int(den.strip()))
        return mpfr(x.strip())
    if isinstance(x, XReal):
        return mpfr(x.value)
    return mpfr(x)


@dataclass(frozen=True)
class PrecisionContext:
    start_bits: int = 128
    max_bits: int = 16384
    target_rel_tol: float = 1e-20
    escalation_factor: int = 2

    def __post_init__(self) -> None:
        if self.start_bits < 2 or self.start_bits > self.max_bits:
            raise ValueError("need 2 <= start_bits <= max_bits")
        if not self.target_rel_tol > 0:
            raise ValueError("target_rel_tol must be positive")
        if self.escalation_factor < 2:
            raise ValueError("escalation_factor must be >= 2")

    @classmethod
    def from_env(cls, **overrides) -> "PrecisionContext":
        """Defaults, with ``max_bits`` taken from ``THETASPLINE_MAX_BITS`` if set."""
        env = os.environ.get("THETASPLINE_MAX_BITS")
        if env is not None and "max_bits" not in overrides:
            overrides["max_bits"] = int(env)
        return cls(**overrides)


@dataclass(frozen=True)
class LogValue:
    """A real number stored as ``sign * exp(log_mag)``.

    ``log_mag`` is meaningless (kept at ``-inf``) when ``sign == 0``.
    """

    sign: int
    log_mag: float

    def __post_init__(self) -> None:
        if self.sign not in (-1, 0, 1):
            raise ValueError("sign must be -1, 0 or +1")

    @classmethod
    def zero(cls) -> "LogValue":
        return cls(0, -math.inf)

    @classmethod
    def from_float(cls, x: float) -> "LogValue":
        if x == 0:
            return cls.zero()
        return cls(1 if x > 0 else -1, math.log(abs(x)))

    @classmethod
    def from_mpfr(cls, x: mpfr) -> "LogValue":
        if x == 0:
            return cls.zero()
        with working_precision(max(x.precision, 64)):
            lm = float(gmpy2.log(abs(x)))
        return cls(1 if x > 0 else -1, lm)

    @classmethod
    def of(cls, x) -> "LogValue":
        if isinstance(x, LogValue):
            return x
        if isinstance(x, XReal):
            return cls.from_mpfr(x.value)
        if isinstance(x, type(mpfr(0))):
            return cls.from_mpfr(x)
        return cls.from_float(float(x))

    def __mul__(self, other) -> "LogValue":
        other = LogValue.of(other)
        if self.sign == 0 or other.sign == 0:
            return LogValue.zero()
        return LogValue(self.sign * other.sign, self.log_mag + other.log_mag)

    __rmul__ = __mul__

    def __truediv__(self, other) -> "LogValue":
        other = LogValue.of(other)
        if other.sign == 0:
            raise ZeroDivisionError("division by a zero LogValue")
        if self.sign == 0:
            return LogValue.zero()
        return LogValue(self.sign * other.sign, self.log_mag - other.log_mag)

    def __pow__(self, n: int) -> "LogValue":
        if self.sign == 0:
            if n <= 0:
                raise ZeroDivisionError("non-positive power of zero")
            return LogValue.zero()
        return LogValue(self.sign**n, n * self.log_mag)

    def __float__(self) -> float:
        if self.sign == 0:
            return 0.0
        try:
            return self.sign * math.exp(self.log_mag)
        except OverflowError:
            return self.sign * math.inf

    def to_mpfr(self) -> mpfr:
        if self.sign == 0:
            return mpfr(0)
        return self.sign * gmpy2.exp(mpfr(self.log_mag))

    def ratio_to(self, other: "LogValue") -> float:
        """``self / other`` as a double; safe when both are far outside double range."""
        return float(self / other)


@dataclass(frozen=True)
class XReal:
    """An MPFR value together with the precision it is trusted to.

    Arithmetic is carried out at the larger of the operands' precisions and
    is correctly rounded (MPFR semantics).
    """

    value: mpfr
    precision_bits: int

    @classmethod
    def of(cls, x, bits: int = 128) -> "XReal":
        if isinstance(x, XReal):
            return x
        with working_precision(bits):
            return cls(to_mpfr(x), bits)

    def _binop(self, other, op) -> "XReal":
        o = other if isinstance(other, XReal) else XReal.of(other, self.precision_bits)
        bits = max(self.precision_bits, o.precision_bits)
        with working_precision(bits):
            return XReal(op(self.value, o.value), bits)

    def __add__(self, other):
        return self._binop(other, lambda a, b: a + b)

    __radd__ = __add__

    def __sub__(self, other):
        return self._binop(other, lambda a, b: a - b)

    def __rsub__(self, other):
        return self._binop(other, lambda a, b: b - a)

    def __mul__(self, other):
        return self._binop(other, lambda a, b: a * b)

    __rmul__ = __mul__

    def __truediv__(self, other):
        return self._binop(other, lambda a, b: a / b)

    def __rtruediv__(self, other):
        return self._binop(other, lambda a, b: b / a)

    def __pow__(self, n: int) -> "XReal":
        if not isinstance(n, int):
            raise TypeError("XReal only supports integer powers")
        with working_precision(self.precision_bits):
            return XReal(self.value**n, self.precision_bits)

    def __neg__(self) -> "XReal":
        return XReal(-self.value, self.precision_bits)

    def __abs__(self) -> "XReal":
        return XReal(abs(self.value), self.precision_bits)

    def sqrt(self) -> "XReal":
        with working_precision(self.precision_bits):
            return XReal(gmpy2.sqrt(self.value), self.precision_bits)

    def _cmp_value(self, other):
        return other.value if isinstance(other, XReal) else to_mpfr(other)

    def __eq__(self, other) -> bool:
        try:
            return self.value == self._cmp_value(other)
        except (TypeError, ValueError):
            return NotImplemented

    def __hash__(self) -> int:
        return hash(self.value)

    def __lt__(self, other) -> bool:
        return self.value < self._cmp_value(other)

    def __le__(self, other) -> bool:
        return self.value <= self._cmp_value(other)

    def __gt__(self, other) -> bool:
        return self.value > self._cmp_value(other)

    def __ge__(self, other) -> bool:
        return self.value >= self._cmp_value(other)

    def __float__(self) -> float:
        return float(self.value)

    def to_log(self) -> LogValue:
        return LogValue.from_mpfr(self.value)

    def __repr__(self) -> str:
        digits = max(17, int(self.precision_bits * 0.30103))
        return f"XReal({self.value:.{digits}g}, bits={self.precision_bits})"


def _agree(a, b, tol: float) -> bool:
    if a == b:
        return True
    scale = max(abs(a), abs(b))
    return abs(a - b) <= tol * scale


def adaptive_eval(computation: Callable[[int], object], ctx: PrecisionContext | None = None) -> XReal:
    """Evaluate ``computation(bits)`` with escalating precision until it settles.

    ``computation`` is called inside :func:`working_precision` and must be
    deterministic in ``bits``.  The result computed at precision ``p`` is
    returned as soon as the evaluation at ``escalation_factor * p`` agrees with
    it to ``target_rel_tol``; ``computation(result.precision_bits)`` therefore
    reproduces the returned value bit for bit.
    """
    ctx = ctx or PrecisionContext()
    p = ctx.start_bits
    with working_precision(p):
        prev = to_mpfr(computation(p))
    while True:
        q = p * ctx.escalation_factor
        if q > ctx.max_bits:
            raise PrecisionExhausted(
                f"no agreement to {ctx.target_rel_tol:g} below {ctx.max_bits} bits"
            )
        with working_precision(q):
            cur = to_mpfr(computation(q))
            ok = _agree(prev, cur, ctx.target_rel_tol)
        if ok:
            return XReal(prev, p)
        prev, p = cur, q


def adaptive_eval_many(
    computation: Callable[[int], Sequence], ctx: PrecisionContext | None = None
) -> tuple[list, int]:
    """Vector version of :func:`adaptive_eval`; every component must settle.

    Returns the list of mpfr values and the precision they were computed at.
    """
    ctx = ctx or PrecisionContext()
    p = ctx.start_bits
    with working_precision(p):
        prev = [to_mpfr(v) for v in computation(p)]
    while True:
        q = p * ctx.escalation_factor
        if q > ctx.max_bits:
            raise PrecisionExhausted(
                f"no agreement to {ctx.target_rel_tol:g} below {ctx.max_bits} bits"
            )
        with working_precision(q):
            cur = [to_mpfr(v) for v in computation(q)]
            ok = all(_agree(a, b, ctx.target_rel_tol) for a, b in zip(prev, cur))
        if ok:
            return prev, p
        prev, p = cur, q


# ---------------------------------------------------------------------------
# Quadrature
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Decay:
    """Tail behaviour of an integrand on ``[T, inf)``.

    ``kind="exp"``: ``|f(t)|`` decays at least like ``exp(-rate * t)``.
    ``kind="power"``: ``|f(t)|`` decays at least like ``t ** -rate`` with ``rate > 1``.
    """

    kind: str = "exp"
    rate: float = 1.0

    def __post_init__(self) -> None:
        if self.kind not in ("exp", "power"):
            raise ValueError("decay kind must be 'exp' or 'power'")
        if self.kind == "power" and self.rate <= 1:
            raise ValueError("power decay needs rate > 1 for integrability")
        if self.rate <= 0:
            raise ValueError("decay rate must be positive")

    def tail_bound(self, T: float, fT: float) -> float:
        if self.kind == "exp":
            return fT / self.rate
        return fT * T / (self.rate - 1)


@dataclass(frozen=True)
class QuadratureRule:
    kind: str = "gauss_legendre_composite"
    points_per_panel: int = 20
    panel_limit: int = 4000
    abs_tol: float = 1e-14
    rel_tol: float = 1e-13

    def __post_init__(self) -> None:
        if self.kind not in ("gauss_legendre_composite", "tanh_sinh"):
            raise ValueError(f"unknown quadrature kind {self.kind!r}")
        if self.points_per_panel < 1 or self.panel_limit < 1:
            raise ValueError("points_per_panel and panel_limit must be positive")


@dataclass(frozen=True)
class QuadResult:
    value: complex | float
    err_estimate: float
    panels: int = 0

    def __iter__(self):
        yield self.value
        yield self.err_estimate


@lru_cache(maxsize=64)
def _gl_nodes(n: int) -> tuple[np.ndarray, np.ndarray]:
    x, w = np.polynomial.legendre.leggauss(n)
    return x, w


def gauss_legendre(f: Callable[[np.ndarray], np.ndarray], a: float, b: float, n: int):
    """Fixed ``n``-point Gauss-Legendre rule on ``[a, b]`` (vectorised ``f``)."""
    x, w = _gl_nodes(n)
    half = 0.5 * (b - a)
    vals = np.asarray(f(half * x + 0.5 * (a + b)))
    return half * np.dot(w, vals)


@lru_cache(maxsize=16)
def _ts_nodes(level: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    # Tanh-sinh nodes with step 2**-level.  ``gap`` is the distance of each
    # node from the nearer end of [-1, 1], computed without cancellation.
    h = 2.0**-level
    t = np.arange(-int(6.5 / h), int(6.5 / h) + 1) * h
    u = 0.5 * math.pi * np.sinh(t)
    au = np.abs(u)
    with np.errstate(over="ignore"):
        gap = np.exp(-au) / np.cosh(au)
        w = 0.5 * math.pi * np.cosh(t) / np.cosh(u) ** 2 * h
    keep = (gap > 0) & (w > 1e-300)
    return t[keep], w[keep], gap[keep]


def _tanh_sinh(f, a: float, b: float, tol: float, max_level: int = 8):
    half = 0.5 * (b - a)
    prev = None
    val = 0.0
    for level in range(2, max_level + 1):
        t, w, gap = _ts_nodes(level)
        pts = np.where(t < 0, a + half * gap, b - half * gap)
        val = half * np.dot(w, np.asarray(f(pts)))
        if prev is not None and abs(val - prev) <= max(tol, 1e-15 * abs(val)):
            return val, abs(val - prev)
        prev = val
    return val, abs(val - prev)


def _panel_estimate(f, a, b, n, kind, tol):
    if kind == "tanh_sinh":
        return _tanh_sinh(f, a, b, tol)
    whole = gauss_legendre(f, a, b, n)
    m = 0.5 * (a + b)
    halves = gauss_legendre(f, a, m, n) + gauss_legendre(f, m, b, n)
    return halves, abs(halves - whole)


def oscillation_breakpoints(v: float, lo: float, hi: float) -> list[float]:
    """Zeros of ``cos(v * ln t)`` inside ``(lo, hi)``, ``lo > 0``."""
    if v == 0 or not (0 < lo < hi):
        return []
    v = abs(v)
    j0 = math.ceil((v * math.log(lo) - 0.5 * math.pi) / math.pi)
    j1 = math.floor((v * math.log(hi) - 0.5 * math.pi) / math.pi)
    return [math.exp((0.5 * math.pi + j * math.pi) / v) for j in range(j0, j1 + 1)]


def integrate(
    f: Callable[[np.ndarray], np.ndarray],
    a: float,
    b: float,
    rule: QuadratureRule | None = None,
    *,
    decay: Decay | None = None,
    singular_power: float | None = None,
    breakpoints: Sequence[float] = (),
    scale: float | None = None,
) -> QuadResult:
    """Integrate a vectorised, possibly complex-valued ``f`` over ``[a, b]``.

    Parameters
    ----------
    f : callable
        Accepts a float ndarray and returns an ndarray of the same shape.
    a, b : float
        Limits; ``b`` may be ``inf`` when ``decay`` is given.
    decay : Decay, optional
        Required for ``b = inf``.  The range is truncated at the first
        ``T`` where the decay bound puts the tail below a tenth of the
        tolerance (checked at two consecutive ``T``).
    singular_power : float, optional
        ``sigma`` such that ``f(t) ~ (t - a) ** (sigma - 1)`` at the left
        endpoint.  For ``sigma < 1`` the first panel is integrated after the
        substitution ``t = a + h * tau ** (1 / sigma)``.
    breakpoints : sequence of float
        Interior points where ``f`` is not smooth; panels never straddle them.
    scale : float, optional
        Width of the first panel of an infinite range (default ``1``).

    Returns
    -------
    QuadResult
        ``(value, err_estimate)``; unpacks as a pair.
    """
    rule = rule or QuadratureRule()
    if a == b:
        return QuadResult(0.0, 0.0)
    if b < a:
        r = integrate(f, b, a, rule, decay=decay, singular_power=singular_power, breakpoints=breakpoints, scale=scale)
        return QuadResult(-r.value, r.err_estimate, r.panels)

    n = rule.points_per_panel
    cuts = sorted({float(p) for p in breakpoints if a < p < b})
    tail_err = 0.0
    if math.isinf(b):
        if decay is None:
            raise ValueError("an infinite upper limit needs a decay hint")
        h = float(scale) if scale else 1.0
        edges = [a] + cuts
        origin = edges[-1]
        T = origin + h
        running = 0.0
        hits = 0
        while True:
            lo = edges[-1]
            edges.append(T)
            running += abs(gauss_legendre(f, lo, T, n))
            probe = np.asarray(f(np.array([T, T + 0.25 * (T - lo)])))
            fT = float(np.max(np.abs(probe)))
            if not math.isfinite(fT):
                raise NonConvergent(f"integrand not finite at t={T:g}")
            bound = decay.tail_bound(T, fT)
            if bound <= max(rule.abs_tol, rule.rel_tol * running) / 10:
                hits += 1
                if hits == 2:
                    tail_err = bound
                    break
            else:
                hits = 0
            if len(edges) > rule.panel_limit:
                raise NonConvergent("could not truncate the infinite range within panel_limit")
            T = origin + 2.0 * (T - origin)
    else:
        edges = [a] + cuts + [b]

    # first-panel singularity removal
    first = None
    if singular_power is not None and singular_power < 1:
        sig = float(singular_power)
        a0, h0 = edges[0], edges[1] - edges[0]

        def g(tau, a0=a0, h0=h0, sig=sig):
            tau = np.asarray(tau)
            p = 1.0 / sig
            return np.asarray(f(a0 + h0 * tau**p)) * (h0 * p) * tau ** (p - 1)

        first = g

    # global adaptive refinement over panels, worst error first
    heap: list = []
    total = 0.0
    err_total = 0.0
    counter = 0
    panels = []
    for i in range(len(edges) - 1):
        lo, hi = edges[i], edges[i + 1]
        fn = f
        if i == 0 and first is not None:
            fn, lo, hi = first, 0.0, 1.0
        panels.append((fn, lo, hi))
    tol0 = rule.abs_tol / max(len(panels), 1)
    for fn, lo, hi in panels:
        val, err = _panel_estimate(fn, lo, hi, n, rule.kind, tol0)
        total += val
        err_total += err
        heapq.heappush(heap, (-err, counter, fn, lo, hi, val))
        counter += 1

    npanels = len(heap)
    while err_total > max(rule.abs_tol, rule.rel_tol * abs(total)):
        if npanels >= rule.panel_limit:
            raise NonConvergent(
                f"quadrature error {err_total:.3g} above tolerance after {npanels} panels"
            )
        negerr, _, fn, lo, hi, val = heapq.heappop(heap)
        total -= val
        err_total += negerr
        mid = 0.5 * (lo + hi)
        if not (lo < mid < hi):
            raise NonConvergent("panel width underflow in adaptive quadrature")
        for l2, h2 in ((lo, mid), (mid, hi)):
            v2, e2 = _panel_estimate(fn, l2, h2, n, rule.kind, tol0)
            total += v2
            err_total += e2
            heapq.heappush(heap, (-e2, counter, fn, l2, h2, v2))
            counter += 1
        npanels += 1
    if isinstance(total, complex) or np.iscomplexobj(total):
        value = complex(total)
    else:
        value = float(total)
    return QuadResult(value, float(err_total + tail_err), npanels)
