"""Classical even/odd polynomial families, their zeros, and the knot sets built from them.

A family member is the monic polynomial ``P(z) = z^d * prod_k (z^2 - x_k^2)`` of
degree ``2N + d``.  Only the positive zeros ``x_1 < ... < x_N`` (ascending) are
stored; every downstream formula uses zeros or ratios in which the
normalisation of the classical polynomial cancels.
"""

from __future__ import annotations

import cmath
import math
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Sequence

import gmpy2
import numpy as np
from gmpy2 import mpfr

from .numerics import LogValue, PrecisionContext, XReal, to_mpfr, working_precision

__all__ = [
    "FAMILIES",
    "KNOT_KINDS",
    "DuplicateKnot",
    "ZeroFindingFailure",
    "PolyFamily",
    "KnotSet",
    "cheb_eval",
    "family_zeros",
    "build_knotset",
    "custom_knots",
    "def11_probe",
    "monic_ratio",
]

FAMILIES = ("chebyshev_T", "chebyshev_U", "gegenbauer", "hermite", "equidistant")
KNOT_KINDS = ("omega_squared", "omega_star", "cardinal", "reciprocal", "custom")


class DuplicateKnot(ValueError):
    """Two knots coincide at working precision."""


class ZeroFindingFailure(ArithmeticError):
    """A computed zero could not be certified by a sign change."""


@dataclass(frozen=True)
class PolyFamily:
    """One member ``P_{2N+d}`` of a polynomial sequence.

    ``lam`` is the Gegenbauer parameter; it is implied (0 or 1) for the
    Chebyshev families and ignored for Hermite and equidistant zeros.
    ``gamma_N`` and ``delta_N`` default to admissible choices for the family
    (see :meth:`probe_radius` and :meth:`probe_delta`).
    """

    family: str
    d: int
    N: int
    lam: Fraction | float = 0
    gamma_N: float | None = None
    delta_N: float | None = None

    def __post_init__(self) -> None:
        if self.family not in FAMILIES:
            raise ValueError(f"unknown family {self.family!r}; expected one of {FAMILIES}")
        if self.d not in (0, 1):
            raise ValueError("d must be 0 or 1")
        if self.N < 1:
            raise ValueError("N must be >= 1")
        if self.family == "chebyshev_T":
            object.__setattr__(self, "lam", 0)
        elif self.family == "chebyshev_U":
            object.__setattr__(self, "lam", 1)
        elif self.family == "gegenbauer" and self.lam < 0:
            raise ValueError("Gegenbauer parameter must be >= 0")

    @property
    def degree(self) -> int:
        return 2 * self.N + self.d

    @property
    def is_chebyshev(self) -> bool:
        return self.family in ("chebyshev_T", "chebyshev_U") or (
            self.family == "gegenbauer" and self.lam in (0, 1)
        )

    @property
    def beta_N(self) -> float:
        m = self.degree
        if self.family in ("chebyshev_T", "chebyshev_U", "gegenbauer"):
            return m + float(self.lam)
        if self.family == "equidistant":
            return (m - 1) * math.pi / 2
        return math.sqrt(2 * m + 1)

    def probe_radius(self) -> float:
        if self.gamma_N is not None:
            return self.gamma_N
        if self.family in ("chebyshev_T", "chebyshev_U", "gegenbauer"):
            return max(math.log(self.N + 1), self.N**0.5)
        return max(math.log(self.N + 1), self.N ** (1 / 3))

    def probe_delta(self) -> float:
        if self.delta_N is not None:
            return self.delta_N
        g = self.probe_radius()
        if self.family in ("chebyshev_T", "chebyshev_U", "gegenbauer"):
            return g**3 / self.N**2
        return g**2 / self.N

    def zeros(self, bits: int = 128) -> tuple:
        """Positive zeros (ascending) as mpfr at ``bits`` of precision."""
        return family_zeros(self, bits)

    def zeros_float(self) -> np.ndarray:
        return np.array([float(x) for x in family_zeros(self, 64)])


# ---------------------------------------------------------------------------
# Chebyshev closed forms
# ---------------------------------------------------------------------------


def _cos_rational_pi(num: int, den: int) -> mpfr:
    """cos(num*pi/den) at the current precision, using the complementary sine
    near pi/2 so small values keep full relative accuracy."""
    r = Fraction(num, den) % 2
    if r > 1:
        r = 2 - r
    sign = 1
    if r > Fraction(1, 2):
        r, sign = 1 - r, -1
    pi = gmpy2.const_pi()
    if r > Fraction(1, 4):
        c = (Fraction(1, 2) - r)
        val = gmpy2.sin(pi * c.numerator / c.denominator)
    else:
        val = gmpy2.cos(pi * r.numerator / r.denominator)
    return sign * val


def cheb_eval(kind: str, m: int, z, *, imaginary: bool = False, log: bool = False, bits: int = 128):
    """Chebyshev ``T_m`` or ``U_m`` by the closed forms in ``z +- sqrt(z^2 - 1)``.

    With ``imaginary=True`` the argument is ``i*z`` for real ``z`` and the
    returned (real) quantity is ``i**(-m) * Q_m(i z)``.  ``log=True`` returns a
    :class:`LogValue`, which is what callers need once ``m`` is in the hundreds.
    """
    if kind not in ("T", "U"):
        raise ValueError("kind must be 'T' or 'U'")
    if m < 0:
        raise ValueError("degree must be non-negative")
    with working_precision(bits + 16):
        x = to_mpfr(z)
        if imaginary:
            a = gmpy2.asinh(abs(x))
            sgn = -1 if (x < 0 and m % 2) else 1
            if kind == "T":
                val = gmpy2.cosh(m * a) if m % 2 == 0 else gmpy2.sinh(m * a)
            else:
                val = (gmpy2.cosh((m + 1) * a) if m % 2 == 0 else gmpy2.sinh((m + 1) * a)) / gmpy2.cosh(a)
            val = sgn * val
        elif abs(x) <= 1:
            th = gmpy2.acos(x)
            if kind == "T":
                val = gmpy2.cos(m * th)
            elif abs(x) == 1:
                val = mpfr(m + 1) * (1 if x > 0 or m % 2 == 0 else -1)
            else:
                val = gmpy2.sin((m + 1) * th) / gmpy2.sin(th)
        else:
            a = gmpy2.acosh(abs(x))
            sgn = -1 if (x < 0 and m % 2) else 1
            if kind == "T":
                val = sgn * gmpy2.cosh(m * a)
            else:
                val = sgn * gmpy2.sinh((m + 1) * a) / gmpy2.sinh(a)
        if log:
            return LogValue.from_mpfr(val)
    with working_precision(bits):
        return XReal(+val, bits)


def cheb_derivative_at_zero(kind: str, N: int, d: int) -> int:
    """``Q_{2N+d}^{(d)}(0)`` for ``Q = T`` or ``U`` (exact integer)."""
    base = (-1) ** N
    if d == 0:
        return base
    return base * (2 * N + 1 if kind == "T" else 2 * N + 2)


# ---------------------------------------------------------------------------
# Zeros
# ---------------------------------------------------------------------------


def _recurrence(fam: PolyFamily, x: mpfr) -> tuple[mpfr, mpfr]:
    # Monic three-term recurrence p_{n+1} = x p_n - c_n p_{n-1}, with derivative.
    m = fam.degree
    p0, p1 = mpfr(1), x
    d0, d1 = mpfr(0), mpfr(1)
    if fam.family == "hermite":
        for n in range(1, m):
            c = mpfr(n) / 2
            p0, p1 = p1, x * p1 - c * p0
            d0, d1 = d1, p0 + x * d1 - c * d0
    else:
        lam = to_mpfr(fam.lam)
        for n in range(1, m):
            c = (n * (n + 2 * lam - 1)) / (4 * (n + lam) * (n + lam - 1))
            p0, p1 = p1, x * p1 - c * p0
            d0, d1 = d1, p0 + x * d1 - c * d0
    return p1, d1


def _double_guesses(fam: PolyFamily) -> np.ndarray:
    from scipy import special

    m = fam.degree
    if fam.family == "hermite":
        r, _ = special.roots_hermite(m)
    else:
        r, _ = special.roots_gegenbauer(m, float(fam.lam))
    r = np.sort(r[r > 1e-12 * max(1.0, abs(r).max())])
    if len(r) != fam.N:
        raise ZeroFindingFailure(f"expected {fam.N} positive zeros, found {len(r)} initial guesses")
    return r


@lru_cache(maxsize=256)
def _newton_zeros(fam: PolyFamily, bits: int) -> tuple:
    if bits <= 64:
        guesses = [mpfr(float(g)) for g in _double_guesses(fam)]
        ladder = [64]
    else:
        guesses = list(_newton_zeros(fam, bits // 2))
        ladder = [bits]
    out = []
    for g in guesses:
        x = g
        for p in ladder:
            with working_precision(p + 32):
                x = mpfr(x)
                for _ in range(60):
                    val, der = _recurrence(fam, x)
                    step = val / der
                    x -= step
                    if abs(step) <= abs(x) * mpfr(2) ** (-(p + 8)):
                        break
                else:
                    raise ZeroFindingFailure(f"Newton did not settle near {float(g)}")
        out.append(x)
    with working_precision(bits + 32):
        for x in out:
            delta = abs(x) * mpfr(2) ** (-(bits // 2))
            lo, _ = _recurrence(fam, x - delta)
            hi, _ = _recurrence(fam, x + delta)
            if not (lo < 0 < hi or hi < 0 < lo):
                raise ZeroFindingFailure(f"no sign change around zero {float(x)}")
        for a, b in zip(out, out[1:]):
            if not a + abs(a) * mpfr(2) ** (-(bits // 2)) < b:
                raise ZeroFindingFailure("zeros not separated")
    with working_precision(bits):
        return tuple(+x for x in out)


@lru_cache(maxsize=256)
def family_zeros(fam: PolyFamily, bits: int = 128) -> tuple:
    """Positive zeros ``x_1 < ... < x_N`` of ``P_{2N+d}`` at ``bits`` precision.

    Chebyshev and equidistant zeros come from closed forms.  Gegenbauer and
    Hermite zeros start from double-precision Golub-Welsch estimates, are
    polished by Newton's method on the monic recurrence with doubling
    precision, and are each certified by a sign change of the recurrence
    value across ``x * (1 +- 2**(-bits/2))``.
    """
    N, m = fam.N, fam.degree
    with working_precision(bits + 16):
        if fam.family == "chebyshev_T" or (fam.family == "gegenbauer" and fam.lam == 0):
            zs = [_cos_rational_pi(2 * k - 1, 2 * m) for k in range(1, N + 1)]
        elif fam.family == "chebyshev_U" or (fam.family == "gegenbauer" and fam.lam == 1):
            zs = [_cos_rational_pi(k, m + 1) for k in range(1, N + 1)]
        elif fam.family == "equidistant":
            zs = [mpfr(2 * k + fam.d - 1) / (m - 1) for k in range(1, N + 1)]
        else:
            zs = list(_newton_zeros(fam, max(bits, 64)))
    with working_precision(bits):
        return tuple(sorted(+z for z in zs))


def monic_ratio(zeros: Sequence[float], z):
    """``z^{-d}P(z)/P^{(d)}(0) = prod_k (1 - z^2/x_k^2)`` for complex ``z`` (double)."""
    zs = np.asarray(zeros, dtype=float)
    z = complex(z)
    return complex(np.prod(1 - (z * z) / (zs * zs)))


# ---------------------------------------------------------------------------
# Knot sets
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class KnotSet:
    """``N + 2`` distinct knots, materialised lazily at any working precision.

    ``source(bits)`` returns the knots (any order) as mpfr while running under
    ``working_precision(bits)``; results are sorted, checked for
    distinctness and cached per precision.
    """

    kind: str
    N: int
    source: Callable[[int], Sequence] = field(repr=False)
    d: int = 0
    lam: Fraction | float = 0
    u: Fraction | float | None = None
    family: PolyFamily | None = None
    _cache: dict = field(default_factory=dict, repr=False)

    def __post_init__(self) -> None:
        if self.kind not in KNOT_KINDS:
            raise ValueError(f"unknown knot kind {self.kind!r}")
        ks = self.at(128)
        if len(ks) != self.N + 2:
            raise ValueError(f"expected {self.N + 2} knots, got {len(ks)}")

    def at(self, bits: int) -> tuple:
        hit = self._cache.get(("k", bits))
        if hit is not None:
            return hit
        with working_precision(bits):
            ks = sorted(+to_mpfr(v) for v in self.source(bits))
        for a, b in zip(ks, ks[1:]):
            if not a < b:
                raise DuplicateKnot(f"knots coincide at {bits} bits near {float(a)!r}")
        ks = tuple(ks)
        self._cache[("k", bits)] = ks
        return ks

    def wprime(self, bits: int) -> tuple:
        """``W'(v) = prod_{w != v} (v - w)`` for every knot, at ``bits``."""
        hit = self._cache.get(("w", bits))
        if hit is not None:
            return hit
        ks = self.at(bits)
        with working_precision(bits):
            out = []
            for i, v in enumerate(ks):
                p = mpfr(1)
                for j, w in enumerate(ks):
                    if j != i:
                        p *= v - w
                out.append(p)
        out = tuple(out)
        self._cache[("w", bits)] = out
        return out

    @property
    def knots(self) -> tuple:
        return tuple(XReal(v, 128) for v in self.at(128))

    def floats(self) -> np.ndarray:
        return np.array([float(v) for v in self.at(128)])

    @property
    def lo(self) -> float:
        return float(self.at(128)[0])

    @property
    def hi(self) -> float:
        return float(self.at(128)[-1])

    def interior_product(self, bits: int) -> mpfr:
        """``u^2 * prod x_k^2`` for omega_squared sets (product of the non-zero knots)."""
        with working_precision(bits):
            p = mpfr(1)
            for v in self.at(bits):
                if v != 0:
                    p *= v
            return p


def _as_exact(v):
    if isinstance(v, (int, Fraction)):
        return Fraction(v)
    if isinstance(v, str):
        return Fraction(v.strip())
    return v


def custom_knots(values: Sequence, d: int = 0) -> KnotSet:
    """Knot set from explicit values; ints, Fractions and decimal strings stay exact."""
    vals = [_as_exact(v) for v in values]
    return KnotSet("custom", len(vals) - 2, lambda bits: [to_mpfr(v) for v in vals], d=d)


def build_knotset(
    kind: str,
    fam: PolyFamily | None = None,
    *,
    N: int | None = None,
    u: Fraction | float | str = 1,
    nu: int | None = None,
    values: Sequence | None = None,
    d: int = 0,
    precision: PrecisionContext | None = None,
) -> KnotSet:
    """Build one of the special knot sets.

    ``omega_squared``: ``{0, u^2} + {x_k^2}`` from the zeros of ``fam``.
    ``omega_star``: ``{-1, 2u^2 - 1} + {2x_k^2 - 1}`` for a Chebyshev ``fam``,
    with the cosines of the doubled angles computed directly.
    ``cardinal``: ``k - (N+1)/2`` for ``0 <= k <= N+1``.
    ``reciprocal``: ``1/(2k-1)`` for ``-nu <= k <= nu+1``; ``N = 2 nu``.
    ``custom``: ``values`` as given.
    """
    precision = precision or PrecisionContext()
    u = _as_exact(u)
    if kind in ("omega_squared", "omega_star"):
        if fam is None:
            raise ValueError(f"{kind} knots need a polynomial family")
        if fam.beta_N * float(u) < 10:
            warnings.warn(
                f"beta_N * u_N = {fam.beta_N * float(u):.3g} is small; asymptotic experiments expect it large",
                stacklevel=2,
            )
        if kind == "omega_squared":

            def src(bits):
                xs = family_zeros(fam, bits + 8)
                uu = to_mpfr(u)
                return [mpfr(0), uu * uu] + [x * x for x in xs]

            return KnotSet(kind, fam.N, src, d=fam.d, lam=fam.lam, u=u, family=fam)
        if not fam.is_chebyshev:
            raise ValueError("omega_star knots are defined for the Chebyshev families")
        m = fam.degree

        def src_star(bits):
            uu = to_mpfr(u)
            if fam.lam == 0:
                xs = [_cos_rational_pi(2 * k - 1, m) for k in range(1, fam.N + 1)]
            else:
                xs = [_cos_rational_pi(2 * k, m + 1) for k in range(1, fam.N + 1)]
            return [mpfr(-1), 2 * uu * uu - 1] + xs

        return KnotSet(kind, fam.N, src_star, d=fam.d, lam=fam.lam, u=u, family=fam)
    if kind == "cardinal":
        if N is None:
            raise ValueError("cardinal knots need N")
        vals = [Fraction(k) - Fraction(N + 1, 2) for k in range(N + 2)]
        return KnotSet(kind, N, lambda bits: [to_mpfr(v) for v in vals])
    if kind == "reciprocal":
        if nu is None:
            if N is None or N % 2:
                raise ValueError("reciprocal knots need nu (or an even N)")
            nu = N // 2
        vals = [Fraction(1, 2 * k - 1) for k in range(-nu, nu + 2)]
        return KnotSet(kind, 2 * nu, lambda bits: [to_mpfr(v) for v in vals])
    if kind == "custom":
        if values is None:
            raise ValueError("custom knots need values")
        return custom_knots(values, d=d)
    raise ValueError(f"unknown knot kind {kind!r}")


# ---------------------------------------------------------------------------
# Diagnostic probe of the family's cosine asymptotics
# ---------------------------------------------------------------------------


def def11_probe(fam: PolyFamily, z_grid: Sequence[complex]) -> list[tuple[complex, float, float, float]]:
    """Compare ``beta^d P(z/beta)/P^{(d)}(0)`` with ``cos(z - d*pi/2)``.

    Returns ``(z, error, bound, error/bound)`` rows where the bound is
    ``delta_N * min(|z|^2, 1) * h_d(|z|)``.  Points with ``|z| > gamma_N`` are
    still evaluated; the family's implicit constant is unknown, so the ratio
    is reported rather than judged.
    """
    beta = fam.beta_N
    xs = fam.zeros_float()
    delta = fam.probe_delta()
    rows = []
    for z in z_grid:
        z = complex(z)
        approx = z**fam.d * monic_ratio(xs * beta, z)
        exact = cmath.cos(z - fam.d * math.pi / 2)
        err = abs(approx - exact)
        r = abs(z)
        bound = delta * min(r * r, 1.0) * (math.cosh(r) if fam.d == 0 else math.sinh(r))
        ratio = err / bound if bound > 0 else (0.0 if err == 0 else math.inf)
        rows.append((z, err, bound, ratio))
    return rows
