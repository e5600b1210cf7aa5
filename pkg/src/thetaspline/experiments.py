"""Convergence experiments: every limit relation is turned into a table of
(N, point, scaled value, limit, error) records."""

from __future__ import annotations

import csv
import io
import json
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

from gmpy2 import mpfr

from .bspline import _assoc_at, _b_at, eval_recurrence
from .mellin import gn_contour, gn_direct, mellin_theta_closed, mellin_transform
from .numerics import Decay, LogValue, PrecisionContext, QuadratureRule, adaptive_eval, to_mpfr, working_precision
from .polyfamilies import KnotSet, PolyFamily, build_knotset, custom_knots
from .thetafn import theta_eval

__all__ = [
    "CSV_COLUMNS",
    "ConvergenceRecord",
    "make_record",
    "records_to_csv",
    "records_to_json",
    "records_from_json",
    "trend_ok",
    "default_u",
    "chebyshev_product",
    "run_theta_pointwise",
    "run_theta_mellin",
    "run_gaussian",
    "run_cosh",
    "run_perfect_spline",
    "rescaling_check",
    "conjecture_probe",
    "route_consistency",
    "normalization_report",
]

CSV_COLUMNS = (
    "experiment_id",
    "N",
    "point",
    "scaled_log",
    "scaled_sign",
    "limit",
    "abs_err",
    "rel_err",
    "precision_bits",
    "wall_ms",
)

DEFAULT_N_LIST = (16, 32, 64, 128)
DEFAULT_T_GRID = (0.25, 1.0, 4.0, 9.0, 16.0)


@dataclass(frozen=True)
class ConvergenceRecord:
    experiment_id: str
    N: int
    point: float
    scaled_value: LogValue
    limit_value: float
    abs_err: float
    rel_err: float
    precision_bits: int
    wall_time_ms: int = 0

    def as_row(self, timing: bool = True) -> dict:
        return {
            "experiment_id": self.experiment_id,
            "N": self.N,
            "point": _fmt(self.point),
            "scaled_log": _fmt(self.scaled_value.log_mag) if self.scaled_value.sign else "-inf",
            "scaled_sign": self.scaled_value.sign,
            "limit": _fmt(self.limit_value),
            "abs_err": _fmt(self.abs_err),
            "rel_err": _fmt(self.rel_err),
            "precision_bits": self.precision_bits,
            "wall_ms": self.wall_time_ms if timing else 0,
        }

    @property
    def scaled(self) -> float:
        return float(self.scaled_value)


def _fmt(x: float) -> str:
    return repr(float(x))


def make_record(
    experiment_id: str,
    N: int,
    point: float,
    scaled: LogValue | float,
    limit: float,
    precision_bits: int,
    wall_ms: int = 0,
    *,
    abs_err: float | None = None,
) -> ConvergenceRecord:
    lv = scaled if isinstance(scaled, LogValue) else LogValue.from_float(float(scaled))
    if abs_err is None:
        abs_err = abs(float(lv) - limit)
    rel = abs_err / max(abs(limit), 1e-300)
    return ConvergenceRecord(experiment_id, int(N), float(point), lv, float(limit), float(abs_err), float(rel), int(precision_bits), int(wall_ms))


def _sorted(records: Iterable[ConvergenceRecord]) -> list[ConvergenceRecord]:
    return sorted(records, key=lambda r: (r.experiment_id, r.point, r.N))


def records_to_csv(records: Sequence[ConvergenceRecord], timing: bool = True) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=CSV_COLUMNS, lineterminator="\n")
    w.writeheader()
    for r in records:
        w.writerow(r.as_row(timing))
    return buf.getvalue()


def records_to_json(records: Sequence[ConvergenceRecord], timing: bool = True) -> str:
    return json.dumps([r.as_row(timing) for r in records], indent=1) + "\n"


def records_from_json(text: str) -> list[dict]:
    return json.loads(text)


def trend_ok(records: Sequence[ConvergenceRecord], slack: float = 1.1) -> dict[float, bool]:
    """Per point: error at the largest N below the smallest-N error, and the
    last doubling raising the error by at most ``slack``."""
    by_point: dict[float, list[ConvergenceRecord]] = {}
    for r in records:
        by_point.setdefault(r.point, []).append(r)
    out = {}
    for p, rs in by_point.items():
        rs = sorted(rs, key=lambda r: r.N)
        errs = [r.rel_err for r in rs]
        ok = errs[-1] < errs[0]
        if len(errs) >= 2:
            ok = ok and errs[-1] <= slack * errs[-2]
        out[p] = ok
    return out


def default_u(family: str) -> float:
    """``u_N = 1``, except 3/2 for equidistant zeros (whose largest zero is 1)."""
    return 1.5 if family == "equidistant" else 1.0


def chebyshev_product(N: int, d: int, lam: int, bits: int = 256) -> tuple[mpfr, mpfr]:
    """``prod x_k^2`` two ways for Chebyshev T (lam=0) or U (lam=1).

    Returns (product of computed zeros, beta^d 2^-(2N+d-1+lam)).
    """
    fam = PolyFamily("chebyshev_T" if lam == 0 else "chebyshev_U", d, N)
    with working_precision(bits):
        p = mpfr(1)
        for x in fam.zeros(bits):
            p *= x * x
        closed = mpfr(fam.beta_N) ** d / mpfr(2) ** (2 * N + d - 1 + lam)
        return p, closed


def _map(fn, jobs: list, workers: int):
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            return list(ex.map(fn, jobs))
    return [fn(j) for j in jobs]


# ---------------------------------------------------------------------------
# theta limits of associated splines
# ---------------------------------------------------------------------------


def _theta_point(job) -> ConvergenceRecord:
    exp_id, family, d, lam, N, u, t, closed, ctx = job
    t0 = time.perf_counter()
    fam = PolyFamily(family, d, N, lam=lam)
    knots = build_knotset("omega_squared", fam, u=u)
    beta = fam.beta_N
    with working_precision(256):
        if closed:
            # Chebyshev: u^2 prod x_k^2 = u^2 beta^d 2^-(2N+d-1+lam)
            scale = to_mpfr(u) ** 2 * mpfr(beta) ** d / mpfr(2) ** (2 * N + d - 1 + int(lam))
        else:
            scale = knots.interior_product(256)
        lscale = LogValue.from_mpfr(scale / N)
    tau = mpfr(N) * to_mpfr(t) / to_mpfr(beta) ** 2 if t else mpfr(0)
    val = adaptive_eval(lambda bits: _assoc_at(knots, tau, bits), ctx)
    scaled = lscale * val.to_log()
    ms = int(round((time.perf_counter() - t0) * 1000))
    return make_record(exp_id, N, t, scaled, theta_eval(d, t), val.precision_bits, ms)


def run_theta_pointwise(
    family: str = "chebyshev_T",
    d: int = 0,
    lam: int | None = None,
    u_rule: Callable[[int], float] | None = None,
    t_grid: Sequence[float] = DEFAULT_T_GRID,
    N_list: Sequence[int] = DEFAULT_N_LIST,
    ctx: PrecisionContext | None = None,
    workers: int = 1,
) -> list[ConvergenceRecord]:
    """``u^2 prod x_k^2 / N * B*_N(N t / beta^2)`` against ``Theta_d(t)`` for Chebyshev knots.

    The Chebyshev product is taken in closed form, ``beta^d 2^-(2N+d-1+lam)``.
    """
    if family not in ("chebyshev_T", "chebyshev_U"):
        raise ValueError("run_theta_pointwise is for the Chebyshev families; see conjecture_probe")
    lam = (0 if family == "chebyshev_T" else 1) if lam is None else lam
    ctx = ctx or PrecisionContext()
    u_rule = u_rule or (lambda N: 1.0)
    exp_id = f"theta_pointwise_{family}_d{d}"
    jobs = [(exp_id, family, d, lam, N, u_rule(N), float(t), True, ctx) for t in t_grid for N in N_list]
    return _sorted(_map(_theta_point, jobs, workers))


def conjecture_probe(
    family: str,
    d: int,
    t_grid: Sequence[float] = DEFAULT_T_GRID,
    N_list: Sequence[int] = (16, 32, 64),
    lam: float = 0,
    u_rule: Callable[[int], float] | None = None,
    ctx: PrecisionContext | None = None,
    workers: int = 1,
) -> list[ConvergenceRecord]:
    """Same scaled quantity for any family, with ``prod x_k^2`` computed from the zeros.

    For non-Chebyshev families this probes an unproved relation; the
    experiment id carries a CONJECTURE tag and nothing is asserted.
    """
    ctx = ctx or PrecisionContext()
    u_rule = u_rule or (lambda N: default_u(family))
    tag = "" if family in ("chebyshev_T", "chebyshev_U") else "CONJECTURE_"
    exp_id = f"{tag}theta_generic_{family}_d{d}" + (f"_lam{lam}" if family == "gegenbauer" else "")
    jobs = [(exp_id, family, d, lam, N, u_rule(N), float(t), False, ctx) for t in t_grid for N in N_list]
    return _sorted(_map(_theta_point, jobs, workers))


def _mellin_point(job) -> ConvergenceRecord:
    exp_id, family, d, lam, N, u, s, ref = job
    t0 = time.perf_counter()
    fam = PolyFamily(family, d, N, lam=lam)
    g = gn_contour(fam, u, s)
    ms = int(round((time.perf_counter() - t0) * 1000))
    if isinstance(ref, complex):
        err = abs(complex(g.value) - ref)
        return make_record(exp_id, N, s.imag, LogValue.from_float(abs(g.value)), abs(ref), 0, ms, abs_err=err)
    return make_record(exp_id, N, float(s.real if isinstance(s, complex) else s), LogValue.from_float(float(g.value)), ref, 0, ms)


def theta_mellin_quadrature(d: int, sigma: complex) -> complex:
    """``M(Theta_d, sigma)`` by quadrature (used for complex ``sigma``)."""
    import numpy as np

    def f(t):
        return np.array([theta_eval(d, float(x)) for x in np.atleast_1d(t)])

    return mellin_transform(f, sigma, decay=Decay("exp", 0.25), breakpoints=[3.0], rule=QuadratureRule(abs_tol=1e-14, rel_tol=1e-12)).value


def run_theta_mellin(
    family: str = "chebyshev_T",
    d: int = 0,
    s_grid: Sequence[complex] = (2.0,),
    N_list: Sequence[int] = DEFAULT_N_LIST,
    lam: float = 0,
    u_rule: Callable[[int], float] | None = None,
    workers: int = 1,
) -> list[ConvergenceRecord]:
    """``g_N(s)`` (contour route) against ``M(Theta_d, (s-d)/2)``.

    Real ``s`` use the closed form; complex ``s`` use quadrature of
    ``M(Theta_d, .)`` and record ``Im s`` as the point, ``|g_N|`` as the value
    and ``|g_N - M|`` as the absolute error.
    """
    u_rule = u_rule or (lambda N: default_u(family))
    jobs = []
    for s in s_grid:
        if isinstance(s, complex) and s.imag != 0:
            ref = complex(theta_mellin_quadrature(d, (s - d) / 2))
            exp_id = f"theta_mellin_{family}_d{d}_re{s.real:g}"
        else:
            s = float(s.real if isinstance(s, complex) else s)
            ref = mellin_theta_closed(d, (s - d) / 2)
            exp_id = f"theta_mellin_{family}_d{d}"
        for N in N_list:
            jobs.append((exp_id, family, d, lam, N, u_rule(N), s, ref))
    return _sorted(_map(_mellin_point, jobs, workers))


def normalization_report(d: int = 1, N_list: Sequence[int] = DEFAULT_N_LIST) -> dict:
    """``g_N(2+d)`` against the two candidate constants for ``int Theta_d``.

    For d=1 the candidates are 7 zeta(3) (from the Mellin closed form) and
    14 zeta(3); for d=0 both entries are 4 beta(2).
    """
    from .specialfn import dirichlet_beta, zeta

    family = "chebyshev_U" if d == 1 else "chebyshev_T"
    recs = run_theta_mellin(family, d, (2.0 + d,), N_list)
    cands = {"7zeta3": 7 * zeta(3), "14zeta3": 14 * zeta(3)} if d == 1 else {"4beta2": 4 * dirichlet_beta(2)}
    last = recs[-1].scaled
    return {
        "N": recs[-1].N,
        "g_N": last,
        "distances": {k: abs(last - v) for k, v in cands.items()},
        "closest": min(cands, key=lambda k: abs(last - cands[k])),
        "records": recs,
    }


def route_consistency(fam: PolyFamily, s: float, u: float = 1.0) -> tuple[float, float, float]:
    """(direct route, contour route, relative gap) for ``g_N(s)``."""
    a = gn_direct(fam, u, s).value
    b = gn_contour(fam, u, s).value
    return float(a), float(b), abs(a - b) / abs(b)


# ---------------------------------------------------------------------------
# classical limits
# ---------------------------------------------------------------------------


def _cardinal(N: int) -> list[float]:
    return [k - (N + 1) / 2 for k in range(N + 2)]


def _perfect(N: int) -> list[float]:
    return [math.cos(k * math.pi / (N + 1)) for k in range(N + 2)]


def run_gaussian(
    knot_kind: str = "cardinal",
    N_list: Sequence[int] = (16, 32, 64, 128),
    t_grid: Sequence[float] = (0.0, 1.0, 2.0),
    knots_fn: Callable[[int], Sequence[float]] | None = None,
) -> list[ConvergenceRecord]:
    """``c B_N(c t)`` against the standard normal density, ``c = |Omega|_2 / (N+2)``.

    ``cardinal`` uses ``k - (N+1)/2`` (so ``c = sqrt((N+1)/12)``); ``general``
    uses ``knots_fn`` (default: ``cos(k pi/(N+1))``, the perfect-spline knots).
    """
    if knot_kind == "cardinal":
        fn = _cardinal
    elif knot_kind == "general":
        fn = knots_fn or _perfect
    else:
        raise ValueError("knot_kind must be 'cardinal' or 'general'")
    out = []
    for N in N_list:
        ks = sorted(fn(N))
        if abs(sum(ks)) > 1e-9 * max(1.0, max(abs(k) for k in ks)):
            raise ValueError("general knots must sum to 0")
        c = math.sqrt(sum(k * k for k in ks)) / (N + 2)
        for t in t_grid:
            t0 = time.perf_counter()
            v = c * eval_recurrence(ks, c * t)
            ms = int(round((time.perf_counter() - t0) * 1000))
            out.append(make_record(f"gaussian_{knot_kind}", N, t, v, math.exp(-t * t / 2) / math.sqrt(2 * math.pi), 53, ms))
    return _sorted(out)


def run_cosh(
    nu_list: Sequence[int] = (8, 16, 32),
    t_grid: Sequence[float] = (0.0, 1.0, 2.0),
    ctx: PrecisionContext | None = None,
) -> list[ConvergenceRecord]:
    """``B_2nu(t/(2nu+2)) / (nu+1)`` on reciprocal knots against ``2/(pi cosh t)``; N = 2 nu."""
    ctx = ctx or PrecisionContext()
    out = []
    for nu in nu_list:
        knots = build_knotset("reciprocal", nu=nu)
        for t in t_grid:
            t0 = time.perf_counter()
            x = to_mpfr(t) / (2 * nu + 2) if t else mpfr(0)
            val = adaptive_eval(lambda bits: _b_at(knots, x, bits) / (nu + 1), ctx)
            ms = int(round((time.perf_counter() - t0) * 1000))
            out.append(make_record("cosh_reciprocal", 2 * nu, t, val.to_log(), 2 / (math.pi * math.cosh(t)), val.precision_bits, ms))
    return _sorted(out)


def rescaling_check(N: int, d: int, lam: int, ys: Sequence[float], u: float = 1.0, ctx: PrecisionContext | None = None) -> float:
    """max over ``ys`` of ``|B_N(y, Omega) - 2 B_N(2y-1, Omega*)| / |B_N(y, Omega)|``."""
    ctx = ctx or PrecisionContext()
    fam = PolyFamily("chebyshev_T" if lam == 0 else "chebyshev_U", d, N)
    om = build_knotset("omega_squared", fam, u=u)
    star = build_knotset("omega_star", fam, u=u)
    worst = 0.0
    for y in ys:
        a = adaptive_eval(lambda bits: _b_at(om, y, bits), ctx)
        b = adaptive_eval(lambda bits: 2 * _b_at(star, 2 * to_mpfr(y) - 1, bits), ctx)
        with working_precision(max(a.precision_bits, b.precision_bits)):
            gap = abs(a.value - b.value) / abs(a.value)
        worst = max(worst, float(gap))
    return worst


def run_perfect_spline(
    N_list: Sequence[int] = (16, 32, 64),
    t_grid: Sequence[float] = (1.0, 4.0, 9.0),
    lam: int = 1,
    d: int = 1,
    u_rule: Callable[[int], float] | None = None,
    ctx: PrecisionContext | None = None,
) -> list[ConvergenceRecord]:
    """Ratio of ``B_N(2N t/beta^2 - 1, Omega*)`` to its predicted asymptotic form.

    Predicted form (with the factors reconciled against the exact rescaling):
    ``N / (2 u^2 prod x_k^2) * Theta_d(t) * (N t / beta^2)^N``.  Recorded value
    is the ratio, limit 1.
    """
    ctx = ctx or PrecisionContext()
    u_rule = u_rule or (lambda N: 1.0)
    out = []
    for N in N_list:
        u = u_rule(N)
        fam = PolyFamily("chebyshev_T" if lam == 0 else "chebyshev_U", d, N)
        star = build_knotset("omega_star", fam, u=u)
        beta = fam.beta_N
        with working_precision(256):
            prod = to_mpfr(u) ** 2 * mpfr(beta) ** d / mpfr(2) ** (2 * N + d - 1 + lam)
            lpre = LogValue.from_mpfr(N / (2 * prod))
        for t in t_grid:
            t0 = time.perf_counter()
            tau = mpfr(N) * to_mpfr(t) / to_mpfr(beta) ** 2
            val = adaptive_eval(lambda bits: _b_at(star, 2 * tau - 1, bits), ctx)
            rhs = lpre * LogValue.from_float(theta_eval(d, t)) * LogValue.of(tau) ** N
            ratio = val.to_log() / rhs
            ms = int(round((time.perf_counter() - t0) * 1000))
            out.append(make_record(f"perfect_spline_d{d}_lam{lam}", N, t, ratio, 1.0, val.precision_bits, ms))
    return _sorted(out)
