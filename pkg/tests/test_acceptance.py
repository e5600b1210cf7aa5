"""Acceptance gate: one test group per criterion, summarised as PASS/FAIL lines at the end of the run."""

import math
import time
import warnings

import mpmath as mp
import numpy as np
import pytest

from thetaspline import experiments as ex
from thetaspline.bspline import eval_divided_difference, eval_recurrence, first_interval_value, integrate_bspline
from thetaspline.interp import identity_cor39, identity_prop26
from thetaspline.mellin import mellin_transform, rbeta_probe
from thetaspline.numerics import Decay, PrecisionContext, working_precision
from thetaspline.polyfamilies import PolyFamily, build_knotset, custom_knots
from thetaspline.specialfn import hd_mellin
from thetaspline.thetafn import ThetaSpec, laplace_identity_residual, theta_direct, theta_transformed

warnings.filterwarnings("ignore", message="beta_N")

C1 = pytest.mark.criterion(1, "exact finite-N identities")
C2 = pytest.mark.criterion(2, "structural B-spline suite")
C3 = pytest.mark.criterion(3, "theta suite")
C4 = pytest.mark.criterion(4, "hyperbolic Mellin closed forms")
C5 = pytest.mark.criterion(5, "asymptotic experiment trends")
C6 = pytest.mark.criterion(6, "desk-scale spot checks")
C7 = pytest.mark.criterion(7, "(r,beta) decay probe")


# ---------------------------------------------------------------- criterion 1


def _cor39_cases():
    yield "omega0123", custom_knots([0, 1, 2, 3]), 0
    for fam in ("chebyshev_T", "chebyshev_U"):
        for d in (0, 1):
            for N in (4, 8, 12):
                yield f"{fam}_d{d}_N{N}", build_knotset("omega_squared", PolyFamily(fam, d, N)), d


@C1
def test_cor39_identities():
    t0 = time.perf_counter()
    worst = 0.0
    for name, ks, d in _cor39_cases():
        for u in ("#1", f"#{ks.N + 1}"):
            for s in (d + 0.5, d + 1.5, d + 3.5):
                worst = max(worst, identity_cor39(ks, u, s=s, d=d)[2])
            for m in (1, 2):
                worst = max(worst, identity_cor39(ks, u, m=m, d=d)[2])
    elapsed = time.perf_counter() - t0
    print(f"cor39 worst rel_gap {worst:.3e} in {elapsed:.1f}s")
    assert worst <= 1e-9
    assert elapsed <= 60


@C1
def test_prop26_hand_case():
    lhs, rhs, _ = identity_prop26([1], 2, 1)
    assert abs(lhs + 2) <= 1e-12
    assert abs(rhs + 2) <= 1e-12


@C1
@pytest.mark.parametrize("y,s", [(0.3, 0.5), (0.7, 1.5), (1.3, 2.5), (0.05, 3.3), (2.0, 0.7), (0.5, 5.0)])
def test_prop26_numeric(y, s):
    zeros = list(PolyFamily("chebyshev_T", 0, 5).zeros_float())
    assert identity_prop26(zeros, y, s)[2] <= 1e-9


@C1
@pytest.mark.parametrize("fam,d", [("chebyshev_T", 0), ("chebyshev_U", 1)])
@pytest.mark.parametrize("N", [6, 10])
def test_route_consistency(fam, d, N):
    for s in (d + 0.5, d + 2.5):
        _, _, gap = ex.route_consistency(PolyFamily(fam, d, N), s)
        assert gap <= 1e-8


@C1
@pytest.mark.parametrize("lam,d", [(0, 0), (1, 1)])
def test_rescaling_exact(lam, d):
    ys = [0.05 + 0.1 * k for k in range(10)]
    ctx = PrecisionContext(start_bits=256)
    assert ex.rescaling_check(12, d, lam, ys, 1.0, ctx) <= 1e-60


# ---------------------------------------------------------------- criterion 2


def _structural_sets(N):
    for fam in ("chebyshev_T", "chebyshev_U", "gegenbauer", "hermite", "equidistant"):
        f = PolyFamily(fam, 0, N, lam=0.5 if fam == "gegenbauer" else 0)
        yield fam, build_knotset("omega_squared", f, u=ex.default_u(fam) if fam != "hermite" else 1)
    yield "omega_star", build_knotset("omega_star", PolyFamily("chebyshev_U", 1, N))
    yield "cardinal", build_knotset("cardinal", N=N)
    yield "reciprocal", build_knotset("reciprocal", N=N)


@C2
@pytest.mark.parametrize("N", [4, 16, 32])
def test_normalization_all_families(N):
    for name, ks in _structural_sets(N):
        assert abs(integrate_bspline(ks) - 1) <= 1e-10, name


def _long_side_b(knots_mpf, t, N):
    """Full truncated-power sum over knots right of t, in mpmath (independent oracle)."""
    total = mp.mpf(0)
    for i, v in enumerate(knots_mpf):
        if v > t:
            w = mp.fprod([v - x for j, x in enumerate(knots_mpf) if j != i])
            total += (v - t) ** N / w
    return (N + 1) * total


@C2
@pytest.mark.parametrize("fam,d,N", [("chebyshev_T", 0, 8), ("chebyshev_U", 1, 12), ("hermite", 0, 6)])
def test_first_interval_closed_form(fam, d, N):
    ks = build_knotset("omega_squared", PolyFamily(fam, d, N))
    bits = 512
    with mp.workdps(160):
        kn = [mp.mpf(int(v.as_integer_ratio()[0])) / int(v.as_integer_ratio()[1]) for v in ks.at(bits)]
        t = kn[1] / 3
        oracle = _long_side_b(kn, t, N) / t**N
        with working_precision(bits):
            closed = first_interval_value(ks, bits)
        c = mp.mpf(int(closed.as_integer_ratio()[0])) / int(closed.as_integer_ratio()[1])
        assert abs(oracle / c - 1) < mp.mpf(10) ** -100


@C2
@pytest.mark.parametrize("N", [4, 8, 20])
def test_support_and_positivity(N):
    for name, ks in _structural_sets(N):
        lo, hi = ks.lo, ks.hi
        inside = np.linspace(lo, hi, 41)[1:-1]
        for t in inside:
            assert float(eval_divided_difference(ks, float(t)).b_value) > 0, name
        for t in (lo - 1.0, lo - 1e-3, hi + 1e-3, hi + 1.0):
            assert float(eval_divided_difference(ks, t).b_value) == 0, name


@C2
@pytest.mark.parametrize("N", [4, 8, 20])
def test_recurrence_agrees_with_divided_difference(N):
    for name, ks in _structural_sets(N):
        for t in np.linspace(ks.lo, ks.hi, 23)[1:-1]:
            a = float(eval_divided_difference(ks, float(t)).b_value)
            b = eval_recurrence(ks, float(t))
            assert abs(a - b) <= 1e-9 * abs(a), (name, t, a, b)


# ---------------------------------------------------------------- criterion 3


@C3
@pytest.mark.parametrize("d", [0, 1])
def test_theta_overlap(d):
    lo, hi = ThetaSpec(d=d).overlap
    for t in np.linspace(lo, hi, 20):
        a, b = theta_direct(d, float(t)), theta_transformed(d, float(t))
        assert abs(a - b) <= 1e-12 * abs(a)


@C3
@pytest.mark.parametrize("d", [0, 1])
def test_laplace_identity(d):
    for t in np.geomspace(0.1, 30, 12):
        assert laplace_identity_residual(d, float(t)) <= 1e-8


@C3
def test_integral_theta0():
    v = ex.theta_mellin_quadrature(0, 1.0).real
    assert abs(v - 3.6638623767088760602) <= 1e-8


@C3
def test_integral_theta1_against_both_constants():
    v = ex.theta_mellin_quadrature(1, 1.0).real
    d7 = abs(v - 7 * float(mp.zeta(3)))
    d14 = abs(v - 14 * float(mp.zeta(3)))
    print(f"int Theta_1 = {v:.12f}; |. - 7 zeta(3)| = {d7:.2e}; |. - 14 zeta(3)| = {d14:.2e} (14 zeta(3) is off by a factor 2)")
    assert min(d7, d14) <= 1e-6
    assert d7 < d14


# ---------------------------------------------------------------- criterion 4


@C4
@pytest.mark.parametrize("d,s", [(0, 0.5), (0, 1.0), (0, 2.0), (0, 3.5), (1, 1.5), (1, 2.0), (1, 3.0), (1, 4.5)])
def test_hd_mellin_closed_forms(d, s):
    if d == 0:
        q = mellin_transform(lambda t: 1 / np.cosh(t), s, decay=Decay("exp", 1.0)).value
    else:
        # t/sinh t is smooth at 0, so integrate it against t^(s-2)
        def f(t):
            t = np.asarray(t, dtype=float)
            out = np.ones_like(t)
            nz = t != 0
            out[nz] = t[nz] / np.sinh(t[nz])
            return out

        q = mellin_transform(f, s - 1, decay=Decay("exp", 1.0)).value
    closed = hd_mellin(d, s)
    assert abs(q - closed) <= 1e-9 * abs(closed)


# ---------------------------------------------------------------- criterion 5


_EXPERIMENTS = {
    "gaussian_cardinal": lambda: ex.run_gaussian("cardinal"),
    "gaussian_general": lambda: ex.run_gaussian("general"),
    "cosh": lambda: ex.run_cosh(),
    "theta_pointwise_T_d0": lambda: ex.run_theta_pointwise("chebyshev_T", 0),
    "theta_pointwise_T_d1": lambda: ex.run_theta_pointwise("chebyshev_T", 1),
    "theta_pointwise_U_d0": lambda: ex.run_theta_pointwise("chebyshev_U", 0),
    "theta_pointwise_U_d1": lambda: ex.run_theta_pointwise("chebyshev_U", 1),
    "theta_mellin_T_d0": lambda: ex.run_theta_mellin("chebyshev_T", 0, (1.0, 2.0, 3.5)),
    "theta_mellin_U_d1": lambda: ex.run_theta_mellin("chebyshev_U", 1, (2.0, 3.0, 4.5)),
    "theta_mellin_complex": lambda: ex.run_theta_mellin("chebyshev_T", 0, (complex(2, 1), complex(2, 3))),
    "perfect_spline_U_d1": lambda: ex.run_perfect_spline(),
    "perfect_spline_T_d0": lambda: ex.run_perfect_spline(lam=0, d=0),
}


@C5
@pytest.mark.parametrize("name", sorted(_EXPERIMENTS))
def test_experiment_trend(name):
    recs = _EXPERIMENTS[name]()
    trend = ex.trend_ok(recs)
    assert trend and all(trend.values()), trend


@C5
def test_results_table_present():
    from pathlib import Path

    table = Path(__file__).resolve().parent.parent / "results" / "convergence_summary.md"
    text = table.read_text(encoding="utf-8")
    for key in ("gaussian", "cosh", "theta_pointwise", "theta_mellin", "perfect_spline", "runtime"):
        assert key in text
    assert "FAIL" not in text


# ---------------------------------------------------------------- criterion 6


@C6
def test_gaussian_spot():
    rec = ex.run_gaussian("cardinal", N_list=(99,), t_grid=(0.0,))[0]
    assert abs(rec.scaled - 0.3989423) <= 2e-2


@C6
def test_cosh_spot():
    rec = ex.run_cosh(nu_list=(32,), t_grid=(0.0,))[0]
    assert abs(rec.scaled - 0.6366198) <= 5e-2


# ---------------------------------------------------------------- criterion 7


@C7
@pytest.mark.parametrize("fam,d", [("chebyshev_T", 0), ("chebyshev_U", 1)])
def test_rbeta_condition(fam, d):
    rows = rbeta_probe(PolyFamily(fam, d, 10), 1.0, 2.0, list(np.linspace(1, 15, 15)), N_list=(10, 20, 40))
    sups = {}
    for r in rows:
        sups[r["N"]] = max(sups.get(r["N"], 0.0), r["ratio"])
    print(f"{fam} d={d} sup ratio by N: {sups}")
    vals = list(sups.values())
    assert all(math.isfinite(v) and v > 0 for v in vals)
    assert max(vals) / min(vals) < 10
