"""Command-line front end.

Exit codes: 0 success, 2 invalid input, 3 precision or convergence failure,
4 I/O failure.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import math
import sys
import warnings
from dataclasses import dataclass, field
from typing import Sequence

from . import __version__
from .numerics import NonConvergent, PrecisionContext, PrecisionExhausted

__all__ = ["RunConfig", "build_parser", "dispatch", "emit", "main"]

EXIT_OK, EXIT_INVALID, EXIT_NUMERIC, EXIT_IO = 0, 2, 3, 4

COMMANDS = ("knots", "eval", "theta", "mellin", "identity", "converge", "probe")
EXPERIMENTS = ("theta_pointwise", "theta_mellin", "gaussian", "cosh", "perfect_spline", "conjecture", "cor24")


@dataclass
class RunConfig:
    """Everything a run needs; round-trips through JSON and rejects unknown keys."""

    command: str
    which: str | None = None
    family: str | None = None
    kind: str = "omega_squared"
    d: int = 0
    lam: float = 0.0
    u: str = "1"
    N: int | None = None
    N_list: list[int] | None = None
    grid: list[float] | None = None
    omega: list[str] | None = None
    s: float | None = None
    s_imag: float = 0.0
    m: int | None = None
    y: float | None = None
    assoc: bool = False
    start_bits: int = 128
    max_bits: int | None = None
    target_rel_tol: float = 1e-20
    out: str | None = None
    format: str = "csv"
    timing: bool = False
    workers: int = 1

    def __post_init__(self) -> None:
        if self.command not in COMMANDS:
            raise ValueError(f"unknown command {self.command!r}")
        if self.format not in ("csv", "json"):
            raise ValueError("format must be csv or json")
        if self.d not in (0, 1):
            raise ValueError("d must be 0 or 1")

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ValueError(f"unknown config keys: {', '.join(unknown)}")
        return cls(**data)

    @classmethod
    def from_json(cls, text: str) -> "RunConfig":
        return cls.from_dict(json.loads(text))

    def precision(self) -> PrecisionContext:
        kw = {"start_bits": self.start_bits, "target_rel_tol": self.target_rel_tol}
        if self.max_bits is not None:
            kw["max_bits"] = self.max_bits
        return PrecisionContext.from_env(**kw)


# ---------------------------------------------------------------------------
# parsing
# ---------------------------------------------------------------------------


def _floats(text: str) -> list[float]:
    return [float(v) for v in text.split(",") if v.strip()]


def _ints(text: str) -> list[int]:
    return [int(v) for v in text.split(",") if v.strip()]


def _strs(text: str) -> list[str]:
    return [v.strip() for v in text.split(",") if v.strip()]


def _family(text: str) -> str:
    return text.replace("-", "_")


def _common(p: argparse.ArgumentParser, *, family: bool = True) -> None:
    if family:
        p.add_argument("--family", type=_family, help="chebyshev-T, chebyshev-U, gegenbauer, hermite, equidistant")
        p.add_argument("--d", type=int, default=0, help="parity index: 0 (cosh) or 1 (sinh)")
        p.add_argument("--lambda", dest="lam", type=float, default=0.0, help="Gegenbauer parameter")
        p.add_argument("--uN", "--u", dest="u", default="1", help="u_N (exact decimal or fraction)")
        p.add_argument("--N", type=int, help="degree index N (polynomial degree 2N+d)")
    p.add_argument("--start-bits", type=int, default=128)
    p.add_argument("--max-bits", type=int, help="default 16384, or THETASPLINE_MAX_BITS")
    p.add_argument("--tol", dest="target_rel_tol", type=float, default=1e-20, help="agreement tolerance between precisions")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="thetaspline", description="B-splines on zero-based knot sets, theta-like limits and Mellin transforms.")
    p.add_argument("--version", action="version", version=__version__)
    p.add_argument("--config", help="JSON RunConfig file; command-line values are ignored when given")
    sub = p.add_subparsers(dest="command")

    k = sub.add_parser(
        "knots",
        help="print a knot set",
        description="Knot sets. omega_squared: {0, u^2} + {x_k^2}; omega_star: {-1, 2u^2-1} + {2x_k^2-1}; "
        "cardinal: k-(N+1)/2; reciprocal: 1/(2k-1), -nu<=k<=nu+1.",
    )
    _common(k)
    k.add_argument("--kind", default="omega_squared", choices=["omega_squared", "omega_star", "cardinal", "reciprocal", "custom"])
    k.add_argument("--omega", type=_strs, help="explicit comma-separated knots (custom kind)")
    k.add_argument("--digits", type=int, default=20)

    e = sub.add_parser(
        "eval",
        help="evaluate B_N or B*_N",
        description="B_N(t) = (N+1) sum_v (v-t)_+^N / W'(v) with W(x) = prod (x-v); B*_N(t) = t^-N B_N(t).",
    )
    _common(e)
    e.add_argument("--kind", default="omega_squared", choices=["omega_squared", "omega_star", "cardinal", "reciprocal", "custom"])
    e.add_argument("--omega", type=_strs)
    e.add_argument("--t", type=_strs, required=True, help="comma-separated points")
    e.add_argument("--assoc", action="store_true", help="evaluate B*_N instead of B_N")

    th = sub.add_parser(
        "theta",
        help="evaluate Theta_d",
        description="Theta_0(t) = 1 - (4/pi) sum (-1)^k exp(-(pi^2/4)(2k+1)^2/t)/(2k+1); "
        "Theta_1(t) = 1 + 2 sum_{k>=1} (-1)^k exp(-pi^2 k^2/t).",
    )
    th.add_argument("--d", type=int, default=0)
    th.add_argument("--t", type=_floats, required=True)

    me = sub.add_parser(
        "mellin",
        help="Mellin transforms and g_N(s)",
        description="Without --family: M(Theta_d, sigma) = 4 Gamma(2 sigma+d) c_d(2 sigma+d) / Gamma(1+sigma). "
        "With --family: g_N(s) by the contour route, 2/Gamma(1+sigma) (N+1)!/(N^(1+sigma) Gamma(N+1-sigma)) "
        "beta^(s-d) int t^(s-1) P^(d)(0) / ((1+(t/u)^2) P(it)) dt, and (--which direct) by the spline route.",
    )
    _common(me)
    me.add_argument("--s", type=float, help="real part of s (sigma = (s-d)/2)")
    me.add_argument("--s-imag", type=float, default=0.0)
    me.add_argument("--which", default="contour", choices=["contour", "direct", "both"])

    idn = sub.add_parser(
        "identity",
        help="verify an exact finite-N identity",
        description="cor39: u^sigma - L(u) = M_{N,s,d} w(u) int_0^max B*_N t^(sigma-1) dt (or the (1/2)u^m log u form); "
        "prop26: |y|^s - L_2N(y) = (2 sin(s pi/2)/pi) G(y) int t^(s-1)/((1+(t/y)^2) G(it)) dt; "
        "rescale: B_N(y, Omega) = 2 B_N(2y-1, Omega*).",
    )
    _common(idn)
    idn.add_argument("--which", required=True, choices=["cor39", "prop26", "rescale"])
    idn.add_argument("--omega", type=_strs, help="knots (cor39) or positive zeros of G (prop26)")
    idn.add_argument("--s", type=float)
    idn.add_argument("--m", type=int)
    idn.add_argument("--y", type=float, help="evaluation point (prop26)")
    idn.add_argument("--grid", type=_floats, help="points y for the rescaling check")

    cv = sub.add_parser(
        "converge",
        help="run a convergence experiment",
        description="theta_pointwise: u^2 prod x_k^2/N B*_N(N t/beta^2) -> Theta_d(t); theta_mellin: g_N(s) -> M(Theta_d,(s-d)/2); "
        "gaussian: c B_N(c t) -> exp(-t^2/2)/sqrt(2 pi); cosh: B_2nu(t/(2nu+2))/(nu+1) -> 2/(pi cosh t); "
        "perfect_spline: B_N(2N t/beta^2 - 1, Omega*) / [N/(2u^2 prod x_k^2) Theta_d(t) (N t/beta^2)^N] -> 1; "
        "conjecture: theta_pointwise for other families; cor24: scaled interpolation errors -> (2 sin((s-d)pi/2)/pi) int t^(s-1)/h_d(t) dt.",
    )
    _common(cv)
    cv.add_argument("--experiment", dest="which", required=True, choices=EXPERIMENTS)
    cv.add_argument("--N-list", dest="N_list", type=_ints)
    cv.add_argument("--grid", type=_floats, help="t (or s, or nu-independent t) grid")
    cv.add_argument("--s", type=float)
    cv.add_argument("--s-imag", type=float, default=0.0, help="imaginary part added to every s in --grid (theta_mellin)")
    cv.add_argument("--m", type=int)
    cv.add_argument("--kind", default="cardinal", help="gaussian: cardinal or general")
    cv.add_argument("--out", help="output file (default: stdout)")
    cv.add_argument("--format", default="csv", choices=["csv", "json"])
    cv.add_argument("--timing", action="store_true", help="record wall-clock milliseconds (otherwise 0, for reproducible files)")
    cv.add_argument("--workers", type=int, default=1)

    pr = sub.add_parser(
        "probe",
        help="diagnostic probes",
        description="def11: |beta^d P(z/beta)/P^(d)(0) - cos(z - d pi/2)| against delta_N min(|z|^2,1) h_d(|z|); "
        "rbeta: beta_N^r |int t^(s-1)/((1+(t/u)^2) G_2N(it)) dt| against |v|^mu e^(-pi|v|/2), mu = 3+max(r+d-2,0).",
    )
    _common(pr)
    pr.add_argument("--which", required=True, choices=["def11", "rbeta"])
    pr.add_argument("--grid", type=_floats, help="|z| values (def11, along the imaginary axis and real axis) or v values (rbeta)")
    pr.add_argument("--s", type=float, help="r for rbeta")
    pr.add_argument("--N-list", dest="N_list", type=_ints)
    return p


def config_from_args(ns: argparse.Namespace) -> RunConfig:
    fields = {f.name for f in dataclasses.fields(RunConfig)}
    data = {k: v for k, v in vars(ns).items() if k in fields and v is not None}
    return RunConfig.from_dict(data)


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------


def _fmt(x, digits: int = 17) -> str:
    if isinstance(x, complex):
        return f"{x.real!r}{'+' if x.imag >= 0 else '-'}{abs(x.imag)!r}j"
    if isinstance(x, float):
        return repr(x)
    return format(x, f".{digits}g")


def _knotset(cfg: RunConfig):
    from .polyfamilies import PolyFamily, build_knotset, custom_knots

    kind = cfg.kind
    if cfg.omega:
        return custom_knots(cfg.omega, d=cfg.d)
    if kind in ("omega_squared", "omega_star"):
        if not cfg.family or cfg.N is None:
            raise ValueError(f"{kind} knots need --family and --N")
        return build_knotset(kind, PolyFamily(cfg.family, cfg.d, cfg.N, lam=cfg.lam), u=cfg.u)
    if kind == "cardinal":
        return build_knotset("cardinal", N=cfg.N)
    if kind == "reciprocal":
        return build_knotset("reciprocal", N=cfg.N)
    raise ValueError("custom knots need --omega")


def _cmd_knots(cfg: RunConfig, out, digits: int = 20) -> None:
    ks = _knotset(cfg)
    for v in ks.at(max(cfg.start_bits, 4 * digits)):
        print(_fmt(v, digits), file=out)


def _cmd_eval(cfg: RunConfig, out) -> None:
    from .bspline import eval_assoc, eval_divided_difference

    ks = _knotset(cfg)
    ctx = cfg.precision()
    for t in cfg.grid or []:
        if cfg.assoc:
            v = eval_assoc(ks, t, ctx)
            print(f"t={t} B*_N={_fmt(v.value, 20)} bits={v.precision_bits}", file=out)
        else:
            r = eval_divided_difference(ks, t, ctx)
            print(f"t={t} B_N={_fmt(r.b_value.value, 20)} bits={r.precision_used} interval={r.interval_index}", file=out)


def _cmd_theta(cfg: RunConfig, out) -> None:
    from .thetafn import theta_eval

    for t in cfg.grid or []:
        print(f"Theta_{cfg.d}({t!r}) = {theta_eval(cfg.d, t):.15g}", file=out)


def _cmd_mellin(cfg: RunConfig, out) -> None:
    from .mellin import gn_contour, gn_direct, mellin_theta_closed
    from .polyfamilies import PolyFamily

    if cfg.s is None:
        raise ValueError("--s is required")
    s = complex(cfg.s, cfg.s_imag) if cfg.s_imag else cfg.s
    if not cfg.family:
        if cfg.s_imag:
            raise ValueError("the closed form is implemented for real s")
        print(f"M(Theta_{cfg.d}, {(cfg.s - cfg.d) / 2!r}) = {mellin_theta_closed(cfg.d, (cfg.s - cfg.d) / 2)!r}", file=out)
        return
    if cfg.N is None:
        raise ValueError("--N is required with --family")
    fam = PolyFamily(cfg.family, cfg.d, cfg.N, lam=cfg.lam)
    u = float(_exact(cfg.u))
    if cfg.which in ("contour", "both", None):
        g = gn_contour(fam, u, s)
        print(f"g_N contour = {_fmt(g.value)} err~{g.err_estimate:.3g}", file=out)
    if cfg.which in ("direct", "both"):
        g = gn_direct(fam, u, s, ctx=cfg.precision())
        print(f"g_N direct = {_fmt(g.value)} err~{g.err_estimate:.3g}", file=out)
    if not cfg.s_imag:
        print(f"limit M(Theta_{cfg.d}, sigma) = {mellin_theta_closed(cfg.d, (cfg.s - cfg.d) / 2)!r}", file=out)


def _exact(text: str):
    from fractions import Fraction

    return Fraction(text)


def _cmd_identity(cfg: RunConfig, out) -> None:
    from .experiments import rescaling_check
    from .interp import identity_cor39, identity_prop26

    ctx = cfg.precision()
    if cfg.which == "cor39":
        ks = _knotset(cfg)
        if (cfg.s is None) == (cfg.m is None):
            raise ValueError("give exactly one of --s or --m")
        lhs, rhs, gap = identity_cor39(ks, _exact(cfg.u), s=cfg.s, m=cfg.m, d=cfg.d, ctx=ctx)
    elif cfg.which == "prop26":
        if not cfg.omega or cfg.y is None or cfg.s is None:
            raise ValueError("prop26 needs --omega (zeros of G), --y and --s")
        lhs, rhs, gap = identity_prop26(cfg.omega, cfg.y, cfg.s, ctx)
    else:
        if cfg.N is None:
            raise ValueError("rescale needs --N")
        lam = int(cfg.lam) if cfg.family in (None, "gegenbauer") else (0 if cfg.family == "chebyshev_T" else 1)
        ys = cfg.grid or [0.05 + 0.1 * k for k in range(10)]
        gap = rescaling_check(cfg.N, cfg.d, lam, ys, float(_exact(cfg.u)), ctx)
        print(f"max_rel_gap {gap!r}", file=out)
        return
    print(f"lhs {lhs!r}", file=out)
    print(f"rhs {rhs!r}", file=out)
    print(f"rel_gap {gap!r}", file=out)


def _cmd_converge(cfg: RunConfig):
    from . import experiments as ex
    from .interp import limit_cor24

    ctx = cfg.precision()
    Ns = cfg.N_list
    grid = cfg.grid
    fam = cfg.family or "chebyshev_T"
    u = float(_exact(cfg.u))
    kw_N = {"N_list": Ns} if Ns else {}
    if cfg.which == "theta_pointwise":
        return ex.run_theta_pointwise(fam, cfg.d, None, lambda N: u, grid or ex.DEFAULT_T_GRID, Ns or ex.DEFAULT_N_LIST, ctx, cfg.workers)
    if cfg.which == "conjecture":
        return ex.conjecture_probe(fam, cfg.d, grid or ex.DEFAULT_T_GRID, Ns or (16, 32, 64), cfg.lam, None, ctx, cfg.workers)
    if cfg.which == "theta_mellin":
        pts = grid or [cfg.s if cfg.s is not None else 2.0 + cfg.d]
        s_grid = [complex(p, cfg.s_imag) if cfg.s_imag else p for p in pts]
        return ex.run_theta_mellin(fam, cfg.d, s_grid, Ns or ex.DEFAULT_N_LIST, cfg.lam, None, cfg.workers)
    if cfg.which == "gaussian":
        return ex.run_gaussian(cfg.kind if cfg.kind in ("cardinal", "general") else "cardinal", Ns or (16, 32, 64, 128), grid or (0.0, 1.0, 2.0))
    if cfg.which == "cosh":
        return ex.run_cosh(Ns or (8, 16, 32), grid or (0.0, 1.0, 2.0), ctx)
    if cfg.which == "perfect_spline":
        lam = 1 if fam == "chebyshev_U" else int(cfg.lam)
        return ex.run_perfect_spline(Ns or (16, 32, 64), grid or (1.0, 4.0, 9.0), lam, cfg.d, None, ctx)
    if cfg.which == "cor24":
        return limit_cor24(fam, cfg.d, Ns or (8, 16, 32, 64), s=cfg.s, m=cfg.m, lam=cfg.lam, ctx=ctx)
    raise ValueError(f"unknown experiment {cfg.which!r}")


def _cmd_probe(cfg: RunConfig, out) -> None:
    from .mellin import rbeta_probe
    from .polyfamilies import PolyFamily, def11_probe

    if not cfg.family:
        raise ValueError("--family is required")
    if cfg.which == "def11":
        if cfg.N is None:
            raise ValueError("--N is required")
        fam = PolyFamily(cfg.family, cfg.d, cfg.N, lam=cfg.lam)
        zs = []
        for r in cfg.grid or [0.0, 1.0, 2.0]:
            zs += [complex(r, 0), complex(0, r)] if r else [0j]
        print("z,lhs_error,bound,ratio", file=out)
        for z, err, bound, ratio in def11_probe(fam, zs):
            print(f"{_fmt(z)},{err!r},{bound!r},{ratio!r}", file=out)
        return
    fam = PolyFamily(cfg.family, cfg.d, cfg.N or 10, lam=cfg.lam)
    r = cfg.s if cfg.s is not None else 2.0
    rows = rbeta_probe(fam, float(_exact(cfg.u)), r, cfg.grid or [1.0, 5.0, 10.0, 15.0], N_list=cfg.N_list or (10, 20, 40))
    print("N,v,lhs,envelope,ratio", file=out)
    for row in rows:
        print(f"{row['N']},{row['v']!r},{row['lhs']!r},{row['envelope']!r},{row['ratio']!r}", file=out)


def emit(records, cfg: RunConfig) -> None:
    """Write records as CSV or JSON to ``cfg.out`` (stdout when unset)."""
    from .experiments import records_to_csv, records_to_json

    text = records_to_csv(records, cfg.timing) if cfg.format == "csv" else records_to_json(records, cfg.timing)
    if cfg.out:
        with open(cfg.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _run(cfg: RunConfig, out) -> None:
    if cfg.command == "knots":
        _cmd_knots(cfg, out)
    elif cfg.command == "eval":
        _cmd_eval(cfg, out)
    elif cfg.command == "theta":
        _cmd_theta(cfg, out)
    elif cfg.command == "mellin":
        _cmd_mellin(cfg, out)
    elif cfg.command == "identity":
        _cmd_identity(cfg, out)
    elif cfg.command == "converge":
        emit(_cmd_converge(cfg), cfg)
    elif cfg.command == "probe":
        _cmd_probe(cfg, out)


def dispatch(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        if ns.config:
            with open(ns.config, encoding="utf-8") as fh:
                cfg = RunConfig.from_json(fh.read())
        elif ns.command is None:
            parser.print_usage(sys.stderr)
            return EXIT_INVALID
        else:
            if getattr(ns, "t", None) is not None:
                ns.grid = [float(v) for v in ns.t] if ns.command == "theta" else [str(v) for v in ns.t]
            cfg = config_from_args(ns)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", UserWarning)
            _run(cfg, sys.stdout)
    except (PrecisionExhausted, NonConvergent) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ArithmeticError as exc:
        # zero certification and series-regime failures are numeric too
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (ValueError, TypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    return EXIT_OK


def main(argv: Sequence[str] | None = None) -> None:
    sys.exit(dispatch(argv))
