"""Command-line interface.

Every subcommand writes CSV (or JSON where noted) to ``--out`` or standard
output.  Exit status is 0 on success, 1 for invalid usage or input and 2
when a computation fails.
"""

import argparse
import json
import math
import sys
import traceback

import numpy as np

from . import coverage as cov
from . import distfit, fitting, interference, montecarlo, pointproc, samplers, specfun
from .eigen import backward_error, backward_error_bound, eigenvalues_complex
from .errors import BetaGppError, DomainError, LoadError
from .windows import RectWindow

EXIT_OK, EXIT_USAGE, EXIT_COMPUTE = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def parse_grid(text):
    """``start:step:stop`` (inclusive) or a comma-separated list of numbers."""
    try:
        if ":" in text:
            start, step, stop = (float(p) for p in text.split(":"))
            if step <= 0 or stop < start:
                raise ValueError
            n = int(math.floor((stop - start) / step + 1e-9)) + 1
            return [round(start + i * step, 12) for i in range(n)]
        vals = [float(p) for p in text.split(",") if p.strip()]
        if not vals:
            raise ValueError
        return vals
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid grid {text!r}; use start:step:stop") from None


def _positive_int(text):
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {v}")
    return v


def _seed(text):
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer seed, got {text!r}") from None
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must lie in [0, 2**64)")
    return v


def _metric(text):
    for name in fitting.METRICS:
        if text.lower() == name.lower():
            return name
    return text


def _fmt(x):
    return f"{x:.10g}"


def _csv(header, rows):
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(v if isinstance(v, str) else _fmt(float(v)) for v in row))
    return "\n".join(lines) + "\n"


def _json(obj):
    return json.dumps(obj, indent=2, sort_keys=True, allow_nan=True) + "\n"


# ---------------------------------------------------------------- stats

def _stats(args):
    r = np.linspace(0.0, args.rmax, args.points)
    if args.process in ("MHCP_I", "MHCP_II"):
        if args.curve != "K":
            raise DomainError("only the K curve is available for hard-core processes")
        variant = "I" if args.process == "MHCP_I" else "II"
        model = pointproc.MhcpModel.matched(pointproc.GppModel(args.beta, args.c).intensity,
                                            args.delta, variant)
        vals = [float(pointproc.mhcp_k_function(model, x)) for x in r]
        return _csv(["r", "value"], zip(r, vals))
    if args.process == "PPP":
        if args.curve != "K":
            raise DomainError("only the K curve is available for the PPP")
        return _csv(["r", "value"], zip(r, math.pi * r * r))
    model = pointproc.GppModel(args.beta, args.c)
    if args.empirical:
        sample = samplers.sample_planar_gpp(model, args.n, args.seed, backend=args.backend)
        grid = r
        if args.curve == "K":
            curve = montecarlo.empirical_k(sample, grid)
        elif args.curve in ("F", "G", "J"):
            f, g, j = montecarlo.empirical_fgj(sample, grid, seed=args.seed)
            curve = {"F": f, "G": g, "J": j}[args.curve]
        else:
            raise DomainError("empirical curves are K, F, G and J")
        return curve.to_csv()
    if args.curve == "K":
        vals = pointproc.k_function(model, r)
    elif args.curve == "L":
        vals = pointproc.l_function(model, r)
    elif args.curve == "Ltilde":
        r = r[r > 0]
        vals = pointproc.l_tilde(model, r)
    elif args.curve == "pcf":
        vals = pointproc.pair_correlation(model, r)
    elif args.curve == "rho2":
        vals = pointproc.second_moment_density(model, r)
    elif args.curve == "J":
        vals = pointproc.j_function(model, r)
    else:
        fn = pointproc.empty_space_f if args.curve == "F" else pointproc.nearest_neighbor_g
        rows = [(x, fn(model, x, args.kmax), pointproc.product_truncation_bound(model, x, args.kmax))
                for x in r]
        return _csv(["r", "value", "truncation_bound"], rows)
    return _csv(["r", "value"], zip(r, np.atleast_1d(vals)))


# --------------------------------------------------------- interference

def _interference(args):
    betas = args.beta_grid or [args.beta]
    header = ["beta", "c", "r0", "alpha", "method", "mean", "variance", "mean_se", "variance_se"]
    rows = []
    pl = interference.PathLoss(args.r0, args.alpha)
    for beta in betas:
        model = pointproc.GppModel(beta, args.c)
        base = [beta, args.c, args.r0, args.alpha]
        if "closed" in args.method and args.r0 == 0.0:
            # unbounded path loss: finite mean for 2 < alpha < 4, variance bound for alpha < 2
            mean = (interference.mean_interference_unbounded(model, args.alpha)
                    if 2.0 < args.alpha < 4.0 else math.inf)
            var = (interference.variance_bound_unbounded(model, args.alpha)
                   if args.alpha < 2.0 else math.inf)
            rows.append(base + ["closed_unbounded", mean, var, 0.0, 0.0])
        elif "closed" in args.method:
            mean = (interference.mean_interference(model, pl) if args.alpha > 2 else math.inf)
            if args.alpha == 4.0:
                var = interference.variance_interference_alpha4(model, args.r0, args.kmax)
            else:
                var = interference.variance_interference(model, pl, args.kmax, args.gamma_form).variance
            rows.append(base + ["closed", mean, var, 0.0, 0.0])
        if "quadrature" in args.method:
            mean = (interference.mean_interference_quadrature(model, pl) if args.alpha > 2
                    else math.inf)
            var = interference.variance_interference_quadrature(model, pl)
            rows.append(base + ["quadrature", mean, var, 0.0, 0.0])
        if "mc" in args.method:
            m, v, _ = montecarlo.mc_interference(model, pl, reps=args.reps, seed=args.seed,
                                                 threads=args.threads)
            rows.append(base + ["mc", m.estimate, v.estimate, m.std_error, v.std_error])
        if "ppp" in args.method:
            mean = interference.ppp_mean_interference(model.c, pl)
            rows.append(base + ["ppp", mean, math.nan, 0.0, 0.0])
        if "mhcp" in args.method:
            for variant in ("I", "II"):
                hc = pointproc.MhcpModel.matched(model.intensity, args.delta, variant)
                rows.append(base + [f"mhcp_{variant}", interference.mhcp_mean_interference(hc, pl),
                                    math.nan, 0.0, 0.0])
    return _csv(header, rows)


# -------------------------------------------------------------- distfit

def _distfit(args):
    model = pointproc.GppModel(args.beta, args.c)
    pl = interference.PathLoss(args.r0, args.alpha)
    _, _, hist = montecarlo.mc_interference(model, pl, reps=args.reps, seed=args.seed,
                                            threads=args.threads)
    mean = interference.mean_interference(model, pl)
    var = interference.variance_interference(model, pl).variance
    fits = {fam: distfit.fit_by_moments(mean, var, fam) for fam in distfit.FAMILIES}
    if args.format == "json":
        out = {"mean": mean, "variance": var, "bins": len(hist.grid), "families": {}}
        for fam, fd in fits.items():
            m_fit, v_fit = distfit.moments(fd)
            out["families"][fam] = {"params": fd.params, "score": distfit.fit_score(fd, hist),
                                    "mean": m_fit, "variance": v_fit}
        out["ranking"] = [f for f, _ in distfit.rank_families(mean, var, hist)]
        return _json(out)
    x = hist.grid
    pos = x > 0
    cols = [x[pos], hist.values[pos]] + [distfit.pdf(fits[f], x[pos]) for f in distfit.FAMILIES]
    return _csv(["x", "histogram", "gamma", "inverse_gaussian", "inverse_gamma"], zip(*cols))


# ------------------------------------------------------------- coverage

def _coverage(args):
    model = pointproc.GppModel(args.beta, args.c)
    grid = args.theta_db
    if any(b <= a for a, b in zip(grid[:-1], grid[1:])):
        raise DomainError("theta grid must be strictly increasing")
    cfg = cov.SinrConfig(1.0, args.sigma2, args.mu, args.alpha)
    if args.method == "integrand":
        # outer integrand over s at every threshold of the grid
        s_grid = args.s_grid
        rows = [[t, s, cov.coverage_integrand(model, cfg.with_theta(float(cov.db_to_linear(t))),
                                              s, form=args.form)]
                for t in grid for s in s_grid]
        return _csv(["theta_db", "s", "integrand"], rows)
    header = ["theta_db"]
    cols = [grid]
    if args.method in ("analytic", "both"):
        curve = cov.coverage_curve(model, cfg, grid, form=args.form)
        header.append("probability")
        cols.append([p for _, p in curve])
    if args.method in ("mc", "both"):
        reps = montecarlo.mc_coverage(model, cfg, reps=args.reps, seed=args.seed,
                                      thetas=cov.db_to_linear(grid), threads=args.threads)
        header += ["mc", "mc_se"]
        cols += [[r.estimate for r in reps], [r.std_error for r in reps]]
    if args.method == "ppp":
        header.append("probability")
        cols.append([cov.ppp_coverage_probability(float(cov.db_to_linear(t)), args.alpha)
                     for t in grid])
    return _csv(header, zip(*cols))


# --------------------------------------------------------------- sample

def _window(text):
    try:
        xmin, ymin, xmax, ymax = (float(p) for p in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError("window must be xmin,ymin,xmax,ymax") from None
    try:
        return RectWindow(xmin, ymin, xmax, ymax)
    except DomainError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _sample(args):
    if args.radial:
        model = pointproc.GppModel(args.beta, args.c)
        fn = samplers.sample_radial_palm if args.palm else samplers.sample_radial
        s = fn(model, args.kmax, args.seed, args.radius)
        if args.fading:
            gains = samplers.sample_fading(len(s.squared_moduli), args.mu, args.seed)
            return _csv(["squared_modulus", "fading"], zip(s.squared_moduli, gains))
        return _csv(["squared_modulus"], ([q] for q in s.squared_moduli))
    if args.process == "GPP":
        model = pointproc.GppModel(args.beta, args.c)
        s = samplers.sample_planar_gpp(model, args.n, args.seed, args.margin, args.shape,
                                       args.backend)
    elif args.process == "PPP":
        s = samplers.sample_ppp(args.c / math.pi, args.window, args.seed)
    else:
        variant = "I" if args.process == "MHCP_I" else "II"
        model = pointproc.MhcpModel.matched(args.c / math.pi, args.delta, variant)
        s = samplers.sample_mhcp(model, args.window, args.seed)
    return s.to_csv()


# ------------------------------------------------------------------ fit

def _fit(args):
    dep = fitting.load_deployment(args.data, args.region)
    cfg = fitting.FitConfig(alpha=args.alpha, sigma2=args.sigma2, mc_reps=args.reps,
                            locations=args.locations, threads=args.threads,
                            theta_db=tuple(args.theta_db))
    grid = fitting.default_beta_grid(args.step)
    res = fitting.fit_beta(dep, args.metric, grid, cfg, args.seed)
    if args.curve_out:
        res.curve_csv(args.curve_out)
    return res.to_json()


# ------------------------------------------------------------- selftest

def _selftest(args):
    """Quick oracle checks; one line per check."""
    lines = []
    ok_all = True

    def check(name, ok, detail):
        nonlocal ok_all
        ok_all &= bool(ok)
        lines.append(f"{'PASS' if ok else 'FAIL'} {name}: {detail}")

    worst = 0.0
    for beta in (0.25, 0.5, 1.0):
        for c in (0.2, 1.0, 5.0):
            for alpha in (2.5, 3.0, 4.0):
                m = pointproc.GppModel(beta, c)
                pl = interference.PathLoss(1.0, alpha)
                a = interference.mean_interference(m, pl)
                b = interference.mean_interference_quadrature(m, pl)
                worst = max(worst, abs(a - b))
    check("mean closed form vs quadrature", worst < 1e-8, f"max abs diff {worst:.3e}")
    m = pointproc.GppModel(1.0, 1.0)
    pl = interference.PathLoss(1.0, 4.0)
    v = interference.variance_interference(m, pl).variance
    q = interference.variance_interference_quadrature(m, pl)
    check("variance closed form vs quadrature", abs(v - q) / v < 1e-3,
          f"{v:.8f} vs {q:.8f}")
    worst = 0.0
    for beta in (0.25, 0.5, 1.0):
        for c in (0.2, 1.0, 5.0):
            mm = pointproc.GppModel(beta, c)
            worst = max(worst,
                        abs(interference.mean_interference_alpha4(mm, 1.0)
                            - interference.mean_interference(mm, pl)),
                        abs(interference.variance_interference_alpha4(mm, 1.0)
                            - interference.variance_interference(mm, pl).variance))
    check("alpha = 4 forms vs general forms", worst < 1e-10, f"max abs diff {worst:.3e}")
    c1 = interference.mean_interference_unbounded(m, 3.0)
    check("unbounded mean at alpha = 3", abs(c1 - 2.0 * math.sqrt(math.pi)) < 1e-10, f"{c1:.12f}")
    gap = interference.ppp_gap(m, pl)
    direct = interference.ppp_mean_interference(1.0, pl) - interference.mean_interference(m, pl)
    check("PPP gap", abs(gap - direct) < 1e-12, f"{gap:.12f}")
    pts = np.array([0.0, 0.3 + 0.1j, -0.2 + 0.5j])
    det = pointproc.kernel_determinant(m, pts)
    rho3 = pointproc.third_moment_density(m, pts[1] - pts[0], pts[2] - pts[0])
    check("third moment vs kernel determinant", abs(det - rho3) < 1e-12 * abs(det),
          f"{rho3:.6e}")
    x = 2.3
    rec = abs(specfun.upper_gamma(-0.4, x)
              - (specfun.upper_gamma(0.6, x) - x**-0.4 * math.exp(-x)) / -0.4)
    comp = abs(specfun.reg_lower_gamma(3.5, x) + specfun.reg_upper_gamma(3.5, x) - 1.0)
    ei = abs(specfun.expint_ei(-x) + specfun.expint_e1(x))
    seq = float(np.max(np.abs(specfun.reg_lower_gamma_seq(40, x)
                              + specfun.reg_upper_gamma_seq(40, x) - 1.0)))
    lg = abs(specfun.log_gamma(5.0) - math.log(24.0))
    check("special functions", max(rec, comp, ei, seq, lg) < 1e-12,
          f"max residual {max(rec, comp, ei, seq, lg):.2e}")
    rng_a = np.random.default_rng(args.seed)
    a = rng_a.standard_normal((24, 24)) + 1j * rng_a.standard_normal((24, 24))
    lams = eigenvalues_complex(a)
    berr = max(backward_error(a, lam) for lam in lams)
    bound = float(np.max(backward_error_bound(a, lams)))
    check("eigensolver backward error", max(berr, bound) <= 1e-10,
          f"exact {berr:.2e}, bound {bound:.2e}")
    cprob = cov.coverage_probability(pointproc.GppModel(1.0, 1.0), cov.SinrConfig(1.0)).probability
    ms = cov.ms_product(m, cov.SinrConfig(1.0), 1.5, 60, 40)
    direct_sp = cov.direct_sum_product(m, cov.SinrConfig(1.0), 1.5, 60, 40)
    check("coverage factorization", abs(ms - direct_sp) < 1e-10 * abs(direct_sp),
          f"{ms:.12e}")
    ppp = cov.ppp_coverage_probability(1.0, 4.0)
    check("coverage ordering GPP > PPP at 0 dB", cprob > ppp, f"{cprob:.6f} > {ppp:.6f}")
    f = pointproc.empty_space_f(m, 0.7)
    g = pointproc.nearest_neighbor_g(m, 0.7)
    j = pointproc.j_function(m, 0.7)
    check("J = (1 - G)/(1 - F)", abs((1 - g) / (1 - f) - j) < 1e-12, f"{j:.12f}")
    hc = pointproc.MhcpModel.matched(m.intensity, 0.5, "II")
    k_hc = pointproc.mhcp_k_function(hc, 0.25)
    check("hard-core K vanishes below delta", k_hc == 0.0, f"{k_hc}")
    check("retention factor", abs(pointproc.mhcp_retention(hc, 1.5)
                                  - (hc.intensity / hc.lambda_p) ** 2) < 1e-12,
          f"{float(pointproc.mhcp_retention(hc, 1.5)):.12f}")
    check("union area at distance 2 delta", abs(pointproc.mhcp_union_area(1.0, 2.0)
                                                 - 2.0 * math.pi) < 1e-12, "2 pi")
    if args.reps:
        mpl = interference.PathLoss(1.0, 4.0)
        mr, vr, _ = montecarlo.mc_interference(m, mpl, reps=args.reps, seed=args.seed,
                                               threads=args.threads)
        mean = interference.mean_interference(m, mpl)
        z = (mr.estimate - mean) / mr.std_error
        check("Monte Carlo mean within 3 SE", abs(z) < 3, f"z = {z:.2f}")
        zv = (vr.estimate - v) / vr.std_error
        check("Monte Carlo variance within 3 SE", abs(zv) < 3, f"z = {zv:.2f}")
    text = "\n".join(lines) + "\n"
    return text, ok_all


# --------------------------------------------------------------- parser

def build_parser():
    common = _Parser(add_help=False)
    common.add_argument("--seed", type=_seed, default=0, help="master seed (default 0)")
    common.add_argument("--threads", type=_positive_int, default=1,
                        help="worker threads; results do not depend on it")
    common.add_argument("--out", default="-", help="output file (default: standard output)")

    p = _Parser(prog="betagpp", description="beta-Ginibre point process models of wireless networks")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("stats", parents=[common], help="K, L, F, G, J curves")
    s.add_argument("--beta", type=float, default=1.0)
    s.add_argument("--c", type=float, default=1.0)
    s.add_argument("--curve", choices=["K", "L", "Ltilde", "F", "G", "J", "pcf", "rho2"],
                   default="K")
    s.add_argument("--rmax", type=float, default=5.0)
    s.add_argument("--points", type=_positive_int, default=101)
    s.add_argument("--kmax", type=_positive_int, default=None)
    s.add_argument("--process", choices=["GPP", "PPP", "MHCP_I", "MHCP_II"], default="GPP")
    s.add_argument("--delta", type=float, default=1.0, help="hard-core distance")
    s.add_argument("--empirical", action="store_true", help="estimate from a planar sample")
    s.add_argument("--n", type=_positive_int, default=1024, help="matrix order for --empirical")
    s.add_argument("--backend", choices=["lapack", "qr"], default="lapack")
    s.set_defaults(func=_stats)

    s = sub.add_parser("interference", parents=[common], help="interference mean and variance")
    s.add_argument("--beta", type=float, default=1.0)
    s.add_argument("--beta-grid", type=parse_grid, default=None, help="start:step:stop")
    s.add_argument("--c", type=float, default=1.0)
    s.add_argument("--r0", type=float, default=1.0)
    s.add_argument("--alpha", type=float, default=4.0)
    s.add_argument("--method", type=lambda t: t.split(","), default=["closed"],
                   help="comma list of closed, quadrature, mc, ppp, mhcp")
    s.add_argument("--kmax", type=_positive_int, default=interference.DEFAULT_KMAX)
    s.add_argument("--gamma-form", choices=["incomplete", "complete"], default="incomplete")
    s.add_argument("--reps", type=_positive_int, default=10**6)
    s.add_argument("--delta", type=float, default=1.0, help="hard-core distance for mhcp")
    s.set_defaults(func=_interference)

    s = sub.add_parser("distfit", parents=[common], help="histogram and fitted densities")
    s.add_argument("--beta", type=float, default=1.0)
    s.add_argument("--c", type=float, default=1.0)
    s.add_argument("--r0", type=float, default=1.0)
    s.add_argument("--alpha", type=float, default=4.0)
    s.add_argument("--reps", type=_positive_int, default=10**6)
    s.add_argument("--format", choices=["csv", "json"], default="csv")
    s.set_defaults(func=_distfit)

    s = sub.add_parser("coverage", parents=[common], help="coverage probability curves")
    s.add_argument("--beta", type=float, default=1.0)
    s.add_argument("--c", type=float, default=1.0)
    s.add_argument("--alpha", type=float, default=4.0)
    s.add_argument("--sigma2", type=float, default=0.0)
    s.add_argument("--mu", type=float, default=1.0)
    s.add_argument("--theta-db", type=parse_grid, default=parse_grid("-10:1:20"))
    s.add_argument("--method", choices=["analytic", "mc", "both", "ppp", "integrand"],
                   default="analytic")
    s.add_argument("--s-grid", type=parse_grid, default=parse_grid("0.05:0.05:10"),
                   help="normalized squared distances for --method integrand")
    s.add_argument("--form", choices=["exact", "near_dropped"], default="exact")
    s.add_argument("--reps", type=_positive_int, default=10**5)
    s.set_defaults(func=_coverage)

    s = sub.add_parser("sample", parents=[common], help="emit point sets")
    s.add_argument("--process", choices=["GPP", "PPP", "MHCP_I", "MHCP_II"], default="GPP")
    s.add_argument("--beta", type=float, default=1.0)
    s.add_argument("--c", type=float, default=1.0)
    s.add_argument("--n", type=_positive_int, default=1024)
    s.add_argument("--margin", type=float, default=samplers.DEFAULT_MARGIN)
    s.add_argument("--shape", choices=["disk", "square"], default="disk")
    s.add_argument("--backend", choices=["lapack", "qr"], default="lapack")
    s.add_argument("--window", type=_window, default=RectWindow(0.0, 0.0, 20.0, 20.0),
                   help="xmin,ymin,xmax,ymax for PPP and MHCP")
    s.add_argument("--delta", type=float, default=1.0)
    s.add_argument("--radial", action="store_true", help="squared moduli instead of points")
    s.add_argument("--palm", action="store_true")
    s.add_argument("--fading", action="store_true", help="add exponential fading gains (--radial)")
    s.add_argument("--mu", type=float, default=1.0, help="fading rate for --fading")
    s.add_argument("--kmax", type=_positive_int, default=64)
    s.add_argument("--radius", type=float, default=None)
    s.set_defaults(func=_sample)

    s = sub.add_parser("fit", parents=[common], help="fit beta to a deployment (JSON)")
    s.add_argument("--data", required=True, help="CSV with x,y in metres")
    s.add_argument("--region", required=True, help="JSON with xmin, ymin, xmax, ymax, label")
    s.add_argument("--metric", type=_metric, choices=list(fitting.METRICS), default="J",
                   help="L, J or Coverage (case-insensitive)")
    s.add_argument("--alpha", type=float, default=4.0)
    s.add_argument("--sigma2", type=float, default=0.0)
    s.add_argument("--theta-db", type=parse_grid, default=parse_grid("-10:1:20"))
    s.add_argument("--step", type=float, default=0.025)
    s.add_argument("--reps", type=_positive_int, default=10**5)
    s.add_argument("--locations", type=_positive_int, default=10**5)
    s.add_argument("--curve-out", default=None, help="also write the error curve as CSV")
    s.set_defaults(func=_fit)

    s = sub.add_parser("selftest", parents=[common], help="quick oracle checks")
    s.add_argument("--reps", type=int, default=0, help="Monte Carlo replications (0 skips)")
    s.set_defaults(func=_selftest)
    return p


def _origin(exc):
    """Module and function where the exception was raised."""
    frames = traceback.extract_tb(exc.__traceback__)
    for fr in reversed(frames):
        if "betagpp" in fr.filename and not fr.filename.endswith("cli.py"):
            mod = fr.filename.rsplit("/", 1)[-1].removesuffix(".py")
            return f"{mod}.{fr.name}"
    return "cli"


def _write(text, dest):
    if dest == "-":
        sys.stdout.write(text)
        sys.stdout.flush()
    else:
        with open(dest, "w", encoding="ascii", newline="\n") as fh:
            fh.write(text)


_GRID_FLAGS = ("--theta-db", "--beta-grid", "--s-grid")


def _join_grid_values(argv):
    """Attach values such as ``-10:1:20`` to their flag so they are not read as options."""
    out = []
    it = iter(argv)
    for tok in it:
        if tok in _GRID_FLAGS:
            nxt = next(it, None)
            out.append(tok if nxt is None else f"{tok}={nxt}")
        else:
            out.append(tok)
    return out


def run(argv=None):
    """Entry point; returns the exit status."""
    parser = build_parser()
    argv = _join_grid_values(sys.argv[1:] if argv is None else list(argv))
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        sys.stderr.write(f"{exc}\n")
        return EXIT_USAGE
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    try:
        result = args.func(args)
        status = EXIT_OK
        if isinstance(result, tuple):
            result, passed = result
            status = EXIT_OK if passed else EXIT_COMPUTE
        _write(result, args.out)
        return status
    except (DomainError, LoadError) as exc:
        sys.stderr.write(f"betagpp: invalid input [{_origin(exc)}]: {exc}\n")
        return EXIT_USAGE
    except OSError as exc:
        sys.stderr.write(f"betagpp: cannot write output: {exc}\n")
        return EXIT_USAGE
    except (BetaGppError, ArithmeticError, np.linalg.LinAlgError) as exc:
        sys.stderr.write(f"betagpp: computation failed [{_origin(exc)}]: {exc}\n")
        return EXIT_COMPUTE
    except Exception as exc:  # noqa: BLE001 - reported, not swallowed
        sys.stderr.write(f"betagpp: internal error [{_origin(exc)}]: "
                         f"{type(exc).__name__}: {exc}\n")
        return EXIT_COMPUTE


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
