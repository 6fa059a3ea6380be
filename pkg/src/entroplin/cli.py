"""``entroplin`` command line.

Exit codes: 0 success, 1 domain or usage error, 2 I/O error.
"""

from __future__ import annotations

import argparse
import math
import sys
import time

import numpy as np

from . import harness, io, stats
from .errors import EntroplinError
from .estimate import EstimatorConfig, bandwidth_for, get_kernel, quadratic_estimate, quadratic_estimate_fast
from .model import (
    CoefficientSequence,
    Gaussian,
    LinearProcessModel,
    SymmetricAlphaStable,
    coeff_power_sum,
    renyi_entropy,
    true_quadratic_functional,
)
from .simulate import simulate


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.format_usage()}{self.prog}: error: {message}")


# --------------------------------------------------------------------------
# argument helpers


def _floats(text):
    text = text.strip()
    return [float(v) for v in text.split(",")] if text else []


def _bandwidth(text):
    rules = {"auto-thm1": "thm1", "auto-thm2": "thm2", "paper": "paper"}
    if text in rules:
        return rules[text]
    try:
        return float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(
            f"bandwidth must be auto-thm1, auto-thm2, paper or a number, got {text!r}"
        ) from None


def _add_common(p):
    g = p.add_argument_group("common")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--n", type=int, default=1024, help="path length")
    g.add_argument("--m", type=int, default=200, help="replications")
    g.add_argument("--kernel", default="gaussian", choices=["gaussian", "epanechnikov"])
    g.add_argument("--bandwidth", type=_bandwidth, default="paper", help="auto-thm1, auto-thm2, paper or h")
    g.add_argument("--gamma", type=float, default=1.0, help="regularity exponent for auto bandwidths")
    g.add_argument("--out", help="write the report here")
    g.add_argument("--format", default="text", choices=["text", "json", "csv"])
    g.add_argument("--workers", type=int, default=None, help="threads (default: ENTROPLIN_THREADS or all)")


def _add_model(p, suffix=""):
    g = p.add_argument_group(f"model{suffix}")
    g.add_argument(f"--d{suffix}", type=float, default=None, help="FARIMA(0,d,0) memory parameter")
    g.add_argument(f"--coeffs{suffix}", type=_floats, default=None, help="explicit MA weights a0,a1,...")
    g.add_argument(f"--ar{suffix}", type=_floats, default=None, help="causal ARMA AR coefficients")
    g.add_argument(f"--ma{suffix}", type=_floats, default=None, help="causal ARMA MA coefficients")
    g.add_argument(f"--innov{suffix}", choices=["gaussian", "sas"], default=None if suffix else "gaussian")
    g.add_argument(f"--alpha{suffix}", type=float, default=None)
    g.add_argument(f"--sigma{suffix}", type=float, default=None)
    g.add_argument(f"--scale{suffix}", type=float, default=None)
    if not suffix:
        g.add_argument("--trunc", type=int, default=None, help="MA truncation M")
        g.add_argument("--tail-fraction", type=float, default=1e-4)


def _model_from(args, suffix=""):
    # the second model inherits unset flags from the first, but the
    # coefficient flags only as a group
    own_coeffs = suffix and any(getattr(args, f"{k}{suffix}") is not None for k in ("d", "coeffs", "ar", "ma"))

    def get(name, fallback=None):
        v = getattr(args, f"{name}{suffix}")
        if v is None and suffix and not (own_coeffs and name in ("d", "coeffs", "ar", "ma")):
            v = getattr(args, name)
        return fallback if v is None else v

    d, coeffs, ar, ma = get("d"), get("coeffs"), get("ar"), get("ma")
    if sum(x is not None for x in (d, coeffs)) + (ar is not None or ma is not None) > 1:
        raise UsageError("choose one of --d, --coeffs or --ar/--ma")
    if d is not None:
        cs = CoefficientSequence.farima(d)
    elif coeffs is not None:
        cs = CoefficientSequence.explicit(coeffs)
    elif ar is not None or ma is not None:
        cs = CoefficientSequence.arma(ar or (), ma or ())
    else:
        cs = CoefficientSequence.explicit([1.0])
    if get("innov", "gaussian") == "gaussian":
        fam = Gaussian(get("sigma", 1.0))
    else:
        alpha = get("alpha")
        if alpha is None:
            raise UsageError("--innov sas needs --alpha")
        fam = SymmetricAlphaStable(alpha, get("scale", 1.0))
    return LinearProcessModel(cs, fam)


def _emit(args, report, lines):
    fmt = args.format
    if args.out:
        io.write_report(report, "json" if fmt == "text" else fmt, args.out)
    if fmt == "json" and not args.out:
        sys.stdout.write(io.report_to_json(report))
    elif fmt == "csv" and not args.out:
        raise UsageError("--format csv writes several files; pass --out")
    else:
        for line in lines:
            print(line)


def _inputs(args):
    skip = {"func", "out", "format", "workers"}
    return {k: v for k, v in sorted(vars(args).items()) if k not in skip}


def _num(v):
    return f"{v:.4f}  [{v!r}]"


# --------------------------------------------------------------------------
# subcommands


def cmd_truevalue(args):
    model = _model_from(args)
    t0 = time.perf_counter()
    q = true_quadratic_functional(model, mode=args.mode, n_terms=args.terms)
    r = renyi_entropy(q)
    s = coeff_power_sum(model.coeffs, model.innovations.sum_power, mode=args.mode, n_terms=args.terms)
    res = {"q": q, "renyi": r, "power_sum": s, "mode": args.mode}
    rep = io.Report("truevalue", _inputs(args), res, {"seconds": time.perf_counter() - t0})
    _emit(args, rep, [f"model      {model.describe()}", f"Q          {_num(q)}", f"Renyi      {_num(r)}"])


def _config(args, n):
    return EstimatorConfig(bandwidth_for(args.bandwidth, n, args.gamma), get_kernel(args.kernel))


def _read(path, column):
    return io.read_series_csv(path, column).values


def cmd_estimate(args):
    t0 = time.perf_counter()
    res = {}
    if args.series:
        xs = _read(args.series, args.column)
    else:
        model = _model_from(args)
        xs = simulate(model, args.n, seed=args.seed, truncation_m=args.trunc, tail_fraction=args.tail_fraction)
        res["q_true"] = true_quadratic_functional(model)
    cfg = _config(args, xs.size)
    est = quadratic_estimate_fast if args.estimator == "fast" else quadratic_estimate
    t = est(xs, cfg, workers=args.workers)
    res.update({"n": int(xs.size), "bandwidth": cfg.bandwidth, "t_n": t})
    lines = [f"n          {xs.size}", f"h          {cfg.bandwidth:.6g}", f"T_n        {_num(t)}"]
    if cfg.kernel.nonnegative:
        res["renyi"] = -math.log(1.0 / xs.size + t)
        lines.append(f"Renyi      {_num(res['renyi'])}")
    if "q_true" in res:
        lines.append(f"Q (true)   {_num(res['q_true'])}")
    rep = io.Report("estimate", _inputs(args), res, {"seconds": time.perf_counter() - t0})
    _emit(args, rep, lines)


def cmd_clt(args):
    if args.paper_scale:
        args.n, args.m = 4096, 1000
    spec = harness.ExperimentSpec(
        _model_from(args),
        n=args.n,
        m=args.m,
        bandwidth=args.bandwidth,
        gamma=args.gamma,
        kernel=args.kernel,
        seed=args.seed,
        truncation_m=args.trunc,
        tail_fraction=args.tail_fraction,
        estimator=args.estimator,
        centering=args.centering,
    )
    t0 = time.perf_counter()
    rep_obj = harness.run_clt_experiment(spec, workers=args.workers, level=args.level, bins=args.bins)
    nr = rep_obj.normality
    rep = io.Report("clt", _inputs(args), rep_obj.to_dict(), {"seconds": time.perf_counter() - t0})
    _emit(args, rep, [
        f"Q (true)          {_num(rep_obj.q_true)}",
        f"mean T_n          {_num(rep_obj.mean_t_estimate)}",
        f"mean r_n          {nr.sample_mean:.6g}  (sd {nr.sample_sd:.6g})",
        f"t test p-value    {nr.p_value:.4f}",
        f"{nr.level:.0%} CI            [{nr.ci_low:.6g}, {nr.ci_high:.6g}]",
        f"Jarque-Bera       {nr.jarque_bera_stat:.4g}  (p {nr.jarque_bera_p:.4g})",
    ])


def cmd_divergence(args):
    t0 = time.perf_counter()
    if args.series:
        xs = _read(args.series[0], args.column)
        ys = _read(args.series[1], args.column)
        study = harness.divergence_of_series(xs, ys, args.bandwidth, args.kernel)
        lines = [f"h          {study.bandwidth:.6g}", f"D_hat      {_num(study.estimate)}"]
    else:
        f = _model_from(args)
        g = _model_from(args, "2")
        study = harness.run_divergence_study(
            f, g, n=args.n, m=args.m, bandwidth=args.bandwidth, kernel=args.kernel, seed=args.seed,
            truncation_m=args.trunc, tail_fraction=args.tail_fraction, workers=args.workers,
        )
        lines = [
            f"h               {study.bandwidth:.6g}",
            f"mean D_hat      {_num(study.estimate)}",
            f"95% CI          [{study.ci_low:.6g}, {study.ci_high:.6g}]",
        ]
        if study.true_value is not None:
            lines.append(f"D (true)        {_num(study.true_value)}")
    rep = io.Report("divergence", _inputs(args), study.to_dict(), {"seconds": time.perf_counter() - t0})
    _emit(args, rep, lines)


def cmd_classify(args):
    model = _model_from(args)
    mc = model.memory_class()
    res = {"label": mc.label.value, "evidence": mc.evidence, "criterion": mc.criterion}
    rep = io.Report("classify", _inputs(args), res, {})
    _emit(args, rep, [mc.label.value, f"  {mc.evidence}"])


def cmd_analyze(args):
    t0 = time.perf_counter()
    sf = io.read_series_csv(args.series, args.column)
    xs = sf.values
    lags = "auto" if args.lags == "auto" else int(args.lags)
    kp = stats.kpss_level(xs, lags)
    max_lag = min(args.max_lag, xs.size - 1)
    r = stats.acf(xs, max_lag)
    grid, dens, bw = stats.kde_curve(xs)
    counts, edges = np.histogram(xs, bins=args.bins)
    res = {
        "n": int(xs.size),
        "mean": float(np.mean(xs)),
        "sd": float(np.std(xs, ddof=1)),
        "kpss": {"statistic": kp.statistic, "lags": kp.lags, "critical_5pct": kp.critical_value,
                 "verdict": kp.verdict},
        "acf_bound_95": 1.96 / math.sqrt(xs.size),
        "kde_bandwidth": bw,
        "tables": {
            "acf": {"lag": list(range(max_lag + 1)), "acf": r},
            "kde": {"x": grid, "density": dens},
            "histogram": {"edge_lo": edges[:-1], "edge_hi": edges[1:], "count": counts},
        },
    }
    rep = io.Report("analyze", _inputs(args), res, {"seconds": time.perf_counter() - t0})
    _emit(args, rep, [
        f"n          {xs.size}",
        f"KPSS       {kp.statistic:.4f} (L={kp.lags}, 5% critical {kp.critical_value}) -> {kp.verdict}",
        "ACF        " + " ".join(f"{v:.3f}" for v in r[1 : min(11, r.size)]),
    ])


def cmd_probe(args):
    t0 = time.perf_counter()
    model = _model_from(args)
    if args.probe == "hajek":
        spec = harness.ExperimentSpec(
            model, n=max(args.n_grid), m=args.m, bandwidth=args.bandwidth, gamma=args.gamma,
            kernel=args.kernel, seed=args.seed, truncation_m=args.trunc, tail_fraction=args.tail_fraction,
        )
        tab = harness.hajek_residual_probe(spec, args.n_grid, workers=args.workers)
        lines = ["n        h          MSE          ratio"]
        for n, h, mse, ratio in zip(tab.n, tab.bandwidth, tab.mse, tab.ratio):
            lines.append(f"{n:<8d} {h:<10.5g} {mse:<12.5g} {ratio:.4g}")
        res = tab.to_dict()
    else:
        bp = harness.bias_scaling_probe(
            model, args.n, args.h_grid, args.m, seed=args.seed, kernel=args.kernel, truncation_m=args.trunc,
            tail_fraction=args.tail_fraction, workers=args.workers,
        )
        lines = [f"slope      {bp.slope:.4f}", "h          bias         std err      valid"]
        for h, b, s, v in zip(bp.h, bp.bias, bp.std_error, bp.valid):
            lines.append(f"{h:<10.5g} {b:<12.5g} {s:<12.5g} {bool(v)}")
        res = bp.to_dict()
    rep = io.Report(f"probe {args.probe}", _inputs(args), res, {"seconds": time.perf_counter() - t0})
    _emit(args, rep, lines)


# --------------------------------------------------------------------------


def build_parser():
    p = _Parser(prog="entroplin", description="Kernel estimation of int f^2 for linear processes.")
    sub = p.add_subparsers(dest="command", parser_class=_Parser, required=True)

    s = sub.add_parser("truevalue", help="closed-form Q = int f^2 and Renyi entropy")
    _add_common(s)
    _add_model(s)
    s.add_argument("--mode", choices=["exact", "tail", "truncated"], default="exact")
    s.add_argument("--terms", type=int, default=100_000, help="terms for --mode truncated")
    s.set_defaults(func=cmd_truevalue)

    s = sub.add_parser("estimate", help="T_n and the Renyi estimate for a series or a simulated path")
    _add_common(s)
    _add_model(s)
    s.add_argument("--series", help="CSV file")
    s.add_argument("--column", default=None)
    s.add_argument("--estimator", choices=["naive", "fast"], default="naive")
    s.set_defaults(func=cmd_estimate)

    s = sub.add_parser("clt", help="Monte-Carlo check of the normal limit of r_n")
    _add_common(s)
    _add_model(s)
    s.add_argument("--estimator", choices=["naive", "fast"], default="fast")
    s.add_argument("--centering", choices=["true", "none"], default="true")
    s.add_argument("--level", type=float, default=0.95)
    s.add_argument("--bins", type=int, default=30)
    s.add_argument("--paper-scale", action="store_true", help="n=4096, m=1000")
    s.set_defaults(func=cmd_clt)

    s = sub.add_parser("divergence", help="L2^2 divergence of two series or two models")
    _add_common(s)
    _add_model(s)
    _add_model(s, "2")
    s.add_argument("--series", nargs=2, metavar=("X", "Y"))
    s.add_argument("--column", default=None)
    s.set_defaults(func=cmd_divergence)

    s = sub.add_parser("classify", help="short/long memory class of a model")
    _add_common(s)
    _add_model(s)
    s.set_defaults(func=cmd_classify)

    s = sub.add_parser("analyze", help="KPSS, ACF and density-fit data for a series")
    _add_common(s)
    s.add_argument("--series", required=True)
    s.add_argument("--column", default=None)
    s.add_argument("--lags", default="auto")
    s.add_argument("--max-lag", type=int, default=20)
    s.add_argument("--bins", type=int, default=20)
    s.set_defaults(func=cmd_analyze)

    s = sub.add_parser("probe", help="Hajek-residual or bias-scaling probe")
    s.add_argument("probe", choices=["hajek", "bias"])
    _add_common(s)
    _add_model(s)
    s.add_argument("--n-grid", type=lambda t: [int(v) for v in t.split(",")], default=[256, 1024])
    s.add_argument("--h-grid", type=_floats, default=[0.2, 0.3, 0.45, 0.675])
    s.set_defaults(func=cmd_probe)
    return p


def dispatch(argv=None):
    """Run one command; returns the process exit code."""
    try:
        args = build_parser().parse_args(argv)
        args.func(args)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return 1
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    except EntroplinError as exc:
        print(f"entroplin: error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"entroplin: I/O error: {exc}", file=sys.stderr)
        return 2
    return 0


def main():
    sys.exit(dispatch(sys.argv[1:]))


if __name__ == "__main__":
    main()
