"""Command line interface.

Subcommands: sample (draw from the democratic distribution), prox (apply the
l_inf proximal map), code (run the posterior sampler on a coding problem),
geweke (joint-consistency check of the posterior samplers), scenario (full
benchmark run from a JSON config), acf (autocorrelation of a stored chain).
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import coder, democratic as dem, fileio, harness, prox, samplers
from .samplers import ChainConfig, RngStream


def _add_backend(p):
    p.add_argument(
        "--backend",
        choices=["auto", "numba", "numpy"],
        default="auto",
        help="kernel backend (default: numba when available)",
    )


def _backend_arg(args):
    return None if args.backend == "auto" else args.backend


def _cmd_sample(args) -> int:
    params = dem.DemocraticParams(args.dim, args.rate)
    rng = RngStream(args.seed, args.stream)
    if args.method == "exact":
        draws = samplers.sample_exact(params, rng, size=args.draws)
        meta_extra = {}
    else:
        config = ChainConfig(
            total_iters=args.burn_in + args.draws,
            burn_in=args.burn_in,
            step_size=args.step_size,
            random_scan=args.random_scan,
        )
        runner = (
            samplers.gibbs_prior_chain
            if args.method == "gibbs"
            else samplers.pmala_prior_chain
        )
        chain = runner(params, config, rng, backend=_backend_arg(args))
        draws = chain.kept
        meta_extra = {
            "burn_in": args.burn_in,
            "acceptance_rate": chain.acceptance_rate,
            "step_size": None if np.isnan(chain.step_size) else chain.step_size,
        }
    cols = {f"x{j}": draws[:, j] for j in range(params.dim)}
    meta = {
        "kind": "samples",
        "method": args.method,
        "dim": params.dim,
        "rate": params.rate,
        "seed": args.seed,
        "stream": args.stream,
    }
    meta.update(meta_extra)
    meta["config_hash"] = harness.config_hash(meta)
    fileio.write_table(args.output, cols, meta)
    print(f"wrote {args.draws} draws to {args.output}")
    return 0


def _cmd_prox(args) -> int:
    if args.values is not None:
        x = np.array([float(v) for v in args.values.split(",")])
    else:
        _, cols = fileio.read_table(args.input)
        x = cols[args.column]
    out = prox.prox_linf(x, args.weight, backend=_backend_arg(args))
    thr = prox.prox_linf_threshold(x, args.weight)
    if args.output:
        fileio.write_plot_data(args.output, {"x": x, "prox": out})
        print(f"wrote {x.size} rows to {args.output} (threshold {thr.phi!r})")
    else:
        print(",".join(repr(float(v)) for v in out))
        print(f"threshold {thr.phi!r}", file=sys.stderr)
    return 0


def _cmd_code(args) -> int:
    rng = RngStream(args.seed, args.stream)
    if args.input:
        problem, _ = fileio.load_problem(args.input)
    else:
        if args.measurements is None or args.dim is None:
            raise SystemExit("either --input or both --measurements and --dim required")
        h = harness.build_dct_frame(args.measurements, args.dim, rng)
        gen = rng.generator
        y = gen.standard_normal(args.measurements)
        y = y / y.std()
        problem = coder.CodingProblem(y=y, h=h, hyper_a=args.hyper_a, hyper_b=args.hyper_b)
    config = ChainConfig(
        total_iters=args.iters,
        burn_in=args.burn_in,
        step_size=args.step_size,
        mh_moves_per_iter=args.moves,
        random_scan=args.random_scan,
    )
    chain = coder.run_chain(
        problem, config, rng, step_kind=args.step_kind, backend=_backend_arg(args)
    )
    fileio.save_posterior_chain(args.output, chain, seed=args.seed)
    summary = {
        "step_kind": args.step_kind,
        "acceptance_rate": chain.acceptance_rate,
        "sigma2_mean": float(chain.kept_sigma2s.mean()),
        "mu_mean": float(chain.kept_mus.mean()),
    }
    for name, res in (
        ("mmse", coder.mmse_estimate(chain)),
        ("mmap", coder.mmap_estimate(chain, problem)),
    ):
        m = harness.evaluate_metrics(res.x, problem.y, problem.h)
        summary[name] = {
            "x": [float(v) for v in res.x],
            "snr_y_db": m.snr_y_db,
            "papr": m.papr,
        }
    if args.estimates:
        fileio.save_report(args.estimates, summary)
    print(
        f"chain written to {args.output}; "
        f"mmse snr_y {summary['mmse']['snr_y_db']:.2f} dB, "
        f"papr {summary['mmse']['papr']:.3f}"
    )
    return 0


def _cmd_geweke(args) -> int:
    rng = RngStream(args.seed, args.stream)
    result = harness.geweke_run(
        args.measurements,
        args.dim,
        args.mu,
        args.noise_var,
        args.draws,
        rng,
        step_kind=args.step_kind,
        mh_moves_per_iter=args.moves,
        tune_iters=args.tune_iters,
        thin=args.thin,
        backend=_backend_arg(args),
    )
    lam = args.dim * args.mu
    gof = harness.gamma_gof(result.dominant_magnitudes, args.dim, lam)
    cones = harness.cone_uniformity(result.cone_indices, args.dim)
    report = {
        "step_kind": args.step_kind,
        "dim": args.dim,
        "n_measurements": args.measurements,
        "mu": args.mu,
        "noise_var": args.noise_var,
        "draws": args.draws,
        "thin": args.thin,
        "step_size": result.step_size,
        "dominant_ks_statistic": gof.statistic,
        "dominant_ks_p_value": gof.p_value,
        "cone_chi2_statistic": cones.statistic,
        "cone_chi2_p_value": cones.p_value,
        "cone_counts": [int(c) for c in cones.details["counts"]],
        "seed": args.seed,
    }
    if args.report:
        fileio.save_report(args.report, report)
    if args.qq:
        fileio.write_plot_data(
            args.qq,
            {
                "theoretical": gof.details["qq_theoretical"],
                "empirical": gof.details["qq_empirical"],
            },
        )
    print(
        f"{args.step_kind}: dominant-magnitude KS p={gof.p_value:.4f}, "
        f"cone chi2 p={cones.p_value:.4f}"
    )
    return 0


def _cmd_scenario(args) -> int:
    raw = json.loads(open(args.config).read())
    raw["dims"] = tuple(raw["dims"])
    if "estimators" in raw:
        raw["estimators"] = tuple(raw["estimators"])
    cfg = harness.ScenarioConfig(**raw)
    report = harness.run_scenario(cfg, backend=_backend_arg(args))
    fileio.save_report(args.output, report)
    if args.plot_data:
        _write_scenario_plots(report, args.plot_data)
    print(f"scenario '{cfg.name}': {len(report.records)} records -> {args.output}")
    return 0


def _write_scenario_plots(report, prefix: str) -> None:
    dims = sorted({int(d) for d in report.aggregates})
    estimators = sorted(
        {est for d in report.aggregates.values() for est in d}
    )
    for metric in ("snr_y_db", "papr"):
        cols = {"dim": np.array(dims, dtype=float)}
        for est in estimators:
            vals = []
            for d in dims:
                entry = report.aggregates[str(d)].get(est, {}).get(metric)
                vals.append(entry["mean"] if entry else np.nan)
            cols[est] = np.array(vals)
        fileio.write_plot_data(f"{prefix}_{metric}.csv", cols)


def _cmd_acf(args) -> int:
    meta, cols = fileio.read_table(args.input)
    if args.column:
        series = cols[args.column]
    else:
        dim = int(meta["dim"])
        xs = np.column_stack([cols[f"x{j}"] for j in range(dim)])
        burn = int(meta.get("burn_in", 0)) if args.drop_burn_in else 0
        series = np.max(np.abs(xs[burn:]), axis=1)
    values = samplers.acf(series, args.max_lag)
    lags = np.arange(1, args.max_lag + 1, dtype=float)
    if args.output:
        fileio.write_plot_data(args.output, {"lag": lags, "acf": values})
        print(f"wrote {args.max_lag} lags to {args.output}")
    else:
        for lag, v in zip(lags, values):
            print(f"{int(lag)},{v!r}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="antisparse", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    ps = sub.add_parser("sample", help="draw from the democratic distribution")
    ps.add_argument("--method", choices=["exact", "gibbs", "pmala"], default="exact")
    ps.add_argument("--dim", type=int, required=True)
    ps.add_argument("--rate", type=float, required=True)
    ps.add_argument("--draws", type=int, required=True)
    ps.add_argument("--burn-in", type=int, default=1000)
    ps.add_argument("--step-size", type=float, default=1.0)
    ps.add_argument("--random-scan", action="store_true")
    ps.add_argument("--seed", type=int, default=0)
    ps.add_argument("--stream", type=int, default=0)
    ps.add_argument("--output", required=True)
    _add_backend(ps)
    ps.set_defaults(func=_cmd_sample)

    pp = sub.add_parser("prox", help="apply the l_inf proximal operator")
    src = pp.add_mutually_exclusive_group(required=True)
    src.add_argument("--values", help="comma-separated vector")
    src.add_argument("--input", help="table file holding the vector")
    pp.add_argument("--column", default="x", help="column to read from --input")
    pp.add_argument("--weight", type=float, required=True)
    pp.add_argument("--output")
    _add_backend(pp)
    pp.set_defaults(func=_cmd_prox)

    pc = sub.add_parser("code", help="run the posterior sampler on a problem")
    pc.add_argument("--input", help="problem file; omit to generate one")
    pc.add_argument("--measurements", type=int)
    pc.add_argument("--dim", type=int)
    pc.add_argument("--hyper-a", type=float, default=1e-3)
    pc.add_argument("--hyper-b", type=float, default=1e-3)
    pc.add_argument("--step-kind", choices=["gibbs", "pmala"], default="gibbs")
    pc.add_argument("--iters", type=int, default=12000)
    pc.add_argument("--burn-in", type=int, default=10000)
    pc.add_argument("--moves", type=int, default=20)
    pc.add_argument("--step-size", type=float, default=1.0)
    pc.add_argument("--random-scan", action="store_true")
    pc.add_argument("--seed", type=int, default=0)
    pc.add_argument("--stream", type=int, default=0)
    pc.add_argument("--output", required=True, help="chain file")
    pc.add_argument("--estimates", help="JSON summary path")
    _add_backend(pc)
    pc.set_defaults(func=_cmd_code)

    pg = sub.add_parser("geweke", help="joint-consistency check of a step kind")
    pg.add_argument("--measurements", type=int, default=3)
    pg.add_argument("--dim", type=int, default=3)
    pg.add_argument("--mu", type=float, default=2.0)
    pg.add_argument("--noise-var", type=float, default=0.25)
    pg.add_argument("--draws", type=int, default=20000)
    pg.add_argument("--step-kind", choices=["gibbs", "pmala"], default="gibbs")
    pg.add_argument("--moves", type=int, default=20)
    pg.add_argument("--tune-iters", type=int, default=2000)
    pg.add_argument("--thin", type=int, default=1)
    pg.add_argument("--seed", type=int, default=0)
    pg.add_argument("--stream", type=int, default=0)
    pg.add_argument("--report", help="JSON report path")
    pg.add_argument("--qq", help="QQ plot data CSV path")
    _add_backend(pg)
    pg.set_defaults(func=_cmd_geweke)

    px = sub.add_parser("scenario", help="run a benchmark scenario from JSON config")
    px.add_argument("--config", required=True)
    px.add_argument("--output", required=True)
    px.add_argument("--plot-data", help="prefix for aggregate plot CSVs")
    _add_backend(px)
    px.set_defaults(func=_cmd_scenario)

    pa = sub.add_parser("acf", help="autocorrelation of a stored chain")
    pa.add_argument("--input", required=True)
    pa.add_argument("--max-lag", type=int, default=50)
    pa.add_argument("--column", help="use one stored column instead of the max norm")
    pa.add_argument("--drop-burn-in", action="store_true")
    pa.add_argument("--output")
    pa.set_defaults(func=_cmd_acf)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    raise SystemExit(main())
