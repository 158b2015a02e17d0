"""Command-line entry point.

Subcommands: generate, calibrate, optimise, montecarlo, appendix-static and
validate. Every command writes tidy CSV/JSON into ``--out-dir`` together with
a ``manifest_<command>.json`` listing inputs, seed and outputs.

Exit codes: 0 success, 1 runtime or data error, 2 usage or config error.
"""
from __future__ import annotations

import argparse
import csv
import logging
import sys
import time
from pathlib import Path

from . import __version__
from .completion import MARKOV, RANDOM, TECHNIQUES, train
from .errors import ConfigError, DegenerateSampleError, LrodError
from .fitting import FITTERS, select_distribution
from .forecast_markov import format_matrix
from .forecast_random import truncation_maxima
from .loss import (
    SAMPLES, LossConfig, monte_carlo_optimise, parse_cells, parse_grid, run_scenario_matrix,
    static_rate_loss_curve, truncation_family,
)
from .portfolio import load_portfolio, partition_samples, write_portfolio
from .serialize import (
    RunManifest, curve_to_dict, inputs_digest, mc_to_dict, params_filename, read_params,
    write_curve_csv, write_json, write_mc_csv, write_params,
)
from .synthetic import GeneratorConfig, generate_synthetic_portfolio, read_key_values
from .validate import DEFAULT_PAR_RATE, cross_validate, format_reports, reports_json

log = logging.getLogger("lrod")


class UsageError(Exception):
    pass


# -- helpers ----------------------------------------------------------------

def _loss_config(args) -> LossConfig:
    values = read_key_values(args.config) if getattr(args, "config", None) else {}
    if getattr(args, "grid", None):
        values["grid"] = args.grid
    return LossConfig.from_mapping(values)


def _techniques(name: str) -> tuple:
    return TECHNIQUES if name == "both" else (name,)


def _out_dir(args) -> Path:
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _finish(args, started, inputs, outputs, name=None) -> None:
    out = _out_dir(args)
    manifest = RunManifest(
        command=name or args.command,
        config=getattr(args, "config", None),
        seed=getattr(args, "seed", None),
        input_digest=inputs_digest(inputs),
        outputs=list(outputs),
        version=__version__,
        wall_clock_seconds=round(time.perf_counter() - started, 3),
        arguments={k: v for k, v in vars(args).items() if k != "func"},
    )
    manifest.write(out / f"manifest_{manifest.command}.json")


def _sample_label(name: str) -> str:
    name = name.strip().upper()
    name = name if name.startswith("S") else f"S{name}"
    if name not in SAMPLES:
        raise UsageError(f"sample must be one of {SAMPLES}, got {name!r}")
    return name


def _calibration_family(choice: str, sample: str, best) -> str:
    if choice == "sample":
        return truncation_family(sample)
    if choice == "aic":
        return best.family if best is not None else truncation_family(sample)
    return choice


# -- commands ---------------------------------------------------------------

def cmd_generate(args) -> tuple:
    cfg = GeneratorConfig.from_file(args.config) if args.config else GeneratorConfig()
    portfolio = generate_synthetic_portfolio(cfg, args.seed)
    path = write_portfolio(portfolio, _out_dir(args) / args.output)
    log.info("wrote %d accounts (%d rows) to %s", len(portfolio),
             sum(a.t0 for a in portfolio), path)
    return [args.config], [path]


def cmd_calibrate(args) -> tuple:
    cfg = _loss_config(args)
    portfolio = load_portfolio(args.input)
    part = partition_samples(portfolio, cfg.payment_threshold)
    out = _out_dir(args)
    outputs = []
    fits = []
    for name in SAMPLES:
        sample = part[name]
        if len(sample) == 0:
            log.warning("sample %s is empty; skipping its fits", name)
            continue
        maxima_path = out / f"maxima_{name}.csv"
        with maxima_path.open("w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["account_id", "max_g1"])
            for acc in sorted(sample.accounts, key=lambda a: a.account_id):
                w.writerow([acc.account_id, acc.max_observed_level(cfg.payment_threshold)])
        outputs.append(maxima_path)

        positive = truncation_maxima(sample, cfg.payment_threshold)
        candidates = []
        for family, fitter in FITTERS.items():
            try:
                candidates.append(fitter(positive))
            except LrodError as exc:
                if positive:
                    log.warning("%s fit on %s failed: %s", family, name, exc)
        best = select_distribution(candidates) if candidates else None
        if candidates:
            for c in candidates:
                fits.append((name, c.family, " ".join(repr(v) for v in c.params), c.n,
                             c.log_likelihood, c.aic, c.ks_statistic, int(c is best)))

        if RANDOM in _techniques(args.technique):
            family = _calibration_family(args.family, name, best)
            try:
                params = train(RANDOM, sample, family, cfg.payment_threshold)
            except DegenerateSampleError as exc:
                log.warning("%s truncation fit on %s is degenerate (%s); using Exponential",
                            family, name, exc)
                params = train(RANDOM, sample, "Exponential", cfg.payment_threshold)
            outputs.append(write_params(params, out / params_filename(RANDOM, name), name))

        if MARKOV in _techniques(args.technique) and name != "S1":
            params = train(MARKOV, sample, None, cfg.payment_threshold)
            outputs.append(write_params(params, out / params_filename(MARKOV, name), name))
            table = out / f"matrix_{name}.txt"
            table.write_text(format_matrix(params) + "\n", encoding="utf-8")
            outputs.append(table)

    if fits:
        fit_path = out / "fits.csv"
        with fit_path.open("w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["sample", "family", "params", "n", "log_likelihood", "aic", "ks_statistic", "selected"])
            w.writerows(fits)
        outputs.append(fit_path)
    return [args.config, args.input], outputs


def _collect_params(paths) -> dict:
    """``{technique: {sample: params}}`` from files or calibration directories."""
    found = {t: {} for t in TECHNIQUES}
    for raw in paths or ():
        p = Path(raw)
        files = sorted(p.glob("params_*.json")) if p.is_dir() else [p]
        if p.is_dir() and not files:
            raise UsageError(f"no params_*.json files in {p}")
        for f in files:
            params, sample = read_params(f)
            technique = RANDOM if hasattr(params, "b") else MARKOV
            if sample is None:
                raise UsageError(f"{f} does not record its training sample")
            found[technique][_sample_label(sample)] = params
    return found


def _param_files(paths) -> list:
    files = []
    for raw in paths or ():
        p = Path(raw)
        files.extend(sorted(p.glob("params_*.json")) if p.is_dir() else [p])
    return files


def cmd_optimise(args) -> tuple:
    cfg = _loss_config(args)
    try:
        cells = parse_cells(args.scenario)
    except LrodError as exc:
        raise UsageError(str(exc)) from None
    portfolio = load_portfolio(args.input)
    part = partition_samples(portfolio, cfg.payment_threshold)
    supplied = _collect_params(args.params)
    out = _out_dir(args)
    outputs = []
    computed = 0
    for technique in _techniques(args.technique):
        have = supplied[technique]
        for i in sorted({i for i, _ in cells} - set(have)):
            log.warning("no %s parameters for %s supplied; training them on the fly", technique, i)
        grid = run_scenario_matrix(part, technique, cfg, args.seed, cells, have)
        for (i, j), message in sorted(grid.errors.items()):
            log.warning("%s cell s%s%s skipped: %s", technique, i[1], j[1], message)
        for (i, j), curve in sorted(grid.cells.items()):
            outputs.append(write_curve_csv(curve, out / f"curve_{technique}_{curve.label}.csv"))
        summary = out / f"optima_{technique}.csv"
        with summary.open("w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["cell", "train", "target", "min_loss", "min_loss_rate", "d_star"])
            for i, j, m, rate, d in grid.optima():
                w.writerow([f"s{i[1]}{j[1]}", i, j, repr(m), repr(rate), d])
                computed += 1
        outputs.append(summary)
    if computed == 0:
        raise LrodError("no scenario cell could be computed")
    return [args.config, args.input, *_param_files(args.params)], outputs


def cmd_montecarlo(args) -> tuple:
    if args.trials < 2:
        raise UsageError("--trials must be at least 2")
    if args.threads < 1:
        raise UsageError("--threads must be at least 1")
    cfg = _loss_config(args)
    portfolio = load_portfolio(args.input)
    part = partition_samples(portfolio, cfg.payment_threshold)
    target_name = _sample_label(args.target)
    target = part[target_name]
    if len(target) == 0:
        raise LrodError(f"target sample {target_name} is empty")
    out = _out_dir(args)
    outputs = []
    if args.params:
        params, sample = read_params(args.params)
        jobs = [(RANDOM if hasattr(params, "b") else MARKOV, params, _sample_label(sample or args.train))]
    else:
        train_name = _sample_label(args.train)
        if len(part[train_name]) == 0:
            raise LrodError(f"training sample {train_name} is empty")
        jobs = []
        for technique in _techniques(args.technique):
            family = truncation_family(train_name) if technique == RANDOM else None
            jobs.append((technique, train(technique, part[train_name], family, cfg.payment_threshold),
                         train_name))
    for technique, params, train_name in jobs:
        summary = monte_carlo_optimise(target, params, cfg, args.trials, args.seed, args.threads)
        stem = f"mc_{technique}_s{train_name[1]}{target_name[1]}"
        outputs.append(write_mc_csv(summary, out / f"{stem}.csv"))
        outputs.append(write_json(mc_to_dict(summary), out / f"{stem}.json"))
        log.info("%s: mean-curve optimum d*=%s at %.4f%%", stem, summary.optimal_threshold,
                 100 * summary.minimum_mean)
    return [args.config, args.input, args.params], outputs


def cmd_appendix_static(args) -> tuple:
    cfg = _loss_config(args)
    try:
        rates = [float(r) for r in args.rates.split(",") if r.strip()]
    except ValueError:
        raise UsageError(f"--rates must be a comma list of fractions, got {args.rates!r}") from None
    if not rates:
        raise UsageError("--rates is empty")
    portfolio = load_portfolio(args.input)
    curves = static_rate_loss_curve(portfolio, rates, cfg)
    out = _out_dir(args)
    outputs = []
    for rate, curve in curves.items():
        outputs.append(write_curve_csv(curve, out / f"static_{rate:g}.csv"))
    outputs.append(write_json({f"{r:g}": curve_to_dict(c) for r, c in curves.items()}, out / "static.json"))
    return [args.config, args.input], outputs


def cmd_validate(args) -> tuple:
    if args.folds < 2:
        raise UsageError("--folds must be at least 2")
    cfg = _loss_config(args)
    portfolio = load_portfolio(args.input)
    reports = {t: cross_validate(portfolio, t, args.folds, args.seed, args.par_rate, cfg.payment_threshold)
               for t in _techniques(args.technique)}
    out = _out_dir(args)
    js = out / "validation.json"
    js.write_text(reports_json(reports) + "\n", encoding="utf-8")
    txt = out / "validation.txt"
    table = format_reports(reports)
    txt.write_text(table + "\n", encoding="utf-8")
    print(table)
    return [args.config, args.input], [js, txt]


# -- parser -----------------------------------------------------------------

def _positive_int(raw: str) -> int:
    try:
        return int(raw)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {raw!r}") from None


def _grid(raw: str) -> str:
    try:
        parse_grid(raw)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected lo..hi or a comma list, got {raw!r}") from None
    return raw


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lrod", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, needs_input=True, loss=True):
        p.add_argument("-v", "--verbose", action="store_true", default=argparse.SUPPRESS,
                       help="log progress to stderr")
        if needs_input:
            p.add_argument("--input", required=True, help="portfolio CSV")
        p.add_argument("--config", help="key = value configuration file")
        p.add_argument("--out-dir", default=".", help="directory for outputs (default: .)")
        if loss:
            p.add_argument("--grid", type=_grid, help="threshold grid, e.g. 1..60")

    p = sub.add_parser("generate", help="write a synthetic portfolio CSV")
    common(p, needs_input=False, loss=False)
    p.add_argument("--seed", type=_positive_int, default=0)
    p.add_argument("--output", default="portfolio.csv", help="file name inside --out-dir")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("calibrate", help="fit both techniques on S1/S2/S3")
    common(p)
    p.add_argument("--technique", choices=("random", "markov", "both"), default="both")
    p.add_argument("--family", choices=("sample", "aic", *FITTERS), default="sample",
                   help="truncation family for the random-defaults files: per-sample default "
                        "(Exponential on S1/S2, Weibull on S3), the AIC winner, or a fixed family")
    p.set_defaults(func=cmd_calibrate)

    p = sub.add_parser("optimise", aliases=["optimize"], help="scenario-matrix loss curves")
    common(p)
    p.add_argument("--params", nargs="*", help="parameter JSON files or calibration directories")
    p.add_argument("--technique", choices=("random", "markov", "both"), default="both")
    p.add_argument("--scenario", default="all", help="'all' or 'i,j' (train i, optimise j)")
    p.add_argument("--seed", type=_positive_int, default=0)
    p.set_defaults(func=cmd_optimise, command_name="optimise")

    p = sub.add_parser("montecarlo", help="Monte Carlo refinement of one scenario")
    common(p)
    p.add_argument("--params", help="parameter JSON (otherwise trained on --train)")
    p.add_argument("--technique", choices=("random", "markov", "both"), default="markov")
    p.add_argument("--train", default="S1", help="training sample when --params is absent")
    p.add_argument("--target", default="S1", help="sample to optimise on")
    p.add_argument("--trials", type=_positive_int, default=500)
    p.add_argument("--seed", type=_positive_int, default=0)
    p.add_argument("--threads", type=_positive_int, default=1)
    p.set_defaults(func=cmd_montecarlo)

    p = sub.add_parser("appendix-static", help="static loss-rate curves on the untreated portfolio")
    common(p)
    p.add_argument("--rates", default="0.5,0.75,1.0", help="comma list of static loss rates")
    p.set_defaults(func=cmd_appendix_static)

    p = sub.add_parser("validate", help="k-fold cross-validated PAR and parameter stability")
    common(p)
    p.add_argument("--technique", choices=("random", "markov", "both"), default="both")
    p.add_argument("--folds", type=_positive_int, default=5)
    p.add_argument("--seed", type=_positive_int, default=0)
    p.add_argument("--par-rate", type=float, default=DEFAULT_PAR_RATE, help="PAR discount rate")
    p.set_defaults(func=cmd_validate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s", stream=sys.stderr)
    name = getattr(args, "command_name", None) or args.command
    started = time.perf_counter()
    try:
        inputs, outputs = args.func(args)
        _finish(args, started, inputs, outputs, name)
    except (UsageError, ConfigError) as exc:
        print(f"lrod {name}: error: {exc}", file=sys.stderr)
        return 2
    except (LrodError, OSError) as exc:
        print(f"lrod {name}: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
