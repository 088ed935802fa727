"""Command-line front end.

Subcommands: ``alpha-curve``, ``risk-sweep``, ``admissible-interval`` and
``check``.  Exit codes: 0 success, 2 configuration error, 3 numerical
failure, 4 property-suite failure.
"""

from __future__ import annotations

import argparse
import sys
import warnings
from dataclasses import replace
from pathlib import Path

from . import suites
from .admissibility import alpha_curve, alpha_curve_csv, alpha_infinity_probe
from .config import ConfigError, ExperimentConfig, load, preset_names
from .errors import DegenerateModelError, InvalidDensityError, PreconditionError, UnsupportedOperation
from .loss_risk import LossSpec, risk_csv, risk_sweep
from .models import LOCATION, BivariateNormal, ExponentialLocation, GammaScale, PowerScale
from .svg import line_chart

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_SUITE = 0, 2, 3, 4


def _write(out: Path, name: str, text: str) -> Path:
    out.mkdir(parents=True, exist_ok=True)
    path = out / name
    path.write_text(text)
    return path


def _validated(cfg: ExperimentConfig, need_family: bool = True):
    model = cfg.model() if (need_family or cfg.family) else None
    if model is not None:
        for spec in cfg.estimator_specs():
            spec.check_applicable(model)
    return model


def cmd_alpha_curve(cfg: ExperimentConfig, out: Path) -> int:
    model = _validated(cfg)
    points = alpha_curve(model, cfg.weights, cfg.lambda_grid(), cfg.threads)
    path = _write(out, f"{cfg.name}_alpha.csv", alpha_curve_csv(model.token, points))
    print(path)
    return EXIT_OK


def cmd_risk_sweep(cfg: ExperimentConfig, out: Path) -> int:
    model = _validated(cfg)
    if not cfg.estimators:
        raise ConfigError("risk-sweep needs an 'estimators' list")
    loss = LossSpec(model.kind, cfg.weights)
    rows = risk_sweep(model, loss, cfg.estimator_specs(), cfg.lambda_grid(), cfg.n, cfg.seed, cfg.threads)
    csv_path = _write(out, f"{cfg.name}_risk.csv", risk_csv(model.token, rows))
    series: dict[str, tuple[list, list]] = {}
    for r in rows:
        xs, ys = series.setdefault(r.estimator_tag, ([], []))
        xs.append(r.lam)
        ys.append(r.mean)
    hyper = ", ".join(f"{k}={v:g}" for k, v in model.params().items())
    xlabel = "lambda = theta2 - theta1" if model.kind == LOCATION else "lambda = theta2 / theta1"
    svg = line_chart(series, f"{model.token} ({hyper})", xlabel, "simulated risk")
    svg_path = _write(out, f"{cfg.name}_risk.svg", svg)
    print(csv_path)
    print(svg_path)
    return EXIT_OK


def cmd_admissible_interval(cfg: ExperimentConfig, out: Path) -> int:
    model = _validated(cfg)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        iv = alpha_infinity_probe(model, cfg.weights, cfg.schedule)
    lines = [
        "family,lower,upper,diverges,certified,direction,note",
        ",".join([model.token, repr(iv.lower), repr(iv.upper), str(iv.diverges).lower(),
                  str(iv.certified).lower(), iv.direction, f'"{iv.note}"']),
    ]
    path = _write(out, f"{cfg.name}_interval.csv", "\n".join(lines) + "\n")
    print(f"{model.token}: admissible alpha in {iv}  [{iv.note}]")
    print(path)
    if not iv.certified:
        print(f"warning: {iv.note}", file=sys.stderr)
    return EXIT_OK


def default_models():
    return [BivariateNormal(1.0, 1.0, 0.0), ExponentialLocation(1.0, 2.0), GammaScale(2.0, 3.0), PowerScale(1.0, 2.0)]


def run_suites(cfg: ExperimentConfig, models=None) -> list[suites.SuiteResult]:
    models = models if models is not None else default_models()
    n = cfg.trials
    results = [
        suites.loss_dominance(n, cfg.seed),
        suites.loss_dominance(n, cfg.seed + 1, boundary=True),
        suites.alpha_loss_ordering(n, cfg.seed + 2),
        suites.scale_dominance(n, cfg.seed + 3),
        suites.mix_ordering(n, cfg.seed + 4),
        suites.p_sum(n, cfg.seed + 5),
        suites.identity(min(n, 10_000), cfg.seed + 6, cfg.identity_alpha),
        suites.p1_suite([m for m in models if m.kind == LOCATION]),
        suites.lr_suite(models),
        suites.monotonicity_suite(models, cfg.weights),
    ]
    if cfg.include_relative_scale:
        results.append(suites.scale_dominance(n, cfg.seed + 7, relative=True))
    return results


def cmd_check(cfg: ExperimentConfig, out: Path) -> int:
    model = _validated(cfg, need_family=False)
    results = run_suites(cfg, [model] if model is not None else None)
    report = "\n".join(r.line() for r in results) + "\n"
    path = _write(out, f"{cfg.name}_check.txt", report)
    sys.stdout.write(report)
    print(path)
    return EXIT_OK if all(r.passed for r in results) else EXIT_SUITE


COMMANDS = {
    "alpha-curve": cmd_alpha_curve,
    "risk-sweep": cmd_risk_sweep,
    "admissible-interval": cmd_admissible_interval,
    "check": cmd_check,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="isomix", description=__doc__.split("\n\n")[0])
    parser.add_argument("command", choices=sorted(COMMANDS))
    parser.add_argument("--config", help=f"config file path or preset name ({', '.join(preset_names())})")
    parser.add_argument("--out", default="out", help="output directory (default: out)")
    parser.add_argument("--seed", type=int, help="override the config seed")
    parser.add_argument("--n", type=int, help="override the replication count")
    parser.add_argument("--threads", type=int, help="worker thread cap")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.config is None:
            if args.command != "check":
                raise ConfigError(f"{args.command} needs --config")
            cfg = ExperimentConfig(name="check")
        else:
            cfg = load(args.config)
        overrides = {}
        if args.seed is not None:
            if args.seed < 0 or args.seed >= 2**64:
                raise ConfigError("--seed must be an unsigned 64-bit integer")
            overrides["seed"] = args.seed
        if args.n is not None:
            if args.n < 2:
                raise ConfigError("--n must be at least 2")
            overrides["n"] = args.n
        if args.threads is not None:
            if args.threads < 1:
                raise ConfigError("--threads must be at least 1")
            overrides["threads"] = args.threads
        cfg = replace(cfg, **overrides)
        return COMMANDS[args.command](cfg, Path(args.out))
    except (DegenerateModelError, FloatingPointError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (PreconditionError, UnsupportedOperation, InvalidDensityError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
