"""Command-line entry point: ``adascale <command> [flags]``.

Exit codes: 0 ok, 1 data or runtime failure, 2 usage error. Every failure
writes one ``error: <code>: <message>`` line to stderr.
"""
from __future__ import annotations

import argparse
import os
import sys
import time
import warnings
from pathlib import Path

import numpy as np

from . import harness
from .dataio import CREDIT_TARGET, Dataset, load_csv, write_csv
from .errors import AdascaleError, ArgumentError, DataError
from .numerics import RngStream
from .regression import Family, PenaltySpec, cv_select_lambda, predict_linear
from .report import render_report
from .scaling import DEFAULT_GAMMA_GRID, Method, ScalerSpec, ZeroedFeatureWarning, fit_scaler, \
    select_gamma_cv

OUT_DIR_ENV = "ADASCALE_OUT_DIR"
PROG = "adascale"


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


class _HelpFormatter(argparse.HelpFormatter):
    """Appends the default to each flag's help unless it is None/False."""

    def _get_help_string(self, action):
        text = action.help or ""
        hidden = action.default is None or action.default is False \
            or action.default == argparse.SUPPRESS
        if not hidden and "(default" not in text:
            text += " (default: %(default)s)"
        return text


def _fmt_help(prog):
    return _HelpFormatter(prog, width=88)


def _float_list(text):
    try:
        return tuple(float(x) for x in text.split(",") if x.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated list of numbers: {text!r}")


def _name_list(text):
    return tuple(x.strip() for x in text.split(",") if x.strip())


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog=PROG, description="Feature scaling and scaling-sensitivity experiments.",
                formatter_class=_fmt_help)
    sub = p.add_subparsers(dest="command", metavar="command", parser_class=_Parser)
    sub.required = True

    sc = sub.add_parser("scale", help="fit a scaler on a CSV and write the transformed file",
                        formatter_class=_fmt_help)
    sc.add_argument("--input", required=True, help="input CSV with a header row")
    sc.add_argument("--method", required=True,
                    help="scaling method (none, standardization, range, pareto, vast, level, "
                         "gelman, adaptive, gas, ash)")
    sc.add_argument("--gamma", type=float, default=1.0, help="exponent for gas/ash")
    sc.add_argument("--target", default=None, help="response column; needed by adaptive methods")
    sc.add_argument("--output", required=True, help="path of the transformed CSV")
    sc.add_argument("--drop", type=_name_list, default=("ID",),
                    help="comma-separated columns to drop (default: ID)")

    def experiment_flags(e, name):
        e.add_argument("--config", default=None,
                       help="key = value config file; flags override its entries")
        e.add_argument("--seed", type=int, default=None, help="base seed (default: 0)")
        e.add_argument("--reps", type=int, default=None,
                       help="replications per cell (default: 100; empirical: 100 for KNN "
                            "and KMeansNC, 10 otherwise)")
        e.add_argument("--scalers", type=_name_list, default=None,
                       help="comma-separated scaler labels (default: every scaler of the "
                            "experiment)")
        e.add_argument("--folds", type=int, default=None, help="CV folds (default: 5)")
        e.add_argument("--jobs", type=int, default=None,
                       help="parallel replication workers (default: 1)")
        e.add_argument("--format", choices=("markdown", "csv"), default="markdown",
                       help="report format")
        e.add_argument("--out", default=None,
                       help=f"report path (default: stdout, or {name}.md/.csv under "
                            f"${OUT_DIR_ENV} when set)")

    s1 = sub.add_parser("sim1", help="simulation 1: RPE of five penalised regressions",
                        formatter_class=_fmt_help)
    experiment_flags(s1, "sim1")
    s1.add_argument("--models", type=_name_list, default=None,
                    help="comma-separated models "
                         "(default: Lasso,AdaptiveLasso,Garrote,SCAD,MCP)")

    s2 = sub.add_parser("sim2", help="simulation 2: Lasso selection rates and RPE",
                        formatter_class=_fmt_help)
    experiment_flags(s2, "sim2")
    s2.add_argument("--case", type=int, default=None, help="beta pattern 1..4 (default: 1)")
    s2.add_argument("--correlated", action="store_true",
                    help="use 0.5^|i-j| correlation instead of independent features")

    em = sub.add_parser("empirical", help="classification accuracy on a credit-default CSV",
                        formatter_class=_fmt_help)
    experiment_flags(em, "empirical")
    em.add_argument("--data", default=None,
                    help="credit-default CSV (required unless set in --config)")
    em.add_argument("--target", default=None, help=f"target column (default: {CREDIT_TARGET})")
    em.add_argument("--models", type=_name_list, default=None,
                    help="comma-separated models "
                         "(default: KNN,KMeansNC,GaussianNB,LogisticGD,LDA)")
    em.add_argument("--one-hot", action="store_true", help="one-hot encode categorical columns")

    g = sub.add_parser("gamma-cv", help="choose the GAS/ASH exponent by K-fold CV with a Lasso",
                       formatter_class=_fmt_help)
    g.add_argument("--input", required=True, help="input CSV with a header row")
    g.add_argument("--target", required=True, help="response column")
    g.add_argument("--method", default="gas", help="gas or ash")
    g.add_argument("--grid", type=_float_list, default=DEFAULT_GAMMA_GRID,
                   help="comma-separated gamma values (default: 0,0.25,0.5,0.75,1)")
    g.add_argument("--folds", type=int, default=5, help="CV folds")
    g.add_argument("--seed", type=int, default=0, help="seed for the fold assignment")
    return p


def _out_path(args, name: str) -> Path | None:
    if args.out:
        return Path(args.out)
    base = os.environ.get(OUT_DIR_ENV)
    if base:
        ext = "csv" if args.format == "csv" else "md"
        return Path(base) / f"{name}.{ext}"
    return None


def _emit(text: str, path: Path | None) -> None:
    if path is None:
        sys.stdout.write(text)
        return
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")


def _cmd_scale(args) -> int:
    method = Method.parse(args.method)
    if method.needs_target and not args.target:
        raise ArgumentError(f"method {method.value} needs --target")
    spec = ScalerSpec(method, args.gamma)
    d = load_csv(args.input, args.target, drop_columns=args.drop)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", ZeroedFeatureWarning)
        sc = fit_scaler(spec, d.X, d.y, d.feature_kinds)
    for w in caught:
        print(f"warning: {w.message}", file=sys.stderr)
    out = Dataset(sc.transform(d.X), d.feature_names, d.feature_kinds, d.y, d.target_name)
    write_csv(out, args.output)
    Path(str(args.output) + ".scaler").write_text(sc.to_record(), encoding="utf-8")
    return 0


def _cmd_experiment(args) -> int:
    name = args.command
    overrides = {
        "experiment": name, "base_seed": args.seed, "reps": args.reps, "scalers": args.scalers,
        "folds": args.folds, "jobs": args.jobs, "models": getattr(args, "models", None),
    }
    if name == "sim2":
        overrides["sim2_case"] = args.case
        overrides["correlated"] = True if args.correlated else None
    if name == "empirical":
        overrides.update(data_path=args.data, target=args.target,
                         one_hot=True if args.one_hot else None)
    if args.config:
        cfg_file = Path(args.config)
        if not cfg_file.is_file():
            raise ArgumentError(f"no such config file: {cfg_file}")
        kw = harness.parse_config_text(cfg_file.read_text(encoding="utf-8"))
        if kw.get("experiment", name) != name:
            raise ArgumentError(f"config is for {kw['experiment']!r}, not {name!r}")
    else:
        kw = {}
    kw.update({k: v for k, v in overrides.items() if v is not None})
    cfg = harness.ExperimentConfig(**kw)
    if cfg.experiment == "empirical" and not Path(cfg.data_path).is_file():
        raise DataError(f"no such file: {cfg.data_path}")
    report = harness.run_experiment(cfg)
    _emit(render_report(report, args.format), _out_path(args, name))
    return 0


def _cmd_gamma_cv(args) -> int:
    method = Method.parse(args.method)
    if method not in (Method.GENERALIZED_ADAPTIVE, Method.ADAPTIVE_HIGH_DIM):
        raise ArgumentError("gamma-cv supports gas and ash only")
    d = load_csv(args.input, args.target)

    def lasso(Xf, yf, Xv, rng):
        sel = cv_select_lambda(Xf, yf, PenaltySpec(Family.LASSO), folds=args.folds, rng=rng)
        return predict_linear(sel.fit, Xv)

    sel = select_gamma_cv(d.X, np.asarray(d.y, dtype=np.float64), args.grid, args.folds, lasso,
                          RngStream(args.seed, 0), method=method, kinds=d.feature_kinds)
    for g, s in zip(sel.grid, sel.cv_scores):
        print(f"gamma={g:g}\tcv_mse={s:.6g}")
    print(f"gamma_star={sel.gamma_star:g}")
    return 0


_COMMANDS = {"scale": _cmd_scale, "sim1": _cmd_experiment, "sim2": _cmd_experiment,
             "empirical": _cmd_experiment, "gamma-cv": _cmd_gamma_cv}


def _fail(code: str, message: str, status: int) -> int:
    print(f"error: {code}: {' '.join(str(message).split())}", file=sys.stderr)
    return status


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        return _fail("usage", exc, 2)
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    start = time.perf_counter()
    try:
        status = _COMMANDS[args.command](args)
    except ArgumentError as exc:
        return _fail(exc.code, exc, 2)
    except AdascaleError as exc:
        return _fail(getattr(exc, "code", "error"), exc, 1)
    except OSError as exc:
        return _fail("io", exc, 1)
    finally:
        if args.command != "scale":
            print(f"wall time: {time.perf_counter() - start:.2f}s", file=sys.stderr)
    return status


if __name__ == "__main__":
    sys.exit(main())
