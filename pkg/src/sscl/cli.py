"""Command-line front end: gen, train, predict, cv, sweep, baseline."""

from __future__ import annotations

import argparse
import logging
import os
import sys

from sscl import __version__
from sscl.data import DataError, gen_synthetic, impute_from, load_csv, save_csv, dumps_csv
from sscl.harness import (METHODS, SWEEP_PARAMS, dumps_cv_csv, dumps_sweep_csv, run_cv, sweep)
from sscl.model_io import dumps_model, load_model
from sscl.predict import predict_csv
from sscl.trainer import ConfigError, Hyperparams, train_ovr
from sscl._io import atomic_write_text

log = logging.getLogger("sscl")

LOG_LEVELS = {"quiet": logging.WARNING, "info": logging.INFO, "debug": logging.DEBUG}
# flags that change how a run executes but never its results
NOT_ECHOED = {"jobs", "func", "out", "timings"}


def _setup_logging():
    level = os.environ.get("SSCL_LOG", "quiet").lower()
    logging.basicConfig(level=LOG_LEVELS.get(level, logging.WARNING), stream=sys.stderr,
                        format="%(levelname)s %(name)s: %(message)s")


def _add_data(p, required=True):
    p.add_argument("--data", required=required, help="labelled data CSV (label in column 0)")
    p.add_argument("--has-header", action="store_true", help="skip the first row (default: off)")
    p.add_argument("--label-column", type=int, default=0,
                   help="column holding the label; -1 for the UCI arrhythmia file (default: 0)")


def _add_hyper(p):
    g = p.add_argument_group("hyperparameters")
    g.add_argument("--k", type=int, default=10, help="context size (default: 10)")
    g.add_argument("--alpha", type=float, default=1.0, help="hinge-loss weight (default: 1.0)")
    g.add_argument("--beta", type=float, default=1.0, help="reconstruction weight (default: 1.0)")
    g.add_argument("--gamma", type=float, default=0.1, help="L1 sparsity weight (default: 0.1)")
    g.add_argument("--max-outer", type=int, default=30, help="outer iteration cap (default: 30)")
    g.add_argument("--tol", type=float, default=1e-5,
                   help="relative objective change to stop (default: 1e-5)")


def _add_cv(p):
    p.add_argument("--folds", type=int, default=10, help="number of CV folds (default: 10)")
    p.add_argument("--seed", type=int, default=42, help="fold shuffling seed (default: 42)")
    p.add_argument("--jobs", type=int, default=1,
                   help="worker processes; results do not depend on it (default: 1)")


def _add_out(p, what):
    p.add_argument("--out", default="-", help=f"{what} path, '-' for stdout (default: -)")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="sscl", description="Supervised sparse context learning.")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True, metavar="COMMAND")

    p = sub.add_parser("gen", help="write a seeded synthetic data set",
                       formatter_class=argparse.ArgumentDefaultsHelpFormatter)
    p.add_argument("--kind", choices=["two-gauss", "xor-ring"], default="two-gauss", help="generator")
    p.add_argument("--n", type=int, default=200, help="number of points (even, >= 4)")
    p.add_argument("--d", type=int, default=10, help="dimension")
    p.add_argument("--seed", type=int, default=42, help="RNG seed")
    p.add_argument("--sep", type=float, default=4.0, help="class separation")
    _add_out(p, "data CSV")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("train", help="train a one-vs-rest SSCL model and write the model file")
    _add_data(p)
    _add_hyper(p)
    p.add_argument("--seed", type=int, default=42, help="seed (default: 42)")
    _add_out(p, "model file")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("predict", help="batch prediction CSV from a model file")
    p.add_argument("--model", required=True, help="model file written by 'train'")
    p.add_argument("--data", required=True, help="points CSV")
    p.add_argument("--has-header", action="store_true", help="skip the first row (default: off)")
    p.add_argument("--no-label", action="store_true",
                   help="the file has no label column (default: label in column 0)")
    _add_out(p, "prediction CSV")
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("cv", help="k-fold cross validation, CSV method,fold,accuracy,seconds")
    _add_data(p)
    p.add_argument("--method", choices=sorted(METHODS), default="sscl", help="method (default: sscl)")
    _add_hyper(p)
    _add_cv(p)
    p.add_argument("--timings", action="store_true",
                   help="fill the seconds column with wall-clock times (default: left empty)")
    _add_out(p, "result CSV")
    p.set_defaults(func=cmd_cv)

    p = sub.add_parser("sweep", help="CV accuracy against one hyperparameter")
    _add_data(p)
    p.add_argument("--method", choices=sorted(METHODS), default="sscl", help="method (default: sscl)")
    p.add_argument("--param", choices=SWEEP_PARAMS, required=True, help="parameter to sweep")
    p.add_argument("--values", required=True, help="comma-separated values, e.g. 0.01,0.1,1,10")
    _add_hyper(p)
    _add_cv(p)
    _add_out(p, "sweep CSV")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("baseline", help="cross-validate the KNN and SRBC baselines")
    _add_data(p)
    p.add_argument("--methods", default="knn,srbc", help="comma-separated subset of knn,srbc (default: knn,srbc)")
    _add_hyper(p)
    _add_cv(p)
    p.add_argument("--timings", action="store_true",
                   help="fill the seconds column with wall-clock times (default: left empty)")
    _add_out(p, "result CSV")
    p.set_defaults(func=cmd_baseline)
    return ap


def _hyper(args) -> Hyperparams:
    return Hyperparams(args.alpha, args.beta, args.gamma, args.k, args.max_outer, args.tol).validate()


def _preamble(args) -> str:
    items = {k: v for k, v in sorted(vars(args).items()) if k not in NOT_ECHOED}
    return "\n".join([f"# sscl {__version__}"] + [f"# {k}={v}" for k, v in items.items()])


def _emit(args, text: str):
    if args.out == "-":
        sys.stdout.write(text)
    else:
        atomic_write_text(args.out, text)


def _load(args):
    data = load_csv(args.data, args.has_header, args.label_column)
    if data.n < 2:
        raise ConfigError("need at least two data points")
    return data


def _check_k(h, data, folds=None):
    # smallest training split of a fold partition
    n_train = data.n - -(-data.n // folds) if folds else data.n
    if folds is not None and not 2 <= folds <= data.n:
        raise ConfigError(f"folds must be in [2, n={data.n}], got {folds}")
    if h.k > n_train - 1:
        raise ConfigError(f"k must be <= n_train - 1 = {n_train - 1}, got {h.k}")


def cmd_gen(args):
    data = gen_synthetic(args.kind, args.n, args.d, args.seed, args.sep)
    _emit(args, dumps_csv(data, preamble=_preamble(args)))
    return 0


def cmd_train(args):
    h = _hyper(args)
    data = _load(args)
    _check_k(h, data)
    (data,) = impute_from(data)
    model = train_ovr(data, h, args.seed)
    if model.flagged:
        log.warning("classes with fewer than two training points: %s", model.flagged)
    _emit(args, dumps_model(model))
    return 0


def cmd_predict(args):
    model = load_model(args.model)
    out = args.out
    if out == "-":
        import tempfile
        with tempfile.TemporaryDirectory() as tmp:
            path = os.path.join(tmp, "pred.csv")
            predict_csv(model, args.data, path, has_header=args.has_header,
                        has_label=not args.no_label, preamble=_preamble(args))
            with open(path, encoding="utf-8") as fh:
                sys.stdout.write(fh.read())
    else:
        predict_csv(model, args.data, out, has_header=args.has_header,
                    has_label=not args.no_label, preamble=_preamble(args))
    return 0


def _cv_results(args, methods):
    h = _hyper(args)
    data = _load(args)
    _check_k(h, data, args.folds)
    results = [run_cv(data, m, h, args.folds, args.seed, args.jobs) for m in methods]
    _emit(args, dumps_cv_csv(results, args.timings, _preamble(args)))
    for r in results:
        log.info("%s: mean accuracy %.4f (std %.4f)", r.method, r.mean, r.std)
        if r.failed:
            log.error("%s: failed folds %s", r.method, r.failed)
    return 1 if any(r.failed for r in results) else 0


def cmd_cv(args):
    return _cv_results(args, [args.method])


def cmd_baseline(args):
    methods = [m.strip() for m in args.methods.split(",") if m.strip()]
    bad = [m for m in methods if m not in ("knn", "srbc")]
    if bad or not methods:
        raise ConfigError(f"--methods must be a subset of knn,srbc, got {args.methods!r}")
    return _cv_results(args, methods)


def cmd_sweep(args):
    base = Hyperparams(args.alpha, args.beta, args.gamma, args.k, args.max_outer, args.tol)
    try:
        values = [float(v) for v in args.values.split(",") if v.strip()]
    except ValueError:
        raise ConfigError(f"--values must be comma-separated numbers, got {args.values!r}") from None
    if not values:
        raise ConfigError("--values is empty")
    data = _load(args)
    if args.param != "alpha":
        base.validate()
    if args.param == "k":
        for v in values:
            _check_k(base.with_(k=int(v)), data, args.folds)
    else:
        _check_k(base, data, args.folds)
    points = sweep(data, args.method, base, args.param, values, args.folds, args.seed, args.jobs)
    _emit(args, dumps_sweep_csv(points, _preamble(args)))
    return 1 if any(p.result is not None and p.result.failed for p in points) else 0


def main(argv=None) -> int:
    _setup_logging()
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"sscl: error: {exc}", file=sys.stderr)
        return 2
    except (DataError, OSError, ValueError, ArithmeticError, RuntimeError) as exc:
        print(f"sscl: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
