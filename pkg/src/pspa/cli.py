"""Command-line entry point: ``pspa estimate`` and ``pspa simulate``."""
from __future__ import annotations

import argparse
import sys
import warnings
from dataclasses import replace

from .baselines import METHODS, check_method_mode
from .data import MODES
from .errors import PSPAError
from .io import ColumnMap, dumps_json, load_dataset, result_record
from .models import MODELS, get_model


def _parser():
    p = argparse.ArgumentParser(prog="pspa", description="Post-prediction adaptive inference.")
    sub = p.add_subparsers(dest="command", required=True)

    e = sub.add_parser("estimate", help="run an estimator on labeled + unlabeled files")
    e.add_argument("--mode", choices=MODES, required=True)
    e.add_argument("--model", choices=sorted(MODELS), required=True)
    e.add_argument("--method", choices=sorted(METHODS), default="pspa")
    e.add_argument("--labeled", required=True, metavar="PATH")
    e.add_argument("--unlabeled", metavar="PATH")
    e.add_argument("--alpha", type=float, default=0.05)
    e.add_argument("--out", metavar="PATH", help="report path (stdout if omitted)")
    e.add_argument("--col-y", default="y", metavar="NAME")
    e.add_argument("--col-fhat", default="fhat", metavar="NAME")
    e.add_argument("--x-prefix", default="x", metavar="PREFIX")
    e.add_argument("--qhat-prefix", default="qhat", metavar="PREFIX")

    s = sub.add_parser("simulate", help="run a Monte Carlo study")
    from .sim import PREDICTORS, SCENARIOS, SimConfig

    dflt = SimConfig()
    s.add_argument("--scenario", choices=SCENARIOS, required=True)
    s.add_argument("--n", type=int, default=None)
    s.add_argument("--big-n", type=int, default=dflt.N_unlabeled)
    s.add_argument("--r", type=float, default=dflt.r)
    s.add_argument("--reps", type=int, default=None)
    s.add_argument("--alpha", type=float, default=dflt.alpha)
    s.add_argument("--seed", type=int, default=dflt.seed)
    s.add_argument("--predictor", choices=PREDICTORS, default=dflt.predictor)
    s.add_argument("--workers", type=int, default=1)
    s.add_argument("--paper-scale", action="store_true", help="n = 500, reps = 1000")
    s.add_argument("--out", required=True, metavar="PATH", help="writes PATH.json and PATH.csv")
    return p


def run_estimate(args):
    check_method_mode(args.method, args.mode)
    cmap = ColumnMap(y=args.col_y, fhat=args.col_fhat, x_prefix=args.x_prefix, qhat_prefix=args.qhat_prefix)
    data = load_dataset(args.labeled, args.unlabeled, args.mode, cmap)
    model = get_model(args.model, data.d)
    result = METHODS[args.method](model, data, args.alpha)
    text = dumps_json(result_record(result, args.mode, args.model)) + "\n"
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


def run_simulate(args):
    from .sim import SimConfig, run_study

    config = SimConfig(
        scenario=args.scenario, N_unlabeled=args.big_n, r=args.r, alpha=args.alpha,
        seed=args.seed, predictor=args.predictor, workers=args.workers,
    )
    if args.paper_scale:
        config = config.paper_scale()
    if args.n is not None:
        config = replace(config, n=args.n)
    if args.reps is not None:
        config = replace(config, reps=args.reps)
    report = run_study(config)
    json_path, csv_path = report.write(args.out)
    print(f"wrote {json_path} and {csv_path}")
    return 0


def main(argv=None):
    args = _parser().parse_args(argv)
    warnings.simplefilter("default")
    warnings.formatwarning = lambda msg, cat, *a, **k: f"warning: {msg}\n"
    try:
        if args.command == "estimate":
            return run_estimate(args)
        return run_simulate(args)
    except (PSPAError, ValueError, ArithmeticError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
