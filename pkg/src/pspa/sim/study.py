"""Replication loop, aggregation and report writers."""
from __future__ import annotations

import csv
import io
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from ..baselines import METHODS, naive_imputation
from ..errors import PSPAError
from ..io import dumps_json
from .dgp import SimConfig, generate

Y_METHODS = ("classical", "ppi", "eif-star", "ppi-pp", "pspa")
X_METHODS = ("classical", "imputation", "pspa")

_RUNNERS = dict(METHODS, imputation=naive_imputation)
# errors a single replicate may raise without invalidating the study
_RECOVERABLE = (PSPAError, ArithmeticError, ValueError, np.linalg.LinAlgError)


def methods_for(config):
    return Y_METHODS if config.kind == "y" else X_METHODS


def replicate_rng(seed, k):
    """Counter-based stream for replicate ``k``; independent of scheduling."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(k,))))


@dataclass(frozen=True)
class ReplicateOutcome:
    index: int
    truth: float
    # per method: (estimate, lower, upper, omega, admissible) or None on failure
    results: dict
    errors: dict = field(default_factory=dict)


def run_replicate(config, k):
    rng = replicate_rng(config.seed, k)
    draw = generate(config, rng)
    model = config.model()
    j = draw.target
    results, errors = {}, {}
    for name in methods_for(config):
        try:
            res = _RUNNERS[name](model, draw.data, config.alpha)
        except _RECOVERABLE as exc:
            results[name] = None
            errors[name] = f"{type(exc).__name__}: {exc}"
            continue
        results[name] = (
            float(res.theta[j]), float(res.ci_lower[j]), float(res.ci_upper[j]),
            float(res.omega.omega[j]), res.admissible,
        )
    return ReplicateOutcome(index=k, truth=draw.truth, results=results, errors=errors)


def _run_chunk(args):
    config, ks = args
    return [run_replicate(config, k) for k in ks]


@dataclass(frozen=True)
class MethodSummary:
    method: str
    reps_ok: int
    failures: int
    coverage: float
    coverage_se: float
    mean_width: float
    mean_width_se: float
    width_ratio: float
    width_ratio_se: float
    mean_omega: float
    mean_omega_se: float
    admissible: int | None = None


@dataclass(frozen=True)
class SimReport:
    config: SimConfig
    truth: float
    methods: tuple
    failure_messages: tuple = ()

    def summary(self, method):
        for m in self.methods:
            if m.method == method:
                return m
        raise KeyError(method)

    def to_dict(self):
        # the worker count is a scheduling detail and does not change results
        meta = {k: v for k, v in asdict(self.config).items() if k != "workers"}
        return {
            "study": {
                **meta,
                "truth": self.truth,
                "target": "theta_1",
                "predictor_note": _PREDICTOR_NOTES[self.config.predictor],
            },
            "methods": [asdict(m) for m in self.methods],
            "failures": list(self.failure_messages),
        }

    def to_json(self):
        return dumps_json(self.to_dict()) + "\n"

    def to_csv(self):
        buf = io.StringIO()
        cols = [f.name for f in MethodSummary.__dataclass_fields__.values()]
        head = ["scenario", "n", "N_unlabeled", "r", "predictor"]
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(head + cols)
        cfg = self.config
        for m in self.methods:
            row = [cfg.scenario, cfg.n, cfg.N_unlabeled, _fmt(cfg.r), cfg.predictor]
            row += [_fmt(getattr(m, c)) for c in cols]
            w.writerow(row)
        return buf.getvalue()

    def write(self, path):
        """Write ``<path>.json`` and ``<path>.csv`` (path given without suffix)."""
        path = str(path)
        for suffix in (".json", ".csv"):
            if path.endswith(suffix):
                path = path[: -len(suffix)]
        with open(path + ".json", "w", encoding="utf-8", newline="\n") as fh:
            fh.write(self.to_json())
        with open(path + ".csv", "w", encoding="utf-8", newline="\n") as fh:
            fh.write(self.to_csv())
        return path + ".json", path + ".csv"


_PREDICTOR_NOTES = {
    "ridge": "ridge-regularised linear predictor fitted on the hold-out rows",
    "forest": "100-tree regression forest fitted on the hold-out rows",
}


def _fmt(v):
    if isinstance(v, float):
        return "%.17g" % v
    if v is None:
        return ""
    return str(v)


def _mean_se(x):
    x = np.asarray(x, dtype=np.float64)
    if x.size == 0:
        return float("nan"), float("nan")
    se = float(np.std(x, ddof=1) / np.sqrt(x.size)) if x.size > 1 else 0.0
    return float(np.mean(x)), se


def aggregate(config, outcomes):
    """Order-independent reduction: outcomes are sorted by replicate index."""
    outcomes = sorted(outcomes, key=lambda o: o.index)
    truth = outcomes[0].truth
    summaries, messages = [], []
    for name in methods_for(config):
        hits, widths, ratios, omegas, adm = [], [], [], [], 0
        failures = 0
        for o in outcomes:
            r = o.results.get(name)
            if r is None:
                failures += 1
                messages.append(f"rep {o.index} {name}: {o.errors.get(name, 'failed')}")
                continue
            est, lo, hi, w, ok = r
            hits.append(1.0 if lo <= o.truth <= hi else 0.0)
            widths.append(hi - lo)
            omegas.append(w)
            if ok:
                adm += 1
            base = o.results.get("classical")
            if base is not None and base[2] > base[1]:
                ratios.append((hi - lo) / (base[2] - base[1]))
        cov, _ = _mean_se(hits)
        cov_se = float(np.sqrt(cov * (1 - cov) / len(hits))) if hits else float("nan")
        mw, mw_se = _mean_se(widths)
        wr, wr_se = _mean_se(ratios)
        mo, mo_se = _mean_se(omegas)
        summaries.append(MethodSummary(
            method=name, reps_ok=len(hits), failures=failures,
            coverage=cov, coverage_se=cov_se, mean_width=mw, mean_width_se=mw_se,
            width_ratio=wr, width_ratio_se=wr_se, mean_omega=mo, mean_omega_se=mo_se,
            admissible=adm if config.kind == "x" else None,
        ))
    return SimReport(config=config, truth=truth, methods=tuple(summaries), failure_messages=tuple(messages))


def run_study(config: SimConfig) -> SimReport:
    """Run ``config.reps`` replicates and aggregate them.

    With ``workers > 1`` replicates are split into contiguous chunks across
    processes; every replicate owns its own RNG stream, so the report does not
    depend on the worker count.
    """
    ks = list(range(config.reps))
    if config.workers <= 1:
        outcomes = [run_replicate(config, k) for k in ks]
    else:
        chunks = [(config, c.tolist()) for c in np.array_split(ks, config.workers * 4) if len(c)]
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            outcomes = [o for chunk in pool.map(_run_chunk, chunks) for o in chunk]
    return aggregate(config, outcomes)
