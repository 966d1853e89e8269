"""Experiment runner writing reproducible CSV files.

Every output starts with a ``#`` comment line holding the effective spec as
JSON, so a file can be regenerated from its own header. Trial ``i`` runs with
seed ``seed + i``.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import os
import sys
import tempfile
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np

from .metrics import (
    MetricsRecord,
    measure,
    phase_chain_expected_time,
    theoretical_degree,
    theoretical_latency,
)
from .simulator import ChurnConfig, build_stable, default_rates, inject_link_failures, run_churn, run_static
from .topology import level_count

log = logging.getLogger("recursive_dht")

SUBCOMMANDS = ("static", "churn", "sweep-k", "fault", "theory")


@dataclass
class ExperimentSpec:
    subcommand: str
    regime: str = "stable"
    join_rate: Optional[float] = None
    leave_rate: Optional[float] = None
    churn_rate: float = 4.0
    ticks: int = 50
    n_initial: int = 2048
    k: int = 4
    seed: int = 0
    lookups_per_tick: int = 1000
    k_list: list = field(default_factory=list)
    p_list: list = field(default_factory=list)
    trials: int = 1
    ideal: bool = False
    warmup: int = 20
    output: Optional[str] = None
    jobs: int = 1

    def header(self) -> dict:
        """Spec fields that determine the output bytes."""
        d = asdict(self)
        for key in ("output", "jobs"):
            d.pop(key)
        return d


# --- argument handling -------------------------------------------------------

def _int_list(text: str) -> list[int]:
    return _parse_list(text, int)


def _float_list(text: str) -> list[float]:
    return _parse_list(text, float)


def _parse_list(text, conv):
    if isinstance(text, list):
        return text
    text = text.strip()
    if not text:
        return []
    out = []
    for part in text.split(","):
        part = part.strip()
        if ":" in part:
            # a:b[:step], inclusive
            bits = [conv(b) for b in part.split(":")]
            lo, hi = bits[0], bits[1]
            step = bits[2] if len(bits) > 2 else conv(1)
            if step <= 0:
                raise argparse.ArgumentTypeError(f"non-positive step in {part!r}")
            n = int(math.floor((hi - lo) / step + 1e-9)) + 1
            out.extend(conv(round(lo + i * step, 12)) for i in range(max(n, 0)))
        else:
            out.append(conv(part))
    return out


def _bool(text) -> bool:
    if isinstance(text, bool):
        return text
    v = str(text).strip().lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off", ""):
        return False
    raise argparse.ArgumentTypeError(f"not a boolean: {text!r}")


def read_config(path: str) -> dict:
    """Flat ``key = value`` file; ``#`` starts a comment, dashes equal underscores."""
    out = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected key=value")
            key, value = (s.strip() for s in line.split("=", 1))
            out[key.replace("-", "_")] = value
    return out


def _add_common(p: argparse.ArgumentParser, n_default: int, k_list_default: str = "") -> None:
    p.add_argument("--config", help="flat key=value file; command-line flags win")
    p.add_argument("-o", "--output", help="CSV path (default: stdout)")
    p.add_argument("--seed", type=int, default=0, help="base seed; trial i uses seed+i")
    p.add_argument("--trials", type=int, default=1)
    p.add_argument("--jobs", type=int, default=1, help="parallel worker processes")
    p.add_argument("--k", type=int, default=4)
    p.add_argument("--n-initial", "--n", dest="n_initial", type=int, default=n_default)
    p.add_argument("--lookups-per-tick", "--lookups", dest="lookups_per_tick", type=int, default=1000)
    p.add_argument("--k-list", type=_int_list, default=k_list_default)
    p.add_argument("--p-list", type=_float_list, default="")
    p.add_argument("--regime", choices=("static", "expanding", "shrinking", "stable"), default="stable")
    p.add_argument("--join-rate", type=float, default=None)
    p.add_argument("--leave-rate", type=float, default=None)
    p.add_argument("--churn-rate", type=float, default=4.0,
                   help="base event rate used when join/leave rates are not given")
    p.add_argument("--ticks", type=int, default=50)
    p.add_argument("--warmup", type=int, default=20, help="balanced-churn ticks before measuring")
    p.add_argument("--ideal", type=_bool, nargs="?", const=True, default=False,
                   help="evenly spaced ids i/n (static only)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="recursive-dht", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="subcommand", required=True)
    _add_common(sub.add_parser("static", help="static networks with known size"), 1024)
    _add_common(sub.add_parser("churn", help="time series under a churn regime"), 2048)
    _add_common(sub.add_parser("sweep-k", help="degree/latency tradeoff across k"), 2096, "3:9")
    _add_common(sub.add_parser("fault", help="latency under random link failures"), 2048, "3,5,7")
    _add_common(sub.add_parser("theory", help="closed-form degree/latency curves"), 2**15, "2:16")
    parser._subs = sub  # type: ignore[attr-defined]
    return parser


def parse_spec(argv=None) -> ExperimentSpec:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.config:
        try:
            conf = read_config(args.config)
        except (OSError, ValueError) as exc:
            parser.error(f"cannot read config: {exc}")
        sub = parser._subs.choices[args.subcommand]  # type: ignore[attr-defined]
        known = {a.dest for a in sub._actions}
        unknown = sorted(set(conf) - known - {"subcommand"})
        if unknown:
            parser.error(f"unknown config keys: {', '.join(unknown)}")
        conf.pop("subcommand", None)
        conf.pop("config", None)
        sub.set_defaults(**conf)
        args = parser.parse_args(argv)
        args.ideal = _bool(args.ideal)
    spec = ExperimentSpec(**{k: v for k, v in vars(args).items() if k not in ("config", "verbose")})
    if args.verbose:
        logging.basicConfig(level=logging.INFO, stream=sys.stderr)
    _validate(parser, spec)
    return spec


def _validate(parser, s: ExperimentSpec) -> None:
    if s.trials < 1:
        parser.error("--trials must be >= 1")
    if s.jobs < 1:
        parser.error("--jobs must be >= 1")
    if s.k < 2:
        parser.error("--k must be >= 2")
    if s.n_initial < 1:
        parser.error("--n-initial must be >= 1")
    if s.ticks < 0 or s.warmup < 0 or s.lookups_per_tick < 0:
        parser.error("--ticks, --warmup and --lookups-per-tick must be non-negative")
    if s.subcommand in ("sweep-k", "fault", "theory"):
        if not s.k_list:
            parser.error("--k-list must name at least one k")
        if any(k < 2 for k in s.k_list):
            parser.error("every k in --k-list must be >= 2")
    if s.subcommand == "fault":
        if not s.p_list:
            s.p_list = [round(i / 10, 1) for i in range(10)]
        if any(not 0 <= p <= 1 for p in s.p_list):
            parser.error("every p in --p-list must lie in [0, 1]")
    if s.subcommand == "theory" and s.n_initial < 2:
        parser.error("theory needs --n-initial >= 2")
    if s.subcommand == "churn":
        j, l = default_rates(s.regime, s.churn_rate)
        s.join_rate = j if s.join_rate is None else s.join_rate
        s.leave_rate = l if s.leave_rate is None else s.leave_rate
        try:
            _churn_config(s, 0)
        except ValueError as exc:
            parser.error(str(exc))


def _churn_config(s: ExperimentSpec, trial: int) -> ChurnConfig:
    return ChurnConfig(regime=s.regime, join_rate=s.join_rate, leave_rate=s.leave_rate,
                       ticks=s.ticks, n_initial=s.n_initial, k=s.k, seed=s.seed + trial,
                       lookups_per_tick=s.lookups_per_tick)


# --- subcommands ---------------------------------------------------------------

STATIC_COLUMNS = ["trial", "seed", "n", "k", "ideal"] + MetricsRecord.columns()
CHURN_COLUMNS = ["trial", "seed", "regime", "k", "log2_n_actual"] + MetricsRecord.columns()
SWEEP_COLUMNS = ["trial", "seed", "k", "n_actual", "mean_degree", "mean_hops", "hops_stderr",
                 "unreachable_fraction", "theoretical_degree", "theoretical_latency"]
FAULT_COLUMNS = ["trial", "seed", "k", "p", "n_actual", "mean_hops", "hops_stderr",
                 "p50_hops", "p99_hops", "unreachable_fraction"]
THEORY_COLUMNS = ["k", "n", "levels", "static_degree", "theoretical_degree",
                  "theoretical_latency", "phase_chain_expected_time"]


def _static_trial(s: ExperimentSpec, trial: int) -> list[dict]:
    seed = s.seed + trial
    _, rec = run_static(s.n_initial, s.k, seed, ideal=s.ideal, lookups=s.lookups_per_tick)
    return [{"trial": trial, "seed": seed, "n": s.n_initial, "k": s.k, "ideal": int(s.ideal), **rec.row()}]


def _churn_trial(s: ExperimentSpec, trial: int) -> list[dict]:
    cfg = _churn_config(s, trial)
    return [{"trial": trial, "seed": cfg.seed, "regime": cfg.regime, "k": cfg.k,
             "log2_n_actual": math.log2(rec.n_actual), **rec.row()} for rec in run_churn(cfg)]


def _stable_network(s: ExperimentSpec, k: int, seed: int):
    return build_stable(s.n_initial, k, seed, warmup_ticks=s.warmup, rate=s.churn_rate)


def _sweep_trial(s: ExperimentSpec, trial: int) -> list[dict]:
    seed = s.seed + trial
    rows = []
    for k in s.k_list:
        net = _stable_network(s, k, seed)
        rec = measure(net, s.lookups_per_tick, np.random.default_rng([seed, 1]))
        n = rec.n_actual
        rows.append({
            "trial": trial, "seed": seed, "k": k, "n_actual": n,
            "mean_degree": rec.mean_out_degree, "mean_hops": rec.mean_hops,
            "hops_stderr": rec.hops_stderr, "unreachable_fraction": rec.unreachable_fraction,
            "theoretical_degree": theoretical_degree(n, k) if n > 1 else 0.0,
            "theoretical_latency": theoretical_latency(n, k) if n > 1 else 0.0,
        })
    return rows


def _fault_trial(s: ExperimentSpec, trial: int) -> list[dict]:
    seed = s.seed + trial
    rows = []
    for k in s.k_list:
        net = _stable_network(s, k, seed)
        for i, p in enumerate(s.p_list):
            view = inject_link_failures(net, p, np.random.default_rng([seed, 2, k, i]))
            # same lookup pairs for every p
            rec = measure(view, s.lookups_per_tick, np.random.default_rng([seed, 1, k]))
            rows.append({
                "trial": trial, "seed": seed, "k": k, "p": p, "n_actual": rec.n_actual,
                "mean_hops": rec.mean_hops, "hops_stderr": rec.hops_stderr,
                "p50_hops": rec.p50_hops, "p99_hops": rec.p99_hops,
                "unreachable_fraction": rec.unreachable_fraction,
            })
    return rows


def _theory_rows(s: ExperimentSpec) -> list[dict]:
    n = s.n_initial
    rows = []
    for k in s.k_list:
        c = level_count(n, k)
        rows.append({
            "k": k, "n": n, "levels": c, "static_degree": (c - 1) * (k - 1) + k,
            "theoretical_degree": theoretical_degree(n, k),
            "theoretical_latency": theoretical_latency(n, k),
            "phase_chain_expected_time": phase_chain_expected_time(c, k),
        })
    return rows


TRIALS = {"static": _static_trial, "churn": _churn_trial, "sweep-k": _sweep_trial, "fault": _fault_trial}
COLUMNS = {"static": STATIC_COLUMNS, "churn": CHURN_COLUMNS, "sweep-k": SWEEP_COLUMNS,
           "fault": FAULT_COLUMNS, "theory": THEORY_COLUMNS}


def _run_trial(args):
    spec, trial = args
    return TRIALS[spec.subcommand](spec, trial)


def run(spec: ExperimentSpec) -> list[dict]:
    if spec.subcommand == "theory":
        return _theory_rows(spec)
    work = [(spec, t) for t in range(spec.trials)]
    if spec.jobs > 1 and spec.trials > 1:
        with ProcessPoolExecutor(max_workers=spec.jobs) as pool:
            chunks = list(pool.map(_run_trial, work))
    else:
        chunks = [_run_trial(w) for w in work]
    # map() preserves trial order, so parallel runs write the same bytes
    return [row for chunk in chunks for row in chunk]


def render_csv(spec: ExperimentSpec, rows: list[dict]) -> str:
    buf = io.StringIO()
    buf.write(f"# recursive-dht {spec.subcommand} {json.dumps(spec.header(), sort_keys=True)}\n")
    writer = csv.DictWriter(buf, fieldnames=COLUMNS[spec.subcommand], lineterminator="\r\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({k: repr(v) if isinstance(v, float) else v for k, v in row.items()})
    return buf.getvalue()


def write_atomic(path: str, text: str) -> None:
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(prefix=".tmp-", suffix=".csv", dir=directory)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def main(argv=None) -> int:
    spec = parse_spec(argv)
    try:
        text = render_csv(spec, run(spec))
        if spec.output in (None, "-"):
            sys.stdout.write(text)
        else:
            write_atomic(spec.output, text)
    except Exception as exc:  # report, never leave partial output
        print(f"recursive-dht: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
