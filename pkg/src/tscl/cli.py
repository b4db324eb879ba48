"""Command line entry point: ``tscl run | sweep | compare``."""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from .config import load_config, parse_seeds
from .errors import ConfigError, TSCLError
from .harness import ExperimentConfig, aggregate, run_session, trace_to_csv, trace_to_json

EXIT_OK, EXIT_RUNTIME, EXIT_USAGE = 0, 1, 2

AGGREGATE_FIELDS = [
    "label",
    "n_runs",
    "n_mastered",
    "n_censored",
    "median_steps",
    "mean_steps",
    "std_steps",
    "mean_final_min",
    "mean_teacher_return",
    "mean_final_scores",
]
RUN_FIELDS = ["label", "seed", "steps_to_mastery", "n_steps", "final_min_score", "teacher_return"]


def _log(args, msg: str) -> None:
    if not args.quiet:
        print(msg, file=sys.stderr)


def _out_dir(path: str) -> Path:
    out = Path(path)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, list):
        return "|".join(repr(float(x)) for x in v)
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _table(rows: list[dict], fields: list[str], fmt: str) -> str:
    if fmt == "json":
        return json.dumps([{k: r.get(k) for k in fields} for r in rows], indent=1) + "\n"
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(fields)
    for r in rows:
        w.writerow([_cell(r.get(k)) for k in fields])
    return buf.getvalue()


def cmd_run(args) -> int:
    cfg = load_config(args.config)
    seed = args.seed if args.seed is not None else cfg.seeds[0]
    trace = run_session(cfg, seed)
    out = _out_dir(args.out)
    if args.format == "json":
        (out / f"trace_{seed}.json").write_text(trace_to_json(trace))
    else:
        (out / f"trace_{seed}.csv").write_text(trace_to_csv(trace))
    summary = trace.summary()
    (out / f"summary_{seed}.json").write_text(json.dumps(summary, indent=1) + "\n")
    _log(args, f"{cfg.label} seed={seed} steps_to_mastery={trace.steps_to_mastery}")
    return EXIT_OK


def _run_one(job: tuple[ExperimentConfig, int]):
    cfg, seed = job
    return run_session(cfg, seed)


def cmd_sweep(args) -> int:
    configs = [load_config(p) for p in args.config]
    jobs = []
    for cfg in configs:
        seeds = parse_seeds(args.seeds) if args.seeds else cfg.seeds
        jobs.extend((cfg, s) for s in seeds)
    if args.jobs > 1:
        with ProcessPoolExecutor(args.jobs) as ex:
            traces = list(ex.map(_run_one, jobs))
    else:
        traces = [_run_one(j) for j in jobs]

    # results come back in job order, i.e. config order then seed order
    groups: dict[int, list] = {}
    for (cfg, _), tr in zip(jobs, traces):
        groups.setdefault(id(cfg), []).append(tr)
    summaries = [aggregate(groups[id(cfg)]) for cfg in configs]
    runs = [tr.summary() for tr in traces]

    out = _out_dir(args.out)
    ext = "json" if args.format == "json" else "csv"
    (out / f"aggregate.{ext}").write_text(_table(summaries, AGGREGATE_FIELDS, args.format))
    (out / f"runs.{ext}").write_text(_table(runs, RUN_FIELDS, args.format))
    for s in summaries:
        _log(args, f"{s['label']}: median_steps={s['median_steps']} mastered={s['n_mastered']}/{s['n_runs']}")
    return EXIT_OK


def load_summary(path: str) -> list[dict]:
    """Rows of a run summary JSON, or an aggregate table in JSON or CSV."""
    text = Path(path).read_text()
    if path.endswith(".csv"):
        rows = list(csv.DictReader(io.StringIO(text)))
    else:
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: not a summary file ({exc})") from exc
        rows = data if isinstance(data, list) else [data]
    out = []
    for r in rows:
        if "median_steps" in r:
            med, mean = r["median_steps"], r["mean_steps"]
            fmin = r.get("mean_final_min")
        elif "steps_to_mastery" in r:
            steps = r["steps_to_mastery"]
            med = mean = r["max_steps"] if steps is None else steps
            fmin = r.get("final_min_score")
        else:
            raise ConfigError(f"{path}: row without steps information")
        out.append({
            "label": r["label"],
            "median_steps": float(med),
            "mean_steps": float(mean),
            "final_min": None if fmin in (None, "") else float(fmin),
        })
    return out


def _relative(base: float, other: float) -> float | None:
    return None if base == 0 else (base - other) / base


def cmd_compare(args) -> int:
    base = load_summary(args.baseline)
    cand = load_summary(args.candidate)
    if len(base) == 1 and len(cand) == 1:
        pairs = [(base[0], cand[0])]
    else:
        by_label = {r["label"]: r for r in cand}
        pairs = [(b, by_label[b["label"]]) for b in base if b["label"] in by_label]
        if not pairs:
            raise ConfigError("no common labels between the two summaries")
    rows = []
    for b, c in pairs:
        for metric in ("median_steps", "mean_steps"):
            rows.append({
                "baseline": b["label"],
                "candidate": c["label"],
                "metric": metric,
                "baseline_value": b[metric],
                "candidate_value": c[metric],
                "relative_improvement": _relative(b[metric], c[metric]),
            })
    fields = ["baseline", "candidate", "metric", "baseline_value", "candidate_value",
              "relative_improvement"]
    text = _table(rows, fields, args.format)
    if args.out:
        ext = "json" if args.format == "json" else "csv"
        (_out_dir(args.out) / f"compare.{ext}").write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tscl", description="Curriculum scheduling simulator")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=["csv", "json"], default="csv")
    common.add_argument("--quiet", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", parents=[common], help="one config, one seed")
    run.add_argument("--config", required=True)
    run.add_argument("--seed", type=int)
    run.add_argument("--out", required=True)
    run.set_defaults(func=cmd_run)

    sweep = sub.add_parser("sweep", parents=[common], help="configs x seeds, aggregated")
    sweep.add_argument("--config", required=True, action="append",
                       help="may be given several times; one aggregate row each")
    sweep.add_argument("--seeds", help="A..B (inclusive) or a comma list; default from config")
    sweep.add_argument("--out", required=True)
    sweep.add_argument("--jobs", type=int, default=1, help="worker processes")
    sweep.set_defaults(func=cmd_sweep)

    cmp_ = sub.add_parser("compare", parents=[common], help="relative improvement table")
    cmp_.add_argument("baseline")
    cmp_.add_argument("candidate")
    cmp_.add_argument("--out")
    cmp_.set_defaults(func=cmd_compare)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"tscl: config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (OSError, TSCLError) as exc:
        print(f"tscl: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
