"""Command-line front end.

    pajscc run <scenario> [--seeds 1,2,3] [--out DIR] [--baselines optimized,equal_split]
    pajscc validate <scenario>
    pajscc sweep <scenario> --param grid.headroom --values 0.8,0.9,1.0
"""
from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import logging
import sys
from dataclasses import dataclass
from pathlib import Path

import jsonschema

from .config import config_from_dict, load_scenario, set_dotted
from .errors import ConfigError, PajsccError
from .report import SUMMARY_SCHEMA, aggregate, rows_to_csv, summary_json
from .sim import Policy, run_scenario

log = logging.getLogger("pajscc")

BASELINES = tuple(p.value for p in Policy)


@dataclass(frozen=True)
class RunRequest:
    scenario_path: Path
    seeds: tuple
    output_dir: Path
    baselines: tuple = ("optimized",)

    def __post_init__(self):
        if not self.seeds:
            raise ConfigError("at least one seed is required")
        unknown = [b for b in self.baselines if b not in BASELINES]
        if unknown:
            raise ConfigError(f"unknown baseline(s): {', '.join(unknown)}; "
                              f"choose from {', '.join(BASELINES)}")
        if not Path(self.scenario_path).is_file():
            raise ConfigError(f"scenario file {self.scenario_path} does not exist")


def _simulate(config, seeds, baselines):
    """Run every seed x baseline; returns the summary dict and the reports."""
    reports = {}
    aggregates = {}
    problems = []
    for baseline in baselines:
        per_seed = []
        for seed in seeds:
            rep = run_scenario(dataclasses.replace(config, seed=seed), baseline)
            for p in rep.check(config.dist, config.packet_bytes):
                problems.append(f"{baseline} seed {seed}: {p}")
            per_seed.append((seed, rep, config.packet_bytes))
            reports[baseline, seed] = rep
            log.info("%s seed %d: mean PSNR %.3f dB", baseline, seed, rep.mean_psnr)
        aggregates[baseline] = aggregate(per_seed)
    summary = {
        "scenario": config.name,
        "seeds": list(seeds),
        "baselines": aggregates,
        "checks": {"passed": not problems, "problems": problems},
    }
    jsonschema.validate(summary, SUMMARY_SCHEMA)
    return summary, reports


def run(request: RunRequest) -> int:
    """Write ``<baseline>_<seed>.csv`` per run plus ``summary.json``; 0 iff all checks pass."""
    config = load_scenario(request.scenario_path)
    out = Path(request.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    summary, reports = _simulate(config, request.seeds, request.baselines)
    for (baseline, seed), rep in reports.items():
        with open(out / f"{baseline}_{seed}.csv", "w", encoding="utf-8", newline="") as fh:
            fh.write(rows_to_csv(rep))
    with open(out / "summary.json", "w", encoding="utf-8", newline="") as fh:
        fh.write(summary_json(summary))
    for p in summary["checks"]["problems"]:
        log.error("self-check failed: %s", p)
    return 0 if summary["checks"]["passed"] else 1


def _parse_value(text: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def sweep(scenario_path, param, values, seeds=None, baselines=("optimized",), stream=None) -> int:
    """One summary row per (value, baseline), CSV on ``stream``."""
    stream = stream or sys.stdout
    raw = json.loads(Path(scenario_path).read_text(encoding="utf-8"))
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(["param", "value", "baseline", "mean_psnr_db", "stddev_psnr_db",
                     "ci95_half_width_db", "mean_realized_loss", "checks_passed"])
    ok = True
    for text in values:
        config = config_from_dict(set_dotted(raw, param, _parse_value(text)))
        summary, _ = _simulate(config, seeds or [config.seed], baselines)
        ok = ok and summary["checks"]["passed"]
        for b, agg in summary["baselines"].items():
            writer.writerow([param, text, b, repr(agg["mean_psnr_db"]), repr(agg["stddev_psnr_db"]),
                             repr(agg["ci95_half_width_db"]), repr(agg["mean_realized_loss"]),
                             str(summary["checks"]["passed"]).lower()])
    return 0 if ok else 1


def _csv_list(text: str) -> list[str]:
    return [x.strip() for x in text.split(",") if x.strip()]


def _seed_list(text: str) -> list[int]:
    try:
        return [int(x) for x in _csv_list(text)]
    except ValueError:
        raise argparse.ArgumentTypeError(f"seeds must be comma-separated integers: {text!r}")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pajscc", description=(
        "Multipath real-time video simulator with joint source/FEC rate and path allocation."))
    parser.add_argument("-v", "--verbose", action="store_true", help="log per-run progress")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="simulate a scenario for one or more seeds")
    p_run.add_argument("scenario", type=Path)
    p_run.add_argument("--seeds", type=_seed_list, default=None,
                       help="comma-separated seeds (default: the scenario's seed)")
    p_run.add_argument("--out", type=Path, default=Path("out"), help="output directory")
    p_run.add_argument("--baselines", type=_csv_list, default=["optimized"],
                       help=f"comma-separated subset of {','.join(BASELINES)}")

    p_val = sub.add_parser("validate", help="check a scenario file for errors")
    p_val.add_argument("scenario", type=Path)

    p_sw = sub.add_parser("sweep", help="vary one scenario key and summarize each value")
    p_sw.add_argument("scenario", type=Path)
    p_sw.add_argument("--param", required=True, help="dotted key, e.g. paths.1.loss_rate")
    p_sw.add_argument("--values", type=_csv_list, required=True)
    p_sw.add_argument("--seeds", type=_seed_list, default=None)
    p_sw.add_argument("--baselines", type=_csv_list, default=["optimized"])
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        if args.command == "validate":
            config = load_scenario(args.scenario)
            print(f"{args.scenario}: ok ({len(config.paths)} paths, {config.num_gops} GoPs, "
                  f"{len(config.grid.v_candidates)} source rates)")
            return 0
        if args.command == "run":
            seeds = args.seeds
            if seeds is None:
                seeds = [load_scenario(args.scenario).seed]
            request = RunRequest(args.scenario, tuple(seeds), args.out, tuple(args.baselines))
            return run(request)
        bad = [b for b in args.baselines if b not in BASELINES]
        if bad:
            raise ConfigError(f"unknown baseline(s): {', '.join(bad)}")
        load_scenario(args.scenario)
        return sweep(args.scenario, args.param, args.values, args.seeds, tuple(args.baselines))
    except (PajsccError, OSError, jsonschema.ValidationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
