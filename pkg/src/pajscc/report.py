"""Per-GoP CSV and multi-seed summary JSON writers."""
from __future__ import annotations

import csv
import io
import json
import math
import statistics

from .sim import SimReport

CSV_COLUMNS = ("gop_index", "time_s", "paths", "v_kbps", "k", "n", "predicted_pi_star",
               "realized_loss", "mse", "psnr_db", "outcome")

Z95 = 1.959963984540054

_NUM = {"type": "number"}
_BASELINE = {
    "type": "object",
    "required": ["runs", "mean_psnr_db", "stddev_psnr_db", "ci95_half_width_db",
                 "mean_gop_stddev_psnr_db", "mean_realized_loss", "mean_predicted_pi_star",
                 "per_seed"],
    "additionalProperties": False,
    "properties": {
        "runs": {"type": "integer", "minimum": 1},
        "mean_psnr_db": _NUM,
        "stddev_psnr_db": {"type": "number", "minimum": 0},
        "ci95_half_width_db": {"type": "number", "minimum": 0},
        "mean_gop_stddev_psnr_db": {"type": "number", "minimum": 0},
        "mean_realized_loss": {"type": "number", "minimum": 0, "maximum": 1},
        "mean_predicted_pi_star": {"type": "number", "minimum": 0, "maximum": 1},
        "per_seed": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["seed", "gops", "mean_psnr_db", "stddev_psnr_db",
                             "mean_realized_loss", "utilization"],
                "additionalProperties": False,
                "properties": {
                    "seed": {"type": "integer"},
                    "gops": {"type": "integer", "minimum": 1},
                    "mean_psnr_db": _NUM,
                    "stddev_psnr_db": {"type": "number", "minimum": 0},
                    "mean_realized_loss": {"type": "number", "minimum": 0, "maximum": 1},
                    "utilization": {"type": "object", "additionalProperties": _NUM},
                },
            },
        },
    },
}

SUMMARY_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "pajscc run summary",
    "type": "object",
    "required": ["scenario", "seeds", "baselines", "checks"],
    "additionalProperties": False,
    "properties": {
        "scenario": {"type": "string"},
        "seeds": {"type": "array", "items": {"type": "integer"}, "minItems": 1},
        "baselines": {
            "type": "object",
            "propertyNames": {"enum": ["optimized", "equal_split", "best_single_path", "no_fec"]},
            "additionalProperties": _BASELINE,
            "minProperties": 1,
        },
        "checks": {
            "type": "object",
            "required": ["passed", "problems"],
            "additionalProperties": False,
            "properties": {"passed": {"type": "boolean"},
                           "problems": {"type": "array", "items": {"type": "string"}}},
        },
    },
}


def rows_to_csv(report: SimReport) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for r in report.rows:
        writer.writerow([r.gop_index, repr(r.time_s), ";".join(r.paths), repr(r.v_kbps), r.k, r.n,
                         repr(r.predicted_pi_star), repr(r.realized_loss), repr(r.mse),
                         repr(r.psnr_db), r.outcome.value])
    return buf.getvalue()


def aggregate(per_seed: list) -> dict:
    """Across-seed statistics for one baseline.

    ``per_seed`` holds ``(seed, SimReport, packet_bytes)``. The interval is the
    normal-approximation 95% half-width of the mean of per-seed mean PSNRs.
    """
    means = [rep.mean_psnr for _, rep, _ in per_seed]
    sd = statistics.stdev(means) if len(means) > 1 else 0.0
    return {
        "runs": len(per_seed),
        "mean_psnr_db": statistics.fmean(means),
        "stddev_psnr_db": sd,
        "ci95_half_width_db": Z95 * sd / math.sqrt(len(means)),
        "mean_gop_stddev_psnr_db": statistics.fmean(rep.stddev_psnr for _, rep, _ in per_seed),
        "mean_realized_loss": statistics.fmean(rep.mean_realized_loss for _, rep, _ in per_seed),
        "mean_predicted_pi_star": statistics.fmean(rep.mean_predicted_pi_star
                                                   for _, rep, _ in per_seed),
        "per_seed": [{"seed": seed, "gops": len(rep.rows), "mean_psnr_db": rep.mean_psnr,
                      "stddev_psnr_db": rep.stddev_psnr,
                      "mean_realized_loss": rep.mean_realized_loss,
                      "utilization": rep.utilization(s)}
                     for seed, rep, s in per_seed],
    }


def summary_json(summary: dict) -> str:
    return json.dumps(summary, indent=2, sort_keys=True, allow_nan=False) + "\n"
