"""Parameter sweeps: one simulation per (series, value, replication), CSV out."""

from __future__ import annotations

import csv
import json
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Any, Iterable

from mumimo_sim.config import SweepSpec, build_config
from mumimo_sim.engine import METRIC_NAMES, run

COUNT_COLUMNS = ("offered", "accepted", "blocked", "delivered", "residual", "cycles",
                 "measured_offered", "measured_blocked", "measured_time")
# frozen column order; runtime_s is only written on request
CSV_COLUMNS = (
    ("series", "axis", "value", "replication", "seed", "M", "N", "K", "B", "scheduler", "backoff_mode",
     "load", "lam", "horizon", "warmup")
    + METRIC_NAMES
    + tuple(f"ci_{name}" for name in METRIC_NAMES)
    + COUNT_COLUMNS
)
RUNTIME_COLUMN = "runtime_s"


class SweepError(RuntimeError):
    pass


def run_point(point: tuple[int, Any, int, dict[str, Any]], axis: str) -> dict[str, Any]:
    s_idx, value, rep, values = point
    started = time.perf_counter()
    try:
        config = build_config(values)
        metrics = run(config)
    except Exception as exc:
        raise SweepError(f"sweep point failed (series={s_idx}, {axis}={value}, replication={rep}, "
                         f"parameters={values}): {exc}") from exc
    row = {
        "series": s_idx, "axis": axis, "value": value, "replication": rep, "seed": config.seed,
        "M": config.M, "N": config.N, "K": config.K, "B": config.B, "scheduler": config.scheduler,
        "backoff_mode": config.backoff_mode, "load": config.offered_load, "lam": config.arrival_rate,
        "horizon": config.horizon, "warmup": config.warmup_packets,
    }
    summary = metrics.to_dict()
    row.update({name: summary[name] for name in METRIC_NAMES})
    row.update({f"ci_{name}": metrics.ci[name] for name in METRIC_NAMES})
    row.update({name: summary[name] for name in COUNT_COLUMNS})
    row[RUNTIME_COLUMN] = time.perf_counter() - started
    return row


def _run_one(args):
    return run_point(*args)


def run_sweep(spec: SweepSpec, parallel: int = 1) -> list[dict[str, Any]]:
    """All rows in spec order, whatever the number of workers."""
    jobs = [(point, spec.axis) for point in spec.points()]
    if parallel <= 1 or len(jobs) <= 1:
        return [_run_one(job) for job in jobs]
    with ProcessPoolExecutor(max_workers=parallel) as pool:
        return list(pool.map(_run_one, jobs))


def write_csv(rows: Iterable[dict[str, Any]], path: str | Path, with_runtime: bool = False):
    columns = list(CSV_COLUMNS) + ([RUNTIME_COLUMN] if with_runtime else [])
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=columns, extrasaction="ignore", lineterminator="\n")
        writer.writeheader()
        for row in rows:
            writer.writerow({k: repr(v) if isinstance(v, float) else v for k, v in row.items()})


def sidecar_path(path: str | Path) -> Path:
    path = Path(path)
    return path.with_name(path.name + ".spec.json")


def write_sidecar(spec: SweepSpec, path: str | Path, parallel: int):
    doc = {"spec": spec.to_dict(), "columns": list(CSV_COLUMNS), "parallel": parallel}
    sidecar_path(path).write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")
