"""Command-line front end: ``run``, ``sweep``, ``timing`` and ``trace``."""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from typing import Any, Optional, Sequence

from mumimo_sim import presets
from mumimo_sim.config import SweepSpec, build_config, config_to_dict, load_toml, parse_overrides
from mumimo_sim.engine import TRACE_HEADER, ConfigError, run
from mumimo_sim.phy_timing import PhyMacParams, cycle_duration, s_max
from mumimo_sim.sweep import SweepError, run_sweep, sidecar_path, write_csv, write_sidecar

PARALLEL_ENV = "MUMIMO_SIM_PARALLEL"


def _run_values(args) -> dict[str, Any]:
    values: dict[str, Any] = {}
    if args.preset:
        values.update(presets.get_run_preset(args.preset))
    if args.config:
        values.update(load_toml(args.config))
    values.update(parse_overrides(args.set))
    if args.seed is not None:
        values["seed"] = args.seed
    return values


def _dumps(doc) -> str:
    # NaN is not valid JSON
    def clean(v):
        if isinstance(v, float) and not math.isfinite(v):
            return None
        if isinstance(v, dict):
            return {k: clean(x) for k, x in v.items()}
        if isinstance(v, (list, tuple)):
            return [clean(x) for x in v]
        return v

    return json.dumps(clean(doc), indent=2, sort_keys=True)


def cmd_run(args) -> int:
    config = build_config(_run_values(args))
    metrics = run(config)
    doc = {"config": config_to_dict(config), "metrics": metrics.to_dict()}
    text = _dumps(doc)
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(text + "\n")
    print(text)
    return 0


def cmd_trace(args) -> int:
    config = build_config(_run_values(args))
    lines = [TRACE_HEADER]
    run(config, trace=lambda event: lines.append(event.format()))
    text = "\n".join(lines) + "\n"
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


def cmd_sweep(args) -> int:
    if args.preset:
        data = presets.get_sweep_preset(args.preset)
    elif args.config:
        data = load_toml(args.config)
    else:
        raise ConfigError("--config", "a sweep spec file or --preset is required")
    spec = SweepSpec.from_mapping(data)
    spec.base.update(parse_overrides(args.set))
    if args.seed is not None:
        spec.base["seed"] = args.seed
    parallel = args.parallel if args.parallel is not None else int(os.environ.get(PARALLEL_ENV, "1"))
    rows = run_sweep(spec, parallel=parallel)
    write_csv(rows, args.output, with_runtime=args.with_runtime)
    write_sidecar(spec, args.output, parallel)
    print(f"wrote {len(rows)} rows to {args.output} (spec in {sidecar_path(args.output)})", file=sys.stderr)
    return 0


def _timing_table(M: int, B: int, phy: PhyMacParams) -> str:
    cycle = cycle_duration(M, B, M, phy)
    lines = [f"cycle T({M},{B}) with M={M} antennas", f"{'phase':<12}{'duration_us':>14}"]
    lines += [f"{name:<12}{value:>14.1f}" for name, value in cycle.as_rows()]
    lines.append(f"{'S_max':<12}{s_max(M, B, phy) / 1e6:>14.2f} Mbps")
    return "\n".join(lines)


def cmd_timing(args) -> int:
    phy_values = {}
    if args.config:
        phy_values.update(load_toml(args.config).get("phy", {}))
    for key, value in parse_overrides(args.set).items():
        phy_values[key[4:] if key.startswith("phy.") else key] = value
    try:
        phy = PhyMacParams.from_mapping(phy_values)
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError("phy", str(exc)) from exc
    if args.preset:
        if args.preset not in presets.TIMING_PRESETS:
            raise KeyError(f"unknown timing preset {args.preset!r}; choose from {sorted(presets.TIMING_PRESETS)}")
        grid = presets.TIMING_PRESETS[args.preset]
        print("S_max (Mbps)")
        print("M\\B" + "".join(f"{b:>10}" for b in grid["B"]))
        for m in grid["M"]:
            print(f"{m:<3}" + "".join(f"{s_max(m, b, phy) / 1e6:>10.2f}" for b in grid["B"]))
        return 0
    if args.M is None or args.B is None:
        args.parser.error("timing needs M and B (or --preset smax-table)")
    if args.M < 1 or args.B < 1:
        args.parser.error("M and B must be >= 1")
    print(_timing_table(args.M, args.B, phy))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mumimo-sim", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, output_help):
        p.add_argument("--config", help="TOML configuration file")
        p.add_argument("--preset", help=f"named preset ({', '.join(presets.ALL_PRESETS)})")
        p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE", help="override a key (repeatable)")
        p.add_argument("--seed", type=int)
        p.add_argument("--output", help=output_help)

    p = sub.add_parser("run", help="run one simulation and print metrics as JSON")
    common(p, "also write the JSON here")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("trace", help="print the event trace of one simulation")
    common(p, "write the trace here instead of stdout")
    p.set_defaults(func=cmd_trace)

    p = sub.add_parser("sweep", help="run a parameter sweep into a CSV file")
    common(p, "CSV output path")
    p.add_argument("--parallel", type=int, help=f"worker processes (default ${PARALLEL_ENV} or 1)")
    p.add_argument("--with-runtime", action="store_true", help="append a wall-clock runtime column")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("timing", help="cycle-duration breakdown and saturation throughput")
    p.add_argument("M", type=int, nargs="?")
    p.add_argument("B", type=int, nargs="?")
    p.add_argument("--config", help="TOML file whose [phy] table overrides the defaults")
    p.add_argument("--preset", help="smax-table")
    p.add_argument("--set", action="append", default=[], metavar="phy.KEY=VALUE")
    p.set_defaults(func=cmd_timing, parser=p)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "sweep" and not args.output:
        parser.error("sweep needs --output")
    try:
        return args.func(args)
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ConfigError as exc:
        print(f"error: invalid configuration key {exc}", file=sys.stderr)
        return 2
    except KeyError as exc:
        print(f"error: {exc.args[0]}", file=sys.stderr)
        return 2
    except SweepError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
