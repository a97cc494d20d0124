"""Command-line entry point: ``v2v-blockage <subcommand> [options]``.

Exit codes: 0 success, 1 validation/tolerance failure, 2 config or I/O error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import sys
from pathlib import Path

import numpy as np

from .experiments import Table, build_table
from .runconfig import EXPERIMENTS, ConfigError, RunConfig, echo_lines, load_config, resolved
from .sim import ConfigurationError, LaneRule

log = logging.getLogger("v2v_blockage")

EXIT_OK, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2


def parse_grid(text: str) -> tuple[float, ...]:
    """``"a,b,c"`` or inclusive ``"start:stop:step"``."""
    text = text.strip()
    if ":" in text:
        parts = [float(p) for p in text.split(":")]
        if len(parts) != 3 or parts[2] <= 0:
            raise argparse.ArgumentTypeError(f"bad range {text!r}, want start:stop:step")
        start, stop, step = parts
        n = int(math.floor((stop - start) / step + 1e-9)) + 1
        return tuple(round(start + i * step, 12) for i in range(max(n, 0)))
    try:
        return tuple(float(p) for p in text.split(",") if p.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad grid {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="v2v-blockage",
        description="Vehicle blockage model for mmWave V2V links: analytic curves and Monte Carlo checks.",
    )
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in EXPERIMENTS:
        p = sub.add_parser(name)
        p.add_argument("--config", type=Path, help="YAML run config (defaults to the parameter table)")
        p.add_argument("--trials", type=int, help="Monte Carlo trials per grid point (0 = analytic only)")
        p.add_argument("--seed", type=int, help="master seed")
        p.add_argument("--workers", type=int, help="worker processes for the simulator")
        p.add_argument("--out", type=Path, help="output file (stdout if omitted)")
        p.add_argument("--format", choices=("csv", "json"))
        p.add_argument("--dtr", type=parse_grid, help="distances in m, e.g. 10:200:10 or 25,50")
        p.add_argument("--rho", type=parse_grid, help="per-lane densities in veh/m")
        p.add_argument("--gamma-th", type=parse_grid, help="SNR thresholds in dB (write --gamma-th=-5,5 for negatives)")
        p.add_argument("--placement", choices=("rooftop", "bumper", "same-lane", "neighbor-lane", "different-lane"))
    return parser


def apply_overrides(cfg: RunConfig, args: argparse.Namespace) -> RunConfig:
    changes = {"experiment": args.command}
    for attr, key in (("trials", "trials"), ("seed", "seed"), ("workers", "workers"), ("format", "format"),
                      ("dtr", "distances"), ("rho", "densities"), ("gamma_th", "thresholds")):
        value = getattr(args, attr)
        if value is not None:
            changes[key] = value
    if args.out is not None:
        changes["out"] = str(args.out)
    if args.placement in ("rooftop", "bumper"):
        changes["scenario"] = cfg.scenario.with_(placement=args.placement)
    elif args.placement is not None:
        changes["lane_rule"] = LaneRule(args.placement)
    defaults = set(cfg.defaults)
    for key in changes:
        defaults.discard(f"run.{key}")
    if "scenario" in changes:
        defaults.discard("scenario.placement")
    changes["defaults"] = frozenset(defaults)
    try:
        return cfg.with_(**changes)
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from None


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        if math.isnan(value):
            return "nan"
        return f"{float(value):.6g}"
    return str(value)


def render_csv(cfg: RunConfig, table: Table) -> str:
    buf = io.StringIO()
    for line in echo_lines(cfg):
        buf.write(f"# {line}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(table.columns)
    for row in table.rows:
        writer.writerow([_fmt(row.get(c)) for c in table.columns])
    return buf.getvalue()


def _json_value(value):
    if isinstance(value, (np.bool_,)):
        return bool(value)
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, (float, np.floating)):
        return None if math.isnan(value) else float(value)
    return value


def render_json(cfg: RunConfig, table: Table) -> str:
    doc = {
        "config": resolved(cfg),
        "defaults": sorted(cfg.defaults),
        "columns": table.columns,
        "rows": [{c: _json_value(row.get(c)) for c in table.columns} for row in table.rows],
        "failed": table.failed,
    }
    return json.dumps(doc, indent=2, sort_keys=False) + "\n"


def run(cfg: RunConfig) -> int:
    """Build the experiment table, write it, return the exit status."""
    table = build_table(cfg)
    text = render_json(cfg, table) if cfg.format == "json" else render_csv(cfg, table)
    if cfg.out:
        Path(cfg.out).write_text(text)
    else:
        sys.stdout.write(text)
    if table.failed:
        failed = [r for r in table.rows if r.get("passed") is False]
        for r in failed:
            log.error("check %s failed: %.4g > %.4g (rho=%s, d_tr=%s, %s)", r["check"], r["statistic"],
                      r["tolerance"], r["rho"], r["d_tr"], r["placement"])
        return EXIT_FAIL
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        cfg = apply_overrides(load_config(args.config), args)
        return run(cfg)
    except (ConfigError, ConfigurationError) as exc:
        log.error("%s", exc)
        return EXIT_CONFIG
    except OSError as exc:
        log.error("I/O error: %s", exc)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
