"""
Command-line interface

    netsample simulate --config PATH --out DIR [--replicates R] [--seed S] [--snapshot-out PATH]
    netsample compare  --baseline PATH --variant PATH --snapshot PATH --out DIR --replicates R --seed S
    netsample burnin   --config PATH --steps N --snapshot-out PATH --seed S
    netsample sweep    --config PATH --param KEY --values v1,v2,... --out DIR

Exit codes: 0 success, 2 config or snapshot input error, 3 contract
violation or failed replicate.
"""

import argparse
import logging
import sys
from dataclasses import replace
from typing import List, Optional

from .config import ConfigError, ConfigManager, ScenarioConfig, parse_value
from .engine import burnin, compare, run_replicates, sweep
from .snapshot import SnapshotError
from .utils import setup_logging
from .world import ContractViolation

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_RUNTIME = 3


class ReplicateFailure(RuntimeError):
    """At least one replicate did not finish"""


def build_arg_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="netsample",
        description="Dynamic spatial network simulator with link-tracing sampling designs",
    )
    parser.add_argument("--log-level", default=None, type=str.upper,
                        choices=["DEBUG", "INFO", "WARNING", "ERROR"], help="Override logging.level")
    parser.add_argument("--quiet", action="store_true", help="Hide progress bars")
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="Run replicates of one scenario")
    sim.add_argument("--config", required=True)
    sim.add_argument("--out", required=True)
    sim.add_argument("--replicates", type=int)
    sim.add_argument("--seed", type=int)
    sim.add_argument("--steps", type=int)
    sim.add_argument("--workers", type=int)
    sim.add_argument("--snapshot-in")
    sim.add_argument("--snapshot-out")

    cmp_ = sub.add_parser("compare", help="Paired comparison of two scenarios from a shared burn-in")
    cmp_.add_argument("--baseline", required=True)
    cmp_.add_argument("--variant", required=True)
    cmp_.add_argument("--snapshot", required=True, help="Burn-in snapshot; created from the baseline if missing")
    cmp_.add_argument("--out", required=True)
    cmp_.add_argument("--replicates", type=int, required=True)
    cmp_.add_argument("--seed", type=int, required=True)
    cmp_.add_argument("--workers", type=int)

    burn = sub.add_parser("burnin", help="Run a burn-in and save its snapshot")
    burn.add_argument("--config", required=True)
    burn.add_argument("--steps", type=int, required=True)
    burn.add_argument("--snapshot-out", required=True)
    burn.add_argument("--seed", type=int, required=True)

    swp = sub.add_parser("sweep", help="Re-run a scenario over values of one parameter")
    swp.add_argument("--config", required=True)
    swp.add_argument("--param", required=True, help="Dotted key, e.g. links.base_prob")
    swp.add_argument("--values", required=True, help="Comma-separated values")
    swp.add_argument("--out", required=True)
    swp.add_argument("--replicates", type=int)
    swp.add_argument("--seed", type=int)
    swp.add_argument("--workers", type=int)
    return parser


def _load(manager: ConfigManager, args, path: str) -> ScenarioConfig:
    """Load a scenario and apply its logging section (--log-level wins)"""
    cfg = manager.load_config(path)
    setup_logging(level=args.log_level or cfg.logging.level, log_file=cfg.logging.file)
    return cfg


def _with_run(cfg: ScenarioConfig, **changes) -> ScenarioConfig:
    changes = {k: v for k, v in changes.items() if v is not None}
    if not changes:
        return cfg
    run = replace(cfg.run, **changes)
    problems = run.validate()
    if problems:
        raise ConfigError("Invalid run options:\n  " + "\n  ".join(problems))
    return replace(cfg, run=run)


def _check(results) -> None:
    failed = [r for r in results if not r.ok]
    if failed:
        raise ReplicateFailure(f"{len(failed)} replicate(s) failed: "
                               + "; ".join(f"{r.scenario}[{r.replicate}] {r.error}" for r in failed))


def _cmd_simulate(args, manager: ConfigManager, progress: bool):
    cfg = _with_run(_load(manager, args, args.config), replicates=args.replicates, base_seed=args.seed,
                    steps=args.steps, workers=args.workers, snapshot_in=args.snapshot_in,
                    snapshot_out=args.snapshot_out, output_dir=args.out)
    _check(run_replicates(cfg, args.out, progress=progress))


def _cmd_compare(args, manager: ConfigManager, progress: bool):
    baseline = _load(manager, args, args.baseline)
    variant = _load(manager, args, args.variant)
    summary = compare(baseline, variant, args.snapshot, args.out, replicates=args.replicates,
                      base_seed=args.seed, workers=args.workers, progress=progress)
    if summary["paired"] < summary["replicates"]:
        raise ReplicateFailure(f"Only {summary['paired']}/{summary['replicates']} replicate pairs completed")


def _cmd_burnin(args, manager: ConfigManager, progress: bool):
    cfg = _load(manager, args, args.config)
    burnin(cfg, args.steps, args.snapshot_out, base_seed=args.seed, progress=progress)


def _cmd_sweep(args, manager: ConfigManager, progress: bool):
    cfg = _load(manager, args, args.config)
    values = [parse_value(v.strip()) for v in args.values.split(",") if v.strip()]
    if not values:
        raise ConfigError("--values needs at least one value")
    rows = sweep(cfg, args.param, values, args.out, replicates=args.replicates, base_seed=args.seed,
                 workers=args.workers, progress=progress)
    failed = [r for r in rows if r["status"] != "ok"]
    if failed:
        raise ReplicateFailure(f"{len(failed)} sweep replicate(s) failed")


COMMANDS = {
    "simulate": _cmd_simulate,
    "compare": _cmd_compare,
    "burnin": _cmd_burnin,
    "sweep": _cmd_sweep,
}


def main(argv: Optional[List[str]] = None) -> int:
    args = build_arg_parser().parse_args(argv)
    setup_logging(level=args.log_level or "INFO")
    progress = not args.quiet and sys.stderr.isatty()
    manager = ConfigManager()

    try:
        COMMANDS[args.command](args, manager, progress)
    except (ConfigError, SnapshotError, FileNotFoundError) as e:
        logger.error(str(e))
        return EXIT_CONFIG
    except (ContractViolation, ReplicateFailure) as e:
        logger.error(str(e))
        return EXIT_RUNTIME
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
