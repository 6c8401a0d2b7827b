"""CLI entrypoint for the Hele-Shaw growth toolkit."""
from __future__ import annotations

import argparse
import logging
from pathlib import Path
from typing import List, Optional

from .config import get_settings, load_run_config, parse_run_config
from .errors import ConfigError, TodaGrowthError
from .runner import ScenarioRunner, manifest_for_failure
from .utils import configure_logging, ensure_output_dir, write_manifest

logger = logging.getLogger(__name__)

COMMANDS = ("simulate", "flows", "moments", "verify", "bihamiltonian")
NEEDS_REDUCTION = ("simulate", "flows", "moments")


def parse_args(argv: Optional[List[str]] = None) -> argparse.Namespace:
    parser = argparse.ArgumentParser(description="Evolve reduced conformal maps under Hele-Shaw growth and Toda flows.")
    parser.add_argument("command", choices=COMMANDS, help="What to run.")
    parser.add_argument("--config", default=None, help="Scenario YAML file.")
    parser.add_argument("--out", default=None, help="Output directory (default: output_root/<command>-<timestamp>).")
    parser.add_argument("--seed", type=int, default=None, help="Seed for randomized fixtures; overrides the config.")
    parser.add_argument("--tol", type=float, default=None, help="String-equation residual tolerance.")
    return parser.parse_args(argv)


def load_config(command: str, path: Optional[str]):
    require = command in NEEDS_REDUCTION
    if path is None:
        if require:
            raise ConfigError("--config", f"required for {command}")
        return parse_run_config({}, require_reduction=False)
    return load_run_config(Path(path), require_reduction=require)


def main(argv: Optional[List[str]] = None) -> int:
    args = parse_args(argv)
    settings = get_settings()
    out_dir = ensure_output_dir(args.out, args.command)
    configure_logging(out_dir / settings.paths.get("log_name", "run.log"), settings.logging.get("level", "INFO"))
    try:
        config = load_config(args.command, args.config)
    except TodaGrowthError as exc:
        logger.error("invalid configuration: %s", exc)
        write_manifest(manifest_for_failure(args.command, {"config": args.config}, exc), out_dir / "manifest.yml")
        return exc.exit_code
    if args.seed is not None:
        config.seed = args.seed
    if args.tol is not None:
        config.string_tol = args.tol
        config.raw = {**config.raw, "string_tol": args.tol}

    logger.info("running %s into %s", args.command, out_dir)
    exit_code = ScenarioRunner(args.command, config, out_dir).run()
    logger.info("%s finished with exit code %d", args.command, exit_code)
    return exit_code


if __name__ == "__main__":  # pragma: no cover
    raise SystemExit(main())
