"""Command-line entry point: run presets, write CSV/JSON, export the codebook.

Usage:
    ris-ntn-sim <preset|run-all|export-codebook> [--config PATH] [--out DIR]
                [--seed U64] [--jobs N]

Every preset writes <name>.csv (+ sidecar <name>.json) into the output
directory; identical argv and files produce byte-identical outputs.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from pathlib import Path

from .config import ExperimentConfig, config_from_dict, load_config
from .errors import SimError
from .experiments import PRESETS, run_preset, write_result

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_USAGE = 2


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ris-ntn-sim",
        description="RIS-assisted NTN joint communication/positioning simulator")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")
    commands = list(PRESETS) + ["run-all", "export-codebook"]
    for name in commands:
        cmd = sub.add_parser(name, help=f"run the {name} preset"
                             if name in PRESETS else name.replace("-", " "))
        cmd.add_argument("--config", type=Path, default=None,
                         help="JSON config file (defaults apply when omitted)")
        cmd.add_argument("--out", type=Path, default=Path("out"),
                         help="output directory (default: ./out)")
        cmd.add_argument("--seed", type=int, default=None,
                         help="override the config seed")
        cmd.add_argument("--jobs", type=int, default=None,
                         help="worker processes (default: RIS_SIM_JOBS or 1)")
    return parser


def _error_record(exc: Exception) -> str:
    return json.dumps({"error": type(exc).__name__, "message": str(exc)},
                      sort_keys=True)


def _resolve_jobs(arg_jobs: int | None) -> int:
    if arg_jobs is not None:
        return max(1, arg_jobs)
    env = os.environ.get("RIS_SIM_JOBS", "")
    return max(1, int(env)) if env.isdigit() and env else 1


def _load(config_path: Path | None, seed_override: int | None) -> ExperimentConfig:
    cfg = load_config(config_path) if config_path else config_from_dict({})
    if seed_override is not None:
        data = cfg.to_dict()
        data["seed"] = int(seed_override)
        cfg = config_from_dict(data)
    return cfg


def _export_codebook(cfg: ExperimentConfig, out_dir: Path) -> Path:
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / "codebook.json"
    path.write_text(cfg.codebook().to_json(), encoding="utf-8")
    return path


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command is None:
        parser.print_help()
        return EXIT_USAGE
    try:
        cfg = _load(args.config, args.seed)
        jobs = _resolve_jobs(args.jobs)
        if args.command == "export-codebook":
            path = _export_codebook(cfg, args.out)
            print(f"export-codebook: wrote {path}")
            return EXIT_OK
        names = list(PRESETS) if args.command == "run-all" else [args.command]
        for name in names:
            start = time.perf_counter()
            result = run_preset(name, cfg, jobs=jobs)
            paths = write_result(result, args.out)
            elapsed = time.perf_counter() - start
            rows = sum(len(rows) for _, rows in result.tables.values())
            print(f"{name}: {rows} rows -> "
                  f"{', '.join(p.name for p in paths)} ({elapsed:.1f}s)")
        return EXIT_OK
    except SimError as exc:
        print(_error_record(exc), file=sys.stderr)
        return EXIT_ERROR
    except OSError as exc:
        print(_error_record(exc), file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    raise SystemExit(main())
