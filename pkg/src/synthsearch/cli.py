"""Command-line entry point; a thin client over the service layer.

Subcommands map one to one onto the HTTP endpoints.  By default the runner
executes in-process; with ``--server URL`` the validated config is POSTed to
a running synthsearch service instead and the response printed.

Exit codes: 0 success (including budget exhaustion with unsolved targets,
which is a valid benchmark outcome), 2 config or I/O error, 3 model or
protocol error.
"""

from __future__ import annotations

import argparse
import json
import sys
from typing import Optional, Sequence

from pydantic import ValidationError

from . import __version__
from .config import COMMAND_CONFIGS, load_config
from .inventory import IoError
from .runner import (
    run_eval_single,
    run_gen_universe,
    run_prep,
    run_report,
    run_search,
    run_sweep,
)
from .service.schemas import (
    EvalReportModel,
    PrepResponse,
    ReportResponse,
    SearchResponse,
    SweepResponse,
    UniverseResponse,
)
from .singlestep.base import InvalidConfig, ModelUnavailable, ProtocolError

_RUNNERS = {
    "eval-single": (run_eval_single, EvalReportModel),
    "search": (run_search, SearchResponse),
    "prep": (run_prep, PrepResponse),
    "gen-universe": (run_gen_universe, UniverseResponse),
    "sweep": (run_sweep, SweepResponse),
    "report": (run_report, ReportResponse),
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="synthsearch",
        description="Retrosynthesis search and benchmarking engine",
    )
    parser.add_argument("--version", action="version", version=f"synthsearch {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for command in COMMAND_CONFIGS:
        cmd = sub.add_parser(command)
        cmd.add_argument("--config", required=True, help="JSON or YAML config file")
        cmd.add_argument("--out", default=None, help="output directory for artifacts")
        cmd.add_argument("--workers", type=int, default=None, help="parallel workers over targets")
        cmd.add_argument("--seed", type=int, default=None, help="override the config seed")
        cmd.add_argument("--server", default=None, help="POST to a running service instead")
    return parser


def _apply_overrides(config, args):
    updates = {}
    if args.seed is not None and hasattr(config, "seed"):
        updates["seed"] = args.seed
    if args.workers is not None and hasattr(config, "workers"):
        updates["workers"] = args.workers
    return config.model_copy(update=updates) if updates else config


def _remote(server: str, command: str, config, out: Optional[str]) -> int:
    import httpx

    params = {"out_dir": out} if out else {}
    response = httpx.post(
        f"{server.rstrip('/')}/{command}",
        json=config.model_dump(),
        params=params,
        timeout=None,
    )
    print(json.dumps(response.json(), indent=1))
    if response.status_code == 502:
        return 3
    return 0 if response.status_code == 200 else 2

def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = load_config(args.config, args.command)
        config = _apply_overrides(config, args)
        if args.server:
            return _remote(args.server, args.command, config, args.out)
        runner, response_model = _RUNNERS[args.command]
        run = runner(config, args.out)
        response = response_model.from_run(run)
        print(response.model_dump_json(indent=1))
        if getattr(run, "report", None) is not None and getattr(run.report, "incomplete", False):
            print("error: model became unavailable; report is incomplete", file=sys.stderr)
            return 3
        return 0
    except (ValidationError, ValueError, InvalidConfig, OSError, IoError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ModelUnavailable, ProtocolError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
