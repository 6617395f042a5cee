"""Command line front end.

    arattack run --scenario S2 --out results/
    arattack run --config my_scenario.json --trials 5 --trajectories
    arattack list-scenarios
    arattack validate my_scenario.json

Exit codes: 0 success, 2 configuration problem, 3 numerical failure
during a run.  The default output directory comes from $ARATTACK_OUT
when set, else ./arattack-out.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from .environment import DivergenceError
from .experiments import (
    ConfigError,
    InsufficientTrialsError,
    build_scenario,
    preset_config,
    preset_ids,
    run_scenario,
    summarize,
    validate_config,
)
from .reporting import emit

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3
OUT_DIR_ENV = "ARATTACK_OUT"


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="arattack",
        description="Sequential attacks on autoregressive forecasters.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run a scenario and write its reports")
    src = run_p.add_mutually_exclusive_group(required=True)
    src.add_argument("--scenario", help="packaged scenario id (see list-scenarios)")
    src.add_argument("--config", type=Path, help="path to a scenario config JSON")
    run_p.add_argument(
        "--attackers", help="comma-separated attacker list overriding the scenario's"
    )
    run_p.add_argument("--trials", type=int, help="trial count override")
    run_p.add_argument("--seed", type=int, help="seed override")
    run_p.add_argument(
        "--out",
        type=Path,
        default=None,
        help=f"output directory (default ${OUT_DIR_ENV} or ./arattack-out)",
    )
    run_p.add_argument(
        "--trajectories",
        action="store_true",
        help="also write the per-step trajectory CSV",
    )
    run_p.add_argument(
        "--figures", action="store_true", help="also render a PNG of the last trial"
    )

    sub.add_parser("list-scenarios", help="show the packaged scenarios")

    val_p = sub.add_parser("validate", help="check a config file and echo it")
    val_p.add_argument("config", type=Path)

    return parser


def _load_config(path: Path) -> dict:
    try:
        with open(path, encoding="utf-8") as handle:
            return json.load(handle)
    except OSError as err:
        raise ConfigError(f"config: cannot read {path}: {err.strerror}") from err
    except json.JSONDecodeError as err:
        raise ConfigError(f"config: {path} is not valid JSON ({err})") from err


def _cmd_run(args: argparse.Namespace) -> int:
    if args.scenario is not None:
        config = preset_config(args.scenario)
    else:
        config = _load_config(args.config)
    if args.trials is not None:
        config["trials"] = args.trials
    if args.seed is not None:
        config["seed"] = args.seed
    if args.attackers is not None:
        config["attackers"] = [t.strip() for t in args.attackers.split(",") if t.strip()]
    scenario = build_scenario(config)

    out_dir = args.out
    if out_dir is None:
        out_dir = Path(os.environ.get(OUT_DIR_ENV, "arattack-out"))

    results = run_scenario(scenario)
    stats = summarize(results)

    print(f"{scenario.scenario_id}: {len(results)} trials, seed {scenario.seed}")
    for token, st in stats.attackers.items():
        print(
            f"  {token:16s} total {st.mean_total:12.6g} "
            f"+- {st.stderr_total:.3g}"
        )
    for comp in stats.tests:
        res = comp.result
        note = " (zero variance)" if res.zero_variance else ""
        print(
            f"  {comp.first} vs {comp.second}: "
            f"t = {res.t_statistic:.4g}, p = {res.p_value:.4g}{note}"
        )

    written = emit(scenario, results, stats, out_dir, trajectories=args.trajectories)
    if args.figures:
        from . import figures  # deferred: pulls in matplotlib

        written.append(figures.render_scenario(scenario, results, out_dir))
    for path in written:
        print(f"wrote {path}")
    return EXIT_OK


def _cmd_list() -> int:
    for short in preset_ids():
        config = validate_config(preset_config(short))
        attackers = ",".join(config["attackers"])
        print(
            f"{short:4s} {config['id']:18s} horizon={config['horizon']:<3d} "
            f"trials={config['trials']:<4d} attackers={attackers}"
        )
    return EXIT_OK


def _cmd_validate(path: Path) -> int:
    canonical = validate_config(_load_config(path))
    print(json.dumps(canonical, indent=2, sort_keys=True))
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "run":
            return _cmd_run(args)
        if args.command == "list-scenarios":
            return _cmd_list()
        return _cmd_validate(args.config)
    except (ConfigError, InsufficientTrialsError) as err:
        print(f"configuration error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    except (DivergenceError, FloatingPointError, np.linalg.LinAlgError) as err:
        print(f"numerical failure: {err}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
