"""File outputs for scenario runs: per-trial CSV, JSON summary, trajectories.

Everything written here is byte-reproducible: floats are rendered with
repr (shortest round-trip form), JSON keys are sorted, rows follow run
order, and no timestamps or environment details are recorded.  The JSON
summary embeds the full scenario config, so a run can be rebuilt from
its own summary file alone.
"""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path
from typing import Sequence

from .experiments import (
    Scenario,
    SummaryStats,
    TrialResult,
    make_pattern,
    make_targets,
    parse_attacker,
)

SCHEMA_VERSION = 1


def _fmt(value: float) -> str:
    return repr(float(value))


def _json_float(value: float):
    # Strict JSON has no Infinity; degenerate t statistics become strings.
    if math.isfinite(value):
        return value
    return "inf" if value > 0 else "-inf"


def write_trials_csv(
    path: Path, scenario: Scenario, results: Sequence[TrialResult]
) -> None:
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(
            ["scenario", "trial", "attacker", "tracking_cost", "control_cost", "total"]
        )
        for result in results:
            for token, report in result.reports.items():
                writer.writerow(
                    [
                        scenario.scenario_id,
                        result.trial,
                        token,
                        _fmt(report.tracking),
                        _fmt(report.control),
                        _fmt(report.total),
                    ]
                )


def write_summary_json(
    path: Path, scenario: Scenario, stats: SummaryStats
) -> None:
    attackers = {
        token: {
            "mean_total": st.mean_total,
            "stderr_total": st.stderr_total,
            "mean_tracking": st.mean_tracking,
            "mean_control": st.mean_control,
            "trials": st.trials,
        }
        for token, st in stats.attackers.items()
    }
    tests = [
        {
            "first": comp.first,
            "second": comp.second,
            "mean_difference": comp.result.mean_difference,
            "t_statistic": _json_float(comp.result.t_statistic),
            "dof": comp.result.dof,
            "p_value": comp.result.p_value,
            "zero_variance": comp.result.zero_variance,
        }
        for comp in stats.tests
    ]
    payload = {
        "schema_version": SCHEMA_VERSION,
        "scenario": scenario.to_config(),
        "attackers": attackers,
        "paired_tests": tests,
    }
    with open(path, "w", encoding="utf-8") as handle:
        json.dump(payload, handle, indent=2, sort_keys=True)
        handle.write("\n")


def write_trajectories_csv(
    path: Path, scenario: Scenario, results: Sequence[TrialResult]
) -> None:
    """Long-format dump of states, controls, and published forecasts.

    Forecast rows carry their lead time t' - t; the weighted column is 1
    exactly on the attacker's pattern pairs, and only those rows have a
    target.  Unweighted rows are forecasts that were recorded because the
    attacker observed them.
    """
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(
            [
                "scenario", "trial", "attacker", "kind",
                "time", "lead", "value", "target", "weighted",
            ]
        )
        for result in results:
            for token, traj in result.trajectories.items():
                _, override = parse_attacker(token)
                pattern = make_pattern(
                    override or scenario.pattern_kind, scenario.horizon
                )
                targets = make_targets(scenario, pattern)
                base = [scenario.scenario_id, result.trial, token]
                for t, value in enumerate(traj.scalars()):
                    writer.writerow(base + ["state", t, "", _fmt(value), "", ""])
                for t, value in enumerate(traj.controls):
                    writer.writerow(base + ["control", t, "", _fmt(value), "", ""])
                for (t, tp) in sorted(traj.forecasts):
                    weighted = (t, tp) in pattern.weights
                    writer.writerow(
                        base
                        + [
                            "forecast",
                            t,
                            tp - t,
                            _fmt(traj.forecasts[(t, tp)]),
                            _fmt(targets.values[(t, tp)]) if weighted else "",
                            1 if weighted else 0,
                        ]
                    )


def emit(
    scenario: Scenario,
    results: Sequence[TrialResult],
    stats: SummaryStats,
    out_dir: Path | str,
    trajectories: bool = False,
) -> list[Path]:
    """Write the run's files into out_dir and return their paths."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    trials_path = out / "trials.csv"
    write_trials_csv(trials_path, scenario, results)
    written.append(trials_path)
    summary_path = out / "summary.json"
    write_summary_json(summary_path, scenario, stats)
    written.append(summary_path)
    if trajectories:
        traj_path = out / "trajectories.csv"
        write_trajectories_csv(traj_path, scenario, results)
        written.append(traj_path)
    return written
