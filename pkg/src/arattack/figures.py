"""PNG renderings of a run, one file per scenario.

Only the CLI imports this module, so the library itself stays free of a
matplotlib dependency at import time.  Each attacker gets a column: the
top panel shows the realized series and controls, the bottom panel the
published forecasts against their attack targets, with the weighted
(t, t') pairs drawn solid and anything else faint.
"""

from __future__ import annotations

from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

from .experiments import Scenario, TrialResult, make_pattern, make_targets, parse_attacker


def render_scenario(
    scenario: Scenario,
    results: Sequence[TrialResult],
    out_dir: Path | str,
) -> Path:
    """Draw the last trial of the run; returns the written path."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    result = results[-1]
    tokens = list(result.trajectories)
    fig, axes = plt.subplots(
        2,
        len(tokens),
        figsize=(4.2 * len(tokens), 6.4),
        squeeze=False,
        sharex="col",
    )
    for col, token in enumerate(tokens):
        traj = result.trajectories[token]
        _, override = parse_attacker(token)
        pattern = make_pattern(override or scenario.pattern_kind, scenario.horizon)
        targets = make_targets(scenario, pattern)

        top = axes[0][col]
        series = traj.scalars()
        top.plot(range(len(series)), series, "o-", ms=3, label="$x_t$")
        top.step(
            range(len(traj.controls)),
            traj.controls,
            where="post",
            color="tab:red",
            alpha=0.7,
            label="$u_t$",
        )
        top.axvline(scenario.active_from, color="gray", lw=0.8, ls=":")
        top.set_title(token)
        top.legend(fontsize=8)
        top.grid(alpha=0.3)

        bottom = axes[1][col]
        weighted = sorted(p for p in traj.forecasts if p in pattern.weights)
        extras = sorted(p for p in traj.forecasts if p not in pattern.weights)
        if weighted:
            times = [t for t, _ in weighted]
            bottom.plot(
                times,
                [traj.forecasts[p] for p in weighted],
                "o",
                ms=3,
                color="tab:blue",
                label="forecast",
            )
            bottom.plot(
                times,
                [targets.values[p] for p in weighted],
                "x",
                ms=4,
                color="tab:green",
                label="target",
            )
        if extras:
            bottom.plot(
                [t for t, _ in extras],
                [traj.forecasts[p] for p in extras],
                ".",
                ms=2,
                color="tab:blue",
                alpha=0.25,
            )
        bottom.set_xlabel("t")
        bottom.legend(fontsize=8)
        bottom.grid(alpha=0.3)

    fig.suptitle(f"{scenario.scenario_id} (trial {result.trial})")
    fig.tight_layout()
    path = out / f"{scenario.scenario_id}.png"
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path
