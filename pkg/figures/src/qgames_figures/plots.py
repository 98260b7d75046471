"""Figure rendering from simulation CSV files.

Four figure kinds:

* ``winprob``      (chsh): grouped winning probability and both players'
  expectations, 10-round moving averages with uncertainty bands and the
  floored classical optimum as a reference line.
* ``entanglement`` (both games): players' expected entanglement by round,
  grouped like winprob for chsh, with the game-state level as reference.
* ``payoff``       (epd): each simulation's cumulative average payoff per player.
* ``dominance``    (no input): the reduced game's dominance regions over
  entanglement with the two threshold boundaries.

``render`` writes the image and returns the computed series so tests can
verify the numbers without comparing pixels.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402

from .series import (  # noqa: E402
    Band, RunData, SchemaError, dominance_thresholds_ebits,
    floored_classical_optimum, group_band, moving_average, read_run_csv,
    split_by_final_mean,
)

VALID_METRICS = {
    "chsh": ("winprob", "entanglement"),
    "epd": ("payoff", "entanglement", "dominance"),
}


@dataclass
class PlotSpec:
    inputs: list[str]
    game: str
    metric: str
    out: str
    window: int = 10
    band: str = "sdm"
    split: bool = True
    eps: float = 0.1
    game_state_ebits: float | None = None

    def __post_init__(self):
        if self.game not in VALID_METRICS:
            raise ValueError(f"unknown game {self.game!r}")
        if self.metric not in VALID_METRICS[self.game]:
            raise ValueError(f"metric {self.metric!r} invalid for game {self.game!r} "
                             f"(one of {VALID_METRICS[self.game]})")
        if self.window < 1:
            raise ValueError("window must be at least 1")
        if self.metric != "dominance" and not self.inputs:
            raise ValueError("at least one input CSV is required")


@dataclass
class RenderResult:
    """Numbers behind the image: named series and reference line values."""

    out_path: str
    reference_lines: dict[str, float]
    groups: dict[str, dict[str, Band]] = field(default_factory=dict)
    raw_curves: dict[str, list] = field(default_factory=dict)


def _load(spec: PlotSpec) -> RunData:
    data = read_run_csv(spec.inputs[0], spec.game)
    for path in spec.inputs[1:]:
        more = read_run_csv(path, spec.game)
        offset = max(data.sims) + 1
        data.sims.extend(s + offset for s in more.sims)
        for col, arrs in more.columns.items():
            if col in data.columns:
                data.columns[col].extend(arrs)
    return data


def _grouped(spec: PlotSpec, data: RunData, columns: list[str],
             split_column: str) -> dict[str, dict[str, Band]]:
    threshold = floored_classical_optimum(spec.eps)
    if spec.split:
        above, rest = split_by_final_mean(data.per_sim(split_column), threshold)
    else:
        above, rest = list(range(len(data.sims))), []
    groups = {}
    for name, idx in (("above", above), ("rest", rest)):
        if not idx:
            continue
        groups[name] = {
            col: group_band([data.per_sim(col)[i] for i in idx], spec.window, spec.band)
            for col in columns
        }
    return groups


_COLORS = {"winp": "black", "expA": "tab:orange", "expB": "tab:blue",
           "entA": "tab:orange", "entB": "tab:blue",
           "cumA": "tab:orange", "cumB": "tab:blue"}
_STYLES = {"above": "-", "rest": "--"}


def _plot_groups(ax, groups, rounds_per_group):
    for gname, curves in groups.items():
        for col, band in curves.items():
            x = rounds_per_group[gname]
            ax.plot(x, band.mean, _STYLES[gname], color=_COLORS[col],
                    label=f"{col} ({gname})")
            ax.fill_between(x, band.lower, band.upper, color=_COLORS[col], alpha=0.2)


def render(spec: PlotSpec) -> RenderResult:
    """Build the figure for ``spec``, write it to ``spec.out``, return the data."""
    fig, ax = plt.subplots(figsize=(7, 4.5))
    refs: dict[str, float] = {}
    result = RenderResult(out_path=spec.out, reference_lines=refs)

    if spec.metric == "dominance":
        e_low, e_high = dominance_thresholds_ebits()
        refs["threshold_low_ebits"] = e_low
        refs["threshold_high_ebits"] = e_high
        ax.axvspan(0.0, e_low, color="tab:red", alpha=0.25, label="defect dominant")
        ax.axvspan(e_high, 1.0, color="tab:green", alpha=0.25, label="quantum move dominant")
        ax.axvspan(e_low, e_high, color="tab:gray", alpha=0.15, label="no dominant action")
        ax.axvline(e_low, color="black", linestyle=":")
        ax.axvline(e_high, color="black", linestyle=":")
        ax.set_xlim(0, 1)
        ax.set_yticks([])
        ax.set_xlabel("game state entanglement (ebits)")
        ax.legend(loc="upper center", fontsize=8)
    else:
        data = _load(spec)
        if spec.game == "chsh":
            split_col = "winp"
            columns = ["winp", "expA", "expB"] if spec.metric == "winprob" \
                else ["entA", "entB"]
            groups = _grouped(spec, data, columns, split_col)
            rounds = {g: data.per_sim("round")[0] for g in groups}
            _plot_groups(ax, groups, rounds)
            result.groups = groups
            if spec.metric == "winprob":
                refs["classical_optimum"] = floored_classical_optimum(spec.eps)
            elif spec.game_state_ebits is not None:
                refs["game_state_ebits"] = spec.game_state_ebits
            ax.set_ylabel("winning probability" if spec.metric == "winprob"
                          else "expected entanglement (ebits)")
        else:
            columns = ["cumA", "cumB"] if spec.metric == "payoff" else ["entA", "entB"]
            x = data.per_sim("round")[0]
            for col in columns:
                curves = []
                for i in range(len(data.sims)):
                    y = moving_average(data.per_sim(col)[i], spec.window) \
                        if spec.metric == "entanglement" else data.per_sim(col)[i]
                    ax.plot(x[: len(y)], y, color=_COLORS[col], alpha=0.6, linewidth=0.9,
                            label=col if i == 0 else None)
                    curves.append(y)
                result.raw_curves[col] = curves
            if spec.metric == "entanglement" and spec.game_state_ebits is not None:
                refs["game_state_ebits"] = spec.game_state_ebits
            ax.set_ylabel("cumulative average payoff" if spec.metric == "payoff"
                          else "expected entanglement (ebits)")
        ax.set_xlabel("round")

    for name, val in refs.items():
        if name.startswith("threshold"):
            continue
        ax.axhline(val, color="tab:green" if "classical" in name else "tab:pink",
                   linestyle="-", linewidth=1.2, label=name)
    if spec.metric != "dominance":
        ax.legend(fontsize=7)
    fig.tight_layout()
    fig.savefig(spec.out, dpi=130)
    plt.close(fig)
    return result
