"""CSV ingestion and series computations for the plotting tool.

Reads the simulator's fixed CSV schemas (one row per simulation round) and
computes the derived series the figures are built from: trailing moving
averages, group splits by final performance, and mean curves with
standard-deviation or standard-error bands.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

CHSH_REQUIRED = ["sim", "round", "winp", "expA", "expB", "entA", "entB"]
EPD_REQUIRED = ["sim", "round", "actA", "actB", "payA", "payB", "cumA", "cumB",
                "entA", "entB"]


class SchemaError(ValueError):
    pass


def floored_classical_optimum(eps: float = 0.1) -> float:
    """Best winning probability without entanglement under the outcome floor."""
    return 0.5 + (1 - eps) ** 2 / 4


def binary_entropy(p: float) -> float:
    if p <= 0.0 or p >= 1.0:
        return 0.0
    return -p * math.log2(p) - (1 - p) * math.log2(1 - p)


def dominance_thresholds_ebits() -> tuple[float, float]:
    """Entanglement (in ebits) where defect/quantum dominance starts and ends."""
    lo = math.asin(math.sqrt(1 / 5))
    hi = math.asin(math.sqrt(2 / 5))
    return (binary_entropy(math.sin(lo / 2) ** 2),
            binary_entropy(math.sin(hi / 2) ** 2))


@dataclass
class RunData:
    """Column arrays grouped by simulation id, each in round order."""

    game: str
    sims: list[int]
    columns: dict[str, list[np.ndarray]]

    def per_sim(self, column: str) -> list[np.ndarray]:
        if column not in self.columns:
            raise SchemaError(f"column {column!r} not available for game {self.game!r}")
        return self.columns[column]

    @property
    def n_rounds(self) -> int:
        return len(self.columns["round"][0])


def read_run_csv(path: str, game: str) -> RunData:
    """Load one runner CSV, validating the schema for the given game."""
    required = CHSH_REQUIRED if game == "chsh" else EPD_REQUIRED
    with open(path, "r", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        for col in required:
            if col not in header:
                raise SchemaError(f"{path}: missing required column {col!r} "
                                  f"for game {game!r}")
        rows = list(reader)
    if not rows:
        raise SchemaError(f"{path}: no data rows")
    sims = sorted({int(r["sim"]) for r in rows})
    numeric = [c for c in header if c not in ("actA", "actB")]
    columns: dict[str, list[np.ndarray]] = {c: [] for c in header}
    for s in sims:
        sim_rows = [r for r in rows if int(r["sim"]) == s]
        sim_rows.sort(key=lambda r: int(r["round"]))
        for c in header:
            if c in numeric:
                columns[c].append(np.array([float(r[c]) for r in sim_rows]))
            else:
                columns[c].append(np.array([r[c] for r in sim_rows]))
    return RunData(game=game, sims=sims, columns=columns)


def moving_average(x: np.ndarray, window: int) -> np.ndarray:
    """Trailing moving average; the first window-1 points average what exists."""
    if window < 1:
        raise ValueError("window must be at least 1")
    if window == 1:
        return np.asarray(x, dtype=float).copy()
    x = np.asarray(x, dtype=float)
    c = np.concatenate([[0.0], np.cumsum(x)])
    out = np.empty_like(x)
    for i in range(len(x)):
        lo = max(0, i - window + 1)
        out[i] = (c[i + 1] - c[lo]) / (i + 1 - lo)
    return out


def split_by_final_mean(series: list[np.ndarray], threshold: float,
                        tail: int = 100) -> tuple[list[int], list[int]]:
    """Partition simulation indices by final-``tail``-round mean above threshold.

    Every simulation lands in exactly one group.
    """
    above, rest = [], []
    for i, x in enumerate(series):
        t = min(tail, len(x))
        (above if float(np.mean(x[-t:])) > threshold else rest).append(i)
    return above, rest


@dataclass
class Band:
    """Mean curve with a symmetric uncertainty band."""

    mean: np.ndarray
    half_width: np.ndarray

    @property
    def lower(self) -> np.ndarray:
        return self.mean - self.half_width

    @property
    def upper(self) -> np.ndarray:
        return self.mean + self.half_width


def group_band(series: list[np.ndarray], window: int, mode: str = "sdm") -> Band:
    """Cross-simulation mean of per-simulation moving averages, with a band.

    ``mode`` selects the band half-width: "sd" for the standard deviation across
    simulations, "sdm" for the standard deviation of the mean (sd / sqrt(n)).
    """
    if mode not in ("sd", "sdm"):
        raise ValueError(f"unknown band mode {mode!r}")
    if not series:
        raise ValueError("empty group")
    stack = np.vstack([moving_average(x, window) for x in series])
    mean = stack.mean(axis=0)
    sd = stack.std(axis=0, ddof=0)
    if mode == "sdm":
        sd = sd / math.sqrt(stack.shape[0])
    return Band(mean=mean, half_width=sd)
