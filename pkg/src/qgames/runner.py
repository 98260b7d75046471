"""Scenario orchestration: configuration, seeded multi-simulation runs of both
games, per-round metric records, and CSV / JSON-lines persistence.

Determinism contract: a run is a pure function of (seed, config). Every
simulation consumes its own generator stream derived from the master seed and
the simulation id, so results are identical across serial and parallel
execution and adding simulations never changes earlier ones.

Per-round draw order inside a simulation stream:

* CHSH: Alice bit-0 tie-break, Alice bit-1, Bob bit-0, Bob bit-1, then per
  iteration: x, y, outcome draw.
* EPD: Alice tie-break, Bob tie-break, outcome draw.

Tie-break draws always consume exactly one value.

CSV schemas (fixed headers, floats at 9 significant digits):

* chsh: sim,round,winp,expA,expB,entA,entB,xa1,xa2,xa3,yb1,yb2,yb3,w1,w2,w3,aA0,aA1,aB0,aB1
* epd:  sim,round,actA,actB,o1,o2,payA,payB,cumA,cumB,entA,entB,predA,predB

Rounds are 1-based; sim ids 0-based. Action columns hold grid indices
(0..113); beliefs (exp*, ent*, pred*) are the values the agent held entering
the round, i.e. the beliefs that produced that round's actions.
"""

from __future__ import annotations

import concurrent.futures
import csv
import io
import json
import os
from dataclasses import dataclass, fields

import numpy as np

from . import chsh_agent, epd_agent
from .chsh_game import (
    DEFAULT_ENTS, DEFAULT_GRID, Strategy, WinTable, build_win_table, joint_win_prob,
    sample_iteration,
)
from .epd_agent import EpdPrior, EpdPriorKind
from .epd_game import EpdAction, PAYOFF_A
from .qcore import gamma_of_ebits
from .rng import derive_stream

OUTDIR_ENV = "QGAMES_OUTDIR"

CHSH_HEADER = ["sim", "round", "winp", "expA", "expB", "entA", "entB",
               "xa1", "xa2", "xa3", "yb1", "yb2", "yb3", "w1", "w2", "w3",
               "aA0", "aA1", "aB0", "aB1"]
EPD_HEADER = ["sim", "round", "actA", "actB", "o1", "o2", "payA", "payB",
              "cumA", "cumB", "entA", "entB", "predA", "predB"]

CHSH_SCENARIOS = {
    "finding-advantage": (1.0, "uniform", "uniform"),
    "making-do": (0.0, "uniform", "uniform"),
    "overcoming-bias": (0.7, "skew-classical", "uniform"),
    "good-enough": (0.3, "skew-quantum", "uniform"),
}
EPD_SCENARIOS = {
    "bohrs-horseshoe": (1.0, "low-low", "low-low"),
    "faith-alone": (0.0, "high-high", "high-high"),
    "double-down": (0.9, "low-low", "high-high"),
    "fools-gold": (0.4, "low-high", "low-high"),
}


class ConfigError(ValueError):
    pass


@dataclass
class ScenarioConfig:
    game: str
    gamma_g_ebits: float
    prior_a: str
    prior_b: str
    scenario: str | None = None
    sims: int = 10
    rounds: int = 0  # 0 means game default (500 chsh / 1000 epd)
    iterations_per_round: int = 0  # 0 means game default (3 chsh / 1 epd)
    eps: float = 0.1
    seed: int = 1
    out: str | None = None
    fmt: str = "csv"
    workers: int = 1

    def __post_init__(self):
        if self.game not in ("chsh", "epd"):
            raise ConfigError(f"unknown game {self.game!r} (expected chsh or epd)")
        if self.rounds == 0:
            self.rounds = 500 if self.game == "chsh" else 1000
        if self.iterations_per_round == 0:
            self.iterations_per_round = 3 if self.game == "chsh" else 1
        if self.sims < 1:
            raise ConfigError("sims must be at least 1")
        if self.rounds < 1:
            raise ConfigError("rounds must be at least 1")
        if self.iterations_per_round < 1:
            raise ConfigError("iterations_per_round must be at least 1")
        if self.game == "epd" and self.iterations_per_round != 1:
            raise ConfigError("epd rounds contain exactly one iteration")
        if not 0.0 <= self.eps < 1.0:
            raise ConfigError(f"eps outside [0, 1): {self.eps}")
        if not 0.0 <= self.gamma_g_ebits <= 1.0:
            raise ConfigError(f"gamma_g_ebits outside [0, 1]: {self.gamma_g_ebits}")
        if self.fmt not in ("csv", "jsonl"):
            raise ConfigError(f"unknown format {self.fmt!r} (expected csv or jsonl)")
        if self.workers < 1:
            raise ConfigError("workers must be at least 1")
        valid = ("uniform", "skew-classical", "skew-quantum") if self.game == "chsh" \
            else ("low-low", "high-high", "low-high")
        for name, val in (("prior_a", self.prior_a), ("prior_b", self.prior_b)):
            if val not in valid:
                raise ConfigError(f"{name} {val!r} invalid for {self.game} (one of {valid})")

    @property
    def gamma_g(self) -> float:
        return gamma_of_ebits(self.gamma_g_ebits)


def expand_scenario(game: str, scenario: str) -> tuple[float, str, str]:
    table = CHSH_SCENARIOS if game == "chsh" else EPD_SCENARIOS
    if scenario not in table:
        raise ConfigError(f"unknown {game} scenario {scenario!r} (one of {sorted(table)})")
    return table[scenario]


def load_config(path: str | None = None, **overrides) -> ScenarioConfig:
    """Build a config from an optional key=value file plus keyword overrides.

    The file holds one ``key = value`` pair per line; blank lines and lines
    starting with ``#`` are ignored. Recognized keys are the ScenarioConfig
    fields plus ``scenario``.
    """
    values: dict = {}
    if path is not None:
        try:
            with open(path, "r", encoding="utf-8") as fh:
                text = fh.read()
        except OSError as exc:
            raise ConfigError(f"cannot read config file {path!r}: {exc}") from exc
        for ln, raw in enumerate(text.splitlines(), start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{ln}: expected key = value, got {raw!r}")
            key, _, val = line.partition("=")
            values[key.strip()] = val.strip()
    values.update({k: v for k, v in overrides.items() if v is not None})

    game = values.pop("game", None)
    if game is None:
        raise ConfigError("game is required (chsh or epd)")
    scenario = values.pop("scenario", None)
    if scenario is not None:
        gamma, pa, pb = expand_scenario(game, scenario)
        values.setdefault("gamma_g_ebits", gamma)
        values.setdefault("prior_a", pa)
        values.setdefault("prior_b", pb)
    missing = [k for k in ("gamma_g_ebits", "prior_a", "prior_b") if k not in values]
    if missing:
        raise ConfigError(f"missing {missing}; give a scenario name or explicit values")

    known = {f.name for f in fields(ScenarioConfig)}
    unknown = set(values) - known
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    casts = {"gamma_g_ebits": float, "eps": float, "sims": int, "rounds": int,
             "iterations_per_round": int, "seed": int, "workers": int}
    for key, cast in casts.items():
        if key in values and isinstance(values[key], str):
            try:
                values[key] = cast(values[key])
            except ValueError as exc:
                raise ConfigError(f"bad value for {key}: {values[key]!r}") from exc
    return ScenarioConfig(game=game, scenario=scenario, **values)


@dataclass
class ChshRound:
    sim: int
    round: int
    winp: float
    expA: float
    expB: float
    entA: float
    entB: float
    xa: tuple[int, ...]
    yb: tuple[int, ...]
    wins: tuple[int, ...]
    aA0: int
    aA1: int
    aB0: int
    aB1: int

    def to_row(self) -> list:
        return [self.sim, self.round, self.winp, self.expA, self.expB, self.entA,
                self.entB, *self.xa, *self.yb, *self.wins,
                self.aA0, self.aA1, self.aB0, self.aB1]


@dataclass
class EpdRound:
    sim: int
    round: int
    actA: str
    actB: str
    o1: int
    o2: int
    payA: float
    payB: float
    cumA: float
    cumB: float
    entA: float
    entB: float
    predA: float
    predB: float

    def to_row(self) -> list:
        return [self.sim, self.round, self.actA, self.actB, self.o1, self.o2,
                self.payA, self.payB, self.cumA, self.cumB, self.entA, self.entB,
                self.predA, self.predB]


_TABLE_CACHE: dict[tuple, WinTable] = {}


def _cached_table(eps: float) -> WinTable:
    key = ("default", eps)
    if key not in _TABLE_CACHE:
        _TABLE_CACHE[key] = build_win_table(DEFAULT_GRID, DEFAULT_ENTS, eps)
    return _TABLE_CACHE[key]


def _simulate_chsh(config: ScenarioConfig, sim_id: int) -> list[ChshRound]:
    table = _cached_table(config.eps)
    grid = table.grid
    rng = derive_stream(config.seed, sim_id)
    gamma_g = config.gamma_g
    prior_a = chsh_agent.make_prior(chsh_agent.PriorKind(config.prior_a))
    prior_b = chsh_agent.make_prior(chsh_agent.PriorKind(config.prior_b))
    records = []
    for rnd in range(1, config.rounds + 1):
        sa = Strategy(chsh_agent.choose_action(prior_a, 0, table, rng),
                      chsh_agent.choose_action(prior_a, 1, table, rng))
        sb = Strategy(chsh_agent.choose_action(prior_b, 0, table, rng),
                      chsh_agent.choose_action(prior_b, 1, table, rng))
        winp = joint_win_prob(sa, sb, gamma_g, config.eps)
        exp_a = chsh_agent.expected_round_win(prior_a, sa, table)
        exp_b = chsh_agent.expected_round_win(prior_b, sb, table)
        ent_a = chsh_agent.entanglement_expectation(prior_a)
        ent_b = chsh_agent.entanglement_expectation(prior_b)
        xs, ys, wins = [], [], []
        obs_a, obs_b = [], []
        for _ in range(config.iterations_per_round):
            x = rng.next_bit()
            y = rng.next_bit()
            _, _, won = sample_iteration(rng, x, y, sa.action_for(x), sb.action_for(y),
                                         gamma_g, config.eps)
            xs.append(x)
            ys.append(y)
            wins.append(int(won))
            obs_a.append(chsh_agent.IterationObs(x, y, sa.action_for(x), won))
            obs_b.append(chsh_agent.IterationObs(y, x, sb.action_for(y), won))
        chsh_agent.update(prior_a, obs_a, table)
        chsh_agent.update(prior_b, obs_b, table)
        records.append(ChshRound(
            sim=sim_id, round=rnd, winp=winp, expA=exp_a, expB=exp_b,
            entA=ent_a, entB=ent_b, xa=tuple(xs), yb=tuple(ys), wins=tuple(wins),
            aA0=grid.index_of(sa.action_for_bit0), aA1=grid.index_of(sa.action_for_bit1),
            aB0=grid.index_of(sb.action_for_bit0), aB1=grid.index_of(sb.action_for_bit1),
        ))
    return records


def _simulate_epd(config: ScenarioConfig, sim_id: int) -> list[EpdRound]:
    rng = derive_stream(config.seed, sim_id)
    gamma_g = config.gamma_g
    prior_a = epd_agent.make_epd_prior(EpdPriorKind(config.prior_a))
    prior_b = epd_agent.make_epd_prior(EpdPriorKind(config.prior_b))
    probs, _ = epd_agent._tables(prior_a.ents, config.eps)
    g_idx = int(np.argmin(np.abs(prior_a.ents.gammas - gamma_g)))
    on_grid = abs(prior_a.ents.gammas[g_idx] - gamma_g) < 1e-12
    records = []
    total_a = total_b = 0.0
    for rnd in range(1, config.rounds + 1):
        act_a = epd_agent.choose_epd_action(prior_a, config.eps, rng)
        act_b = epd_agent.choose_epd_action(prior_b, config.eps, rng)
        ent_a = epd_agent.epd_entanglement_expectation(prior_a)
        ent_b = epd_agent.epd_entanglement_expectation(prior_b)
        pred_a = epd_agent.predict_opponent(prior_a, config.eps)
        pred_b = epd_agent.predict_opponent(prior_b, config.eps)
        if on_grid:
            p = probs[g_idx, epd_agent._AIDX[act_a], epd_agent._AIDX[act_b]]
        else:
            p = epd_agent.epd_outcome_probs(gamma_g, act_a.unitary, act_b.unitary, config.eps)
        k = rng.categorical(p / p.sum())
        o1, o2 = k >> 1, k & 1
        pay_a = float(PAYOFF_A[o1, o2])
        pay_b = float(PAYOFF_A[o2, o1])
        total_a += pay_a
        total_b += pay_b
        epd_agent.update_epd(prior_a, act_a, (o1, o2), config.eps)
        epd_agent.update_epd(prior_b, act_b, (o2, o1), config.eps)
        records.append(EpdRound(
            sim=sim_id, round=rnd, actA=act_a.value, actB=act_b.value, o1=o1, o2=o2,
            payA=pay_a, payB=pay_b, cumA=total_a / rnd, cumB=total_b / rnd,
            entA=ent_a, entB=ent_b, predA=pred_a, predB=pred_b,
        ))
    return records


def _run_one(args: tuple) -> list:
    config_dict, sim_id = args
    config = ScenarioConfig(**config_dict)
    sim = _simulate_chsh if config.game == "chsh" else _simulate_epd
    return sim(config, sim_id)


def run_scenario(config: ScenarioConfig) -> list:
    """All simulations' round records, ordered by (sim, round)."""
    sim = _simulate_chsh if config.game == "chsh" else _simulate_epd
    if config.workers <= 1:
        batches = [sim(config, i) for i in range(config.sims)]
    else:
        cfg = {f.name: getattr(config, f.name) for f in fields(ScenarioConfig)}
        with concurrent.futures.ProcessPoolExecutor(max_workers=config.workers) as pool:
            batches = list(pool.map(_run_one, [(cfg, i) for i in range(config.sims)]))
    records = []
    for batch in batches:
        records.extend(batch)
    return records


def _fmt(value) -> str:
    if isinstance(value, float):
        return format(value, ".9g")
    return str(value)


def records_to_csv(records, header: list[str]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for rec in records:
        writer.writerow([_fmt(v) for v in rec.to_row()])
    return buf.getvalue()


def records_to_jsonl(records, header: list[str]) -> str:
    lines = []
    for rec in records:
        row = rec.to_row()
        obj = {k: (float(_fmt(v)) if isinstance(v, float) else v)
               for k, v in zip(header, row)}
        lines.append(json.dumps(obj))
    return "\n".join(lines) + "\n"


def header_for(game: str) -> list[str]:
    return CHSH_HEADER if game == "chsh" else EPD_HEADER


def write_records(records, path: str, fmt: str = "csv", game: str | None = None) -> None:
    """Serialize records to ``path``; game inferred from the record type if omitted."""
    if game is None:
        game = "chsh" if records and isinstance(records[0], ChshRound) else "epd"
    header = header_for(game)
    text = records_to_csv(records, header) if fmt == "csv" else records_to_jsonl(records, header)
    try:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise RuntimeError(f"cannot write records to {path!r}: {exc}") from exc


def default_out_path(config: ScenarioConfig) -> str:
    base = config.scenario or "custom"
    ext = "csv" if config.fmt == "csv" else "jsonl"
    name = f"{config.game}-{base}-seed{config.seed}.{ext}"
    return os.path.join(os.environ.get(OUTDIR_ENV, "."), name)
