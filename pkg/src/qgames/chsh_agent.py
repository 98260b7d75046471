"""Rational CHSH player: grid beliefs, expected-utility choice, Bayes updates.

An agent holds a joint weight tensor w[a0][a1][g] over the opponent's action
for each bit value they could receive (114 x 114) and the entanglement level
(11). Utilities equal winning probabilities, so action choice maximizes the
prior-weighted win probability from the table; ties are broken uniformly at
random. After a round the agent multiplies in the likelihood of each
iteration's (bits, own action, win/lose) observation and renormalizes.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .chsh_game import Action, ActionGrid, EntGrid, Strategy, WinTable, DEFAULT_GRID, DEFAULT_ENTS
from .rng import SplitMix64

TIE_REL_TOL = 1e-12
NORM_CHECK_TOL = 1e-9


class ZeroPosteriorError(RuntimeError):
    """Raised when every hypothesis has zero likelihood (impossible for eps > 0)."""


class PriorKind(enum.Enum):
    UNIFORM = "uniform"
    SKEW_CLASSICAL = "skew-classical"
    SKEW_QUANTUM = "skew-quantum"


@dataclass
class IterationObs:
    """What one game iteration reveals to an agent."""

    own_bit: int
    opp_bit: int
    own_action: Action
    won: bool


class ChshPrior:
    """Normalized joint weights over (opp action | bit 0, opp action | bit 1, level)."""

    def __init__(self, w: np.ndarray, grid: ActionGrid, ents: EntGrid):
        w = np.asarray(w, dtype=float)
        if w.shape != (len(grid), len(grid), len(ents)):
            raise ValueError(f"bad prior shape {w.shape}")
        if np.any(w < 0):
            raise ValueError("negative prior weight")
        self.w = w
        self.grid = grid
        self.ents = ents
        self.normalize()

    def normalize(self):
        total = self.w.sum()
        if total <= 0:
            raise ZeroPosteriorError("prior has no mass")
        self.w /= total

    def check_normalized(self):
        if abs(self.w.sum() - 1.0) > NORM_CHECK_TOL:
            raise ValueError("prior is not normalized")

    def copy(self) -> "ChshPrior":
        return ChshPrior(self.w.copy(), self.grid, self.ents)

    def to_flat(self) -> np.ndarray:
        """Index-ordered weight snapshot (debugging format, not stability-guaranteed)."""
        return self.w.ravel().copy()

    @classmethod
    def from_flat(cls, flat: np.ndarray, grid: ActionGrid | None = None,
                  ents: EntGrid | None = None) -> "ChshPrior":
        grid = grid or DEFAULT_GRID
        ents = ents or DEFAULT_ENTS
        return cls(np.asarray(flat, dtype=float).reshape(len(grid), len(grid), len(ents)),
                   grid, ents)


def _action_marginal(theta_weights: np.ndarray, grid: ActionGrid) -> np.ndarray:
    """Per-action weights from a 9-point theta marginal, phi uniform at each theta."""
    m = np.empty(len(grid))
    for i, a in enumerate(grid.actions):
        m[i] = theta_weights[a.theta_idx] / grid.n_phi_at(a.theta_idx)
    return m / m.sum()


def make_prior(kind: PriorKind, grid: ActionGrid | None = None,
               ents: EntGrid | None = None) -> ChshPrior:
    """Initial beliefs: uniform, classically skewed, or quantum skewed.

    The skewed priors are products of a per-bit action marginal (theta profile
    spread uniformly over the phi values available at each theta) and a
    triangular entanglement marginal: descending (11..1)/66 for the classical
    skew (1/3 ebits expected), ascending (1..11)/66 for the quantum skew
    (2/3 ebits expected).
    """
    grid = grid or DEFAULT_GRID
    ents = ents or DEFAULT_ENTS
    n, g = len(grid), len(ents)
    if kind is PriorKind.UNIFORM:
        action = np.full(n, 1.0 / n)
        ent = np.full(g, 1.0 / g)
    elif kind is PriorKind.SKEW_CLASSICAL:
        theta = np.exp([5, 4, 3, 2, 1, 2, 3, 4, 5])
        action = _action_marginal(theta / theta.sum(), grid)
        ent = np.arange(g, 0, -1, dtype=float)
        ent /= ent.sum()
    elif kind is PriorKind.SKEW_QUANTUM:
        theta = np.exp([1, 2, 3, 4, 5, 4, 3, 2, 1])
        action = _action_marginal(theta / theta.sum(), grid)
        ent = np.arange(1, g + 1, dtype=float)
        ent /= ent.sum()
    else:
        raise ValueError(f"unknown prior kind: {kind}")
    w = action[:, None, None] * action[None, :, None] * ent[None, None, :]
    return ChshPrior(w, grid, ents)


def eu_all_actions(prior: ChshPrior, own_bit: int, table: WinTable) -> np.ndarray:
    """Expected winning probability of each own action given the own bit value.

    EU(a) = sum_hyp w(hyp) * (1/2) * sum_b win[own_bit][b][a][a_b(hyp)][g(hyp)].
    Uses the parity structure: win equals P_same except when both bits are 1.
    """
    if own_bit not in (0, 1):
        raise ValueError("bit must be 0 or 1")
    prior.check_normalized()
    m0 = prior.w.sum(axis=1)  # weights over (opp action if bit 0, level)
    m1 = prior.w.sum(axis=0)
    flat = table.same_flat()
    if own_bit == 0:
        return flat @ ((m0 + m1).ravel() * 0.5)
    return 0.5 * (flat @ m0.ravel() + 1.0 - flat @ m1.ravel())


def _argmax_set(eu: np.ndarray) -> np.ndarray:
    top = eu.max()
    return np.flatnonzero(eu >= top - TIE_REL_TOL * max(abs(top), 1.0))


def choose_action(prior: ChshPrior, own_bit: int, table: WinTable,
                  rng: SplitMix64) -> Action:
    """EU-maximal action, ties broken uniformly at random."""
    eu = eu_all_actions(prior, own_bit, table)
    candidates = _argmax_set(eu)
    return prior.grid[int(candidates[rng.choice_index(len(candidates))])]


def expected_round_win(prior: ChshPrior, strategy: Strategy, table: WinTable) -> float:
    """Agent's expected winning probability for a round played with ``strategy``."""
    total = 0.0
    for bit in (0, 1):
        eu = eu_all_actions(prior, bit, table)
        total += eu[prior.grid.index_of(strategy.action_for(bit))]
    return total / 2.0


def update(prior: ChshPrior, observations: list[IterationObs], table: WinTable) -> ChshPrior:
    """Bayes update from a round's iterations; mutates and returns ``prior``.

    The likelihood of an iteration under hypothesis (a0, a1, g) is the win
    probability of (own action vs hypothesized opponent action for the
    opponent's actual bit) if the iteration was won, else its complement.
    Iterations multiply, so the update is order-invariant.
    """
    prior.check_normalized()
    grid, ents = prior.grid, prior.ents
    like0 = np.ones((len(grid), len(ents)))
    like1 = np.ones((len(grid), len(ents)))
    for obs in observations:
        a_idx = grid.index_of(obs.own_action)
        parity = obs.own_bit & obs.opp_bit
        slice_ = table.p_same[a_idx] if parity == 0 else 1.0 - table.p_same[a_idx]
        lk = slice_ if obs.won else 1.0 - slice_
        if obs.opp_bit == 0:
            like0 = like0 * lk
        else:
            like1 = like1 * lk
    prior.w *= like0[:, None, :]
    prior.w *= like1[None, :, :]
    total = prior.w.sum()
    if total <= 0.0:
        raise ZeroPosteriorError("all hypotheses have zero posterior weight")
    prior.w /= total
    return prior


def entanglement_expectation(prior: ChshPrior) -> float:
    """Expected entanglement in ebits under the level marginal."""
    return float(prior.w.sum(axis=(0, 1)) @ prior.ents.ebits)
