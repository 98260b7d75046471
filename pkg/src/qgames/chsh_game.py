"""CHSH game on the discretized action grid.

Players win iff x AND y == a XOR b for referee bits (x, y) and measured bits
(a, b). Actions are observables O(theta, phi) on the grid theta = k*pi/8
(k = 0..8), phi = k*pi/8 (k = 0..15); the poles theta in {0, pi} keep a single
representative at phi = 0 since phi has no effect there, leaving
7*16 + 2 = 114 distinct actions. Entanglement levels run from 0.0 to 1.0 ebits
in steps of 0.1.

Because the two effects of an observable sum to the identity, the joint
outcome distribution is determined by the equal-bits probability
P_same(aA, aB, gamma); win probability is P_same when x AND y = 0 and
1 - P_same otherwise. The precomputed WinTable stores these values for all
action pairs and grid entanglement levels.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from . import qcore
from .qcore import EntLevel
from .rng import SplitMix64

N_THETA = 9
N_PHI = 16
STEP = math.pi / 8
N_ACTIONS = 114
N_LEVELS = 11


@dataclass(frozen=True)
class Action:
    """Grid measurement, resolved by indices: theta = theta_idx*pi/8, phi = phi_idx*pi/8."""

    theta_idx: int
    phi_idx: int

    def __post_init__(self):
        if not 0 <= self.theta_idx < N_THETA:
            raise ValueError(f"theta_idx outside grid: {self.theta_idx}")
        if not 0 <= self.phi_idx < N_PHI:
            raise ValueError(f"phi_idx outside grid: {self.phi_idx}")
        if self.theta_idx in (0, N_THETA - 1) and self.phi_idx != 0:
            raise ValueError("pole actions keep the phi = 0 representative only")

    @property
    def theta(self) -> float:
        return self.theta_idx * STEP

    @property
    def phi(self) -> float:
        return self.phi_idx * STEP


class ActionGrid:
    """All 114 distinct grid actions, ordered pole(0), theta rows 1..7, pole(pi)."""

    def __init__(self):
        actions = [Action(0, 0)]
        actions += [Action(t, p) for t in range(1, N_THETA - 1) for p in range(N_PHI)]
        actions.append(Action(N_THETA - 1, 0))
        self.actions: tuple[Action, ...] = tuple(actions)
        self._index = {(a.theta_idx, a.phi_idx): i for i, a in enumerate(self.actions)}
        self.thetas = np.array([a.theta for a in self.actions])
        self.phis = np.array([a.phi for a in self.actions])

    def __len__(self) -> int:
        return len(self.actions)

    def __getitem__(self, i: int) -> Action:
        return self.actions[i]

    def index_of(self, action: Action) -> int:
        return self._index[(action.theta_idx, action.phi_idx)]

    def n_phi_at(self, theta_idx: int) -> int:
        return 1 if theta_idx in (0, N_THETA - 1) else N_PHI


@dataclass(frozen=True)
class EntGrid:
    """Entanglement levels; the default grid is 0.0, 0.1, ..., 1.0 ebits."""

    levels: tuple[EntLevel, ...]

    def __post_init__(self):
        eb = [lv.ebits for lv in self.levels]
        if any(b <= a for a, b in zip(eb, eb[1:])):
            raise ValueError("ebits must be strictly increasing")

    def __len__(self) -> int:
        return len(self.levels)

    @cached_property
    def gammas(self) -> np.ndarray:
        return np.array([lv.gamma for lv in self.levels])

    @cached_property
    def ebits(self) -> np.ndarray:
        return np.array([lv.ebits for lv in self.levels])


def default_ent_grid() -> EntGrid:
    levels = []
    for k in range(N_LEVELS):
        e = k / 10
        levels.append(EntLevel(gamma=qcore.gamma_of_ebits(e), ebits=e))
    return EntGrid(tuple(levels))


DEFAULT_GRID = ActionGrid()
DEFAULT_ENTS = default_ent_grid()


@dataclass(frozen=True)
class Strategy:
    """One action per own referee bit value."""

    action_for_bit0: Action
    action_for_bit1: Action

    def action_for(self, bit: int) -> Action:
        return self.action_for_bit1 if bit else self.action_for_bit0


def chsh_outcome_probs(gamma: float, a_alice: Action, a_bob: Action, eps: float) -> np.ndarray:
    """Joint Born distribution of the bit pairs, ordered 00, 01, 10, 11."""
    state = qcore.chsh_state(gamma)
    ea = qcore.observable_effects(a_alice.theta, a_alice.phi, eps)
    eb = qcore.observable_effects(a_bob.theta, a_bob.phi, eps)
    return np.array([qcore.born_joint(state, ea[a], eb[b]) for a in (0, 1) for b in (0, 1)])


def win_prob(x: int, y: int, a_alice: Action, a_bob: Action, gamma: float, eps: float) -> float:
    """Referee's probability that the round is won for bits (x, y)."""
    if x not in (0, 1) or y not in (0, 1):
        raise ValueError("bits must be 0 or 1")
    p = chsh_outcome_probs(gamma, a_alice, a_bob, eps)
    target = x & y
    return float(sum(p[2 * a + b] for a in (0, 1) for b in (0, 1) if (a ^ b) == target))


def joint_win_prob(s_alice: Strategy, s_bob: Strategy, gamma: float, eps: float) -> float:
    """Winning probability averaged over the four equally likely bit pairs."""
    return sum(
        win_prob(x, y, s_alice.action_for(x), s_bob.action_for(y), gamma, eps)
        for x in (0, 1) for y in (0, 1)
    ) / 4.0


def sample_iteration(
    rng: SplitMix64, x: int, y: int, a_alice: Action, a_bob: Action,
    gamma_g: float, eps: float,
) -> tuple[int, int, bool]:
    """Draw measured bits (a, b) from the joint Born distribution; win flag included."""
    p = chsh_outcome_probs(gamma_g, a_alice, a_bob, eps)
    k = rng.categorical(p / p.sum())
    a, b = k >> 1, k & 1
    return a, b, (a ^ b) == (x & y)


class WinTable:
    """Precomputed win probabilities win[x][y][aA][aB][g] for one eps.

    Entries only depend on the bits through the parity x AND y, so the table
    is backed by the equal-bits tensor ``p_same`` of shape (114, 114, 11).
    """

    def __init__(self, grid: ActionGrid, ents: EntGrid, eps: float, p_same: np.ndarray):
        self.grid = grid
        self.ents = ents
        self.eps = eps
        self.p_same = p_same
        n = len(grid)
        self.win = np.empty((2, 2, n, n, len(ents)))
        self.win[0, 0] = self.win[0, 1] = self.win[1, 0] = p_same
        self.win[1, 1] = 1.0 - p_same
        # contiguous (actions, actions*levels) view used by the agents' matvecs
        self._flat = np.ascontiguousarray(p_same.reshape(n, n * len(ents)))

    def same_flat(self) -> np.ndarray:
        return self._flat


def build_win_table(grid: ActionGrid, ents: EntGrid, eps: float) -> WinTable:
    """Vectorized construction of the full win tensor."""
    if not 0.0 <= eps < 1.0:
        raise ValueError(f"eps outside [0, 1): {eps}")
    th, ph = grid.thetas, grid.phis
    # effect matrix elements for outcome bit 0: diag terms real, off-diag complex
    d0 = (1 - eps) * (1 + np.cos(th)) / 2 + eps / 2
    d1 = (1 - eps) * (1 - np.cos(th)) / 2 + eps / 2
    off = (1 - eps) * np.sin(th) * np.exp(-1j * ph) / 2
    n = len(grid)
    p_same = np.empty((n, n, len(ents)))
    for gi, gamma in enumerate(ents.gammas):
        c, s = math.cos(gamma / 2), math.sin(gamma / 2)
        p_same[:, :, gi] = (
            c * c * (np.outer(d0, d0) + np.outer(1 - d0, 1 - d0))
            + s * s * (np.outer(d1, d1) + np.outer(1 - d1, 1 - d1))
            + 4 * c * s * np.real(np.outer(off, off))
        )
    return WinTable(grid, ents, eps, p_same)


def max_joint_win_prob(table: WinTable, g_idx: int) -> float:
    """Exhaustive maximum of joint_win_prob over all 114^4 strategy profiles.

    Decomposes the average over bit pairs into terms depending on Alice's
    bit-0 and bit-1 actions separately, so the scan is 114^3 instead of 114^4.
    """
    w0 = table.p_same[:, :, g_idx]
    # max over a0 of w0[a0,b0] + w0[a0,b1], for every (b0, b1)
    m1 = np.max(w0[:, :, None] + w0[:, None, :], axis=0)
    # max over a1 of w0[a1,b0] + (1 - w0[a1,b1])
    m2 = np.max(w0[:, :, None] - w0[:, None, :], axis=0) + 1.0
    return float(np.max(m1 + m2) / 4.0)
