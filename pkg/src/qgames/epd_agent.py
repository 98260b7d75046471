"""1-fold rational prisoner: beliefs about entanglement and about the opponent's
beliefs, opponent prediction by simulated rational choice, and the two-part
round update.

Belief structure per agent:

* ``w[g][j][k]``: joint weights over own entanglement level g, the level j the
  opponent is (hypothetically) certain of, and a bias hypothesis index k.
* ``bias_val[j][k]``: the current bias value of hypothesis (j, k), i.e. the
  probability that hypothesized opponent assigns to *me* playing D. Values
  start on the grid k/10 and evolve continuously under Bayes transport.

Round update, given my action and the warden's outcome bits (mine, theirs):

1. Entanglement reweighting. The own-level marginal is multiplied by the
   mixture likelihood  P(outcome | own action, gamma_g) =
   pD * P(outcome | own, D, gamma_g) + (1 - pD) * P(outcome | own, Q, gamma_g),
   where pD is the agent's current probability that the opponent plays D
   (hypothesis-weighted, ties counting 1/2). The hypothesis weights over
   (j, k) are not reweighted by outcomes; they change only through transport,
   mirroring an agent that updates its entanglement prior with Bayes rule and
   separately re-derives what each hypothesized opponent would now believe.
2. Bias transport. Each hypothesized opponent, certain of level j and having
   taken their own rational action a*, conditions their belief about my action
   on the outcome: bias' = bias * P(outcome | me=D, a*, gamma_j) / Z. For tie
   hypotheses the two transported biases are averaged with weight 1/2.

Certainty (bias 0 or 1) is a fixed point of transport, and with eps > 0 no
outcome has zero probability, so the update never divides by zero.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .chsh_game import EntGrid, DEFAULT_ENTS
from .epd_game import EpdAction, PAYOFF_A, GAP_TOL
from .qcore import EntLevel, epd_outcome_probs
from .rng import SplitMix64

TIE_REL_TOL = 1e-12
NORM_CHECK_TOL = 1e-9
_AIDX = {EpdAction.Q: 0, EpdAction.D: 1}


class ZeroPosteriorError(RuntimeError):
    pass


class EpdPriorKind(enum.Enum):
    LOW_LOW = "low-low"
    HIGH_HIGH = "high-high"
    LOW_HIGH = "low-high"


class OppChoice(enum.Enum):
    Q = "Q"
    D = "D"
    TIE = "tie"


@dataclass(frozen=True)
class OppHypothesis:
    """One cell of the opponent model: certain level index and a bias value."""

    g_idx: int
    bias: float

    def __post_init__(self):
        if not 0.0 <= self.bias <= 1.0:
            raise ValueError(f"bias outside [0, 1]: {self.bias}")


@lru_cache(maxsize=8)
def _tables(ents: EntGrid, eps: float):
    """Outcome probabilities P[g, me, them, outcome] and expected payoffs E[g, me, them]."""
    n = len(ents)
    probs = np.empty((n, 2, 2, 4))
    for gi, gamma in enumerate(ents.gammas):
        for a, ua in ((0, EpdAction.Q), (1, EpdAction.D)):
            for b, ub in ((0, EpdAction.Q), (1, EpdAction.D)):
                probs[gi, a, b] = epd_outcome_probs(gamma, ua.unitary, ub.unitary, eps)
    epay = probs @ PAYOFF_A.ravel()
    return probs, epay


class EpdPrior:
    """Joint weights plus per-hypothesis bias values."""

    def __init__(self, w: np.ndarray, bias_val: np.ndarray, ents: EntGrid):
        w = np.asarray(w, dtype=float)
        bias_val = np.asarray(bias_val, dtype=float)
        n = len(ents)
        if w.shape != (n, n, n):
            raise ValueError(f"bad weight shape {w.shape}")
        if bias_val.shape != (n, n):
            raise ValueError(f"bad bias shape {bias_val.shape}")
        if np.any(w < 0):
            raise ValueError("negative weight")
        if np.any(bias_val < 0) or np.any(bias_val > 1):
            raise ValueError("bias outside [0, 1]")
        self.w = w
        self.bias_val = bias_val
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

    def copy(self) -> "EpdPrior":
        return EpdPrior(self.w.copy(), self.bias_val.copy(), self.ents)

    def to_flat(self) -> np.ndarray:
        """Weights then bias values, index-ordered (debugging snapshot)."""
        return np.concatenate([self.w.ravel(), self.bias_val.ravel()])

    @classmethod
    def from_flat(cls, flat: np.ndarray, ents: EntGrid | None = None) -> "EpdPrior":
        ents = ents or DEFAULT_ENTS
        n = len(ents)
        flat = np.asarray(flat, dtype=float)
        return cls(flat[: n ** 3].reshape(n, n, n), flat[n ** 3:].reshape(n, n), ents)


def binomial_weights(n: int, p: float) -> np.ndarray:
    """Exact Binomial(n, p) pmf over 0..n successes."""
    return np.array([math.comb(n, k) * p ** k * (1 - p) ** (n - k) for k in range(n + 1)])


def make_epd_prior(kind: EpdPriorKind, ents: EntGrid | None = None) -> EpdPrior:
    """Product prior: own-level and opponent-level binomials, uniform biases.

    The low profile is Binomial(10, 1/5) over the ebit grid (0.2 ebits
    expected), the high profile Binomial(10, 4/5) (0.8 ebits expected).
    Bias hypotheses start at the grid values k/10 with uniform weight.
    """
    ents = ents or DEFAULT_ENTS
    n = len(ents)
    low = binomial_weights(n - 1, 0.2)
    high = binomial_weights(n - 1, 0.8)
    own, opp = {
        EpdPriorKind.LOW_LOW: (low, low),
        EpdPriorKind.HIGH_HIGH: (high, high),
        EpdPriorKind.LOW_HIGH: (low, high),
    }[kind]
    w = np.einsum("g,j,k->gjk", own, opp, np.full(n, 1.0 / n))
    bias = np.tile(np.linspace(0.0, 1.0, n), (n, 1))
    return EpdPrior(w, bias, ents)


def _opponent_gap_coeffs(ents: EntGrid, eps: float) -> tuple[np.ndarray, np.ndarray]:
    """Per-level payoff gain of D over Q for the opponent, vs my D and my Q."""
    probs, _ = _tables(ents, eps)
    pay_b = PAYOFF_A.T.ravel()
    gain_vs_d = (probs[:, 1, 1] - probs[:, 1, 0]) @ pay_b
    gain_vs_q = (probs[:, 0, 1] - probs[:, 0, 0]) @ pay_b
    return gain_vs_d, gain_vs_q


def opponent_action(g_level: EntLevel, bias: float, eps: float) -> OppChoice:
    """Rational choice of an opponent certain of ``g_level`` who thinks I play D
    with probability ``bias``."""
    if not 0.0 <= bias <= 1.0:
        raise ValueError(f"bias outside [0, 1]: {bias}")
    probs_d = epd_outcome_probs(g_level.gamma, EpdAction.D.unitary, EpdAction.D.unitary, eps)
    probs_dq = epd_outcome_probs(g_level.gamma, EpdAction.D.unitary, EpdAction.Q.unitary, eps)
    probs_qd = epd_outcome_probs(g_level.gamma, EpdAction.Q.unitary, EpdAction.D.unitary, eps)
    probs_q = epd_outcome_probs(g_level.gamma, EpdAction.Q.unitary, EpdAction.Q.unitary, eps)
    pay_b = PAYOFF_A.T.ravel()
    gap = bias * (probs_d - probs_dq) @ pay_b + (1 - bias) * (probs_qd - probs_q) @ pay_b
    if gap > GAP_TOL:
        return OppChoice.D
    if gap < -GAP_TOL:
        return OppChoice.Q
    return OppChoice.TIE


def _p_opp_d_grid(prior: EpdPrior, eps: float) -> np.ndarray:
    """Probability each hypothesis cell assigns to the opponent playing D."""
    gain_vs_d, gain_vs_q = _opponent_gap_coeffs(prior.ents, eps)
    gap = prior.bias_val * gain_vs_d[:, None] + (1 - prior.bias_val) * gain_vs_q[:, None]
    return np.where(gap > GAP_TOL, 1.0, np.where(gap < -GAP_TOL, 0.0, 0.5))


def predict_opponent(prior: EpdPrior, eps: float) -> float:
    """Agent's probability that the opponent plays D (ties count one half)."""
    prior.check_normalized()
    return float((prior.w.sum(axis=0) * _p_opp_d_grid(prior, eps)).sum())


def eu_epd_actions(prior: EpdPrior, eps: float) -> tuple[float, float]:
    """Expected payoffs of (Q, D) under the prior and predicted opponent play."""
    prior.check_normalized()
    _, epay = _tables(prior.ents, eps)
    pd = _p_opp_d_grid(prior, eps)
    w_d = np.einsum("gjk,jk->g", prior.w, pd)
    w_g = prior.w.sum(axis=(1, 2))
    eu_q = float(w_d @ epay[:, 0, 1] + (w_g - w_d) @ epay[:, 0, 0])
    eu_d = float(w_d @ epay[:, 1, 1] + (w_g - w_d) @ epay[:, 1, 0])
    return eu_q, eu_d


def choose_epd_action(prior: EpdPrior, eps: float, rng: SplitMix64) -> EpdAction:
    """Expected-payoff maximizer; near-ties resolved uniformly at random."""
    eu_q, eu_d = eu_epd_actions(prior, eps)
    if abs(eu_q - eu_d) <= TIE_REL_TOL * max(1.0, abs(eu_q), abs(eu_d)):
        return EpdAction.D if rng.choice_index(2) else EpdAction.Q
    return EpdAction.D if eu_d > eu_q else EpdAction.Q


def update_epd(prior: EpdPrior, own_action: EpdAction, outcome: tuple[int, int],
               eps: float) -> EpdPrior:
    """Two-part round update; mutates and returns ``prior``.

    ``outcome`` is (my outcome bit, opponent's outcome bit).
    """
    prior.check_normalized()
    mine, theirs = outcome
    if mine not in (0, 1) or theirs not in (0, 1):
        raise ValueError("outcome bits must be 0 or 1")
    oc = 2 * mine + theirs
    probs, _ = _tables(prior.ents, eps)
    own = _AIDX[own_action]
    pd = _p_opp_d_grid(prior, eps)
    p_opp_d = float((prior.w.sum(axis=0) * pd).sum())

    # part 1: reweight the own-entanglement marginal with the mixture likelihood
    like_g = p_opp_d * probs[:, own, 1, oc] + (1 - p_opp_d) * probs[:, own, 0, oc]
    prior.w *= like_g[:, None, None]
    total = prior.w.sum()
    if total <= 0.0:
        raise ZeroPosteriorError("all hypotheses have zero posterior weight")
    prior.w /= total

    # part 2: transport each hypothesized opponent's belief about my action
    bias = prior.bias_val
    lk_d_when_q = probs[:, 1, 0, oc][:, None]  # P(outcome | me D, their action Q, level j)
    lk_q_when_q = probs[:, 0, 0, oc][:, None]
    lk_d_when_d = probs[:, 1, 1, oc][:, None]
    lk_q_when_d = probs[:, 0, 1, oc][:, None]
    moved_q = bias * lk_d_when_q / (bias * lk_d_when_q + (1 - bias) * lk_q_when_q)
    moved_d = bias * lk_d_when_d / (bias * lk_d_when_d + (1 - bias) * lk_q_when_d)
    prior.bias_val = np.where(pd == 1.0, moved_d,
                              np.where(pd == 0.0, moved_q, 0.5 * (moved_d + moved_q)))
    return prior


def epd_entanglement_expectation(prior: EpdPrior) -> float:
    """Expected own entanglement in ebits."""
    return float(prior.w.sum(axis=(1, 2)) @ prior.ents.ebits)
