"""Entangled prisoners' dilemma: payoffs, the two-action reduced game, dominance
analysis, and numerical verification of the reduction that justifies it.

Payoff matrix (row = first player's outcome bit, column = second player's):

    (3,3) (0,5)
    (5,0) (1,1)

Rational players modeling rational opponents only ever use the strategy
unitaries Q = U(0, pi/2) = iZ and D = U(pi, pi/2) = iY: the best response to
any fixed opponent action lies on the phi = pi/2 line, and with both phi fixed
at pi/2 the payoff in theta is extremal at the endpoints. ``verify_reduction``
checks both facts on a grid. D is dominant below arcsin(sqrt(1/5)) ~ 0.298
ebits, Q above arcsin(sqrt(2/5)) ~ 0.508 ebits, and neither in between.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from . import qcore
from .qcore import Unitary2

PAYOFF_A = np.array([[3.0, 0.0], [5.0, 1.0]])  # [my bit][their bit]
PAYOFF_B = PAYOFF_A.T
GAP_TOL = 1e-12


class EpdAction(enum.Enum):
    Q = "Q"
    D = "D"

    @property
    def unitary(self) -> Unitary2:
        return _ACTION_UNITARIES[self]


_ACTION_UNITARIES = {
    EpdAction.Q: qcore.eisert_unitary(0.0, math.pi / 2),
    EpdAction.D: qcore.eisert_unitary(math.pi, math.pi / 2),
}


class DominanceRegion(enum.Enum):
    D_DOMINANT = "D"
    NEITHER = "neither"
    Q_DOMINANT = "Q"


def expected_payoffs(gamma: float, a_first: EpdAction, a_second: EpdAction,
                     eps: float, payoff: np.ndarray | None = None) -> tuple[float, float]:
    """Expected payoffs of the restricted game under the floored outcome law."""
    pa = PAYOFF_A if payoff is None else np.asarray(payoff, dtype=float)
    p = qcore.epd_outcome_probs(gamma, a_first.unitary, a_second.unitary, eps).reshape(2, 2)
    return float((p * pa).sum()), float((p * pa.T).sum())


def full_expected_payoffs(gamma: float, theta_a: float, phi_a: float,
                          theta_b: float, phi_b: float, eps: float) -> tuple[float, float]:
    """Expected payoffs for arbitrary strategy unitaries."""
    p = qcore.epd_outcome_probs(
        gamma, qcore.eisert_unitary(theta_a, phi_a), qcore.eisert_unitary(theta_b, phi_b), eps
    ).reshape(2, 2)
    return float((p * PAYOFF_A).sum()), float((p * PAYOFF_A.T).sum())


def payoff_gaps(gamma: float, eps: float = 0.0,
                payoff: np.ndarray | None = None) -> tuple[float, float]:
    """(gain of D over Q against a D opponent, same against a Q opponent)."""
    vs_d = expected_payoffs(gamma, EpdAction.D, EpdAction.D, eps, payoff)[0] \
        - expected_payoffs(gamma, EpdAction.Q, EpdAction.D, eps, payoff)[0]
    vs_q = expected_payoffs(gamma, EpdAction.D, EpdAction.Q, eps, payoff)[0] \
        - expected_payoffs(gamma, EpdAction.Q, EpdAction.Q, eps, payoff)[0]
    return vs_d, vs_q


def dominance(gamma: float) -> DominanceRegion:
    """Dominance region of the reduced game at this gamma (eps-invariant)."""
    vs_d, vs_q = payoff_gaps(gamma)
    if vs_d > GAP_TOL and vs_q > GAP_TOL:
        return DominanceRegion.D_DOMINANT
    if vs_d < -GAP_TOL and vs_q < -GAP_TOL:
        return DominanceRegion.Q_DOMINANT
    return DominanceRegion.NEITHER


def _bisect_root(f, lo: float, hi: float, tol: float = 1e-10) -> float:
    flo = f(lo)
    if flo <= 0:
        return lo
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if f(mid) > 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def thresholds() -> tuple[float, float]:
    """Dominance boundaries in ebits, found by root-finding on the payoff gaps."""
    g_low = _bisect_root(lambda g: payoff_gaps(g)[0], 0.0, math.pi / 2)
    g_high = _bisect_root(lambda g: payoff_gaps(g)[1], 0.0, math.pi / 2)
    return qcore.ebits_of_gamma(g_low), qcore.ebits_of_gamma(g_high)


class ReductionViolation(RuntimeError):
    """A grid point where the claimed reduction fails; carries the report."""

    def __init__(self, report: "ReductionReport"):
        super().__init__(
            f"reduction violated at {report.counterexample} "
            f"(phi violation {report.phi_max_violation:.3e}, "
            f"theta violation {report.theta_max_violation:.3e})"
        )
        self.report = report


@dataclass
class ReductionReport:
    """Machine-readable outcome of the reduction sweep."""

    eps: float
    theta_steps: int
    phi_steps: int
    gamma_steps: int
    points_checked: int
    phi_max_violation: float
    theta_max_violation: float
    tolerance: float
    passed: bool
    counterexample: tuple | None = None

    def to_dict(self) -> dict:
        return {
            "eps": self.eps,
            "theta_steps": self.theta_steps,
            "phi_steps": self.phi_steps,
            "gamma_steps": self.gamma_steps,
            "points_checked": self.points_checked,
            "phi_max_violation": self.phi_max_violation,
            "theta_max_violation": self.theta_max_violation,
            "tolerance": self.tolerance,
            "passed": self.passed,
            "counterexample": self.counterexample,
        }

    def summary(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        lines = [
            f"reduction check ({status}) at eps={self.eps:g} on "
            f"{self.theta_steps}x{self.phi_steps}x{self.gamma_steps} grid",
            f"  best-response-on-phi=pi/2 max violation: {self.phi_max_violation:.3e}",
            f"  theta-boundary extremality max violation: {self.theta_max_violation:.3e}",
            f"  points checked: {self.points_checked}",
        ]
        if self.counterexample is not None:
            lines.append(f"  counterexample (gamma, theta_opp, phi_opp): {self.counterexample}")
        return "\n".join(lines)


def _payoff_tensor(thetas: np.ndarray, phis: np.ndarray, gammas: np.ndarray,
                   eps: float) -> np.ndarray:
    """First player's expected payoff, shape (gamma, theta_a, phi_a, theta_b, phi_b)."""
    nt, np_, ng = len(thetas), len(phis), len(gammas)
    us = np.empty((nt, np_, 2, 2), dtype=complex)
    for i, t in enumerate(thetas):
        for j, p in enumerate(phis):
            us[i, j] = qcore.eisert_unitary(t, p).m
    u = us.reshape(nt * np_, 2, 2)
    d = np.array([[0, 1], [-1, 0]], dtype=complex)
    pay = np.empty((ng, nt * np_, nt * np_))
    pa_flat = PAYOFF_A.ravel()
    for gi, g in enumerate(gammas):
        c, s = math.cos(g / 2), math.sin(g / 2)
        psi0 = np.array([[c, 0.0], [0.0, -1j * s]])  # J|00> as a 2x2 coefficient matrix
        t1 = np.einsum("aij,jk->aik", u, psi0)
        t2 = np.einsum("aik,blk->abil", t1, u)
        # J^dag psi = c*psi + i*s*(D psi D^T)
        dd = np.einsum("ij,abjk,lk->abil", d, t2, d)
        final = c * t2 + 1j * s * dd
        probs = np.abs(final.reshape(-1, nt * np_, 4)) ** 2
        probs = (1 - eps) * probs + eps / 4
        pay[gi] = probs @ pa_flat
    return pay.reshape(ng, nt, np_, nt, np_)


def verify_reduction(theta_steps: int = 17, phi_steps: int = 9, gamma_steps: int = 11,
                     eps: float = 0.1, tolerance: float = 1e-9,
                     raise_on_violation: bool = True) -> ReductionReport:
    """Check the two facts behind the {Q, D} reduction on a parameter sweep.

    (1) For every entanglement level and fixed opponent action, the player's
        best payoff over the full (theta, phi) grid is attained (within
        ``tolerance``) on the phi = pi/2 line.
    (2) With both phi fixed at pi/2, the payoff extrema over the player's
        theta lie at theta in {0, pi}.
    """
    if min(theta_steps, phi_steps, gamma_steps) < 9:
        raise ValueError("step counts must be at least 9")
    thetas = np.linspace(0.0, math.pi, theta_steps)
    phis = np.linspace(0.0, math.pi / 2, phi_steps)
    gammas = np.linspace(0.0, math.pi / 2, gamma_steps)
    pay = _payoff_tensor(thetas, phis, gammas, eps)

    phi_viol = 0.0
    theta_viol = 0.0
    worst = None
    for gi in range(len(gammas)):
        for to in range(theta_steps):
            for po in range(phi_steps):
                mine = pay[gi, :, :, to, po]
                v = float(mine.max() - mine[:, -1].max())
                if v > phi_viol:
                    phi_viol = v
                    if v > tolerance:
                        worst = (float(gammas[gi]), float(thetas[to]), float(phis[po]))
            line = pay[gi, :, -1, to, -1]
            edge_max = max(line[0], line[-1])
            edge_min = min(line[0], line[-1])
            v = float(max(line.max() - edge_max, edge_min - line.min()))
            if v > theta_viol:
                theta_viol = v
                if v > tolerance:
                    worst = (float(gammas[gi]), float(thetas[to]), math.pi / 2)
    n_checked = gamma_steps * theta_steps * phi_steps
    report = ReductionReport(
        eps=eps, theta_steps=theta_steps, phi_steps=phi_steps, gamma_steps=gamma_steps,
        points_checked=n_checked, phi_max_violation=phi_viol, theta_max_violation=theta_viol,
        tolerance=tolerance, passed=max(phi_viol, theta_viol) <= tolerance,
        counterexample=worst,
    )
    if raise_on_violation and not report.passed:
        raise ReductionViolation(report)
    return report
