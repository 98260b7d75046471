"""Two-qubit kernel: game states, floored measurement effects, Eisert unitaries,
Born probabilities, and the entanglement-entropy parameterization.

Conventions used throughout:

* Pure two-qubit states are length-4 complex vectors ordered |00>, |01>, |10>, |11>.
* Amplitudes are plain Python/numpy complex numbers.
* A measurement "effect" is a 2x2 Hermitian matrix with spectrum in [0, 1].
  The probability floor replaces a projector P by (1-eps)*P + (eps/2)*I, so both
  outcomes of every observable keep probability at least eps/2.
* The entangling gate for the prisoners' dilemma is J = exp(-i*gamma*(D(x)D)/2)
  with D = U(pi, .), giving J|00> = cos(gamma/2)|00> - i*sin(gamma/2)|11>.
* Entanglement is quoted in ebits via the entropy of the reduced state,
  ebits(gamma) = H2(sin^2(gamma/2)).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

I2 = np.eye(2, dtype=complex)
PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)

HERMITIAN_TOL = 1e-12
UNITARY_TOL = 1e-12
NORM_TOL = 1e-12
EBITS_TOL = 1e-10


def _as_complex_matrix(m, shape) -> np.ndarray:
    a = np.asarray(m, dtype=complex)
    if a.shape != shape:
        raise ValueError(f"expected shape {shape}, got {a.shape}")
    if not np.all(np.isfinite(a.view(float))):
        raise ValueError("non-finite entries")
    return a


@dataclass(frozen=True)
class TwoQubitState:
    """Normalized pure state; ``amps`` ordered |00>, |01>, |10>, |11>."""

    amps: np.ndarray

    def __post_init__(self):
        a = _as_complex_matrix(self.amps, (4,))
        norm = float(np.sum(np.abs(a) ** 2))
        if abs(norm - 1.0) > NORM_TOL:
            raise ValueError(f"state not normalized: sum|amp|^2 = {norm!r}")
        object.__setattr__(self, "amps", a)


@dataclass(frozen=True)
class Effect:
    """2x2 Hermitian matrix with eigenvalues in [0, 1]."""

    m: np.ndarray

    def __post_init__(self):
        a = _as_complex_matrix(self.m, (2, 2))
        if np.max(np.abs(a - a.conj().T)) > HERMITIAN_TOL:
            raise ValueError("effect is not Hermitian")
        ev = np.linalg.eigvalsh(a)
        if ev[0] < -HERMITIAN_TOL or ev[-1] > 1 + HERMITIAN_TOL:
            raise ValueError(f"effect eigenvalues outside [0, 1]: {ev}")
        object.__setattr__(self, "m", a)


@dataclass(frozen=True)
class Unitary2:
    """2x2 unitary matrix."""

    m: np.ndarray

    def __post_init__(self):
        a = _as_complex_matrix(self.m, (2, 2))
        if np.max(np.abs(a @ a.conj().T - I2)) > UNITARY_TOL:
            raise ValueError("matrix is not unitary")
        object.__setattr__(self, "m", a)


@dataclass(frozen=True)
class EntLevel:
    """A gamma value together with its entanglement in ebits."""

    gamma: float
    ebits: float

    def __post_init__(self):
        if not 0.0 <= self.gamma <= math.pi / 2 + 1e-15:
            raise ValueError(f"gamma outside [0, pi/2]: {self.gamma}")
        if abs(ebits_of_gamma(self.gamma) - self.ebits) > EBITS_TOL:
            raise ValueError("gamma and ebits disagree")


def chsh_state(gamma: float) -> TwoQubitState:
    """State cos(gamma/2)|00> + sin(gamma/2)|11> prepared by the referee."""
    if not 0.0 <= gamma <= math.pi / 2 + 1e-15:
        raise ValueError(f"gamma outside [0, pi/2]: {gamma}")
    amps = np.zeros(4, dtype=complex)
    amps[0] = math.cos(gamma / 2)
    amps[3] = math.sin(gamma / 2)
    return TwoQubitState(amps)


def observable(theta: float, phi: float) -> np.ndarray:
    """Spin observable sin(t)cos(p) X + sin(t)sin(p) Y + cos(t) Z."""
    if not 0.0 <= theta <= math.pi + 1e-15:
        raise ValueError(f"theta outside [0, pi]: {theta}")
    if not 0.0 <= phi < 2 * math.pi:
        raise ValueError(f"phi outside [0, 2*pi): {phi}")
    st = math.sin(theta)
    return st * math.cos(phi) * PAULI_X + st * math.sin(phi) * PAULI_Y + math.cos(theta) * PAULI_Z


def observable_effects(theta: float, phi: float, eps: float) -> tuple[Effect, Effect]:
    """Floored effects for outcomes +1 (bit 0) and -1 (bit 1) of an observable.

    Applies P -> (1-eps)P + (eps/2)I to both projectors; the pair sums to the
    identity exactly.
    """
    if not 0.0 <= eps < 1.0:
        raise ValueError(f"eps outside [0, 1): {eps}")
    o = observable(theta, phi)
    p_plus = (I2 + o) / 2
    p_minus = (I2 - o) / 2
    e0 = (1 - eps) * p_plus + (eps / 2) * I2
    e1 = (1 - eps) * p_minus + (eps / 2) * I2
    return Effect(e0), Effect(e1)


def born_joint(state: TwoQubitState, ea: Effect, eb: Effect) -> float:
    """Probability <psi| ea (x) eb |psi>, clamped to [0, 1].

    A residual imaginary part above 1e-10 signals a non-Hermitian operator and
    is treated as an error rather than discarded.
    """
    val = np.vdot(state.amps, np.kron(ea.m, eb.m) @ state.amps)
    if abs(val.imag) > 1e-10:
        raise ValueError(f"Born value has imaginary part {val.imag}")
    return min(max(float(val.real), 0.0), 1.0)


def eisert_unitary(theta: float, phi: float) -> Unitary2:
    """Two-parameter strategy unitary of the entangled prisoners' dilemma."""
    if not 0.0 <= theta <= math.pi + 1e-15:
        raise ValueError(f"theta outside [0, pi]: {theta}")
    if not 0.0 <= phi <= math.pi / 2 + 1e-15:
        raise ValueError(f"phi outside [0, pi/2]: {phi}")
    c = math.cos(theta / 2)
    s = math.sin(theta / 2)
    return Unitary2(np.array([
        [np.exp(1j * phi) * c, s],
        [-s, np.exp(-1j * phi) * c],
    ]))


_DEFECT = np.array([[0, 1], [-1, 0]], dtype=complex)  # U(pi, .), = iY
_DD = np.kron(_DEFECT, _DEFECT)


def eisert_entangler(gamma: float) -> np.ndarray:
    """J = exp(-i*gamma*(D(x)D)/2); J|00> = cos(gamma/2)|00> - i sin(gamma/2)|11>."""
    if not 0.0 <= gamma <= math.pi / 2 + 1e-15:
        raise ValueError(f"gamma outside [0, pi/2]: {gamma}")
    return math.cos(gamma / 2) * np.eye(4, dtype=complex) - 1j * math.sin(gamma / 2) * _DD


def epd_outcome_probs(gamma: float, ua: Unitary2, ub: Unitary2, eps: float) -> np.ndarray:
    """Floored probabilities of the warden's four outcomes, ordered 00,01,10,11.

    Computes |<xy| J^dag (ua (x) ub) J |00>|^2 and applies p -> (1-eps)p + eps/4.
    """
    if not 0.0 <= eps < 1.0:
        raise ValueError(f"eps outside [0, 1): {eps}")
    j = eisert_entangler(gamma)
    ket = np.zeros(4, dtype=complex)
    ket[0] = 1.0
    psi = j.conj().T @ (np.kron(ua.m, ub.m) @ (j @ ket))
    p = np.abs(psi) ** 2
    return (1 - eps) * p + eps / 4


def binary_entropy(p: float) -> float:
    """H2(p) in bits; 0 at the endpoints."""
    if p <= 0.0 or p >= 1.0:
        return 0.0
    return float(-p * math.log2(p) - (1 - p) * math.log2(1 - p))


def ebits_of_gamma(gamma: float) -> float:
    """Entanglement entropy of the gamma state: H2(sin^2(gamma/2))."""
    if not 0.0 <= gamma <= math.pi / 2 + 1e-15:
        raise ValueError(f"gamma outside [0, pi/2]: {gamma}")
    return binary_entropy(math.sin(gamma / 2) ** 2)


def gamma_of_ebits(e: float) -> float:
    """Inverse of ebits_of_gamma by bisection; monotone on [0, pi/2].

    The residual |ebits_of_gamma(result) - e| is at machine level (< 1e-12).
    """
    if not 0.0 <= e <= 1.0:
        raise ValueError(f"ebits outside [0, 1]: {e}")
    if e == 0.0:
        return 0.0
    if e == 1.0:
        return math.pi / 2
    lo, hi = 0.0, math.pi / 2
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if ebits_of_gamma(mid) < e:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-16:
            break
    return 0.5 * (lo + hi)
