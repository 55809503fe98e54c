"""Qubit pure states, B92 state geometry and unambiguous discrimination.

Two strategies are provided for an eavesdropper who wants to identify the
signal state without ever being wrong:

* ``PROJECTIVE_RANDOM_BASIS`` measures in one of Bob's two bases chosen by a
  fair coin. A bar outcome identifies the state; it succeeds with probability
  ``sin(phi)**2 / 2``.
* ``OPTIMAL_UNAMBIGUOUS`` is the three-outcome POVM (Ivanovic-Dieks-Peres)
  that succeeds with probability ``1 - cos(phi)``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError

NORM_TOL = 1e-12


@dataclass(frozen=True)
class PureState:
    """Normalized qubit state ``amp0|0> + amp1|1>``."""

    amp0: complex
    amp1: complex

    def __post_init__(self):
        norm = abs(self.amp0) ** 2 + abs(self.amp1) ** 2
        if abs(norm - 1.0) > NORM_TOL:
            raise DomainError(f"state is not normalized (|amp|^2 sums to {norm!r})")

    def inner(self, other: PureState) -> complex:
        """Return ``<self|other>``."""
        return (self.amp0.conjugate() * other.amp0
                + self.amp1.conjugate() * other.amp1)

    def vector(self) -> np.ndarray:
        return np.array([self.amp0, self.amp1], dtype=complex)

    def projector(self) -> np.ndarray:
        v = self.vector()
        return np.outer(v, v.conj())


def _real_state(a: float, b: float) -> PureState:
    return PureState(complex(a), complex(b))


@dataclass(frozen=True)
class MeasurementBasis:
    outcome_a: PureState
    outcome_b: PureState

    def __post_init__(self):
        if abs(self.outcome_a.inner(self.outcome_b)) > NORM_TOL:
            raise DomainError("basis vectors are not orthogonal")


@dataclass(frozen=True)
class ProtocolGeometry:
    """The four B92 states for overlap angle ``phi``.

    Bob's basis ``B1`` is ``{psi1, psi1_bar}`` and ``B2`` is ``{psi2, psi2_bar}``.
    """

    phi: float
    psi1: PureState
    psi2: PureState
    psi1_bar: PureState
    psi2_bar: PureState

    @property
    def basis1(self) -> MeasurementBasis:
        return MeasurementBasis(self.psi1, self.psi1_bar)

    @property
    def basis2(self) -> MeasurementBasis:
        return MeasurementBasis(self.psi2, self.psi2_bar)

    @property
    def overlap(self) -> float:
        """``|<psi1|psi2>|``."""
        return abs(self.psi1.inner(self.psi2))

    def signal(self, index: int) -> PureState:
        """Signal state by index: 0 is psi1, 1 is psi2."""
        return self.psi2 if index else self.psi1

    def bar_table(self) -> np.ndarray:
        """``table[s, b]`` is the probability that signal ``s`` lands on the
        bar outcome of Bob's basis ``b`` (0 = B1, 1 = B2)."""
        bars = (self.psi1_bar, self.psi2_bar)
        return np.array([[born_probability(self.signal(s), bars[b]) for b in (0, 1)]
                         for s in (0, 1)])

    def index_of(self, state: PureState) -> int:
        """Return 0 for psi1, 1 for psi2; anything else is a domain error."""
        if abs(abs(state.inner(self.psi1)) - 1.0) <= NORM_TOL:
            return 0
        if abs(abs(state.inner(self.psi2)) - 1.0) <= NORM_TOL:
            return 1
        raise DomainError("state is neither psi1 nor psi2 of this geometry")


def make_geometry(phi: float) -> ProtocolGeometry:
    """Canonical real embedding: ``psi1,2 = (cos(phi/2), +-sin(phi/2))``."""
    if not (0.0 < phi <= math.pi / 2 + 1e-15):
        raise DomainError(f"phi must lie in (0, pi/2], got {phi!r}")
    c, s = math.cos(phi / 2), math.sin(phi / 2)
    return ProtocolGeometry(
        phi=phi,
        psi1=_real_state(c, s),
        psi2=_real_state(c, -s),
        psi1_bar=_real_state(-s, c),
        psi2_bar=_real_state(s, c),
    )


def born_probability(state: PureState, outcome: PureState) -> float:
    """``|<outcome|state>|^2``, clipped into [0, 1]."""
    if not isinstance(state, PureState) or not isinstance(outcome, PureState):
        raise DomainError("born_probability expects normalized PureState inputs")
    p = abs(outcome.inner(state)) ** 2
    return min(1.0, max(0.0, p))


def sample_projective(state: PureState, basis: MeasurementBasis,
                      rng: np.random.Generator) -> str:
    """Measure ``state`` in ``basis``; returns ``"a"`` or ``"b"``.

    Consumes exactly one uniform draw from ``rng``.
    """
    return "a" if rng.random() < born_probability(state, basis.outcome_a) else "b"


class EveOutcome(enum.IntEnum):
    """Relay alphabet: 0 inconclusive, 1 definitely psi1, 2 definitely psi2."""

    INCONCLUSIVE = 0
    PSI1 = 1
    PSI2 = 2


class DiscriminationStrategy(enum.Enum):
    PROJECTIVE_RANDOM_BASIS = "projective"
    OPTIMAL_UNAMBIGUOUS = "optimal"


def usd_povm(geometry: ProtocolGeometry) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """POVM elements ``(E_inconclusive, E_psi1, E_psi2)`` of optimal USD
    for equiprobable signals."""
    c = geometry.overlap
    if c >= 1.0:
        raise DomainError("identical states cannot be discriminated")
    e_psi1 = geometry.psi2_bar.projector() / (1.0 + c)
    e_psi2 = geometry.psi1_bar.projector() / (1.0 + c)
    return np.eye(2) - e_psi1 - e_psi2, e_psi1, e_psi2


def _povm_probabilities(povm, state: PureState) -> np.ndarray:
    v = state.vector()
    p = np.array([np.real(v.conj() @ e @ v) for e in povm])
    # E_psi1 is orthogonal to psi2 (and vice versa) in exact arithmetic
    p[np.abs(p) < 1e-15] = 0.0
    return np.clip(p, 0.0, 1.0)


def outcome_table(geometry: ProtocolGeometry,
                  strategy: DiscriminationStrategy) -> np.ndarray:
    """``table[s, k]``: probability of relay symbol ``k`` given signal ``s``.

    For the projective strategy the basis coin is averaged out.
    """
    table = np.zeros((2, 3))
    if strategy is DiscriminationStrategy.PROJECTIVE_RANDOM_BASIS:
        bar = geometry.bar_table()
        for s in (0, 1):
            # B1 bar outcome certifies psi2; B2 bar outcome certifies psi1
            table[s, EveOutcome.PSI2] = 0.5 * bar[s, 0]
            table[s, EveOutcome.PSI1] = 0.5 * bar[s, 1]
    else:
        povm = usd_povm(geometry)
        for s in (0, 1):
            table[s] = _povm_probabilities(povm, geometry.signal(s))
    table[:, EveOutcome.INCONCLUSIVE] = 1.0 - table[:, 1] - table[:, 2]
    return table


def discriminate(geometry: ProtocolGeometry, strategy: DiscriminationStrategy,
                 state: PureState, rng: np.random.Generator) -> EveOutcome:
    """Zero-error identification of a single-photon signal.

    The projective strategy draws a basis coin and then one measurement
    draw; the optimal POVM uses a single draw.
    """
    s = geometry.index_of(state)
    if strategy is DiscriminationStrategy.PROJECTIVE_RANDOM_BASIS:
        if rng.random() < 0.5:
            basis, verdict = geometry.basis1, EveOutcome.PSI2
        else:
            basis, verdict = geometry.basis2, EveOutcome.PSI1
        return verdict if sample_projective(state, basis, rng) == "b" else EveOutcome.INCONCLUSIVE
    p = _povm_probabilities(usd_povm(geometry), geometry.signal(s))
    u = rng.random()
    if u < p[1]:
        return EveOutcome.PSI1
    if u < p[1] + p[2]:
        return EveOutcome.PSI2
    return EveOutcome.INCONCLUSIVE


def discriminate_many(geometry: ProtocolGeometry, strategy: DiscriminationStrategy,
                      signals: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Vectorized :func:`discriminate` over signal indices (0 = psi1, 1 = psi2).

    Returns an ``int8`` array of relay symbols. Draw order differs from the
    scalar version (one array per draw kind) but the law is the same.
    """
    signals = np.asarray(signals, dtype=np.int8)
    n = signals.shape[0]
    out = np.zeros(n, dtype=np.int8)
    if strategy is DiscriminationStrategy.PROJECTIVE_RANDOM_BASIS:
        basis = (rng.random(n) >= 0.5).astype(np.int8)  # 0 = B1, 1 = B2
        u = rng.random(n)
        bar = u < geometry.bar_table()[signals, basis]
        out[bar] = np.where(basis[bar] == 0, EveOutcome.PSI2, EveOutcome.PSI1)
        return out
    table = outcome_table(geometry, strategy)
    u = rng.random(n)
    p1 = table[signals, EveOutcome.PSI1]
    p2 = table[signals, EveOutcome.PSI2]
    out[u < p1] = EveOutcome.PSI1
    out[(u >= p1) & (u < p1 + p2)] = EveOutcome.PSI2
    return out


def success_probability(geometry: ProtocolGeometry,
                        strategy: DiscriminationStrategy) -> float:
    """Analytic conclusive probability for equiprobable signals."""
    if strategy is DiscriminationStrategy.PROJECTIVE_RANDOM_BASIS:
        return 0.5 * math.sin(geometry.phi) ** 2
    return 1.0 - math.cos(geometry.phi)
