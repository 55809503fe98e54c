"""Eavesdropping strategies against fiber B92.

The two-point attack splits Eve in two. Eve1 sits next to Alice, measures
every signal with a zero-error strategy and sends the symbol string
0/1/2 over a classical line at speed c. Eve2 sits next to Bob and resends
``psi1``/``psi2`` for symbols 1/2 and nothing for 0. The fiber between the
two would have lost a fraction ``1 - T`` of the photons anyway, so as long as
``T <= p_succ`` Eve2 can throttle her resends to exactly the honest rate and
the sifted key carries no errors at all.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np

from .errors import ConfigurationError, DomainError, InfeasibleAttackError
from .physical import (IdealSinglePhoton, PhotonPulse, SourceModel,
                       classical_delay_s, fiber_delay_s)
from .quantum import (DiscriminationStrategy, EveOutcome, ProtocolGeometry,
                      discriminate, discriminate_many, sample_projective,
                      success_probability)

# slack for floating point at the exact threshold separation
_THRESHOLD_RTOL = 1e-9


class GuessRule(enum.Enum):
    """What the single-point eavesdropper resends after an inconclusive result."""

    OBSERVED = "observed"      # the projective outcome she saw (psi1 or psi2)
    ALWAYS_PSI1 = "psi1"
    ALWAYS_PSI2 = "psi2"
    RANDOM = "random"


@dataclass(frozen=True)
class TwoPointAttack:
    eve1_pos_km: float
    eve2_pos_km: float
    strategy: DiscriminationStrategy = DiscriminationStrategy.PROJECTIVE_RANDOM_BASIS
    eve2_source: SourceModel = field(default_factory=IdealSinglePhoton)
    throttle: bool = True
    extra_latency_s: float = 0.0
    kind = "two_point"

    def __post_init__(self):
        if self.eve1_pos_km < 0:
            raise ConfigurationError("eve1_pos_km must be >= 0", "eve1_pos_km")
        if self.eve2_pos_km < self.eve1_pos_km:
            raise ConfigurationError(
                f"position ordering violated: eve2_pos_km ({self.eve2_pos_km}) "
                f"< eve1_pos_km ({self.eve1_pos_km})", "eve2_pos_km")
        if self.extra_latency_s < 0:
            raise ConfigurationError("extra_latency_s must be >= 0", "extra_latency_s")

    @property
    def separation_km(self) -> float:
        return self.eve2_pos_km - self.eve1_pos_km


@dataclass(frozen=True)
class NaiveInterceptResend:
    pos_km: float
    strategy: DiscriminationStrategy = DiscriminationStrategy.PROJECTIVE_RANDOM_BASIS
    guess_rule: GuessRule = GuessRule.OBSERVED
    kind = "naive"

    def __post_init__(self):
        if self.pos_km < 0:
            raise ConfigurationError("naive_pos_km must be >= 0", "naive_pos_km")


@dataclass(frozen=True)
class BeamSplit:
    """Passive tap at Alice's output; Eve's arm holds ``mean_mu_after_tap``
    photons on average and Bob's pulse is left alone."""

    mean_mu_after_tap: float
    kind = "beam_split"

    def __post_init__(self):
        if self.mean_mu_after_tap < 0:
            raise ConfigurationError("tap_mu must be >= 0", "tap_mu")


AttackConfig = Optional[Union[TwoPointAttack, NaiveInterceptResend, BeamSplit]]


def attack_kind(attack: AttackConfig) -> str:
    return "none" if attack is None else attack.kind


@dataclass(frozen=True)
class RelayMessage:
    slot_index: int
    symbol: EveOutcome

    def __post_init__(self):
        if int(self.symbol) not in (0, 1, 2):
            raise DomainError(f"relay symbol must be 0, 1 or 2, got {self.symbol!r}")


def eve1_process(pulse: PhotonPulse, geometry: ProtocolGeometry,
                 strategy: DiscriminationStrategy,
                 rng: np.random.Generator) -> RelayMessage:
    """Measure (and destroy) an intercepted pulse."""
    if pulse.photon_count == 0:
        return RelayMessage(pulse.slot_index, EveOutcome.INCONCLUSIVE)
    return RelayMessage(pulse.slot_index, discriminate(geometry, strategy, pulse.state, rng))


def throttle_keep_probability(p_succ: float, target_t: float) -> float:
    """Fraction of conclusive slots Eve2 must resend to match transmittance
    ``target_t``.

    Raises :class:`InfeasibleAttackError` when ``target_t > p_succ``: Eve
    cannot produce as many photons as the honest fiber would deliver.
    """
    if not (0.0 < p_succ <= 1.0) or not (0.0 < target_t <= 1.0):
        raise DomainError("p_succ and target_t must lie in (0, 1]")
    if target_t > p_succ * (1.0 + _THRESHOLD_RTOL):
        raise InfeasibleAttackError(
            f"target transmittance {target_t:.6g} exceeds Eve1 success probability {p_succ:.6g}")
    return min(1.0, target_t / p_succ)


def eve2_resend(msg: RelayMessage, keep_prob: float, geometry: ProtocolGeometry,
                eve2_source: SourceModel, rng: np.random.Generator) -> PhotonPulse:
    """Regenerate the identified state; symbol 0 (and dropped slots) give vacuum.

    Vacuum pulses carry ``psi1`` as a placeholder state.
    """
    if not 0.0 <= keep_prob <= 1.0:
        raise DomainError("keep_prob must lie in [0, 1]")
    if msg.symbol == EveOutcome.INCONCLUSIVE or rng.random() >= keep_prob:
        return PhotonPulse(0, geometry.psi1, msg.slot_index)
    state = geometry.psi1 if msg.symbol == EveOutcome.PSI1 else geometry.psi2
    return PhotonPulse(int(eve2_source.sample(rng)), state, msg.slot_index)


def relay_timing_ok(eve1_pos_km: float, eve2_pos_km: float, group_index: float,
                    extra_latency_s: float = 0.0) -> tuple[bool, float]:
    """Whether Eve1's symbol reaches Eve2 before the honest photon would.

    Returns ``(ok, slack_s)``; slack is fiber time minus classical time minus
    any processing latency.
    """
    if eve2_pos_km < eve1_pos_km:
        raise DomainError("eve2 must not sit before eve1")
    sep = eve2_pos_km - eve1_pos_km
    slack = fiber_delay_s(sep, group_index) - classical_delay_s(sep) - extra_latency_s
    return slack >= 0.0, slack


def naive_intercept_resend(pulse: PhotonPulse, geometry: ProtocolGeometry,
                           strategy: DiscriminationStrategy, guess_rule: GuessRule,
                           rng: np.random.Generator) -> PhotonPulse:
    """Single-point measure-and-resend; always resends one photon unless the
    intercepted pulse was empty."""
    if pulse.photon_count == 0:
        return pulse
    signal = geometry.index_of(pulse.state)
    observed = None
    if strategy is DiscriminationStrategy.PROJECTIVE_RANDOM_BASIS:
        if rng.random() < 0.5:
            basis, observed = geometry.basis1, 0
        else:
            basis, observed = geometry.basis2, 1
        if sample_projective(pulse.state, basis, rng) == "b":
            # bar of B1 certifies psi2 and vice versa
            return PhotonPulse(1, geometry.signal(1 - observed), pulse.slot_index)
    else:
        symbol = discriminate(geometry, strategy, geometry.signal(signal), rng)
        if symbol != EveOutcome.INCONCLUSIVE:
            return PhotonPulse(1, geometry.signal(symbol - 1), pulse.slot_index)
    guess = _guess(guess_rule, observed, rng)
    return PhotonPulse(1, geometry.signal(guess), pulse.slot_index)


def _guess(rule: GuessRule, observed: int | None, rng) -> int:
    if rule is GuessRule.ALWAYS_PSI1:
        return 0
    if rule is GuessRule.ALWAYS_PSI2:
        return 1
    if rule is GuessRule.OBSERVED and observed is not None:
        return observed
    return int(rng.random() >= 0.5)


def beam_split_leak_fraction(mean_mu: float) -> float:
    """Probability that the tapped arm holds at least one photon."""
    if mean_mu < 0:
        raise DomainError("mean_mu must be >= 0")
    return -math.expm1(-mean_mu)


def effective_success_probability(attack: TwoPointAttack,
                                  geometry: ProtocolGeometry) -> float:
    """Rate at which Eve2 can put non-empty pulses on the line per signal
    reaching Eve1: discrimination success times Eve2's non-vacuum probability."""
    p = success_probability(geometry, attack.strategy)
    return p * (1.0 - float(attack.eve2_source.pgf(0.0)))


def two_point_keep_probability(attack: TwoPointAttack, geometry: ProtocolGeometry,
                               separation_t: float) -> tuple[float, bool]:
    """Eve2's keep probability inside a session: ``(keep, feasible)``.

    An unthrottled attack keeps everything. When throttling is requested
    below threshold Eve falls back to resending everything, which is the
    closest she can get to the honest rate.
    """
    if not attack.throttle:
        return 1.0, True
    try:
        return throttle_keep_probability(
            effective_success_probability(attack, geometry), separation_t), True
    except InfeasibleAttackError:
        return 1.0, False


# --- vectorized forms used by the session engine ------------------------------

def eve1_many(counts: np.ndarray, signals: np.ndarray, geometry: ProtocolGeometry,
              strategy: DiscriminationStrategy, rng: np.random.Generator) -> np.ndarray:
    symbols = discriminate_many(geometry, strategy, signals, rng)
    symbols[counts == 0] = EveOutcome.INCONCLUSIVE
    return symbols


def eve2_resend_many(symbols: np.ndarray, keep_prob: float, eve2_source: SourceModel,
                     rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    """Returns ``(counts, signals)`` of the regenerated pulses."""
    n = symbols.shape[0]
    kept = (symbols != EveOutcome.INCONCLUSIVE) & (rng.random(n) < keep_prob)
    counts = np.where(kept, eve2_source.sample(rng, n), 0)
    signals = np.where(symbols == EveOutcome.PSI2, 1, 0).astype(np.int8)
    return counts, signals


def naive_many(counts: np.ndarray, signals: np.ndarray, geometry: ProtocolGeometry,
               strategy: DiscriminationStrategy, guess_rule: GuessRule,
               rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Returns ``(symbols, resent_counts, resent_signals)``."""
    n = signals.shape[0]
    if strategy is DiscriminationStrategy.PROJECTIVE_RANDOM_BASIS:
        basis = (rng.random(n) >= 0.5).astype(np.int8)
        bar = rng.random(n) < geometry.bar_table()[signals, basis]
        symbols = np.where(bar, np.where(basis == 0, EveOutcome.PSI2, EveOutcome.PSI1),
                           EveOutcome.INCONCLUSIVE).astype(np.int8)
        observed = basis
    else:
        symbols = discriminate_many(geometry, strategy, signals, rng)
        observed = None
    coin = (rng.random(n) >= 0.5).astype(np.int8)
    if guess_rule is GuessRule.ALWAYS_PSI1:
        guess = np.zeros(n, dtype=np.int8)
    elif guess_rule is GuessRule.ALWAYS_PSI2:
        guess = np.ones(n, dtype=np.int8)
    elif guess_rule is GuessRule.OBSERVED and observed is not None:
        guess = observed
    else:
        guess = coin
    resent = np.where(symbols == EveOutcome.INCONCLUSIVE, guess, symbols - 1).astype(np.int8)
    occupied = counts > 0
    symbols[~occupied] = EveOutcome.INCONCLUSIVE
    return symbols, occupied.astype(np.int64), resent
