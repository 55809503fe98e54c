"""Slot-by-slot B92 sessions, sifting and error statistics.

Alice encodes bit 0 as ``psi1`` and bit 1 as ``psi2``. Bob picks basis
``B1 = {psi1, psi1_bar}`` or ``B2 = {psi2, psi2_bar}`` at random; a click
on ``psi1_bar`` proves Alice sent ``psi2`` (bit 1) and a click on
``psi2_bar`` proves ``psi1`` (bit 0). Everything else is discarded.

The engine is columnar: each stage draws a whole array from the session
generator, so a session is a pure function of its config and seed.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Optional, Sequence

import numpy as np

from . import attacks as atk
from .errors import ConfigurationError, UnsupportedConfigurationError
from .physical import (DetectorModel, FiberSegment, IdealSinglePhoton, SourceModel,
                       detect_counts, thinned_pgf)
from .quantum import EveOutcome, make_geometry, success_probability


class BobBasis(enum.IntEnum):
    B1 = 1  # {psi1, psi1_bar}, certifies bit 1
    B2 = 2  # {psi2, psi2_bar}, certifies bit 0


@dataclass(frozen=True)
class SessionConfig:
    geometry_phi: float = math.pi / 4
    n_slots: int = 100_000
    alice_source: SourceModel = field(default_factory=IdealSinglePhoton)
    bob_detector: DetectorModel = field(default_factory=DetectorModel)
    fiber: FiberSegment = field(default_factory=lambda: FiberSegment(0.0))
    attack: atk.AttackConfig = None
    seed: int = 0

    def __post_init__(self):
        if not (0.0 < self.geometry_phi <= math.pi / 2 + 1e-15):
            raise ConfigurationError("phi must lie in (0, 90] degrees", "phi_deg")
        if int(self.n_slots) != self.n_slots or self.n_slots < 1:
            raise ConfigurationError("n_slots must be a positive integer", "n_slots")
        if not 0 <= self.seed < 2 ** 64:
            raise ConfigurationError("seed must be an unsigned 64-bit integer", "seed")
        length = self.fiber.length_km
        a = self.attack
        if isinstance(a, atk.TwoPointAttack) and a.eve2_pos_km > length:
            raise ConfigurationError(
                f"eve2_pos_km ({a.eve2_pos_km}) lies beyond the fiber end ({length})",
                "eve2_pos_km")
        if isinstance(a, atk.NaiveInterceptResend) and a.pos_km > length:
            raise ConfigurationError(
                f"naive_pos_km ({a.pos_km}) lies beyond the fiber end ({length})",
                "naive_pos_km")

    def honest(self) -> SessionConfig:
        """The same session with the attack removed."""
        return SessionConfig(self.geometry_phi, self.n_slots, self.alice_source,
                             self.bob_detector, self.fiber, None, self.seed)


@dataclass(frozen=True)
class SlotRecord:
    slot_index: int
    alice_bit: int
    eve_symbol: Optional[EveOutcome]
    bob_basis: BobBasis
    bob_clicked: bool
    bob_resolved_count: Optional[int]
    bob_conclusive_bit: Optional[int]

    def __post_init__(self):
        if self.bob_conclusive_bit is not None and not self.bob_clicked:
            raise ValueError("a conclusive bit requires a click")


@dataclass(frozen=True, eq=False)
class SessionResult:
    """Columnar session outcome.

    ``bob_bits`` holds -1 in inconclusive slots. ``eve_symbols`` is present for
    attacks that measure; ``eve_tapped`` for the beam-splitting tap.
    """

    config: SessionConfig
    alice_bits: np.ndarray
    bob_basis: np.ndarray
    bob_clicked: np.ndarray
    bob_counts: np.ndarray
    bob_bits: np.ndarray
    eve_symbols: Optional[np.ndarray] = None
    eve_tapped: Optional[np.ndarray] = None
    eve2_keep_prob: Optional[float] = None

    @property
    def n_slots(self) -> int:
        return int(self.alice_bits.shape[0])

    @cached_property
    def conclusive_mask(self) -> np.ndarray:
        return self.bob_bits >= 0

    @property
    def click_count(self) -> int:
        return int(np.count_nonzero(self.bob_clicked))

    @property
    def conclusive_count(self) -> int:
        return int(np.count_nonzero(self.conclusive_mask))

    @property
    def conclusive_rate(self) -> float:
        return self.conclusive_count / self.n_slots

    @cached_property
    def sifted_pairs(self) -> np.ndarray:
        """``(m, 2)`` array of ``(alice_bit, bob_bit)`` in slot order."""
        m = self.conclusive_mask
        return np.column_stack([self.alice_bits[m], self.bob_bits[m]])

    @property
    def qber(self) -> float:
        pairs = self.sifted_pairs
        if pairs.shape[0] == 0:
            return 0.0
        return float(np.count_nonzero(pairs[:, 0] != pairs[:, 1])) / pairs.shape[0]

    def count_histogram(self) -> np.ndarray:
        """Histogram of Bob's resolved counts, index = count."""
        return np.bincount(self.bob_counts)

    @cached_property
    def slots(self) -> list[SlotRecord]:
        resolving = self.config.bob_detector.number_resolving
        eve = self.eve_symbols
        out = []
        for i in range(self.n_slots):
            bit = int(self.bob_bits[i])
            out.append(SlotRecord(
                slot_index=i,
                alice_bit=int(self.alice_bits[i]),
                eve_symbol=None if eve is None else EveOutcome(int(eve[i])),
                bob_basis=BobBasis(int(self.bob_basis[i]) + 1),
                bob_clicked=bool(self.bob_clicked[i]),
                bob_resolved_count=int(self.bob_counts[i]) if resolving else None,
                bob_conclusive_bit=bit if bit >= 0 else None,
            ))
        return out

    def same_as(self, other: SessionResult) -> bool:
        """Bit-identical comparison of every recorded column."""
        names = ("alice_bits", "bob_basis", "bob_clicked", "bob_counts", "bob_bits",
                 "eve_symbols", "eve_tapped")
        for name in names:
            a, b = getattr(self, name), getattr(other, name)
            if (a is None) != (b is None):
                return False
            if a is not None and not np.array_equal(a, b):
                return False
        return self.eve2_keep_prob == other.eve2_keep_prob


def _transmit(counts: np.ndarray, t: float, rng: np.random.Generator) -> np.ndarray:
    if t == 1.0:
        return counts
    return rng.binomial(counts, t)


def run_session(config: SessionConfig) -> SessionResult:
    rng = np.random.default_rng(config.seed)
    geometry = make_geometry(config.geometry_phi)
    n = config.n_slots
    fiber = config.fiber
    attack = config.attack

    alice_bits = rng.integers(0, 2, n, dtype=np.int8)
    counts = np.asarray(config.alice_source.sample(rng, n), dtype=np.int64)
    signals = alice_bits
    eve_symbols = eve_tapped = None
    keep = None

    if attack is None:
        counts = _transmit(counts, fiber.transmittance, rng)
    elif isinstance(attack, atk.TwoPointAttack):
        first = fiber.sub(0.0, attack.eve1_pos_km)
        middle = fiber.sub(attack.eve1_pos_km, attack.eve2_pos_km)
        last = fiber.sub(attack.eve2_pos_km, fiber.length_km)
        counts = _transmit(counts, first.transmittance, rng)
        eve_symbols = atk.eve1_many(counts, signals, geometry, attack.strategy, rng)
        keep, _ = atk.two_point_keep_probability(attack, geometry, middle.transmittance)
        on_time, _ = atk.relay_timing_ok(attack.eve1_pos_km, attack.eve2_pos_km,
                                         fiber.group_index, attack.extra_latency_s)
        if not on_time:
            # symbols arrive after the slot has passed Eve2
            keep = 0.0
        counts, signals = atk.eve2_resend_many(eve_symbols, keep, attack.eve2_source, rng)
        counts = _transmit(counts, last.transmittance, rng)
    elif isinstance(attack, atk.NaiveInterceptResend):
        counts = _transmit(counts, fiber.sub(0.0, attack.pos_km).transmittance, rng)
        eve_symbols, counts, signals = atk.naive_many(
            counts, signals, geometry, attack.strategy, attack.guess_rule, rng)
        counts = _transmit(counts, fiber.sub(attack.pos_km, fiber.length_km).transmittance, rng)
    elif isinstance(attack, atk.BeamSplit):
        eve_tapped = rng.poisson(attack.mean_mu_after_tap, n) >= 1
        counts = _transmit(counts, fiber.transmittance, rng)
    else:
        raise ConfigurationError(f"unknown attack {attack!r}", "attack")

    bob_basis = rng.integers(0, 2, n, dtype=np.int8)  # 0 = B1, 1 = B2
    u = rng.random(n)
    p_bar = geometry.bar_table()[signals, bob_basis]
    # an empty pulse can only click through a dark count, on either port
    bar = np.where(counts > 0, u < p_bar, u < 0.5)
    clicked, resolved = detect_counts(config.bob_detector, counts, rng)
    bob_bits = np.where(clicked & bar, 1 - bob_basis, -1).astype(np.int8)

    return SessionResult(
        config=config,
        alice_bits=alice_bits,
        bob_basis=bob_basis,
        bob_clicked=clicked,
        bob_counts=resolved.astype(np.int64),
        bob_bits=bob_bits,
        eve_symbols=eve_symbols,
        eve_tapped=eve_tapped,
        eve2_keep_prob=keep,
    )


def sift(slots: Iterable[SlotRecord]) -> list[tuple[int, int]]:
    return [(s.alice_bit, s.bob_conclusive_bit) for s in slots
            if s.bob_conclusive_bit is not None]


def qber(pairs: Sequence[tuple[int, int]]) -> float:
    pairs = list(pairs)
    if not pairs:
        return 0.0
    return sum(a != b for a, b in pairs) / len(pairs)


def _bob_rate(source: SourceModel, t: float, detector: DetectorModel, bar_prob: float) -> float:
    """Per-slot conclusive probability for a pulse law ``source`` arriving
    through transmittance ``t`` in a correctly prepared signal state."""
    d = detector.dark_count_prob
    g_reg0 = float(thinned_pgf(source, t * detector.efficiency, 0.0))
    g_vac = float(thinned_pgf(source, t, 0.0))
    return bar_prob * ((1.0 - g_reg0) + (g_reg0 - g_vac) * d) + g_vac * 0.5 * d


def expected_conclusive_rate(config: SessionConfig) -> float:
    """Closed-form per-slot conclusive probability.

    Covers honest sessions with any source, the beam-splitting tap (which
    leaves Bob's line untouched) and the two-point attack fed by a
    single-photon Alice.
    """
    geometry = make_geometry(config.geometry_phi)
    bar_prob = 0.5 * math.sin(config.geometry_phi) ** 2
    det = config.bob_detector
    fiber = config.fiber
    attack = config.attack
    if attack is None or isinstance(attack, atk.BeamSplit):
        return _bob_rate(config.alice_source, fiber.transmittance, det, bar_prob)
    if isinstance(attack, atk.TwoPointAttack):
        if not isinstance(config.alice_source, IdealSinglePhoton):
            raise UnsupportedConfigurationError(
                "two-point rate is only closed-form for a single-photon Alice")
        t1 = fiber.sub(0.0, attack.eve1_pos_km).transmittance
        t12 = fiber.sub(attack.eve1_pos_km, attack.eve2_pos_km).transmittance
        t2 = fiber.sub(attack.eve2_pos_km, fiber.length_km).transmittance
        keep, _ = atk.two_point_keep_probability(attack, geometry, t12)
        if not atk.relay_timing_ok(attack.eve1_pos_km, attack.eve2_pos_km,
                                   fiber.group_index, attack.extra_latency_s)[0]:
            keep = 0.0
        q = t1 * success_probability(geometry, attack.strategy) * keep
        vacuum_rate = 0.5 * det.dark_count_prob
        return q * _bob_rate(attack.eve2_source, t2, det, bar_prob) + (1.0 - q) * vacuum_rate
    raise UnsupportedConfigurationError(f"no closed form for attack {attack.kind!r}")
