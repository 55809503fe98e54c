"""Attack feasibility and statistical detectability checks."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import norm

from . import attacks as atk
from .errors import DomainError, InfeasibleAttackError, UnsupportedConfigurationError
from .physical import IdealSinglePhoton, SourceModel, thinned_low_counts
from .protocol import SessionConfig
from .quantum import make_geometry, success_probability

DEFAULT_SIGNIFICANCE = 0.01


def required_db(p_succ: float) -> float:
    """Loss Eve needs between her two stations to hide the inconclusive slots."""
    if not 0.0 < p_succ <= 1.0:
        raise DomainError("p_succ must lie in (0, 1]")
    return -10.0 * math.log10(p_succ)


def min_separation_km(p_succ: float, atten_db_per_km: float) -> float:
    if atten_db_per_km <= 0:
        raise DomainError("attenuation must be positive")
    return required_db(p_succ) / atten_db_per_km


@dataclass
class FeasibilityReport:
    p_succ: float
    required_db: float
    min_separation_km: float
    configured_separation_km: float
    feasible: bool
    throttle_keep: float | None
    timing_slack_s: float
    notes: list[str] = field(default_factory=list)

    def as_dict(self) -> dict:
        return {
            "p_succ": self.p_succ,
            "required_db": self.required_db,
            "min_separation_km": self.min_separation_km,
            "configured_separation_km": self.configured_separation_km,
            "feasible": self.feasible,
            "throttle_keep": self.throttle_keep,
            "timing_slack_s": self.timing_slack_s,
            "notes": list(self.notes),
        }


def feasibility_report(config: SessionConfig) -> FeasibilityReport:
    attack = config.attack
    if not isinstance(attack, atk.TwoPointAttack):
        raise UnsupportedConfigurationError("feasibility report needs a two-point attack")
    geometry = make_geometry(config.geometry_phi)
    fiber = config.fiber
    notes = []

    p_ideal = success_probability(geometry, attack.strategy)
    p_succ = atk.effective_success_probability(attack, geometry)
    if p_succ < p_ideal:
        notes.append(f"Eve2 source emits vacuum with probability "
                     f"{1 - p_succ / p_ideal:.6g}; budget reduced from {p_ideal:.6g}")
    if p_succ <= 0.0:
        notes.append("Eve2 never emits a photon; no separation suffices")
        db, min_sep = math.inf, math.inf
    else:
        db = required_db(p_succ)
        min_sep = min_separation_km(p_succ, fiber.atten_db_per_km) if fiber.atten_db_per_km > 0 \
            else (0.0 if db == 0.0 else math.inf)

    sep = attack.separation_km
    ok, slack = atk.relay_timing_ok(attack.eve1_pos_km, attack.eve2_pos_km,
                                    fiber.group_index, attack.extra_latency_s)
    if not ok:
        notes.append(f"classical relay is late by {-slack:.6g} s")

    t_sep = fiber.sub(attack.eve1_pos_km, attack.eve2_pos_km).transmittance
    keep = None
    if p_succ > 0.0:
        try:
            keep = atk.throttle_keep_probability(p_succ, t_sep)
        except InfeasibleAttackError:
            notes.append(f"fiber between the Eves transmits {t_sep:.6g} > {p_succ:.6g}; "
                         "Bob would see a rate deficit")
    # edge segments scale the honest and attacked rates alike, so they cancel
    if attack.eve1_pos_km > 0 or attack.eve2_pos_km < fiber.length_km:
        notes.append("Alice->Eve1 and Eve2->Bob losses affect both rates equally; "
                     "threshold unchanged")
    if not isinstance(config.alice_source, IdealSinglePhoton):
        notes.append("Alice source is not single-photon: Eve1 sees multi-photon pulses "
                     "and rate matching is approximate")
    det = config.bob_detector
    if det.efficiency < 1.0 or det.dark_count_prob > 0.0:
        notes.append("non-ideal Bob detector: matching holds for single-photon resends only")
    if not isinstance(attack.eve2_source, IdealSinglePhoton) and det.number_resolving:
        notes.append("Bob resolves photon number; Eve2 source statistics are exposed")

    feasible = bool(ok and keep is not None and sep >= min_sep * (1.0 - 1e-9))
    if not feasible:
        keep = None
    return FeasibilityReport(p_succ, db, min_sep, sep, feasible, keep, slack, notes)


@dataclass(frozen=True)
class TestVerdict:
    statistic: float
    p_value: float
    rejected: bool
    significance: float

    __test__ = False  # not a pytest class


def rate_consistency_test(observed_clicks: int, n_slots: int, expected_rate: float,
                          significance: float = DEFAULT_SIGNIFICANCE) -> TestVerdict:
    """Two-sided binomial test of a count against ``n_slots * expected_rate``
    using the normal approximation."""
    if not 0.0 < expected_rate < 1.0:
        raise DomainError(f"expected_rate must lie in (0, 1), got {expected_rate!r}")
    if n_slots < 1:
        raise DomainError("n_slots must be >= 1")
    mean = n_slots * expected_rate
    z = (observed_clicks - mean) / math.sqrt(mean * (1.0 - expected_rate))
    p_value = float(min(1.0, 2.0 * norm.sf(abs(z))))
    return TestVerdict(z, p_value, p_value < significance, significance)


def expected_multi_photon_probability(source: SourceModel, transmittance: float = 1.0,
                                      efficiency: float = 1.0,
                                      dark_count_prob: float = 0.0) -> float:
    """``P(resolved count >= 2)`` at a number-resolving detector."""
    p0, p1 = thinned_low_counts(source, transmittance * efficiency)
    d = dark_count_prob
    p = 1.0 - p0 * (1.0 - d) - (p1 * (1.0 - d) + p0 * d)
    return min(max(p, 0.0), 1.0)


def photon_statistics_test(count_histogram, expected_source: SourceModel, n_slots: int,
                           significance: float = DEFAULT_SIGNIFICANCE, *,
                           transmittance: float = 1.0, efficiency: float = 1.0,
                           dark_count_prob: float = 0.0) -> TestVerdict:
    """Compare the observed multi-photon fraction with the expected source.

    ``count_histogram[k]`` is the number of slots in which Bob resolved ``k``
    photons. When the expected multi-photon probability is exactly zero a
    single multi-photon slot is conclusive evidence (p-value 0).
    """
    hist = np.asarray(count_histogram, dtype=np.int64)
    if hist.sum() != n_slots:
        raise DomainError(f"histogram totals {int(hist.sum())}, expected {n_slots}")
    observed = int(hist[2:].sum())
    p = expected_multi_photon_probability(expected_source, transmittance, efficiency,
                                          dark_count_prob)
    if p <= 0.0:
        rejected = observed > 0
        return TestVerdict(float(observed), 0.0 if rejected else 1.0, rejected, significance)
    if p >= 1.0:
        rejected = observed < n_slots
        return TestVerdict(float(observed), 0.0 if rejected else 1.0, rejected, significance)
    return rate_consistency_test(observed, n_slots, p, significance)
