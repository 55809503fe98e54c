"""Fiber, classical relay channel, photon sources and detectors.

Sources expose their photon-number law through a probability generating
function ``pgf(z) = E[z**N]``; thinning by a channel of transmittance ``t``
maps it to ``pgf(1 - t + t*z)``, which is how closed-form rates are built
elsewhere in the package.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np

from .errors import ConfigurationError, DomainError
from .quantum import PureState

SPEED_OF_LIGHT = 299_792_458.0  # m/s

DEFAULT_ATTEN_DB_PER_KM = 0.2
DEFAULT_GROUP_INDEX = 1.5


def transmittance(length_km: float, atten_db_per_km: float) -> float:
    if length_km < 0 or atten_db_per_km < 0:
        raise DomainError("length and attenuation must be non-negative")
    return 10.0 ** (-atten_db_per_km * length_km / 10.0)


def fiber_delay_s(length_km: float, group_index: float) -> float:
    """Propagation time of a pulse through ``length_km`` of fiber."""
    if length_km < 0 or group_index < 1:
        raise DomainError("need length_km >= 0 and group_index >= 1")
    return length_km * 1000.0 * group_index / SPEED_OF_LIGHT


def classical_delay_s(path_km: float) -> float:
    """Straight-line signalling time at the vacuum speed of light."""
    if path_km < 0:
        raise DomainError("path_km must be non-negative")
    return path_km * 1000.0 / SPEED_OF_LIGHT


@dataclass(frozen=True)
class FiberSegment:
    length_km: float
    atten_db_per_km: float = DEFAULT_ATTEN_DB_PER_KM
    group_index: float = DEFAULT_GROUP_INDEX

    def __post_init__(self):
        if self.length_km < 0:
            raise ConfigurationError("fiber length must be >= 0", "fiber_length_km")
        if self.atten_db_per_km < 0:
            raise ConfigurationError("attenuation must be >= 0", "atten_db_per_km")
        if self.group_index < 1:
            raise ConfigurationError("group index must be >= 1", "group_index")

    @property
    def transmittance(self) -> float:
        return transmittance(self.length_km, self.atten_db_per_km)

    @property
    def delay_s(self) -> float:
        return fiber_delay_s(self.length_km, self.group_index)

    def sub(self, start_km: float, stop_km: float) -> FiberSegment:
        """The piece of this fiber between two positions."""
        return FiberSegment(stop_km - start_km, self.atten_db_per_km, self.group_index)


# --- sources -----------------------------------------------------------------

@dataclass(frozen=True)
class IdealSinglePhoton:
    kind = "ideal"

    @property
    def mean_mu(self) -> float:
        return 1.0

    def pgf(self, z):
        return z

    def pgf_prime(self, z):
        return np.ones_like(np.asarray(z, dtype=float))

    @property
    def multi_photon_prob(self) -> float:
        return 0.0

    def sample(self, rng: np.random.Generator, size=None):
        if size is None:
            return 1
        return np.ones(size, dtype=np.int64)


@dataclass(frozen=True)
class WeakCoherent:
    """Attenuated laser: Poissonian photon number with mean ``mean_mu``."""

    mean_mu: float
    kind = "weak_coherent"

    def __post_init__(self):
        if self.mean_mu < 0:
            raise ConfigurationError("mean photon number must be >= 0", "mu")

    def pgf(self, z):
        return np.exp(self.mean_mu * (np.asarray(z) - 1.0))

    def pgf_prime(self, z):
        return self.mean_mu * self.pgf(z)

    @property
    def multi_photon_prob(self) -> float:
        return poisson_multi_photon_prob(self.mean_mu)

    def sample(self, rng: np.random.Generator, size=None):
        return rng.poisson(self.mean_mu, size)


@dataclass(frozen=True)
class SubPoissonian:
    """Photon number on {0, 1, 2} with the given mean and ``P(N >= 2)``.

    The three probabilities are fixed by the two constraints; the source is
    rejected when they are not a distribution or the multi-photon probability
    is not below the Poissonian value at the same mean.
    """

    mean_mu: float
    multi_photon_prob: float = 0.0
    kind = "sub_poissonian"

    def __post_init__(self):
        mu, pm = self.mean_mu, self.multi_photon_prob
        if mu <= 0:
            raise ConfigurationError("sub-Poissonian source needs mean_mu > 0", "mu")
        if not pm < poisson_multi_photon_prob(mu):
            raise ConfigurationError(
                f"multi-photon probability {pm} is not below the Poissonian value "
                f"{poisson_multi_photon_prob(mu):.6g}", "multi_prob")
        p1 = mu - 2.0 * pm
        if p1 < -1e-15 or 1.0 - p1 - pm < -1e-15:
            raise ConfigurationError(
                f"no distribution on {{0,1,2}} has mean {mu} and P(N>=2) = {pm}", "multi_prob")

    def distribution(self) -> tuple[float, float, float]:
        pm = self.multi_photon_prob
        p1 = self.mean_mu - 2.0 * pm
        return max(0.0, 1.0 - p1 - pm), max(0.0, p1), pm

    def pgf(self, z):
        p0, p1, p2 = self.distribution()
        z = np.asarray(z)
        return p0 + p1 * z + p2 * z * z

    def pgf_prime(self, z):
        _, p1, p2 = self.distribution()
        return p1 + 2.0 * p2 * np.asarray(z)

    def sample(self, rng: np.random.Generator, size=None):
        p0, p1, _ = self.distribution()
        u = rng.random(size)
        n = (u >= p0).astype(np.int64) + (u >= p0 + p1)
        return int(n) if size is None else n


SourceModel = Union[IdealSinglePhoton, WeakCoherent, SubPoissonian]


def poisson_multi_photon_prob(mu: float) -> float:
    """``P(N >= 2)`` for a Poisson law of mean ``mu``."""
    return -math.expm1(-mu) - mu * math.exp(-mu)


def thinned_pgf(source: SourceModel, t: float, z):
    """pgf of the photon number left after a loss channel of transmittance ``t``."""
    return source.pgf(1.0 - t + t * np.asarray(z))


def thinned_low_counts(source: SourceModel, t: float) -> tuple[float, float]:
    """``(P(M = 0), P(M = 1))`` for the photon number ``M`` surviving ``t``."""
    return float(source.pgf(1.0 - t)), float(t * source.pgf_prime(1.0 - t))


# --- pulses and detection ----------------------------------------------------

@dataclass(frozen=True)
class PhotonPulse:
    photon_count: int
    state: PureState
    slot_index: int

    def __post_init__(self):
        if self.photon_count < 0:
            raise DomainError("photon_count must be >= 0")


@dataclass(frozen=True)
class DetectorModel:
    efficiency: float = 1.0
    dark_count_prob: float = 0.0
    number_resolving: bool = False

    def __post_init__(self):
        if not 0.0 <= self.efficiency <= 1.0:
            raise ConfigurationError("detector efficiency must lie in [0, 1]", "efficiency")
        if not 0.0 <= self.dark_count_prob < 1.0:
            raise ConfigurationError("dark count probability must lie in [0, 1)", "dark_count")


@dataclass(frozen=True)
class DetectionEvent:
    clicked: bool
    resolved_count: int | None = None

    def __post_init__(self):
        if self.resolved_count is not None and self.resolved_count >= 1 and not self.clicked:
            raise DomainError("a resolved photon implies a click")


def attenuate(pulse: PhotonPulse, t: float, rng: np.random.Generator) -> PhotonPulse:
    """Each photon survives independently with probability ``t``."""
    if not 0.0 <= t <= 1.0:
        raise DomainError("transmittance must lie in [0, 1]")
    if pulse.photon_count == 0 or t == 1.0:
        return pulse
    survivors = int(rng.binomial(pulse.photon_count, t))
    return PhotonPulse(survivors, pulse.state, pulse.slot_index)


def emit(source: SourceModel, state: PureState, slot: int,
         rng: np.random.Generator) -> PhotonPulse:
    return PhotonPulse(int(source.sample(rng)), state, slot)


def detect(detector: DetectorModel, pulse: PhotonPulse,
           rng: np.random.Generator) -> DetectionEvent:
    clicked, resolved = detect_counts(detector, np.array([pulse.photon_count]), rng)
    return DetectionEvent(bool(clicked[0]),
                          int(resolved[0]) if detector.number_resolving else None)


def detect_counts(detector: DetectorModel, counts: np.ndarray,
                  rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized detection: returns ``(clicked, registered + dark)`` arrays.

    Draw order: one binomial per pulse for registered photons, then one
    uniform per pulse for the dark count.
    """
    counts = np.asarray(counts)
    registered = rng.binomial(counts, detector.efficiency)
    dark = rng.random(counts.shape[0]) < detector.dark_count_prob
    total = registered + dark
    return total >= 1, total


def click_probability(detector: DetectorModel, source: SourceModel, t: float) -> float:
    """Probability that a pulse from ``source`` through transmittance ``t``
    makes ``detector`` click."""
    none_registered = float(thinned_pgf(source, t * detector.efficiency, 0.0))
    return 1.0 - none_registered * (1.0 - detector.dark_count_prob)
