"""B92 quantum key distribution over lossy fiber and the two-point attack."""

from .analysis import (FeasibilityReport, TestVerdict, feasibility_report, min_separation_km,
                       photon_statistics_test, rate_consistency_test, required_db)
from .attacks import (BeamSplit, GuessRule, NaiveInterceptResend, RelayMessage, TwoPointAttack,
                      beam_split_leak_fraction, relay_timing_ok, throttle_keep_probability)
from .errors import (ConfigurationError, DomainError, InfeasibleAttackError,
                     UnsupportedConfigurationError)
from .physical import (DetectorModel, FiberSegment, IdealSinglePhoton, PhotonPulse,
                       SubPoissonian, WeakCoherent, transmittance)
from .protocol import (SessionConfig, SessionResult, SlotRecord, expected_conclusive_rate, qber,
                       run_session, sift)
from .quantum import (DiscriminationStrategy, EveOutcome, PureState, make_geometry,
                      success_probability)

__version__ = "0.1.0"
