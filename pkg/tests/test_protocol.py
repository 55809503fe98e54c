import math

import numpy as np
import pytest

from b92sim import attacks as atk
from b92sim.errors import ConfigurationError, UnsupportedConfigurationError
from b92sim.physical import DetectorModel, FiberSegment, SubPoissonian, WeakCoherent
from b92sim.protocol import (BobBasis, SessionConfig, SlotRecord, expected_conclusive_rate,
                             qber, run_session, sift)

from oracles import honest_enumeration, within_sigma


def test_honest_ideal_lossless():
    res = run_session(SessionConfig(n_slots=100_000, seed=1))
    assert abs(res.conclusive_rate - 0.25) <= 0.01
    assert res.qber == 0.0
    assert res.click_count == 100_000


def test_honest_30km():
    res = run_session(SessionConfig(n_slots=100_000, seed=2, fiber=FiberSegment(30)))
    assert abs(res.conclusive_rate - 0.25 * 0.2512) <= 0.005


def test_determinism():
    cfg = SessionConfig(n_slots=1, seed=99)
    assert run_session(cfg).same_as(run_session(cfg))
    cfg = SessionConfig(n_slots=20_000, seed=5, fiber=FiberSegment(35),
                        attack=atk.TwoPointAttack(0, 35))
    a, b = run_session(cfg), run_session(cfg)
    assert a.same_as(b) and a.slots == b.slots
    other = run_session(SessionConfig(n_slots=20_000, seed=6, fiber=FiberSegment(35),
                                      attack=atk.TwoPointAttack(0, 35)))
    assert not a.same_as(other)


def test_config_validation():
    with pytest.raises(ConfigurationError):
        SessionConfig(n_slots=0)
    with pytest.raises(ConfigurationError) as exc:
        SessionConfig(fiber=FiberSegment(30), attack=atk.TwoPointAttack(0, 40))
    assert exc.value.field == "eve2_pos_km"
    with pytest.raises(ConfigurationError):
        SessionConfig(fiber=FiberSegment(30), attack=atk.NaiveInterceptResend(31))


def _slot(i, bit, basis, clicked, conclusive):
    return SlotRecord(i, bit, None, basis, clicked, None, conclusive)


def test_sift_examples():
    assert sift([]) == []
    assert sift([_slot(0, 0, BobBasis.B2, True, 0)]) == [(0, 0)]
    slots = [_slot(0, 1, BobBasis.B1, True, 1), _slot(1, 0, BobBasis.B1, True, None),
             _slot(2, 0, BobBasis.B2, False, None), _slot(3, 0, BobBasis.B2, True, 0)]
    assert sift(slots) == [(1, 1), (0, 0)]


def test_slot_record_invariant():
    with pytest.raises(ValueError):
        _slot(0, 0, BobBasis.B2, False, 0)


def test_qber_examples():
    assert qber([]) == 0
    assert qber([(0, 0), (1, 1)]) == 0
    assert qber([(0, 1), (1, 1), (0, 0), (1, 0)]) == 0.5


def test_slots_agree_with_columns():
    res = run_session(SessionConfig(n_slots=2000, seed=3, fiber=FiberSegment(10),
                                    bob_detector=DetectorModel(0.8, 0.01, True)))
    pairs = sift(res.slots)
    assert pairs == [tuple(map(int, p)) for p in res.sifted_pairs]
    assert qber(pairs) == res.qber
    assert len(pairs) == res.conclusive_count
    assert all(s.bob_resolved_count is not None for s in res.slots)


def test_bob_basis_certifies_bits():
    res = run_session(SessionConfig(n_slots=10_000, seed=4))
    m = res.bob_bits >= 0
    # B1 (index 0) certifies bit 1, B2 certifies bit 0
    assert np.all(res.bob_bits[m] == 1 - res.bob_basis[m])


def test_expected_rate_examples():
    assert expected_conclusive_rate(SessionConfig()) == pytest.approx(0.25)
    assert expected_conclusive_rate(SessionConfig(fiber=FiberSegment(30))) == \
        pytest.approx(0.25 * 10 ** -0.6)
    assert expected_conclusive_rate(
        SessionConfig(bob_detector=DetectorModel(0.0, 0.0))) == 0.0


@pytest.mark.parametrize("phi", [math.pi / 6, math.pi / 4, math.pi / 3, math.pi / 2])
def test_expected_rate_matches_enumeration(phi):
    conclusive, errors = honest_enumeration(phi)
    assert expected_conclusive_rate(SessionConfig(geometry_phi=phi)) == \
        pytest.approx(conclusive, abs=1e-12)
    assert errors < 1e-30


def test_throttled_attack_rate_equals_honest():
    for sep in (30.103, 35, 50):
        cfg = SessionConfig(fiber=FiberSegment(sep + 7), bob_detector=DetectorModel(0.7, 1e-3),
                            attack=atk.TwoPointAttack(3, sep + 3))
        assert expected_conclusive_rate(cfg) == pytest.approx(
            expected_conclusive_rate(cfg.honest()), rel=1e-9)


def test_expected_rate_unsupported():
    cfg = SessionConfig(attack=atk.NaiveInterceptResend(0))
    with pytest.raises(UnsupportedConfigurationError):
        expected_conclusive_rate(cfg)
    cfg = SessionConfig(alice_source=WeakCoherent(0.1), fiber=FiberSegment(35),
                        attack=atk.TwoPointAttack(0, 35))
    with pytest.raises(UnsupportedConfigurationError):
        expected_conclusive_rate(cfg)


@pytest.mark.parametrize("source", [WeakCoherent(0.3), SubPoissonian(0.6, 0.05)])
@pytest.mark.parametrize("detector", [DetectorModel(0.6, 0.0), DetectorModel(0.6, 0.01)])
def test_expected_rate_general_sources(source, detector):
    cfg = SessionConfig(n_slots=100_000, seed=12, alice_source=source, bob_detector=detector,
                        fiber=FiberSegment(10))
    res = run_session(cfg)
    assert within_sigma(res.conclusive_count, cfg.n_slots, expected_conclusive_rate(cfg))


def test_dark_counts_induce_errors():
    cfg = SessionConfig(n_slots=100_000, seed=13, fiber=FiberSegment(50),
                        bob_detector=DetectorModel(1.0, 0.01))
    res = run_session(cfg)
    assert res.qber > 0
    assert within_sigma(res.conclusive_count, cfg.n_slots, expected_conclusive_rate(cfg))


def test_attack_session_matches_closed_form():
    det = DetectorModel(0.8, 0.002)
    for keep in (True, False):
        cfg = SessionConfig(n_slots=100_000, seed=14, fiber=FiberSegment(45),
                            bob_detector=det,
                            attack=atk.TwoPointAttack(2, 40, throttle=keep,
                                                      eve2_source=WeakCoherent(0.8)))
        res = run_session(cfg)
        assert within_sigma(res.conclusive_count, cfg.n_slots, expected_conclusive_rate(cfg))


def test_sifted_bits_unbiased():
    res = run_session(SessionConfig(n_slots=100_000, seed=15))
    pairs = res.sifted_pairs
    assert within_sigma(int(pairs[:, 0].sum()), pairs.shape[0], 0.5)


def test_count_histogram_totals():
    res = run_session(SessionConfig(n_slots=1000, seed=1, alice_source=WeakCoherent(2.0),
                                    bob_detector=DetectorModel(number_resolving=True)))
    assert res.count_histogram().sum() == 1000
