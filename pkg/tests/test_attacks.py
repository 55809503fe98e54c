import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from b92sim import attacks as atk
from b92sim.errors import ConfigurationError, DomainError, InfeasibleAttackError
from b92sim.physical import (FiberSegment, IdealSinglePhoton, PhotonPulse, SubPoissonian,
                             WeakCoherent, transmittance)
from b92sim.protocol import SessionConfig, run_session
from b92sim.quantum import DiscriminationStrategy, EveOutcome, make_geometry

from oracles import naive_attack_enumeration, within_sigma

PROJ = DiscriminationStrategy.PROJECTIVE_RANDOM_BASIS
OPT = DiscriminationStrategy.OPTIMAL_UNAMBIGUOUS
G = make_geometry(math.pi / 4)


def test_eve1_vacuum_gives_zero():
    msg = atk.eve1_process(PhotonPulse(0, G.psi1, 4), G, PROJ, np.random.default_rng(0))
    assert msg == atk.RelayMessage(4, EveOutcome.INCONCLUSIVE)


def test_eve1_never_misidentifies_psi1():
    rng = np.random.default_rng(1)
    symbols = {atk.eve1_process(PhotonPulse(1, G.psi1, i), G, PROJ, rng).symbol
               for i in range(5000)}
    assert symbols == {EveOutcome.INCONCLUSIVE, EveOutcome.PSI1}


def test_eve1_conclusive_fraction():
    rng = np.random.default_rng(2)
    n = 100_000
    bits = rng.integers(0, 2, n)
    hits = sum(atk.eve1_process(PhotonPulse(1, G.signal(b), i), G, PROJ, rng).symbol != 0
               for i, b in enumerate(bits))
    assert abs(hits / n - 0.25) <= 0.01


def test_relay_message_alphabet():
    with pytest.raises(DomainError):
        atk.RelayMessage(0, 3)


def test_throttle_examples():
    assert atk.throttle_keep_probability(0.25, 0.25) == 1.0
    t35 = transmittance(35, 0.2)
    assert t35 == pytest.approx(0.1995, abs=1e-4)
    assert atk.throttle_keep_probability(0.25, t35) == pytest.approx(0.798, abs=1e-3)
    with pytest.raises(InfeasibleAttackError):
        atk.throttle_keep_probability(0.25, transmittance(20, 0.2))


def test_eve2_resend_examples():
    rng = np.random.default_rng(3)
    src = IdealSinglePhoton()
    assert all(atk.eve2_resend(atk.RelayMessage(i, EveOutcome.INCONCLUSIVE), 1.0, G, src, rng)
               .photon_count == 0 for i in range(100))
    out = atk.eve2_resend(atk.RelayMessage(0, EveOutcome.PSI1), 1.0, G, src, rng)
    assert out.photon_count == 1 and out.state == G.psi1
    n = 100_000
    hits = sum(atk.eve2_resend(atk.RelayMessage(i, EveOutcome.PSI2), 0.798, G, src, rng)
               .photon_count > 0 for i in range(n))
    assert abs(hits / n - 0.798) <= 0.01


def test_eve2_resend_many_matches_law():
    rng = np.random.default_rng(4)
    symbols = np.full(100_000, EveOutcome.PSI2, dtype=np.int8)
    counts, signals = atk.eve2_resend_many(symbols, 0.798, IdealSinglePhoton(), rng)
    assert within_sigma(int(np.count_nonzero(counts)), 100_000, 0.798)
    assert np.all(signals == 1)


def test_relay_timing_examples():
    ok, slack = atk.relay_timing_ok(0, 30, 1.5, 0.0)
    assert ok and slack == pytest.approx(5.0e-5, abs=1e-7)
    assert atk.relay_timing_ok(10, 10, 1.5) == (True, 0.0)
    ok, slack = atk.relay_timing_ok(0, 50, 1.0, 0.0)
    assert ok and slack == 0.0
    assert not atk.relay_timing_ok(0, 30, 1.5, 1e-4)[0]


@given(st.floats(0, 200), st.floats(0, 200), st.floats(1, 2))
def test_relay_slack_non_negative(a, b, n):
    lo, hi = sorted((a, b))
    assert atk.relay_timing_ok(lo, hi, n, 0.0)[1] >= 0


def test_two_point_ordering_error():
    with pytest.raises(ConfigurationError, match="ordering"):
        atk.TwoPointAttack(10, 5)


def test_naive_conclusive_resends_truth():
    rng = np.random.default_rng(5)
    p = PhotonPulse(1, G.psi1, 0)
    # guessing psi2 on every inconclusive result: psi1 only comes back when identified
    outs = [atk.naive_intercept_resend(p, G, PROJ, atk.GuessRule.ALWAYS_PSI2, rng)
            for _ in range(20_000)]
    identified = sum(o.state == G.psi1 for o in outs)
    assert within_sigma(identified, 20_000, 0.25)
    # guessing psi1 can never produce a wrong state for a psi1 input
    assert all(atk.naive_intercept_resend(p, G, PROJ, atk.GuessRule.ALWAYS_PSI1, rng).state
               == G.psi1 for _ in range(2000))


def test_naive_vacuum_passthrough():
    p = PhotonPulse(0, G.psi2, 1)
    assert atk.naive_intercept_resend(p, G, OPT, atk.GuessRule.OBSERVED,
                                      np.random.default_rng(0)) == p


@pytest.mark.parametrize("rule", ["observed", "psi1", "psi2", "random"])
def test_naive_scalar_matches_enumeration(rule):
    """Scalar measure-resend followed by an ideal Bob reproduces the oracle."""
    oracle = naive_attack_enumeration(math.pi / 4, rule)
    rng = np.random.default_rng(6)
    n = 100_000
    conclusive = errors = 0
    bar_table = G.bar_table()
    for _ in range(n):
        a = int(rng.integers(0, 2))
        out = atk.naive_intercept_resend(PhotonPulse(1, G.signal(a), 0), G, PROJ,
                                         atk.GuessRule(rule), rng)
        r = G.index_of(out.state)
        b = int(rng.integers(0, 2))
        if rng.random() < bar_table[r, b]:
            conclusive += 1
            errors += (1 - b) != a
    assert within_sigma(conclusive, n, oracle["conclusive"])
    assert within_sigma(errors, conclusive, oracle["qber"])


def test_naive_always_psi1_lowers_bit_one_rate():
    honest = naive_attack_enumeration(math.pi / 4, "observed")
    skewed = naive_attack_enumeration(math.pi / 4, "psi1")
    # honest bit-1 rate is half the conclusive rate 1/4
    assert skewed["bit_one"] < 0.125 <= honest["bit_one"] + 1e-12
    cfg = SessionConfig(n_slots=100_000, seed=3,
                        attack=atk.NaiveInterceptResend(0, PROJ, atk.GuessRule.ALWAYS_PSI1))
    res = run_session(cfg)
    assert within_sigma(int(np.count_nonzero(res.bob_bits == 1)), 100_000, skewed["bit_one"])


def test_beam_split_leak_examples():
    assert atk.beam_split_leak_fraction(0) == 0
    assert atk.beam_split_leak_fraction(0.1) == pytest.approx(0.09516, abs=1e-5)
    assert atk.beam_split_leak_fraction(0.1) < 0.10
    assert atk.beam_split_leak_fraction(1.0) == pytest.approx(1 - 1 / math.e)


@given(st.floats(0, 50), st.floats(0, 50))
def test_beam_split_monotone_and_bounded(a, b):
    lo, hi = sorted((a, b))
    assert atk.beam_split_leak_fraction(lo) <= atk.beam_split_leak_fraction(hi)
    assert atk.beam_split_leak_fraction(hi) <= hi


def test_beam_split_session_tap_fraction():
    cfg = SessionConfig(n_slots=100_000, seed=4, alice_source=WeakCoherent(0.5),
                        attack=atk.BeamSplit(0.1))
    res = run_session(cfg)
    assert within_sigma(int(res.eve_tapped.sum()), 100_000, atk.beam_split_leak_fraction(0.1))
    assert res.qber == 0.0


def test_effective_success_counts_eve2_vacuum():
    a = atk.TwoPointAttack(0, 35, eve2_source=WeakCoherent(1.0))
    assert atk.effective_success_probability(a, G) == pytest.approx(0.25 * (1 - math.exp(-1)))
    b = atk.TwoPointAttack(0, 35, eve2_source=SubPoissonian(1.0, 0.0))
    assert atk.effective_success_probability(b, G) == pytest.approx(0.25)


def test_zero_error_relay_in_sessions():
    for strategy in (PROJ, OPT):
        cfg = SessionConfig(n_slots=50_000, seed=8, fiber=FiberSegment(40),
                            attack=atk.TwoPointAttack(0, 40, strategy))
        res = run_session(cfg)
        sym = res.eve_symbols
        assert not np.any((sym == EveOutcome.PSI1) & (res.alice_bits == 1))
        assert not np.any((sym == EveOutcome.PSI2) & (res.alice_bits == 0))
        assert res.qber == 0.0


def test_late_relay_silences_eve2():
    cfg = SessionConfig(n_slots=10_000, fiber=FiberSegment(35),
                        attack=atk.TwoPointAttack(0, 35, extra_latency_s=1e-3))
    res = run_session(cfg)
    assert res.eve2_keep_prob == 0.0 and res.click_count == 0


def test_throttled_click_rate_matches_honest():
    """Clicks on either of Bob's ports, not just conclusive ones, keep the honest law."""
    n, runs = 100_000, 40
    honest_t = transmittance(35, 0.2)
    clicks = sum(run_session(SessionConfig(n_slots=n, seed=s, fiber=FiberSegment(35),
                                           attack=atk.TwoPointAttack(0, 35))).click_count
                 for s in range(runs))
    assert within_sigma(clicks, n * runs, honest_t)
