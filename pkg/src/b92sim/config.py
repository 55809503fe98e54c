"""Flat ``key = value`` experiment files and their translation to sessions.

Example::

    # two-point attack at 35 km
    phi_deg = 45
    fiber_length_km = 35
    attack = two_point
    sweep_param = fiber_length_km
    sweep_values = 20, 25, 30.103, 35
    repetitions = 10
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from pathlib import Path

from . import attacks as atk
from .errors import ConfigurationError
from .physical import (DetectorModel, FiberSegment, IdealSinglePhoton, SubPoissonian,
                       WeakCoherent)
from .protocol import SessionConfig
from .quantum import DiscriminationStrategy

DEFAULTS: dict[str, str] = {
    "phi_deg": "45",
    "n_slots": "100000",
    "seed": "0",
    "fiber_length_km": "0",
    "atten_db_per_km": "0.2",
    "group_index": "1.5",
    "alice_source": "ideal",
    "alice_mu": "0.1",
    "alice_multi_prob": "0",
    "bob_efficiency": "1",
    "bob_dark_count": "0",
    "bob_number_resolving": "false",
    "attack": "none",
    "eve1_pos_km": "0",
    "eve2_pos_km": "end",
    "strategy": "projective",
    "eve2_source": "ideal",
    "eve2_mu": "1",
    "eve2_multi_prob": "0",
    "throttle": "true",
    "extra_latency_s": "0",
    "naive_pos_km": "0",
    "guess_rule": "observed",
    "tap_mu": "0.1",
    "sweep_param": "",
    "sweep_values": "",
    "repetitions": "1",
    "significance": "0.01",
    "format": "csv",
}

SWEEPABLE = ("fiber_length_km", "phi_deg", "eve1_pos_km", "eve2_pos_km", "naive_pos_km",
             "alice_mu", "eve2_mu", "tap_mu", "bob_efficiency", "bob_dark_count",
             "atten_db_per_km", "extra_latency_s", "seed")


def parse_config_text(text: str) -> dict[str, str]:
    out = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigurationError(f"line {lineno}: expected 'key = value'")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in DEFAULTS:
            raise ConfigurationError(f"line {lineno}: unknown key {key!r}", key)
        out[key] = value
    return out


def load_config(path: str | Path) -> dict[str, str]:
    return parse_config_text(Path(path).read_text())


def _float(values: dict[str, str], key: str) -> float:
    try:
        return float(values[key])
    except ValueError:
        raise ConfigurationError(f"not a number: {values[key]!r}", key) from None


def _int(values: dict[str, str], key: str) -> int:
    try:
        return int(values[key])
    except ValueError:
        raise ConfigurationError(f"not an integer: {values[key]!r}", key) from None


def _bool(values: dict[str, str], key: str) -> bool:
    v = values[key].lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise ConfigurationError(f"not a boolean: {values[key]!r}", key)


def _choice(values: dict[str, str], key: str, options):
    v = values[key].lower()
    if v not in options:
        raise ConfigurationError(f"expected one of {sorted(options)}, got {v!r}", key)
    return v


def _source(values: dict[str, str], prefix: str):
    kind = _choice(values, f"{prefix}_source", ("ideal", "weak_coherent", "sub_poissonian"))
    if kind == "ideal":
        return IdealSinglePhoton()
    mu = _float(values, f"{prefix}_mu")
    try:
        if kind == "weak_coherent":
            return WeakCoherent(mu)
        return SubPoissonian(mu, _float(values, f"{prefix}_multi_prob"))
    except ConfigurationError as exc:
        key = f"{prefix}_{exc.field}" if exc.field else f"{prefix}_source"
        raise ConfigurationError(str(exc), key) from None


# model-level field names that differ from configuration keys
_FIELD_KEYS = {"efficiency": "bob_efficiency", "dark_count": "bob_dark_count"}


def _wrap(key: str, factory):
    try:
        return factory()
    except ConfigurationError as exc:
        field = _FIELD_KEYS.get(exc.field, exc.field) or key
        raise ConfigurationError(str(exc), field) from None


def build_session(values: dict[str, str]) -> SessionConfig:
    v = {**DEFAULTS, **values}
    length = _float(v, "fiber_length_km")
    fiber = _wrap("fiber_length_km", lambda: FiberSegment(
        length, _float(v, "atten_db_per_km"), _float(v, "group_index")))
    detector = _wrap("bob_efficiency", lambda: DetectorModel(
        _float(v, "bob_efficiency"), _float(v, "bob_dark_count"),
        _bool(v, "bob_number_resolving")))
    strategy = DiscriminationStrategy(_choice(v, "strategy", ("projective", "optimal")))
    kind = _choice(v, "attack", ("none", "two_point", "naive", "beam_split"))
    attack = None
    if kind == "two_point":
        eve2 = length if v["eve2_pos_km"].lower() == "end" else _float(v, "eve2_pos_km")
        attack = _wrap("eve1_pos_km", lambda: atk.TwoPointAttack(
            _float(v, "eve1_pos_km"), eve2, strategy, _source(v, "eve2"),
            _bool(v, "throttle"), _float(v, "extra_latency_s")))
    elif kind == "naive":
        rule = atk.GuessRule(_choice(v, "guess_rule", [r.value for r in atk.GuessRule]))
        attack = _wrap("naive_pos_km", lambda: atk.NaiveInterceptResend(
            _float(v, "naive_pos_km"), strategy, rule))
    elif kind == "beam_split":
        attack = _wrap("tap_mu", lambda: atk.BeamSplit(_float(v, "tap_mu")))
    return _wrap("phi_deg", lambda: SessionConfig(
        geometry_phi=math.radians(_float(v, "phi_deg")),
        n_slots=_int(v, "n_slots"),
        alice_source=_source(v, "alice"),
        bob_detector=detector,
        fiber=fiber,
        attack=attack,
        seed=_int(v, "seed"),
    ))


@dataclass(frozen=True)
class ExperimentSpec:
    """Parsed experiment: raw values plus sweep and output settings."""

    values: dict
    sweep_param: str | None
    sweep_values: tuple[float, ...]
    repetitions: int
    output_format: str
    significance: float

    @property
    def session(self) -> SessionConfig:
        return build_session(self.values)

    def with_value(self, key: str, value) -> ExperimentSpec:
        return replace(self, values={**self.values, key: str(value)})


def build_spec(values: dict[str, str]) -> ExperimentSpec:
    v = {**DEFAULTS, **values}
    param = v["sweep_param"].strip() or None
    if param is not None and param not in SWEEPABLE:
        raise ConfigurationError(
            f"unknown sweep parameter {param!r}; choose from {', '.join(SWEEPABLE)}",
            "sweep_param")
    raw = [s.strip() for s in v["sweep_values"].split(",") if s.strip()]
    try:
        sweep_values = tuple(float(s) for s in raw)
    except ValueError:
        raise ConfigurationError(f"not a number list: {v['sweep_values']!r}",
                                 "sweep_values") from None
    reps = _int(v, "repetitions")
    if reps < 1:
        raise ConfigurationError("must be >= 1", "repetitions")
    fmt = _choice(v, "format", ("csv", "json"))
    significance = _float(v, "significance")
    if not 0.0 < significance < 1.0:
        raise ConfigurationError("must lie in (0, 1)", "significance")
    spec = ExperimentSpec(v, param, sweep_values, reps, fmt, significance)
    spec.session  # validate eagerly
    return spec
