"""Monte Carlo experiment runner, analytic references, and report emission.

Each trial owns its own register, keys, message, and strategy instance, all
derived deterministically from (base seed, trial index), so any report can be
regenerated bit-for-bit from its embedded configuration.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
from dataclasses import dataclass, field
from math import sqrt
from random import Random

from . import __version__
from .adversary import (
    impersonate_alice,
    impersonate_bob,
    intercept_resend,
    modify_single,
    no_attack,
    reflect_all,
)
from .codec import HASH_NAME, bits_to_hex, hex_to_bits, random_bits
from .keys import KeyMaterial, gen_keys
from .protocol import DetectionCause, Variant, run_session

WILSON_Z_99 = 2.5758293035489004


class ConfigError(ValueError):
    """Invalid experiment or session configuration."""


ATTACK_NAMES = (
    "no_attack",
    "impersonate_alice",
    "impersonate_bob",
    "intercept_resend",
    "modify_single",
    "reflect_all",
)

ATTACK_PARAM_HELP = {
    "no_attack": {},
    "impersonate_alice": {},
    "impersonate_bob": {"mode": "idealized (default) or concrete"},
    "intercept_resend": {},
    "modify_single": {
        "target": "position index, or one of random / s / c / s_msg "
        "(resolved against the trial's key layout)"
    },
    "reflect_all": {},
}


@dataclass
class ExperimentConfig:
    variant: Variant
    attack: str
    n: int
    trials: int
    seed: int
    attack_params: dict = field(default_factory=dict)
    message: str | None = None  # fixed message as hex; None = random per trial
    output_format: str = "json"

    def validate(self) -> None:
        if self.n % 8 != 0 or self.n < 16:
            raise ConfigError(f"n must be a multiple of 8 and at least 16, got {self.n}")
        if self.trials < 1:
            raise ConfigError("trials must be at least 1")
        if self.attack not in ATTACK_NAMES:
            raise ConfigError(f"unknown attack {self.attack!r}")
        if self.attack == "reflect_all" and self.variant is not Variant.MEASURE_RESEND:
            raise ConfigError("reflect_all applies only to the measure-resend variant")
        if self.output_format not in ("json", "csv"):
            raise ConfigError(f"unknown output format {self.output_format!r}")
        mode = self.attack_params.get("mode", "idealized")
        if self.attack == "impersonate_bob" and mode not in ("idealized", "concrete"):
            raise ConfigError(f"unknown impersonate_bob mode {mode!r}")
        if self.attack == "modify_single":
            target = self.attack_params.get("target", "random")
            if not isinstance(target, int) and target not in ("random", "s", "c", "s_msg"):
                raise ConfigError(f"bad modify_single target {target!r}")
        if self.message is not None:
            try:
                hex_to_bits(self.message, self.n // 8)
            except ValueError as exc:
                raise ConfigError(str(exc)) from None


@dataclass
class DetectionStats:
    trials: int
    cause_counts: dict
    bob_accept_rate: float
    alice_accept_rate: float
    security_event_rate: float
    detection_rate: float
    wilson_99: tuple[float, float]
    analytic: float | None
    analytic_formula: str | None
    config: ExperimentConfig


def wilson_interval(successes: int, trials: int, z: float = WILSON_Z_99):
    """Wilson score interval for a binomial proportion; stays well-behaved
    for proportions at or near 0 and 1."""
    if trials < 1:
        raise ValueError("trials must be positive")
    phat = successes / trials
    denom = 1.0 + z * z / trials
    center = (phat + z * z / (2 * trials)) / denom
    half = z * sqrt(phat * (1.0 - phat) / trials + z * z / (4.0 * trials * trials)) / denom
    # the boundary cases are exactly 0 and 1 analytically; avoid rounding junk
    low = 0.0 if successes == 0 else max(0.0, center - half)
    high = 1.0 if successes == trials else min(1.0, center + half)
    return low, high


def analytic_detection(attack: str, variant: Variant, n: int, params: dict | None = None):
    """Closed-form detection probability where one exists, else (None, None).

    Returns (probability, formula tag).
    """
    params = params or {}
    if attack not in ATTACK_NAMES:
        raise ConfigError(f"unknown attack {attack!r}")
    if attack == "no_attack":
        if variant is Variant.RANDOMIZATION:
            return 0.0, "honest runs are never rejected"
        return 0.5 ** (n / 4), "reflect-flag false positive (1/2)^(n/4)"
    if attack == "intercept_resend" and variant is Variant.RANDOMIZATION:
        return 1.0 - 0.5 ** (n / 2), "1-(1/2)^(n/2)"
    if attack == "impersonate_bob" and params.get("mode", "idealized") == "idealized":
        if variant is Variant.RANDOMIZATION:
            return 1.0 - 0.625 ** (n / 2), "1-(5/8)^(n/2)"
    if attack == "reflect_all" and variant is Variant.MEASURE_RESEND:
        return 1.0, "all-reflected message pairs always match their initial states"
    if attack == "modify_single":
        target = params.get("target")
        if target == "c":
            return 1.0, "Phi+ <-> Psi- flip is orthogonal to the recorded state"
        if target == "s_msg":
            return 1.0 - 0.5 ** (n / 8), "1-2^(-n/8) checksum mismatch"
    return None, None


def _resolve_target(kind, k1, rng: Random) -> int:
    """Turn a symbolic modify_single target into a position index for one
    trial's key layout. Resolution happens harness-side; the strategy itself
    never sees key material."""
    if isinstance(kind, int):
        return kind
    n = len(k1)
    if kind == "random":
        return rng.randrange(n)
    if kind == "c":
        positions = [i for i, b in enumerate(k1) if b == 1]
        return rng.choice(positions)
    s_positions = [i for i, b in enumerate(k1) if b == 0]
    if kind == "s":
        return rng.choice(s_positions)
    if kind == "s_msg":
        # message-half block bits sit in the first half of the message stream
        return rng.choice(s_positions[: n // 4])
    raise ConfigError(f"bad modify_single target {kind!r}")


def build_attack(name: str, params: dict, rng: Random, keys: KeyMaterial):
    if name == "no_attack":
        return no_attack()
    if name == "impersonate_alice":
        return impersonate_alice(rng)
    if name == "impersonate_bob":
        return impersonate_bob(params.get("mode", "idealized"), rng)
    if name == "intercept_resend":
        return intercept_resend()
    if name == "modify_single":
        target = _resolve_target(params.get("target", "random"), keys.k1, rng)
        return modify_single(target)
    if name == "reflect_all":
        return reflect_all()
    raise ConfigError(f"unknown attack {name!r}")


def trial_seeds(base_seed: int, index: int) -> tuple[int, int]:
    """Distinct, reproducible (trial rng seed, register seed) per trial."""
    digest = hashlib.sha256(f"{base_seed}:{index}".encode()).digest()
    return int.from_bytes(digest[:8], "big"), int.from_bytes(digest[8:16], "big")


def run_trial(config: ExperimentConfig, index: int):
    rng_seed, register_seed = trial_seeds(config.seed, index)
    rng = Random(rng_seed)
    keys = gen_keys(config.n, rng, include_k2=config.variant is Variant.RANDOMIZATION)
    if config.message is not None:
        m = hex_to_bits(config.message, config.n // 8)
    else:
        m = random_bits(config.n // 8, rng)
    attack = build_attack(config.attack, config.attack_params, rng, keys)
    return run_session(config.variant, m, keys, attack, register_seed)


def run_experiment(config: ExperimentConfig) -> DetectionStats:
    """Run the configured number of independent sessions and aggregate.

    Aggregation is pure counting, so trial order is irrelevant.
    """
    config.validate()
    counts = {cause.value: 0 for cause in DetectionCause}
    bob_accepts = alice_accepts = security_events = detections = 0
    for i in range(config.trials):
        outcome = run_trial(config, i)
        counts[outcome.detection_cause.value] += 1
        if outcome.bob_accepts:
            bob_accepts += 1
        if outcome.alice_accepts:
            alice_accepts += 1
        if outcome.security_event:
            security_events += 1
        if outcome.detected:
            detections += 1

    t = config.trials
    analytic, formula = analytic_detection(
        config.attack, config.variant, config.n, config.attack_params
    )
    return DetectionStats(
        trials=t,
        cause_counts=counts,
        bob_accept_rate=bob_accepts / t,
        alice_accept_rate=alice_accepts / t,
        security_event_rate=security_events / t,
        detection_rate=detections / t,
        wilson_99=wilson_interval(detections, t),
        analytic=analytic,
        analytic_formula=formula,
        config=config,
    )


# -- reporting ---------------------------------------------------------------

CSV_COLUMNS = (
    "variant",
    "attack",
    "attack_params",
    "n",
    "trials",
    "seed",
    "message",
    "count_none",
    "count_hash_mismatch",
    "count_bell_check_failed",
    "count_reflect_flag",
    "bob_accept_rate",
    "alice_accept_rate",
    "security_event_rate",
    "detection_rate",
    "wilson_99_low",
    "wilson_99_high",
    "analytic",
    "analytic_formula",
    "hash_algorithm",
    "hash_truncate_bits",
    "version",
)


def report_dict(stats: DetectionStats) -> dict:
    cfg = stats.config
    return {
        "artifact": {"name": "sqdc", "version": __version__},
        "config": {
            "variant": cfg.variant.value,
            "attack": cfg.attack,
            "attack_params": dict(cfg.attack_params),
            "n": cfg.n,
            "trials": cfg.trials,
            "seed": cfg.seed,
            "message": cfg.message,
        },
        "hash": {"algorithm": HASH_NAME, "truncate_bits": cfg.n // 8},
        "results": {
            "trials": stats.trials,
            "cause_counts": dict(stats.cause_counts),
            "bob_accept_rate": stats.bob_accept_rate,
            "alice_accept_rate": stats.alice_accept_rate,
            "security_event_rate": stats.security_event_rate,
            "detection_rate": stats.detection_rate,
            "wilson_99": list(stats.wilson_99),
            "analytic": stats.analytic,
            "analytic_formula": stats.analytic_formula,
        },
    }


def emit_report(stats: DetectionStats, output_format: str, destination=None) -> str:
    """Render a report as json or csv; optionally write it to a path or
    file-like destination. Returns the rendered text either way."""
    if output_format == "json":
        text = json.dumps(report_dict(stats), indent=2, sort_keys=True) + "\n"
    elif output_format == "csv":
        cfg = stats.config
        row = {
            "variant": cfg.variant.value,
            "attack": cfg.attack,
            "attack_params": json.dumps(cfg.attack_params, sort_keys=True),
            "n": cfg.n,
            "trials": cfg.trials,
            "seed": cfg.seed,
            "message": cfg.message if cfg.message is not None else "",
            "count_none": stats.cause_counts["none"],
            "count_hash_mismatch": stats.cause_counts["hash_mismatch"],
            "count_bell_check_failed": stats.cause_counts["bell_check_failed"],
            "count_reflect_flag": stats.cause_counts["reflect_flag"],
            "bob_accept_rate": stats.bob_accept_rate,
            "alice_accept_rate": stats.alice_accept_rate,
            "security_event_rate": stats.security_event_rate,
            "detection_rate": stats.detection_rate,
            "wilson_99_low": stats.wilson_99[0],
            "wilson_99_high": stats.wilson_99[1],
            "analytic": stats.analytic if stats.analytic is not None else "",
            "analytic_formula": stats.analytic_formula or "",
            "hash_algorithm": HASH_NAME,
            "hash_truncate_bits": cfg.n // 8,
            "version": __version__,
        }
        buf = io.StringIO()
        writer = csv.DictWriter(buf, fieldnames=CSV_COLUMNS, lineterminator="\n")
        writer.writeheader()
        writer.writerow(row)
        text = buf.getvalue()
    else:
        raise ConfigError(f"unknown output format {output_format!r}")

    if destination is not None:
        if hasattr(destination, "write"):
            destination.write(text)
        else:
            with open(destination, "w", encoding="utf-8") as fh:
                fh.write(text)
    return text


# -- single-session configuration documents ----------------------------------
#
# Schema (JSON object):
#   variant  : "randomization" | "measure-resend"
#   n        : int, multiple of 8, >= 16
#   message  : hex string carrying at least n/8 bits
#   k1       : hex string carrying n bits (must be balanced)
#   k2       : hex string carrying n/2 bits, or null (measure-resend)
#   seed     : int, register seed
#   attack   : optional attack name (default "no_attack")
#   attack_params : optional object


def load_session_config(text: str) -> dict:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"malformed session config: {exc}") from None
    for key in ("variant", "n", "message", "k1", "seed"):
        if key not in doc:
            raise ConfigError(f"session config missing {key!r}")
    return doc


def run_session_from_config(doc: dict) -> dict:
    """Execute one session from a parsed configuration document and return a
    transcript mirroring the run outcome."""
    try:
        variant = Variant(doc["variant"])
    except ValueError:
        raise ConfigError(f"unknown variant {doc['variant']!r}") from None
    n = doc["n"]
    if not isinstance(n, int) or n % 8 != 0 or n < 16:
        raise ConfigError(f"n must be a multiple of 8 and at least 16, got {n!r}")
    m = hex_to_bits(doc["message"], n // 8)
    k1 = tuple(hex_to_bits(doc["k1"], n))
    k2 = tuple(hex_to_bits(doc["k2"], n // 2)) if doc.get("k2") else None
    try:
        keys = KeyMaterial(k1=k1, k2=k2)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    rng = Random(doc["seed"])
    attack = build_attack(doc.get("attack", "no_attack"), doc.get("attack_params", {}), rng, keys)
    outcome = run_session(variant, m, keys, attack, doc["seed"])
    return {
        "bob_accepts": outcome.bob_accepts,
        "alice_accepts": outcome.alice_accepts,
        "decoded_message": (
            bits_to_hex(outcome.decoded_message) if outcome.decoded_message is not None else None
        ),
        "detection_cause": outcome.detection_cause.value,
        "security_event": outcome.security_event,
    }
