"""Scenario configuration files and the seeded case generator."""

from __future__ import annotations

import json
import zlib
from dataclasses import asdict, dataclass, field

import numpy as np

from .errors import MalformedSpec

RING_KEYS = ("ring", "involution", "lambda", "mu", "n")
KNOWN_KEYS = set(RING_KEYS) | {"delta", "ideal", "omega", "subgroup", "suite", "seed", "samples", "budget"}


@dataclass
class ScenarioConfig:
    ring: dict
    delta: dict = field(default_factory=lambda: {"kind": "max"})
    ideal: dict | None = None
    omega: dict | None = None
    subgroup: dict | None = None
    suite: dict = field(default_factory=dict)
    seed: int = 0
    samples: int | None = None
    budget: int = 8_000_000

    @classmethod
    def from_dict(cls, d: dict) -> "ScenarioConfig":
        if not isinstance(d, dict):
            raise MalformedSpec("a scenario config must be a JSON object")
        unknown = set(d) - KNOWN_KEYS
        if unknown:
            raise MalformedSpec(f"unknown config fields {sorted(unknown)}")
        missing = [k for k in RING_KEYS if k not in d]
        if missing:
            raise MalformedSpec(f"missing config fields {missing}")
        seed = d.get("seed", 0)
        if not isinstance(seed, int) or not 0 <= seed < 2 ** 64:
            raise MalformedSpec("seed must be an integer in [0, 2^64)")
        return cls(
            ring={k: d[k] for k in RING_KEYS},
            delta=d.get("delta") or {"kind": "max"},
            ideal=d.get("ideal"),
            omega=d.get("omega"),
            subgroup=d.get("subgroup"),
            suite=d.get("suite") or {},
            seed=seed,
            samples=d.get("samples"),
            budget=int(d.get("budget", 8_000_000)),
        )

    def to_dict(self) -> dict:
        out = dict(self.ring)
        rest = asdict(self)
        del rest["ring"]
        out.update({k: v for k, v in rest.items() if v is not None})
        return out

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2)

    @classmethod
    def loads(cls, text: str) -> "ScenarioConfig":
        try:
            d = json.loads(text)
        except json.JSONDecodeError as exc:
            raise MalformedSpec(f"config is not valid JSON: {exc}") from exc
        return cls.from_dict(d)

    @classmethod
    def load(cls, path) -> "ScenarioConfig":
        with open(path) as f:
            return cls.loads(f.read())


def case_rng(seed: int, suite: str, index: int = 0) -> np.random.Generator:
    """A generator determined by ``(seed, suite, index)`` alone (counter-based Philox)."""
    key = np.array([seed % 2 ** 64, zlib.crc32(suite.encode())], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key, counter=index))


def preset_config(name: str, **overrides) -> ScenarioConfig:
    """A ScenarioConfig for one of the ring presets."""
    from .ring import PRESETS
    d = dict(PRESETS[name])
    d.update(overrides)
    return ScenarioConfig.from_dict(d)
