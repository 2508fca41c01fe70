"""Run configuration: ``key=value`` files, command-line overrides, round-trip text."""

from __future__ import annotations

import dataclasses
import os
from dataclasses import dataclass, field, fields

from .artifacts import CACHE_ENV, format_float
from .errors import DomainError
from .geometry import CATENOID, PLANE


def _floats(text):
    return [float(x) for x in str(text).replace(" ", "").split(",") if x]


@dataclass
class RunConfig:
    kind: str = CATENOID
    n: int = 4
    r0: float = 1.0
    s_max: float = 80.0
    N: int = 40000
    S_sweep: list = field(default_factory=lambda: [20.0, 40.0, 80.0])
    l_max_cap: int = 20
    spectral_floor: str = "auto"
    identity_order: float = 1.8
    rank_rtol: float = 1e-8
    identity_s_max: float = 10.0
    identity_N: int = 500
    samples: int = 128
    q_s_max: float = 40.0
    q_N: int = 40000
    q_tol: float = 1e-6
    oracle_N: int = 500
    oracle_l_max: int = 5
    output_dir: str = "minsurf-out"
    cache_dir: str = ""
    seed: int = 0

    # ------------------------------------------------------------ validation

    def validate(self):
        if self.kind not in (CATENOID, PLANE):
            raise DomainError(f"kind must be {CATENOID!r} or {PLANE!r}")
        if self.n < 3:
            raise DomainError("n must be at least 3")
        positive = ["s_max", "N", "l_max_cap", "identity_order", "rank_rtol", "identity_s_max",
                    "identity_N", "samples", "q_s_max", "q_N", "q_tol", "oracle_N"]
        if self.kind == CATENOID:
            positive.append("r0")
        for name in positive:
            if not getattr(self, name) > 0:
                raise DomainError(f"{name} must be positive")
        if self.oracle_l_max < 0 or self.seed < 0:
            raise DomainError("oracle_l_max and seed must be nonnegative")
        if not self.S_sweep or any(S <= 0 for S in self.S_sweep):
            raise DomainError("S_sweep must be a nonempty list of positive radii")
        if any(b <= a for a, b in zip(self.S_sweep, self.S_sweep[1:])):
            raise DomainError("S_sweep must be strictly increasing")
        if self.S_sweep[-1] > self.s_max:
            raise DomainError("S_sweep exceeds s_max")
        if self.spectral_floor != "auto" and not float(self.spectral_floor) > 0:
            raise DomainError("spectral_floor must be 'auto' or positive")
        return self

    @property
    def floor_value(self):
        return None if self.spectral_floor == "auto" else float(self.spectral_floor)

    @property
    def resolved_cache_dir(self):
        return os.environ.get(CACHE_ENV) or self.cache_dir or None

    # ---------------------------------------------------------- conversions

    @classmethod
    def keys(cls):
        return [f.name for f in fields(cls)]

    @classmethod
    def coerce(cls, key, value):
        """Convert a textual value for ``key`` to the field's type."""
        if key not in cls.keys():
            raise DomainError(f"unknown configuration key {key!r}")
        default = getattr(cls(), key)
        try:
            if key == "S_sweep":
                return value if isinstance(value, list) else _floats(value)
            if key == "spectral_floor":
                return "auto" if str(value) == "auto" else format_float(float(value))
            if isinstance(default, bool):
                return str(value).lower() in ("1", "true", "yes")
            if isinstance(default, int):
                return int(value)
            if isinstance(default, float):
                return float(value)
            return str(value)
        except ValueError as exc:
            raise DomainError(f"bad value {value!r} for {key}") from exc

    def updated(self, mapping):
        changes = {k: self.coerce(k, v) for k, v in mapping.items()}
        return dataclasses.replace(self, **changes)

    def to_text(self):
        out = []
        for f in fields(self):
            v = getattr(self, f.name)
            if isinstance(v, list):
                v = ",".join(format_float(x) for x in v)
            elif isinstance(v, float):
                v = format_float(v)
            out.append(f"{f.name}={v}\n")
        return "".join(out)

    @classmethod
    def from_text(cls, text):
        mapping = {}
        for lineno, line in enumerate(text.splitlines(), 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            key, sep, value = line.partition("=")
            if not sep:
                raise DomainError(f"line {lineno}: expected key=value")
            mapping[key.strip()] = value.strip()
        return cls().updated(mapping)

    def to_dict(self):
        return {f.name: getattr(self, f.name) for f in fields(self)}
