"""Model configuration: branching number plus the two weight distributions."""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

from .distributions import Dist, dist_from_json, dist_to_json
from .errors import ConfigError


class Verdict(str, enum.Enum):
    """Outcome of an infinite-transmission test.  CRITICAL means the
    configuration sits inside the tolerance band around the phase line,
    where the artifact refuses to decide."""

    SURVIVES = "survives"
    DIES = "dies"
    CRITICAL = "critical"


class Scheme(str, enum.Enum):
    AUGMENTED = "augmented"
    COMPLETE = "complete"
    BOUNDARY = "boundary"


@dataclass(frozen=True)
class ModelConfig:
    """Branching number m with the strength (vertex) and cost (edge) laws.

    The interesting regime is a nontrivial P(strength >= cost);
    `certain_outcome` reports the two degenerate regimes so callers can
    flag or short-circuit them.
    """

    m: int
    strength: Dist
    cost: Dist

    def __post_init__(self):
        if not isinstance(self.m, int) or isinstance(self.m, bool) or self.m < 1:
            raise ConfigError("m must be an integer >= 1")

    def certain_outcome(self) -> str | None:
        """'survive' when strength >= cost a.s., 'die' when strength < cost
        a.s., else None."""
        r, c = self.strength, self.cost
        if c.support_max() <= r.support_min():
            return "survive"
        r_hi, c_lo = r.support_max(), c.support_min()
        if r_hi < c_lo:
            return "die"
        if r_hi == c_lo and math.isfinite(r_hi):
            if r.atom_at(r_hi) * c.atom_at(c_lo) == 0.0:
                return "die"
        return None

    def to_json(self) -> dict:
        obj = {
            "m": self.m,
            "R": dist_to_json(self.strength),
            "C": dist_to_json(self.cost),
        }
        outcome = self.certain_outcome()
        if outcome is not None:
            obj["trivial_regime"] = outcome
        return obj

    @classmethod
    def from_json(cls, obj) -> "ModelConfig":
        if not isinstance(obj, dict):
            raise ConfigError("model config must be a JSON object")
        missing = {"m", "R", "C"} - obj.keys()
        if missing:
            raise ConfigError(f"model config missing fields: {sorted(missing)}")
        m = obj["m"]
        if not isinstance(m, int) or isinstance(m, bool):
            raise ConfigError("m must be an integer")
        return cls(m=m, strength=dist_from_json(obj["R"]), cost=dist_from_json(obj["C"]))
