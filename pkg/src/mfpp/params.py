from __future__ import annotations

import math
from dataclasses import asdict, dataclass

from .errors import InvalidParams

_WEIGHT_TOL = 1e-12


@dataclass(frozen=True)
class MixedStableParams:
    """Mixed stable subordinator with Laplace exponent ``c1 u^alpha1 + c2 u^alpha2``.

    Requires ``0 < alpha2 < alpha1 < 1`` and non-negative weights summing to one.
    """

    alpha1: float
    alpha2: float
    c1: float
    c2: float

    def __post_init__(self):
        a1, a2, c1, c2 = self.alpha1, self.alpha2, self.c1, self.c2
        if not all(math.isfinite(v) for v in (a1, a2, c1, c2)):
            raise InvalidParams("parameters must be finite")
        if not (0.0 < a2 < a1 < 1.0):
            raise InvalidParams(f"need 0 < alpha2 < alpha1 < 1, got alpha1={a1}, alpha2={a2}")
        if c1 < 0.0 or c2 < 0.0:
            raise InvalidParams(f"weights must be non-negative, got c1={c1}, c2={c2}")
        if abs(c1 + c2 - 1.0) > _WEIGHT_TOL:
            raise InvalidParams(f"weights must sum to 1, got c1 + c2 = {c1 + c2!r}")

    @classmethod
    def from_c1(cls, alpha1, alpha2, c1):
        return cls(float(alpha1), float(alpha2), float(c1), 1.0 - float(c1))

    @property
    def d(self) -> float:
        """Exponent gap ``alpha1 - alpha2``."""
        return self.alpha1 - self.alpha2

    @property
    def pure_alpha1(self) -> bool:
        return self.c2 == 0.0

    @property
    def pure_alpha2(self) -> bool:
        return self.c1 == 0.0

    def ml_argument(self, t: float) -> float:
        """``-c2 t^(alpha1 - alpha2) / c1``, the argument shared by every formula."""
        return -self.c2 * t**self.d / self.c1

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class MfppConfig:
    params: MixedStableParams
    lam: float = 1.0
    delta: float = 1.0

    def __post_init__(self):
        if not (math.isfinite(self.lam) and self.lam > 0.0):
            raise InvalidParams(f"lambda must be positive, got {self.lam!r}")
        if not (math.isfinite(self.delta) and self.delta > 0.0):
            raise InvalidParams(f"delta must be positive, got {self.delta!r}")

    def to_dict(self) -> dict:
        out = self.params.to_dict()
        out.update(lam=self.lam, delta=self.delta)
        return out
