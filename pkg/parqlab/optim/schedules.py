"""
Step-size and inverse-slope schedules.

Both are pydantic models so they can be embedded directly in experiment
configs; evaluation methods are 1-indexed in t.
"""

import math
from typing import List, Literal

from pydantic import BaseModel, Field, model_validator

from parqlab.errors import DomainError


class StepSchedule(BaseModel):
    """
    Step sizes eta_t.

    kinds:
        constant      eta_t = base
        inverse-sqrt  eta_t = base / sqrt(t)
        multistep     eta_t = base * decay ** (number of milestones <= t)

    With ``theorem_base`` the harness replaces ``base`` by R / (2 G) before
    the run (inverse-sqrt only).
    """

    kind: Literal["constant", "inverse-sqrt", "multistep"] = "constant"
    base: float = Field(0.1, gt=0)
    milestones: List[int] = Field(default_factory=list)
    decay: float = Field(0.1, gt=0)
    theorem_base: bool = False

    @model_validator(mode="after")
    def _check(self) -> "StepSchedule":
        if any(m < 1 for m in self.milestones):
            raise ValueError("milestones must be >= 1")
        if self.milestones != sorted(self.milestones):
            raise ValueError("milestones must be increasing")
        if self.theorem_base and self.kind != "inverse-sqrt":
            raise ValueError("theorem_base requires kind 'inverse-sqrt'")
        return self

    @classmethod
    def theorem(cls, radius: float, lipschitz: float) -> "StepSchedule":
        """eta_t = (R / 2G) sqrt(1/t)."""
        return cls(kind="inverse-sqrt", base=radius / (2.0 * lipschitz))

    def eta(self, t: int) -> float:
        if t < 1:
            raise DomainError(f"step index must be >= 1, got {t}")
        if self.kind == "constant":
            return self.base
        if self.kind == "inverse-sqrt":
            return self.base / math.sqrt(t)
        passed = sum(1 for m in self.milestones if t >= m)
        return self.base * self.decay**passed


def schedule_eta(sched: StepSchedule, t: int) -> float:
    return sched.eta(t)


def _logistic(x: float) -> float:
    if x >= 0:
        return 1.0 / (1.0 + math.exp(-x))
    e = math.exp(x)
    return e / (1.0 + e)


class SlopeSchedule(BaseModel):
    """
    Inverse slope rho_t^{-1}, nonincreasing from 1 to 0.

    kinds:
        cosine        (1 + cos(pi x)) / 2
        sigmoid       logistic in x renormalized to 1 at x=0 and 0 at x=1
        constant-one  always 1 (soft map stays at its widest)
        hard          always 0 (hard quantization from the first step)

    where x = min(t / T_sat, 1) and T_sat = ceil(saturation_fraction * total_steps).
    The value is exactly 0 for t >= T_sat.
    """

    kind: Literal["cosine", "sigmoid", "constant-one", "hard"] = "cosine"
    total_steps: int = Field(1, ge=1)
    steepness: float = Field(50.0, gt=0)
    saturation_fraction: float = Field(0.93, gt=0, le=1)

    @property
    def saturation_step(self) -> int:
        """ceil(saturation_fraction * T), at least 1."""
        # round first so 0.93 * 300 lands on 279, not 280
        return max(1, math.ceil(round(self.saturation_fraction * self.total_steps, 9)))

    def inv_slope(self, t: int) -> float:
        if not 1 <= t <= self.total_steps:
            raise DomainError(f"step index {t} outside [1, {self.total_steps}]")
        if self.kind == "constant-one":
            return 1.0
        if self.kind == "hard" or t >= self.saturation_step:
            return 0.0
        x = t / self.saturation_step
        if self.kind == "cosine":
            return 0.5 * (1.0 + math.cos(math.pi * x))
        k = self.steepness
        lo = _logistic(-0.5 * k)
        hi = _logistic(0.5 * k)
        value = (_logistic(-k * (x - 0.5)) - lo) / (hi - lo)
        return min(1.0, max(0.0, value))

    def slope(self, t: int) -> float:
        """rho_t = 1 / rho_t^{-1}; +inf signals hard quantization."""
        r = self.inv_slope(t)
        return math.inf if r == 0.0 else 1.0 / r


def schedule_inv_slope(sched: SlopeSchedule, t: int) -> float:
    return sched.inv_slope(t)
