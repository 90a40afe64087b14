"""
Experiment configuration schema.

Configs are JSON (or YAML) documents validated by pydantic; schema_version
must be 1. Unknown keys are rejected so typos fail loudly.
"""

import json
from pathlib import Path
from typing import List, Literal, Optional, Union

import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from parqlab.core.lsbq import MAX_BITS, TERNARY
from parqlab.core.par import IndicatorRegularizer, par_from_grid
from parqlab.core.quantgrid import QuantGrid
from parqlab.errors import ConfigError, InvalidArgumentError
from parqlab.optim.optimizer import GroupedOptimizer
from parqlab.optim.schedules import SlopeSchedule, StepSchedule
from parqlab.problems import LogisticProblem, MLPProblem, Problem, QuadraticProblem
from parqlab.problems.rng import MAX_RUN_SEED

SCHEMA_VERSION = 1


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid")


class QuadraticSpec(_Strict):
    """Noisy separable quadratic."""
    kind: Literal["quadratic"] = "quadratic"
    c: List[float] = Field(..., min_length=1, description="Center of the quadratic")
    noise_sigma: float = Field(0.0, ge=0, description="Gradient noise standard deviation")
    seed: int = Field(0, ge=0, description="Problem seed")
    init_scale: float = Field(0.0, ge=0, description="Scale of random initial points (0 = origin)")

    def build(self) -> Problem:
        return QuadraticProblem(self.c, noise_sigma=self.noise_sigma, seed=self.seed, init_scale=self.init_scale)


class LogisticSpec(_Strict):
    """Two-cluster logistic regression."""
    kind: Literal["logistic"] = "logistic"
    n_samples: int = Field(512, ge=2)
    d: int = Field(10, ge=1)
    separation: float = Field(3.0, ge=0)
    batch_size: int = Field(32, ge=1)
    seed: int = Field(0, ge=0)

    def build(self) -> Problem:
        return LogisticProblem(
            n_samples=self.n_samples, d=self.d, separation=self.separation, batch_size=self.batch_size, seed=self.seed
        )


class MLPSpec(_Strict):
    """Tanh MLP on two moons."""
    kind: Literal["mlp"] = "mlp"
    hidden_width: int = Field(16, ge=1)
    n_samples: int = Field(512, ge=2)
    noise: float = Field(0.1, ge=0)
    batch_size: int = Field(32, ge=1)
    seed: int = Field(0, ge=0)
    quantize_output: bool = Field(False, description="Quantize output.weight too")
    init_scale: float = Field(1.0, ge=0)

    def build(self) -> Problem:
        return MLPProblem(
            hidden_width=self.hidden_width,
            n_samples=self.n_samples,
            noise=self.noise,
            batch_size=self.batch_size,
            seed=self.seed,
            quantize_output=self.quantize_output,
            init_scale=self.init_scale,
        )


ProblemSpec = Union[QuadraticSpec, LogisticSpec, MLPSpec]


class OptimizerSpec(_Strict):
    """Method and its quantization settings."""
    kind: Literal["sgd", "prox-sgd", "aprox", "binaryconnect", "parq", "binaryrelax"]
    bits: Union[int, Literal["ternary"]] = Field(2, description="LSBQ bits or 'ternary'")
    granularity: Literal["per-tensor", "per-row"] = "per-tensor"
    grid: Optional[List[float]] = Field(None, description="Fixed target grid (signed values)")
    lam: float = Field(1.0, gt=0, description="Regularization strength lambda")
    indicator: bool = Field(False, description="Use the grid's indicator instead of PAR")
    momentum: float = Field(0.0, ge=0, lt=1)
    weight_decay: float = Field(0.0, ge=0)
    decoupled_weight_decay: bool = False
    grid_refresh_every: int = Field(1, ge=1)

    @field_validator("bits")
    @classmethod
    def _check_bits(cls, v):
        if v != TERNARY and not 1 <= v <= MAX_BITS:
            raise ValueError(f"bits must be in [1, {MAX_BITS}] or 'ternary'")
        return v

    @model_validator(mode="after")
    def _check_grid(self) -> "OptimizerSpec":
        if self.kind in ("prox-sgd", "aprox") and not self.grid:
            raise ValueError(f"optimizer {self.kind!r} needs a grid")
        if self.indicator and self.kind not in ("prox-sgd", "aprox"):
            raise ValueError("indicator applies to prox-sgd and aprox only")
        if self.grid:
            try:
                self.regularizer()
                self.target_grid()
            except InvalidArgumentError as e:
                raise ValueError(str(e)) from e
        return self

    def target_grid(self) -> Optional[QuantGrid]:
        return QuantGrid.from_values(self.grid) if self.grid else None

    def regularizer(self):
        """PAR (or indicator) for prox-sgd / aprox; None otherwise."""
        if self.kind not in ("prox-sgd", "aprox"):
            return None
        grid = self.target_grid()
        if self.indicator:
            return IndicatorRegularizer(grid, lam=self.lam)
        return par_from_grid(grid, self.lam)

    def oracle_regularizer(self):
        """Regularizer of the objective the method minimizes (None = lambda 0)."""
        if self.kind in ("prox-sgd", "aprox"):
            return self.regularizer()
        if self.kind == "binaryconnect" and self.grid:
            return IndicatorRegularizer(self.target_grid(), lam=self.lam)
        return None

    def build(self, problem: Problem) -> GroupedOptimizer:
        groups = problem.param_groups(bits=self.bits, granularity=self.granularity)
        return GroupedOptimizer(
            self.kind,
            groups,
            reg=self.regularizer(),
            grid=self.target_grid() if self.kind == "binaryconnect" else None,
            momentum=self.momentum,
            weight_decay=self.weight_decay,
            decoupled_weight_decay=self.decoupled_weight_decay,
            grid_refresh_every=self.grid_refresh_every,
        )


class ExperimentConfig(_Strict):
    """One experiment: problem, method, schedules and run settings."""
    schema_version: Literal[1] = SCHEMA_VERSION
    name: str = Field("experiment", min_length=1, description="Run directory name")
    problem: ProblemSpec = Field(..., discriminator="kind")
    optimizer: OptimizerSpec
    step_schedule: StepSchedule = Field(default_factory=StepSchedule)
    slope_schedule: SlopeSchedule = Field(default_factory=SlopeSchedule)
    total_steps: int = Field(..., ge=1, description="T")
    seeds: List[int] = Field(default_factory=lambda: [0], min_length=1)
    eval_every: Optional[int] = Field(None, ge=1, description="Default max(1, T // 300)")
    output: Optional[str] = Field(None, description="Output root directory")
    quantized_tol: float = Field(1e-6, ge=0)
    lipschitz_G: Optional[float] = Field(None, gt=0, description="Known G; estimated when absent")
    radius_R: Optional[float] = Field(None, gt=0, description="Known R; ||w0 - w*|| when absent")
    track_average: bool = Field(True, description="Also trace the weighted average iterate")

    @field_validator("seeds")
    @classmethod
    def _check_seeds(cls, v: List[int]) -> List[int]:
        if any(not 0 <= s <= MAX_RUN_SEED for s in v):
            raise ValueError(f"seeds must be in [0, {MAX_RUN_SEED}]")
        if len(set(v)) != len(v):
            raise ValueError("seeds must be distinct")
        return v

    @field_validator("name")
    @classmethod
    def _check_name(cls, v: str) -> str:
        if "/" in v or "\\" in v or v in (".", ".."):
            raise ValueError("name must be a plain directory name")
        return v

    @model_validator(mode="after")
    def _sync_total_steps(self) -> "ExperimentConfig":
        if self.slope_schedule.total_steps != self.total_steps:
            self.slope_schedule = self.slope_schedule.model_copy(update={"total_steps": self.total_steps})
        return self

    @property
    def resolved_eval_every(self) -> int:
        return self.eval_every or max(1, self.total_steps // 300)

    def with_seeds(self, seeds: List[int]) -> "ExperimentConfig":
        return validate_config({**self.model_dump(), "seeds": list(seeds)})


def validate_config(data: dict, source: str = "<config>") -> ExperimentConfig:
    """Validate a parsed document, wrapping pydantic errors into ConfigError."""
    try:
        return ExperimentConfig.model_validate(data)
    except ValidationError as e:
        raise ConfigError(f"{source}: invalid config\n{e}") from e
    except InvalidArgumentError as e:
        raise ConfigError(f"{source}: {e}") from e


def load_config(path) -> ExperimentConfig:
    """
    Load an ExperimentConfig from a .json, .yaml or .yml file.

    Raises:
        ConfigError: if the file is missing, unparsable or invalid
    """
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise ConfigError(f"{path}: cannot read config ({e.strerror or e})") from e
    try:
        if path.suffix.lower() in (".yaml", ".yml"):
            data = yaml.safe_load(text)
        else:
            data = json.loads(text)
    except (json.JSONDecodeError, yaml.YAMLError) as e:
        raise ConfigError(f"{path}: cannot parse config: {e}") from e
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: config must be a mapping")
    return validate_config(data, source=str(path))
