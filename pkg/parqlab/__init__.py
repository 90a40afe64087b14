"""
parqlab - quantization-aware training through piecewise-affine regularization.

Proximal maps of piecewise-affine regularizers, least-squares binary
quantization, the AProx / PARQ family of optimizers and a seeded experiment
harness for checking their convergence on small problems.
"""

__version__ = "0.1.0"

from parqlab.core import (
    IndicatorRegularizer,
    ParRegularizer,
    QuantGrid,
    estimate_grid,
    hard_quantize,
    par_from_grid,
    prox,
    prox_parq,
    quantized_fraction,
)
from parqlab.errors import (
    ConfigError,
    DivergenceError,
    DomainError,
    InvalidArgumentError,
    OracleUnavailableError,
    ParqLabError,
    ShapeMismatchError,
)
from parqlab.optim import GroupedOptimizer, OptimizerState, ParamGroup, SlopeSchedule, StepSchedule

__all__ = [
    "__version__",
    "IndicatorRegularizer",
    "ParRegularizer",
    "QuantGrid",
    "estimate_grid",
    "hard_quantize",
    "par_from_grid",
    "prox",
    "prox_parq",
    "quantized_fraction",
    "ConfigError",
    "DivergenceError",
    "DomainError",
    "InvalidArgumentError",
    "OracleUnavailableError",
    "ParqLabError",
    "ShapeMismatchError",
    "GroupedOptimizer",
    "OptimizerState",
    "ParamGroup",
    "SlopeSchedule",
    "StepSchedule",
]
