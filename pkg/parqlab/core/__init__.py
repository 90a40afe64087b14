"""Quantization grids, piecewise-affine regularizers and LSBQ."""

from parqlab.core.lsbq import (
    TERNARY,
    ScaleVector,
    estimate_grid,
    grid_from_scales,
    lsbq_1bit,
    lsbq_bruteforce,
    lsbq_error,
    lsbq_greedy,
    lsbq_reconstruct,
    lsbq_ternary,
)
from parqlab.core.par import (
    IndicatorRegularizer,
    ParRegularizer,
    ProxKind,
    ProxOperator,
    SubgradientInterval,
    check_stationarity,
    par_eval,
    par_from_grid,
    prox,
    prox_binaryrelax,
    prox_parq,
    subdifferential,
    threshold_map,
)
from parqlab.core.quantgrid import QuantGrid, hard_quantize, quantized_fraction

__all__ = [
    "TERNARY",
    "ScaleVector",
    "estimate_grid",
    "grid_from_scales",
    "lsbq_1bit",
    "lsbq_bruteforce",
    "lsbq_error",
    "lsbq_greedy",
    "lsbq_reconstruct",
    "lsbq_ternary",
    "IndicatorRegularizer",
    "ParRegularizer",
    "ProxKind",
    "ProxOperator",
    "SubgradientInterval",
    "check_stationarity",
    "par_eval",
    "par_from_grid",
    "prox",
    "prox_binaryrelax",
    "prox_parq",
    "subdifferential",
    "threshold_map",
    "QuantGrid",
    "hard_quantize",
    "quantized_fraction",
]
