"""Optimizers: update rules, schedules and the multi-group driver."""

from parqlab.optim.optimizer import METHODS, GroupedOptimizer
from parqlab.optim.schedules import SlopeSchedule, StepSchedule, schedule_eta, schedule_inv_slope
from parqlab.optim.state import OptimizerState, ParamGroup, average_iterate
from parqlab.optim.steps import (
    aprox_step,
    binaryconnect_step,
    binaryrelax_step,
    parq_step,
    prox_sgd_step,
    refresh_grids,
    sgd_step,
)

__all__ = [
    "METHODS",
    "GroupedOptimizer",
    "SlopeSchedule",
    "StepSchedule",
    "schedule_eta",
    "schedule_inv_slope",
    "OptimizerState",
    "ParamGroup",
    "average_iterate",
    "aprox_step",
    "binaryconnect_step",
    "binaryrelax_step",
    "parq_step",
    "prox_sgd_step",
    "refresh_grids",
    "sgd_step",
]
