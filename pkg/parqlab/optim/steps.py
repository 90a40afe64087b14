"""
Single-step update rules.

Every function mutates ``state`` in place and returns it. Gradients are
always evaluated by the caller at the previous ``state.w``; for the
quantizing methods the raw gradient is accumulated on the latent ``u``.
"""

import math
from typing import Optional, Tuple

import numpy as np

from parqlab.core.lsbq import MAX_BITS, TERNARY, Bits, estimate_grid
from parqlab.core.par import ProxKind, ProxOperator, Regularizer
from parqlab.core.quantgrid import QuantGrid
from parqlab.errors import InvalidArgumentError
from parqlab.optim.state import OptimizerState, ParamGroup, average_iterate

__all__ = [
    "sgd_step",
    "prox_sgd_step",
    "aprox_step",
    "binaryconnect_step",
    "parq_step",
    "binaryrelax_step",
    "average_iterate",
    "refresh_grids",
]


def _check_eta(eta: float) -> float:
    eta = float(eta)
    if not (eta > 0 and math.isfinite(eta)):
        raise InvalidArgumentError(f"step size must be positive and finite, got {eta}")
    return eta


def _check_bits(bits: Bits) -> None:
    if bits == TERNARY:
        return
    if not isinstance(bits, (int, np.integer)) or not 1 <= bits <= MAX_BITS:
        raise InvalidArgumentError(f"bits must be an integer in [1, {MAX_BITS}] or 'ternary', got {bits!r}")


def _grid_arg(grids: Tuple[QuantGrid, ...], per_row: bool):
    return grids if per_row else grids[0]


def _is_per_row(state: OptimizerState, group: Optional[ParamGroup]) -> bool:
    return group is not None and group.granularity == "per-row" and state.u.ndim == 2


def refresh_grids(state: OptimizerState, bits: Bits, group: Optional[ParamGroup] = None) -> Tuple[QuantGrid, ...]:
    """Re-estimate the grid(s) of ``state.u`` by LSBQ, one per row for per-row groups."""
    if _is_per_row(state, group):
        grids = tuple(estimate_grid(row, bits) for row in state.u)
    else:
        grids = (estimate_grid(state.u.reshape(-1), bits),)
    state.grids = grids
    return grids


def sgd_step(state: OptimizerState, grad, eta: float) -> OptimizerState:
    """w <- w - eta * grad, with u kept equal to w."""
    eta = _check_eta(eta)
    grad = state.check_grad(grad)
    state.w = state.w - eta * grad
    state.u = state.w.copy()
    state.last_prox = None
    state.advance(eta)
    return state


def prox_sgd_step(state: OptimizerState, grad, eta: float, reg: Regularizer) -> OptimizerState:
    """u <- w - eta * grad; w <- prox of (eta * lambda) Psi at u."""
    eta = _check_eta(eta)
    grad = state.check_grad(grad)
    state.u = state.w - eta * grad
    op = ProxOperator(ProxKind.PAR, reg=reg, scale=reg.prox_scale(eta))
    state.w = op(state.u)
    state.last_prox = op
    state.advance(eta)
    return state


def aprox_step(state: OptimizerState, grad, eta: float, reg: Regularizer) -> OptimizerState:
    """
    Aggregate proximal step.

    u <- u - eta * grad; gamma <- gamma + eta; w <- prox of (gamma * lambda) Psi at u.
    The prox scale uses gamma after this step's eta has been added.
    """
    eta = _check_eta(eta)
    grad = state.check_grad(grad)
    state.u = state.u - eta * grad
    op = ProxOperator(ProxKind.PAR, reg=reg, scale=reg.prox_scale(state.gamma + eta))
    state.w = op(state.u)
    state.last_prox = op
    state.advance(eta)
    return state


def binaryconnect_step(
    state: OptimizerState,
    grad,
    eta: float,
    grid: Optional[QuantGrid] = None,
    bits: Bits = 1,
    group: Optional[ParamGroup] = None,
    refresh: bool = True,
) -> OptimizerState:
    """
    u <- u - eta * grad; w <- hard_quantize(u, grid).

    Without a fixed ``grid`` the grid is re-estimated from u by LSBQ with
    ``bits`` (when ``refresh`` is set or no grid exists yet).
    """
    eta = _check_eta(eta)
    grad = state.check_grad(grad)
    state.u = state.u - eta * grad
    per_row = False
    if grid is not None:
        state.grids = (grid,)
    else:
        _check_bits(bits)
        if refresh or state.grids is None:
            refresh_grids(state, bits, group)
        per_row = _is_per_row(state, group)
    op = ProxOperator(ProxKind.HARD, grid=_grid_arg(state.grids, per_row))
    state.w = op(state.u)
    state.last_prox = op
    state.advance(eta)
    return state


def _soft_step(
    kind: ProxKind,
    state: OptimizerState,
    grad,
    eta: float,
    slope: float,
    bits: Bits,
    group: Optional[ParamGroup],
    refresh: bool,
) -> OptimizerState:
    eta = _check_eta(eta)
    _check_bits(bits)
    grad = state.check_grad(grad)
    state.u = state.u - eta * grad
    if refresh or state.grids is None:
        refresh_grids(state, bits, group)
    per_row = _is_per_row(state, group)
    if math.isinf(slope):
        op = ProxOperator(ProxKind.HARD, grid=_grid_arg(state.grids, per_row))
    else:
        op = ProxOperator(kind, grid=_grid_arg(state.grids, per_row), slope=slope)
    state.w = op(state.u)
    state.last_prox = op
    state.advance(eta)
    return state


def parq_step(
    state: OptimizerState,
    grad,
    eta: float,
    slope: float,
    bits: Bits,
    group: Optional[ParamGroup] = None,
    refresh: bool = True,
) -> OptimizerState:
    """
    One PARQ step: latent update, online LSBQ grid, soft quantization.

    Args:
        state: Optimizer state (u shaped like the group)
        grad: Gradient at the previous w
        eta: Step size
        slope: rho_t >= 1; math.inf switches to hard quantization
        bits: LSBQ bits or "ternary"
        group: Parameter group; per-row granularity estimates one grid per row
        refresh: Re-estimate the grid on this step
    """
    return _soft_step(ProxKind.PARQ, state, grad, eta, slope, bits, group, refresh)


def binaryrelax_step(
    state: OptimizerState,
    grad,
    eta: float,
    slope: float,
    bits: Bits,
    group: Optional[ParamGroup] = None,
    refresh: bool = True,
) -> OptimizerState:
    """As parq_step with w <- (rho Q(u) + u) / (rho + 1) using rho = slope."""
    return _soft_step(ProxKind.BINARYRELAX, state, grad, eta, slope, bits, group, refresh)
