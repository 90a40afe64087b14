"""
Multi-group optimizer driver.

Splits the flat parameter vector into ParamGroups, keeps one OptimizerState
per group and dispatches each step to the method's update rule.
Full-precision groups always take plain SGD steps.
"""

import math
from typing import Dict, List, Literal, Optional, Sequence

import numpy as np
from loguru import logger

from parqlab.core.lsbq import estimate_grid
from parqlab.core.par import Regularizer
from parqlab.core.quantgrid import QuantGrid, quantized_fraction
from parqlab.errors import InvalidArgumentError, ShapeMismatchError
from parqlab.optim.state import OptimizerState, ParamGroup, average_iterate
from parqlab.optim.steps import (
    aprox_step,
    binaryconnect_step,
    binaryrelax_step,
    parq_step,
    prox_sgd_step,
    sgd_step,
)

Method = Literal["sgd", "prox-sgd", "aprox", "binaryconnect", "parq", "binaryrelax"]
METHODS = ("sgd", "prox-sgd", "aprox", "binaryconnect", "parq", "binaryrelax")


class GroupedOptimizer:
    """
    Runs one method over several parameter groups.

    Args:
        method: Update rule for the quantized groups
        groups: Groups covering the flat parameter vector without overlap
        reg: Regularizer for prox-sgd / aprox
        grid: Fixed grid for binaryconnect (None = online LSBQ)
        momentum: Heavy-ball coefficient on the latent update (0 disables)
        weight_decay: Weight decay coefficient
        decoupled_weight_decay: Shrink u directly instead of adding wd * w to the gradient
        grid_refresh_every: LSBQ grid re-estimation cadence in steps
    """

    def __init__(
        self,
        method: Method,
        groups: Sequence[ParamGroup],
        reg: Optional[Regularizer] = None,
        grid: Optional[QuantGrid] = None,
        momentum: float = 0.0,
        weight_decay: float = 0.0,
        decoupled_weight_decay: bool = False,
        grid_refresh_every: int = 1,
    ):
        if method not in METHODS:
            raise InvalidArgumentError(f"unknown method {method!r}; expected one of {METHODS}")
        if method in ("prox-sgd", "aprox") and reg is None:
            raise InvalidArgumentError(f"method {method!r} needs a regularizer")
        if not 0.0 <= momentum < 1.0:
            raise InvalidArgumentError(f"momentum must be in [0, 1), got {momentum}")
        if weight_decay < 0:
            raise InvalidArgumentError(f"weight_decay must be >= 0, got {weight_decay}")
        if grid_refresh_every < 1:
            raise InvalidArgumentError(f"grid_refresh_every must be >= 1, got {grid_refresh_every}")
        if not groups:
            raise InvalidArgumentError("at least one parameter group is required")

        self.method = method
        self.groups: List[ParamGroup] = list(groups)
        self.reg = reg
        self.grid = grid
        self.momentum = float(momentum)
        self.weight_decay = float(weight_decay)
        self.decoupled_weight_decay = decoupled_weight_decay
        self.grid_refresh_every = int(grid_refresh_every)
        self.dim = sum(g.size for g in self.groups)
        self._check_layout()
        self.states: Dict[str, OptimizerState] = {}

    def _check_layout(self) -> None:
        covered = np.zeros(self.dim, dtype=int)
        for g in self.groups:
            if g.offset < 0 or g.offset + g.size > self.dim:
                raise InvalidArgumentError(f"group {g.name!r} lies outside the parameter vector")
            covered[g.slice] += 1
        if not np.all(covered == 1):
            raise InvalidArgumentError("parameter groups must cover the vector exactly once")

    # ---- state ----

    def init(self, w0) -> None:
        """Reset every group's state to u = w = w0."""
        w0 = np.asarray(w0, dtype=np.float64).reshape(-1)
        if w0.size != self.dim:
            raise ShapeMismatchError(f"initial point has {w0.size} entries, groups cover {self.dim}")
        self.states = {g.name: OptimizerState.init(w0[g.slice].reshape(g.shape)) for g in self.groups}

    def _gather(self, attr: str) -> np.ndarray:
        out = np.empty(self.dim)
        for g in self.groups:
            out[g.slice] = getattr(self.states[g.name], attr).reshape(-1)
        return out

    @property
    def w(self) -> np.ndarray:
        return self._gather("w")

    @property
    def u(self) -> np.ndarray:
        return self._gather("u")

    @property
    def t(self) -> int:
        return self.states[self.groups[0].name].t

    @property
    def gamma(self) -> float:
        return self.states[self.groups[0].name].gamma

    def average_iterate(self) -> np.ndarray:
        out = np.empty(self.dim)
        for g in self.groups:
            out[g.slice] = average_iterate(self.states[g.name]).reshape(-1)
        return out

    # ---- stepping ----

    def _direction(self, state: OptimizerState, grad: np.ndarray, eta: float, from_w: bool) -> np.ndarray:
        if self.weight_decay > 0:
            if self.decoupled_weight_decay:
                # floored at 0: decay alone never flips a sign
                shrink = max(0.0, 1.0 - eta * self.weight_decay)
                state.u = state.u * shrink
                if from_w:
                    state.w = state.w * shrink
            else:
                grad = grad + self.weight_decay * state.w
        if self.momentum > 0:
            if state.momentum_buffer is None:
                state.momentum_buffer = grad.copy()
            else:
                state.momentum_buffer = self.momentum * state.momentum_buffer + grad
            grad = state.momentum_buffer
        return grad

    def step(self, grad, eta: float, slope: float = math.inf) -> np.ndarray:
        """
        Apply one update to every group.

        Args:
            grad: Flat gradient evaluated at the current w
            eta: Step size
            slope: rho_t for parq / binaryrelax (math.inf = hard)

        Returns:
            The new flat w
        """
        if not self.states:
            raise InvalidArgumentError("optimizer used before init()")
        grad = np.asarray(grad, dtype=np.float64).reshape(-1)
        if grad.size != self.dim:
            raise ShapeMismatchError(f"gradient has {grad.size} entries, parameters have {self.dim}")
        refresh = (self.t % self.grid_refresh_every) == 0

        for g in self.groups:
            state = self.states[g.name]
            plain = not g.quantize or self.method == "sgd"
            # sgd and prox-sgd step from w, the others from u
            from_w = plain or self.method == "prox-sgd"
            direction = self._direction(state, grad[g.slice].reshape(g.shape), eta, from_w)
            if plain:
                sgd_step(state, direction, eta)
            elif self.method == "prox-sgd":
                prox_sgd_step(state, direction, eta, self.reg)
            elif self.method == "aprox":
                aprox_step(state, direction, eta, self.reg)
            elif self.method == "binaryconnect":
                binaryconnect_step(state, direction, eta, grid=self.grid, bits=g.bits, group=g, refresh=refresh)
            elif self.method == "parq":
                parq_step(state, direction, eta, slope, g.bits, group=g, refresh=refresh)
            else:
                binaryrelax_step(state, direction, eta, slope, g.bits, group=g, refresh=refresh)
        logger.debug("step {} method={} eta={:.3e} slope={}", self.t, self.method, eta, slope)
        return self.w

    # ---- diagnostics ----

    def group_grids(self, group: ParamGroup) -> Optional[tuple]:
        """The grid(s) ``group`` is quantized onto, or None when it has none."""
        if not group.quantize:
            return None
        if self.method in ("prox-sgd", "aprox"):
            return (self.reg.grid(),)
        if self.method == "binaryconnect" and self.grid is not None:
            return (self.grid,)
        return self.states[group.name].grids

    def quantized_fraction(self, tol: float = 0.0, w=None) -> float:
        """
        Fraction of quantized-group entries lying on their grid.

        Groups without a grid yet (plain SGD) are measured against the LSBQ
        grid estimated from their current w.

        Args:
            tol: Absolute tolerance
            w: Flat vector to measure instead of the current iterate
        """
        if w is not None:
            w = np.asarray(w, dtype=np.float64).reshape(-1)
            if w.size != self.dim:
                raise ShapeMismatchError(f"vector has {w.size} entries, parameters have {self.dim}")
        hits = 0.0
        total = 0
        for g in self.groups:
            if not g.quantize:
                continue
            if w is None:
                values = self.states[g.name].w
            else:
                values = w[g.slice].reshape(g.shape)
            grids = self.group_grids(g)
            if grids is None:
                grids = (estimate_grid(values.reshape(-1), g.bits),)
            if len(grids) > 1:
                for row, grid in zip(values, grids):
                    hits += quantized_fraction(row, grid, tol) * row.size
            else:
                hits += quantized_fraction(values, grids[0], tol) * values.size
            total += values.size
        return 1.0 if total == 0 else hits / total

    def tracked_levels(self) -> np.ndarray:
        """Positive grid values of the first quantized group (first row for per-row groups)."""
        for g in self.groups:
            grids = self.group_grids(g) if self.states else None
            if grids:
                return np.asarray(grids[0].levels)
        return np.zeros(0)
