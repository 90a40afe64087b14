"""
Optimizer state and parameter groups.
"""

from dataclasses import dataclass, field
from typing import Literal, Optional, Tuple

import numpy as np

from parqlab.core.lsbq import MAX_BITS, TERNARY, Bits
from parqlab.core.quantgrid import QuantGrid
from parqlab.errors import DomainError, InvalidArgumentError, ShapeMismatchError

Granularity = Literal["per-tensor", "per-row"]


@dataclass(frozen=True)
class ParamGroup:
    """
    A named slice of the flat parameter vector.

    Attributes:
        name: Identifier (e.g. "hidden.weight")
        shape: Tensor shape; (rows, cols) for matrices, (d,) for flat vectors
        offset: Start of the slice in the flat vector
        granularity: Grid estimated over the whole tensor or row by row
        bits: Bits per weight, or "ternary"
        quantize: False keeps the group at full precision
    """

    name: str
    shape: Tuple[int, ...]
    offset: int = 0
    granularity: Granularity = "per-tensor"
    bits: Bits = 2
    quantize: bool = True

    def __post_init__(self):
        shape = tuple(int(s) for s in self.shape)
        if not shape or any(s < 1 for s in shape):
            raise InvalidArgumentError(f"group {self.name!r} has invalid shape {shape}")
        if self.granularity not in ("per-tensor", "per-row"):
            raise InvalidArgumentError(f"unknown granularity {self.granularity!r}")
        if self.granularity == "per-row" and len(shape) != 2:
            raise InvalidArgumentError(f"per-row granularity requires a 2-D shape, got {shape}")
        if self.bits != TERNARY and not (isinstance(self.bits, int) and 1 <= self.bits <= MAX_BITS):
            raise InvalidArgumentError(f"invalid bits {self.bits!r} for group {self.name!r}")
        object.__setattr__(self, "shape", shape)

    @property
    def size(self) -> int:
        return int(np.prod(self.shape))

    @property
    def slice(self) -> slice:
        return slice(self.offset, self.offset + self.size)


@dataclass
class OptimizerState:
    """
    Iterates of one optimizer run on one parameter group.

    Attributes:
        u: Latent (full-precision) vector
        w: Vector handed to the loss; quantized for quantizing methods
        gamma: Aggregate step size sum_{s<=t} eta_s
        t: Number of steps taken
        wbar_num: sum_s eta_s w^s
        wbar_den: sum_s eta_s
        momentum_buffer: Heavy-ball buffer (None until first use)
        grids: Current grid(s): one per row for per-row groups
        last_prox: The map that produced w from u at the last step
    """

    u: np.ndarray
    w: np.ndarray
    gamma: float = 0.0
    t: int = 0
    wbar_num: Optional[np.ndarray] = None
    wbar_den: float = 0.0
    momentum_buffer: Optional[np.ndarray] = None
    grids: Optional[Tuple[QuantGrid, ...]] = None
    last_prox: Optional[object] = field(default=None, repr=False)

    @classmethod
    def init(cls, w0) -> "OptimizerState":
        """State with u = w = w0 and no history."""
        w0 = np.array(w0, dtype=np.float64)
        return cls(u=w0.copy(), w=w0.copy(), wbar_num=np.zeros_like(w0))

    def check_grad(self, grad) -> np.ndarray:
        grad = np.asarray(grad, dtype=np.float64)
        if grad.shape != self.u.shape:
            raise ShapeMismatchError(f"gradient shape {grad.shape} does not match parameters {self.u.shape}")
        return grad

    def advance(self, eta: float) -> None:
        """
        Bookkeeping shared by every step: t, gamma and the weighted average.

        Called after the step has written the new w, so eta_t weights the
        iterate that step produced.
        """
        self.t += 1
        self.gamma += eta
        self.wbar_num = self.wbar_num + eta * self.w
        self.wbar_den += eta


def average_iterate(state: OptimizerState) -> np.ndarray:
    """
    Weighted average (sum_{s=1..t} eta_s w^s) / (sum_{s=1..t} eta_s).

    w^s is the iterate produced by step s, so eta_s pairs with the
    post-update point and the initial w^0 never enters the average. The
    average trace at step t reports this value after t steps.
    """
    if state.t < 1 or state.wbar_den <= 0:
        raise DomainError("average iterate is undefined before the first step")
    return state.wbar_num / state.wbar_den
