"""
Problem interface shared by every test problem.
"""

from abc import ABC, abstractmethod
from typing import List, Optional

import numpy as np

from parqlab.core.lsbq import Bits
from parqlab.core.par import Regularizer
from parqlab.errors import ShapeMismatchError
from parqlab.optim.state import Granularity, ParamGroup
from parqlab.problems.rng import DATA_STREAM, RngSpec, init_stream


class Problem(ABC):
    """
    A loss f(w) = E_z f(w, z) with a reproducible stochastic-gradient oracle.

    Subclasses are immutable after construction: oracles are pure functions
    of (w, sample_seed), so concurrent evaluation is safe.
    """

    kind: str = "problem"
    #: True when regularized_optimum can solve this problem
    has_optimum: bool = False

    def __init__(self, dim: int, seed: int = 0):
        self.dim = int(dim)
        self.seed = int(seed)
        self.rng = RngSpec(seed=self.seed, stream=DATA_STREAM)

    def _check_point(self, w) -> np.ndarray:
        w = np.asarray(w, dtype=np.float64).reshape(-1)
        if w.size != self.dim:
            raise ShapeMismatchError(f"{self.kind} problem has dimension {self.dim}, got {w.size}")
        return w

    @abstractmethod
    def full_loss(self, w) -> float:
        """Population (or full-batch) loss f(w)."""

    @abstractmethod
    def full_grad(self, w) -> np.ndarray:
        """Gradient of full_loss."""

    @abstractmethod
    def stochastic_grad(self, w, sample_seed: int) -> np.ndarray:
        """Unbiased gradient estimate; deterministic in (w, sample_seed)."""

    @abstractmethod
    def evaluate(self, w) -> float:
        """Evaluation metric reported as eval_metric in traces."""

    def objective(self, w, reg: Optional[Regularizer] = None) -> float:
        """F_lambda(w) = f(w) + lambda Psi(w)."""
        value = self.full_loss(w)
        if reg is not None:
            value += reg.eval(self._check_point(w))
        return float(value)

    def param_groups(self, bits: Bits = 2, granularity: Granularity = "per-tensor") -> List[ParamGroup]:
        """Default layout: one quantizable flat group."""
        return [ParamGroup(name="w", shape=(self.dim,), granularity=granularity, bits=bits)]

    def initial_point(self, run_seed: int) -> np.ndarray:
        return np.zeros(self.dim)

    def init_rng(self, run_seed: int) -> np.random.Generator:
        return self.rng.child(init_stream(run_seed)).generator()

    def sample_rng(self, sample_seed: int) -> np.random.Generator:
        return self.rng.child(sample_seed).generator()

    def __repr__(self) -> str:
        return f"{type(self).__name__}(dim={self.dim}, seed={self.seed})"
