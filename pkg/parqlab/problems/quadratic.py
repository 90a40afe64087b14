"""
Noisy separable quadratic.
"""

import numpy as np

from parqlab.errors import InvalidArgumentError
from parqlab.problems.base import Problem


class QuadraticProblem(Problem):
    """
    f(w, z) = 1/2 ||w - c - z||^2 with z ~ N(0, sigma^2 I).

    full_loss drops the constant d sigma^2 / 2, so it is minimized at c with
    value 0. eval_metric is the distance ||w - c||.

    Args:
        c: Center
        noise_sigma: Noise standard deviation (>= 0)
        seed: Problem seed
        init_scale: Initial points are init_scale * N(0, I); 0 starts at the origin
    """

    kind = "quadratic"
    has_optimum = True

    def __init__(self, c, noise_sigma: float = 0.0, seed: int = 0, init_scale: float = 0.0):
        c = np.array(c, dtype=np.float64).reshape(-1)
        if c.size == 0:
            raise InvalidArgumentError("quadratic problem needs a non-empty center")
        if not np.all(np.isfinite(c)):
            raise InvalidArgumentError("quadratic center must be finite")
        if not noise_sigma >= 0:
            raise InvalidArgumentError(f"noise_sigma must be >= 0, got {noise_sigma}")
        if not init_scale >= 0:
            raise InvalidArgumentError(f"init_scale must be >= 0, got {init_scale}")
        super().__init__(dim=c.size, seed=seed)
        c.setflags(write=False)
        self.c = c
        self.noise_sigma = float(noise_sigma)
        self.init_scale = float(init_scale)

    def full_loss(self, w) -> float:
        w = self._check_point(w)
        return float(0.5 * np.sum((w - self.c) ** 2))

    def full_grad(self, w) -> np.ndarray:
        return self._check_point(w) - self.c

    def stochastic_grad(self, w, sample_seed: int) -> np.ndarray:
        grad = self.full_grad(w)
        if self.noise_sigma == 0.0:
            return grad
        z = self.sample_rng(sample_seed).normal(0.0, self.noise_sigma, size=self.dim)
        return grad - z

    def evaluate(self, w) -> float:
        return float(np.linalg.norm(self._check_point(w) - self.c))

    def initial_point(self, run_seed: int) -> np.ndarray:
        if self.init_scale == 0.0:
            return np.zeros(self.dim)
        return self.init_scale * self.init_rng(run_seed).standard_normal(self.dim)


def quadratic_problem(c, noise_sigma: float = 0.0, seed: int = 0) -> QuadraticProblem:
    return QuadraticProblem(c, noise_sigma=noise_sigma, seed=seed)
