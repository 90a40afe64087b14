"""
Two-cluster logistic regression.
"""

import numpy as np

from parqlab.errors import InvalidArgumentError
from parqlab.problems.base import Problem


def _sigmoid_neg(margin: np.ndarray) -> np.ndarray:
    # 1 / (1 + exp(margin)), stable for large |margin|
    return np.exp(-np.logaddexp(0.0, margin))


class LogisticProblem(Problem):
    """
    Labels y in {-1, +1}; features x = y * (separation / 2) * e + N(0, I)
    along a random unit direction e. No bias term: the clusters are
    symmetric about the origin.

    Loss is the mean logistic loss log(1 + exp(-y x.w)); eval_metric is the
    accuracy on an independently drawn held-out set of the same size.

    Args:
        n_samples: Training set size (>= 2)
        d: Feature dimension (>= 1)
        separation: Distance between the cluster centers
        batch_size: Minibatch size of the stochastic gradient
        seed: Problem seed
    """

    kind = "logistic"

    def __init__(self, n_samples: int = 512, d: int = 10, separation: float = 3.0, batch_size: int = 32, seed: int = 0):
        if n_samples < 2:
            raise InvalidArgumentError(f"n_samples must be >= 2, got {n_samples}")
        if d < 1:
            raise InvalidArgumentError(f"d must be >= 1, got {d}")
        if not separation >= 0:
            raise InvalidArgumentError(f"separation must be >= 0, got {separation}")
        if batch_size < 1:
            raise InvalidArgumentError(f"batch_size must be >= 1, got {batch_size}")
        super().__init__(dim=d, seed=seed)
        self.n_samples = int(n_samples)
        self.separation = float(separation)
        self.batch_size = int(batch_size)

        gen = self.rng.generator()
        direction = gen.standard_normal(d)
        self.direction = direction / np.linalg.norm(direction)
        self.X, self.y = self._draw(gen, self.n_samples)
        self.X_eval, self.y_eval = self._draw(gen, self.n_samples)

    def _draw(self, gen: np.random.Generator, n: int):
        y = np.where(gen.random(n) < 0.5, -1.0, 1.0)
        X = y[:, None] * (0.5 * self.separation) * self.direction[None, :] + gen.standard_normal((n, self.dim))
        return X, y

    def _loss_grad(self, w: np.ndarray, X: np.ndarray, y: np.ndarray):
        margin = y * (X @ w)
        loss = float(np.mean(np.logaddexp(0.0, -margin)))
        grad = -(X * (y * _sigmoid_neg(margin))[:, None]).mean(axis=0)
        return loss, grad

    def full_loss(self, w) -> float:
        return self._loss_grad(self._check_point(w), self.X, self.y)[0]

    def full_grad(self, w) -> np.ndarray:
        return self._loss_grad(self._check_point(w), self.X, self.y)[1]

    def stochastic_grad(self, w, sample_seed: int) -> np.ndarray:
        w = self._check_point(w)
        idx = self.sample_rng(sample_seed).integers(0, self.n_samples, size=self.batch_size)
        return self._loss_grad(w, self.X[idx], self.y[idx])[1]

    def accuracy(self, w, held_out: bool = True) -> float:
        w = self._check_point(w)
        X, y = (self.X_eval, self.y_eval) if held_out else (self.X, self.y)
        pred = np.where(X @ w >= 0, 1.0, -1.0)
        return float(np.mean(pred == y))

    def evaluate(self, w) -> float:
        return self.accuracy(w)


def logistic_problem(n_samples: int, d: int, separation: float, batch_size: int = 32, seed: int = 0) -> LogisticProblem:
    return LogisticProblem(n_samples=n_samples, d=d, separation=separation, batch_size=batch_size, seed=seed)
