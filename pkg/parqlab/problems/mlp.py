"""
One-hidden-layer tanh network on a two-moons dataset.

Parameters live in one flat vector laid out as

    hidden.weight (H, 2) | hidden.bias (H,) | output.weight (1, H) | output.bias (1,)

and the gradient is computed by hand-written backprop.
"""

from typing import Dict, List, Tuple

import numpy as np

from parqlab.core.lsbq import Bits
from parqlab.errors import InvalidArgumentError
from parqlab.optim.state import Granularity, ParamGroup
from parqlab.problems.base import Problem


def two_moons(gen: np.random.Generator, n: int, noise: float) -> Tuple[np.ndarray, np.ndarray]:
    """Interleaved half circles with labels in {0, 1}."""
    labels = (gen.random(n) < 0.5).astype(np.float64)
    theta = np.pi * gen.random(n)
    upper = np.stack([np.cos(theta), np.sin(theta)], axis=1)
    lower = np.stack([1.0 - np.cos(theta), 0.5 - np.sin(theta)], axis=1)
    X = np.where(labels[:, None] == 0.0, upper, lower)
    if noise > 0:
        X = X + noise * gen.standard_normal((n, 2))
    return X, labels


class MLPProblem(Problem):
    """
    Binary classifier p(y=1|x) = sigmoid(w2 . tanh(W1 x + b1) + b2) trained
    with binary cross-entropy. eval_metric is held-out accuracy.

    Args:
        hidden_width: Hidden units H (>= 1)
        n_samples: Points in the training set (and in the held-out set)
        noise: Gaussian jitter added to the moons
        batch_size: Minibatch size
        seed: Problem seed
        quantize_output: Whether output.weight is quantized (default keeps it full precision)
        init_scale: Scale of the random hidden-layer initialization
    """

    kind = "mlp"
    n_inputs = 2

    def __init__(
        self,
        hidden_width: int = 16,
        n_samples: int = 512,
        noise: float = 0.1,
        batch_size: int = 32,
        seed: int = 0,
        quantize_output: bool = False,
        init_scale: float = 1.0,
    ):
        if hidden_width < 1:
            raise InvalidArgumentError(f"hidden_width must be >= 1, got {hidden_width}")
        if n_samples < 2:
            raise InvalidArgumentError(f"n_samples must be >= 2, got {n_samples}")
        if batch_size < 1:
            raise InvalidArgumentError(f"batch_size must be >= 1, got {batch_size}")
        if not noise >= 0 or not init_scale >= 0:
            raise InvalidArgumentError("noise and init_scale must be >= 0")
        h = int(hidden_width)
        super().__init__(dim=h * self.n_inputs + h + h + 1, seed=seed)
        self.hidden_width = h
        self.n_samples = int(n_samples)
        self.noise = float(noise)
        self.batch_size = int(batch_size)
        self.quantize_output = quantize_output
        self.init_scale = float(init_scale)

        gen = self.rng.generator()
        self.X, self.y = two_moons(gen, self.n_samples, self.noise)
        self.X_eval, self.y_eval = two_moons(gen, self.n_samples, self.noise)

    # ---- layout ----

    @property
    def layout(self) -> Dict[str, Tuple[int, Tuple[int, ...]]]:
        """name -> (offset, shape)"""
        h, k = self.hidden_width, self.n_inputs
        return {
            "hidden.weight": (0, (h, k)),
            "hidden.bias": (h * k, (h,)),
            "output.weight": (h * k + h, (1, h)),
            "output.bias": (h * k + 2 * h, (1,)),
        }

    def unpack(self, w) -> Dict[str, np.ndarray]:
        w = self._check_point(w)
        return {name: w[off : off + int(np.prod(shape))].reshape(shape) for name, (off, shape) in self.layout.items()}

    def pack(self, params: Dict[str, np.ndarray]) -> np.ndarray:
        out = np.empty(self.dim)
        for name, (off, shape) in self.layout.items():
            out[off : off + int(np.prod(shape))] = np.asarray(params[name], dtype=np.float64).reshape(-1)
        return out

    def param_groups(self, bits: Bits = 2, granularity: Granularity = "per-tensor") -> List[ParamGroup]:
        quantized = {"hidden.weight": True, "output.weight": self.quantize_output}
        groups = []
        for name, (off, shape) in self.layout.items():
            is_weight = name in quantized
            groups.append(
                ParamGroup(
                    name=name,
                    shape=shape,
                    offset=off,
                    granularity=granularity if is_weight else "per-tensor",
                    bits=bits,
                    quantize=quantized.get(name, False),
                )
            )
        return groups

    # ---- forward / backward ----

    def logits(self, w, X: np.ndarray) -> np.ndarray:
        p = self.unpack(w)
        hidden = np.tanh(X @ p["hidden.weight"].T + p["hidden.bias"])
        return hidden @ p["output.weight"][0] + p["output.bias"][0]

    def _loss_grad(self, w, X: np.ndarray, y: np.ndarray):
        p = self.unpack(w)
        hidden = np.tanh(X @ p["hidden.weight"].T + p["hidden.bias"])
        s = hidden @ p["output.weight"][0] + p["output.bias"][0]
        loss = float(np.mean(np.logaddexp(0.0, s) - y * s))

        # dL/ds = sigmoid(s) - y
        ds = (np.exp(-np.logaddexp(0.0, -s)) - y) / X.shape[0]
        dz = np.outer(ds, p["output.weight"][0]) * (1.0 - hidden**2)
        grads = {
            "hidden.weight": dz.T @ X,
            "hidden.bias": dz.sum(axis=0),
            "output.weight": (ds @ hidden)[None, :],
            "output.bias": np.array([ds.sum()]),
        }
        return loss, self.pack(grads)

    def full_loss(self, w) -> float:
        return self._loss_grad(w, self.X, self.y)[0]

    def full_grad(self, w) -> np.ndarray:
        return self._loss_grad(w, self.X, self.y)[1]

    def stochastic_grad(self, w, sample_seed: int) -> np.ndarray:
        idx = self.sample_rng(sample_seed).integers(0, self.n_samples, size=self.batch_size)
        return self._loss_grad(w, self.X[idx], self.y[idx])[1]

    def accuracy(self, w, held_out: bool = True) -> float:
        X, y = (self.X_eval, self.y_eval) if held_out else (self.X, self.y)
        pred = (self.logits(w, X) >= 0).astype(np.float64)
        return float(np.mean(pred == y))

    def evaluate(self, w) -> float:
        return self.accuracy(w)

    def initial_point(self, run_seed: int) -> np.ndarray:
        gen = self.init_rng(run_seed)
        h = self.hidden_width
        params = {
            "hidden.weight": self.init_scale * gen.standard_normal((h, self.n_inputs)),
            "hidden.bias": self.init_scale * gen.standard_normal(h),
            "output.weight": gen.standard_normal((1, h)) / np.sqrt(h),
            "output.bias": np.zeros(1),
        }
        return self.pack(params)


def mlp_problem(hidden_width: int, n_samples: int = 512, seed: int = 0, **kwargs) -> MLPProblem:
    return MLPProblem(hidden_width=hidden_width, n_samples=n_samples, seed=seed, **kwargs)
