"""
Counter-based random streams.

Every random draw in parqlab comes from a Philox4x64 generator keyed by
(seed, stream). Philox output depends only on the key and the counter, so
a given RngSpec yields the same sequence on every platform.

Stream layout per problem seed:
    0                            problem data
    1                            Lipschitz estimation points
    2 .. 2**32 - 1               Lipschitz estimation gradient samples
    (run_seed + 1) << 32         initial point of a run
    ((run_seed + 1) << 32) | t   minibatch / noise of step t
"""

from dataclasses import dataclass

import numpy as np

from parqlab.errors import InvalidArgumentError

ALGORITHM = "philox4x64"
DATA_STREAM = 0
LIPSCHITZ_STREAM = 1
MAX_RUN_SEED = 2**31 - 1
MAX_STEP = 2**32 - 1

_U64 = 2**64


@dataclass(frozen=True)
class RngSpec:
    """
    Identifies one reproducible random stream.

    Attributes:
        seed: 64-bit problem seed
        stream: 64-bit stream id
        algorithm: Generator family (only "philox4x64")
    """

    seed: int
    stream: int = DATA_STREAM
    algorithm: str = ALGORITHM

    def __post_init__(self):
        if self.algorithm != ALGORITHM:
            raise InvalidArgumentError(f"unsupported generator {self.algorithm!r}; only {ALGORITHM!r}")
        for name in ("seed", "stream"):
            value = getattr(self, name)
            if not 0 <= int(value) < _U64:
                raise InvalidArgumentError(f"{name} must be a 64-bit unsigned integer, got {value}")

    def generator(self) -> np.random.Generator:
        key = np.array([self.seed, self.stream], dtype=np.uint64)
        return np.random.Generator(np.random.Philox(key=key))

    def child(self, stream: int) -> "RngSpec":
        """Same seed, another stream."""
        return RngSpec(seed=self.seed, stream=stream, algorithm=self.algorithm)


def init_stream(run_seed: int) -> int:
    """Stream of a run's initial point."""
    _check_run_seed(run_seed)
    return (run_seed + 1) << 32


def sample_seed(run_seed: int, t: int) -> int:
    """Stream of the stochastic gradient drawn at step t >= 1."""
    _check_run_seed(run_seed)
    if not 1 <= t <= MAX_STEP:
        raise InvalidArgumentError(f"step must be in [1, {MAX_STEP}], got {t}")
    return ((run_seed + 1) << 32) | t


def _check_run_seed(run_seed: int) -> None:
    if not 0 <= run_seed <= MAX_RUN_SEED:
        raise InvalidArgumentError(f"run seed must be in [0, {MAX_RUN_SEED}], got {run_seed}")
