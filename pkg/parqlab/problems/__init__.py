"""Test problems with reproducible stochastic-gradient oracles."""

from parqlab.problems.base import Problem
from parqlab.problems.logistic import LogisticProblem, logistic_problem
from parqlab.problems.mlp import MLPProblem, mlp_problem, two_moons
from parqlab.problems.optimum import estimate_lipschitz, regularized_optimum
from parqlab.problems.quadratic import QuadraticProblem, quadratic_problem
from parqlab.problems.rng import RngSpec, init_stream, sample_seed

__all__ = [
    "Problem",
    "LogisticProblem",
    "logistic_problem",
    "MLPProblem",
    "mlp_problem",
    "two_moons",
    "estimate_lipschitz",
    "regularized_optimum",
    "QuadraticProblem",
    "quadratic_problem",
    "RngSpec",
    "init_stream",
    "sample_seed",
]
