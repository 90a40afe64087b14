"""
Optimum oracles and Lipschitz estimation.
"""

import itertools
import math
from typing import Callable, Optional, Tuple

import numpy as np
from loguru import logger

from parqlab.core.par import IndicatorRegularizer, ParRegularizer, Regularizer
from parqlab.core.quantgrid import hard_quantize
from parqlab.errors import InvalidArgumentError, OracleUnavailableError
from parqlab.problems.base import Problem
from parqlab.problems.quadratic import QuadraticProblem
from parqlab.problems.rng import LIPSCHITZ_STREAM

GRID_STEP = 1e-6
COARSE_GRID_STEP = 1e-2
MAX_GENERIC_DIM = 2
KINK_TOL = 1e-14


def _trisect(fn: Callable[[float], float], lo: float, hi: float, iters: int = 100) -> float:
    for _ in range(iters):
        m1 = lo + (hi - lo) / 3.0
        m2 = hi - (hi - lo) / 3.0
        if fn(m1) <= fn(m2):
            hi = m2
        else:
            lo = m1
    return 0.5 * (lo + hi)


def _psi_profile(reg: ParRegularizer, x: np.ndarray) -> np.ndarray:
    ax = np.abs(x)
    psi = np.full_like(ax, -np.inf)
    for k in range(reg.m):
        np.maximum(psi, reg.a[k] * (ax - reg.q[k]) + reg.b[k], out=psi)
    return reg.lam * psi


def _scalar_objective(reg: ParRegularizer, c: float) -> Callable[[float], float]:
    def fn(x: float) -> float:
        if abs(x) > reg.q_max:
            return math.inf
        return 0.5 * (x - c) ** 2 + float(_psi_profile(reg, np.array([x]))[0])

    return fn


def _separable_par(c: np.ndarray, reg: ParRegularizer, grid_step: float) -> np.ndarray:
    xs = np.arange(-reg.q_max, reg.q_max + 0.5 * grid_step, grid_step)
    xs = np.clip(xs, -reg.q_max, reg.q_max)
    psi = _psi_profile(reg, xs)
    kinks = np.concatenate([-reg.q[::-1], reg.q[1:]])
    out = np.empty_like(c)
    for i, ci in enumerate(c):
        fn = _scalar_objective(reg, float(ci))
        j = int(np.argmin(0.5 * (xs - ci) ** 2 + psi))
        lo = max(xs[j] - grid_step, -reg.q_max)
        hi = min(xs[j] + grid_step, reg.q_max)
        best = min([float(xs[j]), _trisect(fn, lo, hi)], key=fn)
        # land exactly on a breakpoint when it ties with the refined point
        kink = min((float(k) for k in kinks), key=fn)
        out[i] = kink if fn(kink) <= fn(best) + KINK_TOL else best
    return out


def _generic_small(problem: Problem, reg: Regularizer, grid_step: float) -> np.ndarray:
    d = problem.dim
    if isinstance(reg, IndicatorRegularizer):
        # finite feasible set: enumerate it
        values = reg.target.values
        best = min(itertools.product(values, repeat=d), key=lambda p: problem.objective(np.array(p), reg))
        return np.array(best, dtype=np.float64)

    bound = reg.q_max
    axis = np.clip(np.arange(-bound, bound + 0.5 * grid_step, grid_step), -bound, bound)
    best_w, best_f = None, math.inf
    for point in itertools.product(axis, repeat=d):
        w = np.array(point)
        f = problem.objective(w, reg)
        if f < best_f:
            best_w, best_f = w, f

    w = best_w.copy()
    kinks = np.concatenate([-reg.q[::-1], reg.q[1:]])
    for _ in range(20):
        for i in range(d):

            def along(x: float, i=i) -> float:
                trial = w.copy()
                trial[i] = x
                return problem.objective(trial, reg)

            lo, hi = max(w[i] - grid_step, -bound), min(w[i] + grid_step, bound)
            candidates = [w[i], _trisect(along, lo, hi, iters=60)]
            candidates += [float(k) for k in kinks if lo <= k <= hi]
            w[i] = min(candidates, key=along)
    return w


def regularized_optimum(
    problem: Problem,
    reg: Optional[Regularizer] = None,
    grid_step: Optional[float] = None,
) -> Tuple[np.ndarray, float]:
    """
    Minimizer and minimum of F_lambda = f + lambda Psi.

    The separable quadratic is solved coordinate by coordinate: a 1-D grid
    search (step 1e-6 by default) over [-q_m, q_m], the breakpoints of Psi as
    extra candidates, and a trisection refinement around the best grid point.
    Other problems of dimension <= 2 use a coarser 2-D grid (1e-2 by
    default) followed by coordinate-wise trisection.

    Args:
        problem: Problem to solve
        reg: Regularizer; None means lambda = 0
        grid_step: Override the search step

    Returns:
        (w_star, F_star)

    Raises:
        OracleUnavailableError: for problems outside those classes
    """
    if grid_step is not None and not grid_step > 0:
        raise InvalidArgumentError(f"grid_step must be positive, got {grid_step}")

    if isinstance(problem, QuadraticProblem):
        c = problem.c
        if reg is None:
            w = c.copy()
        elif isinstance(reg, IndicatorRegularizer):
            w = hard_quantize(c, reg.target)
        elif isinstance(reg, ParRegularizer):
            w = _separable_par(c, reg, grid_step or GRID_STEP)
        else:
            raise OracleUnavailableError(f"no optimum oracle for regularizer {type(reg).__name__}")
    elif problem.dim <= MAX_GENERIC_DIM and reg is not None:
        logger.info("grid-searching optimum of {} in dimension {}", problem.kind, problem.dim)
        w = _generic_small(problem, reg, grid_step or COARSE_GRID_STEP)
    else:
        raise OracleUnavailableError(
            f"no optimum oracle for {problem.kind} problem of dimension {problem.dim}"
        )
    return w, problem.objective(w, reg)


def estimate_lipschitz(
    problem: Problem,
    reg: Optional[Regularizer] = None,
    samples: int = 64,
    radius: Optional[float] = None,
) -> float:
    """
    Estimate G for the step-size rule and the convergence bound.

    G = max stochastic-gradient norm over ``samples`` points drawn uniformly
    from the box [-r, r]^d, plus lambda * a_{m-1} * sqrt(d) for the
    regularizer. r defaults to q_m of the regularizer (1 without one).
    """
    if samples < 1:
        raise InvalidArgumentError(f"samples must be >= 1, got {samples}")
    if radius is None:
        radius = reg.grid().max_abs if reg is not None else 1.0
    gen = problem.rng.child(LIPSCHITZ_STREAM).generator()
    points = gen.uniform(-radius, radius, size=(samples, problem.dim))
    g_loss = max(float(np.linalg.norm(problem.stochastic_grad(w, 2 + i))) for i, w in enumerate(points))

    g_reg = 0.0
    if isinstance(reg, ParRegularizer):
        g_reg = reg.lam * float(reg.a[-1]) * math.sqrt(problem.dim)
    elif reg is not None:
        logger.debug("regularizer {} has no finite Lipschitz constant; using 0", type(reg).__name__)
    estimate = g_loss + g_reg
    logger.debug("Lipschitz estimate G={:.6g} (loss {:.6g}, regularizer {:.6g})", estimate, g_loss, g_reg)
    return estimate
