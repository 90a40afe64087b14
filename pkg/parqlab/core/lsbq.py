"""
Least-squares binary quantization (LSBQ).

Approximates a vector u by sums of scaled signs, w_i = sum_j v_j s_j(u_i),
with v_1 >= ... >= v_n >= 0. Exact solutions exist for 1 bit and for the
ternary case; n >= 2 uses the greedy foldable algorithm. A brute-force
solver is kept for small problems so the fast paths can be checked.
"""

import itertools
from dataclasses import dataclass
from typing import Tuple, Union

import numpy as np
from loguru import logger

from parqlab.core.quantgrid import QuantGrid, hard_quantize
from parqlab.errors import InvalidArgumentError

Bits = Union[int, str]

TERNARY = "ternary"
MAX_BRUTEFORCE_DIM = 8
MAX_BITS = 8


@dataclass(frozen=True)
class ScaleVector:
    """
    Nonincreasing nonnegative scales v_1 >= ... >= v_n >= 0.

    Attributes:
        v: Scales
        bits: Number of scales n
    """

    v: Tuple[float, ...]
    bits: int

    def __post_init__(self):
        v = tuple(float(x) for x in self.v)
        if self.bits < 1 or len(v) != self.bits:
            raise InvalidArgumentError(f"ScaleVector needs {self.bits} >= 1 scales, got {len(v)}")
        if any(x < 0 for x in v) or any(v[j] < v[j + 1] for j in range(len(v) - 1)):
            raise InvalidArgumentError(f"scales must be nonincreasing and nonnegative, got {v}")
        object.__setattr__(self, "v", v)

    def as_array(self) -> np.ndarray:
        return np.asarray(self.v, dtype=np.float64)


def _check_nonempty(u) -> np.ndarray:
    u = np.asarray(u, dtype=np.float64).reshape(-1)
    if u.size == 0:
        raise InvalidArgumentError("LSBQ needs a non-empty vector")
    return u


def _sign(x: np.ndarray) -> np.ndarray:
    # sgn(0) := +1
    return np.where(x >= 0, 1.0, -1.0)


def lsbq_1bit(u) -> ScaleVector:
    """Optimal 1-bit scale: v_1 = ||u||_1 / d."""
    u = _check_nonempty(u)
    return ScaleVector(v=(float(np.mean(np.abs(u))),), bits=1)


def lsbq_ternary(u) -> Tuple[float, np.ndarray]:
    """
    Optimal ternary quantization u ~ q * s with s in {-1, 0, 1}.

    Keeps the k* largest magnitudes, where k* maximizes (sum of top-k |u|)^2 / k.

    Returns:
        (q, s): scale and assignment vector
    """
    u = _check_nonempty(u)
    mags = np.abs(u)
    order = np.argsort(-mags, kind="stable")
    csum = np.cumsum(mags[order])
    k = np.arange(1, u.size + 1)
    best = int(np.argmax(csum**2 / k))
    k_star = best + 1
    q = float(csum[best] / k_star)
    s = np.zeros_like(u)
    top = order[:k_star]
    s[top] = np.sign(u[top])
    return q, s


def lsbq_greedy(u, bits: int) -> ScaleVector:
    """
    Greedy foldable LSBQ.

    Step j fits v_j = mean |r| to the running residual r with s_j = sgn(r).
    If the scales come out increasing they are sorted, which keeps the grid
    (all +-v_1 +- ... +- v_n) unchanged.
    """
    if bits < 1:
        raise InvalidArgumentError(f"bits must be >= 1, got {bits}")
    u = _check_nonempty(u)
    residual = u.copy()
    scales = []
    for _ in range(bits):
        v = float(np.mean(np.abs(residual)))
        residual = residual - v * _sign(residual)
        scales.append(v)
    if any(scales[j] < scales[j + 1] for j in range(bits - 1)):
        logger.debug("greedy LSBQ produced increasing scales {}; sorting", scales)
        scales.sort(reverse=True)
    return ScaleVector(v=tuple(scales), bits=bits)


def lsbq_reconstruct(u, scales: ScaleVector) -> np.ndarray:
    """Foldable reconstruction sum_j v_j s_j(u) with s_j = sgn(running residual)."""
    u = np.asarray(u, dtype=np.float64)
    residual = u.copy()
    recon = np.zeros_like(u)
    for v in scales.v:
        step = v * _sign(residual)
        recon += step
        residual -= step
    return recon


def grid_from_scales(scales: ScaleVector) -> QuantGrid:
    """All 2^n signed combinations +-v_1 +- ... +- v_n, deduplicated."""
    v = scales.as_array()
    signs = np.array(list(itertools.product((-1.0, 1.0), repeat=v.size)))
    return QuantGrid.from_values(signs @ v, symmetric=True)


def lsbq_error(u, scales: ScaleVector) -> float:
    """Squared error of nearest-value assignment onto the scales' grid."""
    u = np.asarray(u, dtype=np.float64)
    return float(np.sum((u - hard_quantize(u, grid_from_scales(scales))) ** 2))


def _sign_patterns(alphabet, d: int) -> np.ndarray:
    return np.array(list(itertools.product(alphabet, repeat=d)), dtype=np.float64)


def _best_ray(patterns: np.ndarray, u: np.ndarray):
    # min over t >= 0 of ||u - t * p||^2 per row p
    norms = np.sum(patterns**2, axis=1)
    proj = patterns @ u
    with np.errstate(divide="ignore", invalid="ignore"):
        t = np.where(norms > 0, np.maximum(proj, 0.0) / norms, 0.0)
    err = np.sum(u**2) - 2 * t * proj + t**2 * norms
    return t, err


def _bruteforce_two_scales(u: np.ndarray) -> ScaleVector:
    d = u.size
    combos = np.array([[1.0, 1.0], [1.0, -1.0], [-1.0, 1.0], [-1.0, -1.0]])
    choice = np.array(list(itertools.product(range(4), repeat=d)))
    s1 = combos[choice, 0]
    s2 = combos[choice, 1]
    base = np.sum(u**2)

    def objective(v1, v2):
        diff = u[None, :] - v1[:, None] * s1 - v2[:, None] * s2
        return np.sum(diff**2, axis=1)

    candidates = []

    # interior stationary point of the 2x2 normal equations
    c = np.sum(s1 * s2, axis=1)
    r1, r2 = s1 @ u, s2 @ u
    det = d * d - c * c
    with np.errstate(divide="ignore", invalid="ignore"):
        v1 = np.where(det != 0, (d * r1 - c * r2) / det, 0.0)
        v2 = np.where(det != 0, (d * r2 - c * r1) / det, 0.0)
    feasible = (det != 0) & (v1 >= v2) & (v2 >= 0)
    err = np.where(feasible, objective(v1, v2), np.inf)
    candidates.append((err, v1, v2))

    # boundary v_2 = 0
    t, err = _best_ray(s1, u)
    candidates.append((err, t, np.zeros_like(t)))

    # boundary v_1 = v_2
    t, err = _best_ray(s1 + s2, u)
    candidates.append((err, t, t))

    errs = np.stack([c_[0] for c_ in candidates])
    which = np.unravel_index(np.argmin(errs), errs.shape)
    _, v1_best, v2_best = candidates[which[0]]
    best_v1 = float(max(v1_best[which[1]], 0.0))
    best_v2 = float(max(v2_best[which[1]], 0.0))
    logger.debug("bruteforce 2-scale LSBQ error {:.3e} (base {:.3e})", errs[which], base)
    return ScaleVector(v=(best_v1, best_v2), bits=2)


def lsbq_bruteforce(u, bits: int, ternary: bool = False) -> ScaleVector:
    """
    Exhaustive LSBQ for tiny problems (test oracle).

    Enumerates every per-element sign assignment and solves the induced
    ordered least-squares problem for the scales.

    Args:
        u: Vector with at most 8 entries
        bits: 1 or 2
        ternary: Search s in {-1, 0, 1} with v_1 = v_2 instead (bits ignored)

    Returns:
        Optimal scales; the ternary optimum q is returned as v = (q/2, q/2)
    """
    u = _check_nonempty(u)
    if u.size > MAX_BRUTEFORCE_DIM:
        raise InvalidArgumentError(f"bruteforce LSBQ supports d <= {MAX_BRUTEFORCE_DIM}, got {u.size}")
    if ternary:
        patterns = _sign_patterns((-1.0, 0.0, 1.0), u.size)
        t, err = _best_ray(patterns, u)
        q = float(t[int(np.argmin(err))])
        return ScaleVector(v=(q / 2, q / 2), bits=2)
    if bits == 1:
        patterns = _sign_patterns((-1.0, 1.0), u.size)
        t, err = _best_ray(patterns, u)
        return ScaleVector(v=(float(t[int(np.argmin(err))]),), bits=1)
    if bits == 2:
        return _bruteforce_two_scales(u)
    raise InvalidArgumentError(f"bruteforce LSBQ supports bits <= 2, got {bits}")


def estimate_grid(u, bits: Bits) -> QuantGrid:
    """
    Quantization grid estimated from ``u`` by LSBQ.

    Args:
        u: Weights (flattened)
        bits: Number of bits (1..8) or "ternary"
    """
    u = np.asarray(u, dtype=np.float64).reshape(-1)
    if bits == TERNARY:
        q, _ = lsbq_ternary(u)
        return QuantGrid.from_values([-q, 0.0, q], symmetric=True)
    if not isinstance(bits, (int, np.integer)) or not 1 <= bits <= MAX_BITS:
        raise InvalidArgumentError(f"bits must be an integer in [1, {MAX_BITS}] or 'ternary', got {bits!r}")
    scales = lsbq_1bit(u) if bits == 1 else lsbq_greedy(u, int(bits))
    return grid_from_scales(scales)
