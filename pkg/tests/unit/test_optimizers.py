"""
Unit tests for optimizer steps, state bookkeeping and the grouped driver.
"""

import math

import numpy as np
import pytest

from parqlab.core import (
    IndicatorRegularizer,
    ProxKind,
    QuantGrid,
    estimate_grid,
    hard_quantize,
    par_from_grid,
    prox,
)
from parqlab.errors import DomainError, InvalidArgumentError, ShapeMismatchError
from parqlab.optim import (
    GroupedOptimizer,
    OptimizerState,
    ParamGroup,
    aprox_step,
    average_iterate,
    binaryconnect_step,
    binaryrelax_step,
    parq_step,
    prox_sgd_step,
    sgd_step,
)

BINARY = QuantGrid.from_values([-1.0, 1.0])
BINARY2 = QuantGrid.from_values([-2.0, 2.0])


def state_at(u, w=None) -> OptimizerState:
    state = OptimizerState.init(u)
    if w is not None:
        state.w = np.array(w, dtype=np.float64)
    return state


class TestSgdStep:
    """Test plain SGD."""

    def test_examples(self):
        """Test documented arithmetic."""
        assert sgd_step(state_at([1.0]), [2.0], 0.5).w.tolist() == [0.0]
        assert sgd_step(state_at([0.3]), [0.0], 0.5).w.tolist() == [0.3]

        state = state_at([0.0])
        sgd_step(state, [1.0], 1.0)
        sgd_step(state, [-1.0], 1.0)
        assert state.w.tolist() == [0.0]

    def test_rejects_bad_eta(self):
        """Test eta must be positive and finite."""
        for eta in (0.0, -1.0, math.inf, math.nan):
            with pytest.raises(InvalidArgumentError):
                sgd_step(state_at([0.0]), [1.0], eta)

    def test_shape_mismatch(self):
        """Test gradient shape must match."""
        with pytest.raises(ShapeMismatchError):
            sgd_step(state_at([0.0, 1.0]), [1.0], 0.1)


class TestProxSgdStep:
    """Test Prox-SGD."""

    def test_example(self, grid3):
        """Test the slanted-segment shift eta * lambda * a_0."""
        reg = par_from_grid(grid3, 1.0)
        state = prox_sgd_step(state_at([0.8]), [0.0], 0.1, reg)

        assert state.u.tolist() == [0.8]
        assert state.w[0] == pytest.approx(0.75)

    def test_grid_value_is_kept(self, grid3):
        """Test 0 stays put with a_0 > 0."""
        state = prox_sgd_step(state_at([0.0]), [0.0], 0.01, par_from_grid(grid3, 1.0))
        assert state.w.tolist() == [0.0]

    def test_small_step_is_nearly_sgd(self, grid5):
        """Test eta -> 0 approaches w - eta grad."""
        reg = par_from_grid(grid5, 1.0)
        w0, grad, eta = np.array([0.6, -1.7]), np.array([0.3, -0.2]), 1e-7
        state = prox_sgd_step(state_at(w0), grad, eta, reg)

        np.testing.assert_allclose(state.w, w0 - eta * grad, atol=1e-6)

    def test_steps_from_w(self, grid3):
        """Test the latent point restarts from w, not from u."""
        reg = par_from_grid(grid3, 1.0)
        state = state_at([5.0], w=[1.0])
        prox_sgd_step(state, [0.0], 0.1, reg)

        assert state.u.tolist() == [1.0]


class TestAproxStep:
    """Test AProx."""

    def test_example(self, grid3):
        """Test the prox scale uses gamma after the step."""
        reg = par_from_grid(grid3, 1.0)
        state = aprox_step(state_at([0.2]), [0.0], 1.0, reg)

        assert state.gamma == 1.0
        assert state.w.tolist() == [0.0]
        assert state.last_prox.scale == pytest.approx(1.0)

    def test_latent_accumulates_raw_gradients(self, grid3, rng):
        """Test u = u0 - sum eta_s g_s regardless of w."""
        reg = par_from_grid(grid3, 0.5)
        state = state_at(np.zeros(4))
        total = np.zeros(4)
        for t in range(1, 21):
            g = rng.normal(size=4)
            eta = 0.3 / math.sqrt(t)
            aprox_step(state, g, eta, reg)
            total += eta * g

        np.testing.assert_allclose(state.u, -total)
        np.testing.assert_allclose(state.w, prox(reg, reg.prox_scale(state.gamma), state.u))

    def test_indicator_is_binaryconnect(self, grid3, rng):
        """Test AProx with the grid indicator reproduces BinaryConnect."""
        reg = IndicatorRegularizer(grid3)
        a = state_at(np.zeros(6))
        b = state_at(np.zeros(6))
        for t in range(1, 31):
            g = rng.normal(size=6)
            eta = 0.2 / math.sqrt(t)
            aprox_step(a, g, eta, reg)
            binaryconnect_step(b, g, eta, grid=grid3)

            np.testing.assert_array_equal(a.u, b.u)
            np.testing.assert_array_equal(a.w, b.w)


class TestBinaryConnectStep:
    """Test BinaryConnect / STE."""

    def test_examples(self):
        """Test documented arithmetic."""
        state = binaryconnect_step(state_at([0.4]), [-0.2], 1.0, grid=BINARY)
        assert state.u[0] == pytest.approx(0.6)
        assert state.w.tolist() == [1.0]

        state = binaryconnect_step(state_at([-0.1]), [0.2], 1.0, grid=BINARY)
        assert state.u[0] == pytest.approx(-0.3)
        assert state.w.tolist() == [-1.0]

        state = binaryconnect_step(state_at([0.4]), [0.0], 1.0, grid=BINARY)
        assert state.u.tolist() == [0.4]
        assert state.w.tolist() == [1.0]

    def test_online_grid(self):
        """Test the LSBQ grid is estimated when no grid is fixed."""
        state = binaryconnect_step(state_at([1.0, -3.0]), [0.0, 0.0], 1.0, bits=1)

        assert state.grids == (BINARY2,)
        assert state.w.tolist() == [2.0, -2.0]


class TestSoftSteps:
    """Test PARQ and BinaryRelax."""

    def test_parq_examples(self):
        """Test rho = 1 is clipping and rho = inf is hard quantization."""
        state = parq_step(state_at([1.0, -3.0]), [0.0, 0.0], 1.0, slope=1.0, bits=1)
        assert state.grids == (BINARY2,)
        np.testing.assert_allclose(state.w, [1.0, -2.0])

        state = parq_step(state_at([1.0, -3.0]), [0.0, 0.0], 1.0, slope=math.inf, bits=1)
        assert state.w.tolist() == [2.0, -2.0]
        assert state.last_prox.kind is ProxKind.HARD

    def test_binaryrelax_examples(self):
        """Test the convex-combination formula."""
        u = [1.0, -3.0]
        np.testing.assert_allclose(binaryrelax_step(state_at(u), [0.0, 0.0], 1.0, 0.0, 1).w, [1.0, -3.0])
        np.testing.assert_allclose(binaryrelax_step(state_at(u), [0.0, 0.0], 1.0, 1.0, 1).w, [1.5, -2.5])
        np.testing.assert_allclose(binaryrelax_step(state_at(u), [0.0, 0.0], 1.0, math.inf, 1).w, [2.0, -2.0])

    def test_rejects_bad_bits(self):
        """Test bits validation."""
        with pytest.raises(InvalidArgumentError):
            parq_step(state_at([1.0]), [0.0], 1.0, slope=1.0, bits=0)

    def test_grid_kept_between_refreshes(self):
        """Test refresh=False reuses the previous grid."""
        state = parq_step(state_at([1.0, -3.0]), [0.0, 0.0], 1.0, slope=2.0, bits=1)
        parq_step(state, [-10.0, 10.0], 1.0, slope=2.0, bits=1, refresh=False)

        assert state.grids == (BINARY2,)

    def test_per_row_grids(self):
        """Test one LSBQ grid per row."""
        group = ParamGroup(name="layer", shape=(2, 2), granularity="per-row", bits=1)
        state = state_at([[1.0, -1.0], [3.0, -3.0]])
        binaryrelax_step(state, np.zeros((2, 2)), 1.0, math.inf, 1, group=group)

        assert state.grids == (BINARY, QuantGrid.from_values([-3.0, 3.0]))
        np.testing.assert_array_equal(state.w, [[1.0, -1.0], [3.0, -3.0]])

    @pytest.mark.parametrize("step", [parq_step, binaryrelax_step])
    def test_w_is_prox_of_u(self, step, rng):
        """Test w equals the recorded map applied to u after every step."""
        state = state_at(rng.normal(size=12))
        for t in range(1, 16):
            step(state, rng.normal(size=12), 0.1, slope=1.0 + t, bits=2)
            np.testing.assert_array_equal(state.w, state.last_prox(state.u))
            assert state.grids == (estimate_grid(state.u, 2),)


class TestStateBookkeeping:
    """Test gamma and the weighted average."""

    def test_gamma_is_sum_of_steps(self, grid3, rng):
        """Test gamma equals the exact running sum of step sizes."""
        state = state_at(np.zeros(3))
        etas = [0.5 / math.sqrt(t) for t in range(1, 26)]
        for eta in etas:
            aprox_step(state, rng.normal(size=3), eta, par_from_grid(grid3, 1.0))

        assert state.t == 25
        assert state.gamma == pytest.approx(sum(etas), rel=1e-12)

    def test_average_examples(self):
        """Test documented weighted averages."""
        state = state_at([0.0])
        sgd_step(state, [-1.0], 1.0)
        np.testing.assert_allclose(average_iterate(state), state.w)

        state = state_at([0.0])
        sgd_step(state, [-1.0], 1.0)
        sgd_step(state, [-1.5], 2.0)
        np.testing.assert_allclose(state.w, [4.0])
        np.testing.assert_allclose(average_iterate(state), [3.0])

    def test_average_pairs_eta_with_post_update_iterate(self):
        """Test the starting point is excluded and each eta weights the iterate its step produced."""
        state = state_at([10.0])
        sgd_step(state, [10.0], 1.0)
        np.testing.assert_allclose(average_iterate(state), [0.0])

        sgd_step(state, [-2.0], 3.0)
        np.testing.assert_allclose(state.w, [6.0])
        np.testing.assert_allclose(average_iterate(state), [(1.0 * 0.0 + 3.0 * 6.0) / 4.0])

    def test_alternating_average(self):
        """Test w alternating +1/-1 with constant eta averages to 0."""
        state = state_at([0.0])
        sgd_step(state, [-1.0], 1.0)
        for k in range(9):
            sgd_step(state, [2.0 if state.w[0] > 0 else -2.0], 1.0)

        np.testing.assert_allclose(average_iterate(state), [0.0], atol=1e-12)

    def test_average_before_first_step(self):
        """Test t = 0 is a domain error."""
        with pytest.raises(DomainError):
            average_iterate(state_at([1.0]))


class TestParamGroup:
    """Test parameter group validation."""

    def test_per_row_requires_matrix(self):
        """Test per-row granularity on a flat shape."""
        with pytest.raises(InvalidArgumentError):
            ParamGroup(name="w", shape=(4,), granularity="per-row")

    def test_slice(self):
        """Test size and slice."""
        group = ParamGroup(name="w", shape=(2, 3), offset=4)
        assert group.size == 6
        assert group.slice == slice(4, 10)

    def test_invalid_bits(self):
        """Test bits validation."""
        with pytest.raises(InvalidArgumentError):
            ParamGroup(name="w", shape=(2,), bits=0)


class TestGroupedOptimizer:
    """Test the multi-group driver."""

    @pytest.fixture
    def groups(self):
        return [
            ParamGroup(name="weight", shape=(2, 2), offset=0, granularity="per-row", bits=1),
            ParamGroup(name="bias", shape=(2,), offset=4, quantize=False),
        ]

    def test_layout_must_cover_vector(self):
        """Test overlapping groups are refused."""
        groups = [ParamGroup(name="a", shape=(3,), offset=0), ParamGroup(name="b", shape=(3,), offset=1)]
        with pytest.raises(InvalidArgumentError):
            GroupedOptimizer("sgd", groups)

    def test_prox_methods_need_regularizer(self, groups):
        """Test prox-sgd and aprox without a regularizer."""
        with pytest.raises(InvalidArgumentError):
            GroupedOptimizer("aprox", groups)

    def test_unknown_method(self, groups):
        """Test the method name is validated."""
        with pytest.raises(InvalidArgumentError):
            GroupedOptimizer("adam", groups)

    def test_full_precision_group_takes_sgd_steps(self, groups):
        """Test the bias follows SGD while the weight is quantized per row."""
        opt = GroupedOptimizer("parq", groups)
        opt.init([1.0, -1.0, 3.0, -3.0, 0.25, -0.25])
        w = opt.step(np.array([0.0, 0.0, 0.0, 0.0, 1.0, -1.0]), 0.1, slope=math.inf)

        np.testing.assert_allclose(w, [1.0, -1.0, 3.0, -3.0, 0.15, -0.15])
        assert opt.t == 1
        assert opt.quantized_fraction() == 1.0
        np.testing.assert_array_equal(opt.tracked_levels(), [1.0])

    def test_gradient_size(self, groups):
        """Test flat gradient size is checked."""
        opt = GroupedOptimizer("sgd", groups)
        opt.init(np.zeros(6))
        with pytest.raises(ShapeMismatchError):
            opt.step(np.zeros(5), 0.1)

    def test_step_before_init(self, groups):
        """Test stepping an uninitialized optimizer."""
        with pytest.raises(InvalidArgumentError):
            GroupedOptimizer("sgd", groups).step(np.zeros(6), 0.1)

    def test_momentum(self):
        """Test the heavy-ball buffer."""
        opt = GroupedOptimizer("sgd", [ParamGroup(name="w", shape=(1,))], momentum=0.5)
        opt.init([0.0])
        opt.step([1.0], 1.0)
        opt.step([1.0], 1.0)

        np.testing.assert_allclose(opt.w, [-2.5])

    def test_coupled_weight_decay(self):
        """Test wd * w is added to the gradient."""
        opt = GroupedOptimizer("sgd", [ParamGroup(name="w", shape=(1,))], weight_decay=0.5)
        opt.init([2.0])
        opt.step([0.0], 0.1)

        np.testing.assert_allclose(opt.w, [1.9])

    def test_decoupled_weight_decay_shrinks_latent(self):
        """Test decoupled decay scales u before the quantized step."""
        opt = GroupedOptimizer(
            "binaryconnect", [ParamGroup(name="w", shape=(1,))], grid=BINARY, weight_decay=1.0, decoupled_weight_decay=True
        )
        opt.init([0.5])
        opt.step([0.0], 0.5)

        np.testing.assert_allclose(opt.u, [0.25])
        np.testing.assert_array_equal(opt.w, [1.0])

    def test_decoupled_weight_decay_floors_at_zero(self):
        """Test eta * wd > 1 zeroes the weights without flipping their sign."""
        opt = GroupedOptimizer("sgd", [ParamGroup(name="w", shape=(2,))], weight_decay=1.0, decoupled_weight_decay=True)
        opt.init([2.0, -3.0])
        opt.step([0.0, 0.0], 2.0)
        np.testing.assert_array_equal(opt.w, [0.0, 0.0])

        opt = GroupedOptimizer(
            "binaryconnect", [ParamGroup(name="w", shape=(1,))], grid=BINARY, weight_decay=1.0, decoupled_weight_decay=True
        )
        opt.init([-0.5])
        opt.step([0.0], 3.0)
        np.testing.assert_array_equal(opt.u, [0.0])

    def test_grid_refresh_cadence(self):
        """Test the LSBQ grid is only re-estimated every k steps."""
        opt = GroupedOptimizer("binaryconnect", [ParamGroup(name="w", shape=(2,), bits=1)], grid_refresh_every=2)
        opt.init([1.0, -3.0])
        opt.step([0.0, 0.0], 1.0)
        opt.step([-2.0, 2.0], 1.0)
        assert opt.states["w"].grids == (BINARY2,)

        opt.step([0.0, 0.0], 1.0)
        assert opt.states["w"].grids == (QuantGrid.from_values([-4.0, 4.0]),)

    def test_aprox_quantized_fraction_uses_regularizer_grid(self, grid3):
        """Test the diagnostic measures against the PAR target set."""
        reg = par_from_grid(grid3, 1.0)
        opt = GroupedOptimizer("aprox", [ParamGroup(name="w", shape=(3,))], reg=reg)
        opt.init([0.0, 0.0, 0.0])
        opt.step([-0.1, -5.0, 0.0], 1.0)

        assert opt.quantized_fraction() == 1.0
        np.testing.assert_array_equal(opt.w, hard_quantize(opt.w, grid3))

    def test_sgd_quantized_fraction_against_lsbq(self):
        """Test plain SGD is measured against the LSBQ grid of its iterate."""
        opt = GroupedOptimizer("sgd", [ParamGroup(name="w", shape=(2,), bits=1)])
        opt.init([2.0, -2.0])

        assert opt.quantized_fraction() == 1.0
        assert opt.quantized_fraction(w=[2.0, -1.0]) == 0.0

    def test_average_iterate(self):
        """Test the flat average across groups."""
        groups = [ParamGroup(name="a", shape=(1,)), ParamGroup(name="b", shape=(1,), offset=1)]
        opt = GroupedOptimizer("sgd", groups)
        opt.init([0.0, 0.0])
        opt.step([-1.0, 1.0], 1.0)
        opt.step([-1.5, 1.5], 2.0)

        np.testing.assert_allclose(opt.average_iterate(), [3.0, -3.0])
