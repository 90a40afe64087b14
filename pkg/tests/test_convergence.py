"""
Desk-scale convergence checks.

These runs take tens of seconds each; deselect with ``-m "not slow"``.
"""

import numpy as np
import pytest

from parqlab.harness import check_bound, compare_methods, run, validate_config

pytestmark = pytest.mark.slow

GRID = [-0.4, -0.2, 0.0, 0.2, 0.4]
CENTER = [0.0, 0.4, -0.4, 0.0, 0.4]


def quadratic(name, optimizer, total_steps, seeds, step_schedule=None, **extra):
    return validate_config({
        "name": name,
        "problem": {"kind": "quadratic", "c": CENTER, "noise_sigma": 0.5, "seed": 7},
        "optimizer": optimizer,
        "step_schedule": step_schedule or {"kind": "inverse-sqrt", "theorem_base": True},
        "total_steps": total_steps,
        "seeds": list(seeds),
        **extra,
    })


def mlp(name, optimizer, total_steps=2000, init_scale=0.2, **extra):
    return validate_config({
        "name": name,
        "problem": {"kind": "mlp", "hidden_width": 32, "seed": 3, "init_scale": init_scale},
        "optimizer": {"momentum": 0.9, **optimizer},
        "step_schedule": {"kind": "constant", "base": 0.1},
        "slope_schedule": {"kind": "cosine"},
        "total_steps": total_steps,
        "seeds": [0],
        "eval_every": 10,
        **extra,
    })


class TestLastIterateBound:
    """Test the seed-averaged gap stays under G R (2 + 1.5 ln t) / sqrt(t)."""

    def test_aprox_last_and_average_iterate(self, tmp_path):
        """Test AProx with the R / (2G) step base over 10^4 steps and 20 seeds."""
        config = quadratic("aprox", {"kind": "aprox", "grid": GRID, "lam": 0.3}, 10_000, range(20))
        result = run(config, out_root=tmp_path)
        ctx = result.context

        last = check_bound(list(result.traces.values()), G=ctx.G, R=ctx.R)
        assert last.n_seeds == 20
        assert not last.violated

        average = check_bound(list(result.average_traces.values()), G=ctx.G, R=ctx.R)
        assert not average.violated

    def test_sgd_without_regularizer(self, tmp_path):
        """Test plain SGD on the unregularized quadratic stays under the same envelope."""
        config = quadratic("sgd", {"kind": "sgd"}, 5_000, range(20))
        result = run(config, out_root=tmp_path)

        report = check_bound(list(result.traces.values()), G=result.context.G, R=result.context.R)
        assert not report.violated
        gaps = report.frame["gap_mean"].to_numpy()
        assert gaps[-1] < gaps[0]


class TestQuantizationPersistence:
    """Test AProx keeps its iterates on the grid while Prox-SGD does not."""

    def test_aprox_vs_prox_sgd(self, tmp_path):
        """Test final quantized fractions and their gap as the horizon grows from 10^3 to 10^5."""
        step = {"kind": "inverse-sqrt", "base": 0.5}
        optimizer = {"grid": GRID, "lam": 0.3}
        gaps = []
        for T in (1_000, 10_000, 100_000):
            aprox = run(quadratic(f"aprox-{T}", {"kind": "aprox", **optimizer}, T, range(10), step), out_root=tmp_path)
            prox = run(quadratic(f"prox-{T}", {"kind": "prox-sgd", **optimizer}, T, range(10), step), out_root=tmp_path)

            aprox_fraction = aprox.summary["quantized_fraction_mean"].iloc[-1]
            prox_fraction = prox.summary["quantized_fraction_mean"].iloc[-1]
            assert aprox_fraction >= 0.8 - 1e-6, T
            assert prox_fraction <= 0.2, T
            gaps.append(aprox_fraction - prox_fraction)

        assert np.all(np.diff(gaps) >= -1e-9), gaps


class TestIndicatorEquivalence:
    """Test AProx with the grid indicator retraces BinaryConnect exactly."""

    def test_logistic_trajectories(self, tmp_path):
        """Test bit-identical final iterates and losses over 10^4 steps and 5 seeds."""
        problem = {"kind": "logistic", "n_samples": 256, "d": 6, "seed": 2}
        common = {"problem": problem, "total_steps": 10_000, "seeds": [0, 1, 2, 3, 4],
                  "step_schedule": {"kind": "inverse-sqrt", "base": 0.5}}
        grid = [-1.0, 0.0, 1.0]
        aprox = run(validate_config({**common, "name": "aprox", "optimizer": {"kind": "aprox", "grid": grid, "indicator": True}}), out_root=tmp_path)
        bc = run(validate_config({**common, "name": "bc", "optimizer": {"kind": "binaryconnect", "grid": grid}}), out_root=tmp_path)

        for seed in common["seeds"]:
            np.testing.assert_array_equal(aprox.final_w[seed], bc.final_w[seed])
            np.testing.assert_array_equal(aprox.traces[seed].frame["train_loss"], bc.traces[seed].frame["train_loss"])


class TestMLPComparison:
    """Test STE, BinaryRelax, PARQ and full precision on the two-moons MLP."""

    @pytest.fixture(scope="class")
    def comparison(self, tmp_path_factory):
        out = tmp_path_factory.mktemp("compare") / "moons.csv"
        configs = [
            mlp("fp", {"kind": "sgd"}, quantized_tol=0.0),
            mlp("ste", {"kind": "binaryconnect", "bits": 2}, quantized_tol=0.0),
            mlp("binaryrelax", {"kind": "binaryrelax", "bits": 2}, quantized_tol=0.0),
            mlp("parq", {"kind": "parq", "bits": 2}, quantized_tol=0.0),
        ]
        return compare_methods(configs, out)

    def test_full_precision_learns(self, comparison):
        """Test the baseline separates the moons."""
        assert comparison.frame["fp.eval_metric"].iloc[-1] >= 0.9

    def test_quantizing_methods_end_on_grid(self, comparison):
        """Test every quantized group is exactly on its grid at step T."""
        for name in ("ste", "binaryrelax", "parq"):
            assert comparison.frame[f"{name}.quantized_fraction"].iloc[-1] == 1.0

    def test_parq_accuracy_close_to_full_precision(self, comparison):
        """Test 2-bit PARQ loses at most 10 accuracy points."""
        frame = comparison.frame
        assert frame["parq.eval_metric"].iloc[-1] >= frame["fp.eval_metric"].iloc[-1] - 0.10

    def test_parq_follows_full_precision_early(self, comparison):
        """Test PARQ's train loss is within 5% of FP while the soft map is widest."""
        frame = comparison.frame
        early = frame[frame["step"] <= 30]

        assert (early["parq.inv_slope"] > 0.99).all()
        np.testing.assert_allclose(early["parq.train_loss"], early["fp.train_loss"], rtol=0.05)

    def test_grid_summary_structure(self, comparison):
        """Test one grid-evolution row per method."""
        summary = comparison.grid_summary

        assert list(summary["method"]) == ["fp", "ste", "binaryrelax", "parq"]
        assert set(summary.columns) >= {"third_1", "third_2", "third_3", "pattern", "expand_then_contract"}
        assert summary.set_index("method").loc["parq", "pattern"].count(",") == 2


class TestGridEvolution:
    """Test LSBQ grid magnitudes from a small initialization."""

    def test_grid_keeps_expanding_on_moons(self, tmp_path):
        """Test max |q| grows through every third; the separable moons never pull it back."""
        config = mlp("parq-small", {"kind": "parq", "bits": 2}, init_scale=0.1)
        result = compare_methods([config], tmp_path / "evolution.csv")
        row = result.grid_summary.iloc[0]

        assert row["third_1"] > 0
        assert row["pattern"] == "+,+,+"
        assert not row["expand_then_contract"]
