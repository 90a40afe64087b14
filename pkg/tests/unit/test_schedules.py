"""
Unit tests for step-size and inverse-slope schedules.
"""

import math

import numpy as np
import pytest
from pydantic import ValidationError

from parqlab.errors import DomainError
from parqlab.optim import SlopeSchedule, StepSchedule, schedule_eta, schedule_inv_slope


class TestStepSchedule:
    """Test step sizes."""

    def test_constant(self):
        """Test eta_t = base."""
        sched = StepSchedule(kind="constant", base=0.1)
        assert all(schedule_eta(sched, t) == 0.1 for t in (1, 7, 10_000))

    def test_inverse_sqrt(self):
        """Test eta_t = base / sqrt(t)."""
        sched = StepSchedule(kind="inverse-sqrt", base=0.4)
        assert schedule_eta(sched, 4) == pytest.approx(0.2)

    def test_multistep(self):
        """Test decay at each milestone."""
        sched = StepSchedule(kind="multistep", base=0.1, milestones=[80, 120, 150], decay=0.1)

        assert sched.eta(79) == pytest.approx(0.1)
        assert sched.eta(80) == pytest.approx(0.01)
        assert sched.eta(130) == pytest.approx(0.001)
        assert sched.eta(150) == pytest.approx(0.0001)

    def test_theorem_base(self):
        """Test the R / (2G) base."""
        sched = StepSchedule.theorem(radius=2.0, lipschitz=4.0)

        assert sched.kind == "inverse-sqrt"
        assert sched.eta(1) == pytest.approx(0.25)

    def test_inverse_sqrt_sum_diverges(self):
        """Test eta_t -> 0 while the partial sums keep growing."""
        sched = StepSchedule(kind="inverse-sqrt", base=1.0)
        etas = np.array([sched.eta(t) for t in range(1, 10_001)])

        assert np.all(etas > 0)
        assert etas[-1] < 0.011
        assert etas.sum() > 190

    def test_step_zero(self):
        """Test t < 1 is a domain error."""
        with pytest.raises(DomainError):
            StepSchedule().eta(0)

    def test_validation(self):
        """Test field and cross-field validation."""
        with pytest.raises(ValidationError):
            StepSchedule(base=0.0)
        with pytest.raises(ValidationError):
            StepSchedule(kind="multistep", milestones=[50, 10])
        with pytest.raises(ValidationError):
            StepSchedule(kind="constant", theorem_base=True)


class TestSlopeSchedule:
    """Test inverse-slope schedules."""

    def test_cosine_endpoints(self):
        """Test ~1 at t=1 and exactly 0 at T_sat."""
        sched = SlopeSchedule(kind="cosine", total_steps=100)

        assert sched.saturation_step == 93
        assert schedule_inv_slope(sched, 1) == pytest.approx(1.0, abs=1e-3)
        assert schedule_inv_slope(sched, 93) == 0.0
        assert schedule_inv_slope(sched, 100) == 0.0

    def test_sigmoid_midpoint(self):
        """Test the renormalized logistic is 1/2 halfway to saturation."""
        sched = SlopeSchedule(kind="sigmoid", total_steps=200, steepness=50, saturation_fraction=1.0)
        assert sched.inv_slope(100) == pytest.approx(0.5, abs=1e-12)

    @pytest.mark.parametrize("kind", ["cosine", "sigmoid"])
    def test_monotone_and_saturating(self, kind):
        """Test nonincreasing values in [0, 1] reaching 0 at ceil(0.93 T)."""
        sched = SlopeSchedule(kind=kind, total_steps=300)
        values = np.array([sched.inv_slope(t) for t in range(1, 301)])

        assert sched.saturation_step == 279
        assert np.all((values >= 0) & (values <= 1))
        assert np.all(np.diff(values) <= 0)
        assert values[277] > 0
        assert np.all(values[278:] == 0.0)

    def test_constant_and_hard(self):
        """Test the two degenerate kinds."""
        assert SlopeSchedule(kind="constant-one", total_steps=10).inv_slope(10) == 1.0
        assert SlopeSchedule(kind="hard", total_steps=10).inv_slope(1) == 0.0

    def test_slope(self):
        """Test rho = 1 / rho^{-1} with +inf at saturation."""
        sched = SlopeSchedule(kind="cosine", total_steps=10)

        assert sched.slope(10) == math.inf
        assert sched.slope(1) == pytest.approx(1.0 / sched.inv_slope(1))

    def test_out_of_range(self):
        """Test t outside [1, T] is a domain error."""
        sched = SlopeSchedule(total_steps=10)
        with pytest.raises(DomainError):
            sched.inv_slope(0)
        with pytest.raises(DomainError):
            sched.inv_slope(11)
