"""Softmin/BCE learning of the perturbation parameter."""

import math

import numpy as np
import pytest

from polarflip.decoders import TrainingBatch
from polarflip.trainer import (EPS, TrainerState, bce_loss, exp_taylor,
                               init_theta, loss_gradient, score_weights,
                               softmin)


class TestTruncatedExponential:
    def test_pinned_values(self):
        assert exp_taylor(np.array(0.0)) == pytest.approx(1.0)
        assert exp_taylor(np.array(-1.0), terms=3) == pytest.approx(1 / 3)
        assert exp_taylor(np.array(2.0), terms=3) == pytest.approx(
            1 + 2 + 2 + 8 / 6)

    def test_floor_at_zero(self):
        # 1 - 4 + 8 - 64/6 < 0 clips exactly to 0.
        assert exp_taylor(np.array(-4.0), terms=3) == 0.0
        assert (exp_taylor(np.linspace(-50, -4, 20), terms=3) == 0.0).all()

    def test_more_terms_approach_exp(self):
        x = np.linspace(-2, 2, 9)
        err3 = np.abs(exp_taylor(x, 3) - np.exp(x)).max()
        err9 = np.abs(exp_taylor(x, 9) - np.exp(x)).max()
        assert err9 < err3


class TestScoreWeights:
    def test_masks_non_finite(self):
        Q = np.array([0.0, np.inf, 1.0, np.nan])
        w = score_weights(Q)
        assert w[1] == 0.0 and w[3] == 0.0
        assert w[0] == pytest.approx(1.0)

    def test_exact_mode(self):
        Q = np.array([0.5, 2.0])
        assert score_weights(Q, exact=True) == pytest.approx(
            np.exp(-Q).tolist())

    def test_softmin_normalizes(self):
        p = softmin(np.array([0.0, 1.0, np.inf]))
        assert p.sum() == pytest.approx(1.0)
        assert p[0] > p[1] and p[2] == 0.0

    def test_softmin_zero_row(self):
        p = softmin(np.array([50.0, 60.0]))  # both weights clip to 0
        assert (p == 0.0).all()


class TestBce:
    def test_perfect_prediction(self):
        assert bce_loss(np.array([1.0, 0.0]), 0) == pytest.approx(0.0)

    def test_worst_case_floors_at_eps(self):
        want = -2.0 * math.log(EPS)
        assert bce_loss(np.array([1.0, 0.0]), 1) == pytest.approx(want)

    def test_penalizes_wrong_mass(self):
        a = bce_loss(np.array([0.8, 0.2]), 0)
        b = bce_loss(np.array([0.6, 0.4]), 0)
        assert a < b


class TestGradient:
    def test_matches_finite_differences(self):
        # Samples follow the linear local model Q(theta + h) = Q + h dQ,
        # which is exactly how the recorded derivative enters the loss.
        rng = np.random.default_rng(50)
        h = 1e-5
        worst = 0.0
        for _ in range(100):
            width = 12
            Q = rng.uniform(0.0, 5.0, size=width)
            dQ = rng.uniform(-3.0, 3.0, size=width)
            label = int(rng.integers(width))
            lo = bce_loss(softmin(Q - h * dQ, exact=True), label)
            hi = bce_loss(softmin(Q + h * dQ, exact=True), label)
            fd = (hi - lo) / (2 * h)
            an = loss_gradient(Q, dQ, label, exact=True)
            if abs(fd) > 1e-6:
                worst = max(worst, abs(an - fd) / abs(fd))
        assert worst <= 1e-4

    def test_zero_when_all_weights_vanish(self):
        Q = np.full(6, np.inf)
        assert loss_gradient(Q, np.ones(6), 0) == 0.0

    def test_masked_slots_do_not_contribute(self):
        Q = np.array([1.0, 2.0, np.inf])
        dQ = np.array([0.5, -1.0, 99.0])
        full = loss_gradient(Q, dQ, 0)
        trimmed = loss_gradient(Q[:2], dQ[:2], 0)
        assert full == pytest.approx(trimmed)

    def test_descent_direction(self):
        # Stepping against the gradient lowers the loss.
        Q = np.array([2.0, 0.5, 3.0])
        dQ = np.array([1.0, -2.0, 0.5])
        g = loss_gradient(Q, dQ, 0, exact=True)
        step = 1e-3 * g
        before = bce_loss(softmin(Q, exact=True), 0)
        after = bce_loss(softmin(Q - step * dQ, exact=True), 0)
        assert after < before


class TestInitTheta:
    def test_deterministic_unit_interval(self):
        vals = [init_theta(s) for s in range(20)]
        assert all(0.0 <= v < 1.0 for v in vals)
        assert len(set(vals)) == 20
        assert init_theta(7) == init_theta(7)


class TestTrainerState:
    def sample(self):
        return np.array([0.2, 1.0, 3.0]), np.array([1.0, -1.0, 0.5]), 1

    def test_update_fires_on_batch_boundary(self):
        t = TrainerState(theta=0.5, batch=4)
        Q, dQ, label = self.sample()
        for i in range(3):
            assert t.submit(Q, dQ, label)
            assert t.theta == 0.5 and t.updates == 0
        assert t.submit(Q, dQ, label)
        grad = 4 * loss_gradient(Q, dQ, label)
        assert t.updates == 1
        assert t.theta == pytest.approx(0.5 - 2.0 ** -9 * grad)
        assert t.history == [t.theta]

    def test_degenerate_sample_consumes_nothing(self):
        t = TrainerState(theta=0.5, batch=2)
        Q, dQ, label = self.sample()
        dead = np.full(3, np.inf)
        assert not t.submit(dead, dQ, label)
        assert t.count == 0
        assert t.submit(Q, dQ, label)
        assert t.submit(Q, dQ, label)
        assert t.updates == 1

    def test_freeze_after_cap(self):
        t = TrainerState(theta=0.5, batch=2, update_cap=3)
        Q, dQ, label = self.sample()
        accepted = sum(t.submit(Q, dQ, label) for _ in range(20))
        assert accepted == 6
        assert t.updates == 3 and t.frozen
        assert len(t.history) == 3
        frozen_theta = t.theta
        assert not t.submit(Q, dQ, label)
        assert t.theta == frozen_theta

    def test_submit_batch_orders_by_frame(self):
        rng = np.random.default_rng(51)
        S = 6
        Q = rng.uniform(0, 3, size=(S, 4))
        dQ = rng.uniform(-1, 1, size=(S, 4))
        label = rng.integers(0, 4, size=S)
        frame = np.array([9, 2, 5, 2, 7, 0])
        batch = TrainingBatch(Q=Q, dQ=dQ, label=label,
                              first_hit=np.zeros(S, dtype=bool), frame=frame)
        a = TrainerState(theta=0.4, batch=1)
        assert a.submit_batch(batch) == S
        b = TrainerState(theta=0.4, batch=1)
        for i in (5, 1, 3, 2, 4, 0):  # stable ascending frame order
            b.submit(Q[i], dQ[i], int(label[i]))
        assert a.history == b.history
