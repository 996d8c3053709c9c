import io
import math

import numpy as np
import pytest

from survtime.deephit import (
    DeepHitModel,
    DiscreteTimeGrid,
    _deephit_loss_grad,
    deephit_loss,
    discretize,
    fit_deephit,
    load_deephit,
    pmf_to_survival,
    save_deephit,
)
from survtime.nets import DenseNet, MLPSpec, grad_check
from survtime.neural_cox import CCTrainConfig
from survtime.simulate import draw_dataset, scenario_by_name


class TestGrid:
    def test_from_durations(self):
        grid = DiscreteTimeGrid.from_durations([0.5, 2.0, 6.0], m=3)
        np.testing.assert_allclose(grid.tau, [0.0, 2.0, 4.0, 6.0])
        assert grid.m == 3

    def test_must_start_at_zero(self):
        with pytest.raises(ValueError, match="start at 0"):
            DiscreteTimeGrid(np.array([1.0, 2.0, 3.0]))

    def test_must_be_equidistant(self):
        with pytest.raises(ValueError, match="equidistant"):
            DiscreteTimeGrid(np.array([0.0, 1.0, 3.0]))


class TestDiscretize:
    GRID = DiscreteTimeGrid(np.array([0.0, 1.0, 2.0, 3.0]))

    def test_nearest_point(self):
        assert discretize([1.9], self.GRID)[0] == 2

    def test_out_of_range_clamps(self):
        assert discretize([99.0], self.GRID)[0] == 3

    def test_midpoint_breaks_down(self):
        assert discretize([0.5], self.GRID)[0] == 0
        assert discretize([1.5], self.GRID)[0] == 1


class TestPmfToSurvival:
    def test_uniform_pmf(self):
        np.testing.assert_allclose(pmf_to_survival([0.25, 0.25, 0.25, 0.25]),
                                   [0.75, 0.5, 0.25])

    def test_all_mass_at_origin(self):
        np.testing.assert_allclose(pmf_to_survival([1.0, 0, 0, 0]), [1, 1, 1])

    def test_all_mass_at_end(self):
        np.testing.assert_allclose(pmf_to_survival([0, 0, 0, 1.0]), [1, 1, 0],
                                   atol=1e-15)

    def test_must_sum_to_one(self):
        with pytest.raises(ValueError, match="sum to 1"):
            pmf_to_survival([0.5, 0.2])


class TestLoss:
    def test_pure_likelihood_uniform_pmf(self):
        pmf = np.full((1, 4), 0.25)
        value = deephit_loss(pmf, np.array([2]), np.array([1]), alpha=1.0,
                             sigma=1.0)
        assert value == pytest.approx(-math.log(0.25), abs=1e-12)

    def test_pure_ranking_identical_predictions(self):
        """With equal predictions every comparable pair costs exp(0) = 1."""
        pmf = np.tile([0.1, 0.2, 0.3, 0.4], (3, 1))
        e = np.array([0, 1, 2])
        d = np.array([1, 1, 0])
        # comparable: (0,1), (0,2), (1,2) -> 3 pairs
        value = deephit_loss(pmf, e, d, alpha=0.0, sigma=0.5)
        assert value == pytest.approx(3.0, abs=1e-12)

    def test_single_pair_rank_value(self):
        """S(T1|x1) = 0.2 vs S(T1|x2) = 0.9 at sigma = 0.5: exp(-1.4)."""
        pmf = np.array([[0.1, 0.8, 0.05, 0.05],  # S(tau_1) = 0.2
                        [0.2, 0.1, 0.3, 0.4]])  # S(tau_1) = 0.9
        value = deephit_loss(pmf, np.array([1, 2]), np.array([1, 0]),
                             alpha=0.0, sigma=0.5)
        assert value == pytest.approx(math.exp(-1.4), abs=1e-12)

    def test_alpha_out_of_range(self):
        with pytest.raises(ValueError, match="alpha"):
            deephit_loss(np.full((1, 3), 1 / 3), np.array([0]), np.array([1]),
                         alpha=1.5, sigma=1.0)

    def test_rank_permutation_invariant(self):
        rng = np.random.default_rng(0)
        z = rng.random((8, 5))
        pmf = z / z.sum(axis=1, keepdims=True)
        e = rng.integers(0, 5, 8)
        d = rng.integers(0, 2, 8)
        base = deephit_loss(pmf, e, d, alpha=0.3, sigma=0.7)
        perm = rng.permutation(8)
        assert deephit_loss(pmf[perm], e[perm], d[perm], alpha=0.3,
                            sigma=0.7) == pytest.approx(base, rel=1e-12)

    def test_gradient_matches_finite_differences(self):
        """FD check through softmax + combined loss on a small network."""
        rng = np.random.default_rng(1)
        b, m = 5, 4
        e = rng.integers(0, m + 1, b)
        d = np.array([1, 0, 1, 1, 0], dtype=float)
        net = DenseNet(MLPSpec(input_dim=3, hidden_layers=1, nodes_per_layer=6,
                               output_dim=m + 1), seed=1)
        x = rng.uniform(0.2, 1.0, (b, 3))

        def loss(logits):
            shifted = logits - logits.max(axis=1, keepdims=True)
            expz = np.exp(shifted)
            pmf = expz / expz.sum(axis=1, keepdims=True)
            value, grad_y = _deephit_loss_grad(pmf, e, d, alpha=0.4, sigma=0.5)
            inner = (grad_y * pmf).sum(axis=1, keepdims=True)
            return value, pmf * (grad_y - inner)

        report = grad_check(net, loss, x, h=1e-5)
        assert report.max_rel_error < 1e-4


class TestFit:
    def quick_fit(self, alpha=0.2, seed=2, epochs=4):
        train, _ = draw_dataset(scenario_by_name("linear-ph"), 300, seed=seed)
        val, _ = draw_dataset(scenario_by_name("linear-ph"), 150, seed=seed + 1)
        spec = MLPSpec(input_dim=3, hidden_layers=1, nodes_per_layer=8)
        cfg = CCTrainConfig(epochs=epochs, batch_size=64, learning_rate=1e-3,
                            seed=seed)
        return train, fit_deephit(train, val, spec, m=10, alpha=alpha,
                                  sigma=0.5, config=cfg)

    def test_pmf_normalized(self):
        train, model = self.quick_fit()
        pmf = model.pmf(train.covariates)
        np.testing.assert_allclose(pmf.sum(axis=1), 1.0, atol=1e-9)
        assert np.all(pmf >= 0)

    def test_survival_monotone_in_unit_interval(self):
        train, model = self.quick_fit()
        surv = model.survival_matrix(train.covariates[:20],
                                     np.linspace(0, 30, 25))
        assert np.all((surv >= 0) & (surv <= 1))
        assert np.all(np.diff(surv, axis=1) <= 1e-12)

    def test_alpha_one_epoch_losses_are_pure_nll(self):
        """First epoch, full batch: the recorded loss is the plain
        discrete NLL of the initial network."""
        train, _ = draw_dataset(scenario_by_name("linear-ph"), 100, seed=3)
        spec = MLPSpec(input_dim=3, hidden_layers=0)
        cfg = CCTrainConfig(epochs=1, batch_size=100, learning_rate=1e-3, seed=3)
        model = fit_deephit(train, None, spec, m=6, alpha=1.0, sigma=1.0,
                            config=cfg)
        fresh = DeepHitModel(grid=model.grid,
                             net=DenseNet(model.net.spec, seed=3),
                             alpha=1.0, sigma=1.0)
        from survtime.deephit import discretize as disc
        e = disc(train.durations, model.grid)
        expected = deephit_loss(fresh.pmf(train.covariates), e, train.events,
                                1.0, 1.0) / train.n
        assert model.history[0]["train_loss"] == pytest.approx(expected,
                                                               rel=1e-12)

    def test_deterministic(self):
        _, a = self.quick_fit(seed=4)
        _, b = self.quick_fit(seed=4)
        np.testing.assert_array_equal(a.net.parameters, b.net.parameters)

    def test_no_events_rejected(self):
        import helpers
        ds = helpers.make_dataset([1, 2, 3], [0, 0, 0], p=2)
        with pytest.raises(ValueError, match="no events"):
            fit_deephit(ds, None, MLPSpec(input_dim=2), 5, 0.5, 1.0,
                        CCTrainConfig(epochs=1))

    def test_round_trip(self):
        train, model = self.quick_fit(seed=5)
        buf = io.StringIO()
        save_deephit(model, buf)
        again = load_deephit(io.StringIO(buf.getvalue()))
        np.testing.assert_array_equal(again.grid.tau, model.grid.tau)
        np.testing.assert_array_equal(again.net.parameters, model.net.parameters)
        assert (again.alpha, again.sigma) == (model.alpha, model.sigma)
        grid = np.linspace(0, 30, 12)
        np.testing.assert_array_equal(
            again.survival_matrix(train.covariates[:8], grid),
            model.survival_matrix(train.covariates[:8], grid))
