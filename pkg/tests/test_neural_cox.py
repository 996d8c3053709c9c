import io
import math

import numpy as np
import pytest

from survtime.cox import breslow_estimate, fit_newton_raphson, neg_partial_loglik
from survtime.data import build_risk_index
from survtime.nets import DenseNet, MLPSpec, grad_check
from survtime.neural_cox import (
    CCTrainConfig,
    RelativeRiskModel,
    SurvivalCurve,
    _cc_loss_batch,
    _partial_loglik_value_grad,
    breslow_time_dependent,
    cc_loss,
    fit_cox_mlp_batchpl,
    fit_cox_mlp_cc,
    fit_cox_sgd_linear,
    fit_cox_time,
    load_model,
    predict_survival,
    predict_survival_matrix,
    risk_penalty,
    sample_controls,
    save_model,
)
from survtime.simulate import draw_dataset, scenario_by_name

from helpers import make_dataset


class TestSampleControls:
    def test_singleton_risk_set_raises(self):
        ds = make_dataset([1, 2], [0, 1])
        idx = build_risk_index(ds)
        with pytest.raises(ValueError, match="size 1"):
            sample_controls(idx, 1, 1, np.random.default_rng(0))

    def test_two_member_risk_set_forces_the_other(self):
        ds = make_dataset([1, 2], [1, 0])
        idx = build_risk_index(ds)
        rng = np.random.default_rng(0)
        for _ in range(20):
            assert sample_controls(idx, 0, 1, rng)[0] == 1

    def test_uniform_over_controls(self):
        """10 equally likely controls: counts 1000 +- 150 over 10k draws."""
        ds = make_dataset([1.0] + [2.0] * 10, [1] + [0] * 10)
        idx = build_risk_index(ds)
        rng = np.random.default_rng(1)
        draws = np.concatenate(
            [sample_controls(idx, 0, 1, rng) for _ in range(10000)])
        counts = np.bincount(draws, minlength=11)[1:]
        assert counts.sum() == 10000
        assert np.all(np.abs(counts - 1000) <= 150)

    def test_case_never_sampled(self):
        ds = make_dataset([1, 1, 1, 2], [1, 1, 0, 1])
        idx = build_risk_index(ds)
        rng = np.random.default_rng(2)
        for _ in range(200):
            assert 1 not in sample_controls(idx, 1, 3, rng)


class TestCcLoss:
    def test_equal_pair_is_log2(self):
        assert cc_loss(0.7, [0.7]) == pytest.approx(math.log(2), abs=1e-12)

    def test_two_equal_controls_is_log3(self):
        assert cc_loss(0.0, [0.0, 0.0]) == pytest.approx(math.log(3), abs=1e-12)

    def test_dominant_case_vanishes(self):
        assert 0 < cc_loss(30.0, [-30.0]) < 1e-12

    def test_bounded_by_log2_when_case_dominates(self):
        rng = np.random.default_rng(3)
        g = rng.standard_normal((10000, 2)) * 3
        hi, lo = g.max(axis=1), g.min(axis=1)
        losses = np.array([cc_loss(a, [b]) for a, b in zip(hi, lo)])
        assert np.all(losses <= math.log(2) + 1e-15)
        assert np.all(losses > 0)

    def test_shift_invariance_exact(self):
        """Adding the same dyadic constant to case and controls changes
        nothing bitwise."""
        for shift in (1.0, -4.0, 0.25):
            assert cc_loss(0.5 + shift, [-0.75 + shift, 2.0 + shift]) == \
                cc_loss(0.5, [-0.75, 2.0])

    def test_pure_time_term_cancels(self):
        """A predictor plus any additive time-only term gives the same loss
        when the case's time feeds case and controls alike."""
        g_case, g_ctrl = 0.5, np.array([-0.25, 1.5])
        for b_t in (2.0, -0.5, 8.0):
            assert cc_loss(g_case + b_t, g_ctrl + b_t) == cc_loss(g_case, g_ctrl)

    def test_batch_matches_scalar(self):
        rng = np.random.default_rng(4)
        g_case = rng.standard_normal(7)
        g_ctrl = rng.standard_normal((3, 7))
        losses, _, _ = _cc_loss_batch(g_case, g_ctrl)
        for k in range(7):
            assert losses[k] == pytest.approx(cc_loss(g_case[k], g_ctrl[:, k]),
                                              abs=1e-14)


class TestRiskPenalty:
    def test_zero_lambda(self):
        assert risk_penalty([1.0, -2.0], 0.0) == 0.0

    def test_absolute_sum(self):
        assert risk_penalty([1.0, -2.0], 0.1) == pytest.approx(0.3)

    def test_negative_lambda_rejected(self):
        with pytest.raises(ValueError):
            risk_penalty([1.0], -0.1)


class TestTrainingObjectiveGradient:
    def make_case_control_loss(self, b, m, lam):
        """The training objective as a function of network outputs: mean
        sampled loss over b cases plus the penalty scaled by 1/b."""

        def loss(out):
            z = out[:, 0]
            g_case, g_ctrl = z[:b], z[b:].reshape(m, b)
            losses, d_case, d_ctrl = _cc_loss_batch(g_case, g_ctrl)
            value = losses.mean() + lam * np.abs(z).sum() / b
            grad = np.concatenate([d_case, d_ctrl.ravel()]) / b
            grad = grad + lam * np.sign(z) / b
            return float(value), grad[:, None]

        return loss

    def test_matches_finite_differences(self):
        rng = np.random.default_rng(5)
        b, m = 4, 2
        net = DenseNet(MLPSpec(input_dim=3, hidden_layers=1, nodes_per_layer=6),
                       seed=5)
        x = rng.uniform(0.2, 1.0, size=(b * (m + 1), 3))  # away from kinks
        report = grad_check(net, self.make_case_control_loss(b, m, lam=0.05),
                            x, h=1e-5)
        assert report.max_rel_error < 1e-4

    def test_case_weights_do_not_change_gradients(self):
        """Multiplying each sampled set's sum by a positive constant only
        adds log(w_i) to the loss; parameter gradients are unchanged."""
        rng = np.random.default_rng(6)
        b, m = 5, 1
        w = rng.uniform(0.5, 2.0, b)
        net = DenseNet(MLPSpec(input_dim=2, hidden_layers=1, nodes_per_layer=4),
                       seed=6)
        x = rng.uniform(0.3, 1.0, size=(b * 2, 2))
        plain = self.make_case_control_loss(b, m, lam=0.0)

        def weighted(out):
            value, grad = plain(out)
            return value + float(np.log(w).mean()), grad

        net.forward(x)
        _, grad_out = plain(net.forward(x))
        analytic = net.backward(grad_out)
        report = grad_check(net, weighted, x, h=1e-5)
        assert report.max_rel_error < 1e-4  # FD of weighted == analytic of plain
        _, grad_out_w = weighted(net.forward(x))
        np.testing.assert_array_equal(net.backward(grad_out_w), analytic)


class TestCoxSgdLinear:
    def test_constant_model_loss_is_log2(self):
        """All-zero covariates pin g to a constant, so every sampled pair
        costs exactly log 2 and nothing can move."""
        ds = make_dataset(np.linspace(1, 10, 40), np.ones(40), x=np.zeros((40, 3)))
        cfg = CCTrainConfig(epochs=3, batch_size=8, seed=0)
        model = fit_cox_sgd_linear(ds, cfg)
        for row in model.history:
            assert row["train_loss"] == pytest.approx(math.log(2), abs=1e-12)

    def test_recovers_newton_raphson_coefficients(self):
        ds, _ = draw_dataset(scenario_by_name("linear-ph"), 2000, seed=7)
        nr = fit_newton_raphson(ds)
        cfg = CCTrainConfig(controls_per_case=1, batch_size=256, epochs=40,
                            learning_rate=0.01, seed=7)
        model = fit_cox_sgd_linear(ds, cfg)
        np.testing.assert_allclose(model.coefficients, nr.beta, atol=0.15)

    def test_deterministic(self):
        ds, _ = draw_dataset(scenario_by_name("linear-ph"), 300, seed=8)
        cfg = CCTrainConfig(epochs=5, seed=8)
        a = fit_cox_sgd_linear(ds, cfg)
        b = fit_cox_sgd_linear(ds, cfg)
        np.testing.assert_array_equal(a.net.parameters, b.net.parameters)

    def test_no_events_rejected(self):
        ds = make_dataset([1, 2, 3], [0, 0, 0])
        with pytest.raises(ValueError, match="no events"):
            fit_cox_sgd_linear(ds, CCTrainConfig(epochs=1))


class TestCoxMlpCc:
    def test_zero_hidden_equals_linear_fit(self):
        ds, _ = draw_dataset(scenario_by_name("linear-ph"), 400, seed=9)
        cfg = CCTrainConfig(epochs=8, seed=9)
        linear = fit_cox_sgd_linear(ds, cfg)
        as_mlp = fit_cox_mlp_cc(ds, None, MLPSpec(input_dim=3, hidden_layers=0),
                                cfg)
        np.testing.assert_array_equal(linear.net.parameters,
                                      as_mlp.net.parameters)
        assert as_mlp.kind == "linear-sgd"

    def test_fixed_seed_reproducible(self):
        ds, _ = draw_dataset(scenario_by_name("nonlinear-ph"), 400, seed=10)
        val, _ = draw_dataset(scenario_by_name("nonlinear-ph"), 200, seed=11)
        spec = MLPSpec(input_dim=3, hidden_layers=1, nodes_per_layer=8,
                       dropout_rate=0.1)
        cfg = CCTrainConfig(epochs=6, seed=12, penalty=1e-3)
        a = fit_cox_mlp_cc(ds, val, spec, cfg)
        b = fit_cox_mlp_cc(ds, val, spec, cfg)
        np.testing.assert_array_equal(a.net.parameters, b.net.parameters)

    def test_singleton_events_warned_and_still_in_baseline(self):
        # the largest duration is an event: it has no control
        ds = make_dataset([1, 2, 3, 4], [1, 1, 0, 1])
        with pytest.warns(UserWarning, match="singleton"):
            model = fit_cox_sgd_linear(ds, CCTrainConfig(epochs=1, seed=0,), )
        assert 4.0 in model.baseline.event_times


class TestBatchPartialLikelihood:
    def test_full_batch_equals_exact_loss(self):
        """batch = whole dataset: the first recorded loss is exactly the
        negative partial log-likelihood of the initial network."""
        ds, _ = draw_dataset(scenario_by_name("linear-ph"), 200, seed=13)
        spec = MLPSpec(input_dim=3, hidden_layers=1, nodes_per_layer=4)
        cfg = CCTrainConfig(batch_size=200, epochs=1, seed=13)
        model = fit_cox_mlp_batchpl(ds, None, spec, cfg)
        fresh = DenseNet(spec, seed=13)
        g = fresh.forward(ds.covariates)[:, 0]
        expected = neg_partial_loglik(g, build_risk_index(ds)) / ds.n_events
        assert model.history[0]["train_loss"] == pytest.approx(expected,
                                                               rel=1e-12)

    def test_value_grad_matches_finite_differences(self):
        rng = np.random.default_rng(14)
        ds = make_dataset(rng.integers(1, 6, 12).astype(float),
                          rng.integers(0, 2, 12) | np.asarray([1] + [0] * 11))
        idx = build_risk_index(ds)
        g = rng.standard_normal(12)
        value, grad = _partial_loglik_value_grad(g, idx)
        assert value == pytest.approx(neg_partial_loglik(g, idx), rel=1e-12)
        h = 1e-6
        for k in range(12):
            up, down = g.copy(), g.copy()
            up[k] += h
            down[k] -= h
            fd = (neg_partial_loglik(up, idx) - neg_partial_loglik(down, idx)) / (2 * h)
            assert grad[k] == pytest.approx(fd, abs=1e-6)

    def test_lone_last_event_batch_has_zero_loss(self):
        ds = make_dataset([1, 2, 3], [0, 0, 1])
        value, grad = _partial_loglik_value_grad(np.array([0.3, -0.2, 0.9]),
                                                 build_risk_index(ds))
        assert value == 0.0
        np.testing.assert_array_equal(grad, np.zeros(3))


class TestCoxTime:
    def test_zero_duration_rejected_with_log_transform(self):
        ds = make_dataset([0.0, 1.0, 2.0], [1, 1, 1], x=np.zeros((3, 2)))
        spec = MLPSpec(input_dim=3, hidden_layers=1, nodes_per_layer=4)
        with pytest.raises(ValueError, match="positive durations"):
            fit_cox_time(ds, None, spec, CCTrainConfig(epochs=1, log_durations=True))

    def test_fit_produces_time_dependent_model(self):
        ds, _ = draw_dataset(scenario_by_name("nonproportional"), 300, seed=15)
        spec = MLPSpec(input_dim=4, hidden_layers=1, nodes_per_layer=8)
        model = fit_cox_time(ds, None, spec, CCTrainConfig(epochs=3, seed=15))
        assert model.kind == "mlp-time-dependent"
        assert model.duration_transform == "log"
        assert model.baseline is not None

    def test_input_dim_validated(self):
        ds, _ = draw_dataset(scenario_by_name("nonproportional"), 50, seed=16)
        spec = MLPSpec(input_dim=3, hidden_layers=0)  # missing the time input
        with pytest.raises(ValueError, match="input_dim"):
            fit_cox_time(ds, None, spec, CCTrainConfig(epochs=1))


class TestTimeDependentBreslow:
    def zero_time_model(self, p):
        spec = MLPSpec(input_dim=p + 1, hidden_layers=0)
        net = DenseNet(spec, parameters=np.zeros(spec.parameter_count()))
        return RelativeRiskModel(kind="mlp-time-dependent", net=net,
                                 duration_transform="identity")

    def test_constant_network_reduces_to_nelson_aalen(self):
        rng = np.random.default_rng(17)
        ds = make_dataset(rng.integers(1, 6, 30).astype(float),
                          rng.integers(0, 2, 30) | np.asarray([1] * 5 + [0] * 25),
                          x=rng.uniform(-1, 1, (30, 2)))
        model = self.zero_time_model(p=2)
        bh = breslow_time_dependent(ds, model)
        reference = breslow_estimate(ds, np.zeros(30))
        np.testing.assert_allclose(bh.increments, reference.increments,
                                   rtol=1e-12)

    def test_requires_time_dependent_model(self):
        ds = make_dataset([1, 2], [1, 1])
        net = DenseNet(MLPSpec(input_dim=1, hidden_layers=0), seed=0)
        model = RelativeRiskModel(kind="linear-sgd", net=net)
        with pytest.raises(ValueError, match="time-dependent"):
            breslow_time_dependent(ds, model)


class TestPredictSurvival:
    def proportional_zero_model(self):
        """Linear model with all-zero weights over the three-point data."""
        ds = make_dataset([1, 2, 3], [1, 1, 1])
        spec = MLPSpec(input_dim=1, hidden_layers=0)
        net = DenseNet(spec, parameters=np.zeros(2))
        model = RelativeRiskModel(kind="linear-sgd", net=net)
        model.baseline = breslow_estimate(ds, np.zeros(3))
        return model

    def test_one_before_first_event_time(self):
        model = self.proportional_zero_model()
        curve = predict_survival(model, np.zeros(1), [0.0, 0.5, 1.0])
        assert curve.survival[0] == 1.0
        assert curve.survival[1] == 1.0
        assert curve.survival[2] < 1.0

    def test_nelson_aalen_composition(self):
        model = self.proportional_zero_model()
        curve = predict_survival(model, np.zeros(1), [3.0])
        assert curve.survival[0] == pytest.approx(math.exp(-11 / 6), abs=1e-12)

    def test_grid_must_increase(self):
        model = self.proportional_zero_model()
        with pytest.raises(ValueError, match="increasing"):
            predict_survival(model, np.zeros(1), [2.0, 1.0])

    def test_fitted_model_curves_are_valid(self):
        ds, _ = draw_dataset(scenario_by_name("nonproportional"), 400, seed=18)
        spec = MLPSpec(input_dim=4, hidden_layers=1, nodes_per_layer=8)
        model = fit_cox_time(ds, None, spec, CCTrainConfig(epochs=3, seed=18))
        grid = np.linspace(0, 30, 40)
        surv = predict_survival_matrix(model, ds.covariates[:50], grid)
        assert np.all(surv >= 0) and np.all(surv <= 1)
        assert np.all(np.diff(surv, axis=1) <= 1e-12)
        assert np.all(surv[:, 0] == 1.0)  # no event at exactly t = 0

    def test_matrix_agrees_with_single_curve(self):
        ds, _ = draw_dataset(scenario_by_name("linear-ph"), 200, seed=19)
        model = fit_cox_sgd_linear(ds, CCTrainConfig(epochs=3, seed=19))
        grid = np.linspace(0, 25, 30)
        matrix = predict_survival_matrix(model, ds.covariates[:5], grid)
        for i in range(5):
            curve = predict_survival(model, ds.covariates[i], grid)
            np.testing.assert_array_equal(matrix[i], curve.survival)


class TestPersistence:
    def test_round_trip_preserves_predictions(self):
        ds, _ = draw_dataset(scenario_by_name("nonproportional"), 300, seed=20)
        spec = MLPSpec(input_dim=4, hidden_layers=1, nodes_per_layer=6)
        model = fit_cox_time(ds, None, spec, CCTrainConfig(epochs=2, seed=20))
        buf = io.StringIO()
        save_model(model, buf)
        again = load_model(io.StringIO(buf.getvalue()))
        assert again.kind == model.kind
        assert again.duration_transform == model.duration_transform
        np.testing.assert_array_equal(again.net.parameters, model.net.parameters)
        grid = np.linspace(0, 20, 15)
        np.testing.assert_array_equal(
            predict_survival_matrix(again, ds.covariates[:10], grid),
            predict_survival_matrix(model, ds.covariates[:10], grid))

    def test_survival_curve_validation(self):
        with pytest.raises(ValueError, match="non-increasing"):
            SurvivalCurve(np.array([0.0, 1.0]), np.array([0.5, 0.9]))
        with pytest.raises(ValueError, match="increasing"):
            SurvivalCurve(np.array([1.0, 0.0]), np.array([1.0, 0.5]))
