"""Command-line pipeline: simulate -> fit -> predict -> evaluate -> cluster.

Artifacts travel through files (dataset CSV, model JSON, curve CSV,
report JSON); per-epoch losses go to standard output as CSV so training
curves are scriptable. Exit codes: 0 success, 2 usage or validation
error, 1 runtime failure. The SURVTIME_SEED environment variable
overrides every seed.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from survtime import cluster as cluster_mod
from survtime import deephit as deephit_mod
from survtime import metrics as metrics_mod
from survtime import neural_cox as ncox
from survtime.cox import breslow_estimate, fit_newton_raphson
from survtime.data import load_csv, write_csv
from survtime.nets import MLPSpec
from survtime.neural_cox import CCTrainConfig, RelativeRiskModel
from survtime.simulate import SCENARIO_NAMES, draw_dataset, scenario_by_name

MODEL_KINDS = ("cox-linear", "cox-sgd", "cox-mlp-cc", "cox-mlp-batchpl",
               "cox-time", "deephit")

# Every config key with its default; unknown keys are rejected. Learning
# rate and penalty resolve per model when left null: linear models get
# lr 1e-2 and no penalty, networks get lr 1e-3 and penalty 1e-3 (the
# penalty only applies to the sampled-loss fits).
CONFIG_DEFAULTS = {
    "model": None,  # required
    "hidden_layers": 4,
    "nodes_per_layer": 128,
    "dropout": 0.1,
    "controls_per_case": 1,
    "batch_size": 256,
    "epochs": 50,
    "penalty": None,
    "learning_rate": None,
    "seed": 0,
    "log_durations": True,
    "alpha": 0.2,
    "sigma": 0.25,
    "num_durations": 100,
}


def _load_config(path: str) -> dict:
    with open(path, "r", encoding="utf-8") as fh:
        raw = json.load(fh)
    unknown = sorted(set(raw) - set(CONFIG_DEFAULTS))
    if unknown:
        raise ValueError(f"unknown config key(s): {', '.join(unknown)}")
    config = dict(CONFIG_DEFAULTS)
    config.update(raw)
    if config["model"] not in MODEL_KINDS:
        raise ValueError(
            f"config 'model' must be one of {', '.join(MODEL_KINDS)}; "
            f"got {config['model']!r}"
        )
    linear = config["model"] in ("cox-linear", "cox-sgd")
    if config["learning_rate"] is None:
        config["learning_rate"] = 1e-2 if linear else 1e-3
    if config["penalty"] is None:
        config["penalty"] = 0.0 if linear else 1e-3
    seed_override = os.environ.get("SURVTIME_SEED")
    if seed_override is not None:
        config["seed"] = int(seed_override)
    return config


def _seed_flag(value: int) -> int:
    override = os.environ.get("SURVTIME_SEED")
    return int(override) if override is not None else value


def cmd_simulate(args) -> int:
    scenario = scenario_by_name(args.scenario)
    dataset, truth = draw_dataset(scenario, args.n, _seed_flag(args.seed))
    write_csv(dataset, args.out)
    if args.truth:
        lines = ["t_star,c_star,g_true"]
        for a, b, c in zip(truth.t_star, truth.c_star, truth.g_true):
            lines.append(f"{a:.17g},{b:.17g},{c:.17g}")
        with open(args.truth, "w", encoding="utf-8", newline="") as fh:
            fh.write("\n".join(lines) + "\n")
    print(f"wrote {dataset.n} rows to {args.out} "
          f"({1 - dataset.n_events / dataset.n:.1%} censored)")
    return 0


def _train_config(config: dict) -> CCTrainConfig:
    return CCTrainConfig(
        controls_per_case=config["controls_per_case"],
        batch_size=config["batch_size"],
        epochs=config["epochs"],
        penalty=config["penalty"],
        learning_rate=config["learning_rate"],
        seed=config["seed"],
        log_durations=config["log_durations"],
    )


def _print_history(history) -> None:
    print("epoch,train_loss,val_loss")
    for row in history:
        val = "" if row["val_loss"] is None else f"{row['val_loss']:.6f}"
        print(f"{row['epoch']},{row['train_loss']:.6f},{val}")


def cmd_fit(args) -> int:
    config = _load_config(args.config)
    train = load_csv(args.train)
    val = load_csv(args.val) if args.val else None
    model_kind = config["model"]
    tc = _train_config(config)

    if model_kind == "cox-linear":
        fitted = fit_newton_raphson(train)
        net = ncox.DenseNet(MLPSpec(input_dim=train.p, hidden_layers=0),
                            parameters=np.append(fitted.beta, 0.0))
        model = RelativeRiskModel(kind="linear-sgd", net=net)
        model.baseline = breslow_estimate(train, train.covariates @ fitted.beta)
        ncox.save_model(model, args.out_model)
        print("coefficients," + ",".join(f"{b:.6f}" for b in fitted.beta))
        return 0

    if model_kind == "deephit":
        spec = MLPSpec(input_dim=train.p, hidden_layers=config["hidden_layers"],
                       nodes_per_layer=config["nodes_per_layer"],
                       dropout_rate=config["dropout"])
        model = deephit_mod.fit_deephit(train, val, spec, config["num_durations"],
                                        config["alpha"], config["sigma"], tc)
        deephit_mod.save_deephit(model, args.out_model)
        _print_history(model.history)
        return 0

    if model_kind == "cox-sgd":
        model = ncox.fit_cox_sgd_linear(train, tc)
    elif model_kind == "cox-mlp-cc":
        spec = MLPSpec(input_dim=train.p, hidden_layers=config["hidden_layers"],
                       nodes_per_layer=config["nodes_per_layer"],
                       dropout_rate=config["dropout"])
        model = ncox.fit_cox_mlp_cc(train, val, spec, tc)
    elif model_kind == "cox-mlp-batchpl":
        spec = MLPSpec(input_dim=train.p, hidden_layers=config["hidden_layers"],
                       nodes_per_layer=config["nodes_per_layer"],
                       dropout_rate=config["dropout"])
        model = ncox.fit_cox_mlp_batchpl(train, val, spec, tc)
    else:  # cox-time
        spec = MLPSpec(input_dim=train.p + 1, hidden_layers=config["hidden_layers"],
                       nodes_per_layer=config["nodes_per_layer"],
                       dropout_rate=config["dropout"])
        model = ncox.fit_cox_time(train, val, spec, tc)

    ncox.save_model(model, args.out_model)
    _print_history(model.history)
    if model.net.spec.hidden_layers == 0:
        print("coefficients," + ",".join(f"{b:.6f}" for b in model.coefficients))
    return 0


def _load_any_model(path: str):
    with open(path, "r", encoding="utf-8") as fh:
        kind = json.load(fh).get("kind")
    if kind == "deephit":
        return deephit_mod.load_deephit(path)
    return ncox.load_model(path)


def _survival_matrix(model, x, grid) -> np.ndarray:
    if isinstance(model, deephit_mod.DeepHitModel):
        return model.survival_matrix(x, grid)
    return ncox.predict_survival_matrix(model, x, grid)


def _parse_grid(text: str, dataset) -> np.ndarray:
    """Either a point count (equidistant over [0, max duration]) or an
    explicit comma-separated list of increasing times."""
    if "," in text:
        grid = np.asarray([float(v) for v in text.split(",")])
    else:
        grid = np.linspace(0.0, float(dataset.durations.max()), int(text))
    if grid.size > 1 and np.any(np.diff(grid) <= 0):
        raise ValueError("grid must be increasing")
    return grid


def cmd_predict(args) -> int:
    model = _load_any_model(args.model)
    data = load_csv(args.data)
    grid = _parse_grid(args.grid, data)
    surv = _survival_matrix(model, data.covariates, grid)
    lines = ["time," + ",".join(f"s_row{i}" for i in range(data.n))]
    for gi, t in enumerate(grid):
        lines.append(f"{t:.17g}," + ",".join(f"{v:.17g}" for v in surv[:, gi]))
    with open(args.out_curves, "w", encoding="utf-8", newline="") as fh:
        fh.write("\n".join(lines) + "\n")
    print(f"wrote survival for {data.n} rows at {grid.size} times to "
          f"{args.out_curves}")
    return 0


def cmd_evaluate(args) -> int:
    model = _load_any_model(args.model)
    test = load_csv(args.test)
    if _model_inputs(model) != test.p:
        raise ValueError(
            f"model expects {_model_inputs(model)} covariates, test data has {test.p}"
        )

    # concordance needs S(T_a | x_b) at every observed time
    order_times = np.asarray(test.durations)
    surv_at_t = _survival_matrix(model, test.covariates, np.unique(order_times))
    unique_times = np.unique(order_times)
    take = np.searchsorted(unique_times, order_times)
    surv_matrix = surv_at_t[:, take].T  # [a, b] = S(T_a | x_b)
    concordance = metrics_mod.c_td(test.durations, test.events, surv_matrix)

    t1, t2 = float(test.durations.min()), float(test.durations.max())
    grid = np.linspace(t1, t2, 100)
    surv_grid = _survival_matrix(model, test.covariates, grid)
    censor = metrics_mod.censoring_km(test)
    brier = [metrics_mod.brier_score_at(t, test, surv_grid[:, i], censor)
             for i, t in enumerate(grid)]
    bll = [metrics_mod.binomial_ll_at(t, test, surv_grid[:, i], censor)
           for i, t in enumerate(grid)]
    ibs = float(np.trapezoid(brier, grid) / (t2 - t1))
    ibll = float(np.trapezoid(bll, grid) / (t2 - t1))

    report = {
        "c_td": concordance,
        "ibs": ibs,
        "ibll": ibll,
        "grid": [float(t) for t in grid],
        "brier": [float(v) for v in brier],
        "bll": [float(v) for v in bll],
    }
    with open(args.out_report, "w", encoding="utf-8") as fh:
        json.dump(report, fh, indent=1)
    print(f"c_td={concordance:.4f} ibs={ibs:.4f} ibll={ibll:.4f}")
    return 0


def _model_inputs(model) -> int:
    dim = model.net.spec.input_dim
    return dim - 1 if getattr(model, "time_dependent", False) else dim


def cmd_cluster(args) -> int:
    with open(args.curves, "r", encoding="utf-8") as fh:
        header = fh.readline().strip().split(",")
        rows = [[float(v) for v in line.split(",")] for line in fh if line.strip()]
    if not header or header[0] != "time":
        raise ValueError("curve file must start with a 'time' column")
    table = np.asarray(rows)
    grid, values = table[:, 0], table[:, 1:].T  # rows = individuals
    matrix = cluster_mod.CurveMatrix(grid=grid, values=values)
    result = cluster_mod.kmeans_curves(matrix, args.k, seed=_seed_flag(args.seed))

    lines = ["time," + ",".join(f"cluster_{c}" for c in range(args.k))]
    for gi, t in enumerate(grid):
        lines.append(f"{t:.17g}," +
                     ",".join(f"{v:.17g}" for v in result.centers[:, gi]))
    with open(args.out, "w", encoding="utf-8", newline="") as fh:
        fh.write("\n".join(lines) + "\n")
    props = {f"cluster_{c}": float(p) for c, p in enumerate(result.proportions)}
    json_path = os.path.splitext(args.out)[0] + ".json"
    with open(json_path, "w", encoding="utf-8") as fh:
        json.dump(props, fh, indent=1)
    shares = ", ".join(
        f"cluster_{c}: {round(100 * p)}%" for c, p in enumerate(result.proportions)
    )
    print(f"wrote centers to {args.out} and proportions to {json_path}")
    print(shares)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="survtime",
        description="Survival prediction pipeline over CSV and JSON files.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="draw a synthetic dataset")
    p.add_argument("--scenario", required=True, choices=SCENARIO_NAMES)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.add_argument("--truth", default=None,
                   help="optional sidecar CSV with t_star,c_star,g_true")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("fit", help="train a model from a JSON config")
    p.add_argument("--config", required=True)
    p.add_argument("--train", required=True)
    p.add_argument("--val", default=None)
    p.add_argument("--out-model", required=True)
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("predict", help="write survival curves for a dataset")
    p.add_argument("--model", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--grid", default="100",
                   help="point count or comma-separated times")
    p.add_argument("--out-curves", required=True)
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("evaluate", help="score a model on a test set")
    p.add_argument("--model", required=True)
    p.add_argument("--test", required=True)
    p.add_argument("--out-report", required=True)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("cluster", help="k-means over predicted curves")
    p.add_argument("--curves", required=True)
    p.add_argument("--k", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_cluster)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001 - runtime failures map to exit 1
        print(f"runtime error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
