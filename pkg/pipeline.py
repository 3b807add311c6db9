# pipeline.py
"""
Groundwater-level pipeline: ingest -> aggregate -> window -> split -> scale
-> init -> train -> evaluate -> persist, plus evaluation, forecasting,
plot export, optimizer ablation and synthetic-data commands.

Each cmd_* returns 0 on success and raises GroundwaterError otherwise;
cli.py turns the exception into an exit code.
"""

import logging
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import List, Optional, Tuple

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np
import pandas as pd
from tqdm import tqdm

import synthetic
from config import RunConfig, fingerprint, load_config
from utils.data import (
    ClimateSeries,
    Dataset,
    Scaler,
    aggregate_weighted,
    align_climate,
    apply_scaler,
    build_supervised,
    fit_scaler,
    format_months,
    invert_scaler,
    load_inputs,
    scale_features,
    split_dataset,
)
from utils.errors import ConfigError, DataError, NumericError, ShapeError
from utils.metrics import evaluate_model, mse
from utils.model_io import Checkpoint, load_model, save_model
from utils.network import (
    MlpModel,
    flatten_params,
    init_mlp,
    mlp_backward,
    mlp_forward,
    mlp_predict,
    mse_loss,
    unflatten_params,
)
from utils.numerics import rng_from_seed
from utils.optim import adam_init, adam_step, sgd_step

logger = logging.getLogger(__name__)

ABLATION_ETAS = (0.1, 0.01, 0.001)


@dataclass
class PreparedData:
    """Everything rebuilt deterministically from a config and its input files"""
    dataset: Dataset
    train_raw: Dataset
    test_raw: Dataset
    scaler: Scaler
    train: Dataset
    test: Dataset
    levels: np.ndarray
    future_climate: ClimateSeries
    fingerprint: str


@dataclass
class TrainResult:
    model: MlpModel
    losses: List[float] = field(default_factory=list)
    checkpoint: Optional[Checkpoint] = None


def prepare_data(config: RunConfig) -> PreparedData:
    wells, climate = load_inputs(config.wells_csv, config.climate_csv)
    timestamps, levels = aggregate_weighted(wells)
    history, future = align_climate(climate, timestamps)
    dataset = build_supervised(history, timestamps, levels, config.lags)
    train_raw, test_raw = split_dataset(dataset, config.split_fraction, config.split_mode, config.seed)
    scaler = fit_scaler(train_raw, config.scaling)
    logger.info(f"Supervised dataset: {len(dataset)} rows x {dataset.x.shape[1]} features, "
                f"{len(train_raw)} train / {len(test_raw)} test ({config.split_mode})")
    return PreparedData(
        dataset=dataset,
        train_raw=train_raw,
        test_raw=test_raw,
        scaler=scaler,
        train=apply_scaler(scaler, train_raw),
        test=apply_scaler(scaler, test_raw),
        levels=levels,
        future_climate=future,
        fingerprint=fingerprint(config),
    )


def _batches(n: int, batch: Optional[int], seed: int, epoch: int):
    """Row index blocks for one epoch; None means the whole partition"""
    if batch is None or batch >= n:
        yield None
        return
    # the shuffle depends only on (seed, epoch)
    order = np.random.Generator(np.random.PCG64([seed, epoch])).permutation(n)
    for start in range(0, n, batch):
        yield order[start:start + batch]


def _check_architecture(model: MlpModel, config: RunConfig, n_features: int):
    expected = config.layer_sizes(n_features)
    if list(model.layer_sizes) != expected or model.output_activation != config.output_activation:
        raise ShapeError(
            f"model has layers {model.layer_sizes} ({model.output_activation} output), "
            f"config expects {expected} ({config.output_activation} output)"
        )


def train_model(config: RunConfig, train: Dataset, resume: Optional[Tuple[MlpModel, Optional[Checkpoint]]] = None,
                progress: bool = False) -> TrainResult:
    """Gradient descent on the scaled training partition with the configured optimizer"""
    n_features = train.x.shape[1]
    hyper = config.hyper
    if resume is None:
        model = init_mlp(config.layer_sizes(n_features), config.output_activation, rng_from_seed(config.seed))
        state = adam_init(hyper, model.param_shapes()) if config.optimizer == "adam" else None
        start_epoch = 0
    else:
        model, checkpoint = resume
        if checkpoint is None:
            raise ConfigError("resume_from points to a model file without an ADAMV1 checkpoint section")
        _check_architecture(model, config, n_features)
        if checkpoint.hyper != hyper:
            raise ConfigError(f"checkpoint was trained with {checkpoint.hyper}, config asks for {hyper}")
        if checkpoint.epoch >= config.epochs:
            raise ConfigError(f"checkpoint is already at epoch {checkpoint.epoch}, config asks for {config.epochs}")
        state, start_epoch = checkpoint.state, checkpoint.epoch
        logger.info(f"Resuming from epoch {start_epoch} (Adam step {state.t})")

    params = flatten_params(model)
    result = TrainResult(model)
    epochs = tqdm(range(start_epoch, config.epochs), desc="Training", disable=not progress)
    with np.errstate(over="raise", invalid="raise", divide="raise"):
        for epoch in epochs:
            batch_losses = []
            for rows in _batches(len(train), config.batch, config.seed, epoch):
                x = train.x if rows is None else train.x[rows]
                y = train.y if rows is None else train.y[rows]
                try:
                    trace = mlp_forward(model, x)
                    loss = mse_loss(trace.output, y)
                    grads = mlp_backward(model, trace, y).flat()
                    if state is not None:
                        state, params = adam_step(state, params, grads, hyper)
                    else:
                        params = sgd_step(params, grads, config.eta)
                except FloatingPointError as e:
                    raise NumericError(f"training diverged at epoch {epoch + 1}: {e}") from e
                if not np.isfinite(loss):
                    raise NumericError(f"training loss became {loss} at epoch {epoch + 1}")
                batch_losses.append(loss)
                model = unflatten_params(model, params)

            result.losses.append(float(np.mean(batch_losses)))
            if (epoch + 1) % config.log_every == 0:
                logger.info(f"Epoch {epoch + 1}/{config.epochs}: loss {result.losses[-1]:.6g}")
            if state is not None:
                result.checkpoint = Checkpoint(state, hyper, epoch + 1)
            if config.checkpoint_every and (epoch + 1) % config.checkpoint_every == 0:
                save_model(config.model_out, model, result.checkpoint)
                logger.info(f"Checkpoint written to {config.model_out} at epoch {epoch + 1}")

    result.model = model
    return result


def _load_for(config: RunConfig, model_path, data: PreparedData) -> MlpModel:
    model, _ = load_model(model_path or config.model_out)
    _check_architecture(model, config, data.dataset.x.shape[1])
    return model


def _write_csv(frame: pd.DataFrame, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    frame.to_csv(path, index=False, float_format="%.17g", lineterminator="\n")
    return path


def cmd_train(config_path, progress: bool = False) -> int:
    config = load_config(config_path)
    data = prepare_data(config)
    resume = load_model(config.resume_from) if config.resume_from else None
    result = train_model(config, data.train, resume, progress)

    report = evaluate_model(result.model, data.scaler, data.train, data.test, data.fingerprint)
    save_model(config.model_out, result.model, result.checkpoint if config.checkpoint_every else None)
    report.save(config.report_out)

    total = report.row("total")
    final_loss = result.losses[-1] if result.losses else float("nan")
    print(f"trained {config.epochs} epochs ({config.optimizer}), final loss {final_loss:.6g}, "
          f"total RMSE {total.rmse:.4f} m, R^2 {total.r2:.4f} -> {config.model_out}, {config.report_out}")
    return 0


def cmd_evaluate(model_path, config_path, out=None) -> int:
    config = load_config(config_path)
    data = prepare_data(config)
    model = _load_for(config, model_path, data)
    report = evaluate_model(model, data.scaler, data.train, data.test, data.fingerprint)
    report.save(out or config.report_out)
    print(report.render())
    print(f"fingerprint: {report.fingerprint}")
    return 0


def forecast(model: MlpModel, scaler: Scaler, levels: np.ndarray, future: ClimateSeries, lags: int,
             horizon: int) -> np.ndarray:
    """Recursive multi-step forecast; each prediction becomes the next month's lag 1"""
    window = [float(v) for v in levels[::-1][:lags]]
    predictions = []
    for h in range(horizon):
        features = np.array([[future.temperature[h], future.precipitation[h], *window]])
        scaled = mlp_predict(model, scale_features(scaler, features))
        level = float(invert_scaler(scaler, scaled)[0, 0])
        predictions.append(level)
        window = [level] + window[:-1]
    return np.array(predictions)


def cmd_predict(model_path, config_path, horizon: int, out=None) -> int:
    if horizon < 1:
        raise ConfigError(f"horizon must be >= 1, got {horizon}")
    config = load_config(config_path)
    data = prepare_data(config)
    model = _load_for(config, model_path, data)

    available = len(data.future_climate)
    if available < horizon:
        last = format_months(data.dataset.timestamps[-1:])[0]
        raise DataError(
            f"forecasting {horizon} month(s) after {last} requires {horizon} future climate month(s), "
            f"climate CSV provides {available}"
        )
    predicted = forecast(model, data.scaler, data.levels, data.future_climate, config.lags, horizon)
    path = _write_csv(pd.DataFrame({
        "date": format_months(data.future_climate.timestamps[:horizon]),
        "predicted_level_masl": predicted,
    }), out or config.predict_out)
    print(f"forecast {horizon} month(s) -> {path}")
    return 0


def simulate_series(model: MlpModel, data: PreparedData) -> pd.DataFrame:
    """Observed vs. simulated level over the whole supervised series"""
    dataset = data.dataset
    predicted = invert_scaler(data.scaler, mlp_predict(model, scale_features(data.scaler, dataset.x)))
    in_train = np.isin(dataset.timestamps, data.train_raw.timestamps)
    return pd.DataFrame({
        "date": format_months(dataset.timestamps),
        "observed": dataset.y.ravel(),
        "predicted": predicted.ravel(),
        "partition": np.where(in_train, "train", "test"),
    })


def render_plot(series: pd.DataFrame, path):
    dates = pd.to_datetime(series["date"], format="%Y-%m")
    fig, ax = plt.subplots(figsize=(12, 5))
    ax.plot(dates, series["observed"], color="tab:blue", label="Observed")
    ax.plot(dates, series["predicted"], color="tab:green", label="MLP simulation")
    test_dates = dates[series["partition"] == "test"]
    if len(test_dates):
        ax.axvspan(test_dates.min(), test_dates.max(), color="grey", alpha=0.15, label="Test")
    ax.set_xlabel("Month")
    ax.set_ylabel("Groundwater level (m a.s.l.)")
    ax.legend()
    fig.tight_layout()
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, dpi=120)
    plt.close(fig)


def cmd_export_plot(model_path, config_path, out=None) -> int:
    config = load_config(config_path)
    data = prepare_data(config)
    model = _load_for(config, model_path, data)
    series = simulate_series(model, data)
    path = _write_csv(series, out or config.plot_out)
    if config.plot_png:
        render_plot(series, config.plot_png)
        logger.info(f"Plot image written to {config.plot_png}")
    print(f"exported {len(series)} months -> {path}")
    return 0


def run_ablation(config: RunConfig, data: PreparedData, progress: bool = False) -> pd.DataFrame:
    """Final training MSE (m^2) for Adam and SGD at each learning rate, same epoch budget"""
    rows = []
    runs = [(opt, eta) for opt in ("adam", "sgd") for eta in ABLATION_ETAS]
    for optimizer, eta in tqdm(runs, desc="Ablation", disable=not progress):
        run_config = replace(config, optimizer=optimizer, eta=eta, checkpoint_every=0, resume_from=None)
        try:
            model = train_model(run_config, data.train).model
            with np.errstate(over="raise", invalid="raise"):
                pred = invert_scaler(data.scaler, mlp_predict(model, data.train.x))
            final = mse(pred, data.train_raw.y)
        except (NumericError, FloatingPointError) as e:
            logger.info(f"{optimizer} eta={eta} diverged: {e}")
            final = float("inf")
        logger.info(f"{optimizer} eta={eta}: final train MSE {final:.6g}")
        rows.append({"optimizer": optimizer, "eta": eta, "final_train_mse": final})
    return pd.DataFrame(rows)


def cmd_ablate(config_path, out=None, progress: bool = False) -> int:
    config = load_config(config_path)
    data = prepare_data(config)
    table = run_ablation(config, data, progress)
    path = _write_csv(table, out or config.ablation_out)
    best = table.groupby("optimizer")["final_train_mse"].min()
    print(f"best final train MSE: adam {best['adam']:.6g}, sgd {best['sgd']:.6g} -> {path}")
    return 0


def cmd_synthesize(config_path, horizon: int = 0) -> int:
    if horizon < 0:
        raise ConfigError(f"horizon must be >= 0, got {horizon}")
    config = load_config(config_path)
    synthetic.write_fixture(config.wells_csv, config.climate_csv, seed=config.seed, extra_climate_months=horizon)
    print(f"synthetic aquifer written to {config.wells_csv} and {config.climate_csv}")
    return 0
