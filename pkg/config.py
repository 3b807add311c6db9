# config.py
"""
Run configuration: a flat `key = value` file, one key per RunConfig field.

Unknown keys are rejected, defaults follow the reference MLP setup
(500 ReLU hidden neurons, Adam with its canonical hyperparameters).
"""

import hashlib
import logging
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Dict, Optional

from dotenv import dotenv_values

from utils.data import CHRONOLOGICAL, MINMAX, SCALER_KINDS, SPLIT_MODES, ZSCORE
from utils.errors import ConfigError
from utils.network import OUTPUT_ACTIVATIONS, RELU
from utils.numerics import MAX_SEED
from utils.optim import AdamHyper

logger = logging.getLogger(__name__)

OPTIMIZERS = {"adam", "sgd"}
FULL_BATCH = "full"

# excluded from the config hash
UNHASHED_KEYS = {
    "wells_csv", "climate_csv", "model_out", "report_out", "plot_out", "predict_out",
    "plot_png", "ablation_out", "log_every", "checkpoint_every", "resume_from",
}


@dataclass(frozen=True)
class RunConfig:
    wells_csv: Path
    climate_csv: Path
    hidden_size: int = 500
    output_activation: str = "linear"
    lags: int = 1
    optimizer: str = "adam"
    eta: float = 0.001
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8
    epochs: int = 2000
    batch: Optional[int] = None
    seed: int = 42
    split_fraction: float = 0.8
    split_mode: str = CHRONOLOGICAL
    scaling: str = ZSCORE
    model_out: Path = Path("model.mlp")
    report_out: Path = Path("report.csv")
    plot_out: Path = Path("plot.csv")
    predict_out: Path = Path("predictions.csv")
    plot_png: Optional[Path] = None
    ablation_out: Path = Path("ablation.csv")
    log_every: int = 100
    checkpoint_every: int = 0
    resume_from: Optional[Path] = None

    def __post_init__(self):
        _at_least("hidden_size", self.hidden_size, 1)
        _at_least("lags", self.lags, 1)
        _at_least("epochs", self.epochs, 1)
        _at_least("log_every", self.log_every, 1)
        _at_least("checkpoint_every", self.checkpoint_every, 0)
        if self.batch is not None:
            _at_least("batch", self.batch, 1)
        if not 0 <= self.seed < MAX_SEED:
            raise ConfigError(f"seed must be a 64-bit unsigned integer, got {self.seed}")
        if not 0 < self.split_fraction < 1:
            raise ConfigError(f"split_fraction must be in (0, 1), got {self.split_fraction}")
        _one_of("output_activation", self.output_activation, OUTPUT_ACTIVATIONS)
        _one_of("optimizer", self.optimizer, OPTIMIZERS)
        _one_of("split_mode", self.split_mode, SPLIT_MODES)
        _one_of("scaling", self.scaling, SCALER_KINDS)
        AdamHyper(self.eta, self.beta1, self.beta2, self.epsilon)
        if self.output_activation == RELU and self.scaling != MINMAX:
            raise ConfigError("output_activation = relu requires scaling = minmax")
        if self.optimizer != "adam" and (self.checkpoint_every or self.resume_from):
            raise ConfigError("checkpointing and resuming require optimizer = adam")

    @property
    def hyper(self) -> AdamHyper:
        return AdamHyper(self.eta, self.beta1, self.beta2, self.epsilon)

    def layer_sizes(self, n_features: int):
        return [n_features, self.hidden_size, 1]

    def canonical(self) -> str:
        """Sorted key=value text of every field that influences the numbers"""
        lines = []
        for f in sorted(fields(self), key=lambda f: f.name):
            if f.name in UNHASHED_KEYS:
                continue
            value = getattr(self, f.name)
            lines.append(f"{f.name}={FULL_BATCH if f.name == 'batch' and value is None else value!r}")
        return "\n".join(lines)


def _at_least(key: str, value: int, minimum: int):
    if value < minimum:
        raise ConfigError(f"{key} must be >= {minimum}, got {value}")


def _one_of(key: str, value: str, allowed):
    if value not in allowed:
        raise ConfigError(f"{key} must be one of {sorted(allowed)}, got '{value}'")


def _parse_int(text: str) -> int:
    return int(text)


def _parse_float(text: str) -> float:
    return float(text)


def _parse_batch(text: str) -> Optional[int]:
    return None if text.lower() == FULL_BATCH else int(text)


PARSERS = {
    "hidden_size": _parse_int,
    "lags": _parse_int,
    "epochs": _parse_int,
    "seed": _parse_int,
    "log_every": _parse_int,
    "checkpoint_every": _parse_int,
    "eta": _parse_float,
    "beta1": _parse_float,
    "beta2": _parse_float,
    "epsilon": _parse_float,
    "split_fraction": _parse_float,
    "batch": _parse_batch,
    "output_activation": str.lower,
    "optimizer": str.lower,
    "split_mode": str.lower,
    "scaling": str.lower,
}
PATH_KEYS = {"wells_csv", "climate_csv", "model_out", "report_out", "plot_out",
             "predict_out", "plot_png", "ablation_out", "resume_from"}
OPTIONAL_PATH_KEYS = {"plot_png", "resume_from"}
REQUIRED_KEYS = {"wells_csv", "climate_csv"}


def parse_config(raw: Dict[str, Optional[str]], base_dir: Path) -> RunConfig:
    known = {f.name for f in fields(RunConfig)}
    values = {}
    for key, text in raw.items():
        if key not in known:
            raise ConfigError(f"unknown config key '{key}'")
        if text is None:
            raise ConfigError(f"config key '{key}' has no value")
        text = text.strip()
        if key in PATH_KEYS:
            if not text:
                if key in OPTIONAL_PATH_KEYS:
                    values[key] = None
                    continue
                raise ConfigError(f"config key '{key}' is empty")
            path = Path(text)
            values[key] = path if path.is_absolute() else base_dir / path
            continue
        try:
            values[key] = PARSERS[key](text)
        except ValueError as e:
            raise ConfigError(f"config key '{key}': cannot parse '{text}'") from e

    missing = REQUIRED_KEYS - values.keys()
    if missing:
        raise ConfigError(f"config is missing required key(s): {', '.join(sorted(missing))}")
    for key in PATH_KEYS - OPTIONAL_PATH_KEYS - REQUIRED_KEYS:
        if key not in values:
            default = next(f.default for f in fields(RunConfig) if f.name == key)
            values[key] = base_dir / default
    return RunConfig(**values)


def load_config(path) -> RunConfig:
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}")
    raw = dotenv_values(path, interpolate=False, encoding="utf-8")
    config = parse_config(dict(raw), path.resolve().parent)
    settings = ", ".join(config.canonical().splitlines())
    logger.info(f"Loaded config {path}: {settings}")
    return config


def file_digest(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()[:16]


def fingerprint(config: RunConfig) -> str:
    """units, config hash, seed and input file hashes, plus the checkpoint hash when resuming"""
    config_hash = hashlib.sha256(config.canonical().encode("utf-8")).hexdigest()[:16]
    text = (
        f"units=m;config={config_hash};seed={config.seed};"
        f"wells={file_digest(config.wells_csv)};climate={file_digest(config.climate_csv)}"
    )
    if config.resume_from is not None:
        if not Path(config.resume_from).is_file():
            raise ConfigError(f"resume_from file not found: {config.resume_from}")
        text += f";resume={file_digest(config.resume_from)}"
    return text
