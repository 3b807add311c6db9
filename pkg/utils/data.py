# data.py
"""
Well and climate ingestion, weighted well aggregation, lag windowing,
train/test splitting and feature/target scaling.

Input CSVs are UTF-8, comma separated, '.' decimal point, dates as YYYY-MM:

    wells:   well_id,date,level_masl,weight
    climate: date,temp_c,precip_mm
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import List, Tuple

import numpy as np
import pandas as pd

from utils.errors import (
    AlignmentError,
    ConfigError,
    DataError,
    DegenerateColumnError,
    EmptyDataError,
    ParseError,
    SchemaError,
    ShapeError,
    TemporalError,
)
from utils.numerics import Matrix, mat_mul, rng_from_seed

logger = logging.getLogger(__name__)

WELLS_COLUMNS = ["well_id", "date", "level_masl", "weight"]
CLIMATE_COLUMNS = ["date", "temp_c", "precip_mm"]

CHRONOLOGICAL = "chronological"
RANDOM = "random"
SPLIT_MODES = {CHRONOLOGICAL, RANDOM}

ZSCORE = "zscore"
MINMAX = "minmax"
SCALER_KINDS = {ZSCORE, MINMAX}


@dataclass
class WellSeries:
    """Monthly levels (m a.s.l.) of one observation well and its impact weight"""
    well_id: str
    timestamps: np.ndarray
    levels: np.ndarray
    weight: float


@dataclass
class ClimateSeries:
    """Monthly temperature (deg C) and precipitation (mm/month)"""
    timestamps: np.ndarray
    temperature: np.ndarray
    precipitation: np.ndarray

    def __len__(self) -> int:
        return len(self.timestamps)

    def slice(self, start: int, stop: int) -> "ClimateSeries":
        return ClimateSeries(
            self.timestamps[start:stop],
            self.temperature[start:stop],
            self.precipitation[start:stop],
        )


@dataclass
class Dataset:
    x: Matrix
    y: Matrix
    timestamps: np.ndarray
    feature_names: List[str]

    def __post_init__(self):
        n = self.x.shape[0]
        if n < 1:
            raise EmptyDataError("dataset has no rows")
        if self.y.shape != (n, 1) or len(self.timestamps) != n:
            raise ShapeError(
                f"dataset parts disagree: x {self.x.shape}, y {self.y.shape}, {len(self.timestamps)} timestamps"
            )
        if len(self.feature_names) != self.x.shape[1]:
            raise ShapeError(f"{len(self.feature_names)} feature names for {self.x.shape[1]} columns")
        if not (np.all(np.isfinite(self.x)) and np.all(np.isfinite(self.y))):
            raise DataError("dataset contains non-finite values")

    def __len__(self) -> int:
        return self.x.shape[0]

    def take(self, indices) -> "Dataset":
        indices = np.asarray(indices, dtype=np.int64)
        return Dataset(self.x[indices], self.y[indices], self.timestamps[indices], list(self.feature_names))


@dataclass
class Scaler:
    kind: str
    feature_names: List[str]
    feature_center: np.ndarray
    feature_scale: np.ndarray
    target_center: float
    target_scale: float


def format_months(timestamps: np.ndarray) -> List[str]:
    return [str(s) for s in np.datetime_as_string(timestamps, unit="M")]


# --- ingestion ---

def _read_csv(path, columns: List[str]) -> pd.DataFrame:
    path = Path(path)
    if not path.is_file():
        raise DataError(f"input file not found: {path}")
    try:
        df = pd.read_csv(path, dtype=str, keep_default_na=False, encoding="utf-8")
    except (pd.errors.ParserError, pd.errors.EmptyDataError, UnicodeDecodeError) as e:
        raise ParseError(f"{path}: {e}") from e
    df.columns = [c.strip() for c in df.columns]
    for column in columns:
        if column not in df.columns:
            raise SchemaError(f"{path}: missing column '{column}'")
    if df.empty:
        raise EmptyDataError(f"{path}: no data rows")
    return df


def _parse_numbers(values: pd.Series, column: str, path) -> np.ndarray:
    parsed = pd.to_numeric(values.str.strip(), errors="coerce").to_numpy(dtype=np.float64)
    bad = np.flatnonzero(~np.isfinite(parsed))
    if bad.size:
        row = int(bad[0])
        raise ParseError(f"{path}: row {row + 1}: '{values.iloc[row]}' in column '{column}' is not a finite number")
    return parsed


def _parse_months(values: pd.Series, path) -> np.ndarray:
    parsed = pd.to_datetime(values.str.strip(), format="%Y-%m", errors="coerce")
    bad = np.flatnonzero(parsed.isna().to_numpy())
    if bad.size:
        row = int(bad[0])
        raise ParseError(f"{path}: row {row + 1}: date '{values.iloc[row]}' is not YYYY-MM")
    return parsed.to_numpy().astype("datetime64[M]")


def _check_monthly(timestamps: np.ndarray, label: str):
    """Sorted timestamps must advance by exactly one month"""
    steps = np.diff(timestamps).astype(np.int64)
    for i in np.flatnonzero(steps != 1):
        when = format_months(timestamps[i + 1:i + 2])[0]
        if steps[i] == 0:
            raise TemporalError(f"{label}: duplicate month {when}")
        raise TemporalError(f"{label}: missing month(s) before {when}")


def load_wells_csv(path) -> List[WellSeries]:
    df = _read_csv(path, WELLS_COLUMNS)
    well_ids = df["well_id"].str.strip()
    dates = _parse_months(df["date"], path)
    levels = _parse_numbers(df["level_masl"], "level_masl", path)
    weights = _parse_numbers(df["weight"], "weight", path)

    wells = []
    for well_id in dict.fromkeys(well_ids):
        rows = np.flatnonzero((well_ids == well_id).to_numpy())
        well_weights = weights[rows]
        if np.any(well_weights != well_weights[0]):
            raise SchemaError(f"{path}: weight of well '{well_id}' is not constant")
        if well_weights[0] < 0:
            raise SchemaError(f"{path}: weight of well '{well_id}' is negative")
        order = rows[np.argsort(dates[rows], kind="stable")]
        _check_monthly(dates[order], f"{path}: well '{well_id}'")
        wells.append(WellSeries(well_id, dates[order], levels[order], float(well_weights[0])))

    logger.info(f"Loaded {len(wells)} wells ({len(df)} rows) from {path}")
    return wells


def load_climate_csv(path) -> ClimateSeries:
    df = _read_csv(path, CLIMATE_COLUMNS)
    dates = _parse_months(df["date"], path)
    temperature = _parse_numbers(df["temp_c"], "temp_c", path)
    precipitation = _parse_numbers(df["precip_mm"], "precip_mm", path)

    order = np.argsort(dates, kind="stable")
    _check_monthly(dates[order], f"{path}: climate")
    logger.info(f"Loaded {len(df)} climate months from {path}")
    return ClimateSeries(dates[order], temperature[order], precipitation[order])


def load_inputs(wells_path, climate_path) -> Tuple[List[WellSeries], ClimateSeries]:
    """Read both input files concurrently"""
    with ThreadPoolExecutor(max_workers=2) as executor:
        wells_future = executor.submit(load_wells_csv, wells_path)
        climate_future = executor.submit(load_climate_csv, climate_path)
        return wells_future.result(), climate_future.result()


# --- aggregation and windowing ---

def aggregate_weighted(wells: List[WellSeries]) -> Tuple[np.ndarray, np.ndarray]:
    """level_t = sum_i w_i * level_i,t / sum_i w_i"""
    if not wells:
        raise EmptyDataError("no wells to aggregate")
    grid = wells[0].timestamps
    for well in wells[1:]:
        if not np.array_equal(well.timestamps, grid):
            raise AlignmentError(
                f"well '{well.well_id}' does not share the month grid of well '{wells[0].well_id}'"
            )
    weights = np.array([[well.weight for well in wells]])
    total = float(np.sum(weights))
    if total <= 0:
        raise ConfigError("well weights sum to zero")
    levels = np.vstack([well.levels for well in wells])
    return grid.copy(), mat_mul(weights, levels)[0] / total


def align_climate(climate: ClimateSeries, timestamps: np.ndarray) -> Tuple[ClimateSeries, ClimateSeries]:
    """Split climate into the months of the well grid and the months after it"""
    start = int((timestamps[0] - climate.timestamps[0]).astype(np.int64))
    stop = start + len(timestamps)
    if start < 0 or stop > len(climate) or not np.array_equal(climate.timestamps[start:stop], timestamps):
        covered = format_months(climate.timestamps[[0, -1]])
        needed = format_months(timestamps[[0, -1]])
        raise AlignmentError(
            f"climate covers {covered[0]}..{covered[1]} but wells need {needed[0]}..{needed[1]}"
        )
    return climate.slice(start, stop), climate.slice(stop, len(climate))


def lag_feature_names(lags: int) -> List[str]:
    return ["temp_c", "precip_mm"] + [f"level_lag{k}" for k in range(1, lags + 1)]


def build_supervised(climate: ClimateSeries, agg_timestamps: np.ndarray, agg_levels: np.ndarray, lags: int) -> Dataset:
    """Rows [temp_t, precip_t, level_t-1, ..., level_t-lags] -> level_t for t >= lags"""
    if int(lags) != lags or lags < 1:
        raise ConfigError(f"lags must be a positive integer, got {lags}")
    if not np.array_equal(climate.timestamps, agg_timestamps):
        raise AlignmentError("climate and aggregated levels are on different month grids")
    length = len(agg_levels)
    if length <= lags:
        raise EmptyDataError(f"series of {length} months is too short for {lags} lag(s)")

    columns = [climate.temperature[lags:], climate.precipitation[lags:]]
    columns += [agg_levels[lags - k:length - k] for k in range(1, lags + 1)]
    return Dataset(
        x=np.column_stack(columns).astype(np.float64),
        y=np.asarray(agg_levels[lags:], dtype=np.float64).reshape(-1, 1),
        timestamps=agg_timestamps[lags:].copy(),
        feature_names=lag_feature_names(lags),
    )


def split_dataset(ds: Dataset, fraction: float, mode: str = CHRONOLOGICAL, seed: int = 0) -> Tuple[Dataset, Dataset]:
    """First floor(fraction * N) rows (or a seeded random subset) train, the rest test"""
    if not 0 < fraction < 1:
        raise ConfigError(f"split fraction must be in (0, 1), got {fraction}")
    if mode not in SPLIT_MODES:
        raise ConfigError(f"unknown split mode '{mode}'")
    n = len(ds)
    n_train = int(math.floor(fraction * n))
    if n_train < 1 or n_train >= n:
        raise ConfigError(f"fraction {fraction} of {n} rows leaves an empty train or test partition")

    if mode == CHRONOLOGICAL:
        return ds.take(np.arange(n_train)), ds.take(np.arange(n_train, n))
    order = rng_from_seed(seed).generator.permutation(n)
    return ds.take(np.sort(order[:n_train])), ds.take(np.sort(order[n_train:]))


# --- scaling ---

def _column_stats(values: Matrix, names: List[str], kind: str) -> Tuple[np.ndarray, np.ndarray]:
    if kind == ZSCORE:
        center = values.mean(axis=0)
        scale = values.std(axis=0)
    else:
        center = values.min(axis=0)
        scale = values.max(axis=0) - center
    for name, s in zip(names, scale):
        if not s > 0:
            raise DegenerateColumnError(f"column '{name}' has no variation, cannot apply {kind} scaling")
    return center, scale


def fit_scaler(train: Dataset, kind: str = ZSCORE) -> Scaler:
    """Column statistics from the training partition only (population std)"""
    if kind not in SCALER_KINDS:
        raise ConfigError(f"unknown scaling '{kind}'")
    feature_center, feature_scale = _column_stats(train.x, train.feature_names, kind)
    target_center, target_scale = _column_stats(train.y, ["target"], kind)
    return Scaler(
        kind=kind,
        feature_names=list(train.feature_names),
        feature_center=feature_center,
        feature_scale=feature_scale,
        target_center=float(target_center[0]),
        target_scale=float(target_scale[0]),
    )


def scale_features(s: Scaler, x: Matrix) -> Matrix:
    if x.ndim != 2 or x.shape[1] != len(s.feature_center):
        raise ShapeError(f"scaler was fitted on {len(s.feature_center)} columns, got shape {x.shape}")
    return (x - s.feature_center) / s.feature_scale


def apply_scaler(s: Scaler, ds: Dataset) -> Dataset:
    return Dataset(
        x=scale_features(s, ds.x),
        y=(ds.y - s.target_center) / s.target_scale,
        timestamps=ds.timestamps.copy(),
        feature_names=list(ds.feature_names),
    )


def invert_scaler(s: Scaler, y_scaled) -> np.ndarray:
    return np.asarray(y_scaled, dtype=np.float64) * s.target_scale + s.target_center
