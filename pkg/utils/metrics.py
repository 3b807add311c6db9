# metrics.py
"""
Regression metrics and the train / test / total report.
"""

from dataclasses import asdict, dataclass
from pathlib import Path
from typing import List

import numpy as np
import pandas as pd

from utils.data import Dataset, Scaler, invert_scaler
from utils.errors import DegenerateColumnError, EmptyDataError, ShapeError
from utils.network import MlpModel, mlp_predict

REPORT_COLUMNS = ["label", "n", "rmse", "mae", "mse", "r2"]


def _pair(pred, obs):
    pred = np.asarray(pred, dtype=np.float64).ravel()
    obs = np.asarray(obs, dtype=np.float64).ravel()
    if pred.size != obs.size:
        raise ShapeError(f"{pred.size} predictions for {obs.size} observations")
    if obs.size == 0:
        raise EmptyDataError("cannot score an empty series")
    return pred, obs


def mse(pred, obs) -> float:
    pred, obs = _pair(pred, obs)
    return float(np.mean((pred - obs) ** 2))


def rmse(pred, obs) -> float:
    return float(np.sqrt(mse(pred, obs)))


def mae(pred, obs) -> float:
    pred, obs = _pair(pred, obs)
    return float(np.mean(np.abs(pred - obs)))


def r2(pred, obs) -> float:
    """1 - SS_res / SS_tot, SS_tot about the mean of the evaluated observations"""
    pred, obs = _pair(pred, obs)
    ss_tot = float(np.sum((obs - np.mean(obs)) ** 2))
    if ss_tot == 0:
        raise DegenerateColumnError("observations have zero variance, R^2 is undefined")
    ss_res = float(np.sum((obs - pred) ** 2))
    return 1.0 - ss_res / ss_tot


@dataclass
class MetricsRow:
    label: str
    n: int
    rmse: float
    mae: float
    mse: float
    r2: float

    @classmethod
    def score(cls, label: str, pred, obs) -> "MetricsRow":
        error = mse(pred, obs)
        return cls(
            label=label,
            n=int(np.asarray(obs).size),
            rmse=float(np.sqrt(error)),
            mae=mae(pred, obs),
            mse=error,
            r2=r2(pred, obs),
        )


@dataclass
class MetricsReport:
    rows: List[MetricsRow]
    fingerprint: str = ""

    def row(self, label: str) -> MetricsRow:
        for row in self.rows:
            if row.label == label:
                return row
        raise KeyError(label)

    def to_csv(self) -> str:
        frame = pd.DataFrame([asdict(row) for row in self.rows], columns=REPORT_COLUMNS)
        body = frame.to_csv(index=False, float_format="%.17g", lineterminator="\n")
        return f"# fingerprint: {self.fingerprint}\n{body}"

    def save(self, path):
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(self.to_csv(), encoding="utf-8")

    def render(self) -> str:
        """Fixed-width table: RMSE MAE MSE R^2 Amount Model"""
        total = self.row("total").n
        lines = [f"{'RMSE':<9}{'MAE':<9}{'MSE':<9}{'R^2':<9}{'Amount':<8}{'Model'}"]
        for row in self.rows:
            amount = f"{round(100 * row.n / total)}%"
            lines.append(
                f"{row.rmse:<9.4f}{row.mae:<9.4f}{row.mse:<9.4f}{row.r2:<9.4f}{amount:<8}{row.label.title()}"
            )
        return "\n".join(lines)


def evaluate_model(model: MlpModel, scaler: Scaler, train: Dataset, test: Dataset, fingerprint: str = "") -> MetricsReport:
    """Score scaled train/test datasets in original units (meters)"""
    pred_train = invert_scaler(scaler, mlp_predict(model, train.x))
    pred_test = invert_scaler(scaler, mlp_predict(model, test.x))
    obs_train = invert_scaler(scaler, train.y)
    obs_test = invert_scaler(scaler, test.y)
    rows = [
        MetricsRow.score("train", pred_train, obs_train),
        MetricsRow.score("test", pred_test, obs_test),
        MetricsRow.score(
            "total",
            np.concatenate([pred_train.ravel(), pred_test.ravel()]),
            np.concatenate([obs_train.ravel(), obs_test.ravel()]),
        ),
    ]
    return MetricsReport(rows, fingerprint)
