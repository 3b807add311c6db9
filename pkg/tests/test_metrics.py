import numpy as np
import pytest

from utils.data import Dataset, apply_scaler, fit_scaler, invert_scaler, split_dataset
from utils.errors import DegenerateColumnError, EmptyDataError, ShapeError
from utils.metrics import MetricsReport, MetricsRow, evaluate_model, mae, mse, r2, rmse
from utils.network import MlpModel


def test_perfect_prediction():
    assert mse([1.0, 2.0, 3.0], [1.0, 2.0, 3.0]) == 0.0
    assert rmse([1.0, 2.0, 3.0], [1.0, 2.0, 3.0]) == 0.0
    assert r2([1.0, 2.0, 3.0], [1.0, 2.0, 3.0]) == 1.0


def test_mean_predictor():
    pred, obs = [2.0, 2.0, 2.0], [1.0, 2.0, 3.0]
    assert mse(pred, obs) == pytest.approx(2.0 / 3.0, abs=1e-15)
    assert mae(pred, obs) == pytest.approx(2.0 / 3.0, abs=1e-15)
    assert r2(pred, obs) == 0.0


def test_r2_hand_example():
    assert r2([1.0, 2.0, 4.0], [1.0, 2.0, 3.0]) == pytest.approx(0.5, abs=1e-15)


def test_translation_invariance():
    rng = np.random.default_rng(0)
    pred, obs = rng.normal(size=50), rng.normal(size=50)
    for shift in (-1650.0, 3.5, 1e4):
        assert rmse(pred + shift, obs + shift) == pytest.approx(rmse(pred, obs), rel=1e-9)
        assert r2(pred + shift, obs + shift) == pytest.approx(r2(pred, obs), rel=1e-9)


def test_mae_never_exceeds_rmse():
    rng = np.random.default_rng(1)
    for _ in range(1000):
        pred, obs = rng.normal(size=8), rng.normal(size=8)
        assert mae(pred, obs) <= rmse(pred, obs) + 1e-15


def test_permutation_invariance():
    rng = np.random.default_rng(2)
    pred, obs = rng.normal(size=30), rng.normal(size=30)
    order = rng.permutation(30)
    assert mse(pred[order], obs[order]) == pytest.approx(mse(pred, obs), rel=1e-12)
    assert r2(pred[order], obs[order]) == pytest.approx(r2(pred, obs), rel=1e-12)


def test_errors():
    with pytest.raises(DegenerateColumnError):
        r2([1.0, 2.0], [5.0, 5.0])
    with pytest.raises(ShapeError):
        mse([1.0], [1.0, 2.0])
    with pytest.raises(EmptyDataError):
        mae([], [])


def _partitions():
    """Chronological split where the last feature column equals the target"""
    rng = np.random.default_rng(3)
    y = 1650.0 + rng.normal(size=(40, 1))
    x = np.column_stack([rng.normal(size=40), rng.uniform(0, 80, size=40), y[:, 0]])
    first = np.datetime64("2010-01", "M")
    ds = Dataset(x, y, np.arange(first, first + 40), ["temp_c", "precip_mm", "level_lag1"])
    train_raw, test_raw = split_dataset(ds, 0.75)
    scaler = fit_scaler(train_raw)
    return scaler, apply_scaler(scaler, train_raw), apply_scaler(scaler, test_raw)


def _linear(weights, bias):
    return MlpModel([3, 1], [np.array(weights, dtype=np.float64).reshape(3, 1)], [np.array([[bias]])], "relu", "linear")


class TestEvaluateModel:
    def test_memorizing_model(self):
        scaler, train, test = _partitions()
        report = evaluate_model(_linear([0.0, 0.0, 1.0], 0.0), scaler, train, test, "fp")
        total = report.row("total")
        assert total.rmse <= 1e-9 and total.r2 >= 1.0 - 1e-12
        assert [row.label for row in report.rows] == ["train", "test", "total"]
        assert total.n == report.row("train").n + report.row("test").n == 40

    def test_constant_mean_predictor(self):
        scaler, train, test = _partitions()
        observed = invert_scaler(scaler, np.concatenate([train.y, test.y]))
        bias = (observed.mean() - scaler.target_center) / scaler.target_scale
        report = evaluate_model(_linear([0.0, 0.0, 0.0], bias), scaler, train, test)
        assert abs(report.row("total").r2) <= 1e-9

    def test_metrics_are_in_original_units(self):
        scaler, train, test = _partitions()
        report = evaluate_model(_linear([0.0, 0.0, 0.0], 0.0), scaler, train, test)
        obs = invert_scaler(scaler, train.y)
        assert report.row("train").mse == pytest.approx(mse(np.full(obs.shape, scaler.target_center), obs), rel=1e-12)


class TestReport:
    def _report(self):
        return MetricsReport(
            [
                MetricsRow("train", 8, 0.5, 0.4, 0.25, 0.9),
                MetricsRow("test", 2, 1.0, 0.8, 1.0, 0.5),
                MetricsRow("total", 10, 0.6, 0.5, 0.36, 0.85),
            ],
            fingerprint="units=m;seed=1",
        )

    def test_csv_layout(self):
        lines = self._report().to_csv().splitlines()
        assert lines[0] == "# fingerprint: units=m;seed=1"
        assert lines[1] == "label,n,rmse,mae,mse,r2"
        assert lines[2] == "train,8,0.5,0.40000000000000002,0.25,0.90000000000000002"
        assert len(lines) == 5

    def test_save(self, tmp_path):
        path = tmp_path / "out" / "report.csv"
        self._report().save(path)
        assert path.read_text(encoding="utf-8") == self._report().to_csv()

    def test_render(self):
        table = self._report().render()
        assert table.splitlines()[0].split() == ["RMSE", "MAE", "MSE", "R^2", "Amount", "Model"]
        assert "80%" in table and "Train" in table and "100%" in table

    def test_row_lookup(self):
        assert self._report().row("test").n == 2
        with pytest.raises(KeyError):
            self._report().row("validation")

    def test_score(self):
        row = MetricsRow.score("test", [2.0, 2.0, 2.0], [1.0, 2.0, 3.0])
        assert row.n == 3 and row.r2 == 0.0 and row.rmse == pytest.approx(np.sqrt(2.0 / 3.0))
