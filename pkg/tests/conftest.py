import pytest

import synthetic
from tests.helpers import write_text


@pytest.fixture
def synthetic_inputs(tmp_path):
    """Synthetic wells/climate CSVs with 12 months of future climate"""
    wells = tmp_path / "data" / "wells.csv"
    climate = tmp_path / "data" / "climate.csv"
    synthetic.write_fixture(wells, climate, seed=7, extra_climate_months=12)
    return wells, climate


@pytest.fixture
def make_config(tmp_path, synthetic_inputs):
    """Write a run config over the synthetic inputs; small network unless overridden"""
    wells, climate = synthetic_inputs

    def _make(name="run.conf", **overrides):
        settings = {
            "wells_csv": str(wells),
            "climate_csv": str(climate),
            "hidden_size": 8,
            "epochs": 40,
            "eta": 0.01,
            "model_out": f"out_{name}/model.mlp",
            "report_out": f"out_{name}/report.csv",
            "plot_out": f"out_{name}/plot.csv",
            "predict_out": f"out_{name}/predictions.csv",
        }
        settings.update(overrides)
        text = "\n".join(f"{key} = {value}" for key, value in settings.items()) + "\n"
        return write_text(tmp_path / name, text)

    return _make
