import numpy as np
import pytest

from utils.errors import ModelFileError
from utils.model_io import Checkpoint, dumps_model, load_model, loads_model, save_model
from utils.network import flatten_params, init_mlp, mlp_backward, mlp_forward, unflatten_params
from utils.optim import AdamHyper, adam_init, adam_step
from utils.numerics import rng_from_seed


def _model(seed=0, sizes=(3, 7, 1), output="linear"):
    return init_mlp(list(sizes), output, rng_from_seed(seed))


def _trained_checkpoint(model, steps=3):
    """A few real Adam steps so the moments are non-trivial"""
    hyper = AdamHyper(eta=0.01)
    state = adam_init(hyper, model.param_shapes())
    x = np.random.default_rng(1).normal(size=(6, model.layer_sizes[0]))
    y = np.random.default_rng(2).normal(size=(6, 1))
    params = flatten_params(model)
    for _ in range(steps):
        grads = mlp_backward(model, mlp_forward(model, x), y).flat()
        state, params = adam_step(state, params, grads, hyper)
        model = unflatten_params(model, params)
    return model, Checkpoint(state, hyper, epoch=steps)


class TestRoundTrip:
    @pytest.mark.parametrize("seed", [0, 1, 2 ** 40])
    def test_parameters_are_bit_exact(self, seed):
        model = _model(seed, output="relu")
        loaded, checkpoint = loads_model(dumps_model(model))
        assert checkpoint is None
        assert loaded.layer_sizes == model.layer_sizes
        assert loaded.output_activation == "relu"
        for p, q in zip(flatten_params(model), flatten_params(loaded)):
            assert np.array_equal(p, q)
        assert dumps_model(loaded) == dumps_model(model)

    def test_checkpoint_section(self):
        model, checkpoint = _trained_checkpoint(_model(3))
        loaded, restored = loads_model(dumps_model(model, checkpoint))
        assert restored.state.t == 3 and restored.epoch == 3
        assert restored.hyper == checkpoint.hyper
        for a, b in zip(checkpoint.state.m + checkpoint.state.v, restored.state.m + restored.state.v):
            assert np.array_equal(a, b)

    def test_save_and_load(self, tmp_path):
        model = _model(4)
        path = tmp_path / "nested" / "model.mlp"
        save_model(path, model)
        text = path.read_text(encoding="utf-8")
        assert text.startswith("MLPV1\nlayer_sizes 3 7 1\n") and text.endswith("END\n")
        loaded, _ = load_model(path)
        assert np.array_equal(loaded.weights[0], model.weights[0])


class TestCorruption:
    def test_truncated(self):
        lines = dumps_model(_model()).splitlines()
        with pytest.raises(ModelFileError):
            loads_model("\n".join(lines[: len(lines) // 2]))

    def test_bad_magic(self):
        text = dumps_model(_model()).replace("MLPV1", "MLPV2", 1)
        with pytest.raises(ModelFileError, match="header"):
            loads_model(text)

    def test_non_numeric_weight_names_section(self):
        lines = dumps_model(_model()).splitlines()
        row = lines.index("W0 3 7") + 1
        lines[row] = "abc " + lines[row].split(" ", 1)[1]
        with pytest.raises(ModelFileError, match="'W0'") as info:
            loads_model("\n".join(lines))
        assert info.value.section == "W0"

    def test_shape_mismatch(self):
        text = dumps_model(_model()).replace("b0 1 7", "b0 1 6")
        with pytest.raises(ModelFileError, match="b0"):
            loads_model(text)

    def test_missing_end_marker(self):
        text = dumps_model(_model()).replace("END\n", "")
        with pytest.raises(ModelFileError, match="END"):
            loads_model(text)

    def test_unknown_activation(self):
        text = dumps_model(_model()).replace("output_activation linear", "output_activation tanh")
        with pytest.raises(ModelFileError):
            loads_model(text)

    def test_negative_second_moment(self):
        model, checkpoint = _trained_checkpoint(_model(5))
        checkpoint.state.v[0][0, 0] = -1.0
        with pytest.raises(ModelFileError, match="ADAMV1"):
            loads_model(dumps_model(model, checkpoint))

    def test_missing_file(self, tmp_path):
        with pytest.raises(ModelFileError, match="header"):
            load_model(tmp_path / "absent.mlp")
