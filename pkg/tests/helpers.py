import numpy as np

from utils.network import MlpModel


def write_text(path, text):
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")
    return path


def single_neuron(weights, bias, output_activation="relu"):
    """1-layer model with one output neuron"""
    w = np.array(weights, dtype=np.float64).reshape(-1, 1)
    return MlpModel([w.shape[0], 1], [w], [np.array([[bias]], dtype=np.float64)], "relu", output_activation)
