# model_io.py
"""
Versioned plain-text model files.

    MLPV1
    layer_sizes 3 500 1
    hidden_activation relu
    output_activation linear
    W0 3 500
    <one line per matrix row, values as %.17g>
    b0 1 500
    ...
    [ADAMV1 checkpoint section: t, epoch, hyperparameters, m0.., v0..]
    END

17 significant digits round-trip float64 exactly.
"""

from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional, Tuple

import numpy as np

from utils.errors import ModelFileError
from utils.network import MlpModel, flatten_params
from utils.numerics import Matrix
from utils.optim import AdamHyper, AdamState

MODEL_MAGIC = "MLPV1"
ADAM_MAGIC = "ADAMV1"
END_MARKER = "END"


@dataclass
class Checkpoint:
    """Optimizer state saved next to the weights so training can resume"""
    state: AdamState
    hyper: AdamHyper
    epoch: int


def _format_matrix(name: str, matrix: Matrix) -> List[str]:
    lines = [f"{name} {matrix.shape[0]} {matrix.shape[1]}"]
    for row in matrix:
        lines.append(" ".join(format(float(v), ".17g") for v in row))
    return lines


def dumps_model(model: MlpModel, checkpoint: Optional[Checkpoint] = None) -> str:
    lines = [
        MODEL_MAGIC,
        "layer_sizes " + " ".join(str(n) for n in model.layer_sizes),
        f"hidden_activation {model.hidden_activation}",
        f"output_activation {model.output_activation}",
    ]
    for l, (w, b) in enumerate(zip(model.weights, model.biases)):
        lines += _format_matrix(f"W{l}", w)
        lines += _format_matrix(f"b{l}", b)

    if checkpoint is not None:
        hyper = checkpoint.hyper
        lines += [
            ADAM_MAGIC,
            f"t {checkpoint.state.t}",
            f"epoch {checkpoint.epoch}",
            f"eta {hyper.eta!r}",
            f"beta1 {hyper.beta1!r}",
            f"beta2 {hyper.beta2!r}",
            f"epsilon {hyper.epsilon!r}",
        ]
        for i, m in enumerate(checkpoint.state.m):
            lines += _format_matrix(f"m{i}", m)
        for i, v in enumerate(checkpoint.state.v):
            lines += _format_matrix(f"v{i}", v)

    lines.append(END_MARKER)
    return "\n".join(lines) + "\n"


def save_model(path, model: MlpModel, checkpoint: Optional[Checkpoint] = None):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dumps_model(model, checkpoint), encoding="utf-8")


class _Reader:
    def __init__(self, text: str):
        self.lines = text.splitlines()
        self.pos = 0

    def peek(self) -> Optional[str]:
        return self.lines[self.pos].strip() if self.pos < len(self.lines) else None

    def next(self, section: str) -> str:
        if self.pos >= len(self.lines):
            raise ModelFileError(section, "unexpected end of file")
        line = self.lines[self.pos].strip()
        self.pos += 1
        return line

    def keyed(self, key: str, section: str) -> List[str]:
        parts = self.next(section).split()
        if not parts or parts[0] != key:
            raise ModelFileError(section, f"expected '{key}' line")
        return parts[1:]

    def number(self, key: str, section: str, cast=float):
        values = self.keyed(key, section)
        try:
            (value,) = values
            return cast(value)
        except ValueError as e:
            raise ModelFileError(section, f"bad '{key}' value") from e

    def matrix(self, name: str, shape: Tuple[int, int]) -> Matrix:
        header = self.keyed(name, name)
        if [str(n) for n in shape] != header:
            raise ModelFileError(name, f"expected shape {shape[0]} {shape[1]}, got {' '.join(header)}")
        rows = []
        for _ in range(shape[0]):
            try:
                row = [float(v) for v in self.next(name).split()]
            except ValueError as e:
                raise ModelFileError(name, "non-numeric entry") from e
            if len(row) != shape[1]:
                raise ModelFileError(name, f"row has {len(row)} values, expected {shape[1]}")
            rows.append(row)
        matrix = np.array(rows, dtype=np.float64).reshape(shape)
        if not np.all(np.isfinite(matrix)):
            raise ModelFileError(name, "non-finite entry")
        return matrix


def loads_model(text: str) -> Tuple[MlpModel, Optional[Checkpoint]]:
    reader = _Reader(text)
    if reader.next("header") != MODEL_MAGIC:
        raise ModelFileError("header", f"missing '{MODEL_MAGIC}' magic line")
    try:
        sizes = [int(n) for n in reader.keyed("layer_sizes", "layer_sizes")]
    except ValueError as e:
        raise ModelFileError("layer_sizes", "non-integer layer size") from e
    if len(sizes) < 2 or any(n < 1 for n in sizes):
        raise ModelFileError("layer_sizes", f"invalid sizes {sizes}")
    hidden = reader.number("hidden_activation", "hidden_activation", str)
    output = reader.number("output_activation", "output_activation", str)

    weights, biases = [], []
    for l in range(len(sizes) - 1):
        weights.append(reader.matrix(f"W{l}", (sizes[l], sizes[l + 1])))
        biases.append(reader.matrix(f"b{l}", (1, sizes[l + 1])))
    try:
        model = MlpModel(sizes, weights, biases, hidden, output)
    except ValueError as e:
        raise ModelFileError("activations", str(e)) from e

    checkpoint = None
    if reader.peek() == ADAM_MAGIC:
        reader.next(ADAM_MAGIC)
        t = reader.number("t", ADAM_MAGIC, int)
        epoch = reader.number("epoch", ADAM_MAGIC, int)
        try:
            hyper = AdamHyper(
                eta=reader.number("eta", ADAM_MAGIC),
                beta1=reader.number("beta1", ADAM_MAGIC),
                beta2=reader.number("beta2", ADAM_MAGIC),
                epsilon=reader.number("epsilon", ADAM_MAGIC),
            )
        except ValueError as e:
            raise ModelFileError(ADAM_MAGIC, str(e)) from e
        shapes = [p.shape for p in flatten_params(model)]
        m = [reader.matrix(f"m{i}", s) for i, s in enumerate(shapes)]
        v = [reader.matrix(f"v{i}", s) for i, s in enumerate(shapes)]
        if t < 0 or epoch < 0 or any(np.any(x < 0) for x in v):
            raise ModelFileError(ADAM_MAGIC, "negative step count or second moment")
        checkpoint = Checkpoint(AdamState(m, v, t), hyper, epoch)

    if reader.next(END_MARKER) != END_MARKER:
        raise ModelFileError(END_MARKER, "missing end marker")
    return model, checkpoint


def load_model(path) -> Tuple[MlpModel, Optional[Checkpoint]]:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as e:
        raise ModelFileError("header", f"cannot read {path}: {e}") from e
    return loads_model(text)
