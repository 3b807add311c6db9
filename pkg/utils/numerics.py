# numerics.py
"""
Deterministic dense linear algebra and seeded random numbers.

Matrices are 2-D float64 numpy arrays. Products never go through BLAS:
every output element is accumulated left to right over the inner
dimension, so a batch product equals the stacked single-row products
bit for bit.

Random numbers come from numpy's PCG64 bit generator (128-bit LCG state,
XSL-RR output) seeded with a 64-bit unsigned seed; normals use the
Generator ziggurat sampler. Pin numpy to keep streams frozen.
"""

from dataclasses import dataclass, field

import numpy as np

from utils.errors import ConfigError, ShapeError

Matrix = np.ndarray

MAX_SEED = 2 ** 64

# above this many element products mat_mul streams rank-1 updates instead
DENSE_PRODUCT_LIMIT = 4_000_000


def as_matrix(values, name: str = "matrix") -> Matrix:
    """Coerce to a finite 2-D float64 array"""
    arr = np.asarray(values, dtype=np.float64)
    if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
        raise ShapeError(f"{name} must be a non-empty 2-D matrix, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ShapeError(f"{name} contains non-finite entries")
    return arr


def _dims(m: Matrix) -> str:
    return "x".join(str(d) for d in np.shape(m))


def mat_mul(a: Matrix, b: Matrix) -> Matrix:
    """Matrix product with sequential accumulation over the inner dimension"""
    if a.ndim != 2 or b.ndim != 2 or a.shape[1] != b.shape[0]:
        raise ShapeError(f"cannot multiply {_dims(a)} by {_dims(b)}")
    m, k = a.shape
    n = b.shape[1]
    if m * k * n <= DENSE_PRODUCT_LIMIT:
        products = a[:, :, None] * b[None, :, :]
        # add.accumulate is a plain running sum, unlike add.reduce (pairwise)
        return np.add.accumulate(products, axis=1)[:, -1, :]
    # same summation order, one rank-1 update at a time
    out = a[:, 0:1] * b[0:1, :]
    for j in range(1, k):
        out += a[:, j:j + 1] * b[j:j + 1, :]
    return out


def mat_transpose(a: Matrix) -> Matrix:
    return np.ascontiguousarray(a.T)


def add_row_broadcast(a: Matrix, bias: Matrix) -> Matrix:
    """Add a 1 x n bias row to every row of a"""
    if a.ndim != 2 or bias.ndim != 2 or bias.shape[0] != 1 or bias.shape[1] != a.shape[1]:
        raise ShapeError(f"cannot broadcast bias {_dims(bias)} onto {_dims(a)}")
    return a + bias


@dataclass
class RngState:
    """Seed plus the live generator; drawing advances it in place"""
    seed: int
    generator: np.random.Generator = field(repr=False)


def rng_from_seed(seed: int) -> RngState:
    seed = int(seed)
    if not 0 <= seed < MAX_SEED:
        raise ConfigError(f"seed must be a 64-bit unsigned integer, got {seed}")
    return RngState(seed=seed, generator=np.random.Generator(np.random.PCG64(seed)))


def rng_standard_normal(state: RngState, rows: int, cols: int) -> Matrix:
    if rows < 1 or cols < 1:
        raise ShapeError(f"cannot draw a {rows}x{cols} matrix")
    return state.generator.standard_normal((rows, cols))
