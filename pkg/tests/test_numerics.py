import numpy as np
import pytest

import utils.numerics as numerics
from utils.errors import ConfigError, ShapeError
from utils.numerics import (
    add_row_broadcast,
    as_matrix,
    mat_mul,
    mat_transpose,
    rng_from_seed,
    rng_standard_normal,
)

A = np.array([[1.0, 2.0], [3.0, 4.0]])


class TestMatMul:
    def test_identity(self):
        assert np.array_equal(mat_mul(np.eye(2), A), A)

    def test_zero(self):
        assert np.array_equal(mat_mul(A, np.zeros((2, 2))), np.zeros((2, 2)))

    def test_hand_product(self):
        assert np.array_equal(mat_mul(A, np.array([[5.0], [6.0]])), np.array([[17.0], [39.0]]))

    def test_shape_error_names_both_shapes(self):
        with pytest.raises(ShapeError, match="2x2.*3x1"):
            mat_mul(A, np.ones((3, 1)))

    def test_vector_input_is_a_shape_error(self):
        with pytest.raises(ShapeError, match="3 by 3x1"):
            mat_mul(np.ones(3), np.ones((3, 1)))

    def test_associativity(self):
        rng = np.random.default_rng(0)
        for _ in range(20):
            a, b, c = (rng.uniform(-1, 1, (5, 5)) for _ in range(3))
            np.testing.assert_allclose(mat_mul(mat_mul(a, b), c), mat_mul(a, mat_mul(b, c)), rtol=1e-9, atol=1e-12)

    def test_identity_is_bit_exact(self):
        rng = np.random.default_rng(1)
        b = rng.normal(size=(7, 4))
        assert np.array_equal(mat_mul(np.eye(7), b), b)
        assert np.array_equal(mat_mul(b, np.eye(4)), b)

    def test_rows_are_independent(self):
        rng = np.random.default_rng(2)
        a, b = rng.normal(size=(6, 9)), rng.normal(size=(9, 3))
        full = mat_mul(a, b)
        for i in range(6):
            assert np.array_equal(mat_mul(a[i:i + 1], b), full[i:i + 1])

    def test_streaming_path_matches_dense_path(self, monkeypatch):
        rng = np.random.default_rng(3)
        a, b = rng.normal(size=(8, 11)), rng.normal(size=(11, 5))
        dense = mat_mul(a, b)
        monkeypatch.setattr(numerics, "DENSE_PRODUCT_LIMIT", 0)
        assert np.array_equal(mat_mul(a, b), dense)

    def test_sequential_order(self):
        # 1e16 + 1 rounds back to 1e16 before the last term is added
        a = np.array([[1e16, 1.0, -1e16]])
        b = np.ones((3, 1))
        assert mat_mul(a, b)[0, 0] == 0.0


class TestTranspose:
    def test_identity(self):
        assert np.array_equal(mat_transpose(np.eye(2)), np.eye(2))

    def test_row_to_column(self):
        assert np.array_equal(mat_transpose(np.array([[1.0, 2.0, 3.0]])), np.array([[1.0], [2.0], [3.0]]))

    def test_involution(self):
        a = np.random.default_rng(4).normal(size=(3, 5))
        assert np.array_equal(mat_transpose(mat_transpose(a)), a)


class TestAddRowBroadcast:
    def test_zero_row(self):
        assert np.array_equal(add_row_broadcast(A, np.zeros((1, 2))), A)

    def test_hand_example(self):
        out = add_row_broadcast(np.array([[1.0, 1.0], [2.0, 2.0]]), np.array([[10.0, 20.0]]))
        assert np.array_equal(out, np.array([[11.0, 21.0], [12.0, 22.0]]))

    def test_single_row_is_plain_addition(self):
        a, bias = np.array([[1.5, -2.0]]), np.array([[0.25, 4.0]])
        assert np.array_equal(add_row_broadcast(a, bias), a + bias)

    def test_shape_error(self):
        with pytest.raises(ShapeError):
            add_row_broadcast(A, np.zeros((1, 3)))
        with pytest.raises(ShapeError):
            add_row_broadcast(np.ones(2), np.zeros((1, 2)))


class TestRng:
    def test_same_seed_same_matrix(self):
        assert np.array_equal(rng_standard_normal(rng_from_seed(42), 3, 4), rng_standard_normal(rng_from_seed(42), 3, 4))

    def test_different_seeds_differ(self):
        assert not np.array_equal(rng_standard_normal(rng_from_seed(1), 3, 4), rng_standard_normal(rng_from_seed(2), 3, 4))

    def test_state_advances(self):
        state = rng_from_seed(5)
        assert not np.array_equal(rng_standard_normal(state, 2, 2), rng_standard_normal(state, 2, 2))

    def test_sample_mean(self):
        sample = rng_standard_normal(rng_from_seed(123), 1000, 1000)
        assert abs(sample.mean()) < 0.01

    def test_determinism_over_many_seeds(self):
        seeds = np.random.default_rng(9).integers(0, 2 ** 63, size=1000, dtype=np.uint64)
        for seed in seeds:
            first = rng_standard_normal(rng_from_seed(int(seed)), 2, 3)
            second = rng_standard_normal(rng_from_seed(int(seed)), 2, 3)
            assert np.array_equal(first, second)

    def test_full_64_bit_range(self):
        rng_from_seed(2 ** 64 - 1)
        with pytest.raises(ConfigError):
            rng_from_seed(2 ** 64)
        with pytest.raises(ConfigError):
            rng_from_seed(-1)


def test_as_matrix_rejects_non_finite():
    with pytest.raises(ShapeError):
        as_matrix([[1.0, np.nan]])
    with pytest.raises(ShapeError):
        as_matrix([1.0, 2.0])
    assert as_matrix([[1, 2]]).dtype == np.float64
