from math import comb

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cfreach.basis import (
    basis_from_exponents,
    basis_size,
    enumerate_basis,
    eval_basis,
)
from cfreach.errors import DimensionMismatch

from oracles import brute_exponents, monomials


def grlex_key(e):
    # higher total degree later; within a degree, larger leading powers first
    return (sum(e), tuple(-v for v in e))


class TestEnumerate:
    def test_two_variables_degree_two(self):
        b = enumerate_basis(2, 2)
        assert {tuple(e) for e in b.exponents.tolist()} == {
            (0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2)
        }
        assert b.exponents.tolist() == [[0, 0], [1, 0], [0, 1], [2, 0], [1, 1], [0, 2]]

    def test_univariate_order(self):
        assert enumerate_basis(1, 3).exponents.tolist() == [[0], [1], [2], [3]]

    def test_six_variables_degree_four(self):
        # 210 = binomial(10, 4), also the count found by exhaustive search
        assert enumerate_basis(6, 4).size == 210 == len(brute_exponents(6, 4))

    def test_rejects_zero_variables(self):
        with pytest.raises(ValueError):
            enumerate_basis(0, 3)
        with pytest.raises(ValueError):
            enumerate_basis(2, -1)

    @pytest.mark.parametrize("n,k", [(1, 0), (1, 5), (2, 4), (3, 3), (4, 2), (5, 3)])
    def test_matches_brute_force_set_and_order(self, n, k):
        b = enumerate_basis(n, k)
        rows = [tuple(e) for e in b.exponents.tolist()]
        assert set(rows) == set(brute_exponents(n, k))
        assert rows == sorted(rows, key=grlex_key)
        assert len(set(rows)) == len(rows)
        assert rows[0] == (0,) * n

    def test_deterministic(self):
        enumerate_basis.cache_clear()
        a = enumerate_basis(3, 4).exponents.copy()
        enumerate_basis.cache_clear()
        assert np.array_equal(a, enumerate_basis(3, 4).exponents)

    def test_predecessor_table_is_one_step(self):
        b = enumerate_basis(3, 4)
        for j in range(1, b.size):
            diff = b.exponents[j].astype(int) - b.exponents[b.pred[j]].astype(int)
            assert b.pred[j] < j
            assert diff.tolist() == [int(i == b.var[j]) for i in range(3)]


class TestBasisSize:
    def test_values(self):
        assert basis_size(2, 10) == 66
        assert basis_size(2, 20) == 231
        assert basis_size(7, 0) == 1

    def test_overflow(self):
        with pytest.raises(OverflowError):
            basis_size(60, 60)

    @given(st.integers(1, 6), st.integers(0, 8))
    @settings(max_examples=40, deadline=None)
    def test_length_matches_size(self, n, k):
        assert enumerate_basis(n, k).size == basis_size(n, k) == comb(n + k, n)


class TestEval:
    def test_origin(self):
        z = eval_basis(enumerate_basis(2, 2), [0.0, 0.0])
        assert z.tolist() == [1, 0, 0, 0, 0, 0]

    def test_hand_values(self):
        b = enumerate_basis(2, 2)
        z = eval_basis(b, [2.0, 3.0])
        got = dict(zip(map(tuple, b.exponents.tolist()), z.tolist()))
        assert got == {(0, 0): 1, (1, 0): 2, (0, 1): 3, (2, 0): 4, (1, 1): 6, (0, 2): 9}

    def test_univariate_negative(self):
        assert eval_basis(enumerate_basis(1, 3), [-2.0]).tolist() == [1, -2, 4, -8]

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatch):
            eval_basis(enumerate_basis(2, 2), [1.0, 2.0, 3.0])

    def test_batch_matches_pow(self, backend, rng):
        b = enumerate_basis(3, 5)
        X = rng.uniform(-1.5, 1.5, size=(50, 3))
        np.testing.assert_allclose(eval_basis(b, X), monomials(X, b.exponents), rtol=1e-13)

    @given(st.lists(st.floats(-10, 10), min_size=2, max_size=2))
    @settings(max_examples=50, deadline=None)
    def test_constant_slot_is_one(self, x):
        assert eval_basis(enumerate_basis(2, 5), x)[0] == 1.0

    def test_univariate_doubling(self):
        # z(x^2)_j = z(x)_{2j} for j <= k/2 in one variable
        b = enumerate_basis(1, 6)
        x = 1.7
        z1 = eval_basis(b, [x])
        z2 = eval_basis(b, [x * x])
        np.testing.assert_allclose(z2[:4], z1[0:7:2], rtol=1e-14)


class TestFromExponents:
    def test_accepts_permuted_graded_order(self):
        b = basis_from_exponents([[0, 0], [0, 1], [1, 0], [0, 2], [1, 1], [2, 0]])
        z = eval_basis(b, [2.0, 3.0])
        assert z.tolist() == [1, 3, 2, 9, 6, 4]

    def test_rejects_incomplete_or_unreachable(self):
        with pytest.raises(ValueError):
            basis_from_exponents([[0, 0], [1, 0], [0, 1], [2, 0]])
        with pytest.raises(ValueError):
            basis_from_exponents([[0], [2], [1]])
