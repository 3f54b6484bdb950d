"""Exact F_p linear algebra against the list-based oracles."""

import numpy as np
import pytest
from hypothesis import given, strategies as st

from obspers.fields import PrimeField

from oracles import (oracle_kernel_by_enumeration, oracle_matrix_rank,
                     oracle_rank_minor, oracle_rref, oracle_solve)


def test_field_requires_prime():
    PrimeField(2), PrimeField(13)
    with pytest.raises(ValueError):
        PrimeField(4)
    with pytest.raises(ValueError):
        PrimeField(1)


def test_scalar_ops_mod_p():
    F = PrimeField(5)
    assert F.add(3, 4) == 2
    assert F.neg(2) == 3
    assert F.mul(3, 4) == 2
    assert F.inv(2) == 3
    with pytest.raises(ZeroDivisionError):
        F.inv(0)


def test_rref_identity_and_zero():
    F = PrimeField(2)
    eye = F.identity(3)
    assert F.rank(eye) == 3
    assert np.array_equal(F.reduce(eye)[0], eye)
    zero = F.zeros(2, 2)
    assert F.rank(zero) == 0


def test_rank_matches_minor_expansion():
    F = PrimeField(5)
    rng = np.random.default_rng(1)
    for _ in range(10):
        m = F.matrix(rng.integers(0, 5, size=(4, 4)))
        assert F.rank(m) == oracle_rank_minor(m.tolist(), 5)


def test_kernel_matches_enumeration():
    F = PrimeField(3)
    rng = np.random.default_rng(2)
    for _ in range(5):
        m = F.matrix(rng.integers(0, 3, size=(3, 5)))
        basis = F.kernel_basis(m)
        # every basis vector is annihilated
        if basis.shape[1]:
            assert not np.any(F.matmul(m, basis))
        # dimension agrees with the exhaustive kernel
        kernel = oracle_kernel_by_enumeration(m.tolist(), 3)
        assert 3 ** basis.shape[1] == len(kernel)
        assert basis.shape[1] == 5 - F.rank(m)


def test_solve_identity_zero_and_random():
    F = PrimeField(2)
    b = F.matrix([[1], [0], [1]])
    assert np.array_equal(F.solve(F.identity(3), b), b)
    assert F.solve(F.zeros(3, 3), b) is None
    rng = np.random.default_rng(3)
    for _ in range(10):
        m = F.matrix(rng.integers(0, 2, size=(4, 3)))
        x0 = F.matrix(rng.integers(0, 2, size=(3, 1)))
        rhs = F.matmul(m, x0)
        x = F.solve(m, rhs)
        assert x is not None
        assert not np.any((m @ x - rhs) % 2)
        oracle = oracle_solve(m.tolist(), [int(r) for r in rhs[:, 0]], 2)
        assert oracle is not None


@given(st.integers(0, 4), st.integers(0, 4), st.data())
def test_rref_rank_properties(rows, cols, data):
    F = PrimeField(3)
    entries = data.draw(st.lists(st.integers(0, 2), min_size=rows * cols,
                                 max_size=rows * cols))
    m = F.matrix(np.array(entries, dtype=np.int64).reshape(rows, cols)) \
        if rows * cols else F.zeros(rows, cols)
    r = F.rank(m)
    assert 0 <= r <= min(rows, cols)
    assert r == oracle_matrix_rank(m.tolist(), 3)
    red, rank2 = oracle_rref(m.tolist(), 3)
    assert rank2 == r


def test_inverse_round_trip():
    F = PrimeField(7)
    rng = np.random.default_rng(4)
    found = 0
    while found < 5:
        m = F.matrix(rng.integers(0, 7, size=(3, 3)))
        if not F.is_invertible(m):
            continue
        found += 1
        assert np.array_equal(F.matmul(m, F.inverse(m)), F.identity(3))


def test_matrix_reduces_residues():
    F = PrimeField(2)
    assert np.array_equal(F.matrix([[5, -1], [2, 3]]),
                          np.array([[1, 1], [0, 1]]))
