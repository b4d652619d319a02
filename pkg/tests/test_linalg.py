import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from matprod_anytime.linalg import (
    ConvergenceError,
    expected_product,
    inverse_expected_product,
    left_accumulate,
    operator_norm,
    operator_norms,
    sym_eigen,
    sym_matrix,
)

from conftest import A1, A2, random_psd


def test_sym_matrix_symmetrizes():
    S = sym_matrix([[1.0, 2.0], [0.0, 3.0]])
    assert np.array_equal(S, S.T)
    assert S[0, 1] == 1.0
    with pytest.raises(ValueError):
        sym_matrix(np.zeros((2, 3)))


def test_eigen_diagonal():
    spec = sym_eigen(np.diag([2.0, 1.0]))
    assert np.array_equal(spec.eigenvalues, [2.0, 1.0])
    assert np.array_equal(np.abs(spec.eigenvectors), np.eye(2))
    spec = sym_eigen(np.diag([1.0, 2.0]))
    assert np.array_equal(spec.eigenvalues, [2.0, 1.0])
    assert np.array_equal(np.abs(spec.eigenvectors), [[0.0, 1.0], [1.0, 0.0]])


def test_eigen_swap_matrix():
    spec = sym_eigen([[0.0, 1.0], [1.0, 0.0]])
    assert np.allclose(spec.eigenvalues, [1.0, -1.0], atol=1e-15)
    v = spec.eigenvectors
    assert np.allclose(np.abs(v[:, 0]), [2**-0.5, 2**-0.5])
    assert np.allclose(v[:, 1] * np.sign(v[0, 1]), [2**-0.5, -(2**-0.5)])


@pytest.mark.parametrize("d", [1, 2, 5, 8, 20])
def test_eigen_reconstruction(d):
    rng = np.random.default_rng(d)
    S = sym_matrix(rng.normal(size=(d, d)))
    spec = sym_eigen(S)
    Q = spec.eigenvectors
    assert np.max(np.abs(Q.T @ Q - np.eye(d))) <= 1e-10
    assert np.max(np.abs(spec.reconstruct() - S)) <= 1e-9 * (1 + np.max(np.abs(S)))
    assert np.all(np.diff(spec.eigenvalues) <= 0)


def test_eigen_iteration_cap():
    S = np.array([[1.0, 1.0, 0.3], [1.0, 2.0, 0.1], [0.3, 0.1, 3.0]])
    with pytest.raises(ConvergenceError, match="off-diagonal residual"):
        sym_eigen(S, max_sweeps=1)


def test_operator_norm_examples():
    assert operator_norm(np.eye(3)) == pytest.approx(1.0, rel=1e-15)
    assert operator_norm([[0.0, 1.0], [0.0, 0.0]]) == pytest.approx(1.0, rel=1e-15)
    assert operator_norm(np.zeros((3, 3))) == 0.0


def test_operator_norm_random_against_gram_oracle():
    A = np.random.default_rng(4).normal(size=(4, 4))
    oracle = np.sqrt(sym_eigen(A.T @ A).lambda_max)
    assert operator_norm(A) == pytest.approx(oracle, rel=1e-9)
    assert operator_norm(A) == pytest.approx(np.linalg.norm(A, 2), rel=1e-10)


def test_batched_norms_match_single():
    rng = np.random.default_rng(5)
    A = rng.normal(size=(50, 4, 4)) * rng.uniform(1e-6, 1e3, size=(50, 1, 1))
    A[0] = 0.0
    batched = operator_norms(A)
    single = np.array([operator_norm(a) for a in A])
    assert np.allclose(batched, single, rtol=1e-10, atol=0)


@given(st.integers(1, 6), st.integers(0, 2**32 - 1))
@settings(max_examples=40, deadline=None)
def test_symmetric_norm_is_max_abs_eigenvalue(d, seed):
    S = sym_matrix(np.random.default_rng(seed).normal(size=(d, d)))
    lam = sym_eigen(S).eigenvalues
    assert operator_norm(S) == pytest.approx(np.max(np.abs(lam)), rel=1e-10)


def test_expected_product_diagonal():
    E = expected_product(np.diag([1.0, 2.0]), [0.5, 0.5])
    assert np.allclose(E, np.diag([2.25, 4.0]), atol=1e-15)
    Einv = inverse_expected_product(np.diag([1.0, 2.0]), [0.5, 0.5])
    assert np.allclose(Einv, np.diag([1 / 2.25, 0.25]), atol=1e-15)


def test_empty_schedule_is_identity():
    S = random_psd(np.random.default_rng(0), 3)
    assert np.array_equal(expected_product(S, []), np.eye(3))
    assert np.array_equal(inverse_expected_product(S, []), np.eye(3))
    assert np.array_equal(expected_product(S, [0.0, 0.0]), np.eye(3))


def test_expected_product_against_direct_multiplication():
    S = random_psd(np.random.default_rng(1), 3)
    I = np.eye(3)
    direct = (I + 0.2 * S) @ (I + 0.1 * S)
    assert np.max(np.abs(expected_product(S, [0.1, 0.2]) - direct)) <= 1e-12


def _unit_psd(rng, d):
    S = random_psd(rng, d)
    return S / max(sym_eigen(S).lambda_max, 1e-12)


@given(st.integers(1, 6), st.lists(st.floats(0, 0.2), min_size=0, max_size=20), st.integers(0, 2**32 - 1))
@settings(max_examples=50, deadline=None)
def test_inverse_times_product_is_identity(d, etas, seed):
    S = _unit_psd(np.random.default_rng(seed), d)
    E = expected_product(S, etas)
    Einv = inverse_expected_product(S, etas)
    assert np.max(np.abs(Einv @ E - np.eye(d))) <= 1e-10


@given(st.integers(1, 6), st.lists(st.floats(0, 2), min_size=0, max_size=30), st.integers(0, 2**32 - 1))
@settings(max_examples=50, deadline=None)
def test_norm_identities(d, etas, seed):
    rng = np.random.default_rng(seed)
    S = random_psd(rng, d)
    E = expected_product(S, etas)
    Einv = inverse_expected_product(S, etas)
    # fixed-precision floor: cond(E) can reach 1e10 here
    assert np.max(np.abs(Einv @ E - np.eye(d))) <= 1e-15 * operator_norm(E) * max(d, 2) * 10
    lam = sym_eigen(S).lambda_max
    M = np.prod([1 + e * lam for e in etas])
    assert operator_norm(E) == pytest.approx(M, rel=1e-10)
    assert operator_norm(Einv) <= 1 + 1e-12
    perm = rng.permutation(len(etas))
    shuffled = expected_product(S, np.asarray(etas)[perm] if etas else [])
    assert np.max(np.abs(shuffled - E)) <= 1e-12 * max(1.0, M)


def test_negative_step_rejected():
    with pytest.raises(ValueError):
        expected_product(np.eye(2), [0.1, -0.1])


def test_left_accumulate():
    Z = left_accumulate(np.eye(2), np.diag([1.0, 2.0]), 0.1)
    assert np.allclose(Z, np.diag([1.1, 1.2]), atol=1e-15)
    Z0 = np.array([[1.0, 2.0], [3.0, 4.0]])
    assert np.array_equal(left_accumulate(Z0, A1, 0.0), Z0)


def test_left_accumulate_order_matters():
    I = np.eye(2)
    Z = left_accumulate(left_accumulate(I, A1, 0.3), A2, 0.7)
    direct = (I + 0.7 * A2) @ (I + 0.3 * A1)
    wrong = (I + 0.3 * A1) @ (I + 0.7 * A2)
    assert np.max(np.abs(Z - direct)) <= 1e-14
    assert np.max(np.abs(Z - wrong)) > 1e-3
