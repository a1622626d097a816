import numpy as np
import pytest

from semigram import (
    DimensionError,
    QuadratureError,
    integrate_operator_valued,
    matrix_exponential,
    numerical_kernel,
    numerical_rank,
)
from semigram.linalg import as_operator, default_rank_tol, opnorm


def test_exponential_of_zero_is_identity():
    assert np.array_equal(matrix_exponential(np.zeros((4, 4)), 5.0), np.eye(4))


def test_exponential_diagonal_modal_decay():
    a = np.diag([0.0, -np.pi**2])
    out = matrix_exponential(a, 1.0)
    assert np.allclose(out, np.diag([1.0, np.exp(-np.pi**2)]), rtol=0, atol=1e-15)


def test_exponential_nilpotent_closed_form():
    a = np.array([[0.0, 1.0], [0.0, 0.0]])
    out = matrix_exponential(a, 2.0)
    assert np.allclose(out, [[1.0, 2.0], [0.0, 1.0]], rtol=0, atol=1e-14)


def test_exponential_rejects_nonsquare_and_bad_time():
    with pytest.raises(DimensionError):
        matrix_exponential(np.zeros((2, 3)), 1.0)
    with pytest.raises(ValueError):
        matrix_exponential(np.zeros((2, 2)), -1.0)
    with pytest.raises(ValueError):
        matrix_exponential(np.zeros((2, 2)), np.inf)


def test_exponential_semigroup_law():
    rng = np.random.default_rng(42)
    for _ in range(10):
        a = rng.normal(size=(10, 10))
        a = a - (np.abs(np.linalg.eigvals(a).real).max() + 1.0) * np.eye(10)
        s, t = rng.uniform(0.0, 2.0, size=2)
        combined = matrix_exponential(a, s + t)
        split = matrix_exponential(a, s) @ matrix_exponential(a, t)
        assert opnorm(combined - split) <= 1e-9 * opnorm(combined)


def test_kernel_of_diagonal():
    basis, decision = numerical_kernel(np.diag([0.0, -1.0, -2.0]))
    assert decision.numerical_rank == 2
    assert basis.shape == (3, 1)
    assert abs(abs(basis[0, 0]) - 1.0) < 1e-14
    assert np.abs(basis[1:, 0]).max() < 1e-14


def test_kernel_of_identity_is_empty():
    basis, decision = numerical_kernel(np.eye(3))
    assert basis.shape == (3, 0)
    assert decision.numerical_rank == 3


def test_kernel_of_path_laplacian():
    # 4-node path graph Laplacian: kernel is the constant vector
    a = -np.array([
        [1.0, -1.0, 0.0, 0.0],
        [-1.0, 2.0, -1.0, 0.0],
        [0.0, -1.0, 2.0, -1.0],
        [0.0, 0.0, -1.0, 1.0],
    ])
    basis, decision = numerical_kernel(a)
    assert basis.shape == (4, 1)
    expected = np.full(4, 0.5)
    aligned = basis[:, 0] * np.sign(basis[0, 0])
    assert np.abs(aligned - expected).max() < 1e-12
    assert opnorm(a @ basis) <= 10 * decision.tolerance_used


def test_kernel_invariants_random():
    rng = np.random.default_rng(7)
    for _ in range(10):
        n = rng.integers(3, 9)
        k = rng.integers(1, 3)
        q, _ = np.linalg.qr(rng.normal(size=(n, n)))
        lam = np.concatenate([np.zeros(k), -rng.uniform(0.5, 2.0, n - k)])
        a = (q * lam) @ q.T
        basis, decision = numerical_kernel(a)
        assert basis.shape[1] == k
        assert opnorm(a @ basis) <= 10 * decision.tolerance_used
        gram = basis.conj().T @ basis
        assert opnorm(gram - np.eye(k)) < 1e-12


def test_rank_decision_fields():
    basis, decision = numerical_kernel(np.diag([2.0, 1.0, 0.0]))
    assert list(decision.singular_values) == sorted(
        decision.singular_values, reverse=True
    )
    assert decision.numerical_rank == int(
        np.sum(np.asarray(decision.singular_values) > decision.tolerance_used)
    )


def test_numerical_rank_scalar_helper():
    assert numerical_rank(np.diag([1.0, 1e-17])) == 1
    assert numerical_rank(np.diag([1.0, 1e-17]), rank_tol=1e-18) == 2
    assert numerical_rank(np.diag([1.0, 1e-14]), rank_tol=1e-10) == 1
    assert numerical_rank(np.zeros((3, 2))) == 0


def test_as_operator_validation():
    with pytest.raises(DimensionError):
        as_operator(np.array([1.0, 2.0]))
    with pytest.raises(ValueError):
        as_operator(np.array([[np.nan, 0.0], [0.0, 1.0]]))
    with pytest.raises(ValueError):
        as_operator(np.array([[np.inf, 0.0], [0.0, 1.0]]))
    with pytest.raises(DimensionError):
        as_operator(np.zeros((2, 3)), square=True)


def test_default_rank_tol_scaling():
    assert default_rank_tol((4, 3), 2.0) == 4 * np.finfo(float).eps * 2.0
    assert default_rank_tol((4, 3), 0.0) == 0.0


def test_quadrature_scalar_exponential():
    out = integrate_operator_valued(
        lambda t: np.exp(-t) * np.eye(2), 1.0, 1e-10
    )
    assert np.abs(out - np.eye(2)).max() <= 1e-10


def test_quadrature_heat_modal_term():
    rate = 2 * np.pi**2
    out = integrate_operator_valued(
        lambda t: np.array([[np.exp(-rate * t)]]), rate, 1e-12
    )
    assert abs(out[0, 0] - 1.0 / rate) <= 1e-12


def test_quadrature_zero_integrand():
    out = integrate_operator_valued(
        lambda t: np.zeros((3, 2)), 1.0, 1e-10, bound_constant=1.0
    )
    assert np.array_equal(out, np.zeros((3, 2)))


def test_quadrature_matches_matrix_closed_form():
    rng = np.random.default_rng(5)
    m = rng.normal(size=(3, 3))
    for rate in (0.5, 2.0):
        out = integrate_operator_valued(
            lambda t: np.exp(-rate * t) * m, rate, 1e-11
        )
        assert np.abs(out - m / rate).max() <= 1e-11


def test_quadrature_deterministic():
    def f(t):
        return np.array([[np.exp(-t) * np.cos(3 * t)]])

    a = integrate_operator_valued(f, 1.0, 1e-11)
    b = integrate_operator_valued(f, 1.0, 1e-11)
    assert np.array_equal(a, b)


def test_quadrature_budget_exhaustion_carries_estimate():
    # violently oscillatory integrand with a tiny panel budget
    def f(t):
        return np.array([[np.cos(200.0 * t * t) ** 2 * np.exp(-t)]])

    with pytest.raises(QuadratureError) as excinfo:
        integrate_operator_valued(f, 1.0, 1e-13, max_panels=4)
    err = excinfo.value
    assert err.estimate is not None
    assert err.achieved_tol is not None and err.achieved_tol > 1e-13


def test_quadrature_rejects_bad_arguments():
    f = lambda t: np.eye(1)
    with pytest.raises(ValueError):
        integrate_operator_valued(f, -1.0, 1e-9)
    with pytest.raises(ValueError):
        integrate_operator_valued(f, 1.0, 0.0)
