import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from aircal.models.svr import kkt_violation, rbf_kernel, solve_svr


def _problem(seed, n=200, d=6, noise=0.3):
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(n, d))
    z = np.sin(X[:, 0]) + 0.5 * X[:, 1] + noise * rng.normal(size=n)
    return X, (z - z.mean()) / z.std()


def test_rbf_kernel():
    A = np.array([[0.0, 0.0], [1.0, 1.0]])
    K = rbf_kernel(A, A, 0.5)
    np.testing.assert_allclose(K, [[1, np.exp(-1)], [np.exp(-1), 1]])


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 2**32 - 1), st.sampled_from([0.1, 1.0, 10.0]), st.sampled_from([0.0, 0.1, 0.5]))
def test_kkt_and_box_constraints(seed, C, eps):
    X, z = _problem(seed, n=int(np.random.default_rng(seed).integers(20, 300)))
    gamma = 1.0 / X.shape[1]
    sol, beta = solve_svr(X, z, C, eps, gamma, tol=1e-3)
    assert sol.converged
    n = len(z)
    assert np.all(beta >= 0) and np.all(beta <= C)
    assert abs(beta[:n].sum() - beta[n:].sum()) < 1e-9
    assert kkt_violation(X, z, beta, C, eps, gamma) <= 1e-3


def test_matches_libsvm():
    svm = pytest.importorskip("sklearn.svm")
    X, z = _problem(1, n=300)
    gamma = 1.0 / 6
    sol, _ = solve_svr(X, z, 1.0, 0.1, gamma, tol=1e-6)
    ref = svm.SVR(C=1.0, epsilon=0.1, gamma=gamma, tol=1e-6).fit(X, z)
    Xq = np.random.default_rng(9).normal(size=(100, 6))
    np.testing.assert_allclose(sol.decision(Xq), ref.predict(Xq), atol=1e-4)


def test_constant_target_stays_in_tube():
    X, _ = _problem(2, n=100)
    sol, beta = solve_svr(X, np.zeros(100), 1.0, 0.1, 0.2)
    assert np.all(np.abs(sol.decision(X)) <= 0.1)
    assert not beta.any()


def test_iteration_cap_flags_non_convergence():
    X, z = _problem(3, n=200)
    sol, _ = solve_svr(X, z, 1.0, 0.01, 1.0, tol=1e-6, max_iter=5)
    assert not sol.converged and sol.iterations == 5


def test_kernel_row_cache_gives_same_answer():
    from aircal.models import svr
    X, z = _problem(4, n=150)
    ref, _ = solve_svr(X, z, 1.0, 0.1, 0.3)
    rows = svr._KernelRows(X, 0.3, max_bytes=1)
    assert rows.cap == 2
    np.testing.assert_array_equal(rows(5), rbf_kernel(X, X[5:6], 0.3).ravel())
    small = svr._KernelRows
    try:
        svr._KernelRows = lambda X, g: small(X, g, max_bytes=16 * X.shape[0] * 8)
        again, _ = solve_svr(X, z, 1.0, 0.1, 0.3)
    finally:
        svr._KernelRows = small
    np.testing.assert_allclose(again.decision(X), ref.decision(X), atol=1e-12)
