import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fwmor.exceptions import DefectiveMatrix, NonFinite, NotPositiveDefinite, SingularPencil
from fwmor.linalg import contragradient_balance, solve_lyapunov, solve_sylvester, spectral_factorization
from oracles import kron_lyapunov, kron_sylvester, random_stable


class TestLyapunov:
    def test_scalar(self):
        np.testing.assert_allclose(solve_lyapunov([[-1.0]], [[2.0]]), [[1.0]])

    def test_decoupled(self):
        X = solve_lyapunov(np.diag([-1.0, -2.0]), np.eye(2))
        np.testing.assert_allclose(X, np.diag([0.5, 0.25]), atol=1e-15)

    def test_kronecker_example(self):
        A = np.array([[-1.0, 1.0], [0.0, -2.0]])
        Q = np.ones((2, 2))
        np.testing.assert_allclose(solve_lyapunov(A, Q), kron_lyapunov(A, Q), atol=1e-12)

    @pytest.mark.parametrize('n', [1, 2, 3, 4, 5, 6])
    def test_kronecker_random(self, rng, n):
        for _ in range(5):
            A = random_stable(rng, n)
            Q = rng.standard_normal((n, n))
            X = solve_lyapunov(A, Q)
            assert np.max(np.abs(X - kron_lyapunov(A, Q))) <= 1e-9
            rel = np.linalg.norm(A @ X + X @ A.T + Q) / max(1, np.linalg.norm(Q) + 2 * np.linalg.norm(A) * np.linalg.norm(X))
            assert rel <= 1e-10

    def test_symmetric_output_for_symmetric_rhs(self, rng):
        A = random_stable(rng, 7)
        B = rng.standard_normal((7, 2))
        X = solve_lyapunov(A, B @ B.T)
        assert np.array_equal(X, X.T)
        assert np.linalg.eigvalsh(X)[0] >= -1e-10 * np.linalg.norm(X, 2)

    def test_empty(self):
        assert solve_lyapunov(np.zeros((0, 0)), np.zeros((0, 0))).shape == (0, 0)

    def test_marginal_spectrum_rejected(self):
        with pytest.raises(SingularPencil):
            solve_lyapunov(np.array([[0.0, 1.0], [-1.0, 0.0]]), np.eye(2))
        with pytest.raises(SingularPencil):
            solve_lyapunov(np.diag([-1.0, 1.0]), np.eye(2))

    def test_nonfinite(self):
        with pytest.raises(NonFinite):
            solve_lyapunov([[np.nan]], [[1.0]])


class TestSylvester:
    def test_scalar(self):
        np.testing.assert_allclose(solve_sylvester([[-1.0]], [[-2.0]], [[3.0]]), [[1.0]])

    def test_decoupled(self):
        X = solve_sylvester(np.diag([-1.0, -3.0]), [[-1.0]], [[2.0], [4.0]])
        np.testing.assert_allclose(X, [[1.0], [1.0]])

    def test_kronecker_random(self, rng):
        for n in range(1, 7):
            for k in range(1, 7):
                A = random_stable(rng, n)
                B = random_stable(rng, k)
                C = rng.standard_normal((n, k))
                X = solve_sylvester(A, B, C)
                assert np.max(np.abs(X - kron_sylvester(A, B, C))) <= 1e-9

    def test_shared_eigenvalue(self):
        with pytest.raises(SingularPencil):
            solve_sylvester([[-1.0]], [[1.0]], [[1.0]])

    def test_empty_dimension(self):
        assert solve_sylvester(np.eye(2) * -1, np.zeros((0, 0)), np.zeros((2, 0))).shape == (2, 0)


class TestSpectralFactorization:
    def test_companion(self):
        w, R = spectral_factorization([[0.0, 1.0], [-2.0, -3.0]])
        np.testing.assert_allclose(w, [-2, -1])
        assert np.all(w.imag == 0)

    def test_scalar(self):
        w, R = spectral_factorization([[-5.8318]])
        assert w[0] == -5.8318

    def test_sorted_conjugate_pairs(self, rng):
        A = np.array([[-1.0, 2.0, 0], [-2.0, -1.0, 0], [0, 0, -3.0]])
        w, R = spectral_factorization(A)
        np.testing.assert_allclose(w, [-3, -1 - 2j, -1 + 2j])
        np.testing.assert_allclose(A @ R, R * w, atol=1e-12)

    def test_random_trace_and_residual(self, rng):
        A = random_stable(rng, 4)
        w, R = spectral_factorization(A)
        assert abs(w.sum() - np.trace(A)) <= 1e-9
        assert np.linalg.norm(A @ R - R * w) <= 1e-8 * np.linalg.norm(A)

    def test_similarity_invariance(self, rng):
        A = random_stable(rng, 5)
        S = np.eye(5) + 0.3 * rng.standard_normal((5, 5))
        w1, _ = spectral_factorization(A)
        w2, _ = spectral_factorization(np.linalg.solve(S, A @ S))
        np.testing.assert_allclose(w1, w2, atol=1e-8)

    def test_defective(self):
        with pytest.raises(DefectiveMatrix):
            spectral_factorization([[-1.0, 1.0], [0.0, -1.0]])


class TestContragradient:
    def test_identity(self):
        T, s = contragradient_balance(np.eye(3), np.eye(3))
        np.testing.assert_allclose(s, np.ones(3))
        # already balanced: T is a signed permutation
        Ta = np.abs(T)
        np.testing.assert_allclose(Ta.sum(axis=0), 1, atol=1e-12)
        np.testing.assert_allclose(Ta.sum(axis=1), 1, atol=1e-12)
        np.testing.assert_allclose(Ta.max(axis=0), 1, atol=1e-12)

    def test_scalar(self):
        T, s = contragradient_balance([[4.0]], [[1.0]])
        np.testing.assert_allclose(s, [2.0])
        np.testing.assert_allclose(T, [[np.sqrt(2)]])

    def test_random_relations(self, rng):
        for n in (2, 5, 8):
            X = rng.standard_normal((n, n))
            Y = rng.standard_normal((n, n))
            P = X @ X.T + 0.1 * np.eye(n)
            Q = Y @ Y.T + 0.1 * np.eye(n)
            T, s = contragradient_balance(P, Q)
            Ti = np.linalg.inv(T)
            D = np.diag(s)
            assert np.linalg.norm(Ti @ P @ Ti.T - D) <= 1e-8 * np.linalg.norm(D)
            assert np.linalg.norm(T.T @ Q @ T - D) <= 1e-8 * np.linalg.norm(D)
            assert np.all(np.diff(s) <= 0)
            np.testing.assert_allclose(np.sort(s ** 2), np.sort(np.linalg.eigvals(P @ Q).real), rtol=1e-8)

    def test_invariance_under_state_transformation(self, rng):
        n = 5
        X = rng.standard_normal((n, n))
        P = X @ X.T + np.eye(n)
        Q = np.diag(rng.uniform(0.5, 2, n))
        S = np.eye(n) + 0.2 * rng.standard_normal((n, n))
        Si = np.linalg.inv(S)
        _, s1 = contragradient_balance(P, Q)
        _, s2 = contragradient_balance(Si @ P @ Si.T, S.T @ Q @ S)
        np.testing.assert_allclose(s1, s2, rtol=1e-9)

    def test_not_positive_definite(self):
        with pytest.raises(NotPositiveDefinite):
            contragradient_balance(np.diag([1.0, 0.0]), np.eye(2))
        with pytest.raises(NotPositiveDefinite):
            contragradient_balance(np.eye(2), -np.eye(2))


@settings(max_examples=30, deadline=None)
@given(n=st.integers(1, 6), k=st.integers(1, 6), seed=st.integers(0, 2**32 - 1))
def test_sylvester_matches_kronecker_property(n, k, seed):
    rng = np.random.default_rng(seed)
    A, B = random_stable(rng, n), random_stable(rng, k)
    C = rng.standard_normal((n, k))
    assert np.max(np.abs(solve_sylvester(A, B, C) - kron_sylvester(A, B, C))) <= 1e-9
