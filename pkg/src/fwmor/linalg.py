"""Dense real linear-algebra kernels.

The matrix-equation solvers follow the convention used throughout the
package: ``A X + X B + C = 0`` (note the sign of the constant term).
"""

import warnings

import numpy as np
import scipy.linalg as spla

from fwmor.exceptions import (
    DefectiveMatrix,
    DimensionMismatch,
    NonFinite,
    NotPositiveDefinite,
    SingularPencil,
)

__all__ = [
    'solve_lyapunov',
    'solve_sylvester',
    'spectral_factorization',
    'contragradient_balance',
    'orthonormal_basis',
    'is_symmetric',
]

RESIDUAL_TOL = 1e-10
COLLISION_TOL = 1e-10
SPD_TOL = 1e-12
DIAGONALIZABLE_COND = 1e12


def _as_real_matrix(name, X):
    X = np.asarray(X)
    if X.ndim == 0:
        X = X.reshape(1, 1)
    if X.ndim != 2:
        raise DimensionMismatch(f'{name} must be two-dimensional, got shape {X.shape}')
    if np.iscomplexobj(X):
        raise DimensionMismatch(f'{name} must be real')
    X = X.astype(float)
    if not np.all(np.isfinite(X)):
        raise NonFinite(f'{name} contains NaN or Inf entries')
    return X


def is_symmetric(X, rtol=1e-14):
    """Return True if ``X`` is symmetric up to roundoff."""
    if X.shape[0] != X.shape[1]:
        return False
    scale = max(np.linalg.norm(X, 1), np.finfo(float).tiny)
    return np.linalg.norm(X - X.T, 1) <= rtol * scale


def _check_collision(eA, eB):
    # lambda_i(A) + lambda_j(B) = 0 makes X -> AX + XB singular
    if eA.size == 0 or eB.size == 0:
        return
    s = np.abs(eA[:, None] + eB[None, :])
    bound = COLLISION_TOL * (np.abs(eA)[:, None] + np.abs(eB)[None, :] + 1)
    if np.any(s <= bound):
        i, j = np.unravel_index(np.argmin(s - bound), s.shape)
        raise SingularPencil(
            f'eigenvalues {eA[i]:.6g} and {eB[j]:.6g} sum to (numerically) zero; '
            'the matrix equation has no unique solution')


def _relative_residual(R, Q, A, B, X):
    denom = max(1.0, np.linalg.norm(Q) + (np.linalg.norm(A) + np.linalg.norm(B)) * np.linalg.norm(X))
    return np.linalg.norm(R) / denom


def solve_lyapunov(A, Q):
    """Solve the continuous Lyapunov equation ``A X + X A^T + Q = 0``.

    Parameters
    ----------
    A
        Real square matrix, no two eigenvalues summing to zero.
    Q
        Real matrix of the same size.

    Returns
    -------
    X
        The unique solution; exactly symmetric when ``Q`` is symmetric.

    Raises
    ------
    SingularPencil
        If ``lambda_i(A) + lambda_j(A) = 0`` for some pair.
    NonFinite
        On NaN or Inf input.
    """
    A = _as_real_matrix('A', A)
    Q = _as_real_matrix('Q', Q)
    n = A.shape[0]
    if A.shape != (n, n) or Q.shape != (n, n):
        raise DimensionMismatch(f'solve_lyapunov: A {A.shape} and Q {Q.shape} must be square and equal')
    if n == 0:
        return np.zeros((0, 0))
    eA = np.linalg.eigvals(A)
    _check_collision(eA, eA)
    X = spla.solve_continuous_lyapunov(A, -Q)
    if is_symmetric(Q):
        X = (X + X.T) / 2
    res = _relative_residual(A @ X + X @ A.T + Q, Q, A, A, X)
    if res > RESIDUAL_TOL:
        warnings.warn(f'Lyapunov residual {res:.2e} exceeds {RESIDUAL_TOL:.0e}', spla.LinAlgWarning,
                      stacklevel=2)
    return X


def solve_sylvester(A, B, C):
    """Solve the Sylvester equation ``A X + X B + C = 0`` for ``X`` (n x k).

    Raises :class:`SingularPencil` when the spectra of ``A`` and ``-B``
    intersect.
    """
    A = _as_real_matrix('A', A)
    B = _as_real_matrix('B', B)
    C = _as_real_matrix('C', C)
    n, k = A.shape[0], B.shape[0]
    if A.shape != (n, n) or B.shape != (k, k) or C.shape != (n, k):
        raise DimensionMismatch(
            f'solve_sylvester: incompatible shapes A {A.shape}, B {B.shape}, C {C.shape}')
    if n == 0 or k == 0:
        return np.zeros((n, k))
    _check_collision(np.linalg.eigvals(A), np.linalg.eigvals(B))
    X = spla.solve_sylvester(A, B, -C)
    res = _relative_residual(A @ X + X @ B + C, C, A, B, X)
    if res > RESIDUAL_TOL:
        warnings.warn(f'Sylvester residual {res:.2e} exceeds {RESIDUAL_TOL:.0e}', spla.LinAlgWarning,
                      stacklevel=2)
    return X


def _spectral_order(w):
    return np.lexsort((w.imag, w.real))


def spectral_factorization(A):
    """Eigendecomposition ``A = R diag(lam) R^{-1}`` of a real matrix.

    Eigenvalues are sorted by real part, then imaginary part.  Eigenvalues
    of a real matrix that are real to working precision are returned with
    exactly zero imaginary part and real eigenvectors.

    Returns
    -------
    lam
        Complex eigenvalues, shape ``(r,)``.
    R
        Complex eigenvector matrix, shape ``(r, r)``.

    Raises
    ------
    DefectiveMatrix
        If the eigenvector matrix has condition number above ``1e12``.
    """
    A = _as_real_matrix('A', A)
    r = A.shape[0]
    if A.shape != (r, r):
        raise DimensionMismatch(f'spectral_factorization: A must be square, got {A.shape}')
    if r == 0:
        return np.zeros(0, dtype=complex), np.zeros((0, 0), dtype=complex)
    w, R = spla.eig(A)
    normA = max(np.linalg.norm(A), np.finfo(float).tiny)
    is_real = np.abs(w.imag) <= 1e3 * np.finfo(float).eps * normA
    w = np.where(is_real, w.real + 0j, w)
    R = R.astype(complex)
    R[:, is_real] = R[:, is_real].real
    idx = _spectral_order(w)
    w, R = w[idx], R[:, idx]
    if np.linalg.cond(R) > DIAGONALIZABLE_COND:
        raise DefectiveMatrix('matrix is not diagonalizable to working precision '
                              '(eigenvector condition number exceeds 1e12)')
    if np.linalg.norm(A @ R - R * w) > 1e-8 * normA:
        raise DefectiveMatrix('eigendecomposition residual too large')
    return w, R


def _check_spd(name, X):
    if not is_symmetric(X, rtol=1e-10):
        raise NotPositiveDefinite(f'{name} is not symmetric')
    ev = np.linalg.eigvalsh((X + X.T) / 2)
    if ev[-1] <= 0 or ev[0] <= SPD_TOL * ev[-1]:
        raise NotPositiveDefinite(
            f'{name} is not positive definite (eigenvalue range [{ev[0]:.3e}, {ev[-1]:.3e}])')


def contragradient_balance(P, Q):
    """Simultaneously diagonalize two SPD matrices.

    Finds ``T`` with ``T^{-1} P T^{-T} = T^T Q T = diag(sigma)``, ``sigma``
    descending.  Works from the Cholesky factor of ``P`` and a symmetric
    eigendecomposition; the product ``P Q`` is never formed.

    Returns
    -------
    T
        The balancing transformation.
    sigma
        Square roots of the eigenvalues of ``P Q``, descending.
    """
    P = _as_real_matrix('P', P)
    Q = _as_real_matrix('Q', Q)
    n = P.shape[0]
    if P.shape != (n, n) or Q.shape != (n, n):
        raise DimensionMismatch(f'contragradient_balance: P {P.shape} and Q {Q.shape} must match')
    _check_spd('P', P)
    _check_spd('Q', Q)
    L = np.linalg.cholesky((P + P.T) / 2)
    M = L.T @ Q @ L
    w, U = np.linalg.eigh((M + M.T) / 2)
    w, U = w[::-1], U[:, ::-1]
    sigma = np.sqrt(w)
    # deterministic signs: largest-magnitude entry of each column positive
    piv = np.argmax(np.abs(U), axis=0)
    U = U * np.sign(U[piv, np.arange(n)])
    T = (L @ U) / np.sqrt(sigma)
    return T, sigma


def orthonormal_basis(X, rtol=None):
    """Householder-QR orthonormal basis of the columns of ``X``.

    Returns ``(Q, rank)``; ``rank`` is the numerical rank of ``X`` from its
    singular values, with the usual ``max(shape) * eps`` relative cut-off
    unless ``rtol`` is given.  Columns are scaled to unit norm first, so a
    single large column (e.g. a shift close to a lightly damped pole) does
    not hide the others; positive scaling changes neither the span nor ``Q``.
    """
    X = np.asarray(X, dtype=float)
    if X.shape[1] == 0:
        return X.copy(), 0
    norms = np.linalg.norm(X, axis=0)
    X = X / np.where(norms > 0, norms, 1.0)
    sv = np.linalg.svd(X, compute_uv=False)
    if rtol is None:
        rtol = max(X.shape) * np.finfo(float).eps
    rank = int(np.sum(sv > rtol * sv[0])) if sv[0] > 0 else 0
    Qm, _ = np.linalg.qr(X)
    return Qm, rank
