"""Frequency-weighted balanced truncation (Enns) and its low-rank variant."""

import warnings
from dataclasses import dataclass
from typing import Optional

import numpy as np

from fwmor.exceptions import OrderOutOfRange, RankDeficientFactors, TruncationTie, ValidationError
from fwmor.gramians import fw_input_data, fw_output_data
from fwmor.linalg import contragradient_balance
from fwmor.statespace import StateSpaceModel, validate

__all__ = ['BalancingResult', 'fwbt', 'approx_fwbt', 'project', 'gramian_factor']

TIE_RTOL = 1e-10
# eigenvalues below this many roundoff units of the largest are treated as zero
FACTOR_UNITS = 10


@dataclass(frozen=True, eq=False)
class BalancingResult:
    """Outcome of a balanced truncation.

    Attributes
    ----------
    rom
        Truncated model ``(W^T A V, W^T B, C V, D)``.
    T
        Full balancing transformation (``None`` for the low-rank variant).
    sigma_bar
        Frequency-weighted Hankel singular values, descending.
    kept
        Reduced order ``r``.
    stable
        Whether the reduced model is Hurwitz; two-sided weighting does not
        guarantee it, and nothing is done to enforce it.
    V, W
        Right and left projection matrices, ``W^T V = I``.
    """

    rom: StateSpaceModel
    T: Optional[np.ndarray]
    sigma_bar: np.ndarray
    kept: int
    stable: bool
    V: np.ndarray
    W: np.ndarray


def project(G, V, W):
    """Petrov-Galerkin projection ``(W^T A V, W^T B, C V, D)``."""
    return StateSpaceModel(W.T @ G.A @ V, W.T @ G.B, G.C @ V, G.D)


def _check_order(r, n):
    if not isinstance(r, (int, np.integer)) or isinstance(r, bool):
        raise OrderOutOfRange(f'order must be an integer, got {r!r}')
    if not 1 <= r <= n:
        raise OrderOutOfRange(f'order {r} outside [1, {n}]')


def _warn_tie(sigma, r):
    if r < sigma.size and sigma[r - 1] - sigma[r] <= TIE_RTOL * sigma[r - 1]:
        warnings.warn(f'truncation at r = {r} splits a tied pair of Hankel singular values '
                      f'({sigma[r - 1]:.12g}, {sigma[r]:.12g}); keeping the leading {r}',
                      TruncationTie, stacklevel=3)


def gramian_factor(X):
    """Rank-revealing factor ``Z`` with ``Z Z^T ~= X`` for a symmetric PSD ``X``.

    Eigenvalues within roundoff of zero (or slightly negative from
    roundoff) are dropped, so ``Z`` has as many columns as ``X`` has
    numerically nonzero eigenvalues.
    """
    w, U = np.linalg.eigh(X)
    keep = w > FACTOR_UNITS * X.shape[0] * np.finfo(float).eps * max(w[-1], 0.0)
    return U[:, keep][:, ::-1] * np.sqrt(w[keep][::-1])


def fwbt(G, V=None, W=None, r=1, method='contragradient'):
    """Frequency-weighted balanced truncation to order ``r``.

    The input-weighted controllability Gramian and the output-weighted
    observability Gramian are simultaneously diagonalized and the ``r``
    states with the largest weighted Hankel singular values are kept.
    With both weights absent this is ordinary balanced truncation.

    Parameters
    ----------
    method
        ``'contragradient'`` (default) computes the full balancing
        transformation and requires both Gramians to be positive definite.
        ``'square-root'`` balances rank-revealing factors of the Gramians
        instead; it handles the numerically semidefinite Gramians typical
        of larger models and returns ``T = None``.

    Raises
    ------
    OrderOutOfRange
        Unless ``1 <= r <= n``.
    NotPositiveDefinite
        If a weighted Gramian is singular to tolerance (contragradient only).
    RankDeficientFactors
        If fewer than ``r`` weighted Hankel singular values are nonzero
        (square-root only).
    """
    if method not in ('contragradient', 'square-root'):
        raise ValidationError(f"method must be 'contragradient' or 'square-root', got {method!r}")
    _check_order(r, G.order)
    P_e = fw_input_data(G, V).P_e
    Q_e = fw_output_data(G, W).Q_e
    if method == 'square-root':
        return approx_fwbt(G, gramian_factor(P_e), gramian_factor(Q_e), r)
    T, sigma = contragradient_balance(P_e, Q_e)
    _warn_tie(sigma, r)
    Ti = np.linalg.inv(T)
    Vr = T[:, :r]
    Wr = Ti[:r].T
    rom = project(G, Vr, Wr)
    return BalancingResult(rom, T, sigma, r, validate(rom).is_stable, Vr, Wr)


def approx_fwbt(G, Phat_factor, Qhat_factor, r):
    """Square-root balanced truncation with low-rank Gramian surrogates.

    The controllability and observability Gramians are replaced by
    ``Zp Zp^T`` and ``Zq Zq^T``; balancing uses the SVD of ``Zq^T Zp``
    only, so no large matrix equation is solved.

    Raises
    ------
    RankDeficientFactors
        If ``Zq^T Zp`` has numerical rank below ``r``.
    """
    Zp = np.asarray(Phat_factor, dtype=float)
    Zq = np.asarray(Qhat_factor, dtype=float)
    _check_order(r, min(G.order, Zp.shape[1], Zq.shape[1]))
    U, s, Vh = np.linalg.svd(Zq.T @ Zp)
    rank = int(np.sum(s > TIE_RTOL * s[0])) if s.size and s[0] > 0 else 0
    if rank < r:
        raise RankDeficientFactors(f'crossed Gramian factors have numerical rank {rank} < r = {r}')
    _warn_tie(s, r)
    scale = 1 / np.sqrt(s[:r])
    Vr = (Zp @ Vh[:r].T) * scale
    Wr = (Zq @ U[:, :r]) * scale
    rom = project(G, Vr, Wr)
    return BalancingResult(rom, None, s, r, validate(rom).is_stable, Vr, Wr)
