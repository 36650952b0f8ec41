"""Iteration-free pseudo-optimal frequency-weighted reduction.

``ipowi`` (input weight) and ``opowi`` (output weight) place the poles of
the reduced model at the mirror images ``-sigma_i`` of the chosen shifts and
choose the remaining free parameter (``C_r`` resp. ``B_r``) so that the
weighted error is stationary with respect to it.  The ROM is assembled from
a rational Krylov basis of the augmented plant/weight realization, a
Sylvester parameterization ``(S, L)`` of that basis and one small Lyapunov
equation.
"""

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.optimize import linear_sum_assignment

from fwmor.exceptions import (
    DeflatedBasis,
    DegenerateResidual,
    DimensionMismatch,
    DuplicateShift,
    NotPositiveDefinite,
    ShiftCollision,
    UnstableShift,
    ValidationError,
)
from fwmor.gramians import fw_input_data, fw_output_data, rom_input_gramians, rom_output_gramians
from fwmor.linalg import orthonormal_basis, solve_lyapunov
from fwmor.statespace import InterpolationData, StateSpaceModel, WeightedProblem

__all__ = [
    'KrylovFrame',
    'ReductionResult',
    'krylov_basis',
    'input_krylov',
    'output_krylov',
    'ipowi',
    'opowi',
]

SHIFT_TOL = 1e-10
DEGENERATE_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class KrylovFrame:
    """Rational Krylov basis with its Sylvester parameterization.

    Input side: ``A_i V_a - V_a S - B_F L = 0`` with ``L`` of shape
    ``(m, r)``.  Output side: ``A_o^T W_a - W_a S^T - C_G^T L^T = 0`` with
    ``L`` of shape ``(r, p)``.  ``basis`` is orthonormal; its first ``n``
    rows (``top``) belong to the plant, the rest (``bottom``) to the weight.
    """

    side: str
    basis: np.ndarray
    n: int
    S: np.ndarray
    L: np.ndarray
    L1: np.ndarray
    L2: np.ndarray
    small_gramian: np.ndarray
    A_hat: np.ndarray
    BC_hat: np.ndarray
    perp: np.ndarray
    data: InterpolationData

    @property
    def top(self):
        return self.basis[:self.n]

    @property
    def bottom(self):
        return self.basis[self.n:]

    @property
    def order(self):
        return self.basis.shape[1]


@dataclass(frozen=True, eq=False)
class ReductionResult:
    """A reduced model with the data that produced it.

    Attributes
    ----------
    rom
        The reduced model.
    frame
        Krylov frame (single-shot methods only).
    rom_poles
        Eigenvalues of the reduced state matrix, sorted.
    approx_gramian_factor
        ``Z`` with ``Z Z^T`` the low-rank weighted Gramian surrogate
        (single-shot methods only).
    diagnostics
        Named residuals computed at the end of the run.
    iterations
        Number of iterations (1 for single-shot methods).
    converged
        False when an iteration cap was hit.
    """

    rom: StateSpaceModel
    frame: Optional[KrylovFrame]
    rom_poles: np.ndarray
    approx_gramian_factor: Optional[np.ndarray]
    diagnostics: dict = field(default_factory=dict)
    iterations: int = 1
    converged: bool = True


def _check_shifts(data, spectrum=None, require_rhp=False):
    s = data.shifts
    if s.size == 0:
        raise ValidationError('at least one shift is required')
    if require_rhp and np.any(s.real <= 0):
        bad = s[s.real <= 0][0]
        raise UnstableShift(f'shift {bad} is not in the open right half-plane')
    if s.size > 1:
        d = np.abs(s[:, None] - s[None, :]) + np.diag(np.full(s.size, np.inf))
        i, j = np.unravel_index(np.argmin(d), d.shape)
        if d[i, j] <= SHIFT_TOL * (1 + abs(s[i])):
            raise DuplicateShift(f'shifts {s[i]} and {s[j]} coincide; repeated shifts are not supported')
    if spectrum is not None and spectrum.size:
        d = np.abs(s[:, None] - spectrum[None, :])
        bound = SHIFT_TOL * (np.abs(s)[:, None] + np.abs(spectrum)[None, :] + 1)
        if np.any(d <= bound):
            i, j = np.unravel_index(np.argmin(d - bound), d.shape)
            raise ShiftCollision(f'shift {s[i]} coincides with the eigenvalue {spectrum[j]}')


def krylov_basis(A, B, data, directions):
    """Real basis of ``span{(s_i I - A)^{-1} B d_i}``.

    Each conjugate pair contributes the real and imaginary parts of one
    complex solve.  Columns follow the shifts sorted by real, then
    imaginary part, the real-part column before the imaginary-part column.
    The raw (not orthonormalized) columns are returned.
    """
    N = A.shape[0]
    _check_shifts(data, np.linalg.eigvals(A) if N else None)
    cols = []
    for g in data.real_groups():
        i = g[0]
        s = data.shifts[i]
        rhs = B @ directions[i]
        if len(g) == 1:
            x = np.linalg.solve(s.real * np.eye(N) - A, rhs.real)
            cols.append(x)
        else:
            x = np.linalg.solve(s * np.eye(N) - A, rhs.astype(complex))
            cols.extend([x.real, x.imag])
    return np.column_stack(cols)


def _orthonormal(X, what):
    Q, rank = orthonormal_basis(X)
    if rank < X.shape[1]:
        raise DeflatedBasis(f'{what} Krylov basis has numerical rank {rank} < {X.shape[1]}')
    return Q


def _spd_inverse_factor(X, name):
    """Lower Cholesky factor of ``X^{-1}``; asserts ``X`` is SPD."""
    X = (X + X.T) / 2
    try:
        np.linalg.cholesky(X)
    except np.linalg.LinAlgError as exc:
        raise NotPositiveDefinite(f'{name} is not positive definite; shifts and directions are inconsistent') from exc
    Xi = np.linalg.inv(X)
    return np.linalg.cholesky((Xi + Xi.T) / 2)


def _check_degenerate(perp, full, what):
    sv = np.linalg.svd(perp, compute_uv=False)
    smin = sv[-1] if perp.shape[0] >= perp.shape[1] and sv.size else 0.0
    if smin <= DEGENERATE_TOL * np.linalg.norm(full, 2):
        raise DegenerateResidual(
            f'{what} lies (numerically) in the range of the Krylov basis '
            f'(smallest singular value of the residual {smin:.3e}); the pseudo-optimal '
            'parameterization is undefined')


def _as_data(data):
    if isinstance(data, InterpolationData):
        return data
    raise ValidationError('interpolation data must be an InterpolationData instance')


def input_krylov(fwin, data):
    """Input-side Krylov frame from :func:`fw_input_data` and right-tangential data."""
    data = _as_data(data)
    if data.right is None:
        raise ValidationError('input-side reduction needs right tangential directions')
    if data.right.shape[1] != fwin.G.inputs:
        raise DimensionMismatch(f'right directions must have length {fwin.G.inputs}')
    Ai, B_F = fwin.Hi.A, fwin.B_F
    Va = _orthonormal(krylov_basis(Ai, B_F, data, data.right), 'input')
    # Va is orthonormal, so the left inverse Va (Va^T Va)^{-1} is Va itself
    A_hat = Va.T @ Ai @ Va
    B_hat = Va.T @ B_F
    B_perp = B_F - Va @ B_hat
    _check_degenerate(B_perp, B_F, 'B_F')
    L = np.linalg.solve(B_perp.T @ B_perp, B_perp.T @ (Ai @ Va - Va @ A_hat))
    S = A_hat - B_hat @ L
    n = fwin.G.order
    V = fwin.V
    Vb = Va[n:]
    VbC = Vb.T @ V.C.T
    L1 = np.hstack([-L.T, VbC, -L.T @ V.D])
    L2 = np.hstack([VbC, -L.T, -L.T @ V.D])
    P_s = solve_lyapunov(-S.T, L1 @ L2.T)
    return KrylovFrame('input', Va, n, S, L, L1, L2, P_s, A_hat, B_hat, B_perp, data)


def output_krylov(fwout, data):
    """Output-side Krylov frame from :func:`fw_output_data` and left-tangential data."""
    data = _as_data(data)
    if data.left is None:
        raise ValidationError('output-side reduction needs left tangential directions')
    if data.left.shape[1] != fwout.G.outputs:
        raise DimensionMismatch(f'left directions must have length {fwout.G.outputs}')
    Ao, C_G = fwout.Ho.A, fwout.C_G
    Wa = _orthonormal(krylov_basis(Ao.T, C_G.T, data, data.left), 'output')
    A_hat = Wa.T @ Ao @ Wa
    C_hat = C_G @ Wa
    C_perp = C_G - C_hat @ Wa.T
    _check_degenerate(C_perp.T, C_G, 'C_G')
    L = np.linalg.solve(C_perp @ C_perp.T, C_perp @ (Wa.T @ Ao - A_hat @ Wa.T).T).T
    S = A_hat - L @ C_hat
    n = fwout.G.order
    W = fwout.W
    Wb = Wa[n:]
    WbB = Wb.T @ W.B
    L1T = np.hstack([-L, WbB, -L @ W.D.T])
    L2T = np.hstack([WbB, -L, -L @ W.D.T])
    Q_s = solve_lyapunov(-S, L1T @ L2T.T)
    return KrylovFrame('output', Wa, n, S, L, L1T.T, L2T.T, Q_s, A_hat, C_hat, C_perp, data)


def _sorted_poles(A):
    w = np.linalg.eigvals(A) if A.size else np.zeros(0, dtype=complex)
    return w[np.lexsort((w.imag, w.real))]


def _relative(num, den):
    return float(num / max(den, np.finfo(float).tiny))


def ipowi(G, V, data):
    """Input-weighted pseudo-optimal reduction.

    Parameters
    ----------
    G
        Stable plant.
    V
        Stable ``m x m`` input weight, or ``None`` for the unweighted case.
    data
        Conjugate-closed shifts in the open right half-plane with right
        tangential directions.

    Returns
    -------
    ReductionResult
        ROM with poles ``-sigma_i``; its output matrix makes the
        input-weighted error stationary.  ``approx_gramian_factor`` ``Z``
        gives the low-rank weighted Gramian ``V_r P_s^{-1} V_r^T = Z Z^T``.
    """
    data = _as_data(data)
    _check_shifts(data, require_rhp=True)
    WeightedProblem(G, V, None)
    fwin = fw_input_data(G, V)
    fr = input_krylov(fwin, data)
    P_s = fr.small_gramian
    factor = _spd_inverse_factor(P_s, 'P_s')
    Ar = -np.linalg.solve(P_s, fr.S.T @ P_s)
    Br = -np.linalg.solve(P_s, fr.L.T)
    Cr = G.C @ fr.top
    rom = StateSpaceModel(Ar, Br, Cr, G.D)
    rg = rom_input_gramians(rom, fwin)
    lhs, rhs = rom.C @ rg.Pe_rom, G.C @ rg.P12_hat
    sylv = fwin.Hi.A @ fr.basis - fr.basis @ fr.S - fwin.B_F @ fr.L
    poles = _sorted_poles(Ar)
    diagnostics = {
        'sylvester_residual': _relative(np.linalg.norm(sylv), np.linalg.norm(fwin.Hi.A) + np.linalg.norm(fwin.B_F)),
        'optimality_residual': _relative(np.linalg.norm(lhs - rhs), np.linalg.norm(rhs)),
        'pole_shift_mismatch': _pole_mismatch(poles, data.shifts),
    }
    return ReductionResult(rom, fr, poles, fr.top @ factor, diagnostics)


def opowi(G, W, data):
    """Output-weighted pseudo-optimal reduction (counterpart of :func:`ipowi`).

    The ROM has poles ``-sigma_i``; its input matrix makes the
    output-weighted error stationary.
    """
    data = _as_data(data)
    _check_shifts(data, require_rhp=True)
    WeightedProblem(G, None, W)
    fwout = fw_output_data(G, W)
    fr = output_krylov(fwout, data)
    Q_s = fr.small_gramian
    factor = _spd_inverse_factor(Q_s, 'Q_s')
    Qi = np.linalg.inv(Q_s)
    Ar = -Q_s @ fr.S.T @ Qi
    Br = fr.top.T @ G.B
    Cr = -fr.L.T @ Qi
    rom = StateSpaceModel(Ar, Br, Cr, G.D)
    rg = rom_output_gramians(rom, fwout)
    lhs, rhs = rg.Qe_rom @ rom.B, rg.Q12_hat.T @ G.B
    Ao = fwout.Ho.A
    sylv = Ao.T @ fr.basis - fr.basis @ fr.S.T - fwout.C_G.T @ fr.L.T
    poles = _sorted_poles(Ar)
    diagnostics = {
        'sylvester_residual': _relative(np.linalg.norm(sylv), np.linalg.norm(Ao) + np.linalg.norm(fwout.C_G)),
        'optimality_residual': _relative(np.linalg.norm(lhs - rhs), np.linalg.norm(rhs)),
        'pole_shift_mismatch': _pole_mismatch(poles, data.shifts),
    }
    return ReductionResult(rom, fr, poles, fr.top @ factor, diagnostics)


def _pole_mismatch(poles, shifts):
    target = -shifts
    target = target[np.lexsort((target.imag, target.real))]
    if target.size != poles.size:
        return float('inf')
    cost = np.abs(poles[:, None] - target[None, :])
    i, j = linear_sum_assignment(cost)
    return float(np.max(cost[i, j] / (1 + np.abs(target[j]))))
