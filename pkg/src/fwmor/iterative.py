"""Iterative frequency-weighted reducers.

``dpowi`` alternates two-sided (input and output weighted) Krylov
projections with a shift update from the poles of the current ROM until the
shifts settle.  ``nowi`` is the input-weighted counterpart that targets the
bi-tangential interpolation conditions and fixes the ROM feedthrough at the
end.
"""

import warnings
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np
import scipy.linalg as spla

from fwmor.balancing import project
from fwmor.diagnostics import optimality_residuals, weighted_h2_error
from fwmor.exceptions import (
    BiorthogonalBreakdown,
    DeflatedBasis,
    NoConvergence,
    SingularNullProjection,
    UnstableIterate,
    ValidationError,
)
from fwmor.gramians import fw_input_data, fw_output_data, rom_input_gramians
from fwmor.linalg import orthonormal_basis, solve_lyapunov, solve_sylvester
from fwmor.powi import ReductionResult, krylov_basis
from fwmor.statespace import InterpolationData, StateSpaceModel, WeightedProblem, pole_residue

__all__ = [
    'IterationTrace',
    'NowiData',
    'update_interpolation',
    'dpowi',
    'nowi',
    'halevi_setup',
    'null_basis',
    'nowi_feedthrough',
]

BIORTH_TOL = 1e-12
NULL_COND = 1e12


@dataclass
class IterationTrace:
    """Per-iteration history of an iterative reducer.

    Entry ``k`` describes the ROM built in iteration ``k`` from ``shifts[k]``;
    ``relative_change[k]`` compares the shifts derived from that ROM with
    ``shifts[k]``.  Residuals are Frobenius norms of
    ``C P12_hat - Cr Pe_rom`` (input) and ``Q12_hat^T B - Qe_rom Br``
    (output); ``None`` where a side does not apply.
    """

    shifts: List[np.ndarray] = field(default_factory=list)
    relative_change: List[float] = field(default_factory=list)
    input_residual: List[Optional[float]] = field(default_factory=list)
    output_residual: List[Optional[float]] = field(default_factory=list)
    weighted_error: List[Optional[float]] = field(default_factory=list)
    unstable: List[bool] = field(default_factory=list)
    reflected: List[bool] = field(default_factory=list)
    converged: bool = False

    def __len__(self):
        return len(self.shifts)

    def as_dict(self):
        """JSON-friendly representation (complex shifts as ``[re, im]`` pairs)."""
        return {
            'shifts': [[[float(z.real), float(z.imag)] for z in s] for s in self.shifts],
            'relative_change': [float(x) for x in self.relative_change],
            'input_residual': self.input_residual,
            'output_residual': self.output_residual,
            'weighted_error': self.weighted_error,
            'unstable': self.unstable,
            'reflected': self.reflected,
            'converged': self.converged,
        }


def _sorted(z):
    return z[np.lexsort((z.imag, z.real))]


def _relative_change(new, old):
    a, b = _sorted(np.asarray(new)), _sorted(np.asarray(old))
    if a.size != b.size:
        return np.inf
    return float(np.linalg.norm(a - b) / max(np.linalg.norm(b), np.finfo(float).tiny))


def update_interpolation(rom, allow_unstable=False):
    """Shifts and tangential directions from the pole-residue form of ``rom``.

    ``sigma_i = -lam_i``; the right direction of ``sigma_i`` is the residue
    row ``b_i`` (row ``i`` of ``R^{-1} Br``) and the left direction the
    residue column ``c_i`` (column ``i`` of ``Cr R``), where
    ``Ar = R diag(lam) R^{-1}``.

    Raises
    ------
    RepeatedPoles, DefectiveMatrix
        If the ROM poles are not simple.
    UnstableIterate
        If some ``Re(sigma_i) <= 0`` and ``allow_unstable`` is False.
    """
    prf = pole_residue(rom)
    shifts = -prf.poles
    if not allow_unstable and np.any(shifts.real <= 0):
        raise UnstableIterate(f'iterate has poles in the closed right half-plane: {prf.poles[prf.poles.real >= 0]}')
    return InterpolationData(shifts, prf.b, prf.c)


def _reflect(data):
    s = data.shifts.copy()
    bad = s.real <= 0
    s[bad] = -s[bad].conjugate()
    return InterpolationData(s, data.right, data.left), bool(np.any(bad))


def _top_basis(A, B, data, directions, n, what):
    X = krylov_basis(A, B, data, directions)[:n]
    Q, rank = orthonormal_basis(X)
    if rank < X.shape[1]:
        raise DeflatedBasis(f'{what} projection basis has numerical rank {rank} < {X.shape[1]}')
    return Q


def _biorthogonalize(V, W):
    M = V.T @ W
    sv = np.linalg.svd(M, compute_uv=False)
    if sv[-1] < BIORTH_TOL:
        raise BiorthogonalBreakdown(f'V^T W is singular (smallest singular value {sv[-1]:.3e})')
    return W @ np.linalg.inv(M)


def _check_data(data, need_right=True, need_left=True):
    if not isinstance(data, InterpolationData):
        raise ValidationError('interpolation data must be an InterpolationData instance')
    if need_right and data.right is None:
        raise ValidationError('right tangential directions are required')
    if need_left and data.left is None:
        raise ValidationError('left tangential directions are required')


def _iterate(step, data0, G, tol, max_iter, reflect_unstable, residuals, error):
    if not tol > 0:
        raise ValidationError('tol must be positive')
    if max_iter < 1:
        raise ValidationError('max_iter must be at least 1')
    trace = IterationTrace()
    data = data0
    rom = None
    for _ in range(int(max_iter)):
        rom = step(data)
        new = update_interpolation(rom, allow_unstable=True)
        unstable = bool(np.any(new.shifts.real <= 0))
        reflected = False
        if reflect_unstable and unstable:
            new, reflected = _reflect(new)
        rin, rout = residuals(rom)
        trace.shifts.append(data.shifts.copy())
        trace.relative_change.append(_relative_change(new.shifts, data.shifts))
        trace.input_residual.append(rin)
        trace.output_residual.append(rout)
        trace.weighted_error.append(error(rom) if error is not None and not unstable else None)
        trace.unstable.append(unstable)
        trace.reflected.append(reflected)
        data = new
        if trace.relative_change[-1] <= tol:
            trace.converged = True
            break
    if not trace.converged:
        warnings.warn(f'no convergence after {max_iter} iterations '
                      f'(last relative change {trace.relative_change[-1]:.3e})', NoConvergence, stacklevel=3)
    return rom, data, trace


def _poles(rom):
    w = np.linalg.eigvals(rom.A)
    return _sorted(w)


def dpowi(G, V, W, data0, tol=1e-6, max_iter=100, reflect_unstable=False, track_error=False):
    """Two-sided frequency-weighted reduction by iterated Krylov projection.

    Each iteration builds ``V_r`` from the plant rows of
    ``(sigma_i I - A_i)^{-1} B_F r_i`` and ``W_r`` from the plant rows of
    ``(sigma_i I - A_o^T)^{-1} C_G^T l_i``, orthonormalizes both, enforces
    ``W_r^T V_r = I`` and projects; the next shifts are the mirrored poles
    of the projected model with its residue directions.  The ROM keeps the
    plant feedthrough.

    Parameters
    ----------
    G, V, W
        Plant and input/output weights (``None`` means identity).
    data0
        Initial shifts with right and left directions.
    tol
        Stop when the relative change of the sorted shift set is ``<= tol``.
    max_iter
        Iteration cap; hitting it issues :class:`NoConvergence` and returns
        the last iterate with ``converged = False``.
    reflect_unstable
        Mirror shifts that land in the closed left half-plane
        (``sigma <- -conj(sigma)``) before the next iteration.  Off by
        default: the plain iteration may pass through unstable iterates.
    track_error
        Record the two-sided weighted H2 error of each stable iterate.

    Returns
    -------
    (ReductionResult, IterationTrace)
    """
    _check_data(data0)
    WeightedProblem(G, V, W)
    fwin = fw_input_data(G, V)
    fwout = fw_output_data(G, W)
    n = G.order
    Ai, B_F = fwin.Hi.A, fwin.B_F
    AoT, C_GT = fwout.Ho.A.T, fwout.C_G.T

    def step(data):
        Vr = _top_basis(Ai, B_F, data, data.right, n, 'input')
        Wr = _top_basis(AoT, C_GT, data, data.left, n, 'output')
        return project(G, Vr, _biorthogonalize(Vr, Wr))

    def residuals(rom):
        res = optimality_residuals(G, rom, V, W, sides=('input', 'output'))
        return res['input'], res['output']

    error = (lambda rom: weighted_h2_error(G, rom, V, W)) if track_error else None
    rom, data, trace = _iterate(step, data0, G, tol, max_iter, reflect_unstable, residuals, error)
    res = optimality_residuals(G, rom, V, W, sides=('input', 'output'))
    diagnostics = {
        'input_residual': res['input'],
        'output_residual': res['output'],
        'input_raw': res['input_raw'],
        'output_raw': res['output_raw'],
        'relative_change': trace.relative_change[-1],
        'final_shifts': data.shifts,
    }
    result = ReductionResult(rom, None, _poles(rom), None, diagnostics, len(trace), trace.converged)
    return result, trace


def null_basis(X, rtol=1e-12):
    """Orthonormal basis of the null space of ``X^T`` (shape ``(rows, k)``)."""
    X = np.asarray(X, dtype=float)
    return spla.null_space(X.T, rcond=rtol)


def nowi_feedthrough(G, Vr, fwin, P12_rom):
    """Feedthrough ``D_r`` satisfying the null-space condition of the input-weighted problem.

    ``D_r = D + C (P_12 - V_r P12_rom) C_v^T M (M^T C_v P_v C_v^T M)^{-1} M^T``
    with ``M`` an orthonormal basis of the null space of ``D_v^T``; this
    keeps ``(D - D_r) D_v = 0`` so the weighted error stays strictly proper.
    Returns ``(D_r, M, deviation)`` where ``deviation`` is
    ``||P_12 - V_r P12_rom||_F``.
    """
    Vw = fwin.V
    M = null_basis(Vw.D)
    gap = fwin.P_12 - Vr @ P12_rom
    deviation = float(np.linalg.norm(gap))
    if M.shape[1] == 0:
        return G.D.copy(), M, deviation
    K = M.T @ Vw.C @ fwin.P_v @ Vw.C.T @ M
    if K.size == 0 or np.linalg.cond(K) > NULL_COND:
        raise SingularNullProjection('M^T C_v P_v C_v^T M is singular; the feedthrough condition has no unique solution')
    Dr = G.D + G.C @ gap @ Vw.C.T @ M @ np.linalg.solve(K, M.T)
    return Dr, M, deviation


def nowi(G, V, data0, tol=1e-6, max_iter=100, reflect_unstable=False, track_error=False):
    """Input-weighted reduction targeting the bi-tangential interpolation conditions.

    Each iteration projects with ``V_r`` from the plant rows of
    ``(sigma_i I - A_i)^{-1} B_F b_i`` and ``W_r`` from the plant rows of
    ``(sigma_i I - A_i^T)^{-1} C_i^T c_i`` (``W_r^T V_r = I``), with
    ``sigma_i = -lam_i`` the mirrored ROM poles.  After the last iteration
    the feedthrough is set by :func:`nowi_feedthrough`; iterations use the
    plant feedthrough.  The deviation ``||P_12 - V_r P12_rom||_F``, which
    measures how far the interpolation conditions are from being met
    exactly, is reported in the diagnostics.
    """
    _check_data(data0)
    WeightedProblem(G, V, None)
    fwin = fw_input_data(G, V)
    n = G.order
    Hi = fwin.Hi
    last = {}

    def step(data):
        Vr = _top_basis(Hi.A, fwin.B_F, data, data.right, n, 'input')
        Wr = _top_basis(Hi.A.T, Hi.C.T, data, data.left, n, 'output')
        last['V'] = Vr
        return project(G, Vr, _biorthogonalize(Vr, Wr))

    def residuals(rom):
        return optimality_residuals(G, rom, V, None, sides=('input',))['input'], None

    error = (lambda rom: weighted_h2_error(G, rom, V, None)) if track_error else None
    rom, data, trace = _iterate(step, data0, G, tol, max_iter, reflect_unstable, residuals, error)
    P12_rom = rom_input_gramians(rom, fwin).P12_rom
    Dr, M, deviation = nowi_feedthrough(G, last['V'], fwin, P12_rom)
    rom = StateSpaceModel(rom.A, rom.B, rom.C, Dr)
    diagnostics = {
        'interpolation_deviation': deviation,
        'input_residual': trace.input_residual[-1],
        'relative_change': trace.relative_change[-1],
        'final_shifts': data.shifts,
        'null_space_dim': int(M.shape[1]),
    }
    result = ReductionResult(rom, None, _poles(rom), None, diagnostics, len(trace), trace.converged)
    return result, trace


@dataclass(frozen=True, eq=False)
class NowiData:
    """Ingredients of the input-weighted first-order conditions.

    ``X_hat`` solves ``A_i X + X Ar^T + B_F Br^T = 0`` (its plant rows are
    the plant/ROM cross-Gramian); ``Y_hat`` solves the dual equation that
    involves the ROM observability Gramian ``Q_rom``; ``M`` is an
    orthonormal basis of the null space of ``D_v^T``.
    """

    X_hat: np.ndarray
    Y_hat: np.ndarray
    M: np.ndarray
    D_r: np.ndarray
    Q_rom: np.ndarray


def halevi_setup(G, Gr, V=None, fwin=None):
    """Solve for the ingredients of the input-weighted first-order conditions."""
    if fwin is None:
        fwin = fw_input_data(G, V)
    Vw = fwin.V
    Ai = fwin.Hi.A
    n = G.order
    Q_rom = solve_lyapunov(Gr.A.T, Gr.C.T @ Gr.C)
    X = solve_sylvester(Ai, Gr.A.T, fwin.B_F @ Gr.B.T)
    top = np.vstack([G.C.T, ((G.D - Gr.D) @ Vw.C).T])
    bottom = np.vstack([np.zeros((n, Vw.outputs)), Vw.C.T])
    Y = solve_sylvester(Ai.T, Gr.A, -top @ Gr.C + bottom @ Gr.B.T @ Q_rom)
    return NowiData(X, Y, null_basis(Vw.D), Gr.D.copy(), Q_rom)
