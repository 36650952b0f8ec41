"""Norms and optimality checks for reduced models.

H2 norms come from Gramians; the H-infinity norm is only *estimated* by a
frequency sweep with a local refinement (the estimate is a lower bound).
The optimality, Halevi and interpolation residuals quantify how far a
reduced model is from a stationary point of the weighted H2 error.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np
import scipy.linalg as spla
from scipy.optimize import minimize_scalar

from fwmor.exceptions import ImproperError, UnstableSystem
from fwmor.gramians import (
    fw_input_data,
    fw_output_data,
    rom_input_gramians,
    rom_output_gramians,
)
from fwmor.linalg import solve_lyapunov
from fwmor.statespace import (
    StateSpaceModel,
    augment_input,
    augment_output,
    evaluate,
    pole_residue,
    validate,
    weighted_error_system,
)

__all__ = [
    'h2_norm',
    'weighted_h2_error',
    'weighted_h2_trace_expansion',
    'SigmaSweep',
    'sigma_sweep',
    'optimality_residuals',
    'HaleviReport',
    'halevi_residuals',
    'InterpolationResidual',
    'interpolation_residuals',
]

# squared norms within this many roundoff units of the trace terms are zero;
# the exact-cancellation residual of G - G stays below 0.05 units in practice
ROUNDOFF_UNITS = 1


def _floored_sqrt(value, magnitude, size):
    """``sqrt(max(value, 0))``, with values at roundoff level mapped to 0.

    ``magnitude`` bounds the size of the terms whose cancellation produced
    ``value``; a squared norm of ``G - G`` comes out as ``O(eps * magnitude)``
    rather than zero, and its square root would be spuriously large.
    """
    if value <= ROUNDOFF_UNITS * max(size, 1) * np.finfo(float).eps * magnitude:
        return 0.0
    return float(np.sqrt(value))


def h2_norm(G):
    """H2 norm ``sqrt(tr(C P C^T))`` of a stable, strictly proper model.

    Raises
    ------
    ImproperError
        If ``D`` is nonzero (the norm is unbounded).
    UnstableSystem
        If ``A`` is not Hurwitz.
    """
    if np.any(G.D != 0):
        raise ImproperError('H2 norm requires a strictly proper system (D = 0)')
    rep = validate(G)
    if not rep.is_stable:
        raise UnstableSystem(f'H2 norm requires a stable system (spectral abscissa {rep.spectral_abscissa:.4g})')
    if G.order == 0:
        return 0.0
    P = solve_lyapunov(G.A, G.B @ G.B.T)
    value = float(np.trace(G.C @ P @ G.C.T))
    magnitude = np.linalg.norm(G.C) ** 2 * np.linalg.norm(P, 2)
    return _floored_sqrt(value, magnitude, G.order)


def weighted_h2_error(G, Gr, V=None, W=None):
    """H2 norm of ``W (G - Gr) V``; the composed feedthrough must vanish."""
    return h2_norm(weighted_error_system(G, Gr, V, W))


def weighted_h2_trace_expansion(G, Gr, V=None, W=None):
    """Weighted H2 error from the plant/ROM/cross Gramians of one weighted side.

    With only an input weight (or none) the squared error is
    ``tr(C P_e C^T) - 2 tr(C P12_hat Cr^T) + tr(Cr Pe_rom Cr^T)``;
    with only an output weight the dual expression in ``B``, ``Br`` is used.
    Requires ``Gr.D == G.D``.
    """
    if V is not None and W is not None:
        raise ValueError('the trace expansion covers one-sided weighting only')
    if not np.allclose(G.D, Gr.D, rtol=0, atol=0):
        raise ImproperError('trace expansion requires Gr.D == G.D')
    if W is None:
        fw = fw_input_data(G, V)
        rg = rom_input_gramians(Gr, fw)
        terms = (np.trace(G.C @ fw.P_e @ G.C.T),
                 -2 * np.trace(G.C @ rg.P12_hat @ Gr.C.T),
                 np.trace(Gr.C @ rg.Pe_rom @ Gr.C.T))
    else:
        fw = fw_output_data(G, W)
        rg = rom_output_gramians(Gr, fw)
        terms = (np.trace(G.B.T @ fw.Q_e @ G.B),
                 -2 * np.trace(G.B.T @ rg.Q12_hat @ Gr.B),
                 np.trace(Gr.B.T @ rg.Qe_rom @ Gr.B))
    return _floored_sqrt(float(sum(terms)), float(sum(abs(t) for t in terms)), G.order + Gr.order)


@dataclass(frozen=True, eq=False)
class SigmaSweep:
    """Largest singular value of ``G(i omega)`` over a frequency grid.

    ``hinf_estimate`` is the largest sampled value: a lower bound of the
    H-infinity norm, not a certified value.
    """

    frequencies: np.ndarray
    max_singular_values: np.ndarray
    hinf_estimate: float
    peak_frequency: float


def _sigma_max(G, w):
    H = evaluate(G, 1j * w) if isinstance(G, StateSpaceModel) else np.asarray(G(1j * w))
    if H.size == 0:
        return 0.0
    return float(np.linalg.svd(H, compute_uv=False)[0])


def sigma_sweep(G, f_min=1e-3, f_max=1e3, n_points=400, refine=True):
    """Sweep ``sigma_max(G(i omega))`` over a log grid in rad/s.

    ``G`` is a model or any callable returning the transfer matrix at a
    complex point.  With ``refine`` a bounded scalar search (in ``log omega``) between the
    neighbours of the grid maximiser adds one more sample.
    """
    if not (f_min > 0 and f_max > f_min):
        raise ValueError('need 0 < f_min < f_max')
    if n_points < 2:
        raise ValueError('need at least two frequency points')
    w = np.logspace(np.log10(f_min), np.log10(f_max), int(n_points))
    s = np.array([_sigma_max(G, x) for x in w])
    k = int(np.argmax(s))
    if refine and getattr(G, 'order', 1) > 0:
        lo, hi = np.log(w[max(k - 1, 0)]), np.log(w[min(k + 1, w.size - 1)])
        res = minimize_scalar(lambda t: -_sigma_max(G, np.exp(t)), bounds=(lo, hi), method='bounded',
                              options={'xatol': 1e-10})
        wr = float(np.exp(res.x))
        if np.all(np.abs(w - wr) > 1e-12 * wr):
            sr = _sigma_max(G, wr)
            j = int(np.searchsorted(w, wr))
            w = np.insert(w, j, wr)
            s = np.insert(s, j, sr)
    k = int(np.argmax(s))
    return SigmaSweep(w, s, float(s[k]), float(w[k]))


def optimality_residuals(G, Gr, V=None, W=None, sides=None):
    """Deviation from the one-sided pseudo-optimality conditions.

    Returns a dict with, per computed side, the raw matrix and its Frobenius
    norm (absolute and relative):

    * ``input_raw = Cr Pe_rom - C P12_hat`` (``p x r``),
    * ``output_raw = Qe_rom Br - Q12_hat^T B`` (``r x m``).

    By default the input side is evaluated when ``V`` is given, the output
    side when ``W`` is given, and both when neither is given.
    """
    if sides is None:
        sides = [s for s, wt in (('input', V), ('output', W)) if wt is not None] or ['input', 'output']
    out = {}
    if 'input' in sides:
        rg = rom_input_gramians(Gr, fw_input_data(G, V))
        ref = G.C @ rg.P12_hat
        raw = Gr.C @ rg.Pe_rom - ref
        out['input_raw'] = raw
        out['input'] = float(np.linalg.norm(raw))
        out['input_relative'] = float(np.linalg.norm(raw) / max(np.linalg.norm(ref), np.finfo(float).tiny))
    if 'output' in sides:
        rg = rom_output_gramians(Gr, fw_output_data(G, W))
        ref = rg.Q12_hat.T @ G.B
        raw = rg.Qe_rom @ Gr.B - ref
        out['output_raw'] = raw
        out['output'] = float(np.linalg.norm(raw))
        out['output_relative'] = float(np.linalg.norm(raw) / max(np.linalg.norm(ref), np.finfo(float).tiny))
    return out


@dataclass(frozen=True, eq=False)
class HaleviReport:
    """Frobenius norms of the four first-order conditions for input weighting.

    Attributes
    ----------
    cross
        ``C_i X - Cr Pe_rom - Dr [0, C_v] X`` (stationarity in ``Cr``).
    input
        ``Y^T B_F + Q_r (Br D_v D_v^T + X^T [0; C_v^T])`` (stationarity in ``Br``).
    gramian
        ``Y^T X + Q_r Pe_rom`` (stationarity in ``Ar``).
    feedthrough
        Null-space condition on ``Dr`` (zero-sized when ``D_v^T`` has a
        trivial null space).
    setup
        The solved ingredients (:class:`fwmor.iterative.NowiData`).
    """

    cross: float
    input: float
    gramian: float
    feedthrough: float
    setup: object

    def as_dict(self):
        return {'cross': self.cross, 'input': self.input,
                'gramian': self.gramian, 'feedthrough': self.feedthrough}

    def max(self):
        return max(self.as_dict().values())


def halevi_residuals(G, Gr, V=None):
    """Evaluate the input-weighted first-order stationarity conditions at ``Gr``."""
    from fwmor.iterative import halevi_setup

    fwin = fw_input_data(G, V)
    hs = halevi_setup(G, Gr, V, fwin)
    Vw = fwin.V
    n = G.order
    Pe = rom_input_gramians(Gr, fwin).Pe_rom
    X, Y, M, Qr = hs.X_hat, hs.Y_hat, hs.M, hs.Q_rom
    Dr = Gr.D
    ZC = np.hstack([np.zeros((Vw.outputs, n)), Vw.C])     # [0, C_v]
    cross = fwin.Hi.C @ X - Gr.C @ Pe - Dr @ ZC @ X
    inp = Y.T @ fwin.B_F + Qr @ (Gr.B @ Vw.D @ Vw.D.T + X.T @ ZC.T)
    gram = Y.T @ X + Qr @ Pe
    if M.shape[1]:
        feed = (Gr.C @ X.T @ ZC.T @ M - G.C @ fwin.P_12 @ Vw.C.T @ M
                - (G.D - Dr) @ Vw.C @ fwin.P_v @ Vw.C.T @ M)
    else:
        feed = np.zeros((G.outputs, 0))
    return HaleviReport(float(np.linalg.norm(cross)), float(np.linalg.norm(inp)),
                        float(np.linalg.norm(gram)), float(np.linalg.norm(feed)), hs)


@dataclass(frozen=True)
class InterpolationResidual:
    """Relative tangential interpolation residuals at one mirrored ROM pole.

    ``right``/``left`` compare the weighted maps along ``b_i`` / ``c_i``;
    ``hermite`` compares the bi-tangential derivative ``c_i^T F' b_i``.
    ``output_left`` is the left-tangential residual of the output-weighted map.
    Entries not evaluated are ``None``.
    """

    pole: complex
    right: Optional[float] = None
    left: Optional[float] = None
    hermite: Optional[float] = None
    output_left: Optional[float] = None


def _resolvent(A, s, B):
    return spla.solve(s * np.eye(A.shape[0]) - A, B.astype(complex))


def _rel(a, b):
    den = max(np.linalg.norm(a), np.finfo(float).tiny)
    return float(np.linalg.norm(a - b) / den)


def _input_maps(G, Gr, V):
    fwin = fw_input_data(G, V)
    Vw = fwin.V
    rg = rom_input_gramians(Gr, fwin)
    Hr = augment_input(Gr, Vw)
    full = (fwin.Hi.A, fwin.B_F, fwin.Hi.C)
    red = (Hr.A, rg.B_F_rom, np.hstack([Gr.C, Gr.D @ Vw.C]))
    return full, red


def _output_maps(G, Gr, W):
    fwout = fw_output_data(G, W)
    Ww = fwout.W
    rg = rom_output_gramians(Gr, fwout)
    Hr = augment_output(Ww, Gr)
    full = (fwout.Ho.A, fwout.Ho.B, fwout.C_G)
    red = (Hr.A, Hr.B, rg.C_G_rom)
    return full, red


def interpolation_residuals(G, Gr, V=None, W=None, sides=None):
    """Tangential interpolation residuals at the mirror images of the ROM poles.

    For each pole ``lam_i`` of ``Gr`` with residue directions ``b_i``,
    ``c_i``, the weighted input map ``F(s) = C_i (sI - A_i)^{-1} B_F`` of
    the plant is compared with that of ``Gr`` at ``s = -lam_i`` along
    ``b_i`` (right), ``c_i`` (left) and in the derivative ``c_i^T F' b_i``
    (Hermite).  On the output side, ``c_i^T G_map(-lam_i)`` is compared with
    ``G_map(s) = C_G (sI - A_o)^{-1} B_o``.

    By default the input side is evaluated when ``W`` is absent and the
    output side when ``V`` is absent (both when neither weight is given,
    but then the output side uses the identity output weight).
    """
    if sides is None:
        sides = []
        if W is None or V is not None:
            sides.append('input')
        if V is None or W is not None:
            sides.append('output')
    prf = pole_residue(Gr)
    inp = _input_maps(G, Gr, V) if 'input' in sides else None
    outp = _output_maps(G, Gr, W) if 'output' in sides else None
    results = []
    for lam, b, c in zip(prf.poles, prf.b, prf.c):
        s = -lam
        kw = {}
        if inp is not None:
            (A, B, C), (Ar, Br, Cr) = inp
            X, Xr = _resolvent(A, s, B), _resolvent(Ar, s, Br)
            F, Fr = C @ X, Cr @ Xr
            kw['right'] = _rel(F @ b, Fr @ b)
            kw['left'] = _rel(c @ F, c @ Fr)
            dF = -C @ _resolvent(A, s, X)
            dFr = -Cr @ _resolvent(Ar, s, Xr)
            kw['hermite'] = _rel(np.atleast_1d(c @ dF @ b), np.atleast_1d(c @ dFr @ b))
        if outp is not None:
            (A, B, C), (Ar, Br, Cr) = outp
            Gm = C @ _resolvent(A, s, B)
            Gmr = Cr @ _resolvent(Ar, s, Br)
            kw['output_left'] = _rel(c @ Gm, c @ Gmr)
        results.append(InterpolationResidual(complex(lam), **kw))
    return results
