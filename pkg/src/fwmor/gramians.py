"""Standard and frequency-weighted Gramians.

Weighted quantities are computed from the small decoupled equations (weight
Gramian, plant/weight cross-Gramian, plant block) rather than from the full
augmented Lyapunov equation.  A missing weight is replaced by the static
identity, which makes every formula reduce to its unweighted counterpart.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from fwmor.exceptions import DimensionMismatch, NotPositiveDefinite
from fwmor.linalg import solve_lyapunov, solve_sylvester
from fwmor.statespace import StateSpaceModel, augment_input, augment_output

__all__ = [
    'standard_gramians',
    'FWInputData',
    'FWOutputData',
    'RomWeightedGramians',
    'fw_input_data',
    'fw_output_data',
    'rom_input_gramians',
    'rom_output_gramians',
]

PSD_FLOOR = 1e-10


def _check_psd(name, X):
    if X.size == 0:
        return
    ev = np.linalg.eigvalsh(X)
    scale = max(abs(ev[-1]), abs(ev[0]), np.finfo(float).tiny)
    if ev[0] < -PSD_FLOOR * scale:
        raise NotPositiveDefinite(
            f'{name} has a negative eigenvalue {ev[0]:.3e} (largest {ev[-1]:.3e}); '
            'a system upstream is probably unstable')


def standard_gramians(G):
    """Controllability and observability Gramians ``(P, Q)`` of ``G``."""
    P = solve_lyapunov(G.A, G.B @ G.B.T)
    Q = solve_lyapunov(G.A.T, G.C.T @ G.C)
    return P, Q


def _input_weight(G, V):
    if V is None:
        return StateSpaceModel.identity(G.inputs)
    if V.inputs != G.inputs or V.outputs != G.inputs:
        raise DimensionMismatch(f'input weight must be {G.inputs}x{G.inputs}')
    return V


def _output_weight(G, W):
    if W is None:
        return StateSpaceModel.identity(G.outputs)
    if W.inputs != G.outputs or W.outputs != G.outputs:
        raise DimensionMismatch(f'output weight must be {G.outputs}x{G.outputs}')
    return W


@dataclass(frozen=True, eq=False)
class FWInputData:
    """Input-weighted data of a plant ``G`` and weight ``V``.

    Attributes
    ----------
    G, V
        Plant and input weight (``V`` is the static identity when absent).
    Hi
        Realization of ``G V`` (plant states first).
    P_v
        Controllability Gramian of the weight.
    P_12
        Plant/weight cross-Gramian.
    P_e
        Input frequency-weighted controllability Gramian.
    B_F
        Input matrix of the weighted interpolation map, ``(n + n_v) x m``.
    B_1, B_2
        Factors with ``A P_e + P_e A^T + B_1 B_2^T = 0``.
    """

    G: StateSpaceModel
    V: StateSpaceModel
    Hi: StateSpaceModel
    P_v: np.ndarray
    P_12: np.ndarray
    P_e: np.ndarray
    B_F: np.ndarray
    B_1: np.ndarray
    B_2: np.ndarray

    @property
    def weight_coupling(self):
        """``C_v P_v + D_v B_v^T``, the constant term of the cross-Gramian equations."""
        return self.V.C @ self.P_v + self.V.D @ self.V.B.T


@dataclass(frozen=True, eq=False)
class FWOutputData:
    """Output-weighted data of a plant ``G`` and weight ``W`` (dual of :class:`FWInputData`).

    ``C_G`` is ``p x (n + n_w)``; ``C_1``, ``C_2`` satisfy
    ``A^T Q_e + Q_e A + C_1^T C_2 = 0``.
    """

    G: StateSpaceModel
    W: StateSpaceModel
    Ho: StateSpaceModel
    Q_w: np.ndarray
    Q_12: np.ndarray
    Q_e: np.ndarray
    C_G: np.ndarray
    C_1: np.ndarray
    C_2: np.ndarray

    @property
    def weight_coupling(self):
        """``B_w^T Q_w + D_w^T C_w``."""
        return self.W.B.T @ self.Q_w + self.W.D.T @ self.W.C


def fw_input_data(G, V=None):
    """Frequency-weighted controllability data of ``G`` under input weight ``V``."""
    V = _input_weight(G, V)
    P_v = solve_lyapunov(V.A, V.B @ V.B.T)
    coupling = V.C @ P_v + V.D @ V.B.T
    P_12 = solve_sylvester(G.A, V.A.T, G.B @ coupling)
    PC = P_12 @ V.C.T
    BD = G.B @ V.D
    B_1 = np.hstack([G.B, PC, BD])
    B_2 = np.hstack([PC, G.B, BD])
    P_e = solve_lyapunov(G.A, B_1 @ B_2.T)
    _check_psd('P_e', P_e)
    B_F = np.vstack([PC + BD @ V.D.T, coupling.T])
    return FWInputData(G, V, augment_input(G, V), P_v, P_12, P_e, B_F, B_1, B_2)


def fw_output_data(G, W=None):
    """Frequency-weighted observability data of ``G`` under output weight ``W``."""
    W = _output_weight(G, W)
    Q_w = solve_lyapunov(W.A.T, W.C.T @ W.C)
    coupling = W.B.T @ Q_w + W.D.T @ W.C
    Q_12 = solve_sylvester(G.A.T, W.A, G.C.T @ coupling)
    BQ = W.B.T @ Q_12.T
    DC = W.D @ G.C
    C_1 = np.vstack([G.C, BQ, DC])
    C_2 = np.vstack([BQ, G.C, DC])
    Q_e = solve_lyapunov(G.A.T, C_1.T @ C_2)
    _check_psd('Q_e', Q_e)
    C_G = np.hstack([BQ + W.D.T @ DC, coupling])
    return FWOutputData(G, W, augment_output(W, G), Q_w, Q_12, Q_e, C_G, C_1, C_2)


@dataclass(frozen=True, eq=False)
class RomWeightedGramians:
    """Weighted Gramians of a reduced model and its coupling to the plant.

    Input side (``None`` when not computed): ``P12_rom`` (ROM/weight
    cross-Gramian), ``Pe_rom`` (weighted controllability Gramian of the ROM),
    ``P12_hat`` (plant/ROM cross-Gramian, ``n x r``), ``B_F_rom``.
    Output side: ``Q12_rom``, ``Qe_rom``, ``Q12_hat``, ``C_G_rom``.
    """

    P12_rom: Optional[np.ndarray] = None
    Pe_rom: Optional[np.ndarray] = None
    P12_hat: Optional[np.ndarray] = None
    B_F_rom: Optional[np.ndarray] = None
    Q12_rom: Optional[np.ndarray] = None
    Qe_rom: Optional[np.ndarray] = None
    Q12_hat: Optional[np.ndarray] = None
    C_G_rom: Optional[np.ndarray] = None


def rom_input_gramians(Gr, fwin):
    """Input-weighted Gramians of the reduced model ``Gr``.

    Parameters
    ----------
    Gr
        Reduced model with the plant's input/output dimensions.
    fwin
        Output of :func:`fw_input_data` for the plant and weight.
    """
    V = fwin.V
    if (Gr.inputs, Gr.outputs) != (fwin.G.inputs, fwin.G.outputs):
        raise DimensionMismatch('reduced model dimensions differ from the plant')
    P12 = solve_sylvester(Gr.A, V.A.T, Gr.B @ fwin.weight_coupling)
    PC = P12 @ V.C.T
    BD = Gr.B @ V.D
    B1 = np.hstack([Gr.B, PC, BD])
    B2 = np.hstack([PC, Gr.B, BD])
    Pe = solve_lyapunov(Gr.A, B1 @ B2.T)
    P12_hat = solve_sylvester(fwin.G.A, Gr.A.T, fwin.B_1 @ B2.T)
    B_F = np.vstack([PC + BD @ V.D.T, fwin.weight_coupling.T])
    return RomWeightedGramians(P12_rom=P12, Pe_rom=Pe, P12_hat=P12_hat, B_F_rom=B_F)


def rom_output_gramians(Gr, fwout):
    """Output-weighted Gramians of the reduced model ``Gr`` (dual of :func:`rom_input_gramians`)."""
    W = fwout.W
    if (Gr.inputs, Gr.outputs) != (fwout.G.inputs, fwout.G.outputs):
        raise DimensionMismatch('reduced model dimensions differ from the plant')
    Q12 = solve_sylvester(Gr.A.T, W.A, Gr.C.T @ fwout.weight_coupling)
    BQ = W.B.T @ Q12.T
    DC = W.D @ Gr.C
    C1 = np.vstack([Gr.C, BQ, DC])
    C2 = np.vstack([BQ, Gr.C, DC])
    Qe = solve_lyapunov(Gr.A.T, C1.T @ C2)
    Q12_hat = solve_sylvester(fwout.G.A.T, Gr.A, fwout.C_1.T @ C2)
    C_G = np.hstack([BQ + W.D.T @ DC, fwout.weight_coupling])
    return RomWeightedGramians(Q12_rom=Q12, Qe_rom=Qe, Q12_hat=Q12_hat, C_G_rom=C_G)
