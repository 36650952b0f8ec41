"""State-space system algebra.

Models are immutable :class:`StateSpaceModel` values.  Frequency weights are
ordinary models; ``None`` stands for the identity weight everywhere.
"""

import warnings
from dataclasses import dataclass, field
from typing import NamedTuple, Optional

import numpy as np
import scipy.linalg as spla

from fwmor.exceptions import (
    DimensionMismatch,
    ImproperError,
    NonFinite,
    RepeatedPoles,
    SingularPencil,
    UnstableSystem,
    ValidationError,
)
from fwmor.linalg import spectral_factorization

__all__ = [
    'StateSpaceModel',
    'WeightedProblem',
    'PoleResidueForm',
    'InterpolationData',
    'StabilityReport',
    'validate',
    'evaluate',
    'augment_input',
    'augment_output',
    'difference',
    'weighted_error_system',
    'pole_residue',
    'from_pole_residue',
    'dominant_interpolation_data',
    'rss',
]

SIMPLE_POLE_TOL = 1e-8


def _matrix(name, X, shape=None):
    X = np.array(X, dtype=float, copy=True)
    if X.ndim == 0:
        X = X.reshape(1, 1)
    if X.ndim == 1:
        X = X.reshape(1, -1) if X.size else X.reshape(0, 0)
    if X.ndim != 2:
        raise DimensionMismatch(f'{name} must be a matrix, got {X.ndim} dimensions')
    if shape is not None and X.shape != shape:
        if X.size == 0 and 0 in shape:
            X = np.zeros(shape)
        else:
            raise DimensionMismatch(f'{name} has shape {X.shape}, expected {shape}')
    if not np.all(np.isfinite(X)):
        raise NonFinite(f'{name} contains NaN or Inf entries')
    X.setflags(write=False)
    return X


@dataclass(frozen=True, eq=False)
class StateSpaceModel:
    """Realization ``G(s) = C (sI - A)^{-1} B + D`` of a real transfer matrix.

    ``n = 0`` encodes a static gain.  Arrays are copied and made read-only.
    """

    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    D: np.ndarray

    def __post_init__(self):
        D = _matrix('D', self.D)
        A = _matrix('A', self.A)
        n = A.shape[0]
        if A.shape != (n, n):
            raise DimensionMismatch(f'A must be square, got {A.shape}')
        p, m = D.shape
        B = _matrix('B', self.B, (n, m))
        C = _matrix('C', self.C, (p, n))
        object.__setattr__(self, 'A', A)
        object.__setattr__(self, 'B', B)
        object.__setattr__(self, 'C', C)
        object.__setattr__(self, 'D', D)

    @classmethod
    def static(cls, D):
        D = np.atleast_2d(np.asarray(D, dtype=float))
        p, m = D.shape
        return cls(np.zeros((0, 0)), np.zeros((0, m)), np.zeros((p, 0)), D)

    @classmethod
    def identity(cls, m):
        return cls.static(np.eye(m))

    @property
    def order(self):
        return self.A.shape[0]

    n = order

    @property
    def inputs(self):
        return self.D.shape[1]

    @property
    def outputs(self):
        return self.D.shape[0]

    @property
    def poles(self):
        return np.linalg.eigvals(self.A) if self.order else np.zeros(0, dtype=complex)

    def transpose(self):
        """Dual realization ``(A^T, C^T, B^T, D^T)`` of ``G(s)^T``."""
        return StateSpaceModel(self.A.T, self.C.T, self.B.T, self.D.T)

    def transform(self, T):
        """Similarity transform ``(T^{-1} A T, T^{-1} B, C T, D)``."""
        T = np.asarray(T, dtype=float)
        return StateSpaceModel(np.linalg.solve(T, self.A @ T), np.linalg.solve(T, self.B),
                               self.C @ T, self.D)

    def __call__(self, s):
        return evaluate(self, s)

    def __repr__(self):
        return f'StateSpaceModel(order={self.order}, inputs={self.inputs}, outputs={self.outputs})'


class StabilityReport(NamedTuple):
    is_stable: bool
    spectral_abscissa: float


def validate(model):
    """Stability report of ``model``; a static gain counts as stable."""
    if not isinstance(model, StateSpaceModel):
        raise ValidationError('expected a StateSpaceModel')
    if model.order == 0:
        return StabilityReport(True, -np.inf)
    alpha = float(np.max(np.linalg.eigvals(model.A).real))
    return StabilityReport(alpha < 0, alpha)


def _require_stable(model, what='system'):
    rep = validate(model)
    if not rep.is_stable:
        raise UnstableSystem(f'{what} is not Hurwitz stable (spectral abscissa {rep.spectral_abscissa:.4g})')


@dataclass(frozen=True)
class WeightedProblem:
    """A plant together with optional input/output frequency weights."""

    plant: StateSpaceModel
    input_weight: Optional[StateSpaceModel] = None
    output_weight: Optional[StateSpaceModel] = None

    def __post_init__(self):
        G, V, W = self.plant, self.input_weight, self.output_weight
        _require_stable(G, 'plant')
        if V is not None:
            if V.inputs != G.inputs or V.outputs != G.inputs:
                raise DimensionMismatch(
                    f'input weight must be {G.inputs}x{G.inputs}, got {V.outputs}x{V.inputs}')
            _require_stable(V, 'input weight')
        if W is not None:
            if W.inputs != G.outputs or W.outputs != G.outputs:
                raise DimensionMismatch(
                    f'output weight must be {G.outputs}x{G.outputs}, got {W.outputs}x{W.inputs}')
            _require_stable(W, 'output weight')


def evaluate(G, s):
    """Transfer matrix ``C (sI - A)^{-1} B + D`` at the complex point ``s``."""
    s = complex(s)
    if G.order == 0:
        return G.D.astype(complex)
    M = s * np.eye(G.order) - G.A
    with warnings.catch_warnings():
        # exact singularity is reported below as SingularPencil
        warnings.simplefilter('ignore', spla.LinAlgWarning)
        lu, piv = spla.lu_factor(M, check_finite=False)
    d = np.abs(np.diag(lu))
    if d.min() <= G.order * np.finfo(float).eps * max(d.max(), np.finfo(float).tiny):
        raise SingularPencil(f'sI - A is singular at s = {s}')
    X = spla.lu_solve((lu, piv), G.B.astype(complex), check_finite=False)
    return G.C @ X + G.D


def augment_input(G, V):
    """Realization of ``G(s) V(s)`` (plant states first, weight states last)."""
    if V is None:
        return G
    if V.outputs != G.inputs:
        raise DimensionMismatch(f'cannot form G*V: G has {G.inputs} inputs, V has {V.outputs} outputs')
    n, nv = G.order, V.order
    A = np.block([[G.A, G.B @ V.C], [np.zeros((nv, n)), V.A]])
    B = np.vstack([G.B @ V.D, V.B])
    C = np.hstack([G.C, G.D @ V.C])
    return StateSpaceModel(A, B, C, G.D @ V.D)


def augment_output(W, G):
    """Realization of ``W(s) G(s)`` (plant states first, weight states last)."""
    if W is None:
        return G
    if W.inputs != G.outputs:
        raise DimensionMismatch(f'cannot form W*G: G has {G.outputs} outputs, W has {W.inputs} inputs')
    n, nw = G.order, W.order
    A = np.block([[G.A, np.zeros((n, nw))], [W.B @ G.C, W.A]])
    B = np.vstack([G.B, W.B @ G.D])
    C = np.hstack([W.D @ G.C, W.C])
    return StateSpaceModel(A, B, C, W.D @ G.D)


def difference(G, Gr):
    """Realization of ``G(s) - Gr(s)`` with block-diagonal state matrix."""
    if (G.inputs, G.outputs) != (Gr.inputs, Gr.outputs):
        raise DimensionMismatch('G and Gr must have the same input/output dimensions')
    A = spla.block_diag(G.A, Gr.A)
    return StateSpaceModel(A, np.vstack([G.B, Gr.B]), np.hstack([G.C, -Gr.C]), G.D - Gr.D)


def weighted_error_system(G, Gr, V=None, W=None, atol=1e-12):
    """Strictly proper realization of ``W(s) (G(s) - Gr(s)) V(s)``.

    The composed feedthrough ``D_w (D - D_r) D_v`` must vanish; entries below
    ``atol`` times the size of the factors are treated as roundoff and set
    to exactly zero.

    Raises
    ------
    ImproperError
        If the composed feedthrough is nonzero.
    """
    E = augment_output(W, augment_input(difference(G, Gr), V))
    scale = 1.0 + np.linalg.norm(G.D) + np.linalg.norm(Gr.D)
    if V is not None:
        scale *= 1.0 + np.linalg.norm(V.D)
    if W is not None:
        scale *= 1.0 + np.linalg.norm(W.D)
    if np.any(E.D != 0):
        if np.max(np.abs(E.D)) > atol * scale:
            raise ImproperError('weighted error has nonzero feedthrough; its H2 norm is unbounded')
    return StateSpaceModel(E.A, E.B, E.C, np.zeros_like(E.D))


@dataclass(frozen=True, eq=False)
class PoleResidueForm:
    """``G(s) = sum_i c_i b_i^T / (s - lam_i) + D``.

    ``b`` has shape ``(r, m)`` (row i is ``b_i^T``), ``c`` has shape
    ``(r, p)`` (row i is ``c_i^T``).
    """

    poles: np.ndarray
    b: np.ndarray
    c: np.ndarray
    D: np.ndarray

    def __call__(self, s):
        s = complex(s)
        return (self.c.T / (s - self.poles)) @ self.b + self.D


def _check_simple(lam):
    if lam.size < 2:
        return
    scale = max(1.0, float(np.max(np.abs(lam))))
    gaps = np.abs(lam[:, None] - lam[None, :])
    np.fill_diagonal(gaps, np.inf)
    if np.min(gaps) <= SIMPLE_POLE_TOL * scale:
        raise RepeatedPoles(f'poles are not simple (minimum gap {np.min(gaps):.3e})')


def pole_residue(G):
    """Pole-residue form of a model with simple poles."""
    lam, R = spectral_factorization(G.A)
    _check_simple(lam)
    b = np.linalg.solve(R, G.B.astype(complex))
    c = (G.C @ R).T
    return PoleResidueForm(lam, b, c, G.D.copy())


def _conjugate_pairs(lam, rtol=1e-10):
    """Group indices into real singletons and (upper, lower) conjugate pairs."""
    used = np.zeros(lam.size, dtype=bool)
    groups = []
    for i in range(lam.size):
        if used[i]:
            continue
        used[i] = True
        if lam[i].imag == 0:
            groups.append((i,))
            continue
        d = np.abs(lam - lam[i].conjugate())
        d[used] = np.inf
        j = int(np.argmin(d))
        if not np.isfinite(d[j]) or d[j] > rtol * (1 + abs(lam[i])):
            raise ValidationError(f'value {lam[i]} has no complex-conjugate partner')
        used[j] = True
        groups.append((i, j) if lam[i].imag > 0 else (j, i))
    return groups


def from_pole_residue(prf):
    """Real realization of a conjugate-closed pole-residue form."""
    blocks_A, blocks_B, blocks_C = [], [], []
    for g in _conjugate_pairs(prf.poles):
        if len(g) == 1:
            i = g[0]
            blocks_A.append(np.array([[prf.poles[i].real]]))
            blocks_B.append(prf.b[i:i + 1].real)
            blocks_C.append(prf.c[i:i + 1].real.T)
        else:
            i = g[0]
            a, w = prf.poles[i].real, prf.poles[i].imag
            blocks_A.append(np.array([[a, -w], [w, a]]))
            blocks_B.append(np.vstack([prf.b[i].real, prf.b[i].imag]))
            blocks_C.append(np.column_stack([2 * prf.c[i].real, -2 * prf.c[i].imag]))
    if not blocks_A:
        return StateSpaceModel.static(prf.D)
    return StateSpaceModel(spla.block_diag(*blocks_A), np.vstack(blocks_B), np.hstack(blocks_C),
                           np.real(prf.D))


@dataclass(frozen=True, eq=False)
class InterpolationData:
    """Shifts with optional right (``(k, m)``) and left (``(k, p)``) directions.

    The set must be closed under conjugation: for every complex shift the
    conjugate shift is present with conjugated directions.
    """

    shifts: np.ndarray
    right: Optional[np.ndarray] = None
    left: Optional[np.ndarray] = None
    _groups: tuple = field(default=(), repr=False, compare=False)

    def __post_init__(self):
        s = np.atleast_1d(np.asarray(self.shifts, dtype=complex)).copy()
        if s.ndim != 1:
            raise DimensionMismatch('shifts must be a vector')
        if not np.all(np.isfinite(s)):
            raise NonFinite('shifts contain NaN or Inf')
        tol = 1e-12 * (1 + np.abs(s))
        s = np.where(np.abs(s.imag) <= tol, s.real + 0j, s)
        dirs = {}
        for name in ('right', 'left'):
            X = getattr(self, name)
            if X is None:
                dirs[name] = None
                continue
            X = np.asarray(X, dtype=complex)
            if X.ndim == 1:
                X = X.reshape(s.size, -1)
            if X.shape[0] != s.size:
                raise DimensionMismatch(f'{name} directions need one row per shift ({s.size}), got {X.shape}')
            if not np.all(np.isfinite(X)):
                raise NonFinite(f'{name} directions contain NaN or Inf')
            dirs[name] = X.copy()
        groups = _conjugate_pairs(s)
        for g in groups:
            if len(g) == 2:
                i, j = g
                for name, X in dirs.items():
                    if X is not None and not np.allclose(X[j], X[i].conjugate(), rtol=1e-10, atol=1e-12):
                        raise ValidationError(f'{name} directions are not conjugate-closed at shift {s[i]}')
            else:
                for name, X in dirs.items():
                    if X is not None:
                        if np.any(np.abs(X[g[0]].imag) > 1e-10 * (1 + np.abs(X[g[0]]))):
                            raise ValidationError(f'{name} direction at real shift {s[g[0]]} must be real')
                        X[g[0]] = X[g[0]].real
        object.__setattr__(self, 'shifts', s)
        object.__setattr__(self, 'right', dirs['right'])
        object.__setattr__(self, 'left', dirs['left'])
        object.__setattr__(self, '_groups', tuple(groups))

    @classmethod
    def closed(cls, shifts, right=None, left=None):
        """Build data, appending missing conjugate partners automatically."""
        s = list(np.atleast_1d(np.asarray(shifts, dtype=complex)))
        R = None if right is None else [np.asarray(x, dtype=complex) for x in np.atleast_2d(right)]
        L = None if left is None else [np.asarray(x, dtype=complex) for x in np.atleast_2d(left)]
        k = len(s)
        for i in range(k):
            if s[i].imag != 0 and not any(abs(t - s[i].conjugate()) <= 1e-12 * (1 + abs(t)) for t in s):
                s.append(s[i].conjugate())
                if R is not None:
                    R.append(R[i].conjugate())
                if L is not None:
                    L.append(L[i].conjugate())
        return cls(np.array(s), None if R is None else np.array(R), None if L is None else np.array(L))

    def __len__(self):
        return self.shifts.size

    def sorted(self):
        """Copy ordered by real part, then imaginary part."""
        idx = np.lexsort((self.shifts.imag, self.shifts.real))
        return InterpolationData(self.shifts[idx],
                                 None if self.right is None else self.right[idx],
                                 None if self.left is None else self.left[idx])

    def real_groups(self):
        """Index groups: ``(i,)`` for real shifts, ``(i, j)`` for pairs with ``Im(s_i) > 0``.

        Groups are ordered by the shift with positive imaginary part
        (real part first, then imaginary part).
        """
        key = lambda g: (self.shifts[g[0]].real, self.shifts[g[0]].imag)
        return sorted(self._groups, key=key)


def dominant_interpolation_data(H, r):
    """Mirror images of the ``r`` most dominant poles of ``H``.

    Dominance is ``|c_i| |b_i| / |Re(lam_i)|``.  Conjugate pairs are taken
    together, so the result may hold ``r + 1`` shifts.  Right directions are
    ``b_i``, left directions ``c_i``.
    """
    if r < 1:
        raise ValidationError('r must be positive')
    if r > H.order:
        raise ValidationError(f'r = {r} exceeds the order {H.order} of the system')
    prf = pole_residue(H)
    index = np.linalg.norm(prf.c, axis=1) * np.linalg.norm(prf.b, axis=1) / np.abs(prf.poles.real)
    groups = _conjugate_pairs(prf.poles)
    groups.sort(key=lambda g: (-max(index[list(g)]), prf.poles[g[0]].real, -abs(prf.poles[g[0]].imag)))
    chosen = []
    for g in groups:
        if len(chosen) >= r:
            break
        chosen.extend(g)
    chosen = np.array(chosen)
    return InterpolationData(-prf.poles[chosen], prf.b[chosen], prf.c[chosen])


def rss(n, outputs=1, inputs=1, rng=None, pole_range=(0.1, 10.0), complex_fraction=0.5, strictly_proper=False):
    """Random stable model with well-separated, simple poles.

    Poles are drawn with real parts in ``-pole_range``; about
    ``complex_fraction`` of the states belong to complex-conjugate pairs.
    A random orthogonal similarity hides the block-diagonal structure.
    """
    rng = np.random.default_rng(rng)
    lo, hi = pole_range
    blocks = []
    k = 0
    while k < n:
        if n - k >= 2 and rng.random() < complex_fraction:
            a = -np.exp(rng.uniform(np.log(lo), np.log(hi)))
            w = np.exp(rng.uniform(np.log(lo), np.log(hi)))
            blocks.append(np.array([[a, w], [-w, a]]))
            k += 2
        else:
            blocks.append(np.array([[-np.exp(rng.uniform(np.log(lo), np.log(hi)))]]))
            k += 1
    A = spla.block_diag(*blocks) if blocks else np.zeros((0, 0))
    Q, _ = np.linalg.qr(rng.standard_normal((n, n))) if n else (np.zeros((0, 0)), None)
    A = Q.T @ A @ Q
    B = rng.standard_normal((n, inputs))
    C = rng.standard_normal((outputs, n))
    D = np.zeros((outputs, inputs)) if strictly_proper else rng.standard_normal((outputs, inputs))
    return StateSpaceModel(A, B, C, D)
