"""Frequency-weighted H2 model order reduction.

Iteration-free pseudo-optimal reduction with an input weight (:func:`ipowi`)
or an output weight (:func:`opowi`), the iterative two-sided :func:`dpowi`
and input-weighted :func:`nowi`, frequency-weighted balanced truncation
(:func:`fwbt`, :func:`approx_fwbt`) and diagnostics for checking the
first-order optimality and interpolation conditions.
"""

from fwmor.balancing import BalancingResult, approx_fwbt, fwbt, gramian_factor
from fwmor.diagnostics import (
    HaleviReport,
    InterpolationResidual,
    SigmaSweep,
    h2_norm,
    halevi_residuals,
    interpolation_residuals,
    optimality_residuals,
    sigma_sweep,
    weighted_h2_error,
    weighted_h2_trace_expansion,
)
from fwmor.exceptions import *  # noqa: F401,F403
from fwmor.gramians import (
    FWInputData,
    FWOutputData,
    RomWeightedGramians,
    fw_input_data,
    fw_output_data,
    rom_input_gramians,
    rom_output_gramians,
    standard_gramians,
)
from fwmor.io import ModelFile, read_model, write_model
from fwmor.iterative import IterationTrace, NowiData, dpowi, halevi_setup, nowi, update_interpolation
from fwmor.linalg import contragradient_balance, solve_lyapunov, solve_sylvester, spectral_factorization
from fwmor.powi import KrylovFrame, ReductionResult, input_krylov, ipowi, opowi, output_krylov
from fwmor.statespace import (
    InterpolationData,
    PoleResidueForm,
    StateSpaceModel,
    WeightedProblem,
    augment_input,
    augment_output,
    dominant_interpolation_data,
    evaluate,
    from_pole_residue,
    pole_residue,
    rss,
    validate,
    weighted_error_system,
)

__version__ = '0.1.0'
