r"""
Weighted reduction of a small MIMO plant
========================================

A third-order plant :math:`G(s)` with three inputs and two outputs is
reduced to first order with an input weight :math:`V(s)` and an output
weight :math:`W(s)` (both second order).  The data ship with the package,
together with reference values printed to four decimals.

The script walks through

- input-weighted pseudo-optimal reduction (:func:`fwmor.ipowi`) from the
  single shift :math:`\sigma = 1` with right direction :math:`[1, 1, 1]^T`,
  and checks the stationarity condition :math:`\tilde C_r \tilde P_e = C \hat P_{12}`;
- the output-weighted counterpart (:func:`fwmor.opowi`);
- the iterated two-sided method (:func:`fwmor.dpowi`), whose residuals in
  the two one-sided conditions stagnate at nonzero values;
- frequency-weighted balanced truncation (:func:`fwmor.fwbt`) for
  comparison, using the weighted H2 error as the yardstick.

Run with ``python demos/illustrative_example.py``.
"""

import numpy as np

import fwmor
from fwmor.fixtures import illustrative

np.set_printoptions(precision=4, suppress=True)

ill = illustrative()
G, V, W = ill.plant, ill.input_weight, ill.output_weight
data = ill.initial_data()

print('plant poles:', G.poles)

# %% Input-weighted pseudo-optimal reduction
res = fwmor.ipowi(G, V, data)
rg = fwmor.rom_input_gramians(res.rom, fwmor.fw_input_data(G, V))
A, B, C = ill.expected_rom('ipowi')
print('\nI-POWI')
print('  Ar =', res.rom.A.ravel(), '  (reference', A.ravel(), ')')
print('  Br =', res.rom.B.ravel(), '  (reference', B.ravel(), ')')
print('  Cr =', res.rom.C.ravel(), '  (reference', C.ravel(), ')')
print('  Cr Pe_rom  =', (res.rom.C @ rg.Pe_rom).ravel())
print('  C  P12_hat =', (G.C @ rg.P12_hat).ravel())
print('  weighted H2 error ||(G - Gr) V|| =', fwmor.weighted_h2_error(G, res.rom, V))

# %% Output-weighted pseudo-optimal reduction
res_o = fwmor.opowi(G, W, data)
A, B, C = ill.expected_rom('opowi')
print('\nO-POWI')
print('  Br =', res_o.rom.B.ravel(), '  (reference', B.ravel(), ')')
print('  Cr =', res_o.rom.C.ravel(), '  (reference', C.ravel(), ')')
print('  weighted H2 error ||W (G - Gr)|| =', fwmor.weighted_h2_error(G, res_o.rom, None, W))

# %% Two-sided iteration
two_sided = fwmor.InterpolationData([1.0], np.ones((1, 3)), np.ones((1, 2)))
res_d, trace = fwmor.dpowi(G, V, W, two_sided, tol=1e-3)
print(f'\nD-POWI: {res_d.iterations} iterations, final shift {res_d.diagnostics["final_shifts"]}')
print('  Ar =', res_d.rom.A.ravel())
print('  input-side residual  ', res_d.diagnostics['input_raw'].ravel())
print('  output-side residual ', res_d.diagnostics['output_raw'].ravel())
print('  residual trace (input side):', np.round(trace.input_residual, 4))

# %% Balanced truncation for comparison
bal = fwmor.fwbt(G, V, W, 1)
print('\nFWBT: weighted Hankel singular values', bal.sigma_bar, 'stable:', bal.stable)
for name, rom in (('I-POWI', res.rom), ('O-POWI', res_o.rom), ('D-POWI', res_d.rom), ('FWBT', bal.rom)):
    print(f'  {name:7s} two-sided weighted H2 error {fwmor.weighted_h2_error(G, rom, V, W):.4f}')
