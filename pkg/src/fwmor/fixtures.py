"""Bundled example problems.

The *illustrative* problem is a third-order plant with three inputs and two
outputs, a second-order input weight and a second-order output weight, all
with entries given to four decimals, together with reference reduced models
(printed to four decimals) for the single-shift reductions.
"""

import json
from dataclasses import dataclass
from importlib import resources

import numpy as np

from fwmor.io import loads_model
from fwmor.statespace import InterpolationData, StateSpaceModel

__all__ = ['IllustrativeProblem', 'illustrative', 'illustrative_path']

_PACKAGE = 'fwmor.data.illustrative'


def illustrative_path(name):
    """Filesystem path of a bundled illustrative file (e.g. ``'plant.json'``)."""
    return resources.files(_PACKAGE) / name


def _load(name):
    return loads_model(illustrative_path(name).read_text(encoding='utf-8')).model


@dataclass(frozen=True, eq=False)
class IllustrativeProblem:
    plant: StateSpaceModel
    input_weight: StateSpaceModel
    output_weight: StateSpaceModel
    expected: dict

    def initial_data(self):
        """The single-shift starting data: ``sigma = 1`` with all-ones directions."""
        return InterpolationData([1.0], np.ones((1, self.plant.inputs)), np.ones((1, self.plant.outputs)))

    def expected_rom(self, method):
        """Reference ``(Ar, Br, Cr)`` for ``'ipowi'``, ``'opowi'`` or ``'dpowi'``."""
        e = self.expected[method]
        return tuple(np.array(e[k], dtype=float) for k in ('A', 'B', 'C'))


def illustrative():
    """Load the illustrative problem and its reference values."""
    expected = json.loads(illustrative_path('expected.json').read_text(encoding='utf-8'))
    return IllustrativeProblem(_load('plant.json'), _load('input_weight.json'), _load('output_weight.json'),
                               expected)
