"""JSON model files.

A model file is a JSON object::

    {"schema_version": "1", "name": "...", "A": [[...]], "B": [[...]],
     "C": [[...]], "D": [[...]]}

Matrices are row-major lists of rows.  An empty list stands for a matrix
with no rows; its column count is inferred from the other matrices.
Numbers are written with 17 significant digits so that a write/read cycle
is lossless.
"""

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from fwmor.exceptions import ParseError, SchemaError, ValidationError
from fwmor.statespace import StateSpaceModel

__all__ = ['ModelFile', 'SCHEMA_VERSION', 'read_model', 'write_model', 'loads_model', 'dumps_model']

SCHEMA_VERSION = '1'
_FIELDS = ('schema_version', 'name', 'A', 'B', 'C', 'D')


@dataclass(frozen=True, eq=False)
class ModelFile:
    """A named model as stored on disk."""

    name: str
    model: StateSpaceModel
    schema_version: str = SCHEMA_VERSION


def _reject_constant(token):
    raise ParseError(f'non-finite number {token!r} is not allowed')


def _matrix(key, value):
    if not isinstance(value, list):
        raise ParseError(f'field {key!r} must be a list of rows')
    if not value:
        return np.zeros((0, 0))
    width = None
    for i, row in enumerate(value):
        if not isinstance(row, list):
            raise ParseError(f'field {key!r}: row {i} is not a list')
        if width is None:
            width = len(row)
        elif len(row) != width:
            raise ParseError(f'field {key!r}: row {i} has {len(row)} entries, expected {width} (ragged array)')
        for j, x in enumerate(row):
            if isinstance(x, bool) or not isinstance(x, (int, float)):
                raise ParseError(f'field {key!r}: entry ({i}, {j}) is not a number')
            if not math.isfinite(x):
                raise ParseError(f'field {key!r}: entry ({i}, {j}) is not finite')
    return np.array(value, dtype=float).reshape(len(value), width)


def _fit(X, rows, cols):
    """Resolve an empty matrix to ``(rows, cols)``; leave others unchanged."""
    if X.size == 0 and X.shape[0] in (0, rows):
        return np.zeros((rows, cols))
    return X


def loads_model(text):
    """Parse a model file from a string."""
    try:
        obj = json.loads(text, parse_constant=_reject_constant)
    except json.JSONDecodeError as exc:
        raise ParseError(f'invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}') from exc
    if not isinstance(obj, dict):
        raise ParseError('model file must contain a JSON object')
    unknown = sorted(set(obj) - set(_FIELDS))
    if unknown:
        hint = ' (descriptor systems are not supported)' if 'E' in unknown else ''
        raise SchemaError(f'unknown field(s) {", ".join(map(repr, unknown))}{hint}')
    missing = [k for k in _FIELDS if k not in obj and k != 'name']
    if missing:
        raise SchemaError(f'missing field(s) {", ".join(map(repr, missing))}')
    version = obj['schema_version']
    if version != SCHEMA_VERSION:
        raise SchemaError(f'unsupported schema_version {version!r} (supported: {SCHEMA_VERSION!r})')
    name = obj.get('name', '')
    if not isinstance(name, str):
        raise ParseError("field 'name' must be a string")
    A, B, C, D = (_matrix(k, obj[k]) for k in 'ABCD')
    n = A.shape[0]
    if D.size == 0:
        p = C.shape[0]
        m = B.shape[1] if B.size else 0
        D = np.zeros((p, m))
    p, m = D.shape
    A = _fit(A, n, n)
    B = _fit(B, n, m)
    C = _fit(C, p, n)
    try:
        model = StateSpaceModel(A, B, C, D)
    except ValidationError as exc:
        raise ParseError(f'inconsistent dimensions: {exc}') from exc
    return ModelFile(name, model, version)


def read_model(path):
    """Read a :class:`ModelFile` from ``path``."""
    text = Path(path).read_text(encoding='utf-8')
    return loads_model(text)


def _format_matrix(X, indent):
    if X.shape[0] == 0:
        return '[]'
    rows = ['[' + ', '.join('%.17g' % x for x in row) + ']' for row in X]
    pad = ' ' * indent
    return '[\n' + ',\n'.join(pad + '  ' + r for r in rows) + '\n' + pad + ']'


def dumps_model(model, name=''):
    """Serialize a model in the canonical file layout."""
    if isinstance(model, ModelFile):
        name, model = model.name, model.model
    parts = [f'  "schema_version": {json.dumps(SCHEMA_VERSION)}', f'  "name": {json.dumps(name)}']
    for key in 'ABCD':
        parts.append(f'  "{key}": {_format_matrix(getattr(model, key), 2)}')
    return '{\n' + ',\n'.join(parts) + '\n}\n'


def write_model(path, model, name=''):
    """Write ``model`` to ``path`` in the canonical layout."""
    Path(path).write_text(dumps_model(model, name), encoding='utf-8')
