"""Command-line interface: ``fwmor reduce`` and ``fwmor analyze``.

Exit status: 0 on success, 2 on usage or validation errors, 3 on numerical
failures.  Errors are reported on stderr as one JSON line
``{"error": <kind>, "reason": <message>}``.
"""

import argparse
import csv
import json
import sys
import time
import warnings
from contextlib import contextmanager
from pathlib import Path

import numpy as np

from fwmor.balancing import approx_fwbt, fwbt
from fwmor.diagnostics import optimality_residuals, sigma_sweep, weighted_h2_error
from fwmor.exceptions import FwmorError, NoConvergence, NotPositiveDefinite, NumericalError, ValidationError
from fwmor.io import read_model, write_model
from fwmor.iterative import dpowi, nowi
from fwmor.powi import ipowi, opowi
from fwmor.statespace import (
    InterpolationData,
    WeightedProblem,
    dominant_interpolation_data,
    evaluate,
    validate,
)

__all__ = ['main', 'parse_complex', 'parse_shifts', 'parse_directions']

METHODS = ('ipowi', 'opowi', 'dpowi', 'nowi', 'fwbt', 'afwbt', 'bt')
EXIT_OK, EXIT_VALIDATION, EXIT_NUMERICAL = 0, 2, 3


class UsageError(ValidationError):
    """Invalid command-line usage."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def parse_complex(token):
    """Parse ``a``, ``bi``, ``a+bi`` or ``a-bi`` (``j`` is accepted for ``i``)."""
    t = token.strip().replace(' ', '').replace('I', 'i').replace('J', 'j').replace('i', 'j')
    if not t:
        raise UsageError('empty complex literal')
    if t.endswith('j') and (len(t) == 1 or t[-2] in '+-'):
        t = t[:-1] + '1j'
    try:
        return complex(t)
    except ValueError:
        raise UsageError(f'cannot parse complex number {token!r}') from None


def parse_shifts(text):
    """Comma-separated complex literals."""
    return np.array([parse_complex(t) for t in text.split(',') if t.strip()])


def parse_directions(text, k, width, what):
    """``;``-separated direction vectors, each comma-separated; one per shift.

    A single vector is reused for every shift.
    """
    rows = [[parse_complex(t) for t in part.split(',') if t.strip()] for part in text.split(';') if part.strip()]
    if len(rows) == 1 and k > 1:
        rows = rows * k
    if len(rows) != k:
        raise UsageError(f'{what}: got {len(rows)} direction vectors for {k} shifts')
    for r in rows:
        if len(r) != width:
            raise UsageError(f'{what}: direction of length {len(r)}, expected {width}')
    return np.array(rows)


def _build_parser():
    p = _Parser(prog='fwmor', description='Frequency-weighted H2 model order reduction.')
    sub = p.add_subparsers(dest='command', required=True)

    r = sub.add_parser('reduce', help='reduce a model')
    r.add_argument('--model', required=True)
    r.add_argument('--input-weight')
    r.add_argument('--output-weight')
    r.add_argument('--method', required=True, choices=METHODS)
    r.add_argument('--order', type=int)
    src = r.add_mutually_exclusive_group()
    src.add_argument('--shifts', help='comma-separated complex shifts, e.g. "1,2+3i"')
    src.add_argument('--init', choices=['dominant'], help='mirror images of dominant plant poles')
    r.add_argument('--rdirs', help='right directions: "1,1,1" or "1,0;0,1" (one per shift)')
    r.add_argument('--ldirs', help='left directions, same format')
    r.add_argument('--tol', type=float, default=1e-6)
    r.add_argument('--max-iter', type=int, default=100)
    r.add_argument('--seed', type=int, default=0, help='seed for random default directions')
    r.add_argument('--out', required=True)
    r.add_argument('--report', required=True)

    a = sub.add_parser('analyze', help='compare a model with a reduced model')
    a.add_argument('--model', required=True)
    a.add_argument('--rom', required=True)
    a.add_argument('--input-weight')
    a.add_argument('--output-weight')
    a.add_argument('--fmin', type=float, default=1e-3)
    a.add_argument('--fmax', type=float, default=1e3)
    a.add_argument('--points', type=int, default=400)
    a.add_argument('--report', required=True)
    a.add_argument('--sweep', required=True)
    return p


def _read(path, what):
    if path is None:
        return None
    if not Path(path).is_file():
        raise UsageError(f'{what} file not found: {path}')
    return read_model(path).model


class _Timer:
    def __init__(self):
        self.timings = {}

    @contextmanager
    def phase(self, name):
        t0 = time.perf_counter()
        try:
            yield
        finally:
            self.timings[name] = time.perf_counter() - t0


def _complex_list(z):
    return [[float(np.real(x)), float(np.imag(x))] for x in np.asarray(z).ravel()]


def _matrix_list(X):
    return np.asarray(X, dtype=float).tolist()


def _interpolation_data(args, G, notices, right=True, left=True):
    """Shifts and directions from the command line (or dominant poles of the plant)."""
    if args.init == 'dominant':
        if args.order is None:
            raise UsageError('--init dominant needs --order')
        data = dominant_interpolation_data(G, args.order)
        if len(data) != args.order:
            notices.append(f'dominant selection closed a conjugate pair: {len(data)} shifts for order {args.order}')
        return data
    if args.shifts is None:
        raise UsageError('give --shifts or --init dominant')
    s = parse_shifts(args.shifts)
    rng = np.random.default_rng(args.seed)

    def dirs(text, width, what, needed):
        if not needed:
            return None
        if text is None:
            notices.append(f'{what}: no directions given, using seeded random real directions')
            return rng.standard_normal((s.size, width))
        return parse_directions(text, s.size, width, what)

    data = InterpolationData.closed(s, dirs(args.rdirs, G.inputs, 'right directions', right),
                                    dirs(args.ldirs, G.outputs, 'left directions', left))
    if len(data) != s.size:
        notices.append(f'added {len(data) - s.size} conjugate shift(s) to close the set under conjugation')
    return data


def _check_order(args, data):
    if args.order is not None and args.order != len(data) and args.init is None:
        raise UsageError(f'--order {args.order} does not match the {len(data)} (conjugate-closed) shifts')


def _balanced(G, V, W, r, notices):
    """Contragradient balancing, or square-root balancing if a Gramian is only semidefinite."""
    try:
        return fwbt(G, V, W, r)
    except NotPositiveDefinite as exc:
        notices.append(f'{exc}; used square-root balancing on rank-revealing Gramian factors')
        return fwbt(G, V, W, r, method='square-root')


def cmd_reduce(args):
    timer = _Timer()
    notices = []
    with timer.phase('read'):
        G = _read(args.model, 'model')
        V = _read(args.input_weight, 'weight')
        W = _read(args.output_weight, 'weight')
        WeightedProblem(G, V, W)
    m = args.method
    report = {'method': m}
    trace = None
    with timer.phase('reduce'):
        if m in ('ipowi', 'opowi', 'dpowi', 'nowi'):
            if m == 'dpowi' and (V is None or W is None):
                raise UsageError('dpowi needs both --input-weight and --output-weight')
            if m == 'nowi' and W is not None:
                raise UsageError('nowi is input-weighted only; drop --output-weight')
            if m == 'ipowi' and W is not None or m == 'opowi' and V is not None:
                raise UsageError(f'{m} is one-sided; use dpowi for two-sided weighting')
            if m in ('ipowi', 'opowi') and (V if m == 'ipowi' else W) is None:
                notices.append('no weight given: unweighted pseudo-optimal reduction')
            data = _interpolation_data(args, G, notices, right=m != 'opowi', left=m != 'ipowi')
            _check_order(args, data)
            report['shifts'] = _complex_list(data.shifts)
            with warnings.catch_warnings(record=True) as caught:
                warnings.simplefilter('always', NoConvergence)
                if m == 'ipowi':
                    res = ipowi(G, V, data)
                elif m == 'opowi':
                    res = opowi(G, W, data)
                elif m == 'dpowi':
                    res, trace = dpowi(G, V, W, data, tol=args.tol, max_iter=args.max_iter)
                else:
                    res, trace = nowi(G, V, data, tol=args.tol, max_iter=args.max_iter)
            notices.extend(str(w.message) for w in caught if issubclass(w.category, NoConvergence))
            rom = res.rom
            report['iterations'] = res.iterations
            report['converged'] = res.converged
            if m == 'nowi':
                report['interpolation_deviation'] = res.diagnostics['interpolation_deviation']
        else:
            if args.order is None:
                raise UsageError(f'{m} needs --order')
            if m == 'bt':
                if V is not None or W is not None:
                    raise UsageError('bt ignores weights; use fwbt')
                br = _balanced(G, None, None, args.order, notices)
            elif m == 'fwbt':
                br = _balanced(G, V, W, args.order, notices)
            else:
                data = _interpolation_data(args, G, notices)
                report['shifts'] = _complex_list(data.shifts)
                Zp = ipowi(G, V, data).approx_gramian_factor
                Zq = opowi(G, W, data).approx_gramian_factor
                br = approx_fwbt(G, Zp, Zq, args.order)
            rom = br.rom
            report['hankel_singular_values'] = [float(x) for x in br.sigma_bar]
    with timer.phase('diagnostics'):
        report['order'] = rom.order
        report['rom_poles'] = _complex_list(np.sort_complex(np.linalg.eigvals(rom.A)))
        report['stable'] = bool(validate(rom).is_stable)
        if trace is not None:
            report['trace'] = trace.as_dict()
        report.update(_error_report(G, rom, V, W, m))
    report['notices'] = notices
    report['timings'] = timer.timings
    write_model(args.out, rom, name=f'{m} reduced model of order {rom.order}')
    _write_json(args.report, report)
    for n in notices:
        print(f'notice: {n}', file=sys.stderr)
    return EXIT_OK


def _error_report(G, rom, V, W, method):
    out = {}
    if not validate(rom).is_stable:
        out['weighted_h2_error'] = None
        out['h2_error'] = None
        return out
    sides = []
    if method in ('ipowi', 'nowi', 'dpowi') or V is not None:
        sides.append('input')
    if method in ('opowi', 'dpowi') or W is not None:
        sides.append('output')
    if np.array_equal(rom.D, G.D) and sides:
        res = optimality_residuals(G, rom, V, W, sides=sides)
        out['optimality_residuals'] = {
            k: (_matrix_list(v) if isinstance(v, np.ndarray) else v) for k, v in sorted(res.items())}
    try:
        out['weighted_h2_error'] = weighted_h2_error(G, rom, V, W)
    except FwmorError:
        out['weighted_h2_error'] = None
    try:
        out['h2_error'] = weighted_h2_error(G, rom)
    except FwmorError:
        out['h2_error'] = None
    return out


def _write_json(path, obj):
    Path(path).write_text(json.dumps(obj, indent=2, sort_keys=True) + '\n', encoding='utf-8')


def cmd_analyze(args):
    G = _read(args.model, 'model')
    Gr = _read(args.rom, 'rom')
    V = _read(args.input_weight, 'weight')
    W = _read(args.output_weight, 'weight')
    WeightedProblem(G, V, W)
    if (Gr.inputs, Gr.outputs) != (G.inputs, G.outputs):
        raise UsageError('model and rom have different input/output dimensions')

    def error(s):
        E = evaluate(G, s) - evaluate(Gr, s)
        if V is not None:
            E = E @ evaluate(V, s)
        if W is not None:
            E = evaluate(W, s) @ E
        return E

    sw = sigma_sweep(error, args.fmin, args.fmax, args.points)
    report = {
        'rom_order': Gr.order,
        'rom_stable': bool(validate(Gr).is_stable),
        'hinf_estimate': sw.hinf_estimate,
        'hinf_estimate_kind': 'estimate (lower bound): maximum over a frequency sweep with local refinement',
        'peak_frequency': sw.peak_frequency,
        'weighted': V is not None or W is not None,
    }
    try:
        report['weighted_h2_error'] = weighted_h2_error(G, Gr, V, W)
    except FwmorError as exc:
        report['weighted_h2_error'] = None
        report['weighted_h2_error_reason'] = str(exc)
    try:
        report['h2_error'] = weighted_h2_error(G, Gr)
    except FwmorError as exc:
        report['h2_error'] = None
        report['h2_error_reason'] = str(exc)
    if V is not None or W is not None:
        # closed-loop margin check: the weighted error must stay below one
        report['margin_ok'] = bool(sw.hinf_estimate < 1)
    _write_json(args.report, report)
    with open(args.sweep, 'w', newline='', encoding='utf-8') as fh:
        wr = csv.writer(fh, lineterminator='\n')
        wr.writerow(['omega', 'sigma_max'])
        for w, s in zip(sw.frequencies, sw.max_singular_values):
            wr.writerow(['%.9e' % w, '%.9e' % s])
    return EXIT_OK


def _fail(kind, reason, code):
    print(json.dumps({'error': kind, 'reason': ' '.join(str(reason).split())}), file=sys.stderr)
    return code


def main(argv=None):
    """Entry point; returns the exit status."""
    try:
        args = _build_parser().parse_args(argv)
        if args.command == 'reduce':
            return cmd_reduce(args)
        return cmd_analyze(args)
    except ValidationError as exc:
        return _fail(type(exc).__name__, exc, EXIT_VALIDATION)
    except NumericalError as exc:
        return _fail(type(exc).__name__, exc, EXIT_NUMERICAL)
    except np.linalg.LinAlgError as exc:
        return _fail('LinAlgError', exc, EXIT_NUMERICAL)
    except (OSError, ValueError) as exc:
        return _fail(type(exc).__name__, exc, EXIT_VALIDATION)


if __name__ == '__main__':
    sys.exit(main())
