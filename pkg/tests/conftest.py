import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from fwmor.fixtures import illustrative  # noqa: E402
from fwmor.statespace import InterpolationData, StateSpaceModel, rss  # noqa: E402


@pytest.fixture(scope='session')
def ill():
    return illustrative()


@pytest.fixture
def rng():
    return np.random.default_rng(20240521)


def random_problem(rng, n=6, nv=2, nw=2, m=2, p=2):
    """Random stable plant with random stable input and output weights."""
    G = rss(n, p, m, rng=rng)
    V = rss(nv, m, m, rng=rng, pole_range=(0.3, 5.0)) if nv is not None else None
    W = rss(nw, p, p, rng=rng, pole_range=(0.3, 5.0)) if nw is not None else None
    return G, V, W


def random_data(rng, k, m=None, p=None, complex_pairs=0):
    """``k`` real shifts plus ``complex_pairs`` conjugate pairs, all in the right half-plane."""
    s = list(np.sort(rng.uniform(0.2, 5.0, k)))
    for _ in range(complex_pairs):
        z = complex(rng.uniform(0.2, 3.0), rng.uniform(0.5, 4.0))
        s += [z, z.conjugate()]
    s = np.array(s, dtype=complex)
    right = left = None
    if m is not None:
        right = _directions(rng, s, m)
    if p is not None:
        left = _directions(rng, s, p)
    return InterpolationData(s, right, left)


def _directions(rng, s, width):
    out = np.zeros((s.size, width), dtype=complex)
    done = set()
    for i, z in enumerate(s):
        if i in done:
            continue
        if z.imag == 0:
            out[i] = rng.standard_normal(width)
        else:
            j = next(j for j in range(s.size) if j not in done and j != i and s[j] == z.conjugate())
            d = rng.standard_normal(width) + 1j * rng.standard_normal(width)
            out[i], out[j] = d, d.conjugate()
            done.add(j)
        done.add(i)
    return out


def scalar(a, b=1.0, c=1.0, d=0.0):
    return StateSpaceModel([[a]], [[b]], [[c]], [[d]])


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get('test_acceptance')
    results = getattr(mod, 'RESULTS', None)
    if results:
        terminalreporter.section('acceptance criteria')
        for k in sorted(results):
            terminalreporter.write_line(results[k])
