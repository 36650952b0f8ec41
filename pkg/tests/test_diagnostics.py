import numpy as np
import pytest

from fwmor.diagnostics import (
    h2_norm,
    optimality_residuals,
    sigma_sweep,
    weighted_h2_error,
    weighted_h2_trace_expansion,
)
from fwmor.exceptions import ImproperError, UnstableSystem
from fwmor.powi import ipowi, opowi
from fwmor.statespace import InterpolationData, StateSpaceModel, augment_input, evaluate, rss
from conftest import random_data, random_problem, scalar
from oracles import quadrature_h2


def test_h2_first_order():
    assert h2_norm(scalar(-1.0)) == pytest.approx(np.sqrt(0.5), abs=1e-12)
    assert h2_norm(scalar(-1.0)) == pytest.approx(0.7071068, abs=1e-6)


def test_h2_second_order_closed_form():
    # 1 / (s^2 + 2 z w s + w^2) has squared H2 norm 1 / (4 z w^3)
    z, w = 0.3, 2.0
    G = StateSpaceModel([[0.0, 1.0], [-w * w, -2 * z * w]], [[0.0], [1.0]], [[1.0, 0.0]], [[0.0]])
    assert h2_norm(G) == pytest.approx(1 / np.sqrt(4 * z * w ** 3), rel=1e-12)


def test_h2_errors():
    with pytest.raises(ImproperError):
        h2_norm(scalar(-1.0, d=1.0))
    with pytest.raises(UnstableSystem):
        h2_norm(scalar(1.0))
    assert h2_norm(StateSpaceModel.static(np.zeros((2, 2)))) == 0.0


def test_h2_quadrature(rng):
    G = rss(5, 2, 2, rng=rng, strictly_proper=True)
    q, q2 = quadrature_h2(lambda s: evaluate(G, s))
    assert abs(q - q2) <= 1e-6 * q
    assert h2_norm(G) == pytest.approx(q, rel=1e-4)


def test_weighted_error_quadrature(rng):
    for _ in range(3):
        G, V, W = random_problem(rng, n=6)
        Gr = ipowi(G, V, random_data(rng, 2, 2, 2)).rom
        fun = lambda s: evaluate(W, s) @ (evaluate(G, s) - evaluate(Gr, s)) @ evaluate(V, s)
        q, _ = quadrature_h2(fun)
        assert weighted_h2_error(G, Gr, V, W) == pytest.approx(q, rel=1e-4)


def test_weighted_error_zero_for_same_model(ill):
    assert weighted_h2_error(ill.plant, ill.plant, ill.input_weight, ill.output_weight) == 0.0


def test_trace_expansion(rng):
    for _ in range(5):
        G, V, W = random_problem(rng, n=7)
        Gr = rss(3, 2, 2, rng=rng)
        Gr = StateSpaceModel(Gr.A, Gr.B, Gr.C, G.D)
        for v, w in ((V, None), (None, W), (None, None)):
            a = weighted_h2_trace_expansion(G, Gr, v, w)
            b = weighted_h2_error(G, Gr, v, w)
            assert a == pytest.approx(b, rel=1e-8)
    with pytest.raises(ValueError):
        weighted_h2_trace_expansion(G, Gr, V, W)


def test_pythagoras_and_monotone_decay(rng):
    for _ in range(5):
        G = rss(8, 2, 2, rng=rng, strictly_proper=True)
        V = rss(2, 2, 2, rng=rng, pole_range=(0.3, 5.0))
        d = random_data(rng, 6, 2, 2)
        full = h2_norm(augment_input(G, V)) ** 2
        errs = []
        for k in (2, 4, 6):
            dk = InterpolationData(d.shifts[:k], d.right[:k], None)
            Gr = ipowi(G, V, dk).rom
            e = weighted_h2_error(G, Gr, V, None)
            errs.append(e)
            assert e ** 2 == pytest.approx(full - h2_norm(augment_input(Gr, V)) ** 2, rel=1e-8, abs=1e-12 * full)
        assert errs[1] <= errs[0] + 1e-10 and errs[2] <= errs[1] + 1e-10


def test_sigma_sweep_first_order():
    sw = sigma_sweep(scalar(-1.0), 1e-3, 1e3, 50)
    assert sw.frequencies.size >= 50
    np.testing.assert_allclose(sw.max_singular_values, 1 / np.sqrt(1 + sw.frequencies ** 2), rtol=1e-12)
    assert sw.hinf_estimate == pytest.approx(1.0, rel=1e-6)


def test_sigma_sweep_resonance_refined():
    z, w = 0.05, 3.0
    G = StateSpaceModel([[0.0, 1.0], [-w * w, -2 * z * w]], [[0.0], [w * w]], [[1.0, 0.0]], [[0.0]])
    exact = 1 / (2 * z * np.sqrt(1 - z * z))
    coarse = sigma_sweep(G, 1e-2, 1e2, 40, refine=False)
    fine = sigma_sweep(G, 1e-2, 1e2, 40, refine=True)
    assert coarse.hinf_estimate <= fine.hinf_estimate <= exact * (1 + 1e-9)
    assert fine.hinf_estimate == pytest.approx(exact, rel=1e-6)
    assert fine.peak_frequency == pytest.approx(w * np.sqrt(1 - 2 * z * z), rel=1e-4)


def test_sigma_sweep_callable_and_errors():
    sw = sigma_sweep(lambda s: np.array([[1 / (s + 2)]]), 1e-2, 1e2, 20, refine=False)
    assert sw.hinf_estimate == pytest.approx(0.5, rel=1e-3)
    with pytest.raises(ValueError):
        sigma_sweep(scalar(-1.0), 1.0, 0.5)


def test_optimality_residual_sides(ill):
    G, V, W = ill.plant, ill.input_weight, ill.output_weight
    rom = opowi(G, W, ill.initial_data()).rom
    r = optimality_residuals(G, rom, None, W)
    assert set(r) == {'output_raw', 'output', 'output_relative'}
    assert r['output_relative'] <= 1e-12
    both = optimality_residuals(G, rom, V, W, sides=('input', 'output'))
    assert both['input_raw'].shape == (2, 1) and both['output_raw'].shape == (1, 3)
