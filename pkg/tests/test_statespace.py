import numpy as np
import pytest

from fwmor.exceptions import (
    DimensionMismatch,
    ImproperError,
    NonFinite,
    RepeatedPoles,
    SingularPencil,
    UnstableSystem,
    ValidationError,
)
from fwmor.powi import ipowi
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
from conftest import scalar
from oracles import transfer

PROBES = [0.3j, 1 + 2j, 10.0]


def rel_close(X, Y, rtol):
    return np.linalg.norm(X - Y) <= rtol * max(np.linalg.norm(Y), 1e-300)


class TestModel:
    def test_dimension_checks(self):
        with pytest.raises(DimensionMismatch):
            StateSpaceModel(np.eye(2), np.ones((3, 1)), np.ones((1, 2)), [[0.0]])
        with pytest.raises(DimensionMismatch):
            StateSpaceModel(np.ones((2, 3)), np.ones((2, 1)), np.ones((1, 2)), [[0.0]])
        with pytest.raises(NonFinite):
            StateSpaceModel([[np.inf]], [[1.0]], [[1.0]], [[0.0]])

    def test_static_gain(self):
        G = StateSpaceModel.static([[1.0, 2.0]])
        assert (G.order, G.inputs, G.outputs) == (0, 2, 1)
        np.testing.assert_array_equal(evaluate(G, 1j), [[1, 2]])
        assert validate(G).is_stable

    def test_immutable(self):
        G = scalar(-1.0)
        with pytest.raises(ValueError):
            G.A[0, 0] = 2.0

    def test_transpose(self, rng):
        G = rss(4, 2, 3, rng=rng)
        np.testing.assert_allclose(evaluate(G.transpose(), 1 + 1j), evaluate(G, 1 + 1j).T)


class TestValidate:
    def test_scalar(self):
        rep = validate(scalar(-1.0))
        assert rep.is_stable and rep.spectral_abscissa == -1

    def test_companion(self):
        rep = validate(StateSpaceModel([[0, 1], [-2, -3]], [[0], [1]], [[1, 0]], [[0]]))
        assert rep.is_stable
        assert abs(rep.spectral_abscissa + 1) < 1e-12

    def test_illustrative_plant(self, ill):
        rep = validate(ill.plant)
        assert rep.is_stable
        assert rep.spectral_abscissa == pytest.approx(np.max(np.linalg.eigvals(ill.plant.A).real))

    def test_weighted_problem(self, ill):
        WeightedProblem(ill.plant, ill.input_weight, ill.output_weight)
        with pytest.raises(DimensionMismatch):
            WeightedProblem(ill.plant, ill.output_weight, None)
        with pytest.raises(UnstableSystem):
            WeightedProblem(scalar(1.0))


class TestEvaluate:
    def test_first_order(self):
        G = scalar(-1.0)
        assert evaluate(G, 0)[0, 0] == pytest.approx(1)
        assert evaluate(G, 1j)[0, 0] == pytest.approx(0.5 - 0.5j)

    def test_dense_inverse(self, rng):
        G = rss(6, 2, 3, rng=rng)
        s = 2 + 3j
        assert rel_close(evaluate(G, s), transfer(G.A, G.B, G.C, G.D, s), 1e-12)

    def test_singular(self):
        with pytest.raises(SingularPencil):
            evaluate(scalar(-1.0), -1.0)


class TestAugment:
    def test_identity_weights(self, ill):
        G = ill.plant
        I3, I2 = StateSpaceModel.identity(3), StateSpaceModel.identity(2)
        for H in (augment_input(G, I3), augment_output(I2, G), augment_input(G, None), augment_output(None, G)):
            for M in 'ABCD':
                np.testing.assert_array_equal(getattr(H, M), getattr(G, M))

    def test_illustrative_dimensions(self, ill):
        assert augment_input(ill.plant, ill.input_weight).order == 5
        assert augment_output(ill.output_weight, ill.plant).order == 5

    def test_block_structure(self, ill):
        G, V, W = ill.plant, ill.input_weight, ill.output_weight
        Hi = augment_input(G, V)
        np.testing.assert_array_equal(Hi.A[:3, 3:], G.B @ V.C)
        np.testing.assert_array_equal(Hi.A[3:, :3], 0)
        np.testing.assert_array_equal(Hi.B, np.vstack([G.B @ V.D, V.B]))
        np.testing.assert_array_equal(Hi.C, np.hstack([G.C, G.D @ V.C]))
        Ho = augment_output(W, G)
        np.testing.assert_array_equal(Ho.A[3:, :3], W.B @ G.C)
        np.testing.assert_array_equal(Ho.A[:3, 3:], 0)
        np.testing.assert_array_equal(Ho.C, np.hstack([W.D @ G.C, W.C]))

    def test_pointwise_products(self, rng):
        for _ in range(5):
            G = rss(5, 2, 3, rng=rng)
            V = rss(3, 3, 3, rng=rng)
            W = rss(2, 2, 2, rng=rng)
            Hi, Ho = augment_input(G, V), augment_output(W, G)
            for s in list(PROBES) + list(rng.standard_normal(7) + 1j * rng.standard_normal(7)):
                assert rel_close(evaluate(Hi, s), evaluate(G, s) @ evaluate(V, s), 1e-10)
                assert rel_close(evaluate(Ho, s), evaluate(W, s) @ evaluate(G, s), 1e-10)

    def test_dimension_mismatch(self, ill):
        with pytest.raises(DimensionMismatch):
            augment_input(ill.plant, ill.output_weight)


class TestWeightedError:
    def test_self_difference_is_zero(self, ill):
        G = ill.plant
        E = weighted_error_system(G, G, ill.input_weight, ill.output_weight)
        assert np.array_equal(E.D, np.zeros_like(E.D))
        for s in PROBES:
            assert np.max(np.abs(evaluate(E, s))) <= 1e-12

    def test_unweighted_block_diagonal(self, rng):
        G, Gr = rss(4, 2, 2, rng=rng), rss(2, 2, 2, rng=rng)
        Gr = StateSpaceModel(Gr.A, Gr.B, Gr.C, G.D)
        E = weighted_error_system(G, Gr)
        np.testing.assert_array_equal(E.A[:4, 4:], 0)
        np.testing.assert_array_equal(E.A[4:, :4], 0)
        assert rel_close(evaluate(E, 1j), evaluate(G, 1j) - evaluate(Gr, 1j), 1e-12)

    def test_illustrative_ipowi_error(self, ill):
        G, V = ill.plant, ill.input_weight
        Gr = ipowi(G, V, ill.initial_data()).rom
        E = weighted_error_system(G, Gr, V)
        s = 1 + 1j
        expected = (evaluate(G, s) - evaluate(Gr, s)) @ evaluate(V, s)
        assert rel_close(evaluate(E, s), expected, 1e-10)

    def test_improper(self, rng):
        G, Gr = rss(3, 1, 1, rng=rng), rss(2, 1, 1, rng=rng)
        Gr = StateSpaceModel(Gr.A, Gr.B, Gr.C, G.D + 1)
        with pytest.raises(ImproperError):
            weighted_error_system(G, Gr)

    def test_weight_kills_feedthrough(self, rng):
        G = rss(3, 1, 1, rng=rng)
        Gr = StateSpaceModel([[-1.0]], [[1.0]], [[1.0]], G.D + 1)
        V = StateSpaceModel([[-2.0]], [[1.0]], [[1.0]], [[0.0]])
        E = weighted_error_system(G, Gr, V)
        assert np.array_equal(E.D, [[0.0]])


class TestPoleResidue:
    def test_first_order(self):
        prf = pole_residue(scalar(-1.0))
        assert prf.poles[0] == -1
        assert prf.c[0, 0] * prf.b[0, 0] == pytest.approx(1)

    def test_illustrative_ipowi_rom(self, ill):
        rom = ipowi(ill.plant, ill.input_weight, ill.initial_data()).rom
        prf = pole_residue(rom)
        np.testing.assert_allclose(prf.poles, [-1.0], atol=1e-12)
        np.testing.assert_allclose(np.outer(prf.c[0], prf.b[0]), rom.C @ rom.B, atol=1e-12)

    def test_reconstruction(self, rng):
        G = rss(5, 1, 1, rng=rng)
        prf = pole_residue(G)
        for s in rng.standard_normal(5) + 1j * rng.standard_normal(5):
            assert rel_close(prf(s), evaluate(G, s), 1e-8)

    def test_round_trip(self, rng):
        for _ in range(5):
            G = rss(6, 2, 3, rng=rng)
            H = from_pole_residue(pole_residue(G))
            assert H.order == 6
            assert np.all(np.isreal(H.A))
            for s in PROBES:
                assert rel_close(evaluate(H, s), evaluate(G, s), 1e-8)

    def test_repeated(self):
        with pytest.raises(RepeatedPoles):
            pole_residue(StateSpaceModel(-np.eye(2), np.eye(2), np.eye(2), np.zeros((2, 2))))

    def test_conjugate_closure_required(self):
        prf = PoleResidueForm(np.array([-1 + 1j]), np.ones((1, 1)), np.ones((1, 1)), np.zeros((1, 1)))
        with pytest.raises(ValidationError):
            from_pole_residue(prf)


class TestInterpolationData:
    def test_conjugate_closure_enforced(self):
        with pytest.raises(ValidationError):
            InterpolationData([1 + 1j])
        with pytest.raises(ValidationError):
            InterpolationData([1 + 1j, 1 - 1j], [[1.0], [2.0]])
        d = InterpolationData.closed([1 + 1j, 2.0], [[1j], [1.0]])
        assert len(d) == 3
        assert [g for g in d.real_groups()] == [(0, 2), (1,)]

    def test_complex_direction_on_real_shift(self):
        with pytest.raises(ValidationError):
            InterpolationData([1.0], [[1j]])


class TestDominant:
    def test_single_pole(self):
        d = dominant_interpolation_data(scalar(-1.0), 1)
        np.testing.assert_allclose(d.shifts, [1.0])

    def test_obvious_dominance(self):
        G = StateSpaceModel(np.diag([-1.0, -2.0]), [[1.0], [1.0]], [[10.0, 0.1]], [[0.0]])
        d = dominant_interpolation_data(G, 1)
        np.testing.assert_allclose(d.shifts, [1.0])
        assert d.right[0, 0] * d.left[0, 0] == pytest.approx(10)

    def test_exhaustive_ranking(self, rng):
        G = rss(8, 1, 1, rng=rng, complex_fraction=0.0)
        d = dominant_interpolation_data(G, 3)
        prf = pole_residue(G)
        idx = np.abs(prf.c[:, 0]) * np.abs(prf.b[:, 0]) / np.abs(prf.poles.real)
        best = np.sort(-prf.poles[np.argsort(-idx)[:3]].real)
        np.testing.assert_allclose(np.sort(d.shifts.real), best, rtol=1e-12)

    def test_conjugate_closed_and_rhp(self, rng):
        for _ in range(5):
            G = rss(8, 2, 2, rng=rng)
            d = dominant_interpolation_data(G, 3)
            assert len(d) in (3, 4)
            assert np.all(d.shifts.real > 0)
            assert np.allclose(np.sort_complex(d.shifts), np.sort_complex(d.shifts.conj()))
