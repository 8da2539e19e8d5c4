"""
Unit tests for boundary operators, harmonic extensions and layer-potential quadrature.
"""

import unittest

import numpy as np
from numpy.testing import assert_allclose

from core.errors import DomainError, UsageError
from core.harmonics import build_grid, synthesize
from core.models import OperatorKind, Side, SpectralField, TransmissionCoefficients
from core.operators import (
    apply,
    boundary_operator,
    calderon_exterior_dtn,
    calderon_interior_dtn,
    double_layer_quadrature,
    evaluate_exterior,
    evaluate_interior,
    layer_potential_evaluate,
    operator_eigenvalue,
    point_side,
    single_layer_quadrature,
    solve_jump,
    symmetric_interior_dtn,
)

TC = TransmissionCoefficients(2.0, 1.0)


def random_field(band_limit: int, seed: int) -> SpectralField:
    rng = np.random.default_rng(seed)
    return SpectralField(band_limit, rng.standard_normal((band_limit + 1) ** 2))


class TestEigenvalues(unittest.TestCase):
    """Closed-form eigenvalues of the operators on the unit sphere."""

    def test_table_values(self):
        self.assertAlmostEqual(operator_eigenvalue(OperatorKind.V, TC, 0), 1.0)
        self.assertAlmostEqual(operator_eigenvalue(OperatorKind.V, TC, 3), 1.0 / 7.0)
        self.assertAlmostEqual(operator_eigenvalue(OperatorKind.K, TC, 1), -1.0 / 6.0)
        self.assertAlmostEqual(operator_eigenvalue(OperatorKind.KPRIME, TC, 1), -1.0 / 6.0)
        self.assertAlmostEqual(operator_eigenvalue(OperatorKind.D, TC, 2), 6.0 / 5.0)
        self.assertAlmostEqual(operator_eigenvalue(OperatorKind.S_MINUS, TC, 4), 4.0)
        self.assertAlmostEqual(operator_eigenvalue(OperatorKind.S_PLUS, TC, 4), -5.0)
        self.assertAlmostEqual(operator_eigenvalue(OperatorKind.JUMP_ALPHA_S, TC, 1), 4.0)

    def test_string_kind_accepted(self):
        self.assertAlmostEqual(operator_eigenvalue("S_plus", TC, 0), -1.0)

    def test_unknown_kind_rejected(self):
        with self.assertRaises(UsageError):
            operator_eigenvalue("W", TC, 1)
        with self.assertRaises(UsageError):
            boundary_operator("Hypersingular", TC)

    def test_array_degrees(self):
        values = operator_eigenvalue(OperatorKind.JUMP_ALPHA_S, TC, np.arange(4))
        assert_allclose(values, [1.0, 4.0, 7.0, 10.0])

    def test_calderon_identities(self):
        degrees = np.arange(33)
        for alpha_minus, alpha_plus in [(1.0, 1.0), (2.0, 1.0), (1.0, 10.0)]:
            tc = TransmissionCoefficients(alpha_minus, alpha_plus)
            s_minus = operator_eigenvalue(OperatorKind.S_MINUS, tc, degrees)
            s_plus = operator_eigenvalue(OperatorKind.S_PLUS, tc, degrees)
            jump = operator_eigenvalue(OperatorKind.JUMP_ALPHA_S, tc, degrees)
            assert_allclose(calderon_interior_dtn(degrees), s_minus, atol=1e-12)
            assert_allclose(calderon_exterior_dtn(degrees), s_plus, atol=1e-12)
            assert_allclose(symmetric_interior_dtn(degrees), s_minus, atol=1e-12)
            assert_allclose(jump, alpha_minus * s_minus - alpha_plus * s_plus, atol=1e-12)


class TestApplyAndSolve(unittest.TestCase):
    """Diagonal application and the jump solve."""

    def test_solve_inverts_apply(self):
        field = random_field(6, 1)
        jump = boundary_operator(OperatorKind.JUMP_ALPHA_S, TC)
        back = solve_jump(TC, apply(jump, field))
        assert_allclose(back.coefficients, field.coefficients, atol=1e-14)

    def test_apply_single_harmonic(self):
        result = apply(boundary_operator(OperatorKind.D, TC), SpectralField.unit(4, 3, 1))
        self.assertAlmostEqual(result[3, 1], 12.0 / 7.0)


class TestHarmonicExtension(unittest.TestCase):
    """Interior r^l and exterior r^(-l-1) extensions."""

    def test_interior_constant_at_origin(self):
        trace = SpectralField.constant(3, 0.25)
        self.assertAlmostEqual(evaluate_interior(trace, (0.0, 0.0, 0.0))[0], 0.25, places=14)

    def test_interior_degree_one(self):
        trace = SpectralField.unit(2, 1, 0)
        value = evaluate_interior(trace, (0.0, 0.0, 0.5))[0]
        self.assertAlmostEqual(value, 0.5 * np.sqrt(3.0 / (4.0 * np.pi)), places=14)

    def test_exterior_monopole(self):
        trace = SpectralField.constant(2, 1.0)
        self.assertAlmostEqual(evaluate_exterior(trace, (0.0, 2.0, 0.0))[0], 0.5, places=14)

    def test_domain_checks(self):
        trace = SpectralField.constant(1, 1.0)
        with self.assertRaises(DomainError):
            evaluate_interior(trace, (0.0, 0.0, 1.0))
        with self.assertRaises(DomainError):
            evaluate_exterior(trace, (0.0, 0.0, 0.5))
        with self.assertRaises(DomainError):
            point_side((0.6, 0.8, 0.0))

    def test_point_side(self):
        self.assertIs(point_side((0.0, 0.0, 0.2)), Side.INTERIOR)
        self.assertIs(point_side((0.0, 0.0, 5.0)), Side.EXTERIOR)


class TestLayerPotentialQuadrature(unittest.TestCase):
    """Direct quadrature of the layer potentials reproduces the spectral operators."""

    def test_single_layer_at_pole(self):
        pole = (0.0, 0.0, 1.0)
        for l in range(7):
            field = SpectralField.unit(6, l, 0)
            expected = synthesize(field, pole)[0] / (2 * l + 1)
            self.assertAlmostEqual(single_layer_quadrature(field, pole), expected, places=12)

    def test_single_and_double_layer_off_pole(self):
        field = random_field(4, 2)
        point = np.array([0.3, -0.4, np.sqrt(1.0 - 0.25)])
        v_field = apply(boundary_operator(OperatorKind.V, TC), field)
        k_field = apply(boundary_operator(OperatorKind.K, TC), field)
        self.assertAlmostEqual(single_layer_quadrature(field, point), synthesize(v_field, point)[0], places=10)
        self.assertAlmostEqual(double_layer_quadrature(field, point), synthesize(k_field, point)[0], places=10)

    def test_double_layer_of_constant(self):
        self.assertAlmostEqual(double_layer_quadrature(SpectralField.constant(0, 1.0), (1.0, 0.0, 0.0)), -0.5, places=12)

    def test_representation_formula_interior(self):
        trace = random_field(4, 3)
        points = np.array([[0.0, 0.0, 0.3], [0.2, 0.1, -0.3]])
        grid = build_grid(40)
        direct = layer_potential_evaluate(trace, points, grid, Side.INTERIOR)
        assert_allclose(direct, evaluate_interior(trace, points), atol=1e-8)

    def test_representation_formula_exterior(self):
        trace = random_field(4, 4)
        points = np.array([[0.0, 0.0, 3.0], [-2.0, 1.0, 2.0]])
        grid = build_grid(40)
        direct = layer_potential_evaluate(trace, points, grid, Side.EXTERIOR)
        assert_allclose(direct, evaluate_exterior(trace, points), atol=1e-8)


if __name__ == "__main__":
    unittest.main()
