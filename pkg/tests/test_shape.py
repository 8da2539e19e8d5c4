"""
Unit tests for the shape-derivative jump data, trace solve and evaluation.
"""

import unittest
from unittest import mock

import numpy as np
from numpy.testing import assert_allclose

from core.benchmarks import example1_nominal_trace, example2_nominal_trace
from core.errors import DomainError, InvariantViolation
from core.harmonics import build_grid, surface_gradient, synthesize
from core.models import (
    Example1Config,
    NominalTraceData,
    OperatorKind,
    SpectralField,
    TangentField,
    TransmissionCoefficients,
)
from core.operators import apply, boundary_operator
from core.shape import (
    build_dirichlet_jump,
    build_neumann_jump,
    dirichlet_jump_diagnostic,
    evaluate,
    neumann_jump_diagnostic,
    shape_derivative,
    solve_trace,
)

TC = TransmissionCoefficients(2.0, 1.0)
ONE = SpectralField.constant(0, 1.0)


class TestJumpData(unittest.TestCase):
    """Dirichlet and Neumann jump builders."""

    def test_example1_dirichlet_jump_is_constant(self):
        nominal = example1_nominal_trace(Example1Config(TC, 0.1), 4)
        g_dirichlet = build_dirichlet_jump(nominal, ONE)
        self.assertAlmostEqual(g_dirichlet[0, 0], np.sqrt(4.0 * np.pi) / 210.0, places=15)
        self.assertLess(np.max(np.abs(g_dirichlet.coefficients[1:])), 1e-14)

    def test_radial_nominal_has_no_neumann_jump(self):
        nominal = example2_nominal_trace(TC, 8)
        g_neumann = build_neumann_jump(nominal, ONE)
        self.assertEqual(np.max(np.abs(g_neumann.coefficients)), 0.0)

    def test_neumann_jump_from_tangential_gradient(self):
        grid = build_grid(4)
        nominal = NominalTraceData(
            jump_normal_derivative=SpectralField.zeros(4),
            jump_tangential_gradient=surface_gradient(SpectralField.unit(4, 1, 0), grid),
        )
        g_neumann = build_neumann_jump(nominal, ONE)
        expected = SpectralField.unit(4, 1, 0) * -2.0
        assert_allclose(g_neumann.coefficients, expected.coefficients, atol=1e-10)

    def test_example2_dirichlet_jump_at_south_pole(self):
        nominal = example2_nominal_trace(TC, 64)
        g_dirichlet = build_dirichlet_jump(nominal, ONE)
        # -[[du0/dn]] = 2 (1/alpha_- - 1/alpha_+) |x - e3| = -2 at the south pole
        self.assertAlmostEqual(synthesize(g_dirichlet, (0.0, 0.0, -1.0))[0], -2.0, delta=1e-3)

    def test_aliasing_warning(self):
        grid = build_grid(8)
        nominal = NominalTraceData(
            jump_normal_derivative=SpectralField.unit(4, 4, 0),
            jump_tangential_gradient=TangentField.zeros(grid),
        )
        with self.assertLogs("sphere_moments", level="WARNING"):
            _, fraction = dirichlet_jump_diagnostic(nominal, SpectralField.unit(4, 4, 0))
        self.assertGreater(fraction, 1e-8)

    def test_default_grid_is_oversampled(self):
        nominal = example2_nominal_trace(TC, 8)
        kappa = SpectralField.unit(4, 4, 0)
        with self.assertLogs("sphere_moments", level="WARNING"):
            g_default, fraction = dirichlet_jump_diagnostic(nominal, kappa)
            g_wide, wide_fraction = dirichlet_jump_diagnostic(nominal, kappa, build_grid(12))
        assert_allclose(g_default.coefficients, g_wide.coefficients, atol=1e-14)
        self.assertGreater(fraction, 1e-8)
        self.assertAlmostEqual(fraction, wide_fraction, places=14)

    def test_neumann_aliasing_on_nominal_grid(self):
        grid = build_grid(6)
        nominal = NominalTraceData(
            jump_normal_derivative=SpectralField.zeros(6),
            jump_tangential_gradient=surface_gradient(SpectralField.unit(6, 6, 0), grid),
        )
        with self.assertLogs("sphere_moments", level="WARNING") as logs:
            _, fraction = neumann_jump_diagnostic(nominal, SpectralField.unit(2, 2, 0))
        self.assertIn("Neumann jump", "\n".join(logs.output))
        self.assertGreater(fraction, 1e-8)


class TestTraceSolve(unittest.TestCase):
    """Traces of u' satisfy both jump conditions."""

    def test_example1_traces(self):
        nominal = example1_nominal_trace(Example1Config(TC, 0.1), 4)
        trace = shape_derivative(TC, nominal, ONE)
        self.assertLess(np.max(np.abs(trace.trace_plus.coefficients)), 1e-14)
        assert_allclose(trace.trace_minus.coefficients, trace.g_dirichlet.coefficients, atol=1e-14)

    def test_jump_conditions_hold(self):
        nominal = example2_nominal_trace(TC, 10)
        kappa = SpectralField(2, np.random.default_rng(8).standard_normal(9))
        trace = shape_derivative(TC, nominal, kappa)
        assert_allclose(
            (trace.trace_minus - trace.trace_plus).coefficients,
            trace.g_dirichlet.coefficients,
            atol=1e-14,
        )
        flux_minus = apply(boundary_operator(OperatorKind.S_MINUS, TC), trace.trace_minus)
        flux_plus = apply(boundary_operator(OperatorKind.S_PLUS, TC), trace.trace_plus)
        flux_jump = TC.alpha_minus * flux_minus - TC.alpha_plus * flux_plus
        assert_allclose(flux_jump.coefficients, trace.g_neumann.coefficients, atol=1e-12)

    def test_linear_in_kappa(self):
        nominal = example2_nominal_trace(TC, 10)
        kappa = SpectralField(2, np.random.default_rng(5).standard_normal(9))
        trace = shape_derivative(TC, nominal, kappa)
        scaled = shape_derivative(TC, nominal, kappa * 3.0)
        assert_allclose(scaled.trace_plus.coefficients, 3.0 * trace.trace_plus.coefficients, rtol=1e-12, atol=1e-15)
        assert_allclose(scaled.trace_minus.coefficients, 3.0 * trace.trace_minus.coefficients, rtol=1e-12, atol=1e-15)
        for point in [(0.0, 0.3, 0.4), (0.0, 0.0, 2.0)]:
            self.assertAlmostEqual(evaluate(scaled, point), 3.0 * evaluate(trace, point), places=12)

    def test_one_sided_limits_approach_dirichlet_jump(self):
        nominal = example2_nominal_trace(TC, 10)
        kappa = SpectralField(2, np.random.default_rng(6).standard_normal(9))
        trace = shape_derivative(TC, nominal, kappa)
        direction = np.array([0.6, 0.0, 0.8])
        g_dirichlet = synthesize(trace.g_dirichlet, direction)[0]
        errors = []
        for delta in (1e-2, 1e-3, 1e-4):
            gap = evaluate(trace, (1.0 - delta) * direction) - evaluate(trace, (1.0 + delta) * direction)
            errors.append(abs(gap - g_dirichlet))
        # first order in delta: each tenfold step shrinks the error about tenfold
        self.assertLess(errors[1], errors[0] / 5.0)
        self.assertLess(errors[2], errors[1] / 5.0)

    def test_residual_check(self):
        g = SpectralField.constant(2, 1.0)
        with mock.patch("core.shape.solve_jump", return_value=SpectralField.constant(2, 5.0)):
            with self.assertRaises(InvariantViolation):
                solve_trace(TC, g, SpectralField.unit(2, 1, 0))


class TestEvaluate(unittest.TestCase):
    """Point values of u'."""

    def setUp(self):
        self.nominal = example1_nominal_trace(Example1Config(TC, 0.1), 4)

    def test_example1_values(self):
        trace = shape_derivative(TC, self.nominal, ONE)
        self.assertAlmostEqual(evaluate(trace, (0.0, 0.0, 0.2)), 1.0 / 210.0, places=15)
        self.assertAlmostEqual(evaluate(trace, (0.0, 0.0, 0.5)), 1.0 / 210.0, places=15)
        self.assertAlmostEqual(evaluate(trace, (0.0, 0.0, 5.0)), 0.0, places=15)

    def test_equal_coefficients_give_zero(self):
        tc = TransmissionCoefficients(1.5, 1.5)
        nominal = example1_nominal_trace(Example1Config(tc, 0.1), 4)
        trace = shape_derivative(tc, nominal, ONE)
        self.assertEqual(evaluate(trace, (0.0, 0.0, 0.2)), 0.0)

    def test_interface_point_rejected(self):
        trace = shape_derivative(TC, self.nominal, ONE)
        with self.assertRaises(DomainError):
            evaluate(trace, (0.0, 1.0, 0.0))


if __name__ == "__main__":
    unittest.main()
