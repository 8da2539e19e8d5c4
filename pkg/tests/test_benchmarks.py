"""
Unit tests for the closed-form benchmark problems.
"""

import unittest

import numpy as np
from numpy.testing import assert_allclose
from scipy.integrate import quad
from scipy.special import eval_legendre

from core.benchmarks import (
    example1_exact_covariance,
    example1_exact_mean,
    example1_exact_solution,
    example1_exact_variance_closed_form,
    example1_leading_covariance,
    example1_nominal_solution,
    example1_source,
    example2_jump_normal_derivative,
    example2_solution,
    example2_source,
    mean_factor,
    pole_distance_field,
    uniform_amplitude_rule,
)
from core.errors import DomainError
from core.harmonics import synthesize
from core.models import Example1Config, TransmissionCoefficients

TC = TransmissionCoefficients(2.0, 1.0)
CFG = Example1Config(TC, 0.1)
STEP = 1e-5


def radial(values_at, r: float) -> float:
    return float(values_at(np.array([0.0, 0.0, r])))


def left_derivative(f, r: float) -> float:
    return (3.0 * f(r) - 4.0 * f(r - STEP) + f(r - 2.0 * STEP)) / (2.0 * STEP)


def right_derivative(f, r: float) -> float:
    return (-3.0 * f(r) + 4.0 * f(r + STEP) - f(r + 2.0 * STEP)) / (2.0 * STEP)


def laplacian(f, x: np.ndarray, h: float = 1e-3) -> float:
    total = 0.0
    for axis in range(3):
        shift = np.zeros(3)
        shift[axis] = h
        total += f(x + shift) + f(x - shift) - 2.0 * f(x)
    return total / (h * h)


class TestExample1Solution(unittest.TestCase):
    """Radially symmetric benchmark: transmission conditions and source."""

    def profile(self, a: float):
        return lambda r: example1_exact_solution(CFG, np.array([0.0, 0.0, r]), a)

    def test_continuity_and_flux_at_interface(self):
        for a in (-0.7, 0.0, 0.4):
            f = self.profile(a)
            radius = 1.0 + CFG.epsilon * a
            self.assertAlmostEqual(f(radius - 1e-12), f(radius + 1e-12), places=10)
            flux_inside = TC.alpha_minus * left_derivative(f, radius)
            flux_outside = TC.alpha_plus * right_derivative(f, radius)
            self.assertAlmostEqual(flux_inside, flux_outside, delta=1e-7)

    def test_smooth_at_source_support_edge(self):
        f = self.profile(0.3)
        self.assertAlmostEqual(f(0.5 - 1e-12), f(0.5 + 1e-12), places=10)
        self.assertAlmostEqual(left_derivative(f, 0.5), right_derivative(f, 0.5), delta=1e-7)

    def test_source_relation(self):
        def u(x):
            return example1_exact_solution(CFG, x, 0.2)

        for x in ([0.0, 0.1, 0.25], [0.3, 0.0, 0.0], [0.5, 0.4, 0.1], [0.9, 0.9, 0.9]):
            x = np.array(x)
            alpha = TC.alpha_minus if np.linalg.norm(x) < 1.0 else TC.alpha_plus
            self.assertAlmostEqual(alpha * laplacian(u, x), example1_source(x), delta=1e-4)

    def test_nominal_values(self):
        self.assertAlmostEqual(radial(lambda x: example1_nominal_solution(TC, x), 5.0), -1.0 / 525.0, places=15)
        self.assertAlmostEqual(radial(lambda x: example1_nominal_solution(TC, x), 0.5), -1.0 / 70.0, places=15)

    def test_vectorised_shape(self):
        values = example1_exact_solution(CFG, np.zeros((4, 3)) + [0.0, 0.0, 0.3], np.linspace(-1, 1, 5))
        self.assertEqual(values.shape, (5, 4))

    def test_amplitude_out_of_range(self):
        with self.assertRaises(DomainError):
            example1_exact_solution(CFG, (0.0, 0.0, 0.2), 1.5)

    def test_epsilon_range(self):
        with self.assertRaises(DomainError):
            Example1Config(TC, 0.0)
        with self.assertRaises(DomainError):
            Example1Config(TC, 1.0)


class TestExample1Moments(unittest.TestCase):
    """Exact moments against quadrature over the amplitude."""

    def test_mean_factor(self):
        self.assertAlmostEqual(mean_factor(0.1), np.arctanh(0.1) / 0.1, places=15)

    def test_exact_mean_matches_quadrature(self):
        a, w = uniform_amplitude_rule()
        for x in ((0.0, 0.0, 0.2), (0.0, 0.0, 0.5), (0.0, 0.0, 5.0)):
            oracle = float(w @ example1_exact_solution(CFG, np.array(x), a))
            self.assertAlmostEqual(example1_exact_mean(CFG, x), oracle, delta=1e-12)

    def test_closed_form_variance_matches_quadrature(self):
        x = (0.0, 0.0, 0.2)
        closed = example1_exact_variance_closed_form(CFG, x)
        self.assertAlmostEqual(example1_exact_covariance(CFG, x, x) / closed, 1.0, places=9)
        self.assertEqual(example1_exact_variance_closed_form(CFG, (0.0, 0.0, 5.0)), 0.0)

    def test_covariance_is_constant_inside(self):
        assert_allclose(
            example1_exact_covariance(CFG, (0.0, 0.0, 0.2), (0.0, 0.0, 0.5)),
            example1_exact_variance_closed_form(CFG, (0.0, 0.0, 0.2)),
            rtol=1e-10,
        )

    def test_leading_term(self):
        x = (0.0, 0.0, 0.2)
        exact = example1_exact_variance_closed_form(CFG, x)
        leading = example1_leading_covariance(CFG, x, x)
        self.assertAlmostEqual(leading, (0.1 / 210.0) ** 2 / 3.0, places=18)
        self.assertLess(abs(exact / leading - 1.0), 0.03)
        self.assertEqual(example1_leading_covariance(CFG, x, (0.0, 0.0, 5.0)), 0.0)

    def test_points_in_shell_rejected(self):
        with self.assertRaises(DomainError):
            example1_exact_mean(CFG, (0.0, 0.0, 0.95))
        with self.assertRaises(DomainError):
            example1_exact_variance_closed_form(CFG, (0.0, 1.05, 0.0))


class TestExample2(unittest.TestCase):
    """Non-symmetric benchmark."""

    def test_vanishes_on_sphere(self):
        points = np.array([[0.0, 0.0, -1.0], [0.6, 0.0, 0.8], [0.0, 1.0, 0.0]])
        assert_allclose(example2_solution(TC, points), 0.0, atol=1e-14)

    def test_source_relation(self):
        for x in ([0.2, -0.3, 0.1], [0.0, 0.1, -0.6], [1.2, 0.5, -0.7], [0.0, -2.0, 1.0]):
            x = np.array(x)
            alpha = TC.alpha_minus if np.linalg.norm(x) < 1.0 else TC.alpha_plus
            value = alpha * laplacian(lambda y: example2_solution(TC, y), x)
            self.assertAlmostEqual(value, example2_source(x), delta=1e-4)

    def test_jump_at_south_pole(self):
        self.assertAlmostEqual(example2_jump_normal_derivative(TC, (0.0, 0.0, -1.0))[0], 2.0, places=14)

        def f(r):
            return example2_solution(TC, np.array([0.0, 0.0, -r]))

        jump = left_derivative(f, 1.0) - right_derivative(f, 1.0)
        self.assertAlmostEqual(jump, 2.0, delta=1e-7)

    def test_source_singular_at_pole(self):
        with self.assertRaises(DomainError):
            example2_source((0.0, 0.0, 1.0))

    def test_pole_distance_coefficients(self):
        field = pole_distance_field(8)
        self.assertAlmostEqual(field[0, 0], 4.0 / 3.0 * np.sqrt(4.0 * np.pi), places=14)
        for l in range(1, 6):
            norm = np.sqrt((2 * l + 1) / (4.0 * np.pi))
            integral, _ = quad(lambda t: np.sqrt(2.0 - 2.0 * t) * eval_legendre(l, t), -1.0, 1.0, limit=200)
            self.assertAlmostEqual(field[l, 0], 2.0 * np.pi * norm * integral, places=10)
        self.assertEqual(np.count_nonzero(field.coefficients[[1, 3, 5, 7, 8]]), 0)

    def test_pole_distance_synthesis(self):
        field = pole_distance_field(64)
        self.assertAlmostEqual(synthesize(field, (0.0, 0.0, -1.0))[0], 2.0, delta=1e-3)
        self.assertAlmostEqual(synthesize(field, (1.0, 0.0, 0.0))[0], np.sqrt(2.0), delta=1e-3)


if __name__ == "__main__":
    unittest.main()
