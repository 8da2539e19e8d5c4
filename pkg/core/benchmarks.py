"""
Closed-form benchmark problems with a random spherical interface.

Example 1 is radially symmetric: the interface is the sphere of radius
R = 1 + epsilon * a with a uniform on [-1, 1], and every moment is known in
closed form or by one-dimensional quadrature over a. Example 2 has a
non-symmetric nominal solution u = |x - e3| (1 - |x|^2) / alpha whose
jump data excite all degrees. Both sources satisfy div(alpha grad u) = f.
"""

import logging
from typing import Callable, Optional, Tuple

import numpy as np

from core.errors import DomainError
from core.harmonics import build_grid
from core.models import (
    Example1Config,
    NominalTraceData,
    QuadratureGrid,
    SpectralField,
    TangentField,
    TransmissionCoefficients,
    flat_index,
)

logger = logging.getLogger("sphere_moments")

NORTH_POLE = np.array([0.0, 0.0, 1.0])
ORACLE_NODES = 64

SampledSolution = Callable[[np.ndarray, np.ndarray], np.ndarray]


def uniform_amplitude_rule(nodes: int = ORACLE_NODES) -> Tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre nodes on [-1, 1] with weights for the uniform density 1/2."""
    a, w = np.polynomial.legendre.leggauss(nodes)
    return a, 0.5 * w


def mean_factor(epsilon: float) -> float:
    """E[1/R] for R = 1 + epsilon a, a ~ U[-1, 1]."""
    return float((np.log1p(epsilon) - np.log1p(-epsilon)) / (2.0 * epsilon))


def _interface_constant(tc: TransmissionCoefficients) -> float:
    return (tc.alpha_plus - tc.alpha_minus) / (105.0 * tc.alpha_minus * tc.alpha_plus)


def _points(x) -> Tuple[np.ndarray, bool]:
    pts = np.asarray(x, dtype=float)
    single = pts.ndim == 1
    return np.atleast_2d(pts), single


def example1_exact_solution(cfg: Example1Config, x, a) -> np.ndarray:
    """
    u(x, a) for the interface radius R = 1 + epsilon a.

    x is a 3-vector or an (n, 3) array; a is a scalar or an (s,) array, in
    which case the result has shape (s, n).
    """
    amplitudes = np.asarray(a, dtype=float)
    if np.any(np.abs(amplitudes) > 1.0):
        raise DomainError("Amplitude a must lie in [-1, 1]")
    pts, single = _points(x)
    tc = cfg.tc
    r = np.linalg.norm(pts, axis=1)
    radius = 1.0 + cfg.epsilon * amplitudes[..., np.newaxis]
    shift = _interface_constant(tc) / radius

    core = (8.0 * r ** 6 / 21.0 - 2.0 * r ** 4 / 5.0 + r ** 2 / 6.0) / tc.alpha_minus
    core = core - 1.0 / (24.0 * tc.alpha_minus) + shift
    far = np.maximum(r, 0.5)
    middle = -1.0 / (105.0 * tc.alpha_minus * far) + shift
    outer = -1.0 / (105.0 * tc.alpha_plus * far) + np.zeros_like(shift)

    u = np.where(r <= 0.5, core, np.where(r <= radius, middle, outer))
    if single and amplitudes.ndim == 0:
        return float(u[0])
    if single:
        return u[..., 0]
    return u


def example1_source(x) -> float:
    """f = (4 r^2 - 1)^2 inside r <= 1/2, zero elsewhere."""
    r = float(np.linalg.norm(x))
    return (4.0 * r * r - 1.0) ** 2 if r <= 0.5 else 0.0


def example1_nominal_solution(tc: TransmissionCoefficients, x) -> np.ndarray:
    """u0 on the reference sphere R = 1."""
    return example1_exact_solution(Example1Config(tc, 0.5), x, 0.0)


def example1_nominal_trace(
    cfg: Example1Config,
    band_limit: int = 8,
    grid: Optional[QuadratureGrid] = None,
) -> NominalTraceData:
    """[[du0/dn]] = (1/alpha_- - 1/alpha_+) / 105 on the unit sphere; no tangential jump."""
    tc = cfg.tc
    grid = grid or build_grid(band_limit)
    jump = (1.0 / tc.alpha_minus - 1.0 / tc.alpha_plus) / 105.0
    return NominalTraceData(
        jump_normal_derivative=SpectralField.constant(band_limit, jump),
        jump_tangential_gradient=TangentField.zeros(grid),
    )


def example1_sampled_solution(cfg: Example1Config) -> SampledSolution:
    """Sampler with signature (points (n, 3), amplitudes (s,)) -> values (s, n)."""

    def solution(points: np.ndarray, amplitudes: np.ndarray) -> np.ndarray:
        return example1_exact_solution(cfg, np.atleast_2d(points), np.asarray(amplitudes, float))

    return solution


def _check_outside_shell(cfg: Example1Config, x) -> float:
    r = float(np.linalg.norm(x))
    if 1.0 - cfg.epsilon < r < 1.0 + cfg.epsilon:
        raise DomainError(
            f"|x| = {r} lies in the shell swept by the interface (epsilon = {cfg.epsilon})"
        )
    return r


def example1_exact_mean(cfg: Example1Config, x) -> float:
    """E[u](x) = u0(x) + C (E[1/R] - 1) inside, u0(x) outside."""
    r = _check_outside_shell(cfg, x)
    u0 = float(example1_nominal_solution(cfg.tc, np.asarray(x, float)))
    if r >= 1.0:
        return u0
    return u0 + _interface_constant(cfg.tc) * (mean_factor(cfg.epsilon) - 1.0)


def example1_exact_covariance(cfg: Example1Config, x, y, nodes: int = ORACLE_NODES) -> float:
    """Cov[u](x, y) by Gauss-Legendre quadrature over the amplitude."""
    a, w = uniform_amplitude_rule(nodes)
    values = example1_exact_solution(cfg, np.array([x, y], dtype=float), a)
    centered = values - w @ values
    return float(w @ (centered[:, 0] * centered[:, 1]))


def example1_exact_variance_closed_form(cfg: Example1Config, x) -> float:
    """Var[u](x) = C^2 (1/(1 - eps^2) - E[1/R]^2) inside the shell, 0 outside."""
    r = _check_outside_shell(cfg, x)
    if r >= 1.0:
        return 0.0
    eps = cfg.epsilon
    c = _interface_constant(cfg.tc)
    return float(c * c * (1.0 / (1.0 - eps * eps) - mean_factor(eps) ** 2))


def example1_leading_covariance(cfg: Example1Config, x, y) -> float:
    """First-order term (1/3) ([[alpha]] / (105 alpha_- alpha_+))^2 eps^2, zero if a point is outside."""
    if np.linalg.norm(x) > 1.0 or np.linalg.norm(y) > 1.0:
        return 0.0
    return (_interface_constant(cfg.tc) * cfg.epsilon) ** 2 / 3.0


def example2_source(x) -> float:
    """f(x) with rho = |x - e3|; undefined at the pole e3 itself."""
    x = np.asarray(x, dtype=float).reshape(3)
    rho = float(np.linalg.norm(x - NORTH_POLE))
    if rho < np.finfo(float).eps:
        raise DomainError("The source is singular at e3")
    r2 = float(np.dot(x, x))
    return 2.0 * (1.0 - r2) / rho - 4.0 * (r2 - x[2]) / rho - 6.0 * rho


def example2_solution(tc: TransmissionCoefficients, x) -> np.ndarray:
    """u(x) = |x - e3| (1 - |x|^2) / alpha_(+/-); x is a 3-vector or (n, 3) array."""
    pts, single = _points(x)
    r = np.linalg.norm(pts, axis=1)
    alpha = np.where(r < 1.0, tc.alpha_minus, tc.alpha_plus)
    u = np.linalg.norm(pts - NORTH_POLE, axis=1) * (1.0 - r * r) / alpha
    return float(u[0]) if single else u


def example2_jump_normal_derivative(tc: TransmissionCoefficients, points) -> np.ndarray:
    """[[du0/dn]](x) = -2 (1/alpha_- - 1/alpha_+) |x - e3| at unit vectors."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    factor = -2.0 * (1.0 / tc.alpha_minus - 1.0 / tc.alpha_plus)
    return factor * np.linalg.norm(pts - NORTH_POLE, axis=1)


def pole_distance_field(band_limit: int) -> SpectralField:
    """
    |x - e3| on the unit sphere, truncated at band_limit.

    sqrt(2 - 2 cos theta) = sum_l a_l P_l(cos theta) with
    a_l = -4 / ((2l + 3)(2l - 1)); only zonal coefficients are nonzero.
    """
    result = SpectralField.zeros(band_limit)
    for l in range(band_limit + 1):
        a_l = -4.0 / ((2.0 * l + 3.0) * (2.0 * l - 1.0))
        result.coefficients[flat_index(l, 0)] = a_l * np.sqrt(4.0 * np.pi / (2.0 * l + 1.0))
    return result


def example2_nominal_trace(
    tc: TransmissionCoefficients,
    band_limit: int = 64,
    grid: Optional[QuadratureGrid] = None,
) -> NominalTraceData:
    """Jump data of the non-symmetric benchmark; u0 vanishes on the sphere so the tangential jump is zero."""
    grid = grid or build_grid(band_limit)
    factor = -2.0 * (1.0 / tc.alpha_minus - 1.0 / tc.alpha_plus)
    logger.debug(f"Example 2 nominal trace at L={band_limit}")
    return NominalTraceData(
        jump_normal_derivative=factor * pole_distance_field(band_limit),
        jump_tangential_gradient=TangentField.zeros(grid),
    )
