"""
Real spherical harmonics on the unit sphere.

Provides the orthonormal real basis, Gauss-Legendre x trapezoid quadrature
grids, analysis/synthesis transforms, tangential gradient and weak surface
divergence, and the Sobolev norms with weights (1 + l)^(2s).

Sign convention: Q_l^m is the orthonormalized associated Legendre function
with the Condon-Shortley phase, and

    Y_{l,0}  = Q_l^0(cos theta)
    Y_{l,m}  = sqrt(2) Q_l^m(cos theta) cos(m phi)     (m > 0)
    Y_{l,-m} = sqrt(2) Q_l^m(cos theta) sin(m phi)     (m > 0)

so that, for instance, Y_{1,0} = sqrt(3/(4 pi)) z and Y_{1,1} = -sqrt(3/(4 pi)) x.

Transforms are separable: sums over phi are done ring by ring, then
combined with the Legendre tables over the polar nodes.
"""

import logging
from typing import Tuple

import numpy as np

from core.errors import DomainError, UsageError
from core.models import (
    HarmonicIndex,
    QuadratureGrid,
    SpectralField,
    TangentField,
    degree_array,
    order_array,
)

logger = logging.getLogger("sphere_moments")

UNIT_TOLERANCE = 1e-12


def _legendre_tables(band_limit: int, cos_theta: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Orthonormalized associated Legendre functions and their derivatives.

    Returns (q, dq, r), each of shape (L+1, L+1, n) indexed [l, m, node]:
      q  = Q_l^m(cos theta)
      dq = d/dtheta Q_l^m
      r  = Q_l^m / sin(theta) for m >= 1 (zero for m = 0)

    r obeys the same three-term recurrence as q with the sin(theta) factor of
    the diagonal seed cancelled, so it stays finite at the poles; these are the
    limit formulas used for the azimuthal derivative there.
    """
    x = np.asarray(cos_theta, dtype=float).reshape(-1)
    s = np.sqrt(np.clip(1.0 - x * x, 0.0, None))
    size = band_limit + 1
    q = np.zeros((size, size, x.size))
    dq = np.zeros_like(q)
    r = np.zeros_like(q)

    q[0, 0] = 1.0 / np.sqrt(4.0 * np.pi)
    for m in range(1, size):
        c = -np.sqrt((2.0 * m + 1.0) / (2.0 * m))
        r[m, m] = c * q[m - 1, m - 1]
        q[m, m] = s * r[m, m]
        dq[m, m] = c * (x * q[m - 1, m - 1] + s * dq[m - 1, m - 1])

    for m in range(0, band_limit):
        f = np.sqrt(2.0 * m + 3.0)
        q[m + 1, m] = f * x * q[m, m]
        dq[m + 1, m] = f * (x * dq[m, m] - s * q[m, m])
        r[m + 1, m] = f * x * r[m, m]
        for l in range(m + 2, size):
            a = np.sqrt((4.0 * l * l - 1.0) / (l * l - m * m))
            b = np.sqrt(((l - 1.0) ** 2 - m * m) / (4.0 * (l - 1.0) ** 2 - 1.0))
            q[l, m] = a * (x * q[l - 1, m] - b * q[l - 2, m])
            dq[l, m] = a * (x * dq[l - 1, m] - s * q[l - 1, m] - b * dq[l - 2, m])
            r[l, m] = a * (x * r[l - 1, m] - b * r[l - 2, m])

    return q, dq, r


def _azimuthal_scale(band_limit: int) -> np.ndarray:
    scale = np.full(band_limit + 1, np.sqrt(2.0))
    scale[0] = 1.0
    return scale


def _split(coefficients: np.ndarray, band_limit: int) -> Tuple[np.ndarray, np.ndarray]:
    """Flat coefficients -> (cos_part, sin_part) matrices indexed [l, |m|]."""
    size = band_limit + 1
    degrees, orders = degree_array(band_limit), order_array(band_limit)
    cos_part = np.zeros((size, size))
    sin_part = np.zeros((size, size))
    pos = orders >= 0
    cos_part[degrees[pos], orders[pos]] = coefficients[pos]
    neg = ~pos
    sin_part[degrees[neg], -orders[neg]] = coefficients[neg]
    return cos_part, sin_part


def _merge(cos_part: np.ndarray, sin_part: np.ndarray, band_limit: int) -> np.ndarray:
    degrees, orders = degree_array(band_limit), order_array(band_limit)
    return np.where(
        orders >= 0,
        cos_part[degrees, np.abs(orders)],
        sin_part[degrees, np.abs(orders)],
    )


def _trig(band_limit: int, phi: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """cos(m phi) and sin(m phi) for m = 0..L, shape (L+1, n)."""
    mphi = np.outer(np.arange(band_limit + 1), phi)
    return np.cos(mphi), np.sin(mphi)


def _check_grid(grid: QuadratureGrid, band_limit: int) -> None:
    if grid.exactness < 2 * band_limit:
        raise UsageError(
            f"Grid exactness {grid.exactness} is below 2L = {2 * band_limit}"
        )


def unit_directions(points) -> np.ndarray:
    """Validate that points lie on the unit sphere; returns an (n, 3) array."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    if pts.shape[-1] != 3:
        raise UsageError(f"Points must be 3-vectors, got shape {pts.shape}")
    norms = np.linalg.norm(pts, axis=1)
    if np.any(np.abs(norms - 1.0) > UNIT_TOLERANCE):
        raise DomainError("Points must lie on the unit sphere")
    return pts


def spherical_angles(points: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Colatitude and longitude of unit vectors."""
    theta = np.arccos(np.clip(points[:, 2], -1.0, 1.0))
    phi = np.arctan2(points[:, 1], points[:, 0])
    return theta, phi


def basis_matrix(points, band_limit: int) -> np.ndarray:
    """Values of every Y_{l,m} with l <= band_limit at the given unit points, shape (n, (L+1)^2)."""
    pts = unit_directions(points)
    theta, phi = spherical_angles(pts)
    q, _, _ = _legendre_tables(band_limit, np.cos(theta))
    cos_m, sin_m = _trig(band_limit, phi)
    scale = _azimuthal_scale(band_limit)[None, :, None]
    y_cos = q * scale * cos_m[None, :, :]
    y_sin = q * scale * sin_m[None, :, :]
    degrees, orders = degree_array(band_limit), order_array(band_limit)
    return np.where(
        (orders >= 0)[:, None],
        y_cos[degrees, np.abs(orders)],
        y_sin[degrees, np.abs(orders)],
    ).T


def eval_ylm(idx: HarmonicIndex, point) -> float:
    """Evaluate the real orthonormal harmonic Y_{l,m} at a unit vector."""
    return float(basis_matrix(point, idx.degree)[0, idx.flat])


def build_grid(band_limit: int) -> QuadratureGrid:
    """
    Grid with L+1 Gauss-Legendre polar nodes and 2L+1 azimuthal nodes.

    Integrates every product Y_{l,m} Y_{l',m'} with l + l' <= 2L exactly.
    """
    if band_limit < 0:
        raise UsageError(f"Band limit must be nonnegative, got {band_limit}")
    nodes, weights = np.polynomial.legendre.leggauss(band_limit + 1)
    logger.debug(f"Quadrature grid for L={band_limit}: {band_limit + 1} x {2 * band_limit + 1} nodes")
    return QuadratureGrid(
        band_limit=band_limit,
        cos_theta=nodes,
        polar_weights=weights,
        azimuthal_count=2 * band_limit + 1,
    )


def integrate(samples: np.ndarray, grid: QuadratureGrid) -> float:
    """Quadrature of a scalar field sampled at the grid nodes."""
    return float(np.dot(grid.weights, np.asarray(samples, dtype=float).reshape(-1)))


def analyze(samples: np.ndarray, grid: QuadratureGrid, band_limit: int) -> SpectralField:
    """Harmonic coefficients v_{l,m} = sum_i w_i v(x_i) Y_{l,m}(x_i)."""
    values = np.asarray(samples, dtype=float).reshape(-1)
    if values.size != grid.node_count:
        raise UsageError(f"Expected {grid.node_count} samples, got {values.size}")
    _check_grid(grid, band_limit)
    rings = values.reshape(grid.polar_count, grid.azimuthal_count)
    cos_m, sin_m = _trig(band_limit, grid.phi)
    ring_cos = grid.azimuthal_weight * rings @ cos_m.T
    ring_sin = grid.azimuthal_weight * rings @ sin_m.T
    q, _, _ = _legendre_tables(band_limit, grid.cos_theta)
    scale = _azimuthal_scale(band_limit)
    cos_part = np.einsum("lmj,j,jm->lm", q, grid.polar_weights, ring_cos) * scale
    sin_part = np.einsum("lmj,j,jm->lm", q, grid.polar_weights, ring_sin) * scale
    return SpectralField(band_limit, _merge(cos_part, sin_part, band_limit))


def synthesize(field: SpectralField, points) -> np.ndarray:
    """Point values sum_{l,m} v_{l,m} Y_{l,m}(x) at unit vectors."""
    return basis_matrix(points, field.band_limit) @ field.coefficients


def synthesize_on_grid(field: SpectralField, grid: QuadratureGrid) -> np.ndarray:
    """Values of a field at all grid nodes (polar-major order)."""
    band_limit = field.band_limit
    cos_part, sin_part = _split(field.coefficients, band_limit)
    scale = _azimuthal_scale(band_limit)
    q, _, _ = _legendre_tables(band_limit, grid.cos_theta)
    ring_cos = np.einsum("lm,lmj->jm", cos_part * scale, q)
    ring_sin = np.einsum("lm,lmj->jm", sin_part * scale, q)
    cos_m, sin_m = _trig(band_limit, grid.phi)
    return (ring_cos @ cos_m + ring_sin @ sin_m).reshape(-1)


def sobolev_norm(field: SpectralField, s: float) -> float:
    """sqrt(sum (1 + l)^(2s) |v_{l,m}|^2)."""
    weights = (1.0 + field.degrees) ** (2.0 * s)
    return float(np.sqrt(np.sum(weights * field.coefficients ** 2)))


def surface_gradient(field: SpectralField, grid: QuadratureGrid) -> TangentField:
    """Tangential gradient at the grid nodes from analytic theta/phi derivatives."""
    band_limit = field.band_limit
    _check_grid(grid, band_limit)
    cos_part, sin_part = _split(field.coefficients, band_limit)
    scale = _azimuthal_scale(band_limit)
    orders = np.arange(band_limit + 1)
    _, dq, r = _legendre_tables(band_limit, grid.cos_theta)
    cos_m, sin_m = _trig(band_limit, grid.phi)

    theta_cos = np.einsum("lm,lmj->jm", cos_part * scale, dq)
    theta_sin = np.einsum("lm,lmj->jm", sin_part * scale, dq)
    g_theta = theta_cos @ cos_m + theta_sin @ sin_m

    phi_cos = np.einsum("lm,lmj->jm", cos_part * scale * orders, r)
    phi_sin = np.einsum("lm,lmj->jm", sin_part * scale * orders, r)
    g_phi = -phi_cos @ sin_m + phi_sin @ cos_m

    e_theta, e_phi = grid.frame()
    vectors = g_theta.reshape(-1, 1) * e_theta + g_phi.reshape(-1, 1) * e_phi
    return TangentField(grid, vectors)


def surface_divergence(tf: TangentField, band_limit: int) -> SpectralField:
    """
    Weak surface divergence: (div F)_{l,m} = -sum_i w_i F(x_i) . grad Y_{l,m}(x_i).
    """
    grid = tf.grid
    _check_grid(grid, band_limit)
    f_theta, f_phi = tf.components()
    cos_m, sin_m = _trig(band_limit, grid.phi)
    w_phi = grid.azimuthal_weight
    theta_cos = w_phi * f_theta @ cos_m.T
    theta_sin = w_phi * f_theta @ sin_m.T
    phi_cos = w_phi * f_phi @ cos_m.T
    phi_sin = w_phi * f_phi @ sin_m.T

    _, dq, r = _legendre_tables(band_limit, grid.cos_theta)
    scale = _azimuthal_scale(band_limit)
    orders = np.arange(band_limit + 1)
    w = grid.polar_weights
    cos_part = -scale * (
        np.einsum("lmj,j,jm->lm", dq, w, theta_cos)
        - orders * np.einsum("lmj,j,jm->lm", r, w, phi_sin)
    )
    sin_part = -scale * (
        np.einsum("lmj,j,jm->lm", dq, w, theta_sin)
        + orders * np.einsum("lmj,j,jm->lm", r, w, phi_cos)
    )
    return SpectralField(band_limit, _merge(cos_part, sin_part, band_limit))


def tangent_inner(a: TangentField, b: TangentField) -> float:
    """L2 pairing of two tangent fields on the same grid."""
    return float(np.dot(a.grid.weights, np.sum(a.vectors * b.vectors, axis=1)))


def spectral_inner(a: SpectralField, b: SpectralField) -> float:
    """L2 pairing of two fields via Parseval."""
    n = min(a.coefficients.size, b.coefficients.size)
    return float(np.dot(a.coefficients[:n], b.coefficients[:n]))

