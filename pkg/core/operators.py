"""
Boundary integral operators of the Laplacian on the unit sphere.

With the fundamental solution G(x, y) = 1 / (4 pi |x - y|) every operator is
diagonal in the real harmonic basis, with eigenvalues depending only on the
degree l:

    V          1 / (2l + 1)
    K, K'      -1 / (2 (2l + 1))
    D          l (l + 1) / (2l + 1)
    S_-        l             (interior Dirichlet-to-Neumann)
    S_+        -(l + 1)      (exterior Dirichlet-to-Neumann)
    [[a S]]    a_- l + a_+ (l + 1)

The normal points from the interior into the exterior. Direct quadrature of
the layer potentials is kept here as an oracle for these eigenvalues and for
the harmonic extensions.
"""

import logging
from functools import partial
from typing import Union

import numpy as np
from scipy.special import roots_jacobi

from core.errors import DomainError, UsageError
from core.harmonics import basis_matrix, synthesize, synthesize_on_grid, unit_directions
from core.models import (
    BoundaryOperator,
    OperatorKind,
    QuadratureGrid,
    Side,
    SpectralField,
    TransmissionCoefficients,
    degree_array,
)
from core.rules import INTERFACE_TOLERANCE

logger = logging.getLogger("sphere_moments")


def operator_eigenvalue(kind: Union[OperatorKind, str], tc: TransmissionCoefficients, degree):
    """Eigenvalue lambda_l of a boundary operator; accepts scalar or array degrees."""
    try:
        kind = OperatorKind(kind)
    except ValueError:
        raise UsageError(f"Unknown operator kind: {kind!r}") from None
    l = np.asarray(degree, dtype=float)
    if np.any(l < 0):
        raise UsageError("Degrees must be nonnegative")

    if kind is OperatorKind.V:
        value = 1.0 / (2.0 * l + 1.0)
    elif kind in (OperatorKind.K, OperatorKind.KPRIME):
        value = -1.0 / (2.0 * (2.0 * l + 1.0))
    elif kind is OperatorKind.D:
        value = l * (l + 1.0) / (2.0 * l + 1.0)
    elif kind is OperatorKind.S_MINUS:
        value = l.copy()
    elif kind is OperatorKind.S_PLUS:
        value = -(l + 1.0)
    else:
        value = tc.alpha_minus * l + tc.alpha_plus * (l + 1.0)

    return float(value) if value.ndim == 0 else value


def boundary_operator(kind: Union[OperatorKind, str], tc: TransmissionCoefficients) -> BoundaryOperator:
    try:
        kind = OperatorKind(kind)
    except ValueError:
        raise UsageError(f"Unknown operator kind: {kind!r}") from None
    return BoundaryOperator(kind=kind, eigenvalue=partial(operator_eigenvalue, kind, tc))


def apply(op: BoundaryOperator, v: SpectralField) -> SpectralField:
    """Coefficient-wise multiplication by lambda_l."""
    return SpectralField(v.band_limit, op.eigenvalue(v.degrees) * v.coefficients)


def solve_jump(tc: TransmissionCoefficients, rhs: SpectralField) -> SpectralField:
    """Solve [[a S]] u = rhs; always solvable since lambda_l >= min(a_-, a_+) (1 + l) > 0."""
    eigenvalues = operator_eigenvalue(OperatorKind.JUMP_ALPHA_S, tc, rhs.degrees)
    return SpectralField(rhs.band_limit, rhs.coefficients / eigenvalues)


def calderon_interior_dtn(degree):
    """Interior DtN eigenvalue composed as V^-1 (1/2 I + K)."""
    v = operator_eigenvalue(OperatorKind.V, None, degree)
    k = operator_eigenvalue(OperatorKind.K, None, degree)
    return (0.5 + k) / v


def calderon_exterior_dtn(degree):
    """Exterior DtN eigenvalue composed as V^-1 (K - 1/2 I)."""
    v = operator_eigenvalue(OperatorKind.V, None, degree)
    k = operator_eigenvalue(OperatorKind.K, None, degree)
    return (k - 0.5) / v


def symmetric_interior_dtn(degree):
    """Symmetric form D + (1/2 I + K') V^-1 (1/2 I + K) of the interior DtN map."""
    v = operator_eigenvalue(OperatorKind.V, None, degree)
    k = operator_eigenvalue(OperatorKind.K, None, degree)
    d = operator_eigenvalue(OperatorKind.D, None, degree)
    return d + (0.5 + k) ** 2 / v


def _radii(points) -> np.ndarray:
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    if pts.shape[-1] != 3:
        raise UsageError(f"Points must be 3-vectors, got shape {pts.shape}")
    return pts


def point_side(point) -> Side:
    """Subdomain containing a point; points on the sphere are rejected."""
    r = float(np.linalg.norm(point))
    if abs(r - 1.0) <= INTERFACE_TOLERANCE:
        raise DomainError(f"Point {tuple(point)} lies on the interface")
    return Side.INTERIOR if r < 1.0 else Side.EXTERIOR


def extension_matrix(points, band_limit: int, side: Side) -> np.ndarray:
    """
    Harmonic-extension factors per point and harmonic, shape (n, (L+1)^2).

    Interior entries are r^l Y_{l,m}(x/r), exterior entries r^(-l-1) Y_{l,m}(x/r).
    """
    pts = _radii(points)
    r = np.linalg.norm(pts, axis=1)
    if side is Side.INTERIOR and np.any(r >= 1.0):
        raise DomainError("Interior evaluation needs |x| < 1")
    if side is Side.EXTERIOR and np.any(r <= 1.0):
        raise DomainError("Exterior evaluation needs |x| > 1")
    directions = np.where(r[:, None] > 0.0, pts / np.where(r > 0.0, r, 1.0)[:, None], [0.0, 0.0, 1.0])
    basis = basis_matrix(directions, band_limit)
    degrees = degree_array(band_limit)
    if side is Side.INTERIOR:
        radial = r[:, None] ** degrees[None, :]
    else:
        radial = r[:, None] ** (-degrees[None, :] - 1.0)
    return basis * radial


def evaluate_interior(trace: SpectralField, points) -> np.ndarray:
    """Harmonic extension into |x| < 1: sum u_{l,m} r^l Y_{l,m}(x/r)."""
    return extension_matrix(points, trace.band_limit, Side.INTERIOR) @ trace.coefficients


def evaluate_exterior(trace: SpectralField, points) -> np.ndarray:
    """Decaying harmonic extension into |x| > 1: sum u_{l,m} r^(-l-1) Y_{l,m}(x/r)."""
    return extension_matrix(points, trace.band_limit, Side.EXTERIOR) @ trace.coefficients


def _pole_frame(point: np.ndarray):
    """Orthonormal (e1, e2) completing `point` to a right-handed frame."""
    helper = np.array([1.0, 0.0, 0.0]) if abs(point[0]) < 0.9 else np.array([0.0, 1.0, 0.0])
    e1 = np.cross(helper, point)
    e1 /= np.linalg.norm(e1)
    e2 = np.cross(point, e1)
    return e1, e2


def _singular_rule(point, nodes: int):
    """
    Nodes on the sphere clustered for a kernel singular at `point`.

    Returns (x, y, t, weights) where t = x . y and the weights include the
    Gauss-Jacobi factor for (1 - t)^(-1/2) and the azimuthal trapezoid.
    """
    x = unit_directions(point)[0]
    t, w = roots_jacobi(nodes, -0.5, 0.0)
    azimuthal = 2 * nodes + 1
    psi = 2.0 * np.pi * np.arange(azimuthal) / azimuthal
    e1, e2 = _pole_frame(x)
    s = np.sqrt(1.0 - t ** 2)
    y = (
        np.outer(s, np.cos(psi))[..., None] * e1
        + np.outer(s, np.sin(psi))[..., None] * e2
        + np.outer(t, np.ones(azimuthal))[..., None] * x
    ).reshape(-1, 3)
    y /= np.linalg.norm(y, axis=1)[:, None]
    weights = np.repeat(w * 2.0 * np.pi / azimuthal, azimuthal)
    return x, y, np.repeat(t, azimuthal), weights


def single_layer_quadrature(field: SpectralField, point, nodes: int = 32) -> float:
    """(V v)(x) = int G(x, y) v(y) dsigma_y at a point of the sphere by singular quadrature."""
    x, y, t, weights = _singular_rule(point, nodes)
    distance = np.linalg.norm(x - y, axis=1)
    # G(x, y) * sqrt(1 - t); the (1 - t)^(-1/2) factor sits in the Jacobi weights
    regular = np.sqrt(1.0 - t) / (4.0 * np.pi * distance)
    return float(np.dot(weights, regular * synthesize(field, y)))


def double_layer_quadrature(field: SpectralField, point, nodes: int = 32) -> float:
    """(K v)(x) = int dG/dn_y(x, y) v(y) dsigma_y at a point of the sphere by singular quadrature."""
    x, y, t, weights = _singular_rule(point, nodes)
    diff = x - y
    distance = np.linalg.norm(diff, axis=1)
    kernel = np.sum(diff * y, axis=1) / (4.0 * np.pi * distance ** 3)
    return float(np.dot(weights, kernel * np.sqrt(1.0 - t) * synthesize(field, y)))


def layer_potential_evaluate(
    trace: SpectralField,
    points,
    grid: QuadratureGrid,
    side: Side,
) -> np.ndarray:
    """
    Representation formula by direct quadrature on `grid`.

    Interior: u(x) = V~(S_- u)(x) - W u(x); exterior: u(x) = W u(x) - V~(S_+ u)(x).
    Accurate only for points well away from the sphere.
    """
    pts = _radii(points)
    r = np.linalg.norm(pts, axis=1)
    if side is Side.INTERIOR and np.any(r >= 1.0):
        raise DomainError("Interior evaluation needs |x| < 1")
    if side is Side.EXTERIOR and np.any(r <= 1.0):
        raise DomainError("Exterior evaluation needs |x| > 1")

    kind = OperatorKind.S_MINUS if side is Side.INTERIOR else OperatorKind.S_PLUS
    flux = apply(boundary_operator(kind, TransmissionCoefficients(1.0, 1.0)), trace)
    nodes = grid.points
    u_nodes = synthesize_on_grid(trace, grid)
    flux_nodes = synthesize_on_grid(flux, grid)

    diff = pts[:, None, :] - nodes[None, :, :]
    distance = np.linalg.norm(diff, axis=2)
    single = 1.0 / (4.0 * np.pi * distance)
    double = np.sum(diff * nodes[None, :, :], axis=2) / (4.0 * np.pi * distance ** 3)
    single_term = (single * flux_nodes) @ grid.weights
    double_term = (double * u_nodes) @ grid.weights
    logger.debug(f"Layer potentials at {pts.shape[0]} points on {grid.node_count} nodes")
    if side is Side.INTERIOR:
        return single_term - double_term
    return double_term - single_term
