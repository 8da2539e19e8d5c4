"""
Tensor moments of the shape derivative on hyperbolic crosses.

The k-th moment of the exterior trace solves the tensor product of the
diagonal jump equation,

    ([[alpha S]] x ... x [[alpha S]]) M = E[b x ... x b],

with the right-hand side restricted to the hyperbolic cross
prod(1 + l_i) <= 1 + p. Interior legs use the right-hand side
g_N - alpha_+ S_+ g_D instead, so interior and mixed moments are read off
with the same diagonal solve.
"""

import logging
from functools import lru_cache
from typing import Callable, Dict, Iterator, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.special import eval_legendre

from core.errors import DomainError, UnsupportedModelError, UsageError
from core.harmonics import synthesize
from core.models import (
    HyperbolicCross,
    NominalTraceData,
    OperatorKind,
    PerturbationModel,
    Side,
    SpectralField,
    TensorSpectralField,
    TransmissionCoefficients,
    degree_array,
)
from core.operators import (
    apply,
    boundary_operator,
    extension_matrix,
    operator_eigenvalue,
    point_side,
)
from core.shape import build_dirichlet_jump, build_neumann_jump

logger = logging.getLogger("sphere_moments")

SidesArg = Union[None, Side, Sequence[Side]]


def _degree_tuples(budget: int, legs: int) -> Iterator[Tuple[int, ...]]:
    """All (l_1, ..., l_legs) with prod(1 + l_i) <= budget."""
    if legs == 0:
        yield ()
        return
    for l in range(budget):
        for rest in _degree_tuples(budget // (1 + l), legs - 1):
            yield (l,) + rest


@lru_cache(maxsize=32)
def build_cross(order: int, legs: int) -> HyperbolicCross:
    """Hyperbolic cross of order p for k legs."""
    if order < 0 or legs < 1:
        raise UsageError(f"Cross needs p >= 0 and k >= 1, got p={order}, k={legs}")
    tuples = tuple(sorted(_degree_tuples(order + 1, legs)))
    return HyperbolicCross(order=order, legs=legs, degree_tuples=tuples)


def unknown_count(cross: HyperbolicCross) -> int:
    """Number of tensor coefficients, sum over degree tuples of prod(2 l_i + 1)."""
    return int(sum(np.prod([2 * l + 1 for l in degrees]) for degrees in cross.degree_tuples))


@lru_cache(maxsize=32)
def _cross_rows(cross: HyperbolicCross) -> np.ndarray:
    blocks = []
    for degrees in cross.degree_tuples:
        ranges = [np.arange(l * l, (l + 1) ** 2) for l in degrees]
        mesh = np.meshgrid(*ranges, indexing="ij")
        blocks.append(np.stack([m.ravel() for m in mesh], axis=1))
    rows = np.concatenate(blocks, axis=0)
    rows.setflags(write=False)
    return rows


def _normalize_sides(sides: SidesArg, legs: int) -> Tuple[Side, ...]:
    if sides is None:
        return (Side.EXTERIOR,) * legs
    if isinstance(sides, Side):
        return (sides,) * legs
    sides = tuple(Side(s) for s in sides)
    if len(sides) != legs:
        raise UsageError(f"Expected {legs} sides, got {len(sides)}")
    return sides


def _leg_vectors(
    tc: TransmissionCoefficients,
    nominal: NominalTraceData,
    phi: SpectralField,
    sides: Tuple[Side, ...],
) -> Dict[Side, np.ndarray]:
    """Per-side right-hand side coefficients of one mode."""
    g_dirichlet = build_dirichlet_jump(nominal, phi)
    g_neumann = build_neumann_jump(nominal, phi)
    vectors = {}
    for side in set(sides):
        if side is Side.EXTERIOR:
            dtn, alpha = OperatorKind.S_MINUS, tc.alpha_minus
        else:
            dtn, alpha = OperatorKind.S_PLUS, tc.alpha_plus
        b = g_neumann - alpha * apply(boundary_operator(dtn, tc), g_dirichlet)
        vectors[side] = b.coefficients
    return vectors


def _check_cross(nominal: NominalTraceData, cross: HyperbolicCross) -> None:
    if cross.order > nominal.band_limit:
        raise UsageError(
            f"Cross order {cross.order} exceeds the band limit {nominal.band_limit} of the nominal data"
        )


def assemble_kth_moment_rhs(
    tc: TransmissionCoefficients,
    nominal: NominalTraceData,
    model: PerturbationModel,
    k: int,
    cross: HyperbolicCross,
    sides: SidesArg = None,
) -> TensorSpectralField:
    """
    E[b x ... x b] on the cross.

    k = 1 vanishes for a centered perturbation, k = 2 takes any separable
    model, and k >= 3 needs a single-mode model with known amplitude moments.
    """
    if not model.is_separable:
        raise UnsupportedModelError("Moment assembly needs a separable perturbation model")
    if cross.legs != k:
        raise UsageError(f"Cross has {cross.legs} legs, expected {k}")
    _check_cross(nominal, cross)
    sides = _normalize_sides(sides, k)
    rows = _cross_rows(cross)

    if k == 1:
        return TensorSpectralField(cross, rows, np.zeros(rows.shape[0]), sides)
    if k > 2 and not model.is_single_mode:
        raise UnsupportedModelError(f"Moments of order {k} need a single-mode perturbation")

    values = np.zeros(rows.shape[0])
    for sigma, phi in model.modes:
        weight = sigma if k == 2 else model.amplitude_moment(k)
        legs = _leg_vectors(tc, nominal, phi, sides)
        term = np.full(rows.shape[0], weight)
        for i, side in enumerate(sides):
            term *= legs[side][rows[:, i]]
        values += term

    logger.debug(f"Assembled order-{k} moment data on {rows.shape[0]} unknowns (p={cross.order})")
    return TensorSpectralField(cross, rows, values, sides)


def assemble_second_moment_rhs(
    tc: TransmissionCoefficients,
    nominal: NominalTraceData,
    model: PerturbationModel,
    cross: HyperbolicCross,
    sides: SidesArg = None,
) -> TensorSpectralField:
    """E[b x b] = sum_j sigma_j b_j x b_j on a two-leg cross."""
    return assemble_kth_moment_rhs(tc, nominal, model, 2, cross, sides)


def solve_kth_moment(
    tc: TransmissionCoefficients,
    rhs: TensorSpectralField,
    k: Optional[int] = None,
) -> TensorSpectralField:
    """Divide every coefficient by prod_i lambda_{l_i} of [[alpha S]]."""
    if k is not None and k != rhs.legs:
        raise UsageError(f"Right-hand side has {rhs.legs} legs, expected {k}")
    degrees = degree_array(rhs.cross.order)[rhs.indices]
    eigenvalues = operator_eigenvalue(OperatorKind.JUMP_ALPHA_S, tc, degrees)
    return rhs.with_values(rhs.values / np.prod(eigenvalues, axis=1))


def solve_second_moment(tc: TransmissionCoefficients, rhs: TensorSpectralField) -> TensorSpectralField:
    return solve_kth_moment(tc, rhs, 2)


def propagate_moment(moment: TensorSpectralField, points: Sequence) -> float:
    """
    Evaluate a k-leg trace moment at k points off the sphere.

    Each leg is extended harmonically into the subdomain of its point; the
    sides recorded on the moment must match those subdomains.
    """
    points = [np.asarray(x, dtype=float).reshape(3) for x in points]
    if len(points) != moment.legs:
        raise UsageError(f"Moment has {moment.legs} legs, got {len(points)} points")
    term = moment.values.copy()
    for i, x in enumerate(points):
        side = point_side(x)
        if moment.sides is not None and moment.sides[i] is not side:
            raise UsageError(
                f"Leg {i} holds the {moment.sides[i].value} trace but the point is {side.value}"
            )
        factors = extension_matrix(x, moment.cross.order, side)[0]
        term = term * factors[moment.indices[:, i]]
    return float(np.sum(term))


def propagate_covariance(moment: TensorSpectralField, x1, x2) -> float:
    """Cov[u'](x1, x2) from the second trace moment."""
    if moment.legs != 2:
        raise UsageError(f"Covariance needs a two-leg moment, got {moment.legs}")
    return propagate_moment(moment, [x1, x2])


def shape_derivative_moment(
    tc: TransmissionCoefficients,
    nominal: NominalTraceData,
    model: PerturbationModel,
    cross_order: int,
    points: Sequence,
) -> float:
    """k-th moment of u' at k points, k = len(points); sides follow the points."""
    points = [np.asarray(x, dtype=float).reshape(3) for x in points]
    k = len(points)
    sides = tuple(point_side(x) for x in points)
    cross = build_cross(cross_order, k)
    rhs = assemble_kth_moment_rhs(tc, nominal, model, k, cross, sides)
    return propagate_moment(solve_kth_moment(tc, rhs, k), points)


def shape_derivative_covariance(
    tc: TransmissionCoefficients,
    nominal: NominalTraceData,
    model: PerturbationModel,
    cross_order: int,
    x1,
    x2,
) -> float:
    return shape_derivative_moment(tc, nominal, model, cross_order, [x1, x2])


def tensor_sobolev_norm(moment: TensorSpectralField, s: float) -> float:
    """Mixed norm sqrt(sum prod_i (1 + l_i)^(2s) |M|^2)."""
    degrees = degree_array(moment.cross.order)[moment.indices]
    weights = np.prod((1.0 + degrees) ** (2.0 * s), axis=1)
    return float(np.sqrt(np.sum(weights * moment.values ** 2)))


def exchange_asymmetry(moment: TensorSpectralField) -> float:
    """max |M[i, j] - M[j, i]| over the stored entries of a two-leg moment."""
    if moment.legs != 2:
        raise UsageError(f"Exchange symmetry applies to two-leg moments, got {moment.legs}")
    lookup = {(int(i), int(j)): v for (i, j), v in zip(moment.indices, moment.values)}
    return max((abs(v - lookup.get((j, i), 0.0)) for (i, j), v in lookup.items()), default=0.0)


def karhunen_loeve_model(
    kernel: Callable[[np.ndarray], np.ndarray],
    band_limit: int,
    nodes: Optional[int] = None,
    tolerance: float = 1e-14,
) -> PerturbationModel:
    """
    Separable model for an isotropic covariance k(x . y).

    By the addition theorem the eigenfunctions are the Y_{l,m} with
    eigenvalues 2 pi int_{-1}^{1} k(t) P_l(t) dt. Degrees with negligible
    eigenvalue are dropped; clearly negative ones mean k is not a covariance.
    """
    nodes = nodes or max(64, 4 * (band_limit + 1))
    t, w = np.polynomial.legendre.leggauss(nodes)
    values = np.asarray(kernel(t), dtype=float)
    eigenvalues = np.array(
        [2.0 * np.pi * np.dot(w, values * eval_legendre(l, t)) for l in range(band_limit + 1)]
    )
    largest = float(np.max(np.abs(eigenvalues))) if eigenvalues.size else 0.0
    if np.any(eigenvalues < -tolerance * max(largest, 1.0)):
        raise DomainError("Kernel is not positive semidefinite on the sphere")

    modes: List[Tuple[float, SpectralField]] = []
    for l, sigma in enumerate(eigenvalues):
        if sigma <= tolerance * max(largest, 1.0):
            continue
        modes.extend((float(sigma), SpectralField.unit(band_limit, l, m)) for m in range(-l, l + 1))
    logger.info(f"Karhunen-Loeve expansion kept {len(modes)} modes up to L={band_limit}")
    return PerturbationModel(modes=modes)


def kappa_covariance(model: PerturbationModel, x, y) -> float:
    """Cov[kappa](x, y) = sum_j sigma_j phi_j(x) phi_j(y) for unit vectors x, y."""
    if not model.is_separable:
        return float(model.kernel(np.dot(np.asarray(x, float), np.asarray(y, float))))
    return float(
        sum(sigma * synthesize(phi, x)[0] * synthesize(phi, y)[0] for sigma, phi in model.modes)
    )
