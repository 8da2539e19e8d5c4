"""
Moment estimators and error studies against the benchmark problems.
"""

import logging
from typing import List, Optional, Sequence, Tuple

import numpy as np

from core.benchmarks import (
    SampledSolution,
    example1_exact_covariance,
    example1_exact_mean,
    example1_exact_solution,
    example1_nominal_solution,
    example1_nominal_trace,
    example2_nominal_trace,
    uniform_amplitude_rule,
)
from core.errors import DomainError, UsageError
from core.models import (
    Example1Config,
    MomentEstimate,
    MomentQuantity,
    NominalTraceData,
    PerturbationModel,
    SpectralField,
    StudyReport,
    StudyRow,
    TransmissionCoefficients,
)
from core.moments import build_cross, shape_derivative_moment, unknown_count

logger = logging.getLogger("sphere_moments")

ERROR_FLOOR = 1e-13
MC_BATCH = 65536


def _as_points(points) -> np.ndarray:
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    if pts.shape[1] != 3:
        raise UsageError(f"Points must be 3-vectors, got shape {pts.shape}")
    return pts


def estimate_moments_quadrature(
    solution: SampledSolution,
    points,
    k: int,
    nodes: int = 64,
) -> MomentEstimate:
    """Raw and central k-th moments by Gauss-Legendre quadrature over a ~ U[-1, 1]."""
    if k < 1:
        raise UsageError(f"Moment order must be positive, got {k}")
    pts = _as_points(points)
    a, w = uniform_amplitude_rule(nodes)
    values = solution(pts, a)
    mean = w @ values
    return MomentEstimate(
        order=k,
        raw=w @ values ** k,
        mean=mean,
        central=w @ (values - mean) ** k,
    )


def estimate_moments_mc(
    solution: SampledSolution,
    points,
    k: int,
    samples: int,
    seed: int,
    batch_size: int = MC_BATCH,
) -> MomentEstimate:
    """
    Monte Carlo moments with standard errors; reproducible for a fixed seed.

    Amplitudes are drawn in batches from one numpy Generator, so results do
    not depend on the batch size.
    """
    if k < 1:
        raise UsageError(f"Moment order must be positive, got {k}")
    if samples < 2:
        raise UsageError(f"Monte Carlo needs at least 2 samples, got {samples}")
    pts = _as_points(points)
    rng = np.random.default_rng(seed)
    draws = []
    remaining = samples
    while remaining > 0:
        size = min(batch_size, remaining)
        draws.append(solution(pts, rng.uniform(-1.0, 1.0, size)))
        remaining -= size
    values = np.concatenate(draws, axis=0)
    mean = values.mean(axis=0)
    central_terms = (values - mean) ** k
    raw_terms = values ** k
    root = np.sqrt(samples)
    logger.debug(f"Monte Carlo: {samples} samples at {pts.shape[0]} points (seed {seed})")
    return MomentEstimate(
        order=k,
        raw=raw_terms.mean(axis=0),
        mean=mean,
        central=central_terms.mean(axis=0),
        raw_se=raw_terms.std(axis=0, ddof=1) / root,
        mean_se=values.std(axis=0, ddof=1) / root,
        central_se=central_terms.std(axis=0, ddof=1) / root,
    )


def fit_loglog(parameters: Sequence[float], errors: Sequence[float]) -> Tuple[float, float, float]:
    """Least-squares line through (log parameter, log error): (slope, intercept, r^2)."""
    x = np.log(np.asarray(parameters, dtype=float))
    y = np.log(np.asarray(errors, dtype=float))
    if np.ptp(y) == 0.0:
        return 0.0, float(y[0]), 1.0
    slope, intercept = np.polyfit(x, y, deg=1)
    residual = y - (slope * x + intercept)
    r_squared = 1.0 - float(np.sum(residual ** 2)) / float(np.sum((y - y.mean()) ** 2))
    return float(slope), float(intercept), r_squared


def _fit_errors(rows: List[StudyRow]) -> List[float]:
    """Errors for the log-log fit, raised to ERROR_FLOOR * |reference| so the logarithm stays finite."""
    errors = []
    for row in rows:
        floor = max(ERROR_FLOOR * abs(row.reference), np.finfo(float).tiny)
        if row.error < floor:
            logger.warning(f"Error {row.error:.3e} at parameter {row.parameter} clamped to {floor:.3e} for the fit")
        errors.append(max(row.error, floor))
    return errors



def _check_epsilons(epsilons: Sequence[float]) -> List[float]:
    epsilons = [float(e) for e in epsilons]
    if len(epsilons) < 3:
        raise UsageError(f"A linearization study needs at least 3 epsilons, got {len(epsilons)}")
    if any(b >= a for a, b in zip(epsilons, epsilons[1:])):
        raise UsageError("Epsilons must be strictly decreasing")
    return epsilons


def _check_points(points: np.ndarray, epsilon: float) -> None:
    r = np.linalg.norm(points, axis=1)
    if np.any((r > 1.0 - epsilon) & (r < 1.0 + epsilon)):
        raise DomainError(f"Evaluation points must stay outside the shell 1 +/- {epsilon}")


def linearization_error_study(
    cfg: Example1Config,
    epsilons: Sequence[float],
    points,
    quantity: MomentQuantity = MomentQuantity.COVARIANCE,
    cross_order: int = 4,
    band_limit: int = 8,
    nodes: int = 64,
) -> StudyReport:
    """
    Error of the first-order moment approximation on the radial benchmark.

    mean:               max_x |E[u^eps](x) - u0(x)|                      (slope ~ 2)
    covariance:         max_(x,y) |Cov[u^eps](x, y) - eps^2 Cov[u'](x, y)| (slope ~ 4)
    raw_second_moment:  same with E[(u^eps - u0)(x) (u^eps - u0)(y)]      (slope ~ 4)
    """
    tc = cfg.tc
    epsilons = _check_epsilons(epsilons)
    quantity = MomentQuantity(quantity)
    pts = _as_points(points)
    _check_points(pts, epsilons[0])
    pairs = [(i, j) for i in range(len(pts)) for j in range(i, len(pts))]

    shape_covariance = {}
    if quantity is not MomentQuantity.MEAN:
        reference_cfg = Example1Config(tc, epsilons[0])
        nominal = example1_nominal_trace(reference_cfg, band_limit)
        model = PerturbationModel.uniform_single_mode(SpectralField.constant(0, 1.0))
        for i, j in pairs:
            shape_covariance[(i, j)] = shape_derivative_moment(
                tc, nominal, model, cross_order, [pts[i], pts[j]]
            )

    u0 = np.asarray(example1_nominal_solution(tc, pts))
    a, w = uniform_amplitude_rule(nodes)
    rows = []
    for eps in epsilons:
        eps_cfg = Example1Config(tc, eps)
        if quantity is MomentQuantity.MEAN:
            exact = np.array([example1_exact_mean(eps_cfg, x) for x in pts])
            deviations = np.abs(exact - u0)
            worst = int(np.argmax(deviations))
            rows.append(StudyRow(eps, float(deviations[worst]), float(exact[worst])))
            continue

        if quantity is MomentQuantity.COVARIANCE:
            exact = {(i, j): example1_exact_covariance(eps_cfg, pts[i], pts[j], nodes) for i, j in pairs}
        else:
            shifted = example1_exact_solution(eps_cfg, pts, a) - u0
            exact = {(i, j): float(w @ (shifted[:, i] * shifted[:, j])) for i, j in pairs}
        deviations = {key: abs(exact[key] - eps * eps * shape_covariance[key]) for key in pairs}
        worst = max(deviations, key=deviations.get)
        rows.append(StudyRow(eps, deviations[worst], exact[worst]))

    slope, intercept, r_squared = fit_loglog([r.parameter for r in rows], _fit_errors(rows))
    logger.info(f"Linearization study ({quantity.value}): slope {slope:.3f}, R^2 {r_squared:.4f}")
    return StudyReport(
        rows=rows,
        slope=slope,
        intercept=intercept,
        r_squared=r_squared,
        metadata={"study": "linearization", "quantity": quantity.value, "cross_order": cross_order},
    )


def example2_variance(
    tc: TransmissionCoefficients,
    cross_order: int,
    point,
    nominal: Optional[NominalTraceData] = None,
) -> float:
    """Var[u'](x) for the non-symmetric benchmark with kappa = a, a ~ U[-1, 1]."""
    nominal = nominal or example2_nominal_trace(tc, max(cross_order, 1))
    model = PerturbationModel.uniform_single_mode(SpectralField.constant(0, 1.0))
    x = np.asarray(point, dtype=float)
    return shape_derivative_moment(tc, nominal, model, cross_order, [x, x])


def convergence_study(
    tc: TransmissionCoefficients,
    p_list: Sequence[int],
    point,
    reference_p: int,
) -> StudyReport:
    """
    Self-convergence of Var[u'](x) in the cross order p on the non-symmetric benchmark.

    Errors are measured against the value at reference_p, which must be at least
    twice the largest p studied.
    """
    p_list = [int(p) for p in p_list]
    if not p_list:
        raise UsageError("p_list must not be empty")
    if reference_p < 2 * max(p_list):
        raise UsageError(
            f"reference_p = {reference_p} must be at least 2 * max(p_list) = {2 * max(p_list)}"
        )
    nominal = example2_nominal_trace(tc, reference_p)
    reference = example2_variance(tc, reference_p, point, nominal)
    rows = []
    for p in p_list:
        value = example2_variance(tc, p, point, nominal)
        rows.append(StudyRow(float(p), abs(reference - value), reference))
        logger.debug(f"p={p}: Var = {value:.17g}, reference {reference:.17g}")

    slope, intercept, r_squared = fit_loglog([r.parameter for r in rows], _fit_errors(rows))
    logger.info(f"Convergence study at {tuple(point)}: rate {-slope:.3f}, R^2 {r_squared:.4f}")
    return StudyReport(
        rows=rows,
        slope=slope,
        intercept=intercept,
        r_squared=r_squared,
        metadata={
            "study": "convergence",
            "point": [float(c) for c in point],
            "reference_p": reference_p,
            "unknowns": {p: unknown_count(build_cross(p, 2)) for p in p_list},
        },
    )
