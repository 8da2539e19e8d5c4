"""
Shape derivative of the transmission problem on the reference sphere.

For a normal perturbation kappa the shape derivative u' is harmonic off the
sphere, decays at infinity and satisfies the jump conditions

    [[u']]              = g_D = -[[du0/dn]] kappa
    [[alpha du'/dn]]    = g_N = div_G(kappa [[alpha grad_G u0]])

Eliminating the normal derivatives with the Dirichlet-to-Neumann maps gives
one diagonal equation for the exterior trace.
"""

import logging
from typing import Optional, Tuple

import numpy as np

from core.errors import DomainError, InvariantViolation, UsageError
from core.harmonics import analyze, build_grid, sobolev_norm, surface_divergence, synthesize_on_grid
from core.models import (
    NominalTraceData,
    OperatorKind,
    QuadratureGrid,
    ShapeDerivativeTrace,
    SpectralField,
    TransmissionCoefficients,
)
from core.operators import (
    apply,
    boundary_operator,
    evaluate_exterior,
    evaluate_interior,
    solve_jump,
)
from core.rules import INTERFACE_TOLERANCE

logger = logging.getLogger("sphere_moments")

ALIASING_THRESHOLD = 1e-8
RESIDUAL_TOLERANCE = 1e-10


def _truncate_with_check(field: SpectralField, band_limit: int, label: str) -> Tuple[SpectralField, float]:
    """Drop degrees above band_limit; returns the field and the relative energy dropped."""
    total = float(np.sum(field.coefficients ** 2))
    kept = field.with_band_limit(band_limit)
    fraction = (total - float(np.sum(kept.coefficients ** 2))) / total if total > 0.0 else 0.0
    if fraction > ALIASING_THRESHOLD:
        logger.warning(
            f"{label}: {fraction:.3e} of the energy lies above L={band_limit} and was truncated"
        )
    return kept, fraction


def dirichlet_jump_diagnostic(
    nominal: NominalTraceData,
    kappa: SpectralField,
    grid: Optional[QuadratureGrid] = None,
    band_limit: Optional[int] = None,
) -> Tuple[SpectralField, float]:
    """
    g_D = -[[du0/dn]] kappa and the relative energy truncated above band_limit.

    Both factors are spectral, so the product is formed on a grid wide enough
    to project it without aliasing; a narrower grid is replaced by one.
    """
    grid = grid or nominal.grid
    band_limit = nominal.band_limit if band_limit is None else band_limit
    wide = max(nominal.band_limit, band_limit) + kappa.band_limit
    if grid.exactness < 2 * wide:
        logger.debug(f"Dirichlet jump: oversampling on the L={wide} grid")
        grid = build_grid(wide)
    jump_values = synthesize_on_grid(nominal.jump_normal_derivative, grid)
    kappa_values = synthesize_on_grid(kappa, grid)
    product = analyze(-jump_values * kappa_values, grid, wide)
    return _truncate_with_check(product, band_limit, "Dirichlet jump")


def neumann_jump_diagnostic(
    nominal: NominalTraceData,
    kappa: SpectralField,
    grid: Optional[QuadratureGrid] = None,
    band_limit: Optional[int] = None,
) -> Tuple[SpectralField, float]:
    """
    Weak g_N = div_G(kappa [[alpha grad_G u0]]) and its aliasing diagnostic.

    The tangential jump only exists as samples on the nominal grid. Degrees
    above exactness - L - L_kappa are not resolved there; if the flux is
    nonzero and such degrees are requested, their relative energy is added to
    the diagnostic and a warning is logged.
    """
    if grid is not None and grid.node_count != nominal.grid.node_count:
        raise UsageError("The tangential jump is sampled on the nominal grid; pass that grid or none")
    grid = nominal.grid
    band_limit = nominal.band_limit if band_limit is None else band_limit
    kappa_values = synthesize_on_grid(kappa, grid)
    flux = nominal.jump_tangential_gradient.scaled(kappa_values)
    wanted = band_limit + kappa.band_limit
    wide = max(band_limit, min(wanted, grid.exactness // 2))
    divergence = surface_divergence(flux, wide)
    kept, fraction = _truncate_with_check(divergence, band_limit, "Neumann jump")

    resolved = grid.exactness - nominal.band_limit - kappa.band_limit
    if resolved < wanted and np.any(flux.vectors):
        energy = divergence.coefficients ** 2
        total = float(np.sum(energy))
        aliased = float(np.sum(energy[divergence.degrees > resolved])) / total if total > 0.0 else 1.0
        fraction = max(fraction, aliased)
        logger.warning(
            f"Neumann jump: grid exact to degree {grid.exactness} resolves the product only up to "
            f"degree {resolved}; {aliased:.3e} of the energy may be aliased"
        )
    return kept, fraction


def build_dirichlet_jump(
    nominal: NominalTraceData,
    kappa: SpectralField,
    grid: Optional[QuadratureGrid] = None,
    band_limit: Optional[int] = None,
) -> SpectralField:
    """g_D = -[[du0/dn]] kappa, formed pointwise on the grid and projected to band_limit."""
    return dirichlet_jump_diagnostic(nominal, kappa, grid, band_limit)[0]


def build_neumann_jump(
    nominal: NominalTraceData,
    kappa: SpectralField,
    grid: Optional[QuadratureGrid] = None,
    band_limit: Optional[int] = None,
) -> SpectralField:
    """g_N = div_G(kappa [[alpha grad_G u0]]) in the weak sense, projected to band_limit."""
    return neumann_jump_diagnostic(nominal, kappa, grid, band_limit)[0]


def solve_trace(
    tc: TransmissionCoefficients,
    g_dirichlet: SpectralField,
    g_neumann: SpectralField,
) -> ShapeDerivativeTrace:
    """
    Exterior and interior traces of u' from the jump data.

    Solves [[alpha S]] u'_+ = g_N - alpha_- S_- g_D, then u'_- = u'_+ + g_D.
    Raises InvariantViolation if the H^(-1/2) residual of the solve is not
    negligible relative to the right-hand side.
    """
    band_limit = max(g_dirichlet.band_limit, g_neumann.band_limit)
    g_dirichlet = g_dirichlet.with_band_limit(band_limit)
    g_neumann = g_neumann.with_band_limit(band_limit)

    interior_dtn = boundary_operator(OperatorKind.S_MINUS, tc)
    rhs = g_neumann - tc.alpha_minus * apply(interior_dtn, g_dirichlet)
    trace_plus = solve_jump(tc, rhs)

    jump_operator = boundary_operator(OperatorKind.JUMP_ALPHA_S, tc)
    residual = sobolev_norm(apply(jump_operator, trace_plus) - rhs, -0.5)
    scale = sobolev_norm(rhs, -0.5)
    if residual > RESIDUAL_TOLERANCE * max(scale, np.finfo(float).tiny):
        raise InvariantViolation(
            f"Trace solve residual {residual:.3e} exceeds {RESIDUAL_TOLERANCE:.0e} x {scale:.3e}"
        )

    trace_minus = trace_plus + g_dirichlet
    logger.debug(f"Solved shape-derivative traces up to L={band_limit}")
    return ShapeDerivativeTrace(
        trace_plus=trace_plus,
        trace_minus=trace_minus,
        g_dirichlet=g_dirichlet,
        g_neumann=g_neumann,
    )


def shape_derivative(
    tc: TransmissionCoefficients,
    nominal: NominalTraceData,
    kappa: SpectralField,
) -> ShapeDerivativeTrace:
    """Jump data and traces of u' for one deterministic perturbation."""
    g_dirichlet = build_dirichlet_jump(nominal, kappa)
    g_neumann = build_neumann_jump(nominal, kappa)
    return solve_trace(tc, g_dirichlet, g_neumann)


def evaluate(trace: ShapeDerivativeTrace, point) -> float:
    """u'(x) off the sphere: interior extension of u'_- or exterior extension of u'_+."""
    x = np.asarray(point, dtype=float).reshape(3)
    r = float(np.linalg.norm(x))
    if abs(r - 1.0) <= INTERFACE_TOLERANCE:
        raise DomainError(f"u' is discontinuous across the interface; got |x| = {r}")
    if r < 1.0:
        return float(evaluate_interior(trace.trace_minus, x)[0])
    return float(evaluate_exterior(trace.trace_plus, x)[0])
