"""
Command-line interface: sphere-moments <command> --config <path> [options].

Commands:
  shape-derivative  u'(x) at the evaluation points for kappa = sum of modes
  moments           k-th moment of u' at pairs of evaluation points
  study             linearization or convergence study with a log-log fit
  validate          numerical self-checks of the whole pipeline

Exit codes: 0 success, 2 invalid configuration or arguments,
3 numerical invariant violation, 1 anything else.
"""

import argparse
import logging
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from cli.config import (
    deterministic_kappa,
    kappa_band_limit,
    load_run_config,
    parse_override,
    perturbation_model,
    resolved_config,
)
from core.benchmarks import (
    example1_leading_covariance,
    example1_nominal_trace,
    example1_sampled_solution,
    example2_nominal_trace,
)
from core.errors import (
    ConfigError,
    DomainError,
    InvariantViolation,
    UnsupportedModelError,
    UsageError,
)
from core.harmonics import (
    analyze,
    build_grid,
    eval_ylm,
    spectral_inner,
    surface_divergence,
    surface_gradient,
    synthesize_on_grid,
    tangent_inner,
)
from core.models import (
    Benchmark,
    Example1Config,
    HarmonicIndex,
    NominalTraceData,
    OperatorKind,
    RunConfig,
    SpectralField,
    StudyKind,
    TransmissionCoefficients,
)
from core.moments import (
    assemble_second_moment_rhs,
    build_cross,
    exchange_asymmetry,
    karhunen_loeve_model,
    shape_derivative_moment,
    solve_second_moment,
)
from core.operators import (
    calderon_exterior_dtn,
    calderon_interior_dtn,
    double_layer_quadrature,
    operator_eigenvalue,
    single_layer_quadrature,
    symmetric_interior_dtn,
)
from core.runner import StudyRunner
from core.shape import evaluate, shape_derivative
from core.utils import config_hash, export_to_csv
from core.validation import ERROR_FLOOR, estimate_moments_mc, estimate_moments_quadrature

logger = logging.getLogger("sphere_moments")

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_CONFIG = 2
EXIT_INVARIANT = 3

COMMANDS = ("shape-derivative", "moments", "study", "validate")
IDENTITY_COEFFICIENTS = [(1.0, 1.0), (2.0, 1.0), (1.0, 10.0)]


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="sphere-moments",
        description="Moments of elliptic transmission problems with a random spherical interface.",
    )
    ap.add_argument("command", choices=COMMANDS)
    ap.add_argument("--config", required=True, type=Path, help="JSON run configuration.")
    ap.add_argument("--out", type=Path, default=None, help="Output CSV path (default: stdout).")
    ap.add_argument("--seed", type=int, default=None, help="Override the Monte Carlo seed.")
    ap.add_argument("--kind", choices=[k.value for k in StudyKind], default=None,
                    help="Study kind for the study command.")
    ap.add_argument("--quantity", default=None, help="Quantity for the linearization study.")
    ap.add_argument("--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE",
                    help="Override any configuration key; VALUE is parsed as JSON.")
    return ap


def _overrides(args: argparse.Namespace) -> Dict[str, object]:
    values = dict(parse_override(text) for text in args.overrides)
    if args.seed is not None:
        values["seed"] = args.seed
    if args.kind is not None:
        values["study"] = args.kind
    if args.quantity is not None:
        values["quantity"] = args.quantity
    if args.out is not None:
        values["output_path"] = str(args.out)
    return values


def _footer(cfg: RunConfig, **extra) -> Dict[str, object]:
    footer = {"config_hash": config_hash(resolved_config(cfg)), "seed": cfg.seed}
    footer.update(extra)
    return footer


def _output(cfg: RunConfig) -> Optional[Path]:
    return Path(cfg.output_path) if cfg.output_path else None


def nominal_trace(cfg: RunConfig, extra_band: int = 0) -> NominalTraceData:
    """Nominal jump data of the configured benchmark on a grid wide enough for kappa products."""
    grid = build_grid(cfg.band_limit + extra_band)
    if cfg.benchmark == Benchmark.EXAMPLE1.value:
        return example1_nominal_trace(Example1Config(cfg.tc, cfg.epsilon), cfg.band_limit, grid)
    return example2_nominal_trace(cfg.tc, cfg.band_limit, grid)


def cmd_shape_derivative(cfg: RunConfig) -> int:
    """CSV point_x,point_y,point_z,u_prime for kappa with all amplitudes set to one."""
    model = perturbation_model(cfg)
    nominal = nominal_trace(cfg, kappa_band_limit(model))
    trace = shape_derivative(cfg.tc, nominal, deterministic_kappa(model))
    rows = [(*point, evaluate(trace, point)) for point in cfg.evaluation_points]
    logger.info(f"Shape derivative evaluated at {len(rows)} points")
    export_to_csv(
        ["point_x", "point_y", "point_z", "u_prime"], rows, _output(cfg), _footer(cfg)
    )
    return EXIT_OK


def cmd_moments(cfg: RunConfig) -> int:
    """
    k-th moment of u' for every pair (x1, x2) of evaluation points, x1 before x2.

    Leg 1 sits at x1 and legs 2..k at x2; scaled values multiply by eps^k.
    """
    k = cfg.moment_order
    model = perturbation_model(cfg)
    nominal = nominal_trace(cfg, kappa_band_limit(model))
    points = [np.asarray(p, dtype=float) for p in cfg.evaluation_points]
    rows = []
    for i, x1 in enumerate(points):
        for x2 in points[i:]:
            value = shape_derivative_moment(cfg.tc, nominal, model, cfg.cross_order, [x1] + [x2] * (k - 1))
            rows.append((*x1, *x2, value, cfg.epsilon ** k * value))
    name = "cov_uprime" if k == 2 else f"m{k}_uprime"
    header = ["x1", "y1", "z1", "x2", "y2", "z2", name, "scaled_" + name.split("_")[0]]
    logger.info(f"Order-{k} moments evaluated for {len(rows)} point pairs (p={cfg.cross_order})")
    export_to_csv(header, rows, _output(cfg), _footer(cfg, moment_order=k))
    return EXIT_OK


def cmd_study(cfg: RunConfig, kind: Optional[str] = None) -> int:
    """CSV parameter,error,reference; one footer line per report with its fit."""
    runner = StudyRunner(cfg)
    runner.set_progress_callback(lambda label, done: logger.info(f"[{done}] {label}"))
    with runner.cancel_on_interrupt():
        reports = runner.run(StudyKind(kind or cfg.study))
    if runner.is_cancelled:
        logger.warning(f"Study interrupted; writing {len(reports)} finished report(s)")
    rows = [(row.parameter, row.error, row.reference) for report in reports for row in report.rows]
    footers = [
        _footer(
            cfg,
            slope=report.slope,
            intercept=report.intercept,
            r_squared=report.r_squared,
            rows=len(report.rows),
            cancelled=runner.is_cancelled,
            **{k: v for k, v in report.metadata.items() if k != "seed"},
        )
        for report in reports
    ]
    export_to_csv(["parameter", "error", "reference"], rows, _output(cfg), footers)
    return EXIT_OK


def _operator_identity_residual(max_degree: int = 32) -> float:
    """Largest deviation of the Calderon compositions from the DtN eigenvalues."""
    degrees = np.arange(max_degree + 1)
    residual = 0.0
    for alpha_minus, alpha_plus in IDENTITY_COEFFICIENTS:
        tc = TransmissionCoefficients(alpha_minus, alpha_plus)
        s_minus = operator_eigenvalue(OperatorKind.S_MINUS, tc, degrees)
        s_plus = operator_eigenvalue(OperatorKind.S_PLUS, tc, degrees)
        jump = operator_eigenvalue(OperatorKind.JUMP_ALPHA_S, tc, degrees)
        residual = max(
            residual,
            np.max(np.abs(s_minus - calderon_interior_dtn(degrees))),
            np.max(np.abs(s_plus - calderon_exterior_dtn(degrees))),
            np.max(np.abs(s_minus - symmetric_interior_dtn(degrees))),
            np.max(np.abs(jump - (alpha_minus * s_minus - alpha_plus * s_plus))),
        )
    return float(residual)


def _spectral_checks(seed: int) -> List[Tuple[str, float, float]]:
    rng = np.random.default_rng(seed)
    grid16 = build_grid(16)
    field16 = SpectralField(16, rng.standard_normal(17 * 17))
    roundtrip = analyze(synthesize_on_grid(field16, grid16), grid16, 16)
    roundtrip_error = float(np.max(np.abs(roundtrip.coefficients - field16.coefficients)))

    grid8 = build_grid(8)
    u = SpectralField(8, rng.standard_normal(81))
    w = SpectralField(8, rng.standard_normal(81))
    laplacian = surface_divergence(surface_gradient(u, grid8), 8)
    eigen_error = float(np.max(np.abs(laplacian.coefficients + u.degrees * (u.degrees + 1) * u.coefficients)))

    grad_w = surface_gradient(w, grid8)
    adjoint_error = abs(
        tangent_inner(surface_gradient(u, grid8), grad_w)
        + spectral_inner(u, surface_divergence(grad_w, 8))
    )
    return [
        ("spectral_roundtrip", roundtrip_error, 1e-11),
        ("laplace_beltrami", eigen_error, 1e-9),
        ("green_adjointness", float(adjoint_error), 1e-9),
    ]


def _layer_oracle_residual(max_degree: int = 8) -> float:
    pole = np.array([0.0, 0.0, 1.0])
    residual = 0.0
    for l in range(max_degree + 1):
        field = SpectralField.unit(max_degree, l, 0)
        value = eval_ylm(HarmonicIndex(l, 0), pole)
        single = single_layer_quadrature(field, pole)
        double = double_layer_quadrature(field, pole)
        residual = max(
            residual,
            abs(single - value / (2 * l + 1)),
            abs(double + value / (2 * (2 * l + 1))),
        )
    return residual


def _symmetry_residual(cfg: RunConfig, band_limit: int = 8) -> float:
    """Relative exchange asymmetry of a second moment driven by an isotropic exp(x . y) kernel."""
    nominal = example1_nominal_trace(Example1Config(cfg.tc, cfg.epsilon), band_limit)
    model = karhunen_loeve_model(np.exp, band_limit // 2)
    rhs = assemble_second_moment_rhs(cfg.tc, nominal, model, build_cross(band_limit, 2))
    moment = solve_second_moment(cfg.tc, rhs)
    scale = float(np.max(np.abs(moment.values))) or 1.0
    return exchange_asymmetry(moment) / scale


def _example1_checks(cfg: RunConfig) -> List[Tuple[str, float, float]]:
    e1 = Example1Config(cfg.tc, cfg.epsilon)
    nominal = example1_nominal_trace(e1, cfg.band_limit)
    model = perturbation_model(RunConfig(band_limit=cfg.band_limit))
    points = [np.asarray(p, dtype=float) for p in cfg.evaluation_points]
    equality = 0.0
    for x in points:
        pipeline = cfg.epsilon ** 2 * shape_derivative_moment(cfg.tc, nominal, model, cfg.cross_order, [x, x])
        equality = max(equality, abs(pipeline - example1_leading_covariance(e1, x, x)))

    solution = example1_sampled_solution(e1)
    quad = estimate_moments_quadrature(solution, points, 2, cfg.quadrature_nodes)
    mc = estimate_moments_mc(solution, points, 2, cfg.mc_samples, cfg.seed)
    gap = np.abs(mc.central - quad.central)
    # a deterministic solution leaves only rounding noise in both estimates
    gap = np.where(gap <= ERROR_FLOOR * np.abs(quad.raw), 0.0, gap)
    ratio = np.where(mc.central_se > 0, gap / np.where(mc.central_se > 0, mc.central_se, 1.0), gap)
    return [
        ("example1_equality", equality, 1e-12),
        ("oracle_agreement_se", float(np.max(ratio)), 3.0),
    ]


def cmd_validate(cfg: RunConfig) -> int:
    """CSV check,observed,tolerance,passed; exits 3 if any check fails."""
    checks = [("operator_identities", _operator_identity_residual(), 1e-12)]
    checks += _spectral_checks(cfg.seed)
    checks.append(("layer_potential_oracle", _layer_oracle_residual(), 1e-10))
    checks.append(("exchange_symmetry", _symmetry_residual(cfg), 1e-14))
    checks += _example1_checks(cfg)

    rows = [(name, float(observed), tolerance, bool(observed <= tolerance)) for name, observed, tolerance in checks]
    failed = [name for name, _, _, passed in rows if not passed]
    export_to_csv(
        ["check", "observed", "tolerance", "passed"],
        rows,
        _output(cfg),
        _footer(cfg, failed=failed),
    )
    if failed:
        logger.error(f"Validation failed: {', '.join(failed)}")
        return EXIT_INVARIANT
    logger.info(f"All {len(rows)} validation checks passed")
    return EXIT_OK


def run(argv: Optional[Sequence[str]] = None) -> int:
    """Parse arguments, run one command and return its exit code."""
    args = build_parser().parse_args(argv)
    try:
        cfg = load_run_config(args.config, _overrides(args))
        if args.command == "shape-derivative":
            return cmd_shape_derivative(cfg)
        if args.command == "moments":
            return cmd_moments(cfg)
        if args.command == "study":
            return cmd_study(cfg)
        return cmd_validate(cfg)
    except ConfigError as e:
        logger.error(f"Configuration error: {e}")
        return EXIT_CONFIG
    except (DomainError, UsageError, UnsupportedModelError) as e:
        logger.error(f"{type(e).__name__}: {e}")
        return EXIT_CONFIG
    except InvariantViolation as e:
        logger.error(f"Invariant violated: {e}")
        return EXIT_INVARIANT
    except Exception as e:
        logger.error(f"Fatal error: {e}", exc_info=True)
        return EXIT_FAILURE
