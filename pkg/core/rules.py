"""
Validation rules and limits for sphere-moments run configurations.

This module defines the admissible ranges of every configuration field,
where the tool keeps its own log files, and the checks a resolved
RunConfig must pass before any solve starts.
"""

from pathlib import Path
from typing import List

import numpy as np

from core.models import Benchmark, MomentQuantity, RunConfig, StudyKind

HOME = Path.home()

# ---------------------------------------------------------------------------
# APP_DATA_DIR: Where this tool stores its own logs.
# ---------------------------------------------------------------------------
APP_DATA_DIR = HOME / ".sphere_moments"
APP_LOG_DIR = APP_DATA_DIR / "logs"
APP_LOG_FILE = APP_LOG_DIR / "run.log"

# ---------------------------------------------------------------------------
# Limits on discretisation parameters. The tensor moments grow like
# p^k log(p)^(k-1), so the cross order is capped to keep runs interactive.
# ---------------------------------------------------------------------------
MAX_BAND_LIMIT = 256
MAX_CROSS_ORDER = 256
MAX_MOMENT_ORDER = 6
MIN_STUDY_POINTS = 3

# ---------------------------------------------------------------------------
# INTERFACE_TOLERANCE: Points closer than this to the unit sphere are
# treated as lying on the interface.
# ---------------------------------------------------------------------------
INTERFACE_TOLERANCE = 1e-9


def is_on_interface(point) -> bool:
    """Return True if the point lies on the reference sphere."""
    return abs(float(np.linalg.norm(np.asarray(point, dtype=float))) - 1.0) <= INTERFACE_TOLERANCE


def is_strictly_decreasing(values: List[float]) -> bool:
    return all(b < a for a, b in zip(values, values[1:]))


def validate_run_config(cfg: RunConfig) -> List[str]:
    """
    Names of the configuration fields that violate a rule.

    An empty list means the configuration is valid:
      1. alpha_minus, alpha_plus > 0 and 0 < epsilon < 1.
      2. moment_order >= 1 and cross_order <= band_limit.
      3. Evaluation points are 3-vectors off the interface.
      4. Study lists have at least 3 entries; epsilons strictly decrease.
    """
    bad: List[str] = []

    if cfg.benchmark not in {b.value for b in Benchmark}:
        bad.append("benchmark")
    if not cfg.alpha_minus > 0:
        bad.append("alpha_minus")
    if not cfg.alpha_plus > 0:
        bad.append("alpha_plus")
    if not 0.0 < cfg.epsilon < 1.0:
        bad.append("epsilon")
    if not 0 <= cfg.band_limit <= MAX_BAND_LIMIT:
        bad.append("band_limit")
    if not 0 <= cfg.cross_order <= min(cfg.band_limit, MAX_CROSS_ORDER):
        bad.append("cross_order")
    if not 1 <= cfg.moment_order <= MAX_MOMENT_ORDER:
        bad.append("moment_order")

    points = cfg.evaluation_points
    if not points or any(len(p) != 3 or is_on_interface(p) for p in points):
        bad.append("evaluation_points")

    if len(cfg.epsilons) < MIN_STUDY_POINTS or not is_strictly_decreasing(cfg.epsilons) \
            or any(not 0.0 < e < 1.0 for e in cfg.epsilons):
        bad.append("epsilons")
    if len(cfg.p_list) < MIN_STUDY_POINTS or any(p < 0 for p in cfg.p_list):
        bad.append("p_list")
    if cfg.p_list and cfg.reference_p < 2 * max(cfg.p_list):
        bad.append("reference_p")

    if cfg.mc_samples < 2:
        bad.append("mc_samples")
    if cfg.quadrature_nodes < 2:
        bad.append("quadrature_nodes")
    if cfg.study not in {s.value for s in StudyKind}:
        bad.append("study")
    if cfg.quantity not in {q.value for q in MomentQuantity}:
        bad.append("quantity")

    return bad


def is_config_valid(cfg: RunConfig) -> bool:
    return not validate_run_config(cfg)
