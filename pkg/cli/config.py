"""
Run configuration loading for the sphere-moments command line.

Precedence is defaults < JSON config file < command-line flags. Every
`--set key=value` override is parsed as JSON when possible, so numbers and
lists keep their types.
"""

import json
import logging
from dataclasses import asdict, fields
from pathlib import Path
from typing import Dict, List, Optional, Tuple

from core.errors import ConfigError, SphereMomentsError
from core.models import PerturbationModel, RunConfig, SpectralField, flat_index
from core.rules import validate_run_config

logger = logging.getLogger("sphere_moments")

CONFIG_FIELDS = {f.name for f in fields(RunConfig)}
UNIFORM_VARIANCE = 1.0 / 3.0


def parse_override(text: str) -> Tuple[str, object]:
    """Split `key=value`; the value is JSON-decoded, falling back to the raw string."""
    key, sep, raw = text.partition("=")
    key = key.strip()
    if not sep or not key:
        raise ConfigError(f"Override must look like key=value, got {text!r}")
    try:
        value = json.loads(raw)
    except json.JSONDecodeError:
        value = raw
    return key, value


def _read_file(path: Optional[Path]) -> Dict[str, object]:
    if path is None:
        return {}
    try:
        with open(path, "r", encoding="utf-8") as f:
            data = json.load(f)
    except OSError as e:
        raise ConfigError(f"Cannot read config file {path}: {e}", ["config"]) from e
    except json.JSONDecodeError as e:
        raise ConfigError(f"Config file {path} is not valid JSON: {e}", ["config"]) from e
    if not isinstance(data, dict):
        raise ConfigError(f"Config file {path} must hold a JSON object", ["config"])
    return data


def load_run_config(
    path: Optional[Path] = None,
    overrides: Optional[Dict[str, object]] = None,
) -> RunConfig:
    """Resolve and validate a RunConfig; raises ConfigError naming the offending fields."""
    values = _read_file(Path(path) if path is not None else None)
    values.update(overrides or {})

    unknown = sorted(set(values) - CONFIG_FIELDS)
    if unknown:
        raise ConfigError("Unknown configuration keys", unknown)

    try:
        cfg = RunConfig(**values)
        cfg.evaluation_points = [tuple(float(c) for c in p) for p in cfg.evaluation_points]
        cfg.epsilons = [float(e) for e in cfg.epsilons]
        cfg.p_list = [int(p) for p in cfg.p_list]
    except (TypeError, ValueError) as e:
        raise ConfigError(f"Malformed configuration: {e}") from e

    bad = validate_run_config(cfg)
    try:
        perturbation_model(cfg)
    except (SphereMomentsError, AttributeError, KeyError, TypeError, ValueError) as e:
        logger.debug(f"Rejected kappa spec: {e}")
        bad.append("kappa")
    if bad:
        raise ConfigError("Invalid configuration", bad)

    logger.debug(f"Resolved configuration: {resolved_config(cfg)}")
    return cfg


def resolved_config(cfg: RunConfig) -> Dict[str, object]:
    """Config snapshot used for provenance hashing; the output path is not part of it."""
    snapshot = asdict(cfg)
    snapshot.pop("output_path", None)
    snapshot["evaluation_points"] = [list(p) for p in cfg.evaluation_points]
    return snapshot


def _mode_field(spec: Dict[str, object], band_limit: int) -> SpectralField:
    if "constant" in spec:
        return SpectralField.constant(0, float(spec["constant"]))
    harmonics = spec["harmonics"]
    top = max(int(l) for l, _, _ in harmonics)
    if top > band_limit:
        raise ConfigError(f"Mode degree {top} exceeds band_limit {band_limit}", ["kappa"])
    phi = SpectralField.zeros(top)
    for l, m, v in harmonics:
        if abs(int(m)) > int(l):
            raise ConfigError(f"Invalid harmonic ({l}, {m})", ["kappa"])
        phi.coefficients[flat_index(int(l), int(m))] += float(v)
    return phi


def perturbation_model(cfg: RunConfig) -> PerturbationModel:
    """
    Build the perturbation model from the `kappa` spec.

    {"amplitude_law": "uniform", "modes": [{"sigma": s, "constant": c},
                                           {"sigma": s, "harmonics": [[l, m, v], ...]}]}

    An empty spec means kappa = a with a uniform on [-1, 1]. A single uniform
    mode carries every amplitude moment; several modes carry variances only
    (sigma defaults to the uniform variance 1/3).
    """
    spec = cfg.kappa or {}
    law = spec.get("amplitude_law", "uniform")
    if law != "uniform":
        raise ConfigError(f"Unsupported amplitude law {law!r}", ["kappa"])
    mode_specs: List[Dict[str, object]] = spec.get("modes") or [{"constant": 1.0}]

    phis = [_mode_field(m, cfg.band_limit) for m in mode_specs]
    if len(phis) == 1:
        return PerturbationModel.uniform_single_mode(phis[0])
    return PerturbationModel(
        modes=[(float(m.get("sigma", UNIFORM_VARIANCE)), phi) for m, phi in zip(mode_specs, phis)]
    )


def deterministic_kappa(model: PerturbationModel) -> SpectralField:
    """kappa with every amplitude set to one: the sum of the modes."""
    top = max(phi.band_limit for _, phi in model.modes)
    total = SpectralField.zeros(top)
    for _, phi in model.modes:
        total = total + phi
    return total


def kappa_band_limit(model: PerturbationModel) -> int:
    return max(phi.band_limit for _, phi in model.modes)
