"""Configuration handling for Ritz Bounds."""

import os
from dataclasses import dataclass, field, fields, replace
from pathlib import Path
from typing import Any, Optional

import yaml

OUTPUT_FORMATS = ("text", "csv", "json")
DEFAULT_SEED = 42


@dataclass(frozen=True)
class ToleranceConfig:
    """Numerical tolerances shared by all modules."""

    # None selects max(rows, cols) * machine epsilon per matrix
    rank_tol: Optional[float] = None
    sym_tol: float = 1e-12
    quad_tol: float = 1e-10
    # relative bisection tolerance for secular roots
    secular_tol: float = 1e-14
    # relative eigenvalue threshold used to identify kernels
    kernel_tol: float = 1e-10


@dataclass(frozen=True)
class RunConfig:
    """Main configuration for a command run."""

    tolerances: ToleranceConfig = field(default_factory=ToleranceConfig)
    seed: int = DEFAULT_SEED
    output_format: str = "text"
    mesh_size: int = 4000

    def as_metadata(self) -> dict[str, Any]:
        """Flatten the settings for report metadata."""
        tol = self.tolerances
        return {
            "seed": self.seed,
            "rank_tol": tol.rank_tol,
            "sym_tol": tol.sym_tol,
            "quad_tol": tol.quad_tol,
            "secular_tol": tol.secular_tol,
            "kernel_tol": tol.kernel_tol,
            "mesh_size": self.mesh_size,
        }


def _validate(config: RunConfig) -> RunConfig:
    tol = config.tolerances
    for name in ("sym_tol", "quad_tol", "secular_tol", "kernel_tol"):
        if getattr(tol, name) <= 0:
            raise ValueError(f"Tolerance {name} must be positive, got {getattr(tol, name)}")
    if tol.rank_tol is not None and tol.rank_tol <= 0:
        raise ValueError(f"Tolerance rank_tol must be positive, got {tol.rank_tol}")
    if config.seed < 0:
        raise ValueError(f"Seed must be a nonnegative integer, got {config.seed}")
    if config.output_format not in OUTPUT_FORMATS:
        raise ValueError(
            f"Unknown output format {config.output_format!r}; expected one of {OUTPUT_FORMATS}"
        )
    if config.mesh_size < 100:
        raise ValueError(f"Mesh size must be at least 100, got {config.mesh_size}")
    return config


def _read_yaml(path: Path) -> dict[str, Any]:
    if not path.exists():
        raise ValueError(f"Config file does not exist: {path}")
    try:
        data = yaml.safe_load(path.read_text(encoding="utf-8")) or {}
    except yaml.YAMLError as e:
        raise ValueError(f"Config file {path} is not valid YAML: {e}") from e
    if not isinstance(data, dict):
        raise ValueError(f"Config file {path} must contain a mapping")
    return data


def load_config(config_path: Optional[str] = None, **overrides: Any) -> RunConfig:
    """
    Load configuration from defaults, an optional YAML file, and environment.

    Precedence, lowest first: dataclass defaults, the YAML file, the RITZ_SEED
    environment variable, explicit keyword overrides (CLI flags). Overrides set
    to None are ignored.

    Args:
        config_path: Optional YAML file with top-level keys ``seed``,
                     ``output_format``, ``mesh_size`` and a ``tolerances`` mapping.
        **overrides: Any RunConfig or ToleranceConfig field name.

    Returns:
        Validated RunConfig.
    """
    tolerance_names = {f.name for f in fields(ToleranceConfig)}
    run_names = {f.name for f in fields(RunConfig)} - {"tolerances"}

    tol_values: dict[str, Any] = {}
    run_values: dict[str, Any] = {}

    if config_path is not None:
        data = _read_yaml(Path(config_path))
        for key, value in (data.get("tolerances") or {}).items():
            if key not in tolerance_names:
                raise ValueError(f"Unknown tolerance {key!r} in {config_path}")
            tol_values[key] = value
        for key, value in data.items():
            if key == "tolerances":
                continue
            if key not in run_names:
                raise ValueError(f"Unknown config key {key!r} in {config_path}")
            run_values[key] = value

    env_seed = os.environ.get("RITZ_SEED")
    if env_seed is not None:
        try:
            run_values["seed"] = int(env_seed)
        except ValueError as e:
            raise ValueError(f"RITZ_SEED must be an integer, got {env_seed!r}") from e

    for key, value in overrides.items():
        if value is None:
            continue
        if key in tolerance_names:
            tol_values[key] = value
        elif key in run_names:
            run_values[key] = value
        else:
            raise ValueError(f"Unknown config override {key!r}")

    casts = {"seed": int, "mesh_size": int, "output_format": str}
    try:
        tolerances = replace(ToleranceConfig(), **{k: float(v) for k, v in tol_values.items()})
        run_values = {k: casts[k](v) for k, v in run_values.items()}
        config = replace(RunConfig(tolerances=tolerances), **run_values)
    except (TypeError, ValueError) as e:
        raise ValueError(f"Invalid configuration value: {e}") from e
    return _validate(config)
