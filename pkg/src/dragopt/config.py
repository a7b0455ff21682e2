"""Pipeline configuration: defaults, key=value config files, profiles."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from pathlib import Path

from .errors import UsageError

IMAGE_WIDTH = 112
IMAGE_HEIGHT = 84


@dataclass
class PipelineConfig:
    """Every knob of the pipeline, desk-scale defaults.

    The full-scale profile (paper-sized runs) is selected with
    ``profile=full`` in a config file; explicit keys still win.
    """

    # flow domain and solver
    domain_lx: float = 4.0
    domain_ly: float = 3.0
    resolution: int = 64          # cells per unit length
    nu: float = 0.02
    rho: float = 1.0
    v_in: float = 1.0
    steady_tol: float = 1e-6
    max_iters: int = 200_000

    # shape generation
    r_min: float = 0.3
    r_max: float = 0.7
    n_angles: int = 16
    fourier_k: int = 6
    center_x: float = 1.25
    center_y: float = 1.5

    # networks
    latent_dim: int = 20
    dense_units: int = 256
    epochs: int = 100
    batch_size: int = 64
    learning_rate: float = 1e-3

    # surrogate + acquisition
    ssgp_m: int = 1000
    sigma_f: float = 1.0
    sigma_n: float = 0.1
    starts: int = 2000
    candidates: int = 25
    dedup_radius: float = 0.5

    # orchestration
    seed: int = 0
    strict: bool = False          # bitwise-reproducible mode (pins thread counts)
    workers: int = 0              # 0 = use all available cores

    def replace(self, **kw) -> "PipelineConfig":
        return dataclasses.replace(self, **kw)


_FULL_PROFILE = {
    "epochs": 200,
    "dense_units": 256,
}

_BOOL_KEYS = {"strict"}
_INT_KEYS = {
    "resolution", "n_angles", "fourier_k", "latent_dim", "dense_units",
    "epochs", "batch_size", "ssgp_m", "starts", "candidates", "seed",
    "max_iters", "workers",
}
_FLOAT_KEYS = {
    "domain_lx", "domain_ly", "nu", "rho", "v_in", "r_min", "r_max",
    "center_x", "center_y", "learning_rate", "sigma_f", "sigma_n",
    "dedup_radius", "steady_tol",
}


def parse_config_text(text: str) -> PipelineConfig:
    """Parse ``key=value`` lines ('#' comments allowed) into a PipelineConfig."""
    raw: dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"config line {lineno}: expected key=value, got {line!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        raw[key] = value

    fields = {f.name for f in dataclasses.fields(PipelineConfig)}
    kwargs: dict[str, object] = {}
    profile = raw.pop("profile", "desk")
    if profile not in ("desk", "full"):
        raise UsageError(f"unknown profile {profile!r} (expected desk or full)")
    if profile == "full":
        kwargs.update(_FULL_PROFILE)

    for key, value in raw.items():
        if key not in fields:
            raise UsageError(f"unknown config key {key!r}")
        try:
            if key in _BOOL_KEYS:
                kwargs[key] = value.lower() in ("1", "true", "yes")
            elif key in _INT_KEYS:
                kwargs[key] = int(value)
            elif key in _FLOAT_KEYS:
                kwargs[key] = float(value)
            else:
                kwargs[key] = value
        except ValueError as exc:
            raise UsageError(f"config key {key}: {exc}") from exc
    return PipelineConfig(**kwargs)


def load_config(path: str | Path | None) -> PipelineConfig:
    if path is None:
        return PipelineConfig()
    p = Path(path)
    if not p.is_file():
        raise UsageError(f"config file not found: {p}")
    return parse_config_text(p.read_text())


def dump_config(cfg: PipelineConfig) -> str:
    lines = [f"{f.name}={getattr(cfg, f.name)}" for f in dataclasses.fields(cfg)]
    return "\n".join(lines) + "\n"
