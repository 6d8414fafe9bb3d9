"""Flat ``key=value`` experiment configuration."""

from __future__ import annotations

import os
from dataclasses import dataclass, fields, replace

from .bandpass import UNITS, BandSpec
from .textio import parse_kv


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ExperimentConfig:
    band_r_lo: float = 1.0
    band_r_hi: float = 2.0
    band_units: str = "radians"
    degree: int = 2
    seed: int = 0

    radial_kind: str = "jittered"
    radial_spacing: float | None = None  # default: 1/(1.25 * critical density)
    radial_jitter: float = 0.25
    radial_halfwidth: float = 40.0
    radial_offset: float = 0.0
    radial_seed: int | None = None
    radial_file: str | None = None
    radial_window: float | None = None

    angular_kind: str = "equispaced"
    angular_count: int | None = None  # default: 2N+1
    angular_offset: float = 0.0
    angular_file: str | None = None

    model_kind: str = "random"
    model_file: str | None = None
    model_seed: int | None = None
    model_poly_degree: int = 3
    model_scale: float = 1.0
    model_disc_radius: float = 3.0

    noise_sd: float = 0.0
    noise_seed: int | None = None

    recon_synth_spacing: float | None = None
    recon_synth_halfwidth: float | None = None  # default: radial halfwidth
    recon_ridge: float | None = None
    recon_cg_tol: float = 1e-8
    recon_cg_max_iter: int = 2000
    recon_gram_cutoff: float = 1e-8

    raster_size: int = 128
    raster_extent: float = 10.0
    raster_order: int = 256
    raster_enabled: bool = True

    verify_models: int = 20
    verify_k_max: int = 5

    output_dir: str = "out"

    @property
    def band(self) -> BandSpec:
        return BandSpec(self.band_r_lo, self.band_r_hi, self.band_units)

    def seed_for(self, name: str) -> int:
        value = getattr(self, f"{name}_seed")
        return self.seed if value is None else value

    def with_overrides(self, **kw) -> "ExperimentConfig":
        cfg = replace(self, **{k: v for k, v in kw.items() if v is not None})
        cfg.check()
        return cfg

    def check(self) -> None:
        try:
            band = self.band
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        if self.band_units not in UNITS:
            raise ConfigError(f"band.units must be one of {UNITS}")
        if self.degree < 0:
            raise ConfigError("degree must be non-negative")
        if self.radial_kind not in ("uniform", "jittered", "file"):
            raise ConfigError("grid.radial.kind must be uniform, jittered or file")
        if self.angular_kind not in ("equispaced", "file"):
            raise ConfigError("grid.angular.kind must be equispaced or file")
        if self.model_kind not in ("random", "zero", "disc", "file"):
            raise ConfigError("model.kind must be random, zero, disc or file")
        for kind, path, key in ((self.radial_kind, self.radial_file, "grid.radial.file"),
                                (self.angular_kind, self.angular_file, "grid.angular.file"),
                                (self.model_kind, self.model_file, "model.file")):
            if kind == "file":
                if not path:
                    raise ConfigError(f"{key} is required")
                if not os.path.isfile(path):
                    raise ConfigError(f"{key}: no such file {path!r}")
        if self.radial_spacing is not None and not self.radial_spacing > 0:
            raise ConfigError("grid.radial.spacing must be positive")
        if not 0 <= self.radial_jitter < 0.5:
            raise ConfigError("grid.radial.jitter must lie in [0, 0.5)")
        if not self.radial_halfwidth > 0:
            raise ConfigError("grid.radial.halfwidth must be positive")
        if self.angular_count is not None and self.angular_count < 1:
            raise ConfigError("grid.angular.count must be positive")
        if self.noise_sd < 0:
            raise ConfigError("noise.sd must be non-negative")
        if not 0 < self.recon_cg_tol <= 1e-2:
            raise ConfigError("recon.cg_tol must lie in (0, 1e-2]")
        if self.recon_ridge is not None and self.recon_ridge < 0:
            raise ConfigError("recon.ridge must be non-negative")
        if self.recon_synth_spacing is not None and not 0 < self.recon_synth_spacing <= band.nyquist_spacing:
            raise ConfigError("recon.synth_spacing must be positive and at most the Nyquist spacing")
        if self.raster_size < 1 or not self.raster_extent > 0:
            raise ConfigError("raster.size and raster.extent must be positive")
        if self.raster_order < 32:
            raise ConfigError("raster.order must be at least 32")
        if not 0 <= self.verify_k_max <= 8:
            raise ConfigError("verify.k_max must lie in [0, 8]")


def _key(name: str) -> str:
    group, _, rest = name.partition("_")
    if group in ("radial", "angular"):
        return f"grid.{group}.{rest}"
    if group in ("band", "model", "noise", "recon", "raster", "verify", "output") and rest:
        return f"{group}.{rest}"
    return name


KEYS = {_key(f.name): f for f in fields(ExperimentConfig)}


def _convert(field, raw: str):
    kind = str(field.type)
    if raw.lower() in ("", "none") and "None" in kind:
        return None
    if kind.startswith("bool"):
        if raw.lower() in ("1", "true", "yes", "on"):
            return True
        if raw.lower() in ("0", "false", "no", "off"):
            return False
        raise ValueError(f"not a boolean: {raw!r}")
    if kind.startswith("int"):
        return int(raw)
    if kind.startswith("float"):
        return float(raw)
    return raw


def parse_config(text: str, base_dir: str = ".") -> ExperimentConfig:
    """Parse config text; unknown keys and bad values raise ``ConfigError``.

    Relative file paths are resolved against ``base_dir``.
    """
    try:
        kv = parse_kv(text)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    values = {}
    for key, raw in kv.items():
        if key not in KEYS:
            raise ConfigError(f"unknown key {key!r}")
        field = KEYS[key]
        try:
            value = _convert(field, raw)
        except ValueError as exc:
            raise ConfigError(f"{key}: {exc}") from exc
        if field.name.endswith("_file") and value and not os.path.isabs(value):
            value = os.path.join(base_dir, value)
        values[field.name] = value
    cfg = ExperimentConfig(**values)
    cfg.check()
    return cfg


def load_config(path: str | None) -> ExperimentConfig:
    if path is None:
        cfg = ExperimentConfig()
        cfg.check()
        return cfg
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from exc
    return parse_config(text, os.path.dirname(os.path.abspath(path)))


def config_to_text(cfg: ExperimentConfig) -> str:
    lines = []
    for key, field in KEYS.items():
        value = getattr(cfg, field.name)
        lines.append(f"{key}={'none' if value is None else str(value).lower() if isinstance(value, bool) else value}")
    return "\n".join(lines) + "\n"
