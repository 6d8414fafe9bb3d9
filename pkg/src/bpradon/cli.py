"""Command-line front end: ``bpradon {gen-grid,simulate,reconstruct,verify}``."""

from __future__ import annotations

import argparse
import math
import os
import sys

import numpy as np

from . import textio
from .config import ConfigError, ExperimentConfig, load_config
from .errors import BPRadonError, GridNotValidated, NoConvergence, NonUniformGrid, Singular, WrongCount
from .grids import (
    AngularGrid,
    RadialGrid,
    Verdict,
    equispaced_angles,
    make_jittered_grid,
    make_uniform_grid,
    validate_angular_grid,
    validate_radial_grid,
)
from .radon import (
    RasterSpec,
    SampleTable,
    SinogramModel,
    counterexample_norms,
    eval_sinogram,
    moment_check,
    norm_bound_check,
    profile_norm_at,
    random_model,
    sample_sinogram,
)
from .recon import (
    ReconConfig,
    band_projected_disc,
    eval_reconstruction,
    fbp_baseline,
    reconstruct_image,
    reconstruct_pipeline,
)

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_INSUFFICIENT = 2
EXIT_MODEL = 3
EXIT_NOT_VALIDATED = 4
EXIT_NO_CONVERGENCE = 5
EXIT_VERIFY_FAIL = 6


class CommandError(Exception):
    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code


def _path(cfg: ExperimentConfig, name: str) -> str:
    return os.path.join(cfg.output_dir, name)


def build_radial(cfg: ExperimentConfig) -> RadialGrid:
    try:
        if cfg.radial_kind == "file":
            return textio.read_radial(cfg.radial_file)
        spacing = cfg.radial_spacing or 1.0 / (1.25 * cfg.band.critical_density)
        if cfg.radial_kind == "uniform":
            return make_uniform_grid(spacing, cfg.radial_halfwidth, cfg.radial_offset)
        return make_jittered_grid(spacing, cfg.radial_jitter, cfg.radial_halfwidth, cfg.seed_for("radial"))
    except (ValueError, OSError) as exc:
        raise CommandError(EXIT_CONFIG, f"radial grid: {exc}") from exc


def build_angular(cfg: ExperimentConfig) -> AngularGrid:
    try:
        if cfg.angular_kind == "file":
            return textio.read_angular(cfg.angular_file)
        count = cfg.angular_count or 2 * cfg.degree + 1
        return equispaced_angles(count, cfg.angular_offset)
    except (ValueError, OSError) as exc:
        raise CommandError(EXIT_CONFIG, f"angular grid: {exc}") from exc


def build_model(cfg: ExperimentConfig) -> SinogramModel:
    band = cfg.band
    if cfg.model_kind == "file":
        try:
            with open(cfg.model_file) as fh:
                return SinogramModel.from_text(fh.read())
        except (ValueError, KeyError, OSError) as exc:
            raise CommandError(EXIT_MODEL, f"invalid model file {cfg.model_file}: {exc}") from exc
    if cfg.model_kind == "zero":
        return SinogramModel.zero(band, cfg.degree)
    if cfg.model_kind == "disc":
        return band_projected_disc(band, cfg.model_disc_radius)
    return random_model(band, cfg.degree, cfg.seed_for("model"), cfg.model_poly_degree, cfg.model_scale)


def recon_config(cfg: ExperimentConfig, degree: int | None = None) -> ReconConfig:
    try:
        return ReconConfig(
            band=cfg.band,
            degree=cfg.degree if degree is None else degree,
            synth_halfwidth=cfg.recon_synth_halfwidth or cfg.radial_halfwidth,
            synth_spacing=cfg.recon_synth_spacing,
            ridge=cfg.recon_ridge,
            cg_tol=cfg.recon_cg_tol,
            cg_max_iter=cfg.recon_cg_max_iter,
            gram_cutoff=cfg.recon_gram_cutoff,
        )
    except ValueError as exc:
        raise CommandError(EXIT_CONFIG, f"recon: {exc}") from exc


def raster_spec(cfg: ExperimentConfig) -> RasterSpec:
    return RasterSpec(cfg.raster_size, cfg.raster_extent)


def _write(path: str, text: str) -> None:
    with open(path, "w") as fh:
        fh.write(text)


def _write_raster(cfg: ExperimentConfig, stem: str, raster: np.ndarray) -> None:
    c = raster_spec(cfg).coords
    textio.write_pgm(_path(cfg, stem + ".pgm"), raster)
    textio.write_raster_csv(_path(cfg, stem + "_values.csv"), c, c, raster)


# ------------------------------------------------------------------ commands


def cmd_gen_grid(cfg: ExperimentConfig, out=None) -> int:
    out = out or sys.stdout
    radial = build_radial(cfg)
    angular = build_angular(cfg)
    try:
        report = validate_radial_grid(radial, cfg.band, cfg.radial_window)
    except ValueError as exc:
        raise CommandError(EXIT_CONFIG, f"radial grid: {exc}") from exc
    textio.write_radial(_path(cfg, "radial.csv"), radial)
    textio.write_angular(_path(cfg, "angular.csv"), angular)
    _write(_path(cfg, "density_report.txt"), report.to_text())
    print(f"density {report.estimate:.6g} vs critical {report.threshold:.6g}: {report.verdict.name}", file=out)
    return EXIT_OK if report.verdict >= Verdict.UNIQUENESS_OK else EXIT_INSUFFICIENT


def cmd_simulate(cfg: ExperimentConfig, out=None) -> int:
    out = out or sys.stdout
    model = build_model(cfg)
    radial = build_radial(cfg)
    angular = build_angular(cfg)
    table = sample_sinogram(model, radial, angular, cfg.noise_sd, cfg.seed_for("noise"))
    _write(_path(cfg, "model.txt"), model.to_text())
    _write(_path(cfg, "sinogram.csv"), table.to_csv())
    print(f"wrote {len(radial)} x {len(angular)} samples", file=out)
    return EXIT_OK


def cmd_reconstruct(cfg: ExperimentConfig, force: bool = False, compare_fbp: bool = False, out=None) -> int:
    out = out or sys.stdout
    try:
        with open(_path(cfg, "sinogram.csv")) as fh:
            table = SampleTable.from_csv(fh.read())
    except (OSError, ValueError) as exc:
        raise CommandError(EXIT_CONFIG, f"cannot load sinogram.csv: {exc}") from exc
    rcfg = recon_config(cfg)
    report = angular_cond = None
    try:
        report = validate_radial_grid(table.radial, cfg.band, cfg.radial_window)
        angular_cond = validate_angular_grid(table.angular, cfg.degree)
    except (WrongCount, Singular) as exc:
        if not force:
            raise CommandError(EXIT_NOT_VALIDATED, f"angular grid rejected: {exc}") from exc
    except ValueError as exc:
        raise CommandError(EXIT_CONFIG, str(exc)) from exc
    try:
        result = reconstruct_pipeline(table, rcfg, report, angular_cond, force=force)
    except GridNotValidated as exc:
        raise CommandError(EXIT_NOT_VALIDATED, f"{exc} (use --force to override)") from exc
    except NoConvergence as exc:
        raise CommandError(EXIT_NO_CONVERGENCE, str(exc)) from exc
    except Singular as exc:
        raise CommandError(EXIT_NOT_VALIDATED, str(exc)) from exc

    _write(_path(cfg, "recon.csv"), result.to_csv())
    _write(_path(cfg, "diagnostics.txt"), result.diagnostics_text())
    print(f"misfit {result.misfit:.3e}, B/A {result.condition:.3e}", file=out)

    model = None
    model_path = _path(cfg, "model.txt")
    if os.path.isfile(model_path):
        try:
            with open(model_path) as fh:
                model = SinogramModel.from_text(fh.read())
        except (ValueError, KeyError) as exc:
            raise CommandError(EXIT_MODEL, f"invalid model file {model_path}: {exc}") from exc
        s_max = 0.5 * rcfg.synth_halfwidth
        rng = np.random.default_rng(cfg.seed)
        s = rng.uniform(-s_max, s_max, 500)
        phi = rng.uniform(0.0, 2.0 * math.pi, 500)
        truth = eval_sinogram(model, s, phi)
        err = np.linalg.norm(eval_reconstruction(result, s, phi) - truth)
        denom = np.linalg.norm(truth)
        rel = err / denom if denom > 0 else err
        print(f"relative sinogram error {rel:.3e}", file=out)

    raster = raster_spec(cfg)
    try:
        if cfg.raster_enabled:
            _write_raster(cfg, "image", reconstruct_image(result, rcfg, raster, cfg.raster_order))
        if compare_fbp:
            _write_raster(cfg, "fbp", fbp_baseline(table, cfg.band, raster))
    except NonUniformGrid as exc:
        raise CommandError(EXIT_CONFIG, f"--compare-fbp needs uniform grids: {exc}") from exc
    except BPRadonError as exc:
        raise CommandError(EXIT_CONFIG, f"raster: {exc}") from exc
    return EXIT_OK


def verify_lines(cfg: ExperimentConfig) -> list[tuple[str, bool, str]]:
    """(name, passed, detail) for each identity check."""
    band = cfg.band
    rows = []

    # annulus counterexample; R in the band's own units
    R = band.r_hi
    ratios = []
    for n in (2, 10, 100):
        try:
            polar, flat = counterexample_norms(n, max(R, 1.0 / n))
            ratios.append(flat / polar)
            rows.append((f"counterexample n={n}", True, f"polar={polar:.10g} flat={flat:.10g} ratio={flat / polar:.6g}"))
        except BPRadonError as exc:
            rows.append((f"counterexample n={n}", False, str(exc)))
    if len(ratios) == 3:
        # the flat/polar ratio is unbounded in n: no band without a hole admits the bound
        rows.append(("counterexample trend", bool(np.all(np.diff(ratios) > 0)),
                     "ratio " + " < ".join(f"{r:.6g}" for r in ratios)))

    fails = 0
    worst = -math.inf
    for seed in range(cfg.verify_models):
        rep = norm_bound_check(random_model(band, cfg.degree, cfg.seed + seed))
        fails += not rep.satisfied
        worst = max(worst, rep.lower / rep.sino_norm_sq, rep.sino_norm_sq / rep.upper)
    rows.append(("norm bound", fails == 0, f"{cfg.verify_models - fails}/{cfg.verify_models} models, worst ratio {worst:.6f}"))

    worst_m = 0.0
    for seed in range(min(cfg.verify_models, 10)):
        model = random_model(band, cfg.degree, cfg.seed + seed)
        phi = 0.37 * (seed + 1)
        m = np.abs(moment_check(model, cfg.verify_k_max, phi))
        worst_m = max(worst_m, float(m.max() / profile_norm_at(model, phi)))
    rows.append((f"moments k<={cfg.verify_k_max}", worst_m <= 1e-3, f"max |m_k|/||g|| = {worst_m:.3e}"))

    rng = np.random.default_rng(cfg.seed)
    worst_s = 0.0
    for seed in range(min(cfg.verify_models, 10)):
        model = random_model(band, cfg.degree, cfg.seed + seed)
        s = rng.uniform(-20, 20, 100)
        phi = rng.uniform(0, 2 * math.pi, 100)
        worst_s = max(worst_s, float(np.max(np.abs(eval_sinogram(model, s, phi) - eval_sinogram(model, -s, phi + math.pi)))))
    rows.append(("range symmetry", worst_s <= 1e-12, f"max |g(s,phi) - g(-s,phi+pi)| = {worst_s:.3e}"))
    return rows


def cmd_verify(cfg: ExperimentConfig, out=None) -> int:
    out = out or sys.stdout
    rows = verify_lines(cfg)
    text = "".join(f"{'PASS' if ok else 'FAIL'} {name}: {detail}\n" for name, ok, detail in rows)
    _write(_path(cfg, "verify.txt"), text)
    out.write(text)
    return EXIT_OK if all(ok for _, ok, _ in rows) else EXIT_VERIFY_FAIL


COMMANDS = {
    "gen-grid": cmd_gen_grid,
    "simulate": cmd_simulate,
    "reconstruct": cmd_reconstruct,
    "verify": cmd_verify,
}


def make_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="bpradon", description="Sampling and inversion of bandpass Radon data.")
    p.add_argument("command", choices=sorted(COMMANDS))
    p.add_argument("--config", help="key=value configuration file")
    p.add_argument("--seed", type=int, help="global seed (overrides the config)")
    p.add_argument("--out", help="output directory (overrides output.dir)")
    p.add_argument("--force", action="store_true", help="reconstruct even on unvalidated grids")
    p.add_argument("--compare-fbp", action="store_true", help="also write a filtered backprojection raster")
    return p


def main(argv=None) -> int:
    args = make_parser().parse_args(argv)
    try:
        cfg = load_config(args.config).with_overrides(seed=args.seed, output_dir=args.out)
        os.makedirs(cfg.output_dir, exist_ok=True)
        if args.command == "reconstruct":
            return cmd_reconstruct(cfg, force=args.force, compare_fbp=args.compare_fbp)
        return COMMANDS[args.command](cfg)
    except ConfigError as exc:
        print(f"error: bad config: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except CommandError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code


if __name__ == "__main__":
    sys.exit(main())
