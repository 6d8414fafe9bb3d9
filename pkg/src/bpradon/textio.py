"""Plain-text formats: key=value blocks, numeric CSV, PGM rasters."""

from __future__ import annotations

import os

import numpy as np

from .bandpass import BandSpec, Parity, RadialSpectrum
from .grids import AngularGrid, RadialGrid


def fmt(x: float) -> str:
    """Shortest round-tripping decimal without exponent."""
    return np.format_float_positional(float(x), unique=True, trim="-")


def fmt_complex(z: complex) -> str:
    z = complex(z)
    im = fmt(z.imag)
    if not im.startswith("-"):
        im = "+" + im
    return f"{fmt(z.real)}{im}j"


def parse_kv(text: str) -> dict[str, str]:
    """Parse ``key=value`` lines; blank lines and ``#`` comments are skipped."""
    out = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"line {lineno}: expected key=value, got {raw!r}")
        key, value = line.split("=", 1)
        key = key.strip()
        if not key:
            raise ValueError(f"line {lineno}: empty key")
        out[key] = value.strip()
    return out


def write_points(path, values) -> None:
    with open(path, "w") as fh:
        for v in values:
            fh.write(fmt(v) + "\n")


def read_points(path) -> np.ndarray:
    with open(path) as fh:
        return np.array([float(line) for line in fh if line.strip()], dtype=float)


def write_radial(path, grid: RadialGrid) -> None:
    write_points(path, grid.points)


def read_radial(path) -> RadialGrid:
    return RadialGrid(read_points(path))


def write_angular(path, grid: AngularGrid) -> None:
    write_points(path, np.sort(grid.angles))


def read_angular(path) -> AngularGrid:
    return AngularGrid(read_points(path))


def spectrum_to_text(spec: RadialSpectrum, prefix: str = "") -> str:
    return (
        f"{prefix}band={spec.band.to_text()}\n"
        f"{prefix}units={spec.band.units}\n"
        f"{prefix}parity={spec.parity.name}\n"
        f"{prefix}coeffs={','.join(fmt_complex(c) for c in spec.coeffs)}\n"
    )


def spectrum_from_kv(kv: dict, prefix: str = "", band: BandSpec | None = None) -> RadialSpectrum:
    if band is None:
        lo, hi = (float(x) for x in kv[prefix + "band"].split(","))
        band = BandSpec(lo, hi, kv.get(prefix + "units", "cycles"))
    coeffs = [complex(c) for c in kv[prefix + "coeffs"].split(",")]
    return RadialSpectrum(band, Parity[kv[prefix + "parity"]], tuple(coeffs))


def write_pgm(path, raster: np.ndarray) -> tuple[float, float]:
    """Binary P5 with affine min/max scaling to 0..255; returns (min, max)."""
    raster = np.asarray(raster, dtype=float)
    lo, hi = float(raster.min()), float(raster.max())
    span = hi - lo
    scaled = np.zeros_like(raster) if span == 0 else (raster - lo) / span * 255.0
    data = np.clip(np.rint(scaled), 0, 255).astype(np.uint8)
    ny, nx = data.shape
    with open(path, "wb") as fh:
        fh.write(f"P5\n{nx} {ny}\n255\n".encode("ascii"))
        # row 0 of the raster is the lowest y; PGM stores the top row first
        fh.write(data[::-1].tobytes())
    base, _ = os.path.splitext(path)
    with open(base + ".meta", "w") as fh:
        fh.write(f"min={fmt(lo)}\nmax={fmt(hi)}\nwidth={nx}\nheight={ny}\n")
    return lo, hi


def read_pgm(path) -> np.ndarray:
    with open(path, "rb") as fh:
        blob = fh.read()
    parts = blob.split(maxsplit=4)
    if parts[0] != b"P5":
        raise ValueError("not a binary PGM file")
    nx, ny, maxval = int(parts[1]), int(parts[2]), int(parts[3])
    data = np.frombuffer(parts[4][: nx * ny], dtype=np.uint8).reshape(ny, nx)
    return data[::-1].astype(float) / maxval


def write_raster_csv(path, xs, ys, raster) -> None:
    with open(path, "w") as fh:
        fh.write("x,y,value\n")
        for j, y in enumerate(ys):
            for i, x in enumerate(xs):
                fh.write(f"{fmt(x)},{fmt(y)},{fmt(raster[j, i])}\n")
