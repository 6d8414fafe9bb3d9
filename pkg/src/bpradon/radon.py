"""Forward model for sinograms of bandpass functions.

A sinogram is stored by its angular harmonics,

    g(s, phi) = sum_{|n| <= N} h_n(s) exp(i n phi),

where ``h_n`` is the bandpass profile with spectrum ``H_n``.  By the Fourier
slice theorem ``H_n(sigma) exp(i n phi)`` are the polar harmonics of the 2-D
spectrum of the underlying image, which gives the image itself through
order-``n`` Hankel integrals.  Harmonic ``n`` has the parity of ``n``; that is
exactly the symmetry ``g(-s, phi + pi) = g(s, phi)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate

from . import textio
from .bandpass import (
    MAX_POLY_DEGREE,
    BandSpec,
    Parity,
    RadialSpectrum,
    eval_profile,
    poly_abs2_integral,
)
from .bessel import bessel_j_orders
from .errors import QuadratureUnderResolved, ToleranceViolation
from .grids import AngularGrid, RadialGrid

__all__ = [
    "MAX_DEGREE",
    "SinogramModel",
    "random_model",
    "eval_sinogram",
    "SampleTable",
    "sample_sinogram",
    "FullCircleSamples",
    "unfold",
    "ImageEval",
    "eval_image",
    "hankel_image",
    "RasterSpec",
    "image_raster",
    "counterexample_norms",
    "NormBoundReport",
    "norm_bound_check",
    "moment_check",
    "radial_moments",
    "profile_norm_at",
]

MAX_DEGREE = 32


@dataclass(frozen=True, eq=False)
class SinogramModel:
    band: BandSpec
    degree: int
    harmonics: dict = field(default_factory=dict)

    def __post_init__(self):
        N = int(self.degree)
        if not 0 <= N <= MAX_DEGREE:
            raise ValueError(f"degree must lie in [0, {MAX_DEGREE}]")
        if set(self.harmonics) != set(range(-N, N + 1)):
            raise ValueError(f"harmonics must be given for n = -{N}..{N}")
        for n, spec in self.harmonics.items():
            if spec.band != self.band:
                raise ValueError(f"harmonic {n} has band {spec.band}, expected {self.band}")
            if spec.parity is not Parity.of_harmonic(n):
                raise ValueError(f"harmonic {n} must have parity {Parity.of_harmonic(n).name}")
        # real sinograms need h_{-n} = conj(h_n), i.e. H_{-n} = parity * conj(H_n) on the band
        for n in range(0, N + 1):
            a = self.harmonics[n].coef_array
            b = self.harmonics[-n].coef_array
            k = max(a.size, b.size)
            a = np.pad(a, (0, k - a.size))
            b = np.pad(b, (0, k - b.size))
            target = Parity.of_harmonic(n).value * np.conj(a)
            if not np.allclose(b, target, rtol=1e-12, atol=1e-12 * max(1.0, np.abs(a).max())):
                raise ValueError(f"harmonics {n} and {-n} violate the reality convention")
        object.__setattr__(self, "degree", N)

    @classmethod
    def from_nonnegative(cls, band: BandSpec, spectra: dict) -> "SinogramModel":
        """Build from harmonics ``n >= 0`` (coefficient sequences or spectra)."""
        N = max(spectra) if spectra else 0
        harm = {}
        for n in range(N + 1):
            raw = spectra.get(n, (0.0,))
            coeffs = raw.coef_array if isinstance(raw, RadialSpectrum) else np.asarray(raw, dtype=complex)
            par = Parity.of_harmonic(n)
            if n == 0:
                coeffs = coeffs.real.astype(complex)
            harm[n] = RadialSpectrum(band, par, tuple(coeffs))
            if n:
                harm[-n] = RadialSpectrum(band, par, tuple(par.value * np.conj(coeffs)))
        return cls(band, N, harm)

    @classmethod
    def zero(cls, band: BandSpec, degree: int = 0) -> "SinogramModel":
        return cls.from_nonnegative(band, {n: (0.0,) for n in range(degree + 1)})

    def to_text(self) -> str:
        out = [f"band={self.band.to_text()}", f"units={self.band.units}", f"degree={self.degree}"]
        for n in range(-self.degree, self.degree + 1):
            spec = self.harmonics[n]
            out.append(f"h{n}.parity={spec.parity.name}")
            out.append(f"h{n}.coeffs={','.join(textio.fmt_complex(c) for c in spec.coeffs)}")
        return "\n".join(out) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "SinogramModel":
        kv = textio.parse_kv(text)
        try:
            lo, hi = (float(x) for x in kv["band"].split(","))
            band = BandSpec(lo, hi, kv.get("units", "cycles"))
            N = int(kv["degree"])
            harm = {n: textio.spectrum_from_kv(kv, f"h{n}.", band) for n in range(-N, N + 1)}
        except (KeyError, ValueError) as exc:
            raise ValueError(f"malformed model text: {exc}") from exc
        return cls(band, N, harm)


def random_model(band: BandSpec, degree: int, seed: int, poly_degree: int = 3, scale: float = 1.0) -> SinogramModel:
    """Seeded model with Gaussian polynomial coefficients (complex for n > 0)."""
    if not 0 <= poly_degree <= MAX_POLY_DEGREE:
        raise ValueError("poly_degree out of range")
    rng = np.random.default_rng(seed)
    spectra = {0: scale * rng.standard_normal(poly_degree + 1)}
    for n in range(1, degree + 1):
        z = rng.standard_normal(poly_degree + 1) + 1j * rng.standard_normal(poly_degree + 1)
        spectra[n] = scale * z / math.sqrt(2.0)
    return SinogramModel.from_nonnegative(band, spectra)


def _harmonic_profiles(model: SinogramModel, s: np.ndarray) -> dict:
    out = {}
    for n in range(0, model.degree + 1):
        h = eval_profile(model.harmonics[n], s)
        out[n] = h
        if n:
            out[-n] = np.conj(h)
    return out


def eval_sinogram(model: SinogramModel, s, phi):
    """``Re sum_n h_n(s) exp(i n phi)``; broadcasts ``s`` against ``phi``."""
    s, phi = np.broadcast_arrays(np.asarray(s, dtype=float), np.asarray(phi, dtype=float))
    us, inv = np.unique(s, return_inverse=True)
    prof = _harmonic_profiles(model, us)
    total = np.zeros(s.shape, dtype=complex)
    inv = inv.reshape(s.shape)
    for n, h in prof.items():
        total += h[inv] * np.exp(1j * n * phi)
    out = total.real
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True, eq=False)
class SampleTable:
    """Samples ``values[j, k]`` at ``(radial.points[j], angular.angles[k])``."""

    radial: RadialGrid
    angular: AngularGrid
    values: np.ndarray

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        if v.shape != (len(self.radial), len(self.angular)):
            raise ValueError(f"values shape {v.shape} does not match grids")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    def to_csv(self) -> str:
        lines = ["s,theta,value"]
        for j, s in enumerate(self.radial.points):
            for k, th in enumerate(self.angular.angles):
                lines.append(f"{textio.fmt(s)},{textio.fmt(th)},{textio.fmt(self.values[j, k])}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_csv(cls, text: str) -> "SampleTable":
        rows = [line.split(",") for line in text.strip().splitlines()]
        if not rows or [c.strip() for c in rows[0]] != ["s", "theta", "value"]:
            raise ValueError("sample table CSV must start with header s,theta,value")
        data = np.array([[float(c) for c in row] for row in rows[1:]], dtype=float)
        s = np.unique(data[:, 0])
        th = np.array(list(dict.fromkeys(data[:, 1].tolist())))
        if data.shape[0] != s.size * th.size:
            raise ValueError("sample table is not a full product grid")
        j = np.searchsorted(s, data[:, 0])
        k = np.array([np.nonzero(th == t)[0][0] for t in data[:, 1]])
        vals = np.full((s.size, th.size), np.nan)
        vals[j, k] = data[:, 2]
        if np.isnan(vals).any():
            raise ValueError("sample table has missing entries")
        return cls(RadialGrid(s), AngularGrid(th), vals)


def sample_sinogram(model: SinogramModel, radial: RadialGrid, angular: AngularGrid,
                    noise_sd: float = 0.0, seed: int = 0) -> SampleTable:
    """Sinogram on the product grid plus i.i.d. Gaussian noise.

    The noise table is ``noise_sd * default_rng(seed).standard_normal((J, K))``.
    """
    if noise_sd < 0:
        raise ValueError("noise_sd must be non-negative")
    vals = eval_sinogram(model, radial.points[:, None], angular.angles[None, :])
    vals = np.array(vals, dtype=float).reshape(len(radial), len(angular))
    if noise_sd > 0:
        rng = np.random.default_rng(seed)
        vals = vals + noise_sd * rng.standard_normal(vals.shape)
    return SampleTable(radial, angular, vals)


@dataclass(frozen=True)
class FullCircleSamples:
    s: np.ndarray
    theta: np.ndarray
    values: np.ndarray


def unfold(table: SampleTable) -> FullCircleSamples:
    """Map half-plane samples to the full circle.

    ``(s, theta)`` with ``theta`` in ``[0, pi)`` keeps its value; the mirrored
    point ``(-s, theta + pi)`` receives the same value.
    """
    S, T = np.meshgrid(table.radial.points, table.angular.angles, indexing="ij")
    v = table.values
    return FullCircleSamples(
        s=np.concatenate([S.ravel(), -S.ravel()]),
        theta=np.concatenate([T.ravel(), T.ravel() + math.pi]),
        values=np.concatenate([v.ravel(), v.ravel()]),
    )


# ---------------------------------------------------------------- image domain


@dataclass(frozen=True)
class ImageEval:
    model: SinogramModel
    order: int = 256

    def __post_init__(self):
        if self.order < 32:
            raise ValueError("quadrature order must be at least 32")


@dataclass(frozen=True)
class RasterSpec:
    """Square raster of ``size x size`` pixel centres covering ``[-extent, extent]^2``."""

    size: int = 128
    extent: float = 10.0

    @property
    def coords(self) -> np.ndarray:
        h = 2.0 * self.extent / self.size
        return -self.extent + (np.arange(self.size) + 0.5) * h


def hankel_image(band: BandSpec, spectra_at_nodes: dict, nodes: np.ndarray, weights: np.ndarray,
                 rho, theta, order: int | None = None) -> np.ndarray:
    """Image values from harmonic spectra sampled at quadrature nodes.

    ``nodes``/``weights`` form a rule on the band in cycles; ``spectra_at_nodes[n]``
    holds ``H_n`` at those nodes.  Computes
    ``Re sum_n i^n exp(i n theta) 2 pi int H_n(sigma) J_n(2 pi sigma rho) sigma d sigma``.
    """
    rho, theta = np.broadcast_arrays(np.asarray(rho, dtype=float), np.asarray(theta, dtype=float))
    if np.any(rho < 0):
        raise ValueError("rho must be non-negative")
    order = nodes.size if order is None else order
    if rho.size and 2.0 * math.pi * band.hi_cycles * float(rho.max()) > 0.5 * order:
        raise QuadratureUnderResolved(
            f"2 pi R rho = {2 * math.pi * band.hi_cycles * float(rho.max()):.1f} exceeds "
            f"half the quadrature order ({order}); raise the order")
    urho, inv = np.unique(rho.ravel(), return_inverse=True)
    nmax = max(abs(n) for n in spectra_at_nodes) if spectra_at_nodes else 0
    radial = {n: np.zeros(urho.size, dtype=complex) for n in spectra_at_nodes}
    wsig = 2.0 * math.pi * weights * nodes
    chunk = max(1, 2_000_000 // max(1, nodes.size * (nmax + 1)))
    for start in range(0, urho.size, chunk):
        sl = slice(start, start + chunk)
        J = bessel_j_orders(nmax, 2.0 * math.pi * np.outer(nodes, urho[sl]))
        for n, H in spectra_at_nodes.items():
            Jn = J[abs(n)] * (-1.0 if (n < 0 and n % 2) else 1.0)
            radial[n][sl] = (wsig * H) @ Jn
    total = np.zeros(rho.size, dtype=complex)
    th = theta.ravel()
    for n, vals in radial.items():
        total += (1j ** n) * np.exp(1j * n * th) * vals[inv]
    return total.real.reshape(rho.shape)


def _gauss_rule(band: BandSpec, order: int):
    x, w = np.polynomial.legendre.leggauss(order)
    lo, hi = band.lo_cycles, band.hi_cycles
    return 0.5 * (hi - lo) * x + 0.5 * (hi + lo), 0.5 * (hi - lo) * w


def eval_image(ie: ImageEval, rho, theta):
    """Image ``f(rho, theta)`` of the model through order-n Hankel integrals."""
    nodes, weights = _gauss_rule(ie.model.band, ie.order)
    spectra = {n: spec.in_cycles()(nodes) for n, spec in ie.model.harmonics.items()}
    out = hankel_image(ie.model.band, spectra, nodes, weights, rho, theta, ie.order)
    return float(out) if out.ndim == 0 else out


def image_raster(ie: ImageEval, raster: RasterSpec) -> np.ndarray:
    """Row-major raster, ``out[j, i] = f(x_i, y_j)``."""
    c = raster.coords
    X, Y = np.meshgrid(c, c)
    return eval_image(ie, np.hypot(X, Y), np.arctan2(Y, X))


# ---------------------------------------------------------------- identities


def counterexample_norms(n: int, R: float, rtol: float = 1e-6) -> tuple[float, float]:
    """Squared norms of the spectrum ``|xi|^{-1/2}`` on ``1/n <= |xi| <= R``.

    Returns ``(2 pi (R - 1/n), 4 pi (ln R + ln n))``: the first in the polar
    (area) measure, the second in the flat measure after unfolding the radius
    onto the whole line.  Both are cross-checked by numerical integration.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    lo = 1.0 / n
    if R < lo:
        raise ValueError("need R >= 1/n")
    polar = 2.0 * math.pi * (R - lo)
    flat = 4.0 * math.pi * (math.log(R) + math.log(n))

    def spec_sq(sigma):
        return abs(sigma ** -0.5) ** 2

    num_polar, _ = integrate.dblquad(lambda sig, om: spec_sq(sig) * sig, 0.0, 2.0 * math.pi, lo, R,
                                     epsabs=0.0, epsrel=1e-12)
    num_flat, _ = integrate.dblquad(lambda sig, om: 2.0 * spec_sq(sig), 0.0, 2.0 * math.pi, lo, R,
                                    epsabs=0.0, epsrel=1e-12)
    for name, exact, num in (("polar", polar, num_polar), ("flat", flat, num_flat)):
        if abs(num - exact) > rtol * abs(exact) + 1e-14:
            raise ToleranceViolation(f"{name} norm: analytic {exact!r} vs numerical {num!r}")
    return polar, flat


@dataclass(frozen=True)
class NormBoundReport:
    f_norm_sq: float
    sino_norm_sq: float
    lower: float
    upper: float
    satisfied: bool


def norm_bound_check(model: SinogramModel) -> NormBoundReport:
    """Exact image and sinogram norms and the two-sided band bound.

    With the unitary cycles convention ``||f||^2 = 2 pi sum_n int |H_n|^2 sigma``
    and ``||Rf||^2 = 2 pi sum_n 2 int |H_n|^2`` over ``[r, R]``, so
    ``2/R ||f||^2 <= ||Rf||^2 <= 2/r ||f||^2``.
    """
    band = model.band.in_cycles()
    f_sq = 0.0
    g_sq = 0.0
    for spec in model.harmonics.values():
        c = spec.in_cycles().coeffs
        f_sq += 2.0 * math.pi * poly_abs2_integral(c, band.r_lo, band.r_hi, 1)
        g_sq += 2.0 * math.pi * 2.0 * poly_abs2_integral(c, band.r_lo, band.r_hi)
    lower = 2.0 / band.r_hi * f_sq
    upper = 2.0 / band.r_lo * f_sq
    tol = 1e-9 * upper
    return NormBoundReport(f_sq, g_sq, lower, upper, bool(lower - tol <= g_sq <= upper + tol))


def profile_norm_at(model: SinogramModel, phi: float) -> float:
    """Exact ``||g(., phi)||_2`` via Parseval on the polynomial spectra."""
    band = model.band.in_cycles()
    k = max(len(s.coeffs) for s in model.harmonics.values())
    pos = np.zeros(k, dtype=complex)
    neg = np.zeros(k, dtype=complex)
    for n, spec in model.harmonics.items():
        c = np.pad(spec.in_cycles().coef_array, (0, k - len(spec.coeffs)))
        e = np.exp(1j * n * phi)
        pos += c * e
        neg += spec.parity.value * c * e
    total = poly_abs2_integral(pos, band.r_lo, band.r_hi) + poly_abs2_integral(neg, band.r_lo, band.r_hi)
    return math.sqrt(max(total, 0.0))


def radial_moments(func, S: float, k_max: int, panel: float, taper_width: float | None = None,
                   nodes_per_panel: int = 24, rtol: float = 1e-12, max_doublings: int = 4) -> np.ndarray:
    """``int_{-S}^{S} func(s) s^k w(s) ds`` for ``k = 0..k_max``.

    ``w`` is the Gaussian taper ``exp(-(s/taper_width)^2)`` or 1.  Composite
    Gauss-Legendre; panels are halved until two passes agree to ``rtol``
    relative to the integrand scale.
    """
    x, w = np.polynomial.legendre.leggauss(nodes_per_panel)
    powers = np.arange(k_max + 1)

    def run(npanel):
        edges = np.linspace(-S, S, npanel + 1)
        mid = 0.5 * (edges[1:] + edges[:-1])
        half = 0.5 * (edges[1:] - edges[:-1])
        s = (mid[:, None] + half[:, None] * x[None, :]).ravel()
        wt = (half[:, None] * w[None, :]).ravel()
        f = np.asarray(func(s), dtype=float)
        if taper_width is not None:
            f = f * np.exp(-((s / taper_width) ** 2))
        sk = s[None, :] ** powers[:, None]
        scale = np.abs(sk * f[None, :]) @ wt
        return (sk * f[None, :]) @ wt, scale

    npanel = max(2, int(math.ceil(2.0 * S / panel)))
    prev, scale = run(npanel)
    for _ in range(max_doublings):
        npanel *= 2
        cur, scale = run(npanel)
        if np.all(np.abs(cur - prev) <= rtol * np.maximum(scale, 1e-300)):
            return cur
        prev = cur
    return prev


def moment_check(model: SinogramModel, k_max: int, phi: float, taper: bool = True) -> list:
    """Radial moments ``m_k`` of ``g(., phi)`` for ``k = 0..k_max``.

    Integration runs over ``|s| <= S = 200/(R - r)`` (cycles).  Bandpass
    profiles decay only like ``1/s``, so the raw truncated moments oscillate
    with ``S`` for ``k >= 1``.  By default a Gaussian taper sums them in the
    Gauss (Abel) sense.  Its width ``max(S/6, 6/(pi r))`` keeps the taper's
    spectrum below ``exp(-36)`` at ``|sigma| >= r``, and ``S`` grows to six
    widths, so the summed moments vanish whenever the spectrum does near the
    origin.  For very small ``r`` the high moments hit double-precision
    cancellation (``S**k`` is huge).
    """
    if not 0 <= k_max <= 8:
        raise ValueError("k_max must lie in [0, 8]")
    band = model.band.in_cycles()
    S = 200.0 / (band.r_hi - band.r_lo)
    panel = 1.0 / band.r_hi

    def g(s):
        return eval_sinogram(model, s, phi)

    width = None
    if taper:
        width = max(S / 6.0, 6.0 / (math.pi * band.r_lo))
        S = max(S, 6.0 * width)
    return list(radial_moments(g, S, k_max, panel, width))
