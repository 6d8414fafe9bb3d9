"""Radial bandpass machinery.

A bandpass profile ``h`` on the real line has a spectrum supported on
``[-R, -r] U [r, R]``.  Spectra are polynomials on ``[r, R]`` extended to the
negative half-line by parity, which keeps every transform here in closed form.

Fourier convention: ``H(sigma) = int h(s) exp(-2 pi i sigma s) ds`` with
``sigma`` in cycles per unit length.  A :class:`BandSpec` may also be given in
angular frequency (``units="radians"``, ``xi = 2 pi sigma``); it is converted
to cycles before any evaluation, so for a radians band

    h(s) = 1/(2 pi) int H(xi) exp(i xi s) dxi.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import polynomial as P

__all__ = [
    "BandSpec",
    "Parity",
    "RadialSpectrum",
    "BandpassKernel",
    "eval_profile",
    "eval_kernel",
    "profile_l2_norm",
    "psi",
    "MAX_POLY_DEGREE",
]

MAX_POLY_DEGREE = 8
UNITS = ("cycles", "radians")

# below this value of |2 pi s R| the monomial integrals use their power series
_SERIES_SWITCH = 8.0
_SERIES_TERMS = 32


@dataclass(frozen=True)
class BandSpec:
    """Annulus ``r_lo <= |sigma| <= r_hi`` defining the bandpass space."""

    r_lo: float
    r_hi: float
    units: str = "cycles"

    def __post_init__(self):
        if self.units not in UNITS:
            raise ValueError(f"units must be one of {UNITS}, got {self.units!r}")
        if not (0.0 < self.r_lo < self.r_hi) or not math.isfinite(self.r_hi):
            raise ValueError(f"need 0 < r_lo < r_hi, got ({self.r_lo}, {self.r_hi})")

    @property
    def scale(self) -> float:
        """Cycles per band unit."""
        return 1.0 if self.units == "cycles" else 1.0 / (2.0 * math.pi)

    @property
    def lo_cycles(self) -> float:
        return self.r_lo * self.scale

    @property
    def hi_cycles(self) -> float:
        return self.r_hi * self.scale

    def in_cycles(self) -> "BandSpec":
        if self.units == "cycles":
            return self
        return BandSpec(self.lo_cycles, self.hi_cycles, "cycles")

    @property
    def critical_density(self) -> float:
        """Nyquist rate of the low-pass space containing the band.

        Equals ``R/pi`` for an angular band and ``2R`` for a band in cycles.
        """
        return 2.0 * self.hi_cycles

    @property
    def nyquist_spacing(self) -> float:
        return 1.0 / self.critical_density

    def to_text(self) -> str:
        return f"{self.r_lo!r},{self.r_hi!r}"


class Parity(enum.Enum):
    EVEN = 1
    ODD = -1

    @classmethod
    def of_harmonic(cls, n: int) -> "Parity":
        return cls.EVEN if n % 2 == 0 else cls.ODD


@dataclass(frozen=True)
class RadialSpectrum:
    """Polynomial spectrum ``H(sigma) = sum_k coeffs[k] sigma^k`` on ``[r_lo, r_hi]``.

    The variable ``sigma`` is in the units of ``band``.  ``H(-sigma)`` equals
    ``parity.value * H(sigma)`` and ``H`` vanishes off the band.
    """

    band: BandSpec
    parity: Parity
    coeffs: tuple = field(default=(0.0,))

    def __post_init__(self):
        c = np.atleast_1d(np.asarray(self.coeffs, dtype=complex))
        if c.ndim != 1 or c.size == 0:
            raise ValueError("coeffs must be a non-empty 1-D sequence")
        if c.size > MAX_POLY_DEGREE + 1:
            raise ValueError(f"polynomial degree must be <= {MAX_POLY_DEGREE}")
        if not np.all(np.isfinite(c)):
            raise ValueError("coefficients must be finite")
        if not isinstance(self.parity, Parity):
            object.__setattr__(self, "parity", Parity[str(self.parity)])
        object.__setattr__(self, "coeffs", tuple(complex(x) for x in c))

    @property
    def coef_array(self) -> np.ndarray:
        return np.array(self.coeffs, dtype=complex)

    def in_cycles(self) -> "RadialSpectrum":
        """Same spectral values expressed as a polynomial in cycles."""
        if self.band.units == "cycles":
            return self
        k = np.arange(len(self.coeffs))
        return RadialSpectrum(self.band.in_cycles(), self.parity,
                              tuple(self.coef_array / self.band.scale ** k))

    def __call__(self, sigma):
        """Evaluate ``H`` on the whole line (band units)."""
        sigma = np.asarray(sigma, dtype=float)
        a = np.abs(sigma)
        val = P.polyval(a, self.coef_array)
        val = np.where(sigma < 0, self.parity.value * val, val)
        inside = (a >= self.band.r_lo) & (a <= self.band.r_hi)
        return np.where(inside, val, 0.0)

    def scaled(self, factor) -> "RadialSpectrum":
        return RadialSpectrum(self.band, self.parity, tuple(self.coef_array * factor))

    def is_zero(self) -> bool:
        return not np.any(self.coef_array)


@dataclass(frozen=True)
class BandpassKernel:
    """Band indicator spectrum shifted to ``center``; see :func:`psi`."""

    band: BandSpec
    center: float = 0.0


def psi(u, band: BandSpec):
    """Inverse transform of the band indicator, ``2R sinc(2Ru) - 2r sinc(2ru)``."""
    lo, hi = band.lo_cycles, band.hi_cycles
    u = np.asarray(u, dtype=float)
    return 2.0 * hi * np.sinc(2.0 * hi * u) - 2.0 * lo * np.sinc(2.0 * lo * u)


def eval_kernel(kernel: BandpassKernel, s):
    out = psi(np.asarray(s, dtype=float) - kernel.center, kernel.band)
    return out if out.ndim else float(out)


def _monomial_integrals(a: np.ndarray, lo: float, hi: float, kmax: int):
    """Return ``C[k] = int_lo^hi x^k cos(a x) dx`` and ``S[k]`` (sin), k <= kmax.

    Arrays have shape ``(kmax + 1,) + a.shape``.
    """
    C = np.empty((kmax + 1,) + a.shape)
    S = np.empty_like(C)
    small = np.abs(a) * hi <= _SERIES_SWITCH

    if np.any(small):
        a_s = a[small]
        for k in range(kmax + 1):
            c_acc = np.zeros_like(a_s)
            s_acc = np.zeros_like(a_s)
            apow = np.ones_like(a_s)  # a^m / m!
            for m in range(2 * _SERIES_TERMS):
                p = k + m + 1
                mono = (hi ** p - lo ** p) / p
                sign = -1.0 if (m // 2) % 2 else 1.0
                if m % 2 == 0:
                    c_acc += sign * apow * mono
                else:
                    s_acc += sign * apow * mono
                apow = apow * a_s / (m + 1)
            C[k][small] = c_acc
            S[k][small] = s_acc

    big = ~small
    if np.any(big):
        a_b = a[big]
        vals = {}
        for x in (lo, hi):
            sn, cs = np.sin(a_b * x), np.cos(a_b * x)
            ac = sn / a_b
            as_ = -cs / a_b
            acs, ass = [ac], [as_]
            xk = 1.0
            for k in range(1, kmax + 1):
                xk *= x
                ac_k = xk * sn / a_b - (k / a_b) * ass[-1]
                as_k = -xk * cs / a_b + (k / a_b) * acs[-1]
                acs.append(ac_k)
                ass.append(as_k)
            vals[x] = (acs, ass)
        for k in range(kmax + 1):
            C[k][big] = vals[hi][0][k] - vals[lo][0][k]
            S[k][big] = vals[hi][1][k] - vals[lo][1][k]
    return C, S


def eval_profile(spec: RadialSpectrum, s):
    """Closed-form ``h(s) = int H(sigma) exp(2 pi i sigma s) d sigma``.

    EVEN spectra give ``2 int_r^R H cos``, ODD spectra ``2i int_r^R H sin``.
    Accepts scalars or arrays; returns complex values of the same shape.
    """
    sc = spec.in_cycles()
    s_arr = np.asarray(s, dtype=float)
    a = 2.0 * math.pi * np.atleast_1d(s_arr).ravel()
    c = sc.coef_array
    C, S = _monomial_integrals(a, sc.band.r_lo, sc.band.r_hi, c.size - 1)
    if spec.parity is Parity.EVEN:
        out = 2.0 * np.tensordot(c, C, axes=(0, 0))
    else:
        out = 2.0j * np.tensordot(c, S, axes=(0, 0))
    out = out.reshape(s_arr.shape)
    return complex(out) if out.ndim == 0 else out


def poly_abs2_integral(coeffs, lo: float, hi: float, weight_power: int = 0) -> float:
    """Exact ``int_lo^hi |H(x)|^2 x^weight_power dx`` for polynomial ``H``."""
    c = np.asarray(coeffs, dtype=complex)
    prod = P.polymul(c, np.conj(c)).real
    if weight_power:
        prod = np.concatenate([np.zeros(weight_power), prod])
    anti = P.polyint(prod)
    return float(P.polyval(hi, anti) - P.polyval(lo, anti))


def profile_l2_norm(spec: RadialSpectrum) -> float:
    """``||h||_2 = sqrt(2 int_r^R |H|^2)`` in the cycles convention (Parseval)."""
    sc = spec.in_cycles()
    return math.sqrt(max(2.0 * poly_abs2_integral(sc.coeffs, sc.band.r_lo, sc.band.r_hi), 0.0))
