"""Inversion of the sampled Radon transform on product grids.

The solve is separable.  Each radial sample's angular profile is interpolated
onto harmonics ``n = -N..N``.  Each harmonic is then fitted, in the least-squares
sense, by a combination of shifted band kernels ``psi(s - tau_m)`` on a uniform
node grid.  The radial unknowns are symmetrised to the harmonic's parity and
whitened against the exact kernel Gram matrix.  The normal matrix then becomes
the frame operator of the radial samples on the reconstruction space, and its
extreme eigenvalues are the frame-bound surrogates ``A`` and ``B``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

from . import textio
from ._linalg import power_extremes
from .bandpass import BandSpec, Parity, psi
from .bandpass import MAX_POLY_DEGREE, RadialSpectrum
from .bessel import bessel_j
from .errors import GridNotValidated, NoConvergence, NonUniformGrid, Singular
from .grids import (
    AngularGrid,
    DensityReport,
    RadialGrid,
    Verdict,
    angular_matrix,
    validate_angular_grid,
    validate_radial_grid,
)
from .radon import RasterSpec, SampleTable, SinogramModel, hankel_image, _gauss_rule

__all__ = [
    "ReconConfig",
    "ReconResult",
    "RadialSystem",
    "angular_solve",
    "radial_lsq",
    "validate_grids",
    "reconstruct_pipeline",
    "eval_reconstruction",
    "reconstruct_image",
    "fbp_baseline",
    "band_projected_disc",
]

PIVOT_TOL = 1e-13
STALL = 50


@dataclass(frozen=True)
class ReconConfig:
    """Discretisation of the reconstruction.

    ``synth_spacing`` defaults to 0.8 of the Nyquist spacing of the outer band
    edge; ``ridge=None`` selects ``1e-10 * trace(N) / cols`` for the normal
    matrix ``N``.  ``gram_cutoff`` drops kernel combinations whose squared L2
    norm is below that fraction of the largest.
    """

    band: BandSpec
    degree: int
    synth_halfwidth: float
    synth_spacing: float | None = None
    ridge: float | None = None
    cg_tol: float = 1e-8
    cg_max_iter: int = 2000
    gram_cutoff: float = 1e-8
    eig_iters: int = 100

    def __post_init__(self):
        if self.synth_spacing is None:
            object.__setattr__(self, "synth_spacing", 0.8 * self.band.nyquist_spacing)
        if not 0 < self.synth_spacing <= self.band.nyquist_spacing * (1 + 1e-12):
            raise ValueError("synth_spacing must be positive and at most the Nyquist spacing 1/(2 R)")
        if not self.synth_halfwidth >= self.synth_spacing:
            raise ValueError("synth_halfwidth must be at least one node spacing")
        if not 0 < self.cg_tol <= 1e-2:
            raise ValueError("cg_tol must lie in (0, 1e-2]")
        if self.ridge is not None and self.ridge < 0:
            raise ValueError("ridge must be non-negative")
        if self.degree < 0:
            raise ValueError("degree must be non-negative")
        if not 0 < self.gram_cutoff < 1:
            raise ValueError("gram_cutoff must lie in (0, 1)")
        if self.cg_max_iter < 1:
            raise ValueError("cg_max_iter must be positive")

    @property
    def nodes(self) -> np.ndarray:
        K = int(math.floor(self.synth_halfwidth / self.synth_spacing + 1e-12))
        return np.arange(-K, K + 1) * self.synth_spacing


def angular_solve(values, angles, degree: int) -> np.ndarray:
    """Harmonic coefficients ``c[..., n + degree]`` from samples over ``angles``.

    Solves ``E c = y`` with ``E[k, n] = exp(i n theta_k)`` by LU with partial
    pivoting; with more angles than ``2 degree + 1`` the normal equations are
    used.  ``values`` may be ``(K,)`` or ``(J, K)``.
    """
    y = np.asarray(values)
    E = angular_matrix(angles, degree)
    K, D = E.shape
    if K < D:
        raise Singular(f"{K} angles cannot determine {D} harmonics")
    rhs = y.T if y.ndim > 1 else y
    if K > D:
        lhs = E.conj().T @ E
        rhs = E.conj().T @ rhs
    else:
        lhs = E
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", sla.LinAlgWarning)
        lu, piv = sla.lu_factor(lhs, check_finite=False)
    if np.min(np.abs(np.diag(lu))) < PIVOT_TOL:
        raise Singular("angular system has a vanishing pivot")
    c = sla.lu_solve((lu, piv), rhs.astype(complex), check_finite=False)
    return c.T if y.ndim > 1 else c


def _cgls(B: np.ndarray, c: np.ndarray, ridge: float, tol: float, max_iter: int, scale: float = 0.0):
    """CG on ``(B^T B + ridge I) x = B^T c`` in least-squares form, x0 = 0.

    Stops once the data residual ``||c - B x||`` falls below ``tol ||c||``
    (consistent data), the normal-equation residual below ``tol**2`` relative,
    or the normal residual has not improved for ``STALL`` steps (the fit is
    stationary at rounding level, e.g. for noisy data).  Returns
    ``(x, iterations, relative data residual, relative normal residual)`` for
    the iterate with the smallest normal residual.  Data residuals are taken
    relative to ``max(||c||, scale)``, so data already below ``tol * scale``
    is returned as zero.
    """
    x = np.zeros(B.shape[1], dtype=complex)
    cnorm = max(np.linalg.norm(c), scale)
    if cnorm == 0:
        return x, 0, 0.0, 0.0
    if np.linalg.norm(c) < tol * cnorm:
        return x, 0, np.linalg.norm(c) / cnorm, 0.0
    r = c.astype(complex)
    g = B.T @ r
    gnorm0 = np.linalg.norm(g)
    if gnorm0 == 0:
        return x, 0, 1.0, 0.0
    p = g.copy()
    gamma = np.vdot(g, g).real
    best = (x, 0, 1.0, 1.0)
    it = 0
    while it < max_iter:
        q = B @ p
        alpha = gamma / (np.vdot(q, q).real + ridge * np.vdot(p, p).real)
        x = x + alpha * p
        r = r - alpha * q
        g = B.T @ r - ridge * x
        it += 1
        gamma_new = np.vdot(g, g).real
        rel_data = np.linalg.norm(r) / cnorm
        rel_normal = math.sqrt(gamma_new) / gnorm0
        if rel_normal <= best[3]:
            best = (x, it, rel_data, rel_normal)
        if rel_data < tol or rel_normal < tol * tol:
            return x, it, rel_data, rel_normal
        if it - best[1] >= STALL:
            break
        p = g + (gamma_new / gamma) * p
        gamma = gamma_new
    return best


class RadialSystem:
    """Parity-symmetrised, Gram-whitened kernel design for one radial grid."""

    def __init__(self, points: np.ndarray, cfg: ReconConfig, parity: Parity):
        self.cfg = cfg
        self.parity = parity
        self.points = np.asarray(points, dtype=float)
        tau = cfg.nodes
        self.nodes = tau
        K = (tau.size - 1) // 2
        sign = float(parity.value)
        # full node weights a = Sym @ b
        cols = []
        if parity is Parity.EVEN:
            e = np.zeros(tau.size)
            e[K] = 1.0
            cols.append(e)
        for m in range(1, K + 1):
            e = np.zeros(tau.size)
            e[K + m] = 1.0
            e[K - m] = sign
            cols.append(e)
        self.sym = np.array(cols).T
        gram = self.sym.T @ psi(tau[:, None] - tau[None, :], cfg.band) @ self.sym
        w, V = np.linalg.eigh(gram)
        keep = w > cfg.gram_cutoff * w[-1]
        self.rank = int(keep.sum())
        self.whiten = self.sym @ (V[:, keep] / np.sqrt(w[keep]))
        self.design = psi(self.points[:, None] - tau[None, :], cfg.band) @ self.whiten
        normal = self.design.T @ self.design
        n_cols = normal.shape[0]
        self.ridge = 1e-10 * np.trace(normal) / n_cols if cfg.ridge is None else cfg.ridge
        self.normal = normal + self.ridge * np.eye(n_cols)
        self.B, self.A = power_extremes(self.normal, max_iter=cfg.eig_iters)

    def solve(self, c: np.ndarray, scale: float = 0.0):
        """Node weights for data ``c``; returns (weights, iterations, relative misfit).

        ``scale`` sets a floor on the norm residuals are measured against.
        """
        tol = self.cfg.cg_tol
        b, it, rel_data, rel_normal = _cgls(self.design, np.asarray(c, dtype=complex), self.ridge,
                                            tol, self.cfg.cg_max_iter, scale)
        if rel_data > 10.0 * tol and rel_normal > 10.0 * tol:
            raise NoConvergence(f"CG stopped after {it} iterations at relative residual {rel_normal:.2e}")
        return self.whiten @ b, it, rel_data


def radial_lsq(values, radial: RadialGrid, cfg: ReconConfig, parity: Parity) -> np.ndarray:
    """Kernel weights on ``cfg.nodes`` fitting ``values`` at the grid points."""
    system = RadialSystem(radial.points, cfg, parity)
    a, _, _ = system.solve(values)
    return a


@dataclass(frozen=True, eq=False)
class ReconResult:
    band: BandSpec
    degree: int
    nodes: np.ndarray
    coeffs: dict  # n -> complex node weights
    residuals: dict  # n -> ||M a_n - c_n||
    iterations: dict  # n -> CG iterations
    frame_bounds: dict = field(default_factory=dict)  # parity name -> (A, B)
    misfit: float = 0.0

    @property
    def A(self) -> float:
        return min(a for a, _ in self.frame_bounds.values())

    @property
    def B(self) -> float:
        return max(b for _, b in self.frame_bounds.values())

    @property
    def condition(self) -> float:
        return self.B / self.A if self.A > 0 else math.inf

    def to_csv(self) -> str:
        lines = ["n,tau,re,im"]
        for n in sorted(self.coeffs):
            for t, a in zip(self.nodes, self.coeffs[n]):
                lines.append(f"{n},{textio.fmt(t)},{textio.fmt(a.real)},{textio.fmt(a.imag)}")
        return "\n".join(lines) + "\n"

    def diagnostics_text(self) -> str:
        lines = [
            f"A={textio.fmt(self.A)}",
            f"B={textio.fmt(self.B)}",
            f"condition={textio.fmt(self.condition)}",
            f"misfit={textio.fmt(self.misfit)}",
            f"iterations={sum(self.iterations.values())}",
        ]
        for name, (a, b) in sorted(self.frame_bounds.items()):
            lines.append(f"{name.lower()}.A={textio.fmt(a)}")
            lines.append(f"{name.lower()}.B={textio.fmt(b)}")
        for n in sorted(self.residuals):
            lines.append(f"h{n}.residual={textio.fmt(self.residuals[n])}")
        return "\n".join(lines) + "\n"


def validate_grids(radial: RadialGrid, angular: AngularGrid, cfg: ReconConfig,
                   window: float | None = None) -> tuple[DensityReport, float]:
    return validate_radial_grid(radial, cfg.band, window), validate_angular_grid(angular, cfg.degree)


def reconstruct_pipeline(table: SampleTable, cfg: ReconConfig, radial_report: DensityReport | None = None,
                         angular_condition: float | None = None, force: bool = False) -> ReconResult:
    """Angular interpolation per radial sample, then radial fits per harmonic.

    Refuses (``GridNotValidated``) when validation results are missing or the
    radial grid is insufficient, unless ``force`` is set.
    """
    if not force:
        if radial_report is None or angular_condition is None:
            raise GridNotValidated("grid validation results were not supplied")
        if radial_report.verdict is None or radial_report.verdict < Verdict.UNIQUENESS_OK:
            raise GridNotValidated(
                f"radial density {radial_report.estimate:.4g} does not exceed "
                f"the critical rate {radial_report.threshold}")
    N = cfg.degree
    harm = angular_solve(table.values, table.angular.angles, N)  # (J, 2N+1)
    systems = {p: RadialSystem(table.radial.points, cfg, p) for p in Parity}
    coeffs, residuals, iterations = {}, {}, {}
    # harmonics at rounding level relative to the largest are not fitted
    scale = float(np.linalg.norm(harm[:, N:], axis=0).max())
    for n in range(0, N + 1):
        system = systems[Parity.of_harmonic(n)]
        c = harm[:, n + N]
        a, it, _ = system.solve(c, scale)
        coeffs[n] = a
        residuals[n] = float(np.linalg.norm(psi(table.radial.points[:, None] - system.nodes[None, :], cfg.band) @ a - c))
        iterations[n] = it
        if n:
            # real data: h_{-n} = conj(h_n)
            coeffs[-n] = np.conj(a)
            residuals[-n] = residuals[n]
            iterations[-n] = 0
    bounds = {p.name: (systems[p].A, systems[p].B) for p in Parity}
    result = ReconResult(cfg.band, N, cfg.nodes, coeffs, residuals, iterations, bounds)
    fit = eval_reconstruction(result, table.radial.points[:, None], table.angular.angles[None, :])
    denom = np.linalg.norm(table.values)
    misfit = float(np.linalg.norm(fit - table.values) / denom) if denom > 0 else float(np.linalg.norm(fit))
    object.__setattr__(result, "misfit", misfit)
    return result


def eval_reconstruction(result: ReconResult, s, phi):
    """Reconstructed sinogram ``Re sum_n h_n(s) exp(i n phi)``."""
    s, phi = np.broadcast_arrays(np.asarray(s, dtype=float), np.asarray(phi, dtype=float))
    us, inv = np.unique(s, return_inverse=True)
    K = psi(us[:, None] - result.nodes[None, :], result.band)
    inv = inv.reshape(s.shape)
    total = np.zeros(s.shape, dtype=complex)
    for n, a in result.coeffs.items():
        total += (K @ a)[inv] * np.exp(1j * n * phi)
    return total.real


def reconstruct_image(result: ReconResult, cfg: ReconConfig | None, raster: RasterSpec,
                      order: int = 256) -> np.ndarray:
    """Image raster from the reconstructed harmonic spectra.

    The spectrum of ``sum_m a_m psi(s - tau_m)`` is ``sum_m a_m exp(-2 pi i sigma tau_m)``
    on the band, evaluated at Gauss-Legendre nodes and passed through the
    Hankel machinery of :func:`bpradon.radon.eval_image`.  ``cfg`` is only
    consulted for its band, which must agree with the result's.
    """
    if cfg is not None and cfg.band != result.band:
        raise ValueError("configuration band differs from the reconstruction band")
    nodes, weights = _gauss_rule(result.band, order)
    phase = np.exp(-2j * math.pi * np.outer(nodes, result.nodes))
    spectra = {n: phase @ a for n, a in result.coeffs.items()}
    c = raster.coords
    X, Y = np.meshgrid(c, c)
    return hankel_image(result.band, spectra, nodes, weights, np.hypot(X, Y), np.arctan2(Y, X), order)


def _uniform_step(x: np.ndarray, what: str, rtol: float = 1e-9) -> float:
    d = np.diff(np.sort(x))
    if d.size == 0 or np.ptp(d) > rtol * d.mean():
        raise NonUniformGrid(f"{what} grid is not uniform")
    return float(d.mean())


def fbp_baseline(table: SampleTable, band: BandSpec, raster: RasterSpec) -> np.ndarray:
    """Filtered backprojection with a Ram-Lak filter cut off at the outer band edge.

    Needs a uniform radial lattice (optionally missing only the origin, which
    is then filled by its two neighbours' mean) and equispaced angles on
    ``[0, pi)``.
    """
    s = table.radial.points
    vals = np.asarray(table.values, dtype=float)
    if len(s) < 2:
        raise NonUniformGrid("radial grid has fewer than two points")
    gaps = np.diff(s)
    d = float(gaps.min())
    hole = np.nonzero(np.abs(gaps - 2 * d) <= 1e-9 * d)[0]
    if hole.size == 1 and s[hole[0]] < 0 < s[hole[0] + 1]:
        j = hole[0] + 1
        s = np.insert(s, j, 0.0)
        vals = np.insert(vals, j, 0.5 * (vals[j - 1] + vals[j]), axis=0)
    d = _uniform_step(s, "radial")
    th = table.angular.angles
    K = th.size
    if K > 1:
        dth = _uniform_step(th, "angular")
        if abs(dth * K - math.pi) > 1e-9:
            raise NonUniformGrid("angles must be equispaced over [0, pi)")

    L = s.size
    P = 1 << int(math.ceil(math.log2(2 * L)))
    sigma = np.fft.fftfreq(P, d)
    ramp = np.abs(sigma) * (np.abs(sigma) <= band.hi_cycles)
    q = np.fft.ifft(np.fft.fft(vals, n=P, axis=0) * ramp[:, None], axis=0).real[:L]

    c = raster.coords
    X, Y = np.meshgrid(c, c)
    out = np.zeros_like(X)
    for k in range(K):
        t = X * math.cos(th[k]) + Y * math.sin(th[k])
        out += np.interp(t, s, q[:, k], left=0.0, right=0.0)
    return out * (math.pi / K)


def band_projected_disc(band: BandSpec, radius: float = 3.0, poly_degree: int = MAX_POLY_DEGREE) -> SinogramModel:
    """Radially symmetric model approximating the band projection of a unit disc.

    The disc's sinogram ``2 sqrt(radius^2 - s^2)`` has spectrum
    ``radius J_1(2 pi radius sigma) / sigma``; on the band it is replaced by its
    least-squares polynomial fit at Chebyshev points.
    """
    if not radius > 0:
        raise ValueError("radius must be positive")
    lo, hi = band.r_lo, band.r_hi
    x = np.cos(np.pi * (np.arange(64) + 0.5) / 64)
    w = 0.5 * (hi - lo) * x + 0.5 * (hi + lo)
    sig = w * band.scale
    target = radius * bessel_j(1, 2 * math.pi * radius * sig) / sig
    poly = np.polynomial.Polynomial.fit(w, target, poly_degree).convert()
    coeffs = np.zeros(poly_degree + 1, dtype=complex)
    coeffs[: poly.coef.size] = poly.coef
    spec = RadialSpectrum(band, Parity.EVEN, tuple(coeffs))
    return SinogramModel.from_nonnegative(band, {0: spec})
