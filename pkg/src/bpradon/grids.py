"""Irregular sampling sets, counting functions and density checks.

Radial grids are uniformly discrete subsets of the real line that avoid the
origin.  Their density is estimated by the slope ``c`` of the best uniform fit
``sup_{|t| <= T} |N(t) - c t|`` to the signed counting function ``N``.  This
serves as the computable stand-in for both the Beurling-Malliavin and frame
densities; the two agree with it for perturbed lattices, which is every grid
this package generates.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from ._linalg import power_extremes
from .bandpass import BandSpec
from .errors import InvalidJitter, Singular, TooFewPoints, WrongCount

__all__ = [
    "RadialGrid",
    "AngularGrid",
    "Verdict",
    "DensityReport",
    "counting_function",
    "uniform_density_estimate",
    "validate_radial_grid",
    "make_jittered_grid",
    "make_uniform_grid",
    "equispaced_angles",
    "validate_angular_grid",
    "angular_matrix",
]

DEFAULT_MARGIN = 0.05
DEFAULT_SLOPE_TOL = 0.1
SINGULAR_CONDITION = 1e12


@dataclass(frozen=True, eq=False)
class RadialGrid:
    points: np.ndarray
    separation: float = 0.0

    def __post_init__(self):
        pts = np.array(self.points, dtype=float).ravel()
        if pts.size == 0:
            raise ValueError("a radial grid needs at least one point")
        if not np.all(np.isfinite(pts)):
            raise ValueError("grid points must be finite")
        if np.any(pts == 0.0):
            raise ValueError("0 must not belong to a radial grid")
        gaps = np.diff(pts)
        if np.any(gaps <= 0):
            raise ValueError("grid points must be strictly increasing")
        sep = float(gaps.min()) if gaps.size else math.inf
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "separation", sep)

    def __len__(self):
        return self.points.size

    def __eq__(self, other):
        return isinstance(other, RadialGrid) and np.array_equal(self.points, other.points)

    __hash__ = None

    @property
    def extent(self) -> float:
        return float(np.max(np.abs(self.points)))

    def without(self, indices) -> "RadialGrid":
        return RadialGrid(np.delete(self.points, indices))


@dataclass(frozen=True, eq=False)
class AngularGrid:
    angles: np.ndarray

    def __post_init__(self):
        ang = np.array(self.angles, dtype=float).ravel()
        if ang.size == 0:
            raise ValueError("an angular grid needs at least one angle")
        if np.any(ang < 0) or np.any(ang >= math.pi) or not np.all(np.isfinite(ang)):
            raise ValueError("angles must lie in [0, pi)")
        if np.unique(ang).size != ang.size:
            raise ValueError("angles must be distinct")
        ang.setflags(write=False)
        object.__setattr__(self, "angles", ang)

    def __len__(self):
        return self.angles.size

    def __eq__(self, other):
        return isinstance(other, AngularGrid) and np.array_equal(self.angles, other.angles)

    __hash__ = None


class Verdict(enum.IntEnum):
    # ordered so that comparisons read as "at least"
    INSUFFICIENT = 0
    UNIQUENESS_OK = 1
    SAMPLING_OK = 2


@dataclass(frozen=True)
class DensityReport:
    estimate: float
    deviation: float
    window: float
    verdict: Verdict | None = None
    threshold: float | None = None

    def to_text(self) -> str:
        lines = [
            f"estimate={self.estimate!r}",
            f"deviation={self.deviation!r}",
            f"window={self.window!r}",
            f"verdict={self.verdict.name if self.verdict is not None else 'NONE'}",
        ]
        if self.threshold is not None:
            lines.append(f"threshold={self.threshold!r}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "DensityReport":
        kv = dict(line.split("=", 1) for line in text.splitlines() if "=" in line)
        verdict = None if kv.get("verdict", "NONE") == "NONE" else Verdict[kv["verdict"]]
        thr = float(kv["threshold"]) if "threshold" in kv else None
        return cls(float(kv["estimate"]), float(kv["deviation"]), float(kv["window"]), verdict, thr)


def counting_function(grid: RadialGrid, t: float) -> int:
    """Signed count of grid points between 0 and ``t`` (closed at ``t``)."""
    pts = grid.points
    if t >= 0:
        return int(np.searchsorted(pts, t, side="right") - np.searchsorted(pts, 0.0, side="right"))
    return -int(np.searchsorted(pts, 0.0, side="left") - np.searchsorted(pts, t, side="left"))


def _deviation_candidates(points: np.ndarray, window: float):
    """(t, N) pairs at which ``sup |N(t) - c t|`` is attained for any c.

    Between jumps ``N(t) - c t`` is affine, so the extremes sit at the jump
    points (both one-sided limits) and at the window ends.
    """
    pos = points[(points > 0) & (points <= window)]
    neg = points[(points < 0) & (points >= -window)]
    n_pos = np.arange(1, pos.size + 1, dtype=float)
    n_neg = -np.arange(neg.size, 0, -1, dtype=float)  # N at neg[i] counts [neg[i], 0)
    t = np.concatenate([pos, pos, neg, neg, [window, -window]])
    N = np.concatenate([n_pos, n_pos - 1.0, n_neg, n_neg + 1.0, [pos.size, -neg.size]])
    return t, N


def _ternary_min(f, lo, hi, tol):
    while hi - lo > tol:
        m1 = lo + (hi - lo) / 3.0
        m2 = hi - (hi - lo) / 3.0
        if f(m1) <= f(m2):
            hi = m2
        else:
            lo = m1
    return 0.5 * (lo + hi)


def uniform_density_estimate(grid: RadialGrid, window: float | None = None, tol: float = 1e-12) -> DensityReport:
    """Best uniform slope for the counting function on ``[-window, window]``.

    Minimises the convex piecewise-linear objective ``sup |N(t) - c t|`` over
    ``c`` by ternary search.  Where the minimiser is not unique the largest
    minimising slope is reported, matching the supremum in the frame density.
    """
    if window is None:
        window = grid.extent
    if not window > 0:
        raise ValueError("window must be positive")
    t, N = _deviation_candidates(grid.points, window)
    n_inside = int(np.sum(np.abs(grid.points) <= window))
    if n_inside < 2:
        raise TooFewPoints(f"{n_inside} grid points inside [-{window}, {window}]")

    def objective(c):
        return float(np.max(np.abs(N - c * t)))

    c_hi = 4.0 * n_inside / window + 1.0
    c_star = _ternary_min(objective, 0.0, c_hi, tol)
    best = objective(c_star)
    # largest c still within round-off of the optimum
    slack = 1e-9 * max(1.0, best)
    lo, hi = c_star, c_hi
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if objective(mid) <= best + slack:
            lo = mid
        else:
            hi = mid
    return DensityReport(estimate=lo, deviation=objective(lo), window=float(window))


def validate_radial_grid(
    grid: RadialGrid,
    band: BandSpec,
    window: float | None = None,
    margin: float = DEFAULT_MARGIN,
    slope_tol: float = DEFAULT_SLOPE_TOL,
) -> DensityReport:
    """Compare the density estimate with the critical rate of ``band``.

    The critical rate is ``R/pi`` for a band in angular frequency (``2R`` in
    cycles).  Both sufficient conditions are strict inequalities, so the
    sampling verdict additionally requires a safety ``margin`` and a bounded
    deviation relative to the window.
    """
    rep = uniform_density_estimate(grid, window)
    crit = band.critical_density
    if rep.estimate > crit * (1.0 + margin) and rep.deviation / rep.window < slope_tol:
        verdict = Verdict.SAMPLING_OK
    elif rep.estimate > crit:
        verdict = Verdict.UNIQUENESS_OK
    else:
        verdict = Verdict.INSUFFICIENT
    return DensityReport(rep.estimate, rep.deviation, rep.window, verdict, crit)


def make_jittered_grid(spacing: float, jitter: float, halfwidth: float, seed: int) -> RadialGrid:
    """Perturbed lattice ``m*spacing + u_m*jitter*spacing``, ``m != 0``.

    ``u_m`` is uniform on [-1, 1] from a generator seeded with ``seed``; the
    minimum gap is at least ``spacing * (1 - 2 * jitter)``.
    """
    if not spacing > 0:
        raise ValueError("spacing must be positive")
    if not 0.0 <= jitter < 0.5:
        raise InvalidJitter(f"jitter must lie in [0, 0.5), got {jitter}")
    if not halfwidth > spacing:
        raise ValueError("halfwidth must exceed spacing")
    mmax = int(math.floor(halfwidth / spacing + 1e-12))
    m = np.arange(-mmax, mmax + 1)
    m = m[m != 0]
    rng = np.random.default_rng(seed)
    u = rng.uniform(-1.0, 1.0, size=m.size)
    pts = m * spacing + u * jitter * spacing
    pts[pts == 0.0] = spacing * 1e-6
    return RadialGrid(pts)


def make_uniform_grid(spacing: float, halfwidth: float, offset: float = 0.0) -> RadialGrid:
    """Lattice ``(m + offset) * spacing`` within ``[-halfwidth, halfwidth]``.

    With ``offset == 0`` the origin is left out; ``offset = 0.5`` gives the
    symmetric half-shifted lattice.
    """
    if offset == 0.0:
        return make_jittered_grid(spacing, 0.0, halfwidth, 0)
    if not 0.0 < offset < 1.0:
        raise ValueError("offset must lie in [0, 1)")
    if not spacing > 0:
        raise ValueError("spacing must be positive")
    m = np.arange(math.floor(-halfwidth / spacing - offset), math.ceil(halfwidth / spacing - offset) + 1)
    pts = (m + offset) * spacing
    return RadialGrid(pts[np.abs(pts) <= halfwidth * (1 + 1e-12)])


def equispaced_angles(count: int, offset: float = 0.0) -> AngularGrid:
    return AngularGrid(offset + np.arange(count) * math.pi / count)


def angular_matrix(angles, degree: int) -> np.ndarray:
    """``E[k, j] = exp(i n_j theta_k)`` for ``n_j = -degree..degree``."""
    n = np.arange(-degree, degree + 1)
    return np.exp(1j * np.outer(np.asarray(angles, dtype=float), n))


def validate_angular_grid(grid: AngularGrid, degree: int) -> float:
    """Spectral condition number of the angular interpolation matrix.

    Singular values are taken from the equivalent real matrix
    ``[[Re E, -Im E], [Im E, Re E]]`` through power and inverse power
    iteration on its Gram matrix.
    """
    if len(grid) != 2 * degree + 1:
        raise WrongCount(f"need {2 * degree + 1} angles for degree {degree}, got {len(grid)}")
    E = angular_matrix(grid.angles, degree)
    Er = np.block([[E.real, -E.imag], [E.imag, E.real]])
    lam_max, lam_min = power_extremes(Er.T @ Er, max_iter=100000, tol=1e-10)
    if lam_min <= lam_max / SINGULAR_CONDITION ** 2:
        raise Singular("angular interpolation matrix is numerically singular")
    cond = math.sqrt(lam_max / lam_min)
    if cond > SINGULAR_CONDITION:
        raise Singular(f"angular condition number {cond:.3e} exceeds {SINGULAR_CONDITION:g}")
    return cond
