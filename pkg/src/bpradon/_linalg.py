import warnings

import numpy as np
import scipy.linalg as sla


def power_extremes(A: np.ndarray, max_iter: int = 100, tol: float | None = None, seed: int = 0):
    """Largest and smallest eigenvalue of a symmetric positive (semi)definite matrix.

    Power iteration for the top, inverse power iteration (Cholesky, LU as a
    fallback) for the bottom.  With ``tol`` set, stops once the Rayleigh
    eigen-residual ``||A x - lam x||`` drops below ``tol * lam``; otherwise runs
    exactly ``max_iter`` steps.  A singular matrix yields a smallest eigenvalue of 0.
    """
    A = np.asarray(A, dtype=float)
    x0 = np.random.default_rng(seed).standard_normal(A.shape[0])

    def iterate(apply):
        x = x0 / np.linalg.norm(x0)
        lam = 0.0
        for _ in range(max_iter):
            y = apply(x)
            ny = np.linalg.norm(y)
            if ny == 0 or not np.isfinite(ny):
                return lam
            lam = float(x @ y)
            if tol is not None and np.linalg.norm(y - lam * x) <= tol * abs(lam):
                return lam
            x = y / ny
        return lam

    lam_max = iterate(lambda v: A @ v)
    try:
        fac = sla.cho_factor(A, check_finite=False)
        solve = lambda v: sla.cho_solve(fac, v, check_finite=False)  # noqa: E731
    except np.linalg.LinAlgError:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", sla.LinAlgWarning)
            lu = sla.lu_factor(A, check_finite=False)
        if np.min(np.abs(np.diag(lu[0]))) <= 1e-300:
            return lam_max, 0.0
        solve = lambda v: sla.lu_solve(lu, v, check_finite=False)  # noqa: E731
    mu = iterate(solve)
    return lam_max, (1.0 / mu if mu > 0 else 0.0)
