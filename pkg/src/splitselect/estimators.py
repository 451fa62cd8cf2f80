"""Per-feature association estimators: OLS, lasso coordinate descent, CV, p-values.

All fits handle the intercept by centering the response and the columns;
coefficients are reported on the caller's column scale (callers standardize
columns first when magnitudes must be comparable across features).
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from numba import njit
from scipy.special import betainc


class RankError(ValueError):
    """The design is rank deficient or too ill-conditioned to fit."""


class ConvergenceWarning(UserWarning):
    """Coordinate descent hit the sweep cap before converging."""


# Condition-number cap for the least-squares fits; Gram systems beyond this
# are treated as rank deficient.
CONDITION_CAP = 1e10

_LASSO_TOL = 1e-7
_LASSO_MAX_SWEEPS = 10_000


@dataclass
class FitResult:
    """Outcome of a single model fit.

    ``penalty`` is the l1 penalty used (0 for OLS). ``iterations`` counts
    coordinate-descent sweeps (1 for direct solves).
    """

    coefficients: np.ndarray
    intercept: float
    penalty: float
    converged: bool
    iterations: int

    def __post_init__(self):
        self.coefficients = np.asarray(self.coefficients, dtype=np.float64)
        if not np.isfinite(self.coefficients).all():
            raise ValueError("fit produced non-finite coefficients")


@njit(cache=True, nogil=True)
def _cd_solve(G, c, w, penalty, tol, max_sweeps):
    """Cyclic coordinate descent on the gram form of the l1 problem.

    Minimizes 0.5 w'Gw - c'w + penalty*||w||_1 in place, where G = X'X/n and
    c = X'y/n for centered data. Maintains s = Gw so that an unchanged
    coordinate costs O(1); G is symmetric, so the update walks the
    contiguous row G[j] rather than a strided column. Returns
    (sweeps_run, converged).
    """
    p = w.shape[0]
    s = G @ w
    for sweep in range(1, max_sweeps + 1):
        max_delta = 0.0
        for j in range(p):
            gjj = G[j, j]
            wj = w[j]
            if gjj <= 0.0:
                # constant column in this sample: carries no signal
                new = 0.0
            else:
                rho = c[j] - s[j] + gjj * wj
                if rho > penalty:
                    new = (rho - penalty) / gjj
                elif rho < -penalty:
                    new = (rho + penalty) / gjj
                else:
                    new = 0.0
            delta = new - wj
            if delta != 0.0:
                w[j] = new
                row = G[j]
                for m in range(p):
                    s[m] += row[m] * delta
                ad = abs(delta)
                if ad > max_delta:
                    max_delta = ad
        if max_delta < tol:
            return sweep, True
    return max_sweeps, False


def _centered_grams(X: np.ndarray, y: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray, float]:
    """(G, c, col_means, y_mean) for the centered problem, with divisor n."""
    n = X.shape[0]
    xm = X.mean(axis=0)
    ym = y.mean()
    Xc = X - xm
    yc = y - ym
    G = Xc.T @ Xc / n
    c = Xc.T @ yc / n
    return G, c, xm, ym


def _check_xy(X, y) -> tuple[np.ndarray, np.ndarray]:
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if X.ndim != 2:
        raise ValueError(f"X must be 2-dimensional (got ndim={X.ndim})")
    if y.shape != (X.shape[0],):
        raise ValueError(f"y must have length {X.shape[0]} (got shape {y.shape})")
    return X, y


def ols_fit(X, y) -> FitResult:
    """Least-squares fit with intercept via column-mean centering.

    Requires n > p and a Gram condition number below ``CONDITION_CAP``;
    otherwise raises :class:`RankError`.
    """
    X, y = _check_xy(X, y)
    n, p = X.shape
    if n <= p:
        raise RankError(f"OLS needs n > p (got n={n}, p={p})")
    xm = X.mean(axis=0)
    ym = y.mean()
    coef, _, rank, svals = np.linalg.lstsq(X - xm, y - ym, rcond=None)
    if rank < p:
        raise RankError(f"design is rank deficient (rank {rank} < p={p})")
    cond = svals[0] / svals[-1]
    if cond > CONDITION_CAP:
        raise RankError(f"design condition number {cond:.3g} exceeds cap {CONDITION_CAP:.0e}")
    return FitResult(
        coefficients=coef,
        intercept=float(ym - xm @ coef),
        penalty=0.0,
        converged=True,
        iterations=1,
    )


def lasso_fit(
    X,
    y,
    penalty: float,
    *,
    tol: float = _LASSO_TOL,
    max_sweeps: int = _LASSO_MAX_SWEEPS,
    w0: np.ndarray | None = None,
) -> FitResult:
    """Cyclic coordinate descent for (1/2n)||y - Xw||^2 + penalty*||w||_1.

    Converged when the largest coefficient change within a sweep drops below
    ``tol`` (default 1e-7), with a hard cap of ``max_sweeps`` sweeps; hitting
    the cap returns the current iterate with ``converged=False`` and emits a
    :class:`ConvergenceWarning`. ``w0`` warm-starts the solve.
    """
    X, y = _check_xy(X, y)
    if penalty < 0:
        raise ValueError(f"penalty must be >= 0 (got {penalty})")
    G, c, xm, ym = _centered_grams(X, y)
    w = np.zeros(X.shape[1]) if w0 is None else np.array(w0, dtype=np.float64)
    if w.shape != (X.shape[1],):
        raise ValueError("w0 length must equal the number of columns of X")
    sweeps, converged = _cd_solve(G, c, w, float(penalty), float(tol), int(max_sweeps))
    if not converged:
        warnings.warn(
            f"coordinate descent did not converge in {max_sweeps} sweeps "
            f"(penalty={penalty:.3g})",
            ConvergenceWarning,
        )
    return FitResult(
        coefficients=w,
        intercept=float(ym - xm @ w),
        penalty=float(penalty),
        converged=bool(converged),
        iterations=int(sweeps),
    )


def max_penalty(X, y) -> float:
    """Smallest penalty at which the lasso solution is exactly zero: max|x_j'(y-mean)|/n."""
    X, y = _check_xy(X, y)
    n = X.shape[0]
    yc = y - y.mean()
    Xc = X - X.mean(axis=0)
    return float(np.abs(Xc.T @ yc).max() / n)


def penalty_grid(lam_max: float, size: int, min_ratio: float = 1e-3) -> np.ndarray:
    """Log-spaced penalty grid from lam_max down to min_ratio*lam_max, descending."""
    if size < 1:
        raise ValueError(f"grid size must be >= 1 (got {size})")
    if lam_max <= 0:
        raise ValueError(f"lam_max must be > 0 (got {lam_max})")
    return np.geomspace(lam_max, lam_max * min_ratio, size)


def _path_from_grams(G, c, penalties, tol, max_sweeps, w0=None):
    """Warm-started coefficient path over a descending penalty grid."""
    p = G.shape[0]
    W = np.empty((len(penalties), p))
    w = np.zeros(p) if w0 is None else np.array(w0, dtype=np.float64)
    for i, lam in enumerate(penalties):
        sweeps, converged = _cd_solve(G, c, w, float(lam), float(tol), int(max_sweeps))
        if not converged:
            warnings.warn(
                f"coordinate descent did not converge in {max_sweeps} sweeps "
                f"(penalty={lam:.3g})",
                ConvergenceWarning,
            )
        W[i] = w
    return W


def lasso_path(X, y, penalties, *, tol: float = _LASSO_TOL, max_sweeps: int = _LASSO_MAX_SWEEPS):
    """Coefficients and intercepts along a penalty grid, warm-started downward.

    Returns (W, intercepts) with W of shape (len(penalties), p). The grid
    must be positive and non-increasing.
    """
    X, y = _check_xy(X, y)
    penalties = np.asarray(penalties, dtype=np.float64)
    if penalties.size == 0 or (penalties <= 0).any():
        raise ValueError("penalty grid must be nonempty and positive")
    if (np.diff(penalties) > 0).any():
        raise ValueError("penalty grid must be non-increasing for warm starts")
    G, c, xm, ym = _centered_grams(X, y)
    W = _path_from_grams(G, c, penalties, tol, max_sweeps)
    intercepts = ym - W @ xm
    return W, intercepts


def lasso_cv(
    X,
    y,
    folds: int = 5,
    grid_size: int = 100,
    seed=0,
    *,
    tol: float = _LASSO_TOL,
    max_sweeps: int = _LASSO_MAX_SWEEPS,
    return_curve: bool = False,
):
    """K-fold cross-validated lasso.

    The grid is ``grid_size`` penalties log-spaced from lam_max down to
    1e-3*lam_max. Fold assignment is a seeded permutation chopped into
    contiguous blocks, so it is deterministic given the seed. Returns the
    full-data refit at the penalty minimizing mean validation MSE (ties go
    to the larger penalty). With ``return_curve`` the result is a
    ``(fit, grid, mean_mse)`` triple instead.
    """
    X, y = _check_xy(X, y)
    n, p = X.shape
    if folds < 2:
        raise ValueError(f"folds must be >= 2 (got {folds})")
    if n < folds:
        raise ValueError(f"need n >= folds (got n={n}, folds={folds})")
    lam_max = max_penalty(X, y)
    if lam_max == 0.0:
        # response carries no linear signal at all; every penalty gives w = 0
        fit = FitResult(np.zeros(p), float(y.mean()), 0.0, True, 0)
        if return_curve:
            return fit, np.zeros(0), np.zeros(0)
        return fit
    grid = penalty_grid(lam_max, grid_size)

    rng = np.random.default_rng(seed)
    perm = rng.permutation(n)
    fold_rows = np.array_split(perm, folds)

    # Full-data cross moments; per-fold training grams come from rank-1
    # downdates instead of re-multiplying the training block each time.
    S_full = X.T @ X
    t_full = X.T @ y
    colsum_full = X.sum(axis=0)
    ysum_full = float(y.sum())

    sq_err = np.zeros(len(grid))
    for rows in fold_rows:
        Xv = X[rows]
        yv = y[rows]
        n_tr = n - rows.size
        S_tr = S_full - Xv.T @ Xv
        t_tr = t_full - Xv.T @ yv
        xm = (colsum_full - Xv.sum(axis=0)) / n_tr
        ym = (ysum_full - float(yv.sum())) / n_tr
        G = S_tr / n_tr - np.outer(xm, xm)
        c = t_tr / n_tr - xm * ym
        W = _path_from_grams(G, c, grid, tol, max_sweeps)
        intercepts = ym - W @ xm
        preds = Xv @ W.T + intercepts
        sq_err += ((yv[:, None] - preds) ** 2).sum(axis=0)
    mean_mse = sq_err / n

    best = int(np.argmin(mean_mse))  # first minimum = largest penalty
    G, c, xm, ym = _centered_grams(X, y)
    w = np.zeros(p)
    total_sweeps = 0
    converged = True
    for lam in grid[: best + 1]:  # warm start down the prefix of the path
        sweeps, ok = _cd_solve(G, c, w, float(lam), float(tol), int(max_sweeps))
        total_sweeps += sweeps
        converged = converged and ok
    if not converged:
        warnings.warn(
            f"coordinate descent did not converge in {max_sweeps} sweeps during refit",
            ConvergenceWarning,
        )
    fit = FitResult(
        coefficients=w,
        intercept=float(ym - xm @ w),
        penalty=float(grid[best]),
        converged=bool(converged),
        iterations=total_sweeps,
    )
    if return_curve:
        return fit, grid, mean_mse
    return fit


def importance(fit: FitResult) -> np.ndarray:
    """Per-feature importance: elementwise absolute value of the coefficients."""
    return np.abs(fit.coefficients)


def ols_pvalues(X, y) -> np.ndarray:
    """Two-sided p-values for the OLS coefficient t-statistics.

    Uses n - p - 1 degrees of freedom (intercept absorbed by centering); the
    t tail probability is evaluated through the regularized incomplete beta
    function.
    """
    X, y = _check_xy(X, y)
    n, p = X.shape
    if n <= p + 1:
        raise RankError(f"t-test p-values need n > p + 1 (got n={n}, p={p})")
    fit = ols_fit(X, y)
    coef = fit.coefficients
    Xc = X - X.mean(axis=0)
    yc = y - y.mean()
    resid = yc - Xc @ coef
    df = n - p - 1
    sigma2 = float(resid @ resid) / df
    gram_inv = np.linalg.inv(Xc.T @ Xc)
    if sigma2 == 0.0:
        # perfect fit: any nonzero coefficient is infinitely significant
        return np.where(coef != 0.0, 0.0, 1.0)
    se = np.sqrt(sigma2 * np.diag(gram_inv))
    t = coef / se
    return betainc(df / 2.0, 0.5, df / (df + t**2))


def get_estimator(
    name: str,
    *,
    folds: int = 5,
    grid_size: int = 100,
    tol: float = _LASSO_TOL,
    max_sweeps: int = _LASSO_MAX_SWEEPS,
):
    """Estimator factory for the selection procedures.

    Returns a callable ``(X, y, seed) -> FitResult``; the seed only matters
    for the cross-validated lasso (fold assignment).
    """
    if name == "ols":
        return lambda X, y, seed: ols_fit(X, y)
    if name == "lasso":
        return lambda X, y, seed: lasso_cv(
            X, y, folds=folds, grid_size=grid_size, seed=seed, tol=tol, max_sweeps=max_sweeps
        )
    raise ValueError(f"unknown estimator {name!r} (expected 'ols' or 'lasso')")
