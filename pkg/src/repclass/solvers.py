"""Numerical coders: ridge, l1-residual ALM, l1 proximal gradient, OMP."""

from dataclasses import dataclass, field

import numpy as np

from .backend import alm_l1res_kernel, fista_l1_kernel, power_iteration_sq, shrink_kernel
from .dictionary import Dictionary, Projector
from .errors import (
    BadGrid,
    BadSparsity,
    DimensionMismatch,
    FingerprintMismatch,
    NegativeThreshold,
    NonPositiveLambda,
)


@dataclass
class CodingResult:
    """Coding coefficients plus solver diagnostics.

    residual_vec is the explicit outlier vector e of l1-residual coding and
    is None for the other solvers; multiplier is the final Lagrange
    multiplier of the ALM solver (diagnostic, used by optimality checks).
    """

    alpha: np.ndarray
    objective: float
    iterations: int = 0
    converged: bool = True
    residual_vec: np.ndarray | None = None
    multiplier: np.ndarray | None = None


@dataclass(frozen=True)
class AlmParams:
    mu0: float = 1.0
    rho: float = 1.2
    tol: float = 1e-6
    max_iter: int = 500
    mu_max: float = 1e4
    inner_max: int = 30

    def __post_init__(self):
        if self.mu0 <= 0 or self.rho <= 1 or self.tol <= 0 or self.max_iter < 1:
            raise ValueError("need mu0 > 0, rho > 1, tol > 0, max_iter >= 1")
        if self.mu_max < self.mu0 or self.inner_max < 1:
            raise ValueError("need mu_max >= mu0 and inner_max >= 1")


@dataclass(frozen=True)
class FistaParams:
    tol: float = 1e-10
    max_iter: int = 5000

    def __post_init__(self):
        if self.tol <= 0 or self.max_iter < 1:
            raise ValueError("need tol > 0, max_iter >= 1")


def _as_matrix(X):
    if isinstance(X, Dictionary):
        return X.data
    return np.asarray(X, dtype=np.float64)


def _check_dims(X, y):
    y = np.asarray(y, dtype=np.float64).ravel()
    if X.shape[0] != y.shape[0]:
        raise DimensionMismatch(f"X has {X.shape[0]} rows but y has length {y.shape[0]}")
    return y


def shrink(x, a):
    """Soft-thresholding: sign(x) * max(|x| - a, 0), componentwise."""
    if a < 0:
        raise NegativeThreshold(f"threshold must be nonnegative, got {a}")
    return shrink_kernel(np.asarray(x, dtype=np.float64), float(a))


def solve_rls(X, y, lam=None):
    """Ridge coding: minimize ||y - X a||_2^2 + lam * ||a||_2^2 in closed form.

    X may be a matrix, a Dictionary, or a precomputed Projector (in which
    case its stored lambda is used and the solve is a single matrix-vector
    product).
    """
    if isinstance(X, Projector):
        P = X.matrix
        lam = X.lam
        y = np.asarray(y, dtype=np.float64).ravel()
        if P.shape[1] != y.shape[0]:
            raise DimensionMismatch(
                f"projector expects dimension {P.shape[1]}, got {y.shape[0]}"
            )
        alpha = P @ y
        if X.source is None:
            raise FingerprintMismatch(
                "projector carries no source dictionary; pass the matrix instead"
            )
        r = y - X.source.data @ alpha
        obj = float(r @ r + lam * alpha @ alpha)
        return CodingResult(alpha=alpha, objective=obj, iterations=0, converged=True)
    Xm = _as_matrix(X)
    y = _check_dims(Xm, y)
    if lam is None or lam <= 0:
        raise NonPositiveLambda(f"lambda must be positive, got {lam}")
    n = Xm.shape[1]
    gram = Xm.T @ Xm + lam * np.eye(n)
    alpha = np.linalg.solve(gram, Xm.T @ y)
    r = y - Xm @ alpha
    obj = float(r @ r + lam * alpha @ alpha)
    return CodingResult(alpha=alpha, objective=obj, iterations=0, converged=True)


# SVD cache for the ALM ridge-projection family, keyed by matrix identity.
_SVD_CACHE: dict = {}
_SVD_CACHE_MAX = 8

# spectral-norm cache for repeated FISTA queries on one matrix
_SIGMA_CACHE: dict = {}


def _cached_sigma_sq(X, Xt):
    key = id(X)
    hit = _SIGMA_CACHE.get(key)
    if hit is not None and hit[0] is X:
        return hit[1]
    val = power_iteration_sq(X, Xt, 1e-6, 1000)
    if len(_SIGMA_CACHE) >= _SVD_CACHE_MAX:
        _SIGMA_CACHE.pop(next(iter(_SIGMA_CACHE)))
    _SIGMA_CACHE[key] = (X, val)
    return val


def _thin_svd(X):
    key = id(X)
    hit = _SVD_CACHE.get(key)
    if hit is not None and hit[0] is X:
        return hit[1]
    U, s, Vt = np.linalg.svd(X, full_matrices=False)
    if len(_SVD_CACHE) >= _SVD_CACHE_MAX:
        _SVD_CACHE.pop(next(iter(_SVD_CACHE)))
    _SVD_CACHE[key] = (X, (U, s, Vt))
    return U, s, Vt


def solve_alm_l1res(X, y, lam, params=None):
    """l1-residual ridge coding: min ||e||_1 + lam*||a||_2^2 s.t. y = X a + e.

    Alternates closed-form ridge updates of a, shrinkage updates of e, and
    multiplier ascent under a geometrically growing penalty. The per-penalty
    ridge projections are applied through one cached SVD of X, shared across
    queries on the same matrix.
    """
    Xm = _as_matrix(X)
    y = _check_dims(Xm, y)
    if lam <= 0:
        raise NonPositiveLambda(f"lambda must be positive, got {lam}")
    if params is None:
        params = AlmParams()
    U, s, Vt = _thin_svd(Xm)
    alpha, e, z, it, converged = alm_l1res_kernel(
        U, s, Vt, Xm, y, float(lam),
        params.mu0, params.rho, params.mu_max, params.tol,
        params.max_iter, params.inner_max,
    )
    obj = float(np.sum(np.abs(e)) + lam * alpha @ alpha)
    return CodingResult(
        alpha=alpha,
        objective=obj,
        iterations=int(it),
        converged=bool(converged),
        residual_vec=e,
        multiplier=z,
    )


def solve_fista_l1(X, y, lam, params=None):
    """l1-regularized coding: minimize ||y - X a||_2^2 + lam * ||a||_1.

    Accelerated proximal gradient with step 1/L (L = Lipschitz constant of
    the smooth gradient, from power iteration) and momentum restart on
    objective increase.
    """
    Xm = np.ascontiguousarray(_as_matrix(X))
    y = _check_dims(Xm, y)
    if lam <= 0:
        raise NonPositiveLambda(f"lambda must be positive, got {lam}")
    if params is None:
        params = FistaParams()
    Xt = np.ascontiguousarray(Xm.T)
    sigma_sq = _cached_sigma_sq(Xm, Xt)
    if sigma_sq == 0.0:
        return CodingResult(alpha=np.zeros(Xm.shape[1]), objective=float(y @ y))
    step = 1.0 / (2.0 * sigma_sq)
    alpha, obj, it, converged = fista_l1_kernel(
        Xm, Xt, y, float(lam), step, params.tol, params.max_iter
    )
    return CodingResult(
        alpha=alpha, objective=float(obj), iterations=int(it), converged=bool(converged)
    )


def solve_omp(X, y, k):
    """Orthogonal matching pursuit with full least-squares refit per step."""
    Xm = _as_matrix(X)
    y = _check_dims(Xm, y)
    n = Xm.shape[1]
    if not (1 <= k <= n):
        raise BadSparsity(f"need 1 <= k <= {n}, got {k}")
    support = []
    coef = np.zeros(0)
    alpha = np.zeros(n)
    residual = y.copy()
    for _ in range(int(k)):
        corr = np.abs(Xm.T @ residual)
        corr[support] = -1.0
        j = int(np.argmax(corr))
        if corr[j] <= 1e-14:
            break
        support.append(j)
        sub = Xm[:, support]
        coef, *_ = np.linalg.lstsq(sub, y, rcond=None)
        residual = y - sub @ coef
    if support:
        alpha[support] = coef
    r = y - Xm @ alpha
    return CodingResult(alpha=alpha, objective=float(r @ r), iterations=len(support))


def solve_constrained_lp(X, y, p, grid):
    """Residual-versus-budget curve for norm-constrained least squares.

    For p=0 the budget is an atom count solved by OMP; for p=1 and p=2 a
    descending Lagrangian sweep builds the Pareto frontier of
    (||a||_p, ||y - X a||_2) pairs and each budget reports the smallest
    attainable residual. Curves are nonincreasing in the budget.
    """
    Xm = _as_matrix(X)
    y = _check_dims(Xm, y)
    grid = list(grid)
    if not grid or any(b >= a for a, b in zip(grid[1:], grid)):
        raise BadGrid("grid must be nonempty and strictly increasing")
    if p not in (0, 1, 2):
        raise BadGrid(f"p must be 0, 1, or 2, got {p}")
    ynorm = float(np.linalg.norm(y))
    if p == 0:
        out = []
        for eps in grid:
            if eps <= 0:
                out.append((eps, ynorm))
                continue
            k = min(int(eps), Xm.shape[1])
            res = solve_omp(Xm, y, k)
            out.append((eps, float(np.sqrt(res.objective))))
        return _monotone(out)
    # Lagrangian sweep; the unregularized least-squares point anchors the
    # large-budget end of the frontier.
    pairs = [(0.0, ynorm)]
    alpha_ls, *_ = np.linalg.lstsq(Xm, y, rcond=None)
    pairs.append(_pair(Xm, y, alpha_ls, p))
    for lam in np.logspace(-6, 3, 60):
        if p == 2:
            alpha = solve_rls(Xm, y, lam).alpha
        else:
            alpha = solve_fista_l1(Xm, y, lam).alpha
        pairs.append(_pair(Xm, y, alpha, p))
    out = []
    for eps in grid:
        feas = [r for nrm, r in pairs if nrm <= eps + 1e-12]
        out.append((eps, min(feas) if feas else ynorm))
    return _monotone(out)


def _pair(X, y, alpha, p):
    nrm = float(np.sum(np.abs(alpha))) if p == 1 else float(np.linalg.norm(alpha))
    return nrm, float(np.linalg.norm(y - X @ alpha))


def _monotone(curve):
    best = np.inf
    out = []
    for eps, r in curve:
        best = min(best, r)
        out.append((eps, best))
    return out
