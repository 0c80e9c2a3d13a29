"""Hot iteration kernels, JIT-compiled with numba when available.

Set REPCLASS_DISABLE_NUMBA=1 to force the pure-numpy path (also used when
numba is not importable). Both paths run the same source; the kernels are
written in the nopython-compatible numpy subset. Matrix factorizations are
done by the callers (BLAS/LAPACK); the kernels only run the per-query loops.
"""

import os

import numpy as np

_DISABLE = os.environ.get("REPCLASS_DISABLE_NUMBA", "").strip() in ("1", "true", "yes")

if not _DISABLE:
    try:
        from numba import njit

        NUMBA_ENABLED = True
    except ImportError:  # pragma: no cover - numba is a declared dependency
        NUMBA_ENABLED = False
else:
    NUMBA_ENABLED = False


def _shrink_impl(x, a):
    return np.sign(x) * np.maximum(np.abs(x) - a, 0.0)


def _alm_l1res_impl(U, s, Vt, X, y, lam, mu0, rho, mu_max, tol, max_iter, inner_max):
    """Augmented-Lagrangian loop for min ||e||_1 + lam*||a||_2^2 s.t. y = X a + e.

    U, s, Vt is the thin SVD of X; the ridge-projection step
    a = (X^T X + c I)^{-1} X^T w is applied as Vt^T diag(s/(s^2+c)) U^T w,
    which realizes the precomputed per-penalty projection family without
    materializing one matrix per penalty value.

    Each multiplier step minimizes the augmented Lagrangian by alternating
    (a, e) updates; the inner loop exits once mu*||de|| is small, which
    bounds the stationarity error 2*lam*a - X^T z of the outer iterate.
    The penalty is capped so the late iterations retain contraction (an
    unbounded schedule freezes the primal iterate off the optimum).
    """
    m = y.shape[0]
    n = X.shape[1]
    alpha = np.zeros(n)
    e = np.zeros(m)
    z = np.zeros(m)
    mu = mu0
    ynorm = np.sqrt(np.sum(y * y))
    if ynorm == 0.0:
        return alpha, e, z, 0, True
    converged = False
    it = 0
    xa = np.zeros(m)
    change = 0.0
    while it < max_iter:
        it += 1
        for _ in range(inner_max):
            w = y - e + z / mu
            t = np.dot(U.T, w)
            c = 2.0 * lam / mu
            t = t * (s / (s * s + c))
            alpha_new = np.dot(Vt.T, t)
            xa = np.dot(X, alpha_new)
            v = y - xa + z / mu
            e_new = np.sign(v) * np.maximum(np.abs(v) - 1.0 / mu, 0.0)
            da = alpha_new - alpha
            de = e_new - e
            change = np.sqrt(np.sum(da * da) + np.sum(de * de))
            de_norm = np.sqrt(np.sum(de * de))
            alpha = alpha_new
            e = e_new
            anorm = np.sqrt(np.sum(alpha * alpha))
            if mu * de_norm <= 10.0 * tol * (1.0 + anorm):
                break
        gap = y - xa - e
        z = z + mu * gap
        grad = 2.0 * lam * alpha - np.dot(X.T, z)
        stat = np.sqrt(np.sum(grad * grad))
        anorm = np.sqrt(np.sum(alpha * alpha))
        scale = np.sqrt(np.sum(alpha * alpha) + np.sum(e * e)) + 1e-30
        feas = np.sqrt(np.sum(gap * gap))
        if (
            feas <= tol * ynorm
            and change <= tol * scale
            and stat <= 100.0 * tol * (1.0 + anorm)
        ):
            converged = True
            break
        mu = min(mu * rho, mu_max)
    return alpha, e, z, it, converged


def _fista_l1_impl(X, Xt, y, lam, step, tol, max_iter):
    """Accelerated proximal gradient for min ||y - X a||_2^2 + lam*||a||_1.

    Momentum is restarted whenever the objective increases.
    """
    n = X.shape[1]
    alpha = np.zeros(n)
    v = alpha.copy()
    tk = 1.0
    r0 = y - np.dot(X, alpha)
    obj = np.sum(r0 * r0) + lam * np.sum(np.abs(alpha))
    converged = False
    it = 0
    while it < max_iter:
        it += 1
        r = np.dot(X, v) - y
        grad = 2.0 * np.dot(Xt, r)
        g = v - step * grad
        alpha_new = np.sign(g) * np.maximum(np.abs(g) - step * lam, 0.0)
        res = y - np.dot(X, alpha_new)
        obj_new = np.sum(res * res) + lam * np.sum(np.abs(alpha_new))
        if obj_new > obj:
            # restart momentum from the last accepted iterate
            v = alpha.copy()
            tk = 1.0
            r = np.dot(X, v) - y
            grad = 2.0 * np.dot(Xt, r)
            g = v - step * grad
            alpha_new = np.sign(g) * np.maximum(np.abs(g) - step * lam, 0.0)
            res = y - np.dot(X, alpha_new)
            obj_new = np.sum(res * res) + lam * np.sum(np.abs(alpha_new))
        tk_new = 0.5 * (1.0 + np.sqrt(1.0 + 4.0 * tk * tk))
        v = alpha_new + ((tk - 1.0) / tk_new) * (alpha_new - alpha)
        tk = tk_new
        rel = abs(obj - obj_new) / (abs(obj) + 1e-30)
        alpha = alpha_new
        obj = obj_new
        if rel <= tol:
            converged = True
            break
    return alpha, obj, it, converged


def _power_iteration_sq_impl(X, Xt, tol, max_iter):
    """Largest squared singular value of X, by power iteration on X^T X."""
    n = X.shape[1]
    v = np.ones(n) / np.sqrt(n)
    lam = 0.0
    for _ in range(max_iter):
        w = np.dot(Xt, np.dot(X, v))
        nw = np.sqrt(np.sum(w * w))
        if nw == 0.0:
            return 0.0
        v = w / nw
        lam_new = nw
        if abs(lam_new - lam) <= tol * lam_new:
            return lam_new
        lam = lam_new
    return lam


if NUMBA_ENABLED:
    shrink_kernel = njit(cache=True)(_shrink_impl)
    alm_l1res_kernel = njit(cache=True)(_alm_l1res_impl)
    fista_l1_kernel = njit(cache=True)(_fista_l1_impl)
    power_iteration_sq = njit(cache=True)(_power_iteration_sq_impl)
else:
    shrink_kernel = _shrink_impl
    alm_l1res_kernel = _alm_l1res_impl
    fista_l1_kernel = _fista_l1_impl
    power_iteration_sq = _power_iteration_sq_impl
