"""Compiled inner loops for the coordinate and block coordinate descent solvers.

All kernels work on a weighted sample: ``x`` holds the distinct rows (Fortran
order so columns are contiguous), ``w`` their nonnegative weights. Losses are
normalized by ``w.sum()``.
"""

import numpy as np
from numba import njit

GAUSSIAN_LOSS = 0
LOGISTIC_LOSS = 1


@njit(cache=True)
def soft_threshold(z, t):
    if z > t:
        return z - t
    if z < -t:
        return z + t
    return 0.0


@njit(cache=True)
def _logistic_loss(y, w, eta, wsum):
    total = 0.0
    for i in range(eta.shape[0]):
        e = eta[i]
        # log(1 + exp(e)) without overflow
        if e > 0:
            lp = e + np.log1p(np.exp(-e))
        else:
            lp = np.log1p(np.exp(e))
        total += w[i] * (lp - y[i] * e)
    return total / wsum


@njit(cache=True)
def _sigmoid(e):
    if e >= 0:
        return 1.0 / (1.0 + np.exp(-e))
    z = np.exp(e)
    return z / (1.0 + z)


@njit(cache=True)
def lasso_objective(x, y, w, beta, lam):
    m, p = x.shape
    wsum = w.sum()
    total = 0.0
    for i in range(m):
        r = y[i] - beta[0]
        for j in range(p):
            r -= x[i, j] * beta[j + 1]
        total += w[i] * r * r
    pen = 0.0
    for j in range(p):
        pen += abs(beta[j + 1])
    return total / wsum + lam * pen


@njit(cache=True)
def _lasso_sweep(x, w, wsum, colsq, lam, beta, resid, active, only_active):
    """One cyclic pass; returns the largest absolute coefficient change."""
    m, p = x.shape
    # unpenalized intercept: exact minimization
    s = 0.0
    for i in range(m):
        s += w[i] * resid[i]
    d0 = s / wsum
    if d0 != 0.0:
        beta[0] += d0
        for i in range(m):
            resid[i] -= d0
    maxchg = abs(d0)
    for j in range(p):
        if only_active and not active[j]:
            continue
        cj = colsq[j]
        old = beta[j + 1]
        if cj <= 0.0:
            new = 0.0
        else:
            g = 0.0
            for i in range(m):
                g += w[i] * x[i, j] * resid[i]
            z = g / wsum + cj * old
            new = soft_threshold(z, 0.5 * lam) / cj
        if new != old:
            delta = new - old
            for i in range(m):
                resid[i] -= x[i, j] * delta
            beta[j + 1] = new
            if abs(delta) > maxchg:
                maxchg = abs(delta)
        active[j] = new != 0.0
    return maxchg


@njit(cache=True)
def ccd_lasso(x, y, w, lam, beta, max_sweeps, tol, use_active):
    """Cyclic coordinate descent for (1/W) sum w r^2 + lam * ||beta[1:]||_1.

    ``beta`` is updated in place. Returns ``(sweeps, converged)``.
    """
    m, p = x.shape
    wsum = w.sum()
    colsq = np.zeros(p)
    for j in range(p):
        c = 0.0
        for i in range(m):
            c += w[i] * x[i, j] * x[i, j]
        colsq[j] = c / wsum
    resid = y.copy()
    for i in range(m):
        resid[i] -= beta[0]
        for j in range(p):
            resid[i] -= x[i, j] * beta[j + 1]
    active = np.zeros(p, dtype=np.bool_)
    sweeps = 0
    converged = False
    while sweeps < max_sweeps:
        chg = _lasso_sweep(x, w, wsum, colsq, lam, beta, resid, active, False)
        sweeps += 1
        if chg < tol:
            converged = True
            break
        if use_active:
            while sweeps < max_sweeps:
                chg = _lasso_sweep(x, w, wsum, colsq, lam, beta, resid, active, True)
                sweeps += 1
                if chg < tol:
                    break
    return sweeps, converged


@njit(cache=True)
def group_objective(x, y, w, beta, lam, starts, pen, loss):
    m, p = x.shape
    wsum = w.sum()
    eta = np.empty(m)
    for i in range(m):
        e = beta[0]
        for j in range(p):
            e += x[i, j] * beta[j + 1]
        eta[i] = e
    if loss == GAUSSIAN_LOSS:
        total = 0.0
        for i in range(m):
            r = y[i] - eta[i]
            total += w[i] * r * r
        val = total / wsum
    else:
        val = _logistic_loss(y, w, eta, wsum)
    G = starts.shape[0] - 1
    for g in range(G):
        nrm = 0.0
        for j in range(starts[g], starts[g + 1]):
            nrm += beta[j + 1] * beta[j + 1]
        val += lam * pen[g] * np.sqrt(nrm)
    return val


@njit(cache=True)
def _design(x):
    """Fortran-ordered copy of x with a leading column of ones."""
    m, p = x.shape
    xa = np.empty((p + 1, m)).T
    for i in range(m):
        xa[i, 0] = 1.0
    for j in range(p):
        for i in range(m):
            xa[i, j + 1] = x[i, j]
    return xa


@njit(cache=True)
def _weighted_gram(xa, h):
    m, q = xa.shape
    xh = np.empty((q, m)).T
    for j in range(q):
        for i in range(m):
            xh[i, j] = xa[i, j] * h[i]
    return np.ascontiguousarray(xa.T) @ xh


@njit(cache=True)
def _block_bounds(gram, starts, out):
    """Largest eigenvalue of every diagonal block of the Gram matrix.

    ``gram`` includes the intercept in row/column 0, so group g occupies
    ``starts[g] + 1 : starts[g + 1] + 1``.
    """
    G = starts.shape[0] - 1
    for g in range(G):
        a = starts[g] + 1
        b = starts[g + 1] + 1
        if b - a == 1:
            top = gram[a, a]
        else:
            top = np.linalg.eigvalsh(np.ascontiguousarray(gram[a:b, a:b]))[-1]
        out[g] = top if top > 1e-12 else 0.0


@njit(cache=True)
def _gram_pass(gram, grad, beta, lam, starts, pen, lips, max_inner, tol,
               active, only_active):
    """One block-descent pass on 0.5 b'Ab - c'b + lam * sum pen_g ||b_g||.

    ``grad`` holds A beta - c and is kept in sync with ``beta``.
    """
    q = gram.shape[0]
    G = starts.shape[0] - 1
    maxchg = 0.0
    if gram[0, 0] > 0.0:
        d0 = -grad[0] / gram[0, 0]
        if d0 != 0.0:
            beta[0] += d0
            for r in range(q):
                grad[r] += gram[r, 0] * d0
            maxchg = abs(d0)
    for g in range(G):
        if only_active and not active[g]:
            continue
        a = starts[g] + 1
        b = starts[g + 1] + 1
        k = b - a
        L = lips[g]
        if L <= 0.0:
            for c in range(a, b):
                d = -beta[c]
                if d != 0.0:
                    beta[c] = 0.0
                    for r in range(q):
                        grad[r] += gram[r, c] * d
            active[g] = False
            continue
        thr = lam * pen[g] / L
        u = np.empty(k)
        scale = 0.0
        old = beta[a:b].copy()
        for _ in range(max_inner):
            nrm = 0.0
            for jj in range(k):
                u[jj] = beta[a + jj] - grad[a + jj] / L
                nrm += u[jj] * u[jj]
            nrm = np.sqrt(nrm)
            scale = 0.0
            if nrm > thr:
                scale = 1.0 - thr / nrm
            step = 0.0
            for jj in range(k):
                c = a + jj
                new = scale * u[jj]
                d = new - beta[c]
                if d != 0.0:
                    beta[c] = new
                    for r in range(q):
                        grad[r] += gram[r, c] * d
                    if abs(d) > step:
                        step = abs(d)
            # a singleton block is minimized exactly in one step
            if k == 1 or step < tol:
                break
        for jj in range(k):
            d = abs(beta[a + jj] - old[jj])
            if d > maxchg:
                maxchg = d
        active[g] = scale > 0.0
    return maxchg


@njit(cache=True)
def _gram_solve(gram, grad, beta, lam, starts, pen, lips, max_passes,
                max_inner, tol, use_active):
    G = starts.shape[0] - 1
    active = np.zeros(G, dtype=np.bool_)
    passes = 0
    converged = False
    while passes < max_passes:
        chg = _gram_pass(gram, grad, beta, lam, starts, pen, lips, max_inner,
                         tol, active, False)
        passes += 1
        if chg < tol:
            converged = True
            break
        if use_active:
            while passes < max_passes:
                c2 = _gram_pass(gram, grad, beta, lam, starts, pen, lips,
                                max_inner, tol, active, True)
                passes += 1
                if c2 < tol:
                    break
    return passes, converged


@njit(cache=True)
def _penalty(beta, lam, starts, pen):
    val = 0.0
    for g in range(starts.shape[0] - 1):
        nrm = 0.0
        for j in range(starts[g], starts[g + 1]):
            nrm += beta[j + 1] * beta[j + 1]
        val += lam * pen[g] * np.sqrt(nrm)
    return val


@njit(cache=True)
def bcd_gaussian(x, y, w, lam, beta, starts, pen, max_passes, max_inner, tol,
                 use_active):
    """Group Lasso with squared-error loss (1/W) sum w (y - eta)^2.

    The loss is an exact quadratic in beta, so block descent runs on its
    weighted Gram matrix. ``beta`` is updated in place. Returns
    ``(passes, converged)``.
    """
    wsum = w.sum()
    h = 2.0 * w / wsum
    xa = _design(x)
    gram = _weighted_gram(xa, h)
    lips = np.empty(starts.shape[0] - 1)
    _block_bounds(gram, starts, lips)
    hy = h * y
    grad = gram @ beta - np.ascontiguousarray(xa.T) @ hy
    return _gram_solve(gram, grad, beta, lam, starts, pen, lips, max_passes,
                       max_inner, tol, use_active)


@njit(cache=True)
def newton_logistic(x, y, w, lam, beta, starts, pen, max_outer, max_passes,
                    max_inner, tol, plateau, bound, use_active):
    """Logistic Group Lasso by proximal Newton with backtracking.

    Each outer step minimizes the penalized second-order model of the
    weighted negative log-likelihood by block descent on its Gram matrix,
    then backtracks along the resulting direction until the true objective
    decreases sufficiently. ``beta`` is updated in place. Returns
    ``(steps, inner_passes, converged, separated)``.
    """
    m, p = x.shape
    wsum = w.sum()
    G = starts.shape[0] - 1
    xa = _design(x)
    xat = np.ascontiguousarray(xa.T)
    eta = xa @ beta
    h = np.empty(m)
    fw = np.empty(m)
    lips = np.empty(G)
    f_old = _logistic_loss(y, w, eta, wsum) + _penalty(beta, lam, starts, pen)
    steps = 0
    total_passes = 0
    converged = False
    separated = False
    while steps < max_outer:
        steps += 1
        for i in range(m):
            mu = _sigmoid(eta[i])
            v = mu * (1.0 - mu)
            if v < 1e-10:
                v = 1e-10
            h[i] = w[i] * v / wsum
            fw[i] = w[i] * (mu - y[i]) / wsum
        gram = _weighted_gram(xa, h)
        _block_bounds(gram, starts, lips)
        # gradient of the quadratic model at the current point = loss gradient
        grad0 = xat @ fw
        grad = grad0.copy()
        cand = beta.copy()
        passes, _ = _gram_solve(gram, grad, cand, lam, starts, pen, lips,
                                max_passes, max_inner, 0.1 * tol, use_active)
        total_passes += passes
        direction = cand - beta
        pen_old = _penalty(beta, lam, starts, pen)
        delta_model = (grad0 @ direction + _penalty(cand, lam, starts, pen)
                       - pen_old)
        t = 1.0
        accepted = False
        f_new = f_old
        trial = beta.copy()
        eta_c = eta.copy()
        for _ in range(50):
            trial = beta + t * direction
            eta_c = xa @ trial
            f_new = (_logistic_loss(y, w, eta_c, wsum)
                     + _penalty(trial, lam, starts, pen))
            if f_new <= f_old + 1e-4 * t * delta_model:
                accepted = True
                break
            t *= 0.5
        if not accepted:
            # no decrease available: the model step is numerically null
            converged = delta_model > -1e-12 * max(abs(f_old), 1.0)
            break
        maxchg = np.max(np.abs(trial - beta))
        beta[:] = trial
        eta = eta_c
        rel = abs(f_old - f_new) / max(abs(f_new), 1e-300)
        f_old = f_new
        # a vanishing likelihood term means the classes are split perfectly
        if (np.max(np.abs(beta)) > bound
                or _logistic_loss(y, w, eta, wsum) < 1e-10):
            separated = True
            break
        if maxchg < tol or (plateau > 0.0 and rel <= plateau):
            converged = True
            break
    return steps, total_passes, converged, separated
