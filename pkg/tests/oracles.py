"""Slow, obviously-correct reference solvers used only by the tests."""

import numpy as np


def _loss_grad(x1, y, w, beta, logistic):
    eta = x1 @ beta
    W = w.sum()
    if logistic:
        mu = 1 / (1 + np.exp(-eta))
        f = np.logaddexp(0, eta) - y * eta
        return (w @ f) / W, x1.T @ (w * (mu - y)) / W
    r = y - eta
    return (w @ r**2) / W, -2 * x1.T @ (w * r) / W


def prox_group(v, groups, t):
    out = v.copy()
    for g, tg in zip(groups, t):
        g = np.asarray(g) + 1
        nrm = np.linalg.norm(v[g])
        out[g] = 0.0 if nrm <= tg else v[g] * (1 - tg / nrm)
    return out


def fista_group_lasso(x, y, w, groups, pen, lam, logistic=False, iters=20000):
    """Accelerated proximal gradient on the intercept-first coefficient vector."""
    n, p = x.shape
    x1 = np.column_stack([np.ones(n), x])
    W = w.sum()
    H = (x1.T * w) @ x1 / W
    L = np.linalg.eigvalsh(H).max() * (0.25 if logistic else 2.0)
    beta = np.zeros(p + 1)
    z, t = beta.copy(), 1.0
    for _ in range(iters):
        _, g = _loss_grad(x1, y, w, z, logistic)
        new = prox_group(z - g / L, groups, lam * np.asarray(pen) / L)
        t_new = (1 + np.sqrt(1 + 4 * t * t)) / 2
        z = new + (t - 1) / t_new * (new - beta)
        if np.max(np.abs(new - beta)) < 1e-13:
            beta = new
            break
        beta, t = new, t_new
    return beta
