"""Compiled kernels for the penalized local logistic solver.

All kernels work on a column-centered, column-scaled local design ``Z``
(k x p) and minimize the averaged objective

    F(a, beta) = (1/k) sum_i softplus(+-eta_i) + sum_j pen_j |beta_j|,
    eta = a + Z beta,

where the sign in front of ``eta_i`` is ``-`` for label 1 and ``+`` for
label 0. Every quantity is computed so that flipping all labels maps the
iterates to their exact negatives: ``expit`` is always evaluated at both
``eta`` and ``-eta`` and never through ``1 - expit``.
"""

import numpy as np

from ._jit import njit


@njit(cache=True)
def softplus(t):
    if t > 0.0:
        return t + np.log1p(np.exp(-t))
    return np.log1p(np.exp(t))


@njit(cache=True)
def expit(t):
    if t >= 0.0:
        return 1.0 / (1.0 + np.exp(-t))
    e = np.exp(t)
    return e / (1.0 + e)


@njit(cache=True)
def soft_threshold(z, gamma):
    if z > gamma:
        return z - gamma
    if z < -gamma:
        return z + gamma
    return 0.0


@njit(cache=True)
def penalized_objective(Z, y, pen, a, beta, eta_out):
    k, p = Z.shape
    total = 0.0
    for i in range(k):
        e = a
        for j in range(p):
            e += Z[i, j] * beta[j]
        eta_out[i] = e
        if y[i] > 0.5:
            total += softplus(-e)
        else:
            total += softplus(e)
    total /= k
    for j in range(p):
        total += pen[j] * abs(beta[j])
    return total


@njit(cache=True)
def prox_newton_cd(Z, y, pen, active, a0, beta0, tol, coef_tol, max_sweeps,
                   eta_cap, w_floor, inner_tol):
    """Proximal Newton outer loop with cyclic coordinate descent inside.

    Returns ``(a, beta, sweeps, converged, degenerate, history)`` where
    ``history`` holds the averaged objective after every accepted outer step.
    """
    k, p = Z.shape
    a = a0
    beta = beta0.copy()
    eta = np.empty(k)
    eta_trial = np.empty(k)
    w = np.empty(k)
    rho = np.empty(k)
    h = np.zeros(p)
    beta_new = np.empty(p)
    trial = np.empty(p)
    history = np.empty(max_sweeps + 1)

    f = penalized_objective(Z, y, pen, a, beta, eta)
    history[0] = f
    n_hist = 1
    sweeps = 0
    converged = False
    degenerate = False

    while sweeps < max_sweeps:
        wsum = 0.0
        for i in range(k):
            pi = expit(eta[i])
            qi = expit(-eta[i])
            wi = pi * qi
            if wi < w_floor:
                wi = w_floor
            if y[i] > 0.5:
                ri = qi
            else:
                ri = -pi
            w[i] = wi
            rho[i] = ri / wi
            wsum += wi
        for j in range(p):
            s = 0.0
            for i in range(k):
                s += w[i] * Z[i, j] * Z[i, j]
            h[j] = s / k

        a_new = a
        for j in range(p):
            beta_new[j] = beta[j]

        while sweeps < max_sweeps:
            sweeps += 1
            s = 0.0
            for i in range(k):
                s += w[i] * rho[i]
            da = s / wsum
            a_new += da
            for i in range(k):
                rho[i] -= da
            max_change = (wsum / k) * da * da
            for j in range(p):
                if not active[j] or h[j] <= 0.0:
                    continue
                g = 0.0
                for i in range(k):
                    g += w[i] * Z[i, j] * rho[i]
                g = g / k + h[j] * beta_new[j]
                bj = soft_threshold(g, pen[j]) / h[j]
                d = bj - beta_new[j]
                if d != 0.0:
                    for i in range(k):
                        rho[i] -= Z[i, j] * d
                    beta_new[j] = bj
                    c = h[j] * d * d
                    if c > max_change:
                        max_change = c
            if max_change < inner_tol:
                break

        full_step = abs(a_new - a)
        for j in range(p):
            d = abs(beta_new[j] - beta[j])
            if d > full_step:
                full_step = d

        t = 1.0
        accepted = False
        ft = f
        at = a
        for _ in range(60):
            at = a + t * (a_new - a)
            for j in range(p):
                trial[j] = beta[j] + t * (beta_new[j] - beta[j])
            ft = penalized_objective(Z, y, pen, at, trial, eta_trial)
            if ft <= f:
                accepted = True
                break
            t *= 0.5
        if not accepted:
            converged = full_step < 1e-7
            break

        step = t * full_step
        decrease = f - ft
        a = at
        for j in range(p):
            beta[j] = trial[j]
        for i in range(k):
            eta[i] = eta_trial[i]
        f = ft
        history[n_hist] = f
        n_hist += 1

        big = 0.0
        for i in range(k):
            if abs(eta[i]) > big:
                big = abs(eta[i])
        if big > eta_cap:
            factor = eta_cap / big
            a *= factor
            for j in range(p):
                beta[j] *= factor
            degenerate = True
            break

        scale = abs(f)
        if scale < 1e-300:
            scale = 1e-300
        if decrease / scale < tol and step < coef_tol:
            converged = True
            break

    return a, beta, sweeps, converged, degenerate, history[:n_hist]
