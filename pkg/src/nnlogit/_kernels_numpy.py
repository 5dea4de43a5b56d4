"""Pure-numpy twin of :mod:`nnlogit._kernels_numba`.

Same algorithm and stopping rules; the inner loop over observations is
vectorized instead of compiled. Selected with ``NNLOGIT_BACKEND=numpy``.
"""

import numpy as np


def softplus(t):
    return np.logaddexp(0.0, t)


def expit(t):
    t = np.asarray(t, dtype=float)
    out = np.empty_like(t)
    pos = t >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-t[pos]))
    e = np.exp(t[~pos])
    out[~pos] = e / (1.0 + e)
    return out


def soft_threshold(z, gamma):
    return np.sign(z) * np.maximum(np.abs(z) - gamma, 0.0)


def penalized_objective(Z, y, pen, a, beta, eta_out):
    eta_out[:] = a + Z @ beta
    signed = np.where(y > 0.5, -eta_out, eta_out)
    return softplus(signed).sum() / Z.shape[0] + float(pen @ np.abs(beta))


def prox_newton_cd(Z, y, pen, active, a0, beta0, tol, coef_tol, max_sweeps,
                   eta_cap, w_floor, inner_tol):
    k, p = Z.shape
    a = float(a0)
    beta = np.array(beta0, dtype=float)
    eta = np.empty(k)
    eta_trial = np.empty(k)
    f = penalized_objective(Z, y, pen, a, beta, eta)
    history = [f]
    sweeps = 0
    converged = False
    degenerate = False
    is_one = y > 0.5
    movable = [j for j in range(p) if active[j]]

    while sweeps < max_sweeps:
        pi = expit(eta)
        qi = expit(-eta)
        w = np.maximum(pi * qi, w_floor)
        rho = np.where(is_one, qi, -pi) / w
        wsum = w.sum()
        h = (w[:, None] * Z * Z).sum(axis=0) / k

        a_new = a
        beta_new = beta.copy()
        while sweeps < max_sweeps:
            sweeps += 1
            da = (w * rho).sum() / wsum
            a_new += da
            rho -= da
            max_change = (wsum / k) * da * da
            for j in movable:
                if h[j] <= 0.0:
                    continue
                zj = Z[:, j]
                g = (w * zj * rho).sum() / k + h[j] * beta_new[j]
                bj = float(soft_threshold(g, pen[j])) / h[j]
                d = bj - beta_new[j]
                if d != 0.0:
                    rho -= zj * d
                    beta_new[j] = bj
                    max_change = max(max_change, h[j] * d * d)
            if max_change < inner_tol:
                break

        full_step = max(abs(a_new - a), float(np.max(np.abs(beta_new - beta), initial=0.0)))
        t = 1.0
        accepted = False
        for _ in range(60):
            at = a + t * (a_new - a)
            trial = beta + t * (beta_new - beta)
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
        a, beta, f = at, trial, ft
        eta[:] = eta_trial
        history.append(f)

        big = float(np.max(np.abs(eta)))
        if big > eta_cap:
            factor = eta_cap / big
            a *= factor
            beta = beta * factor
            degenerate = True
            break
        if decrease / max(abs(f), 1e-300) < tol and step < coef_tol:
            converged = True
            break

    return a, beta, sweeps, converged, degenerate, np.array(history)
