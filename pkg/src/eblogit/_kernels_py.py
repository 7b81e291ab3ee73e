"""Pure-numpy fallback for the compiled coordinate-update kernels.

Semantics match eblogit._kernels; only summation order differs, so results
agree with the compiled path to floating-point noise rather than bit-exactly.
"""

import numpy as np

BACKEND = "python"


def cavi_sweep(x, yc_x, bt, u, m, phi, omega, alpha, pen):
    """One ascending coordinate pass of the variational update (in place)."""
    p = x.shape[1]
    for j in range(p):
        xj = x[:, j]
        uxj = u * xj
        s1 = uxj @ m
        s2 = uxj @ xj
        bj = bt[j]
        w = alpha * bj * (yc_x[j] - bj * s2 - 2.0 * (s1 - phi[j] * bj * s2)) + pen
        if w >= 0.0:
            newphi = 1.0 / (1.0 + np.exp(-w))
        else:
            e = np.exp(w)
            newphi = e / (1.0 + e)
        dm = (newphi - phi[j]) * bj
        omega[j] = w
        phi[j] = newphi
        if dm != 0.0:
            m += dm * xj


def _cd_pass(x, wn, r, beta, hjj, lam, pf, skip, active_only):
    p = x.shape[1]
    dmax = 0.0
    for j in range(p):
        if skip[j]:
            continue
        b_old = beta[j]
        if active_only and b_old == 0.0:
            continue
        h = hjj[j]
        xj = x[:, j]
        z = (wn * xj) @ r + h * b_old
        l = lam * pf[j]
        if z > l:
            b_new = (z - l) / h
        elif z < -l:
            b_new = (z + l) / h
        else:
            b_new = 0.0
        d = b_new - b_old
        if d != 0.0:
            r -= d * xj
            beta[j] = b_new
            dd = h * d * d
            if dd > dmax:
                dmax = dd
    return dmax


def lasso_cd(x, wn, r, beta, hjj, lam, pf, skip, tol, max_sweeps):
    """Cyclic coordinate descent with an active-set inner loop (in place)."""
    sweeps = 0
    while sweeps < max_sweeps:
        dmax = _cd_pass(x, wn, r, beta, hjj, lam, pf, skip, False)
        sweeps += 1
        if dmax < tol:
            break
        while sweeps < max_sweeps:
            dmax = _cd_pass(x, wn, r, beta, hjj, lam, pf, skip, True)
            sweeps += 1
            if dmax < tol:
                break
    return sweeps
