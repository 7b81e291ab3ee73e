# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled coordinate-update kernels.

Both kernels are cyclic Gauss-Seidel passes: each coordinate update feeds
the next one through a running n-vector (the mean linear predictor for the
variational sweep, the working residual for the penalized least-squares
sweep), so they cannot be vectorized across coordinates.
"""

from libc.math cimport exp

BACKEND = "compiled"


cdef inline double _expit(double w) nogil:
    cdef double e
    if w >= 0.0:
        return 1.0 / (1.0 + exp(-w))
    e = exp(w)
    return e / (1.0 + e)


def cavi_sweep(double[::1, :] x, double[::1] yc_x, double[::1] bt,
               double[::1] u, double[::1] m, double[::1] phi,
               double[::1] omega, double alpha, double pen):
    """One ascending coordinate pass of the variational update.

    x must be Fortran-ordered (column access is the hot path).  yc_x[j] is
    the precomputed sum_i (y_i - 1/2) x_ij, u[i] the curvature weight
    tanh(eta_i/2)/(4 eta_i), m the running mean predictor sum_k phi_k x_ik
    bt_k.  phi, omega and m are updated in place.
    """
    cdef Py_ssize_t n = x.shape[0]
    cdef Py_ssize_t p = x.shape[1]
    cdef Py_ssize_t i, j
    cdef double s1, s2, xij, t, w, bj, newphi, dm

    with nogil:
        for j in range(p):
            bj = bt[j]
            s1 = 0.0
            s2 = 0.0
            for i in range(n):
                xij = x[i, j]
                t = u[i] * xij
                s1 += t * m[i]
                s2 += t * xij
            w = alpha * bj * (yc_x[j] - bj * s2 - 2.0 * (s1 - phi[j] * bj * s2)) + pen
            newphi = _expit(w)
            dm = (newphi - phi[j]) * bj
            omega[j] = w
            phi[j] = newphi
            if dm != 0.0:
                for i in range(n):
                    m[i] += dm * x[i, j]


cdef double _cd_pass(double[::1, :] x, double[::1] wn, double[::1] r,
                     double[::1] beta, double[::1] hjj, double lam,
                     double[::1] pf, signed char[::1] skip,
                     bint active_only) nogil:
    cdef Py_ssize_t n = x.shape[0]
    cdef Py_ssize_t p = x.shape[1]
    cdef Py_ssize_t i, j
    cdef double dmax = 0.0
    cdef double b_old, h, g, z, l, b_new, d, dd

    for j in range(p):
        if skip[j]:
            continue
        b_old = beta[j]
        if active_only and b_old == 0.0:
            continue
        h = hjj[j]
        g = 0.0
        for i in range(n):
            g += wn[i] * x[i, j] * r[i]
        z = g + h * b_old
        l = lam * pf[j]
        if z > l:
            b_new = (z - l) / h
        elif z < -l:
            b_new = (z + l) / h
        else:
            b_new = 0.0
        d = b_new - b_old
        if d != 0.0:
            for i in range(n):
                r[i] -= d * x[i, j]
            beta[j] = b_new
            dd = h * d * d
            if dd > dmax:
                dmax = dd
    return dmax


def lasso_cd(double[::1, :] x, double[::1] wn, double[::1] r,
             double[::1] beta, double[::1] hjj, double lam,
             double[::1] pf, signed char[::1] skip,
             double tol, int max_sweeps):
    """Cyclic coordinate descent for the L1-penalized weighted least squares
    subproblem, with an active-set inner loop.

    wn holds the observation weights already divided by n, r the working
    residual z - x @ beta, hjj[j] = sum_i wn_i x_ij^2.  beta and r are
    updated in place; returns the number of passes used.  Convergence is
    max_j hjj[j] * delta_j^2 < tol per pass.
    """
    cdef int sweeps = 0
    cdef double dmax

    with nogil:
        while sweeps < max_sweeps:
            dmax = _cd_pass(x, wn, r, beta, hjj, lam, pf, skip, 0)
            sweeps += 1
            if dmax < tol:
                break
            while sweeps < max_sweeps:
                dmax = _cd_pass(x, wn, r, beta, hjj, lam, pf, skip, 1)
                sweeps += 1
                if dmax < tol:
                    break
    return sweeps
