# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled ensemble local-search kernel. Same contract as ``_kernel_py``."""

import numpy as np
cimport numpy as cnp
from libc.math cimport cos, sin, sqrt, log2
from scipy.linalg.cython_lapack cimport zheev

cnp.import_array()

cdef double TINY = 1e-300
cdef double ZERO_EIG = 1e-12
# moves must gain more than this; round-off gains would keep the step from shrinking
cdef double MIN_GAIN = 1e-13

LINEAR = 0
VON_NEUMANN = 1


cdef inline double _xlog2x(double x) noexcept nogil:
    if x > ZERO_EIG:
        return -x * log2(x)
    return 0.0


cdef double _contrib(double complex[::1] row, int da, int db, int code,
                     double complex[::1] g, double[::1] w,
                     double complex[::1] work, double[::1] rwork) noexcept nogil:
    cdef int k, big, a, c, b, n, lwork, info
    cdef double p = 0.0, fro = 0.0, s, det, disc, tr
    cdef double complex acc, z
    n = da * db
    for a in range(n):
        z = row[a]
        p += z.real * z.real + z.imag * z.imag
    if p <= TINY:
        return 0.0
    if da <= db:
        k = da
        big = db
        for a in range(k):
            for c in range(a, k):
                acc = 0
                for b in range(big):
                    acc = acc + row[a * db + b] * row[c * db + b].conjugate()
                g[a * k + c] = acc
                g[c * k + a] = acc.conjugate()
    else:
        k = db
        big = da
        for a in range(k):
            for c in range(a, k):
                acc = 0
                for b in range(big):
                    acc = acc + row[b * db + a] * row[b * db + c].conjugate()
                g[a * k + c] = acc
                g[c * k + a] = acc.conjugate()
    if code == 0:
        for a in range(k * k):
            z = g[a]
            fro += z.real * z.real + z.imag * z.imag
        return 2.0 * (p - fro / p)
    # von Neumann of g / p
    if k == 2:
        tr = (g[0].real + g[3].real) / p
        det = (g[0].real * g[3].real - (g[1].real * g[1].real + g[1].imag * g[1].imag)) / (p * p)
        disc = tr * tr - 4.0 * det
        if disc < 0.0:
            disc = 0.0
        disc = sqrt(disc)
        return p * (_xlog2x(0.5 * (tr + disc)) + _xlog2x(0.5 * (tr - disc)))
    lwork = <int>work.shape[0]
    zheev(b"N", b"U", &k, &g[0], &k, &w[0], &work[0], &lwork, &rwork[0], &info)
    s = 0.0
    for a in range(k):
        s += _xlog2x(w[a] / p)
    return p * s


def contributions(double complex[:, ::1] psi, int da, int db, int code):
    cdef Py_ssize_t m = psi.shape[0], i
    cdef int k = da if da <= db else db
    out = np.empty(m, dtype=np.float64)
    cdef double[::1] o = out
    cdef double complex[::1] g = np.empty(k * k, dtype=np.complex128)
    cdef double[::1] w = np.empty(k, dtype=np.float64)
    cdef double complex[::1] work = np.empty(max(1, 4 * k), dtype=np.complex128)
    cdef double[::1] rwork = np.empty(max(1, 3 * k), dtype=np.float64)
    for i in range(m):
        o[i] = _contrib(psi[i], da, db, code, g, w, work, rwork)
    return out


def run_sweeps(double complex[:, ::1] psi, int da, int db, int code, double sign,
               const cnp.int64_t[:, ::1] pairs, const cnp.int64_t[:, ::1] perms,
               const double[:, ::1] u, const double[:, ::1] phi,
               double[::1] contrib, double step, double step_min, double step_max,
               contrib_fn=None):
    if contrib_fn is not None:
        raise TypeError("the compiled kernel only supports built-in measures")
    cdef Py_ssize_t m = psi.shape[0], dim = psi.shape[1]
    cdef Py_ssize_t n_sweeps = u.shape[0], n_pairs = pairs.shape[0]
    cdef Py_ssize_t s, q, x, i, j
    cdef int k = da if da <= db else db
    cdef long n_real = m * (m - 1) // 2
    cdef long accepted
    cdef double theta, c, sn, old, ca, cb, rate, sg
    cdef double complex e, ec
    cdef int trial
    cdef bint converged = False
    cdef Py_ssize_t done = n_sweeps
    cdef double complex[::1] na = np.empty(dim, dtype=np.complex128)
    cdef double complex[::1] nb = np.empty(dim, dtype=np.complex128)
    cdef double complex[::1] g = np.empty(k * k, dtype=np.complex128)
    cdef double[::1] w = np.empty(k, dtype=np.float64)
    cdef double complex[::1] work = np.empty(max(1, 4 * k), dtype=np.complex128)
    cdef double[::1] rwork = np.empty(max(1, 3 * k), dtype=np.float64)

    with nogil:
        for s in range(n_sweeps):
            accepted = 0
            for q in range(n_pairs):
                i = perms[s, pairs[q, 0]]
                j = perms[s, pairs[q, 1]]
                if i >= m or j >= m:
                    continue
                theta = step * (0.5 + u[s, q])
                e = cos(phi[s, q]) + 1j * sin(phi[s, q])
                ec = e.conjugate()
                old = contrib[i] + contrib[j]
                c = cos(theta)
                for trial in range(2):
                    sg = 1.0 if trial == 0 else -1.0
                    sn = sg * sin(theta)
                    for x in range(dim):
                        na[x] = c * psi[i, x] - ec * sn * psi[j, x]
                        nb[x] = e * sn * psi[i, x] + c * psi[j, x]
                    ca = _contrib(na, da, db, code, g, w, work, rwork)
                    cb = _contrib(nb, da, db, code, g, w, work, rwork)
                    if sign * (ca + cb) < sign * old - MIN_GAIN:
                        for x in range(dim):
                            psi[i, x] = na[x]
                            psi[j, x] = nb[x]
                        contrib[i] = ca
                        contrib[j] = cb
                        accepted += 1
                        break
            rate = (<double>accepted) / n_real if n_real > 0 else 0.0
            if rate > 0.5:
                step = step * 1.5
                if step > step_max:
                    step = step_max
            elif rate < 0.1:
                step = step * 0.5
            if step < step_min:
                converged = True
                done = s + 1
                break
    return step, done, converged


# --------------------------------------------------------------------------
# extension search: objective I(A;B|E)/2 of phi = weighted @ x.T


cdef double _entropy_herm(double complex[::1] mat, int n, double[::1] w,
                          double complex[::1] work, double[::1] rwork) noexcept nogil:
    cdef int lwork = <int>work.shape[0], info, k
    cdef double s = 0.0
    if n == 1:
        return _xlog2x(mat[0].real)
    zheev(b"N", b"U", &n, &mat[0], &n, &w[0], &work[0], &lwork, &rwork[0], &info)
    for k in range(n):
        s += _xlog2x(w[k])
    return s


cdef double _half_cmi(double complex[:, ::1] phi, int da, int db, int de, int dg,
                      double complex[::1] buf, double[::1] w,
                      double complex[::1] work, double[::1] rwork) noexcept nogil:
    cdef int a, b, c, e, f, g, n, row, col
    cdef double complex acc
    cdef double s_ae, s_be, s_g, s_e
    # rho_AE[(a,e),(c,f)] = sum_{b,g} phi[a*db+b, e*dg+g] conj(phi[c*db+b, f*dg+g])
    n = da * de
    for a in range(da):
        for e in range(de):
            row = a * de + e
            for c in range(da):
                for f in range(de):
                    col = c * de + f
                    if col < row:
                        continue
                    acc = 0
                    for b in range(db):
                        for g in range(dg):
                            acc = acc + phi[a * db + b, e * dg + g] * phi[c * db + b, f * dg + g].conjugate()
                    buf[col * n + row] = acc  # column-major upper triangle
    s_ae = _entropy_herm(buf, n, w, work, rwork)
    n = db * de
    for b in range(db):
        for e in range(de):
            row = b * de + e
            for c in range(db):
                for f in range(de):
                    col = c * de + f
                    if col < row:
                        continue
                    acc = 0
                    for a in range(da):
                        for g in range(dg):
                            acc = acc + phi[a * db + b, e * dg + g] * phi[a * db + c, f * dg + g].conjugate()
                    buf[col * n + row] = acc
    s_be = _entropy_herm(buf, n, w, work, rwork)
    n = dg
    for g in range(dg):
        for c in range(g, dg):
            acc = 0
            for a in range(da * db):
                for e in range(de):
                    acc = acc + phi[a, e * dg + g] * phi[a, e * dg + c].conjugate()
            buf[c * n + g] = acc
    s_g = _entropy_herm(buf, n, w, work, rwork)
    n = de
    for e in range(de):
        for f in range(e, de):
            acc = 0
            for a in range(da * db):
                for g in range(dg):
                    acc = acc + phi[a, e * dg + g] * phi[a, f * dg + g].conjugate()
            buf[f * n + e] = acc
    s_e = _entropy_herm(buf, n, w, work, rwork)
    return 0.5 * (s_ae + s_be - s_g - s_e)


cdef class _ExtWork:
    cdef double complex[::1] buf
    cdef double[::1] w
    cdef double complex[::1] work
    cdef double[::1] rwork

    def __init__(self, int nmax):
        self.buf = np.zeros(nmax * nmax, dtype=np.complex128)
        self.w = np.zeros(nmax, dtype=np.float64)
        self.work = np.zeros(max(1, 4 * nmax), dtype=np.complex128)
        self.rwork = np.zeros(max(1, 3 * nmax), dtype=np.float64)


def half_cmi(double complex[:, ::1] phi, int da, int db, int de, int dg):
    cdef _ExtWork ws = _ExtWork(max(da * de, db * de, dg, de))
    return _half_cmi(phi, da, db, de, dg, ws.buf, ws.w, ws.work, ws.rwork)


def ext_run_sweeps(double complex[:, ::1] phi, double complex[:, ::1] x,
                   int da, int db, int de, int dg,
                   const cnp.int64_t[:, :, ::1] chosen, const double[:, ::1] u,
                   const double[:, ::1] phi_angle, double value,
                   double step, double step_min, double step_max):
    """Minimize I(A;B|E)/2 by Givens rotations on rows of ``x`` (columns of ``phi``).

    Returns ``(value, step, sweeps_done, converged)``; ``phi`` and ``x`` are
    updated in place.
    """
    cdef Py_ssize_t n_sweeps = chosen.shape[0], k = chosen.shape[1]
    cdef Py_ssize_t D = phi.shape[0], r = x.shape[1]
    cdef Py_ssize_t s, q, t, i, j
    cdef double theta, c, sn, val, rate, sg
    cdef double complex e, ec, pi_, pj_
    cdef long accepted
    cdef int trial
    cdef bint converged = False, hit
    cdef Py_ssize_t done = n_sweeps
    cdef _ExtWork ws = _ExtWork(max(da * de, db * de, dg, de))
    cdef double complex[::1] ci = np.empty(D, dtype=np.complex128)
    cdef double complex[::1] cj = np.empty(D, dtype=np.complex128)

    with nogil:
        for s in range(n_sweeps):
            accepted = 0
            for q in range(k):
                i = chosen[s, q, 0]
                j = chosen[s, q, 1]
                theta = step * (0.5 + u[s, q])
                e = cos(phi_angle[s, q]) + 1j * sin(phi_angle[s, q])
                ec = e.conjugate()
                c = cos(theta)
                for t in range(D):
                    ci[t] = phi[t, i]
                    cj[t] = phi[t, j]
                hit = False
                for trial in range(2):
                    sg = 1.0 if trial == 0 else -1.0
                    sn = sg * sin(theta)
                    for t in range(D):
                        phi[t, i] = c * ci[t] - ec * sn * cj[t]
                        phi[t, j] = e * sn * ci[t] + c * cj[t]
                    val = _half_cmi(phi, da, db, de, dg, ws.buf, ws.w, ws.work, ws.rwork)
                    if val < value - MIN_GAIN:
                        value = val
                        for t in range(r):
                            pi_ = x[i, t]
                            pj_ = x[j, t]
                            x[i, t] = c * pi_ - ec * sn * pj_
                            x[j, t] = e * sn * pi_ + c * pj_
                        accepted += 1
                        hit = True
                        break
                if not hit:
                    for t in range(D):
                        phi[t, i] = ci[t]
                        phi[t, j] = cj[t]
            rate = (<double>accepted) / k if k > 0 else 0.0
            if rate > 0.5:
                step = step * 1.5
                if step > step_max:
                    step = step_max
            elif rate < 0.1:
                step = step * 0.5
            if step < step_min:
                converged = True
                done = s + 1
                break
    return value, step, done, converged
