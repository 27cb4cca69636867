# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled fixed-point kernels.

Same damped Jacobi sweep as the pure fallback (see _fppure for the update
order); the scalar core is a tight C loop over double complex values and
the grid kernel simply runs it per point.
"""
import numpy as np


cdef double _cabs(double complex z) noexcept nogil:
    cdef double re = z.real
    cdef double im = z.imag
    # hypot avoids spurious overflow; values here are O(1) anyway
    if im == 0.0:
        return re if re >= 0.0 else -re
    if re == 0.0:
        return im if im >= 0.0 else -im
    return (re * re + im * im) ** 0.5


cdef int _solve(double complex xi, double c1, double c2, double c3,
                double st2, double sm2, double gcoef, double complex gamma0,
                bint adapt, double damping, double tol, int max_sweeps,
                double complex g1, double complex g2, double complex g3,
                double complex* out, double* out_delta) noexcept nogil:
    cdef double complex gam = gamma0
    cdef double complex g, d1, d2, d3, n1, n2, n3
    cdef double keep = 1.0 - damping
    cdef double delta = 0.0, tmp
    cdef int sweep = 0
    while sweep < max_sweeps:
        sweep += 1
        if adapt:
            gam = gcoef * (1.0 - st2 * g3 * g3 / c3)
        g = g1 + g2 + g3
        d1 = c1 / (st2 * (g1 - g) - gam * sm2 * g2 - xi)
        d2 = c2 / (st2 * (g2 - g) - gam * sm2 * g1 - xi)
        d3 = c3 / (st2 * (g3 - g) - xi)
        n1 = keep * g1 + damping * d1
        n2 = keep * g2 + damping * d2
        n3 = keep * g3 + damping * d3
        delta = _cabs(n1 - g1)
        tmp = _cabs(n2 - g2)
        if tmp > delta:
            delta = tmp
        tmp = _cabs(n3 - g3)
        if tmp > delta:
            delta = tmp
        g1 = n1
        g2 = n2
        g3 = n3
        if delta < tol:
            break
    out[0] = g1
    out[1] = g2
    out[2] = g3
    out[3] = gam
    out_delta[0] = delta
    return sweep


def solve_point(xi, double c1, double c2, double c3, double st2, double sm2,
                double gcoef, gamma0, bint adapt, double damping, double tol,
                int max_sweeps, g_init=None):
    """Returns (g1, g2, g3, gam, sweeps, delta). g_init warm-starts the
    iteration (default: the cold start -c_i/xi)."""
    cdef double complex buf[4]
    cdef double delta = 0.0
    cdef double complex cxi = xi
    cdef double complex cg0 = gamma0
    cdef double complex i1, i2, i3
    cdef int sweeps
    if g_init is None:
        i1 = -c1 / cxi
        i2 = -c2 / cxi
        i3 = -c3 / cxi
    else:
        i1 = g_init[0]
        i2 = g_init[1]
        i3 = g_init[2]
    with nogil:
        sweeps = _solve(cxi, c1, c2, c3, st2, sm2, gcoef, cg0, adapt,
                        damping, tol, max_sweeps, i1, i2, i3, buf, &delta)
    return (complex(buf[0]), complex(buf[1]), complex(buf[2]),
            complex(buf[3]), sweeps, delta)


def solve_grid(xi, double c1, double c2, double c3, double st2, double sm2,
               double gcoef, gamma0, bint adapt, double damping, double tol,
               int max_sweeps):
    """Vectorized solve_point over a 1-d array of query points. Returns
    (g1, g2, g3, gam, sweeps, delta) as arrays."""
    cdef double complex[::1] x = np.ascontiguousarray(xi, dtype=np.complex128)
    cdef Py_ssize_t npts = x.shape[0]
    g1 = np.empty(npts, dtype=np.complex128)
    g2 = np.empty(npts, dtype=np.complex128)
    g3 = np.empty(npts, dtype=np.complex128)
    gm = np.empty(npts, dtype=np.complex128)
    sw = np.empty(npts, dtype=np.int64)
    dl = np.empty(npts, dtype=np.float64)
    cdef double complex[::1] v1 = g1
    cdef double complex[::1] v2 = g2
    cdef double complex[::1] v3 = g3
    cdef double complex[::1] vg = gm
    cdef long long[::1] vs = sw
    cdef double[::1] vd = dl
    cdef double complex buf[4]
    cdef double delta
    cdef double complex cg0 = gamma0
    cdef Py_ssize_t i
    with nogil:
        for i in range(npts):
            vs[i] = _solve(x[i], c1, c2, c3, st2, sm2, gcoef, cg0, adapt,
                           damping, tol, max_sweeps,
                           -c1 / x[i], -c2 / x[i], -c3 / x[i], buf, &delta)
            v1[i] = buf[0]
            v2[i] = buf[1]
            v3[i] = buf[2]
            vg[i] = buf[3]
            vd[i] = delta
    return g1, g2, g3, gm, sw, dl
