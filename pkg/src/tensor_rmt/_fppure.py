"""Pure-Python fixed-point kernels (fallback when the compiled core is
unavailable).

Both kernels run the same damped Jacobi sweep: with the coupling value
gam (updated from the current g3 first in adaptive mode),

    d1 = c1 / (st2*(g1-g) - gam*sm2*g2 - xi)
    d2 = c2 / (st2*(g2-g) - gam*sm2*g1 - xi)
    d3 = c3 / (st2*(g3-g) - xi)

then g_i <- (1-damping)*g_i + damping*d_i, stopping when the largest
update magnitude drops below tol. solve_grid iterates all points in
lockstep with a convergence mask, so each point follows exactly the
trajectory the scalar kernel would produce.
"""
import numpy as np

__all__ = ["solve_point", "solve_grid"]


def solve_point(xi, c1, c2, c3, st2, sm2, gcoef, gamma0, adapt,
                damping, tol, max_sweeps, g_init=None):
    """Returns (g1, g2, g3, gam, sweeps, delta). g_init warm-starts the
    iteration (default: the cold start -c_i/xi)."""
    xi = complex(xi)
    if g_init is None:
        g1 = -c1 / xi
        g2 = -c2 / xi
        g3 = -c3 / xi
    else:
        g1, g2, g3 = (complex(v) for v in g_init)
    gam = complex(gamma0)
    keep = 1.0 - damping
    sweep = 0
    delta = float("inf")
    for sweep in range(1, max_sweeps + 1):
        if adapt:
            gam = gcoef * (1.0 - st2 * g3 * g3 / c3)
        g = g1 + g2 + g3
        d1 = c1 / (st2 * (g1 - g) - gam * sm2 * g2 - xi)
        d2 = c2 / (st2 * (g2 - g) - gam * sm2 * g1 - xi)
        d3 = c3 / (st2 * (g3 - g) - xi)
        n1 = keep * g1 + damping * d1
        n2 = keep * g2 + damping * d2
        n3 = keep * g3 + damping * d3
        delta = max(abs(n1 - g1), abs(n2 - g2), abs(n3 - g3))
        g1, g2, g3 = n1, n2, n3
        if delta < tol:
            break
    return g1, g2, g3, gam, sweep, delta


def solve_grid(xi, c1, c2, c3, st2, sm2, gcoef, gamma0, adapt,
               damping, tol, max_sweeps):
    """Vectorized solve_point over a 1-d array of query points. Returns
    (g1, g2, g3, gam, sweeps, delta) as arrays."""
    xi = np.ascontiguousarray(xi, dtype=np.complex128)
    npts = xi.shape[0]
    g1 = -c1 / xi
    g2 = -c2 / xi
    g3 = -c3 / xi
    gam = np.full(npts, complex(gamma0), dtype=np.complex128)
    sweeps = np.zeros(npts, dtype=np.int64)
    delta = np.full(npts, np.inf)
    active = np.ones(npts, dtype=bool)
    keep = 1.0 - damping
    for sweep in range(1, max_sweeps + 1):
        if not active.any():
            break
        x = xi[active]
        a1 = g1[active]
        a2 = g2[active]
        a3 = g3[active]
        if adapt:
            gm = gcoef * (1.0 - st2 * a3 * a3 / c3)
            gam[active] = gm
        else:
            gm = gam[active]
        g = a1 + a2 + a3
        d1 = c1 / (st2 * (a1 - g) - gm * sm2 * a2 - x)
        d2 = c2 / (st2 * (a2 - g) - gm * sm2 * a1 - x)
        d3 = c3 / (st2 * (a3 - g) - x)
        n1 = keep * a1 + damping * d1
        n2 = keep * a2 + damping * d2
        n3 = keep * a3 + damping * d3
        dl = np.abs(n1 - a1)
        np.maximum(dl, np.abs(n2 - a2), out=dl)
        np.maximum(dl, np.abs(n3 - a3), out=dl)
        g1[active] = n1
        g2[active] = n2
        g3[active] = n3
        delta[active] = dl
        sweeps[active] = sweep
        still = dl >= tol
        active[active] = still
    return g1, g2, g3, gam, sweeps, delta
