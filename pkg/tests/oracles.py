"""Independent reference implementations the tests check against.

Everything here is written the slow, obvious way (index loops, grid
search, direct formulas) and deliberately shares no code with the
package internals.
"""
import numpy as np

# ---------------------------------------------------------------------------
# tensor algebra by explicit loops


def outer3_loops(u, v, w):
    t = np.zeros((len(u), len(v), len(w)))
    for i in range(len(u)):
        for j in range(len(v)):
            for k in range(len(w)):
                t[i, j, k] = u[i] * v[j] * w[k]
    return t


def contract1_loops(a, u):
    n1, n2, n3 = a.shape
    out = np.zeros((n2, n3))
    for j in range(n2):
        for k in range(n3):
            s = 0.0
            for i in range(n1):
                s += a[i, j, k] * u[i]
            out[j, k] = s
    return out


def contract2_loops(a, v):
    n1, n2, n3 = a.shape
    out = np.zeros((n1, n3))
    for i in range(n1):
        for k in range(n3):
            s = 0.0
            for j in range(n2):
                s += a[i, j, k] * v[j]
            out[i, k] = s
    return out


def contract3_loops(a, w):
    n1, n2, n3 = a.shape
    out = np.zeros((n1, n2))
    for i in range(n1):
        for j in range(n2):
            s = 0.0
            for k in range(n3):
                s += a[i, j, k] * w[k]
            out[i, j] = s
    return out


def contract3s_loops(a, u, v, w):
    s = 0.0
    n1, n2, n3 = a.shape
    for i in range(n1):
        for j in range(n2):
            for k in range(n3):
                s += a[i, j, k] * u[i] * v[j] * w[k]
    return s


def unfold_loops(a, mode):
    """Mode-m matricization with the lowest remaining mode running
    fastest, built column index by column index."""
    dims = a.shape
    rest = [d for m, d in enumerate(dims) if m != mode]
    out = np.zeros((dims[mode], rest[0] * rest[1]))
    for col in range(rest[0] * rest[1]):
        lo = col % rest[0]
        hi = col // rest[0]
        for r in range(dims[mode]):
            idx = [0, 0, 0]
            idx[mode] = r
            others = [m for m in range(3) if m != mode]
            idx[others[0]] = lo
            idx[others[1]] = hi
            out[r, col] = a[tuple(idx)]
    return out


# ---------------------------------------------------------------------------
# unit-variance coupled fixed point (direct transcription of the
# unit-variance equations, no sigma parameters anywhere)


def unit_variance_solve(xi, c1, c2, c3, beta_t, gamma_bar=None,
                        n_sweeps=20000, tol=1e-14):
    """g_i = c_i / (g_i - g - gam*g_j - xi), third equation without the
    coupling term. gamma_bar=None replays the self-contained variant
    gam = bt^2 (1 - g3^2/c3)/(c1+c2) inside the loop."""
    g1, g2, g3 = -c1 / xi, -c2 / xi, -c3 / xi
    gam = 0.0 if gamma_bar is None else gamma_bar
    for _ in range(n_sweeps):
        if gamma_bar is None:
            gam = beta_t ** 2 * (1.0 - g3 * g3 / c3) / (c1 + c2)
        g = g1 + g2 + g3
        h1 = c1 / (g1 - g - gam * g2 - xi)
        h2 = c2 / (g2 - g - gam * g1 - xi)
        h3 = c3 / (g3 - g - xi)
        d = max(abs(h1 - g1), abs(h2 - g2), abs(h3 - g3))
        g1 = 0.5 * (g1 + h1)
        g2 = 0.5 * (g2 + h2)
        g3 = 0.5 * (g3 + h3)
        if d < tol:
            break
    return g1, g2, g3, gam


def semicircle_g(xi):
    """Closed form for beta_t = 0, equal thirds, unit variances:
    g(xi) = (3/4)(-xi + sqrt(xi^2 - 8/3)) on the branch decaying at
    infinity (Im g > 0 above the real axis)."""
    xi = complex(xi)
    root = np.sqrt(xi ** 2 - 8.0 / 3.0)
    cands = [0.75 * (-xi + root), 0.75 * (-xi - root)]
    if xi.imag > 0:
        return max(cands, key=lambda z: z.imag)
    # real xi outside the support: the Stieltjes branch behaves like -1/xi
    return min(cands, key=lambda z: abs(z + 1.0 / xi))


# ---------------------------------------------------------------------------
# exhaustive best rank-one search for tiny tensors


def grid_search_rank_one(t, n_theta=1500):
    """Best rank-one approximation of a 2 x 2 x 2 tensor by brute force:
    sweep unit v(theta), w(phi) over angle grids, take the exact optimal
    u = T(., v, w)/|T(., v, w)|, keep the best objective. Returns
    (lam, u, v, w)."""
    t = np.asarray(t, dtype=np.float64)
    th = np.linspace(0.0, 2.0 * np.pi, n_theta, endpoint=False)
    ph = np.linspace(0.0, 2.0 * np.pi, n_theta, endpoint=False)
    vs = np.stack([np.cos(th), np.sin(th)], axis=1)
    ws = np.stack([np.cos(ph), np.sin(ph)], axis=1)
    # m[a, i, k] = sum_j t[i, j, k] v[a, j]
    m = np.einsum("ijk,aj->aik", t, vs)
    # r[a, b, i] = sum_k m[a, i, k] w[b, k]
    r = np.einsum("aik,bk->abi", m, ws)
    lam = np.sqrt(np.einsum("abi,abi->ab", r, r))
    a, b = np.unravel_index(np.argmax(lam), lam.shape)
    best = lam[a, b]
    u = r[a, b] / best
    return float(best), u, vs[a], ws[b]


# ---------------------------------------------------------------------------
# distribution helpers


def ks_versus_density(values, grid, dens):
    """Two-sided Kolmogorov statistic of `values` against the CDF
    obtained by cumulative trapezoids of `dens` (renormalized)."""
    values = np.sort(np.asarray(values, dtype=np.float64))
    cdf = np.concatenate([[0.0], np.cumsum(
        0.5 * (dens[1:] + dens[:-1]) * np.diff(grid))])
    cdf /= cdf[-1]
    f = np.interp(values, grid, cdf)
    n = values.size
    upper = np.max(np.arange(1, n + 1) / n - f)
    lower = np.max(f - np.arange(0, n) / n)
    return float(max(upper, lower))


def normal_ks(x):
    """Exact KS statistic of a sample against the standard normal."""
    from scipy.stats import norm
    x = np.sort(np.asarray(x, dtype=np.float64))
    f = norm.cdf(x)
    n = x.size
    return float(max(np.max(np.arange(1, n + 1) / n - f),
                     np.max(f - np.arange(0, n) / n)))
