"""Block contraction matrices of a fitted tensor and their spectra.

For a fit (lam, u, v, w) of a tensor T, the symmetric zero-block-diagonal
matrix Phi holds the three single-mode contractions:

    Phi = [ 0        T(.,.,w)  T(.,v,.) ]
          [ .T       0         T(u,.,.) ]
          [ .T       .T        0        ]

On oracle-mode samples (raw noise retained) Phi splits exactly into a
full-rank noise part H plus a low-rank part L (rank <= 6): the matrix
noise Z enters H only through the (1,2) block, scaled by the fitted
alignment <w,z>; the contractions of the remaining signal-plus-Z terms
against u or v are rank-one and live in L.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatchError, ValidationError
from .tensor import Tensor3, contract1, contract2, contract3

__all__ = [
    "BlockMatrix",
    "EmpiricalSpectrum",
    "build_phi",
    "build_h",
    "build_l",
    "eig_spectrum",
    "split_outliers",
    "group_outliers",
    "kolmogorov_distance",
]


@dataclass(frozen=True)
class BlockMatrix:
    """Symmetric n_t x n_t matrix with zero diagonal blocks; the block map
    records which off-diagonal block holds which contraction."""

    n1: int
    n2: int
    n3: int
    data: np.ndarray
    block_roles: dict

    @property
    def n_t(self):
        return self.n1 + self.n2 + self.n3

    def block(self, a, b):
        """Off-diagonal block (a, b) with 1-based mode indices."""
        edges = np.cumsum((0, self.n1, self.n2, self.n3))
        if not (1 <= a <= 3 and 1 <= b <= 3 and a != b):
            raise ValidationError(f"invalid block ({a}, {b})")
        return self.data[edges[a - 1]:edges[a], edges[b - 1]:edges[b]]


def _assemble(n1, n2, n3, b12, b13, b23, roles):
    n_t = n1 + n2 + n3
    out = np.zeros((n_t, n_t))
    s1 = slice(0, n1)
    s2 = slice(n1, n1 + n2)
    s3 = slice(n1 + n2, n_t)
    out[s1, s2] = b12
    out[s2, s1] = b12.T
    out[s1, s3] = b13
    out[s3, s1] = b13.T
    out[s2, s3] = b23
    out[s3, s2] = b23.T
    out.flags.writeable = False
    return BlockMatrix(n1=n1, n2=n2, n3=n3, data=out, block_roles=roles)


def _check_fit_dims(dims, fit):
    if (len(fit.u), len(fit.v), len(fit.w)) != tuple(dims):
        raise DimensionMismatchError(
            f"fit dimensions {(len(fit.u), len(fit.v), len(fit.w))} do not "
            f"match tensor dims {tuple(dims)}")


def build_phi(t, fit):
    """Block matrix of the three contractions of `t` at the fitted
    directions. At any critical point it carries the eigenpair
    (2*lam, (u,v,w)/sqrt(3)) and the double eigenvalue -lam on the span
    of (u,0,-w)/sqrt(2) and (u,-v,0)/sqrt(2)."""
    if not isinstance(t, Tensor3):
        raise ValidationError(f"expected Tensor3, got {type(t).__name__}")
    _check_fit_dims(t.dims, fit)
    n1, n2, n3 = t.dims
    return _assemble(
        n1, n2, n3,
        contract3(t, fit.w), contract2(t, fit.v), contract1(t, fit.u),
        roles={(1, 2): "mode3-contraction", (1, 3): "mode2-contraction",
               (2, 3): "mode1-contraction"},
    )


def _require_oracle(sample):
    if sample.Z is None or sample.W is None:
        raise ValidationError(
            "sample lacks raw noise; generate with gen_nested(..., oracle=True)")


def build_h(sample, fit):
    """Noise part: W contractions everywhere, plus the Z noise in the
    (1,2) block scaled by beta_t * <w, z> / sqrt(n_m)."""
    _require_oracle(sample)
    p = sample.params
    _check_fit_dims(sample.T.dims, fit)
    wz = float(fit.w @ sample.signals.z)
    rt = 1.0 / np.sqrt(p.n_t)
    Wt = Tensor3(sample.W)
    b12 = p.beta_t * wz / np.sqrt(p.n_m) * sample.Z + rt * contract3(Wt, fit.w)
    b13 = rt * contract2(Wt, fit.v)
    b23 = rt * contract1(Wt, fit.u)
    return _assemble(p.n1, p.n2, p.n3, b12, b13, b23,
                     roles={(1, 2): "Z-noise + mode3(W)",
                            (1, 3): "mode2(W)", (2, 3): "mode1(W)"})


def build_l(sample, fit):
    """Low-rank remainder, Phi - H, written explicitly: a rank-one (1,2)
    block from the planted matrix signal, and rank-one (1,3)/(2,3) blocks
    from contracting the matrix factor against v and u (these carry both
    the planted part and the Zv / Z^T u terms)."""
    _require_oracle(sample)
    p = sample.params
    _check_fit_dims(sample.T.dims, fit)
    sig = sample.signals
    wz = float(fit.w @ sig.z)
    rm = 1.0 / np.sqrt(p.n_m)
    b12 = p.beta_t * p.beta_m * wz * np.outer(sig.x, sig.y)
    mv = p.beta_m * float(sig.y @ fit.v) * sig.x + rm * (sample.Z @ fit.v)
    mtu = p.beta_m * float(sig.x @ fit.u) * sig.y + rm * (sample.Z.T @ fit.u)
    b13 = p.beta_t * np.outer(mv, sig.z)
    b23 = p.beta_t * np.outer(mtu, sig.z)
    return _assemble(p.n1, p.n2, p.n3, b12, b13, b23,
                     roles={(1, 2): "planted rank-one",
                            (1, 3): "beta_t (M v) z^T",
                            (2, 3): "beta_t (M^T u) z^T"})


@dataclass(frozen=True)
class EmpiricalSpectrum:
    """Sorted eigenvalues split into bulk and outliers. groups clusters
    the outliers by proximity as (center, count) pairs."""

    eigenvalues: np.ndarray
    bulk: np.ndarray
    outliers: np.ndarray
    groups: tuple
    support: tuple
    margin: float

    def to_csv(self, path, header_lines=()):
        with open(path, "w") as fh:
            for line in header_lines:
                fh.write(f"# {line}\n")
            fh.write("index,eigenvalue,is_outlier\n")
            outs = set(np.round(self.outliers, 15))
            for i, ev in enumerate(self.eigenvalues):
                flag = int(np.round(ev, 15) in outs)
                fh.write(f"{i},{ev!r},{flag}\n")


def eig_spectrum(block, support=None, margin=0.05, group_gap=0.1):
    """Full symmetric eigendecomposition of a BlockMatrix.

    With `support` (intervals from the limit theory) given, eigenvalues
    lying more than `margin` outside every interval are flagged as
    outliers and grouped into clusters split at gaps larger than
    `group_gap`; without it everything is bulk.
    """
    if not isinstance(block, BlockMatrix):
        raise ValidationError("expected BlockMatrix")
    evals = np.linalg.eigvalsh(block.data)
    if support is None:
        return EmpiricalSpectrum(
            eigenvalues=evals, bulk=evals, outliers=evals[:0], groups=(),
            support=(), margin=float(margin))
    support = tuple((float(a), float(b)) for a, b in support)
    inside = split_outliers(evals, support, margin)
    return EmpiricalSpectrum(
        eigenvalues=evals, bulk=evals[inside], outliers=evals[~inside],
        groups=group_outliers(evals[~inside], group_gap),
        support=support, margin=float(margin))


def split_outliers(evals, support, margin=0.05):
    """Boolean mask of sorted eigenvalues lying within `margin` of some
    support interval."""
    evals = np.asarray(evals)
    inside = np.zeros(evals.shape, dtype=bool)
    for a, b in support:
        inside |= (evals >= a - margin) & (evals <= b + margin)
    return inside


def group_outliers(outliers, group_gap=0.1):
    """Cluster sorted outliers into (center, count) pairs, splitting at
    gaps larger than `group_gap`."""
    outliers = np.asarray(outliers)
    groups = []
    if outliers.size:
        start = 0
        for i in range(1, outliers.size):
            if outliers[i] - outliers[i - 1] > group_gap:
                seg = outliers[start:i]
                groups.append((float(seg.mean()), int(seg.size)))
                start = i
        seg = outliers[start:]
        groups.append((float(seg.mean()), int(seg.size)))
    return tuple(groups)


def kolmogorov_distance(values, grid, dens):
    """Sup distance between the empirical CDF of `values` and the CDF of
    the density sampled on `grid` (trapezoid-integrated, renormalized).
    Invalid density points must be pre-filled or absent."""
    values = np.sort(np.asarray(values, dtype=np.float64))
    if values.size == 0:
        raise ValidationError("no values for the CDF comparison")
    dens = np.nan_to_num(np.asarray(dens, dtype=np.float64), nan=0.0)
    cdf = np.concatenate(([0.0], np.cumsum(
        0.5 * (dens[1:] + dens[:-1]) * np.diff(grid))))
    if cdf[-1] <= 0:
        raise ValidationError("density integrates to zero")
    cdf /= cdf[-1]
    theo = np.interp(values, grid, cdf)
    k = values.size
    emp_hi = np.arange(1, k + 1) / k
    emp_lo = np.arange(0, k) / k
    return float(np.max(np.maximum(np.abs(emp_hi - theo),
                                   np.abs(emp_lo - theo))))
