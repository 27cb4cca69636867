"""Dense real order-3 tensors: fixed layout, mode contractions, unfoldings.

Layout convention (used everywhere in the package): the backing array is
Fortran-ordered with shape (n1, n2, n3), so in the flat view the mode-1
index varies fastest, then mode-2, then mode-3. Unfoldings inherit this:
unfold(T, m) has the remaining modes enumerated in ascending order with
the lowest-numbered one varying fastest along columns, which makes all
round-trips bit-stable.
"""
from __future__ import annotations

import numpy as np

from .errors import DimensionMismatchError, ValidationError

__all__ = [
    "Tensor3",
    "outer3",
    "contract1",
    "contract2",
    "contract3",
    "contract2v",
    "contract3s",
    "frobenius_norm",
    "unfold",
    "save_tensor_csv",
    "load_tensor_csv",
    "save_tensor_npy",
    "load_tensor_npy",
]


class Tensor3:
    """Immutable dense real order-3 tensor.

    Parameters
    ----------
    data : array_like, shape (n1, n2, n3)
        Real entries; converted to float64 and stored Fortran-ordered.
    """

    __slots__ = ("_data",)

    def __init__(self, data):
        arr = np.asfortranarray(data, dtype=np.float64)
        if arr.ndim != 3:
            raise ValidationError(f"expected a 3-way array, got ndim={arr.ndim}")
        if min(arr.shape) < 1:
            raise ValidationError(f"all dimensions must be positive, got {arr.shape}")
        arr.flags.writeable = False
        self._data = arr

    @property
    def data(self):
        """Read-only (n1, n2, n3) float64 array, Fortran-ordered."""
        return self._data

    @property
    def dims(self):
        return self._data.shape

    @property
    def flat_data(self):
        """Flat view with the mode-1 index fastest (no copy)."""
        return self._data.ravel(order="F")

    def __getitem__(self, idx):
        return self._data[idx]

    def __repr__(self):
        return f"Tensor3(dims={self.dims})"

    @classmethod
    def zeros(cls, dims):
        return cls(np.zeros(dims, order="F"))


def _as3(t):
    if isinstance(t, Tensor3):
        return t.data
    raise ValidationError(f"expected Tensor3, got {type(t).__name__}")


def _check_len(vec, n, mode):
    v = np.asarray(vec, dtype=np.float64)
    if v.ndim != 1 or v.shape[0] != n:
        raise DimensionMismatchError(
            f"mode-{mode} vector must have length {n}, got shape {v.shape}"
        )
    return v


def outer3(x, y, z):
    """Rank-one tensor with entries x_i * y_j * z_k."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    z = np.asarray(z, dtype=np.float64)
    if x.ndim != 1 or y.ndim != 1 or z.ndim != 1:
        raise DimensionMismatchError("outer3 takes three 1-d vectors")
    return Tensor3(np.einsum("i,j,k->ijk", x, y, z))


def contract1(t, u):
    """Sum over mode 1: result[j,k] = sum_i u_i T[i,j,k]."""
    d = _as3(t)
    u = _check_len(u, d.shape[0], 1)
    return np.einsum("ijk,i->jk", d, u)


def contract2(t, v):
    """Sum over mode 2: result[i,k] = sum_j v_j T[i,j,k]."""
    d = _as3(t)
    v = _check_len(v, d.shape[1], 2)
    return np.einsum("ijk,j->ik", d, v)


def contract3(t, w):
    """Sum over mode 3: result[i,j] = sum_k w_k T[i,j,k]."""
    d = _as3(t)
    w = _check_len(w, d.shape[2], 3)
    return np.einsum("ijk,k->ij", d, w)


def contract2v(t, a, b, modes=(1, 2)):
    """Contract two modes with vectors a, b; returns a vector over the
    remaining mode. `modes` is the (ascending) pair being contracted."""
    d = _as3(t)
    modes = tuple(modes)
    if modes == (1, 2):
        a = _check_len(a, d.shape[0], 1)
        b = _check_len(b, d.shape[1], 2)
        return np.einsum("ijk,i,j->k", d, a, b)
    if modes == (1, 3):
        a = _check_len(a, d.shape[0], 1)
        b = _check_len(b, d.shape[2], 3)
        return np.einsum("ijk,i,k->j", d, a, b)
    if modes == (2, 3):
        a = _check_len(a, d.shape[1], 2)
        b = _check_len(b, d.shape[2], 3)
        return np.einsum("ijk,j,k->i", d, a, b)
    raise ValidationError(f"modes must be one of (1,2),(1,3),(2,3), got {modes}")


def contract3s(t, u, v, w):
    """Full contraction T(u, v, w), a scalar."""
    d = _as3(t)
    u = _check_len(u, d.shape[0], 1)
    v = _check_len(v, d.shape[1], 2)
    w = _check_len(w, d.shape[2], 3)
    return float(np.einsum("ijk,i,j,k->", d, u, v, w))


def frobenius_norm(t):
    return float(np.linalg.norm(_as3(t).ravel()))


def unfold(t, mode):
    """Mode-`mode` unfolding, shape (n_mode, product of the others).

    Columns enumerate the remaining modes in ascending order with the
    lowest-numbered mode varying fastest (consistent with the flat
    layout), e.g. unfold(T, 2)[j, i + k*n1] = T[i, j, k].
    """
    d = _as3(t)
    if mode not in (1, 2, 3):
        raise ValidationError(f"mode must be 1, 2 or 3, got {mode}")
    m = mode - 1
    return np.reshape(
        np.moveaxis(d, m, 0), (d.shape[m], -1), order="F"
    )


def save_tensor_csv(path, t):
    """Text dump: one header line 'n1,n2,n3', then the flat data (mode-1
    fastest), one repr-exact value per line."""
    d = _as3(t)
    with open(path, "w") as fh:
        fh.write("%d,%d,%d\n" % d.shape)
        for val in d.ravel(order="F"):
            fh.write(repr(float(val)) + "\n")


def load_tensor_csv(path):
    with open(path) as fh:
        dims = tuple(int(s) for s in fh.readline().strip().split(","))
        if len(dims) != 3:
            raise ValidationError(f"bad dims header in {path}")
        flat = np.array([float(line) for line in fh], dtype=np.float64)
    if flat.size != dims[0] * dims[1] * dims[2]:
        raise ValidationError(
            f"payload length {flat.size} does not match dims {dims}"
        )
    return Tensor3(flat.reshape(dims, order="F"))


def save_tensor_npy(path, t):
    """Binary dump (.npy keeps the dims header and the flat data)."""
    np.save(path, _as3(t))


def load_tensor_npy(path):
    arr = np.load(path)
    return Tensor3(arr)
