"""Seeded generators: spiked matrix-in-tensor model and its multi-view
clustering specialization.

PRNG policy: numpy's default_rng (PCG64, 64-bit seedable, splittable via
spawn) with standard_normal for Gaussians. Draw order is fixed and
documented in gen_nested so fixed seeds are reproducible across runs and
machines; generation is a pure function of the params.
"""
from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .tensor import Tensor3

__all__ = [
    "Vec3Signals",
    "NestedParams",
    "NestedSample",
    "MultiViewParams",
    "MultiViewSample",
    "gen_nested",
    "gen_multiview",
    "random_unit",
]

_UNIT_TOL = 1e-12


def random_unit(rng, n):
    """Uniform point on the unit sphere of R^n."""
    v = rng.standard_normal(n)
    nrm = np.linalg.norm(v)
    while nrm < 1e-12:  # essentially impossible, but total
        v = rng.standard_normal(n)
        nrm = np.linalg.norm(v)
    return v / nrm


def _unit_or_raise(v, n, name):
    v = np.asarray(v, dtype=np.float64)
    if v.shape != (n,):
        raise ValidationError(f"signal {name} must have shape ({n},), got {v.shape}")
    if abs(np.linalg.norm(v) - 1.0) > _UNIT_TOL:
        raise ValidationError(f"signal {name} must be unit-norm within {_UNIT_TOL}")
    return v


@dataclass(frozen=True)
class Vec3Signals:
    """Planted unit directions for the three modes."""

    x: np.ndarray
    y: np.ndarray
    z: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "x", _unit_or_raise(self.x, len(self.x), "x"))
        object.__setattr__(self, "y", _unit_or_raise(self.y, len(self.y), "y"))
        object.__setattr__(self, "z", _unit_or_raise(self.z, len(self.z), "z"))


@dataclass(frozen=True)
class NestedParams:
    """Model: M = beta_m * x y^T + Z/sqrt(n_m) with Z_ij ~ N(0, sigma_m2),
    T = beta_t * M (x) z + W/sqrt(n_t) with W_ijk ~ N(0, sigma_t2),
    where n_m = n1 + n2 and n_t = n1 + n2 + n3."""

    n1: int
    n2: int
    n3: int
    beta_t: float
    beta_m: float
    sigma_t2: float = 1.0
    sigma_m2: float = 1.0
    seed: int = 0
    signals: Vec3Signals | None = None

    def __post_init__(self):
        for name in ("n1", "n2", "n3"):
            v = getattr(self, name)
            if not isinstance(v, (int, np.integer)) or v < 1:
                raise ValidationError(f"{name} must be a positive integer, got {v!r}")
        if self.beta_t < 0 or self.beta_m < 0:
            raise ValidationError("beta_t and beta_m must be nonnegative")
        if self.sigma_t2 <= 0 or self.sigma_m2 <= 0:
            raise ValidationError("sigma_t2 and sigma_m2 must be positive")
        if self.signals is not None:
            _unit_or_raise(self.signals.x, self.n1, "x")
            _unit_or_raise(self.signals.y, self.n2, "y")
            _unit_or_raise(self.signals.z, self.n3, "z")

    @property
    def n_m(self):
        return self.n1 + self.n2

    @property
    def n_t(self):
        return self.n1 + self.n2 + self.n3

    def to_config(self):
        cfg = {
            "n1": self.n1, "n2": self.n2, "n3": self.n3,
            "beta_t": self.beta_t, "beta_m": self.beta_m,
            "sigma_t2": self.sigma_t2, "sigma_m2": self.sigma_m2,
            "seed": int(self.seed),
        }
        if self.signals is not None:
            cfg["signals"] = {
                "x": self.signals.x.tolist(),
                "y": self.signals.y.tolist(),
                "z": self.signals.z.tolist(),
            }
        return cfg

    @classmethod
    def from_config(cls, cfg):
        cfg = dict(cfg)
        sig = cfg.pop("signals", None)
        if sig is not None:
            sig = Vec3Signals(np.array(sig["x"]), np.array(sig["y"]), np.array(sig["z"]))
        return cls(signals=sig, **cfg)

    def save(self, path):
        with open(path, "w") as fh:
            json.dump(self.to_config(), fh, indent=2, sort_keys=True)

    @classmethod
    def load(cls, path):
        with open(path) as fh:
            return cls.from_config(json.load(fh))


@dataclass(frozen=True)
class NestedSample:
    """One draw of the model. Z and W (the raw N(0, sigma^2) noise arrays,
    before the 1/sqrt(n) scalings) are retained only in oracle mode; they
    are required to build the noise/low-rank split of the block matrix."""

    params: NestedParams
    T: Tensor3
    M: np.ndarray
    signals: Vec3Signals
    Z: np.ndarray | None = None
    W: np.ndarray | None = None


def gen_nested(params, oracle=False):
    """Draw (T, M) at the given seed.

    Draw order from default_rng(seed): x, y, z (only those not supplied),
    then Z (n1 x n2), then W (n1 x n2 x n3). With oracle=True the raw
    noise arrays are kept on the sample.
    """
    rng = np.random.default_rng(params.seed)
    sig = params.signals
    if sig is None:
        sig = Vec3Signals(
            random_unit(rng, params.n1),
            random_unit(rng, params.n2),
            random_unit(rng, params.n3),
        )
    Z = np.sqrt(params.sigma_m2) * rng.standard_normal((params.n1, params.n2))
    W = np.sqrt(params.sigma_t2) * rng.standard_normal(
        (params.n1, params.n2, params.n3)
    )
    M = params.beta_m * np.outer(sig.x, sig.y) + Z / np.sqrt(params.n_m)
    T = Tensor3(
        params.beta_t * M[:, :, None] * sig.z[None, None, :]
        + W / np.sqrt(params.n_t)
    )
    return NestedSample(
        params=params, T=T, M=M, signals=sig,
        Z=Z if oracle else None, W=W if oracle else None,
    )


@dataclass(frozen=True)
class MultiViewParams:
    """m views of n points in dimension p: view k of point i is
    y_i * h_k * mu + noise. labels are +-1; h_k >= 0 scales view k."""

    p: int
    n: int
    m: int
    mu: np.ndarray
    h: np.ndarray
    labels: np.ndarray
    seed: int = 0

    def __post_init__(self):
        for name in ("p", "n", "m"):
            v = getattr(self, name)
            if not isinstance(v, (int, np.integer)) or v < 1:
                raise ValidationError(f"{name} must be a positive integer, got {v!r}")
        mu = np.asarray(self.mu, dtype=np.float64)
        h = np.asarray(self.h, dtype=np.float64)
        lab = np.asarray(self.labels)
        if mu.shape != (self.p,):
            raise ValidationError(f"mu must have shape ({self.p},), got {mu.shape}")
        if h.shape != (self.m,):
            raise ValidationError(f"h must have shape ({self.m},), got {h.shape}")
        if np.any(h < 0):
            raise ValidationError("h must be entrywise nonnegative")
        if lab.shape != (self.n,) or not np.all(np.isin(lab, (-1, 1))):
            raise ValidationError("labels must be a +-1 vector of length n")
        object.__setattr__(self, "mu", mu)
        object.__setattr__(self, "h", h)
        object.__setattr__(self, "labels", lab.astype(np.int64))

    @property
    def mu_norm(self):
        return float(np.linalg.norm(self.mu))

    @property
    def h_norm(self):
        return float(np.linalg.norm(self.h))

    @classmethod
    def draw(cls, p, n, m, mu_norm, h_norm, seed=0):
        """Random cluster mean, nonnegative view weights, and balanced-ish
        random labels at the requested norms. Direction draws use a rng
        split from `seed` so they never collide with gen_nested's stream."""
        if mu_norm < 0 or h_norm < 0:
            raise ValidationError("mu_norm and h_norm must be nonnegative")
        rng = np.random.default_rng(np.random.SeedSequence(seed).spawn(1)[0])
        mu = mu_norm * random_unit(rng, p)
        hdir = np.abs(random_unit(rng, m))
        h = h_norm * hdir / np.linalg.norm(hdir)
        labels = rng.choice((-1, 1), size=n)
        return cls(p=p, n=n, m=m, mu=mu, h=h, labels=labels, seed=seed)

    def to_config(self):
        return {
            "p": self.p, "n": self.n, "m": self.m,
            "mu": self.mu.tolist(), "h": self.h.tolist(),
            "labels": self.labels.tolist(), "seed": int(self.seed),
        }

    @classmethod
    def from_config(cls, cfg):
        cfg = dict(cfg)
        return cls(
            p=cfg["p"], n=cfg["n"], m=cfg["m"],
            mu=np.array(cfg["mu"], dtype=np.float64),
            h=np.array(cfg["h"], dtype=np.float64),
            labels=np.array(cfg["labels"]), seed=cfg.get("seed", 0),
        )


@dataclass(frozen=True)
class MultiViewSample:
    params: MultiViewParams
    X: Tensor3
    nested: NestedSample


def gen_multiview(params):
    """Draw the p x n x m data tensor by delegation to gen_nested with
    beta_m = ||mu||, beta_t = ||h||, signals (mu/||mu||, labels/sqrt(n),
    h/||h||) and unit variances; the two conventions then agree exactly,
    including noise scalings 1/sqrt(p+n) and 1/sqrt(p+n+m).

    Note: sweeping ||mu|| or ||h|| at a fixed seed reuses the same noise
    draws (common random numbers).
    """
    bm = params.mu_norm
    bt = params.h_norm
    x = params.mu / bm if bm > 0 else _basis(params.p)
    z = params.h / bt if bt > 0 else _basis(params.m)
    ybar = params.labels / np.sqrt(params.n)
    nested = gen_nested(
        NestedParams(
            n1=params.p, n2=params.n, n3=params.m,
            beta_t=bt, beta_m=bm, sigma_t2=1.0, sigma_m2=1.0,
            seed=params.seed, signals=Vec3Signals(x, ybar, z),
        ),
        oracle=False,
    )
    return MultiViewSample(params=params, X=nested.T, nested=nested)


def _basis(n):
    e = np.zeros(n)
    e[0] = 1.0
    return e
