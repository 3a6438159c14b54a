"""Sensing ensembles and the magnitude measurement model.

An ensemble represents the linear map z -> (a_i^* z)_{i<m} without ever
forming the conjugated matrix explicitly where structure allows:

* Gaussian ensembles store the rows a_i densely (row-major, so row access
  in incremental solvers is contiguous);
* coded-diffraction ensembles store L unit-modulus masks and apply the
  unnormalized DFT per mask, m = n*L, at O(m log n) per product.

The unnormalized DFT convention (|F_jk| = 1, numpy's fft) makes every
coded-diffraction row satisfy ||a_i||^2 = n exactly, matching the Gaussian
rows in expectation, so the same step-size conventions serve both models.

Measurements are magnitudes y_i = |a_i^* x|, optionally corrupted by
additive bounded noise or by a Poisson count model y_i =
sqrt(alpha * Poisson(|a_i^* x|^2 / alpha)) whose second moment matches the
clean intensity.
"""

from dataclasses import dataclass, field

import numpy as np

from .core import COMPLEX, REAL, as_signal
from .streams import substream

GAUSSIAN_REAL = "gaussian_real"
GAUSSIAN_COMPLEX = "gaussian_complex"
CDP = "cdp"


@dataclass(frozen=True)
class Measurements:
    """Nonnegative magnitude vector with a record of how it was produced.

    provenance is one of 'clean', 'bounded', 'poisson'; noise_meta carries
    the noise scale actually applied (and for bounded noise, how many
    entries were clipped at zero).
    """

    values: np.ndarray
    provenance: str = "clean"
    noise_meta: dict = field(default_factory=dict)

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        if v.ndim != 1 or v.size == 0:
            raise ValueError("measurements must be a nonempty 1-D vector")
        if not np.all(np.isfinite(v)):
            raise ValueError("measurements contain non-finite values")
        if np.any(v < 0):
            raise ValueError("measurements must be nonnegative")
        if self.provenance not in ("clean", "bounded", "poisson"):
            raise ValueError("unknown provenance %r" % self.provenance)
        object.__setattr__(self, "values", v)

    @property
    def m(self):
        return self.values.size


@dataclass(frozen=True)
class NoiseSpec:
    """Noise to inject at measurement time.

    kind 'none': clean magnitudes.
    kind 'bounded': y = |a^* x| + w, clipped at 0.  Either pass w directly
        or give `level` = target ||w||/sqrt(m); then w is drawn Gaussian
        from the (seed, 'bounded-noise') stream and rescaled so the level
        holds exactly (halving `level` at fixed seed halves w entrywise).
    kind 'poisson': y = sqrt(alpha * Poisson(|a^* x|^2 / alpha)).
    """

    kind: str = "none"
    w: np.ndarray = None
    level: float = None
    alpha: float = None
    seed: int = 0

    def __post_init__(self):
        if self.kind not in ("none", "bounded", "poisson"):
            raise ValueError("unknown noise kind %r" % self.kind)
        if self.kind == "bounded" and self.w is None and self.level is None:
            raise ValueError("bounded noise needs w or level")
        if self.kind == "poisson" and (self.alpha is None or self.alpha <= 0):
            raise ValueError("poisson noise needs alpha > 0")


class Ensemble:
    """Matrix-free sensing operator with rows a_i^*.

    apply(z) returns the length-m vector of inner products a_i^* z;
    adjoint_apply(v) returns sum_i v_i a_i, the conjugate-transpose
    action.  row(i) materializes a_i itself (length n).
    """

    kind = None

    def __init__(self, n, m, seed):
        self.n = int(n)
        self.m = int(m)
        self.seed = seed

    # subclasses implement: apply, adjoint_apply, row, row_sqnorms,
    # row_l1_sum, materialize

    def _check_signal(self, z):
        z = np.asarray(z)
        if z.shape != (self.n,):
            raise ValueError("signal length %s does not match n=%d" % (z.shape, self.n))
        return z

    def _check_meas(self, v):
        v = np.asarray(v)
        if v.shape != (self.m,):
            raise ValueError("vector length %s does not match m=%d" % (v.shape, self.m))
        return v

    def row_sqnorm(self, i):
        return float(self.row_sqnorms()[i])

    def block_rows(self, idx):
        """Rows a_i for i in idx, stacked (len(idx), n)."""
        idx = np.asarray(idx, dtype=np.intp)
        return np.stack([self.row(int(i)) for i in idx])

    def block_apply(self, idx, z):
        """(A z)_Gamma for an index block Gamma."""
        z = self._check_signal(z)
        B = self.block_rows(idx)
        if np.iscomplexobj(B):
            return np.conj(B) @ z.astype(np.complex128, copy=False)
        return B @ z

    def block_adjoint(self, idx, u):
        """sum_{i in Gamma} u_i a_i."""
        B = self.block_rows(idx)
        return B.T @ np.asarray(u)

    def descriptor(self):
        raise NotImplementedError


class GaussianEnsemble(Ensemble):
    """Dense Gaussian rows; real N(0,1) or complex with re/im N(0, 1/2)."""

    def __init__(self, rows, seed):
        rows = np.ascontiguousarray(rows)
        super().__init__(rows.shape[1], rows.shape[0], seed)
        self.rows = rows
        self.kind = GAUSSIAN_COMPLEX if np.iscomplexobj(rows) else GAUSSIAN_REAL
        self._sqnorms = None

    @property
    def field(self):
        return COMPLEX if self.kind == GAUSSIAN_COMPLEX else REAL

    def apply(self, z):
        z = self._check_signal(z)
        if self.kind == GAUSSIAN_COMPLEX:
            # a_i^* z = conj(rows @ conj(z)) avoids conjugating the matrix
            return np.conj(self.rows @ np.conj(z.astype(np.complex128, copy=False)))
        return self.rows @ z

    def adjoint_apply(self, v):
        v = self._check_meas(v)
        return self.rows.T @ v

    def row(self, i):
        if not 0 <= i < self.m:
            raise IndexError("row index %d out of range" % i)
        return self.rows[i]

    def block_rows(self, idx):
        return self.rows[np.asarray(idx, dtype=np.intp)]

    def block_apply(self, idx, z):
        z = self._check_signal(z)
        B = self.rows[np.asarray(idx, dtype=np.intp)]
        if self.kind == GAUSSIAN_COMPLEX:
            return np.conj(B @ np.conj(z.astype(np.complex128, copy=False)))
        return B @ z

    def row_sqnorms(self):
        if self._sqnorms is None:
            self._sqnorms = np.einsum(
                "ij,ij->i", self.rows, np.conj(self.rows)
            ).real.copy()
        return self._sqnorms

    def row_l1_sum(self):
        return float(np.abs(self.rows).sum())

    def materialize(self):
        """Dense M with apply(z) == M @ z (test oracle)."""
        return np.conj(self.rows) if self.kind == GAUSSIAN_COMPLEX else self.rows

    def descriptor(self):
        return {"kind": self.kind, "n": self.n, "m": self.m, "seed": self.seed}


class CDPEnsemble(Ensemble):
    """Coded diffraction patterns: per mask l, measurements F(d_l * z)."""

    kind = CDP
    field = COMPLEX

    def __init__(self, masks, seed):
        masks = np.ascontiguousarray(masks, dtype=np.complex128)
        L, n = masks.shape
        super().__init__(n, n * L, seed)
        self.L = L
        self.masks = masks
        self._masks_conj = np.conj(masks)

    def apply(self, z):
        z = self._check_signal(z).astype(np.complex128, copy=False)
        return np.fft.fft(self.masks * z[None, :], axis=1).ravel()

    def adjoint_apply(self, v):
        V = self._check_meas(v).astype(np.complex128, copy=False).reshape(self.L, self.n)
        # F^H u = n * ifft(u) under the unnormalized transform
        return (self._masks_conj * (self.n * np.fft.ifft(V, axis=1))).sum(axis=0)

    def mask_apply(self, l, z):
        """The n measurements of mask l alone."""
        return np.fft.fft(self.masks[l] * np.asarray(z, dtype=np.complex128))

    def mask_adjoint(self, l, u):
        return self._masks_conj[l] * (self.n * np.fft.ifft(np.asarray(u, dtype=np.complex128)))

    def row(self, i):
        if not 0 <= i < self.m:
            raise IndexError("row index %d out of range" % i)
        l, k = divmod(i, self.n)
        fk = np.exp(-2j * np.pi * k * np.arange(self.n) / self.n)
        return np.conj(self.masks[l] * fk)

    def row_sqnorms(self):
        # unit-modulus mask times unit-modulus DFT entries: exactly n
        return np.full(self.m, float(self.n))

    def row_sqnorm(self, i):
        return float(self.n)

    def row_l1_sum(self):
        return float(self.m) * float(self.n)

    def materialize(self):
        j = np.arange(self.n)
        F = np.exp(-2j * np.pi * np.outer(j, j) / self.n)
        return np.vstack([F * d[None, :] for d in self.masks])

    def descriptor(self):
        return {"kind": self.kind, "n": self.n, "L": self.L, "seed": self.seed}


def make_gaussian(n, m, field, seed):
    """Seeded dense Gaussian ensemble, real or complex."""
    if n < 1 or m < 1:
        raise ValueError("ensemble dimensions must be positive")
    rng = substream(seed, "ensemble")
    if field == REAL:
        rows = rng.standard_normal((m, n))
    elif field == COMPLEX:
        rows = (rng.standard_normal((m, n)) + 1j * rng.standard_normal((m, n))) / np.sqrt(2.0)
    else:
        raise ValueError("unknown field %r" % (field,))
    return GaussianEnsemble(rows, seed)


def make_cdp(n, L, seed):
    """Seeded coded-diffraction ensemble with uniform unit-modulus masks."""
    if n < 2 or L < 1:
        raise ValueError("need n >= 2 and L >= 1")
    rng = substream(seed, "ensemble")
    masks = np.exp(1j * rng.uniform(0.0, 2.0 * np.pi, size=(L, n)))
    return CDPEnsemble(masks, seed)


def from_rows(rows, seed=None):
    """Ensemble with explicitly given rows a_i (handy for small examples)."""
    rows = np.atleast_2d(np.asarray(rows))
    return GaussianEnsemble(
        rows.astype(np.complex128 if np.iscomplexobj(rows) else np.float64), seed
    )


def from_descriptor(d):
    """Rebuild an ensemble from its {kind, n, m|L, seed} record."""
    kind = d["kind"]
    if kind == GAUSSIAN_REAL:
        return make_gaussian(int(d["n"]), int(d["m"]), REAL, d["seed"])
    if kind == GAUSSIAN_COMPLEX:
        return make_gaussian(int(d["n"]), int(d["m"]), COMPLEX, d["seed"])
    if kind == CDP:
        return make_cdp(int(d["n"]), int(d["L"]), d["seed"])
    raise ValueError("unknown ensemble kind %r" % kind)


def measure(A, x, noise=None):
    """Magnitude measurements of x through A, with optional noise."""
    x = as_signal(x)
    mag = np.abs(A.apply(x))
    if noise is None or noise.kind == "none":
        return Measurements(mag, "clean", {})
    if noise.kind == "bounded":
        if noise.w is not None:
            w = np.asarray(noise.w, dtype=np.float64)
            if w.shape != mag.shape:
                raise ValueError("noise vector length does not match m")
        else:
            g = substream(noise.seed, "bounded-noise").standard_normal(A.m)
            w = g * (noise.level * np.sqrt(A.m) / np.linalg.norm(g))
        y = mag + w
        clipped = int(np.count_nonzero(y < 0))
        np.maximum(y, 0.0, out=y)
        meta = {"w_rms": float(np.linalg.norm(w) / np.sqrt(A.m)), "clipped": clipped}
        return Measurements(y, "bounded", meta)
    if noise.kind == "poisson":
        rng = substream(noise.seed, "poisson-noise")
        lam = mag**2 / noise.alpha
        y = np.sqrt(noise.alpha * rng.poisson(lam).astype(np.float64))
        return Measurements(y, "poisson", {"alpha": float(noise.alpha)})
    raise ValueError("unknown noise kind %r" % noise.kind)
