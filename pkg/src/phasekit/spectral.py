"""Truncated spectral initialization, computed matrix-free.

The starting point for all solvers: estimate the signal norm from the
measurement mean, then take the leading eigenvector of the weighted
covariance

    Y = (1/m) sum_i y_i a_i a_i^*  over samples with  lo < y_i < hi,

where the truncation window [lo, hi] = [trunc_lower, trunc_upper] * lambda0
discards samples whose magnitude is out of scale with the norm estimate
(they are dominated by heavy-tailed |a_i^* x|^2 weighting otherwise).
Y is never formed; power iteration only needs the matvec
v -> (1/m) A^*(w . (A v)).
"""

from dataclasses import dataclass

import numpy as np

from .core import COMPLEX, REAL
from .streams import substream


class EmptyTruncationError(ValueError):
    """No measurement survived the truncation window."""


@dataclass(frozen=True)
class InitParams:
    """Truncation window multipliers and power-iteration controls.

    Defaults follow the recommended settings: window [1, 5] * lambda0 and
    50 power iterations.  power_tol = 0 disables early stopping so that
    iteration-count-controlled comparisons stay controlled; a positive
    tolerance stops once successive Rayleigh quotients change less than it.
    """

    trunc_lower: float = 1.0
    trunc_upper: float = 5.0
    power_iters: int = 50
    power_tol: float = 0.0

    def __post_init__(self):
        if not 0 < self.trunc_lower < self.trunc_upper:
            raise ValueError("need 0 < trunc_lower < trunc_upper")
        if self.power_iters < 1:
            raise ValueError("power_iters must be >= 1")
        if self.power_tol < 0:
            raise ValueError("power_tol must be >= 0")


@dataclass(frozen=True)
class InitResult:
    """z0 = lambda0 * (unit leading eigenvector), plus diagnostics.

    kept_fraction is the share of samples inside the truncation window;
    small_truncation_set flags the degenerate regime where fewer than n
    samples survived (the init proceeds anyway).  rayleigh holds the
    Rayleigh-quotient history of the power iteration.
    """

    z0: np.ndarray
    lambda0: float
    kept_fraction: float
    iterations_used: int
    rayleigh: tuple
    small_truncation_set: bool = False


def estimate_norm(y, A):
    """Norm estimate lambda0 = (m n / sum_i ||a_i||_1) * mean(y).

    For real Gaussian rows the coefficient concentrates at sqrt(pi/2),
    undoing the E|a^T x| = sqrt(2/pi) ||x|| folding; for unit-modulus
    coded-diffraction rows each ||a_i||_1 = n exactly, so the coefficient
    is exactly 1 (computed analytically, no rows materialized).
    """
    l1 = A.row_l1_sum()
    if l1 <= 0:
        raise ValueError("ensemble has zero total row l1 norm")
    return float(A.m * A.n / l1 * np.mean(y.values))


def truncation_weights(values, lambda0, params):
    """Per-sample weights y_i * 1{lo < y_i < hi}, strict inequalities."""
    v = np.asarray(values, dtype=np.float64)
    keep = (v > params.trunc_lower * lambda0) & (v < params.trunc_upper * lambda0)
    return v * keep


def weighted_covariance_apply(A, w, v):
    """Matrix-free Y v = (1/m) A^*(w . (A v))."""
    return A.adjoint_apply(w * A.apply(v)) / A.m


def spectral_initialize(y, A, params=None, seed=0):
    """Truncated spectral initializer: returns InitResult with z0.

    Power iteration starts from a seeded random unit vector in the
    ensemble's field and runs params.power_iters steps (or stops early on
    a positive power_tol).  Non-convergence is not an error; the best
    iterate so far is returned.  An empty truncation window raises
    EmptyTruncationError.
    """
    if params is None:
        params = InitParams()
    if y.m != A.m:
        raise ValueError("measurement count does not match ensemble")
    lam0 = estimate_norm(y, A)
    w = truncation_weights(y.values, lam0, params)
    kept = int(np.count_nonzero(w))
    if kept == 0:
        raise EmptyTruncationError("empty truncation set")

    rng = substream(seed, "power-start")
    if A.field == COMPLEX:
        v = rng.standard_normal(A.n) + 1j * rng.standard_normal(A.n)
    elif A.field == REAL:
        v = rng.standard_normal(A.n)
    else:
        raise ValueError("unknown ensemble field %r" % (A.field,))
    v = v / np.linalg.norm(v)

    rayleigh = []
    used = 0
    for _ in range(params.power_iters):
        u = weighted_covariance_apply(A, w, v)
        r = float(np.real(np.vdot(v, u)))  # v is unit, so this is v^* Y v
        rayleigh.append(r)
        used += 1
        nu = np.linalg.norm(u)
        if nu == 0:
            break
        v = u / nu
        if (
            params.power_tol > 0
            and len(rayleigh) >= 2
            and abs(rayleigh[-1] - rayleigh[-2]) < params.power_tol
        ):
            break

    return InitResult(
        z0=lam0 * v,
        lambda0=lam0,
        kept_fraction=kept / A.m,
        iterations_used=used,
        rayleigh=tuple(rayleigh),
        small_truncation_set=kept < A.n,
    )
