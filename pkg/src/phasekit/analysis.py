"""Closed-form expectations of the loss surfaces, and related bounds.

Over real Gaussian sensing rows, the linear forms a^T z and a^T x are
jointly normal with correlation rho = z^T x / (||z|| ||x||), so the
population (m -> infinity) losses reduce to one-dimensional facts about a
correlated standard-normal pair (u, v):

  amplitude loss   E l = 1/2 ||x||^2 + 1/2 ||z||^2 - ||x|| ||z|| E|uv|
  intensity loss   E l = 3/4 ||x||^4 + 3/4 ||z||^4 - 1/2 ||x||^2 ||z||^2
                         - rho^2 ||x||^2 ||z||^2

with E|uv| expressible through the order-zero Bessel K0:

  E|uv| = (1 - rho^2)^{3/2} / pi * int_0^inf t (e^{rho t} + e^{-rho t})
          K0(t) dt          (|rho| < 1;  E|uv| = 1 at |rho| = 1).

The integrand is evaluated in the scaled form
t (e^{(rho-1)t} + e^{(-rho-1)t}) (e^t K0(t)) so nothing overflows as
|rho| -> 1, where the natural form needs e^{rho t} at t in the thousands.

Also here: the density of |uv|, the erfc tail bound on the probability
that a random row sees x and a nearby z with opposite signs, and a
Monte Carlo estimator used to cross-check the quadrature.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .special import bessel_k0e, erfc
from .streams import substream

# treat |rho| above this as the degenerate perfectly-correlated branch
DEGENERATE_RHO = 1.0 - 1e-8

# the sign-flip bound's hypothesis: ||h|| < (sqrt(2)-1)/sqrt(2) * ||x||
SIGN_FLIP_MAX_RATIO = (math.sqrt(2.0) - 1.0) / math.sqrt(2.0)

_QUAD_ABS_TOL = 1e-9


class QuadratureError(RuntimeError):
    """Adaptive quadrature failed to reach the requested accuracy."""


@dataclass(frozen=True)
class CorrelationState:
    """(rho, ||x||, ||z||) summary a loss surface point depends on."""

    rho: float
    norm_x: float = 1.0
    norm_z: float = 1.0

    def __post_init__(self):
        if abs(self.rho) > 1.0 + 1e-12:
            raise ValueError("correlation must lie in [-1, 1]")
        object.__setattr__(self, "rho", float(min(1.0, max(-1.0, self.rho))))
        if self.norm_x <= 0:
            raise ValueError("norm_x must be positive")
        if self.norm_z < 0:
            raise ValueError("norm_z must be nonnegative")


def abs_product_moment(rho):
    """E|uv| for a standard-normal pair with correlation rho."""
    rho = float(rho)
    if abs(rho) > 1.0 + 1e-12:
        raise ValueError("correlation must lie in [-1, 1]")
    if abs(rho) >= DEGENERATE_RHO:
        return 1.0

    def integrand(t):
        return t * (math.exp((rho - 1.0) * t) + math.exp((-rho - 1.0) * t)) * bessel_k0e(t)

    # integrand tail decays like e^{-(1-|rho|)t} sqrt(t)
    upper = 45.0 / (1.0 - abs(rho))
    val, err = integrate.quad(integrand, 0.0, upper, epsabs=1e-12, epsrel=1e-12, limit=400)
    if err > _QUAD_ABS_TOL:
        raise QuadratureError("E|uv| quadrature residual %.3e at rho=%g" % (err, rho))
    return (1.0 - rho * rho) ** 1.5 / math.pi * val


def expected_rwf_loss(state):
    """Population amplitude loss at the given correlation state."""
    nx, nz = state.norm_x, state.norm_z
    if nz == 0:
        return 0.5 * nx * nx
    return 0.5 * nx * nx + 0.5 * nz * nz - nx * nz * abs_product_moment(state.rho)


def expected_wf_loss(state):
    """Population intensity loss (real field) at the given state."""
    nx2 = state.norm_x**2
    nz2 = state.norm_z**2
    return 0.75 * nx2 * nx2 + 0.75 * nz2 * nz2 - 0.5 * nx2 * nz2 - state.rho**2 * nx2 * nz2


def product_magnitude_density(x_val, rho):
    """Density of |uv| at x_val for a correlated standard-normal pair.

    psi(x) = (pi sqrt(1-rho^2))^{-1} (e^{rho x/(1-rho^2)}
             + e^{-rho x/(1-rho^2)}) K0(x/(1-rho^2)),
    evaluated through the scaled Bessel so large rho x does not overflow.
    """
    x_val = float(x_val)
    rho = float(rho)
    if x_val <= 0:
        raise ValueError("density argument must be positive")
    if abs(rho) >= 1:
        raise ValueError("density is degenerate at |rho| = 1")
    q = 1.0 - rho * rho
    s = x_val / q
    scaled = math.exp((rho - 1.0) * s) + math.exp((-rho - 1.0) * s)
    return scaled * bessel_k0e(s) / (math.pi * math.sqrt(q))


def sign_flip_bound(t, norm_x, norm_h):
    """Tail bound erfc(sqrt(t) ||x|| / (2 ||h||)) on the sign-flip odds.

    Bounds the conditional probability that a Gaussian row a with
    |a^T x| ~ sqrt(t)-scaled magnitude sees x and z = x + h with opposite
    signs.  Valid only in the regime ||h|| < (sqrt(2)-1)/sqrt(2) ||x||.
    """
    if t <= 0:
        raise ValueError("t must be positive")
    if norm_x <= 0 or norm_h <= 0:
        raise ValueError("norms must be positive")
    if norm_h >= SIGN_FLIP_MAX_RATIO * norm_x:
        raise ValueError("outside the sign-agreement regime: require "
                         "norm_h < (sqrt(2)-1)/sqrt(2) * norm_x")
    return erfc(math.sqrt(t) * norm_x / (2.0 * norm_h))


def monte_carlo_expected_rwf_loss(state, samples, seed):
    """Sample-mean estimate of the population amplitude loss.

    Draws correlated standard-normal pairs and averages
    0.5 (||z|| |u| - ||x|| |v|)^2.  Returns (estimate, standard_error).
    """
    samples = int(samples)
    if samples < 1000:
        raise ValueError("need at least 1e3 samples")
    rho = state.rho
    nx, nz = state.norm_x, state.norm_z
    rng = substream(seed, "mc-loss")
    comp = math.sqrt(max(0.0, 1.0 - rho * rho))
    total = 0.0
    total_sq = 0.0
    left = samples
    while left > 0:
        chunk = min(left, 1 << 20)
        u = rng.standard_normal(chunk)
        v = rho * u + comp * rng.standard_normal(chunk)
        vals = 0.5 * (nz * np.abs(u) - nx * np.abs(v)) ** 2
        total += float(vals.sum())
        total_sq += float((vals * vals).sum())
        left -= chunk
    mean = total / samples
    var = max(0.0, (total_sq - samples * mean * mean) / (samples - 1))
    return mean, math.sqrt(var / samples)


def loss_surface_rows(rho_values, norm_z_values, norm_x=1.0):
    """(rho, norm_z, both expected losses) grid rows for CSV dumping."""
    rows = []
    for nz in norm_z_values:
        for rho in rho_values:
            s = CorrelationState(rho=float(rho), norm_x=float(norm_x), norm_z=float(nz))
            rows.append(
                {
                    "rho": s.rho,
                    "norm_z": s.norm_z,
                    "expected_rwf_loss": expected_rwf_loss(s),
                    "expected_wf_loss": expected_wf_loss(s),
                }
            )
    return rows
