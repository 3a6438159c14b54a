"""Reconstruction algorithms over magnitude measurements.

All solvers descend the amplitude residual a_i^* z - y_i ph(a_i^* z),
where ph is the unit phase with ph(0) = 0 (sign with sign(0) = 0 in the
real field); the zero convention keeps the nonsmooth point harmless.

    rwf                one full gradient step per pass, step mu
    wf                 quartic intensity-loss baseline, constant step
    irwf               m single-sample updates per pass, step rho0/n
    minibatch_irwf     ceil(m/k) random k-subset updates per pass, step rho0/n
    kaczmarz_pr        irwf with the per-row step 1/||a_i||^2
    block_kaczmarz_pr  exact block projection via the pseudoinverse

Pass accounting: one pass = one batch iteration = m single-sample updates
= ceil(m/k) minibatch updates, so per-pass costs are comparable across
algorithms.
"""

from dataclasses import dataclass, field

import numpy as np

from .core import (
    COMPLEX,
    amplitude_loss,
    as_signal,
    intensity_loss,
    phase,
    relative_error,
)
from .sensing import CDP
from .streams import substream

ALGORITHMS = (
    "rwf",
    "wf",
    "irwf",
    "minibatch_irwf",
    "kaczmarz_pr",
    "block_kaczmarz_pr",
)

# default batch steps; the complex value also serves coded-diffraction runs
RWF_STEP_REAL = 0.8
RWF_STEP_COMPLEX = 1.2
WF_STEP = 0.2

DIVERGENCE_FACTOR = 1e6
BLOCK_CONDITION_LIMIT = 1e12


@dataclass
class SolverConfig:
    """Algorithm selection plus step, budget, and recording knobs.

    mu is the batch step; None resolves to 0.8 (real) / 1.2 (complex and
    coded-diffraction) for rwf, and to 0.2 for the wf baseline, where it is
    applied as mu/||z0||^2 (an experimental constant-step stand-in for the
    usual ramped schedule).  Incremental algorithms ignore mu and step by
    rho0/n per sample; Kaczmarz variants ignore both.  minibatch_k bounds:
    at most m, and at most n for the block pseudoinverse solver.
    """

    algorithm: str = "rwf"
    mu: float = None
    rho0: float = 1.0
    minibatch_k: int = 64
    max_passes: int = 1000
    tol: float = 1e-5
    seed: int = 0
    record_every: int = 1

    def validate(self, m=None, n=None):
        if self.algorithm not in ALGORITHMS:
            raise ValueError("unknown algorithm %r" % self.algorithm)
        if self.mu is not None and self.mu <= 0:
            raise ValueError("mu must be positive")
        if self.rho0 <= 0:
            raise ValueError("rho0 must be positive")
        if self.minibatch_k < 1:
            raise ValueError("minibatch_k must be >= 1")
        if self.max_passes < 0:
            raise ValueError("max_passes must be >= 0")
        if self.tol <= 0:
            raise ValueError("tol must be positive")
        if self.record_every < 1:
            raise ValueError("record_every must be >= 1")
        if m is not None and self.algorithm in ("minibatch_irwf", "block_kaczmarz_pr"):
            if self.minibatch_k > m:
                raise ValueError("minibatch_k exceeds measurement count")
        if n is not None and self.algorithm == "block_kaczmarz_pr":
            if self.minibatch_k > n:
                raise ValueError("block size exceeds n (row-independence regime)")


@dataclass
class RunTrace:
    """Final iterate plus the recorded (pass, relative_error, loss) history.

    relative_error is NaN when no ground truth was supplied (stopping then
    gauges on the loss).  stop_reason is 'tol', 'budget', or 'diverged'.
    """

    iterate: np.ndarray
    history: list = field(default_factory=list)
    passes_used: int = 0
    stop_reason: str = "budget"

    def final_error(self):
        return self.history[-1][1] if self.history else float("nan")

    def final_loss(self):
        return self.history[-1][2] if self.history else float("nan")

    def passes_to(self, tol):
        """First recorded pass count with relative error <= tol, else None."""
        for p, err, _ in self.history:
            if err <= tol:
                return p
        return None


def _scalar_phase(t):
    if isinstance(t, complex):
        a = abs(t)
        return t / a if a > 0 else 0.0
    return float(np.sign(t))


def rwf_gradient(z, y, A):
    """(1/m) A^*(A z - y . ph(A z)), the amplitude-loss search direction."""
    if y.m != A.m:
        raise ValueError("measurement count does not match ensemble")
    fz = A.apply(z)
    return A.adjoint_apply(fz - y.values * phase(fz)) / A.m


def wf_gradient(z, y, A):
    """(1/m) A^*((|A z|^2 - y^2) . A z), the intensity-loss gradient."""
    if y.m != A.m:
        raise ValueError("measurement count does not match ensemble")
    fz = A.apply(z)
    return A.adjoint_apply((np.abs(fz) ** 2 - y.values**2) * fz) / A.m


def irwf_step(z, i, y, A, step=None):
    """Single-sample update z - step (a_i^* z - y_i ph(a_i^* z)) a_i."""
    if not 0 <= i < A.m:
        raise IndexError("sample index %d out of range" % i)
    if step is None:
        step = 1.0 / A.n
    a = A.row(i)
    if np.iscomplexobj(a) or np.iscomplexobj(z):
        t = complex(np.vdot(a, z))
    else:
        t = float(np.dot(a, z))
    resid = t - y.values[i] * _scalar_phase(t)
    return z - (step * resid) * a


def kaczmarz_step(z, i, y, A):
    """Row projection: irwf_step with the data-driven step 1/||a_i||^2.

    After the step the sample is fit exactly: |a_i^* z'| = y_i.
    """
    sq = A.row_sqnorm(i)
    if sq == 0:
        raise ValueError("zero sensing row %d" % i)
    return irwf_step(z, i, y, A, step=1.0 / sq)


def _check_block(gamma, m):
    gamma = np.asarray(gamma, dtype=np.intp).ravel()
    if gamma.size == 0:
        raise ValueError("empty index block")
    if gamma.min() < 0 or gamma.max() >= m:
        raise IndexError("block index out of range")
    if np.unique(gamma).size != gamma.size:
        raise ValueError("block indices must be distinct")
    return gamma


def minibatch_irwf_step(z, gamma, y, A, step=None):
    """Block update z - step A_G^*(A_G z - y_G . ph(A_G z))."""
    gamma = _check_block(gamma, A.m)
    if step is None:
        step = 1.0 / A.n
    fz = A.block_apply(gamma, z)
    resid = fz - y.values[gamma] * phase(fz)
    return z - step * A.block_adjoint(gamma, resid)


def _full_mask_block(A, gamma):
    """Mask index l if gamma is exactly mask l's contiguous block, else None."""
    if getattr(A, "kind", None) != CDP or gamma.size != A.n:
        return None
    l, off = divmod(int(gamma[0]), A.n)
    if off != 0:
        return None
    if np.array_equal(np.sort(gamma), np.arange(l * A.n, (l + 1) * A.n)):
        return l
    return None


def block_kaczmarz_step(z, gamma, y, A):
    """Exact projection onto the block's solution set.

    z - A_G^+ (A_G z - y_G . ph(A_G z)) with A_G^+ = A_G^*(A_G A_G^*)^-1,
    valid while the block rows are independent (|G| <= n).  A full
    coded-diffraction mask block has A_G A_G^* = n I exactly, so that case
    skips the dense solve and runs at FFT cost.
    """
    gamma = _check_block(gamma, A.m)
    if gamma.size > A.n:
        raise ValueError("block larger than n cannot have independent rows")

    l = _full_mask_block(A, gamma)
    if l is not None:
        # the projection depends on the block as a set, so mask order serves
        fz = A.mask_apply(l, z)
        yg = y.values[l * A.n : (l + 1) * A.n]
        resid = fz - yg * phase(fz)
        return z - A.mask_adjoint(l, resid) / A.n

    B = A.block_rows(gamma)  # rows a_i
    M = np.conj(B) if np.iscomplexobj(B) else B  # A_G, so that fz = M z
    fz = M @ (z.astype(M.dtype, copy=False) if np.iscomplexobj(M) else z)
    resid = fz - y.values[gamma] * phase(fz)
    G = M @ np.conj(M).T
    with np.errstate(divide="ignore", invalid="ignore"):
        cond = np.linalg.cond(G)
    if not np.isfinite(cond) or cond > BLOCK_CONDITION_LIMIT:
        raise np.linalg.LinAlgError("degenerate block")
    s = np.linalg.solve(G, resid)
    return z - np.conj(M).T @ s


def _resolve_batch_step(cfg, A, z0):
    if cfg.algorithm == "rwf":
        if cfg.mu is not None:
            return cfg.mu
        return RWF_STEP_COMPLEX if A.field == COMPLEX else RWF_STEP_REAL
    mu = WF_STEP if cfg.mu is None else cfg.mu
    nz0 = float(np.linalg.norm(z0))
    return mu / nz0**2 if nz0 > 0 else mu


def run(y, A, z0, cfg, x_opt=None):
    """Drive cfg.algorithm from z0, recording every record_every passes.

    Stops on the first recorded point with gauge <= cfg.tol (gauge =
    relative error when x_opt is given, loss otherwise), when the pass
    budget runs out, or when the gauge goes non-finite / exceeds 1e6 times
    its initial value (stop_reason 'diverged').  Index draws come from the
    (cfg.seed, 'solver') stream; reruns are bit-reproducible.
    """
    cfg.validate(A.m, A.n)
    if y.m != A.m:
        raise ValueError("measurement count does not match ensemble")
    z = as_signal(z0).copy()
    if z.size != A.n:
        raise ValueError("start vector length does not match n")
    if A.field == COMPLEX and not np.iscomplexobj(z):
        z = z.astype(np.complex128)
    alg = cfg.algorithm
    m, n = A.m, A.n
    yv = y.values
    rng = substream(cfg.seed, "solver")

    use_loss = x_opt is None
    loss_fn = intensity_loss if alg == "wf" else amplitude_loss

    def observe(zc):
        fz = A.apply(zc)
        loss = loss_fn(fz, yv)
        rel = float("nan") if use_loss else relative_error(zc, x_opt)
        return rel, loss, (loss if use_loss else rel)

    rel0, loss0, gauge0 = observe(z)
    history = [(0, rel0, loss0)]
    if gauge0 <= cfg.tol:
        return RunTrace(z, history, 0, "tol")
    guard = DIVERGENCE_FACTOR * gauge0

    if alg in ("rwf", "wf"):
        mu = _resolve_batch_step(cfg, A, z)
    elif alg in ("irwf", "minibatch_irwf"):
        step = cfg.rho0 / n
    if alg == "kaczmarz_pr":
        inv_sq = 1.0 / A.row_sqnorms()
    k = min(cfg.minibatch_k, m)
    updates_per_pass = -(-m // k)  # ceil(m/k)
    cplx = A.field == COMPLEX
    row = A.row

    stop_reason = "budget"
    passes_used = 0
    for p in range(1, cfg.max_passes + 1):
        if alg == "rwf":
            fz = A.apply(z)
            z -= (mu / m) * A.adjoint_apply(fz - yv * phase(fz))
        elif alg == "wf":
            fz = A.apply(z)
            z -= (mu / m) * A.adjoint_apply((np.abs(fz) ** 2 - yv**2) * fz)
        elif alg in ("irwf", "kaczmarz_pr"):
            idx = rng.integers(0, m, size=m)
            if cplx:
                for i in idx:
                    a = row(i)
                    # scalar work stays in _scalar_phase so single steps
                    # taken through irwf_step replay this loop bit-for-bit
                    t = complex(np.vdot(a, z))
                    c = t - yv[i] * _scalar_phase(t)
                    z -= ((c * inv_sq[i]) if alg == "kaczmarz_pr" else (step * c)) * a
            else:
                for i in idx:
                    a = row(i)
                    t = a @ z
                    c = t - yv[i] * (1.0 if t > 0 else (-1.0 if t < 0 else 0.0))
                    z -= ((c * inv_sq[i]) if alg == "kaczmarz_pr" else (step * c)) * a
        elif alg == "minibatch_irwf":
            for _ in range(updates_per_pass):
                gamma = rng.choice(m, size=k, replace=False)
                fz = A.block_apply(gamma, z)
                resid = fz - yv[gamma] * phase(fz)
                z -= step * A.block_adjoint(gamma, resid)
        else:  # block_kaczmarz_pr
            if getattr(A, "kind", None) == CDP and k == n:
                # whole-mask blocks: the pseudoinverse reduces to 1/n scaling
                for _ in range(updates_per_pass):
                    l = int(rng.integers(0, A.L))
                    fz = A.mask_apply(l, z)
                    resid = fz - yv[l * n : (l + 1) * n] * phase(fz)
                    z -= A.mask_adjoint(l, resid) / n
            else:
                for _ in range(updates_per_pass):
                    gamma = rng.choice(m, size=k, replace=False)
                    z = block_kaczmarz_step(z, gamma, y, A)
        passes_used = p

        if p % cfg.record_every == 0 or p == cfg.max_passes:
            rel, loss, gauge = observe(z)
            if not np.isfinite(gauge):
                # keep history finite; the blown-up point is not recorded
                stop_reason = "diverged"
                break
            history.append((p, rel, loss))
            if gauge > guard:
                stop_reason = "diverged"
                break
            if gauge <= cfg.tol:
                stop_reason = "tol"
                break

    return RunTrace(z, history, passes_used, stop_reason)
