"""Signals, the phase-invariant distance, and loss evaluation.

A signal is a plain 1-D numpy array; the scalar field is carried by the
dtype (float64 = real, complex128 = complex).  Magnitude-only measurements
cannot distinguish x from e^{j phi} x (from -x in the real case), so all
error metrics here are taken modulo a global phase.

Convention used repo-wide: the inner product conjugates its second
argument, <u, w> = sum_j u_j * conj(w_j).  All norms are Euclidean and all
scalars are double precision.
"""

import struct

import numpy as np

REAL = "real"
COMPLEX = "complex"

_FIELD_TAG = {REAL: 0, COMPLEX: 1}
_TAG_FIELD = {0: REAL, 1: COMPLEX}


def field_of(z):
    """'real' or 'complex' according to the array dtype."""
    return COMPLEX if np.iscomplexobj(z) else REAL


def as_signal(x, field=None):
    """Validate and return x as a 1-D float64/complex128 signal.

    Rejects empty and non-finite input.  If `field` is given the signal is
    cast to that field; casting complex data down to real is refused.
    """
    z = np.asarray(x)
    if z.ndim != 1 or z.size == 0:
        raise ValueError("signal must be a nonempty 1-D vector")
    if field == COMPLEX:
        z = z.astype(np.complex128, copy=False)
    elif field == REAL:
        if np.iscomplexobj(z):
            raise ValueError("cannot cast complex signal to real field")
        z = z.astype(np.float64, copy=False)
    elif np.iscomplexobj(z):
        z = z.astype(np.complex128, copy=False)
    else:
        z = z.astype(np.float64, copy=False)
    if not np.all(np.isfinite(z)):
        raise ValueError("signal contains non-finite entries")
    return z


def random_signal(n, field, rng):
    """Standard Gaussian signal: N(0,1) entries, or re/im each N(0, 1/2)."""
    if n < 1:
        raise ValueError("signal length must be >= 1")
    if field == REAL:
        return rng.standard_normal(n)
    if field == COMPLEX:
        return (rng.standard_normal(n) + 1j * rng.standard_normal(n)) / np.sqrt(2.0)
    raise ValueError("unknown field %r" % (field,))


def phase(v):
    """Elementwise unit phase v/|v| with the convention phase(0) = 0.

    Real input uses sign (sign(0) = 0), so the nonsmooth point of the
    amplitude loss contributes a zero term rather than NaN.
    """
    v = np.asarray(v)
    if np.iscomplexobj(v):
        mag = np.abs(v)
        out = np.zeros_like(v)
        nz = mag > 0
        out[nz] = v[nz] / mag[nz]
        return out
    return np.sign(v)


def _check_pair(z, x):
    z = np.asarray(z)
    x = np.asarray(x)
    if z.shape != x.shape or z.ndim != 1:
        raise ValueError("signals must be 1-D with matching length")
    if np.iscomplexobj(z) != np.iscomplexobj(x):
        raise ValueError("signals must live in the same field")
    return z, x


def best_phase(z, x):
    """Unit scalar c minimizing ||c*z - x||.

    Real field: c = +-1.  Complex field: c = ph(<x, z>), the argmax of
    Re(c <z, x>-bar) over the unit circle; c = 1 when the signals are
    orthogonal.
    """
    z, x = _check_pair(z, x)
    if np.iscomplexobj(z):
        ip = np.vdot(z, x)  # conj(z) . x = <x, z>
        a = abs(ip)
        return ip / a if a > 0 else 1.0 + 0j
    return 1.0 if np.dot(z, x) >= 0 else -1.0


def phase_align(z, x):
    """z rotated by the global phase that best matches x."""
    return best_phase(z, x) * np.asarray(z)


def dist_up_to_phase(z, x):
    """Euclidean distance between z and x minimized over a global phase.

    Real field: min(||z - x||, ||z + x||).  Complex field: the minimizer
    over phi of ||z e^{-j phi} - x|| is phi = arg<z, x>, giving the closed
    form sqrt(||z||^2 + ||x||^2 - 2|<z, x>|); it is evaluated here in the
    aligned form ||c z - x|| (identical algebraically, but free of the
    cancellation that caps the subtractive form near sqrt(eps)*||x||).
    """
    z, x = _check_pair(z, x)
    if np.iscomplexobj(z):
        return float(np.linalg.norm(best_phase(z, x) * z - x))
    return float(min(np.linalg.norm(z - x), np.linalg.norm(z + x)))


def relative_error(z, x):
    """dist_up_to_phase(z, x) / ||x||; the reconstruction error metric."""
    nx = np.linalg.norm(x)
    if nx == 0:
        raise ValueError("relative error undefined for zero reference signal")
    return dist_up_to_phase(z, x) / float(nx)


def amplitude_loss(fz, y):
    """(1/2m) sum (|fz_i| - y_i)^2 given the linear measurements fz = A z."""
    r = np.abs(fz) - y
    return 0.5 * float(np.mean(r * r))


def intensity_loss(fz, y):
    """(1/4m) sum (|fz_i|^2 - y_i^2)^2, the quartic baseline loss."""
    r = np.abs(fz) ** 2 - np.asarray(y) ** 2
    return 0.25 * float(np.mean(r * r))


def rwf_loss(z, y, A):
    """Amplitude loss (1/2m) sum (|a_i^* z| - y_i)^2 of iterate z."""
    return amplitude_loss(A.apply(z), np.asarray(y.values))


def wf_loss(z, y, A):
    """Intensity loss (1/4m) sum (|a_i^* z|^2 - y_i^2)^2 of iterate z."""
    return intensity_loss(A.apply(z), np.asarray(y.values))


# --- flat binary serialization ----------------------------------------------
# header: field tag (1 byte: 0 real, 1 complex), n (8-byte LE unsigned);
# payload: n (real) or 2n (complex, interleaved re/im) LE float64 values.


def save_signal(path, z):
    z = as_signal(z)
    tag = _FIELD_TAG[field_of(z)]
    with open(path, "wb") as fh:
        fh.write(struct.pack("<BQ", tag, z.size))
        if tag == 1:
            inter = np.empty(2 * z.size, dtype=np.float64)
            inter[0::2] = z.real
            inter[1::2] = z.imag
            fh.write(inter.astype("<f8").tobytes())
        else:
            fh.write(z.astype("<f8").tobytes())


def load_signal(path):
    with open(path, "rb") as fh:
        head = fh.read(9)
        if len(head) != 9:
            raise ValueError("truncated signal file header")
        tag, n = struct.unpack("<BQ", head)
        if tag not in _TAG_FIELD:
            raise ValueError("unknown field tag %d" % tag)
        count = 2 * n if tag == 1 else n
        payload = np.frombuffer(fh.read(8 * count), dtype="<f8")
        if payload.size != count:
            raise ValueError("truncated signal payload")
    if tag == 1:
        return (payload[0::2] + 1j * payload[1::2]).astype(np.complex128)
    return payload.astype(np.float64)
