"""Dense complex matrix helpers for the small operators used throughout.

Matrices are plain ``numpy`` complex arrays.  Most functions accept stacks
of matrices with shape ``(..., n, n)`` so that whole fidelity grids can be
exponentiated in one call.
"""
import numpy as np

HERMITIAN_RTOL = 1e-12
UNITARY_ATOL = 1e-12


class NonHermitianError(ValueError):
    """Raised when a generator fails the Hermiticity check."""

    def __init__(self, deviation, scale):
        self.deviation = float(deviation)
        self.scale = float(scale)
        super().__init__(
            f"generator is not Hermitian: max|A - A^H| = {self.deviation:.3e} "
            f"(allowed {HERMITIAN_RTOL:.0e} x {self.scale:.3e})"
        )


def as_matrix(a):
    a = np.asarray(a, dtype=complex)
    if a.ndim < 2:
        raise ValueError(f"expected a matrix, got shape {a.shape}")
    return a


def dagger(a):
    return np.swapaxes(np.conj(a), -1, -2)


def matmul(a, b):
    a, b = as_matrix(a), as_matrix(b)
    if a.shape[-1] != b.shape[-2]:
        raise ValueError(f"shape mismatch: {a.shape} @ {b.shape}")
    return a @ b


def trace(a):
    a = as_matrix(a)
    if a.shape[-1] != a.shape[-2]:
        raise ValueError(f"trace of non-square matrix {a.shape}")
    return np.trace(a, axis1=-2, axis2=-1)


def frob_dist(a, b):
    a, b = as_matrix(a), as_matrix(b)
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch: {a.shape} vs {b.shape}")
    return np.linalg.norm(a - b, axis=(-2, -1))


def hermiticity_defect(a):
    """Return ``(max|A - A^H|, max|A|)`` over the whole stack."""
    a = as_matrix(a)
    return float(np.max(np.abs(a - dagger(a)), initial=0.0)), float(
        np.max(np.abs(a), initial=0.0)
    )


def is_hermitian(a):
    dev, scale = hermiticity_defect(a)
    return dev <= HERMITIAN_RTOL * scale


def unitarity_defect(u):
    """Frobenius norm of ``U^H U - I`` (maximum over a stack)."""
    u = as_matrix(u)
    eye = np.eye(u.shape[-1])
    return float(np.max(np.linalg.norm(dagger(u) @ u - eye, axis=(-2, -1))))


def _check_generator(h, t):
    h = as_matrix(h)
    if h.shape[-1] != h.shape[-2]:
        raise ValueError(f"generator must be square, got {h.shape}")
    if not np.all(np.isfinite(h)):
        raise ValueError("generator has non-finite entries")
    if not np.all(np.isfinite(t)):
        raise ValueError("time must be finite")
    dev, scale = hermiticity_defect(h)
    if dev > HERMITIAN_RTOL * scale:
        raise NonHermitianError(dev, scale)
    return h


def hermitian_expm(h, t=1.0):
    """Return ``exp(-i H t)`` for Hermitian ``H`` via eigendecomposition.

    The dark state of a Lambda-system Hamiltonian gives an exact zero
    eigenvalue; degenerate spectra need no special handling because ``eigh``
    returns an orthonormal eigenbasis regardless.
    """
    h = _check_generator(h, t)
    # symmetrize so eigh sees an exactly Hermitian input
    h = 0.5 * (h + dagger(h))
    w, v = np.linalg.eigh(h)
    phases = np.exp(-1j * np.multiply.outer(np.asarray(t), np.ones(w.shape[-1])) * w)
    return (v * phases[..., None, :]) @ dagger(v)


def expm_series(h, t=1.0, order=18):
    """Scaling-and-squaring Taylor exponential of ``-i H t``.

    Independent of :func:`hermitian_expm`; used as a cross-check.
    """
    h = _check_generator(h, t)
    a = -1j * t * h
    norm = float(np.max(np.abs(a).sum(axis=-1), initial=0.0))
    squarings = max(0, int(np.ceil(np.log2(norm / 0.25))) if norm > 0.25 else 0)
    a = a / 2.0**squarings
    eye = np.broadcast_to(np.eye(a.shape[-1], dtype=complex), a.shape)
    result = eye.copy()
    term = eye.copy()
    for k in range(1, order + 1):
        term = term @ a / k
        result = result + term
    for _ in range(squarings):
        result = result @ result
    return result
