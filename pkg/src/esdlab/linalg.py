"""Dense complex matrix kernel.

All matrices are plain ``numpy`` complex arrays. Routines here are pure: they
never modify their inputs.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import (
    DimensionError,
    NotHermitianError,
    PositivityError,
    SizeLimitError,
)

MAX_DIM = 4096
HERMITIAN_TOL = 1e-10
PSD_CLAMP = -1e-10


@dataclass(frozen=True)
class HermitianEigenDecomposition:
    eigenvalues: np.ndarray  # ascending, real
    eigenvectors: np.ndarray  # columns orthonormal

    def reconstruct(self) -> np.ndarray:
        v = self.eigenvectors
        return (v * self.eigenvalues) @ v.conj().T


def as_cmatrix(m) -> np.ndarray:
    a = np.asarray(m, dtype=complex)
    if a.ndim != 2:
        raise DimensionError(f"expected a 2-D matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix contains NaN or Inf entries")
    return a


def _require_square(m: np.ndarray) -> None:
    if m.shape[0] != m.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {m.shape}")


def kron(a, b) -> np.ndarray:
    """Kronecker product ``a ⊗ b`` with the row-major index convention."""
    a = as_cmatrix(a)
    b = as_cmatrix(b)
    rows = a.shape[0] * b.shape[0]
    cols = a.shape[1] * b.shape[1]
    if rows > MAX_DIM or cols > MAX_DIM:
        raise SizeLimitError(f"kron result {rows}x{cols} exceeds limit {MAX_DIM}")
    return np.kron(a, b)


def kron_all(*factors) -> np.ndarray:
    out = as_cmatrix(factors[0])
    for f in factors[1:]:
        out = kron(out, f)
    return out


def partial_trace(m, dims: Sequence[int], keep: Sequence[int]) -> np.ndarray:
    """Trace out every subsystem not listed in ``keep``.

    ``dims`` lists the subsystem dimensions in tensor order. Kept subsystems
    retain their relative order in the result.
    """
    m = as_cmatrix(m)
    _require_square(m)
    dims = [int(d) for d in dims]
    if any(d < 1 for d in dims) or int(np.prod(dims)) != m.shape[0]:
        raise DimensionError(f"dims {dims} do not multiply to {m.shape[0]}")
    keep = sorted(set(int(k) for k in keep))
    if not keep or keep[0] < 0 or keep[-1] >= len(dims):
        raise DimensionError(f"invalid keep set {keep} for {len(dims)} subsystems")

    n = len(dims)
    t = m.reshape(dims + dims)
    # Trace from the highest axis down so lower axis numbers stay valid.
    traced = [i for i in range(n) if i not in keep]
    for count, i in enumerate(reversed(traced)):
        remaining = n - count
        t = np.trace(t, axis1=i, axis2=i + remaining)
    d = int(np.prod([dims[k] for k in keep]))
    return t.reshape(d, d)


def _hermitian_part(m: np.ndarray) -> np.ndarray:
    _require_square(m)
    dev = np.max(np.abs(m - m.conj().T)) if m.size else 0.0
    if dev > HERMITIAN_TOL:
        raise NotHermitianError(f"matrix is not Hermitian (max |m - m^H| = {dev:.3e})")
    return 0.5 * (m + m.conj().T)


def hermitian_eig(m) -> HermitianEigenDecomposition:
    m = _hermitian_part(as_cmatrix(m))
    w, v = np.linalg.eigh(m)
    return HermitianEigenDecomposition(eigenvalues=w, eigenvectors=v)


def expm_from_eig(eig: HermitianEigenDecomposition, scale: complex) -> np.ndarray:
    """``V diag(exp(scale * w)) V^H`` for a precomputed decomposition."""
    v = eig.eigenvectors
    return (v * np.exp(scale * eig.eigenvalues)) @ v.conj().T


def expm_hermitian_scaled(h, scale: complex) -> np.ndarray:
    """Matrix exponential ``exp(scale * h)`` of a Hermitian ``h``.

    Uses the spectral decomposition, so ``scale = -1j * t`` yields a
    propagator that is unitary to roundoff.
    """
    return expm_from_eig(hermitian_eig(h), scale)


def sqrtm_psd(m) -> np.ndarray:
    """Principal square root of a positive semidefinite Hermitian matrix.

    Eigenvalues in ``[-1e-10, 0)`` are clamped to zero; anything more
    negative raises :class:`PositivityError`.
    """
    eig = hermitian_eig(m)
    w = eig.eigenvalues
    if w.size and w[0] < PSD_CLAMP:
        raise PositivityError(f"eigenvalue {w[0]:.3e} below {PSD_CLAMP}")
    root = np.sqrt(np.clip(w, 0.0, None))
    v = eig.eigenvectors
    return (v * root) @ v.conj().T
