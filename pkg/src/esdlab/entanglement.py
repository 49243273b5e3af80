"""Entanglement and energy observables on two-qubit states.

All states are 4x4 arrays in the computational ordering ``(ee, gg, eg, ge)``
(see :mod:`esdlab.models`).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import InvalidStateError, PatternError
from .linalg import kron, sqrtm_psd
from .models import SIGMA_X, SIGMA_Y, tensor_to_computational

HERMITIAN_TOL = 1e-10
TRACE_TOL = 1e-10
NEG_EIG_TOL = -1e-8
X_PATTERN_TOL = 1e-12

YY = tensor_to_computational(kron(SIGMA_Y, SIGMA_Y))
XX = tensor_to_computational(kron(SIGMA_X, SIGMA_X))

_X_MASK = np.zeros((4, 4), dtype=bool)
for _i, _j in [(0, 0), (1, 1), (2, 2), (3, 3), (0, 1), (1, 0), (2, 3), (3, 2)]:
    _X_MASK[_i, _j] = True


def check_density_matrix(rho) -> np.ndarray:
    """Return ``rho`` as a complex 4x4 array or raise :class:`InvalidStateError`."""
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (4, 4):
        raise InvalidStateError(f"expected a 4x4 two-qubit state, got shape {rho.shape}")
    if not np.all(np.isfinite(rho)):
        raise InvalidStateError("state has non-finite entries")
    herm = np.max(np.abs(rho - rho.conj().T))
    if herm > HERMITIAN_TOL:
        raise InvalidStateError(f"state is not Hermitian (deviation {herm:.3e})")
    tr = np.trace(rho)
    if abs(tr - 1.0) > TRACE_TOL:
        raise InvalidStateError(f"trace {tr.real:.12g} differs from 1")
    lo = np.linalg.eigvalsh(0.5 * (rho + rho.conj().T))[0]
    if lo < NEG_EIG_TOL:
        raise InvalidStateError(f"state has negative eigenvalue {lo:.3e}")
    return rho


@dataclass(frozen=True)
class ConcurrenceReport:
    wootters: float
    spin_flip_eigenvalues: tuple  # four values, descending
    x_state_closed_form: Optional[float] = None
    paper_cutoff_form: Optional[float] = None


def spin_flip_eigenvalues(rho) -> np.ndarray:
    """Descending square roots of the eigenvalues of ``sqrt(rho) rho~ sqrt(rho)``.

    That matrix factors as ``A A^H`` with ``A = sqrt(rho) YY sqrt(rho)*``, so
    the values are taken as singular values of ``A``. Taking square roots of
    eigenvalues instead turns roundoff of order 1e-16 into errors of order
    1e-8 for rank-deficient (e.g. pure) states.
    """
    rho = check_density_matrix(rho)
    root = sqrtm_psd(rho)
    a = root @ YY @ root.conj()
    return np.linalg.svd(a, compute_uv=False)


def is_x_state(rho, tol: float = X_PATTERN_TOL) -> bool:
    rho = np.asarray(rho)
    return bool(np.max(np.abs(rho[~_X_MASK])) <= tol)


def x_state_concurrence(rho) -> float:
    """Closed-form concurrence of an X state.

    ``2 max(0, |rho_12| - sqrt(rho_33 rho_44), |rho_34| - sqrt(rho_11 rho_22))``
    with 1-based indices in the computational ordering.
    """
    rho = np.asarray(rho, dtype=complex)
    if not is_x_state(rho):
        raise PatternError("state has weight outside the X pattern")
    d = np.clip(np.real(np.diag(rho)), 0.0, None)
    a = abs(rho[0, 1]) - math.sqrt(d[2] * d[3])
    b = abs(rho[2, 3]) - math.sqrt(d[0] * d[1])
    return 2.0 * max(0.0, a, b)


def paper_cutoff_concurrence(rho) -> float:
    """Literal ``max(0, Re rho_34 - sqrt(rho_11 rho_22))``.

    Single branch and no factor of two; kept only to compare figure shapes
    with the canonical :func:`wootters_concurrence`.
    """
    rho = np.asarray(rho, dtype=complex)
    d11, d22 = max(rho[0, 0].real, 0.0), max(rho[1, 1].real, 0.0)
    return max(0.0, rho[2, 3].real - math.sqrt(d11 * d22))


def wootters_concurrence(rho) -> ConcurrenceReport:
    lam = spin_flip_eigenvalues(rho)
    c = max(0.0, float(lam[0] - lam[1] - lam[2] - lam[3]))
    xc = x_state_concurrence(rho) if is_x_state(rho) else None
    return ConcurrenceReport(
        wootters=min(c, 1.0),
        spin_flip_eigenvalues=tuple(float(v) for v in lam),
        x_state_closed_form=xc,
        paper_cutoff_form=paper_cutoff_concurrence(rho),
    )


def concurrence(rho) -> float:
    """Shorthand for ``wootters_concurrence(rho).wootters``."""
    return wootters_concurrence(rho).wootters


def energy_h0(rho, omega0: float = 1.0) -> float:
    """``<omega0/2 (sz_A + sz_B)> = omega0 (rho_11 - rho_22)``."""
    rho = np.asarray(rho)
    return float(omega0 * (rho[0, 0].real - rho[1, 1].real))


def energy_hI_ising(rho, g: float, half: bool = False) -> float:
    """``<g sx_A sx_B>``; ``half=True`` gives the ``g/2`` Hamiltonian normalisation."""
    rho = np.asarray(rho)
    val = 2.0 * (rho[0, 1].real + rho[2, 3].real)
    return float((0.5 * g if half else g) * val)


def purity(rho) -> float:
    rho = np.asarray(rho)
    return float(np.real(np.trace(rho @ rho)))
