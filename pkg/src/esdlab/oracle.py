"""Brute-force reference dynamics on a truncated Fock space.

The qubit pair is embedded with every field mode in vacuum, propagated with
the spectral exponential of the full Hamiltonian, and reduced back to the
4x4 qubit state. The cutoff is raised until the reduced state stops moving.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from . import models
from .errors import DimensionError, SizeLimitError, TruncationError
from .linalg import MAX_DIM, HermitianEigenDecomposition, hermitian_eig

HamiltonianBuilder = Callable[[int], np.ndarray]


@dataclass(frozen=True)
class TruncationPolicy:
    initial_cutoff: int = 4
    growth_step: int = 4
    tolerance: float = 1e-10
    max_cutoff: int = 95

    def __post_init__(self):
        if self.initial_cutoff < 2:
            raise ValueError("initial_cutoff must be >= 2")
        if self.growth_step < 1:
            raise ValueError("growth_step must be >= 1")
        if not self.tolerance > 0:
            raise ValueError("tolerance must be positive")
        if self.max_cutoff < self.initial_cutoff:
            raise ValueError("max_cutoff must be >= initial_cutoff")


DEFAULT_POLICY = TruncationPolicy()
# Excitation number is conserved, so a vacuum start never needs more than two photons.
TC_POLICY = TruncationPolicy(initial_cutoff=2)


@dataclass(frozen=True)
class OracleResult:
    states: np.ndarray  # (n_times, 4, 4), computational ordering
    cutoff: int
    last_delta: float


class _Propagation:
    """Spectral data of one truncated Hamiltonian, reused across times."""

    def __init__(self, h: np.ndarray):
        dim = h.shape[0]
        if h.ndim != 2 or dim != h.shape[1] or dim % 4:
            raise DimensionError(f"full Hamiltonian must be square with dim divisible by 4, got {h.shape}")
        if dim > MAX_DIM:
            raise SizeLimitError(f"full dimension {dim} exceeds limit {MAX_DIM}")
        self.env_dim = dim // 4
        self.eig: HermitianEigenDecomposition = hermitian_eig(h)
        vac_cols = np.arange(4) * self.env_dim
        self._vh_vac = self.eig.eigenvectors.conj().T[:, vac_cols]

    def reduced(self, qubit_tensor: np.ndarray, t: float) -> np.ndarray:
        v = self.eig.eigenvectors
        phases = np.exp(-1j * t * self.eig.eigenvalues)
        k = v @ (phases[:, None] * self._vh_vac)  # U restricted to vacuum columns
        m = (k @ qubit_tensor).reshape(4, self.env_dim, 4)
        kk = k.reshape(4, self.env_dim, 4)
        return np.einsum("iea,jea->ij", m, kk.conj())


def _rotate_frame(rho: np.ndarray, frame: np.ndarray | None, t: float) -> np.ndarray:
    if frame is None:
        return rho
    d = np.exp(1j * t * np.real(np.diag(frame)))
    return d[:, None] * rho * d.conj()[None, :]


def _states_at(h: np.ndarray, qubit_state: np.ndarray, times: Sequence[float],
               frame: np.ndarray | None) -> np.ndarray:
    prop = _Propagation(h)
    q = models.computational_to_tensor(np.asarray(qubit_state, dtype=complex))
    out = np.empty((len(times), 4, 4), dtype=complex)
    for i, t in enumerate(times):
        rho = models.tensor_to_computational(prop.reduced(q, float(t)))
        out[i] = _rotate_frame(rho, frame, float(t))
    return out


def evolve_reduced_many(h_builder: HamiltonianBuilder, qubit_state, times,
                        policy: TruncationPolicy = DEFAULT_POLICY,
                        frame: np.ndarray | None = None) -> OracleResult:
    """Reduced states on a time grid at the smallest converged cutoff.

    ``frame`` is an optional diagonal qubit Hamiltonian (computational
    ordering) whose free rotation is removed from the result, for comparison
    with closed forms written in a rotating frame.
    """
    if frame is not None and np.count_nonzero(frame - np.diag(np.diag(frame))):
        raise ValueError("frame Hamiltonian must be diagonal")
    times = np.atleast_1d(np.asarray(times, dtype=float))
    cutoff = policy.initial_cutoff
    current = _states_at(h_builder(cutoff), qubit_state, times, frame)
    delta = float("nan")
    while cutoff + policy.growth_step <= policy.max_cutoff:
        bigger = _states_at(h_builder(cutoff + policy.growth_step), qubit_state, times, frame)
        delta = float(np.max(np.abs(bigger - current))) if len(times) else 0.0
        if delta < policy.tolerance:
            return OracleResult(states=current, cutoff=cutoff, last_delta=delta)
        cutoff += policy.growth_step
        current = bigger
    raise TruncationError(
        f"reduced state not converged below {policy.tolerance:g} by cutoff {policy.max_cutoff}"
        f" (last delta {delta:.3e})",
        last_delta=delta,
        cutoff=cutoff,
    )


def evolve_reduced(h_builder: HamiltonianBuilder, qubit_state, t: float,
                   policy: TruncationPolicy = DEFAULT_POLICY,
                   frame: np.ndarray | None = None) -> np.ndarray:
    return evolve_reduced_many(h_builder, qubit_state, [t], policy, frame).states[0]


def certify_cutoff(h_builder: HamiltonianBuilder, qubit_state, t_max: float,
                   policy: TruncationPolicy = DEFAULT_POLICY, n_times: int = 101) -> int:
    """Smallest cutoff stable to ``policy.tolerance`` on a grid over ``[0, t_max]``."""
    times = np.linspace(0.0, t_max, n_times)
    return evolve_reduced_many(h_builder, qubit_state, times, policy).cutoff


# ---------------------------------------------------------------------------
# builders for the three models


def tc_builder(p: models.TavisCummingsParams) -> HamiltonianBuilder:
    return lambda n: models.tc_full_hamiltonian(p, n)


def dephasing_builder(p: models.DephasingParams) -> HamiltonianBuilder:
    return lambda n: models.dephasing_full_hamiltonian(p, [n] * len(p.modes))


def ising_builder(p: models.IsingParams) -> HamiltonianBuilder:
    h = models.computational_to_tensor(models.ising_hamiltonian(p))
    return lambda n: h
