"""Two-qubit model builders.

Conventions used throughout the package:

* single-qubit basis ``(|e>, |g>)``, so ``sigma_z = diag(1, -1)`` and
  ``sigma_plus = |e><g|``;
* full-space operators are ordered qubit A ⊗ qubit B ⊗ field mode(s), with
  the qubit pair in tensor order ``(ee, eg, ge, gg)``;
* every 4x4 two-qubit matrix returned to callers (states, propagators) is in
  the *computational ordering* ``(ee, gg, eg, ge)``. The ``(ee, gg, +, -)``
  ordering with ``|±> = (|eg> ± |ge>)/sqrt(2)`` is reachable through
  :func:`pm_to_computational` and :func:`computational_to_pm`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Sequence

import numpy as np

from .errors import UnsupportedAnalyticFormError
from .linalg import kron, kron_all

# ---------------------------------------------------------------------------
# basis conventions

# computational index k -> tensor index
COMPUTATIONAL_ORDER = (0, 3, 1, 2)
LABELS = ("ee", "gg", "eg", "ge")

_PERM = np.zeros((4, 4))
for _k, _j in enumerate(COMPUTATIONAL_ORDER):
    _PERM[_k, _j] = 1.0

_S = 1.0 / math.sqrt(2.0)
# columns: ee, gg, +, - expressed in (ee, gg, eg, ge)
_PM = np.array(
    [
        [1, 0, 0, 0],
        [0, 1, 0, 0],
        [0, 0, _S, _S],
        [0, 0, _S, -_S],
    ],
    dtype=complex,
)


def tensor_to_computational(m: np.ndarray) -> np.ndarray:
    """Reorder a 4x4 matrix from ``(ee, eg, ge, gg)`` to ``(ee, gg, eg, ge)``."""
    return _PERM @ m @ _PERM.T


def computational_to_tensor(m: np.ndarray) -> np.ndarray:
    return _PERM.T @ m @ _PERM


def pm_to_computational(m: np.ndarray) -> np.ndarray:
    return _PM @ m @ _PM.conj().T


def computational_to_pm(m: np.ndarray) -> np.ndarray:
    return _PM.conj().T @ m @ _PM


# ---------------------------------------------------------------------------
# single-particle operators

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
SIGMA_PLUS = np.array([[0, 1], [0, 0]], dtype=complex)
SIGMA_MINUS = SIGMA_PLUS.T.copy()
I2 = np.eye(2, dtype=complex)


def annihilation(cutoff: int) -> np.ndarray:
    """Bosonic lowering operator on Fock levels ``0..cutoff``."""
    return np.diag(np.sqrt(np.arange(1, cutoff + 1)), k=1).astype(complex)


# ---------------------------------------------------------------------------
# parameter types


class Family(str, Enum):
    EE_GG = "EE_GG"  # sin(theta)|ee> + cos(theta)|gg>
    EG_GE = "EG_GE"  # sin(theta)|eg> + cos(theta)|ge>


@dataclass(frozen=True)
class InitialStateFamily:
    r: float
    theta: float
    family: Family = Family.EE_GG

    def __post_init__(self):
        if not 0.0 <= self.r <= 1.0:
            raise ValueError(f"purity weight r must lie in [0, 1], got {self.r}")
        object.__setattr__(self, "family", Family(self.family))


@dataclass(frozen=True)
class TavisCummingsParams:
    omega0: float = 1.0
    omega: float = 1.0
    g: float = 1.0

    def __post_init__(self):
        if not self.g > 0:
            raise ValueError(f"coupling g must be positive, got {self.g}")
        if self.omega0 != self.omega:
            raise ValueError(
                f"resonance required: omega0={self.omega0} != omega={self.omega}"
            )


@dataclass(frozen=True)
class DephasingParams:
    omega0: float = 1.0
    Omega: float = 3.0
    modes: tuple = ((1.0, 0.5),)  # (omega_j, Gamma_j)

    def __post_init__(self):
        modes = tuple((float(w), float(G)) for w, G in self.modes)
        if not modes:
            raise ValueError("at least one bath mode is required")
        for w, G in modes:
            if not w > 0:
                raise ValueError(f"mode frequency must be positive, got {w}")
            if G < 0:
                raise ValueError(f"mode coupling must be non-negative, got {G}")
        object.__setattr__(self, "modes", modes)

    @classmethod
    def single_mode(cls, Gamma: float, omega: float = 1.0, Omega: float = 3.0,
                    omega0: float = 1.0) -> "DephasingParams":
        return cls(omega0=omega0, Omega=Omega, modes=((omega, Gamma),))


@dataclass(frozen=True)
class IsingParams:
    omega: float = 1.0
    g: float = 2.0
    J: float = field(init=False)
    lam: float = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "J", self.g / (2.0 * self.omega))
        object.__setattr__(self, "lam", math.sqrt(4.0 * self.omega**2 + self.g**2))

    @classmethod
    def from_J(cls, J: float, omega: float = 1.0) -> "IsingParams":
        return cls(omega=omega, g=2.0 * J * omega)


# ---------------------------------------------------------------------------
# initial states


def _pure_vector(f: InitialStateFamily) -> np.ndarray:
    s, c = math.sin(f.theta), math.cos(f.theta)
    v = np.zeros(4, dtype=complex)
    if f.family is Family.EE_GG:
        v[0], v[1] = s, c
    else:
        v[2], v[3] = s, c
    return v


def build_initial_qubit_state(f: InitialStateFamily) -> np.ndarray:
    """``(1-r)/4 I + r |phi><phi|`` in computational ordering."""
    v = _pure_vector(f)
    return (1.0 - f.r) / 4.0 * np.eye(4, dtype=complex) + f.r * np.outer(v, v.conj())


# ---------------------------------------------------------------------------
# Tavis-Cummings


def _require_ee_gg(f: InitialStateFamily) -> None:
    if f.family is not Family.EE_GG:
        raise UnsupportedAnalyticFormError(
            "no closed form for the EG_GE family in the Tavis-Cummings model; "
            "use the propagator oracle"
        )


def tc_reduced_state_analytic(p: TavisCummingsParams, f: InitialStateFamily,
                              gt: float) -> np.ndarray:
    """Closed-form reduced qubit state at rescaled time ``gt``, as published.

    The state is expressed in the frame rotating with the free qubit
    Hamiltonian. Only the pure component of the initial state is propagated;
    the ``(1-r)/4`` background is carried along unchanged. This agrees with
    the exact dynamics only for ``r = 1``; see
    :func:`tc_reduced_state_exact` and MODEL_NOTES.md.
    """
    _require_ee_gg(f)
    r = f.r
    s, c = math.sin(f.theta), math.cos(f.theta)
    x = math.sqrt(6.0) * gt
    cx, sx = math.cos(x), math.sin(x)
    w = (1.0 - r) / 4.0

    rho = np.zeros((4, 4), dtype=complex)
    rho[0, 0] = w + r * (s * (cx + 2.0) / 3.0) ** 2
    rho[1, 1] = w + r * c**2 + 2.0 * r * (s * (cx - 1.0) / 3.0) ** 2
    rho[0, 1] = rho[1, 0] = r * (cx + 2.0) / 3.0 * s * c
    rho[2, 2] = rho[3, 3] = w + r * sx**2 * s**2 / 6.0
    rho[2, 3] = rho[3, 2] = r * sx**2 * s**2 / 6.0
    return rho


def tc_reduced_state_exact(p: TavisCummingsParams, f: InitialStateFamily,
                           gt: float) -> np.ndarray:
    """Exact reduced qubit state for the EE_GG family, any ``r``.

    Same frame as :func:`tc_reduced_state_analytic`. The maximally mixed
    background is propagated too: ``|ee,0>`` spreads over the two-excitation
    manifold at frequency ``sqrt(6) g`` and ``|+,0>`` Rabi-oscillates with
    ``|gg,1>`` at frequency ``sqrt(2) g``; ``|gg,0>`` and ``|-,0>`` are
    stationary.
    """
    _require_ee_gg(f)
    r = f.r
    s, c = math.sin(f.theta), math.cos(f.theta)
    x = math.sqrt(6.0) * gt
    y = math.sqrt(2.0) * gt
    w = (1.0 - r) / 4.0

    # |ee,0> -> amp_ee |ee,0> + amp_plus |+,1> + amp_gg |gg,2>
    amp_ee = (math.cos(x) + 2.0) / 3.0
    plus_pop = math.sin(x) ** 2 / 3.0
    gg_pop = 2.0 * (math.cos(x) - 1.0) ** 2 / 9.0

    p_plus = w * (plus_pop + math.cos(y) ** 2) + r * s**2 * plus_pop
    p_minus = w

    rho = np.zeros((4, 4), dtype=complex)
    rho[0, 0] = (w + r * s**2) * amp_ee**2
    rho[1, 1] = w * (gg_pop + 1.0 + math.sin(y) ** 2) + r * (c**2 + s**2 * gg_pop)
    rho[0, 1] = rho[1, 0] = r * s * c * amp_ee
    rho[2, 2] = rho[3, 3] = 0.5 * (p_plus + p_minus)
    rho[2, 3] = rho[3, 2] = 0.5 * (p_plus - p_minus)
    return rho


def tc_qubit_free_hamiltonian(p: TavisCummingsParams) -> np.ndarray:
    """``omega0/2 (sz_A + sz_B)`` in computational ordering."""
    return np.diag([p.omega0, -p.omega0, 0.0, 0.0]).astype(complex)


def tc_full_hamiltonian(p: TavisCummingsParams, fock_cutoff: int) -> np.ndarray:
    if fock_cutoff < 2:
        raise ValueError(f"fock_cutoff must be >= 2, got {fock_cutoff}")
    a = annihilation(fock_cutoff)
    idf = np.eye(fock_cutoff + 1, dtype=complex)
    n_op = a.conj().T @ a

    sz_a = kron_all(SIGMA_Z, I2, idf)
    sz_b = kron_all(I2, SIGMA_Z, idf)
    h = 0.5 * p.omega0 * (sz_a + sz_b) + p.omega * kron_all(I2, I2, n_op)
    for sp in (kron(SIGMA_PLUS, I2), kron(I2, SIGMA_PLUS)):
        jump = kron(sp, a)  # a sigma_+
        h = h + p.g * (jump + jump.conj().T)
    return h


def tc_excitation_number(fock_cutoff: int) -> np.ndarray:
    a = annihilation(fock_cutoff)
    idf = np.eye(fock_cutoff + 1, dtype=complex)
    up = SIGMA_PLUS @ SIGMA_MINUS
    return (kron_all(up, I2, idf) + kron_all(I2, up, idf)
            + kron_all(I2, I2, a.conj().T @ a))


# ---------------------------------------------------------------------------
# dephasing


def decoherence_factor(p: DephasingParams, t: float) -> float:
    """``prod_j exp(4 Gamma_j^2 (cos(omega_j t) - 1) / omega_j^2)``."""
    expo = sum(4.0 * G**2 * (math.cos(w * t) - 1.0) / w**2 for w, G in p.modes)
    return math.exp(expo)


def _require_eg_ge(f: InitialStateFamily) -> None:
    if f.family is not Family.EG_GE:
        raise UnsupportedAnalyticFormError(
            "the dephasing closed form covers the EG_GE family only; "
            "use the propagator oracle"
        )


def dephasing_reduced_state_pm(p: DephasingParams, f: InitialStateFamily,
                               t: float) -> np.ndarray:
    """Reduced state in the ``(ee, gg, +, -)`` ordering."""
    _require_eg_ge(f)
    r = f.r
    w = (1.0 - r) / 4.0
    s2, c2 = math.sin(2.0 * f.theta), math.cos(2.0 * f.theta)
    rho = np.zeros((4, 4), dtype=complex)
    rho[0, 0] = rho[1, 1] = w
    rho[2, 2] = w + 0.5 * r * (1.0 + s2)
    rho[3, 3] = rho[2, 2] - r * s2
    rho[2, 3] = -np.exp(-2j * p.Omega * t) * decoherence_factor(p, t) * r * c2 / 2.0
    rho[3, 2] = np.conj(rho[2, 3])
    return rho


def dephasing_reduced_state_analytic(p: DephasingParams, f: InitialStateFamily,
                                     t: float) -> np.ndarray:
    return pm_to_computational(dephasing_reduced_state_pm(p, f, t))


def exchange_operator() -> np.ndarray:
    """``sigma_+^A sigma_-^B + sigma_+^B sigma_-^A`` in tensor order."""
    x = kron(SIGMA_PLUS, SIGMA_MINUS)
    return x + x.conj().T


def dephasing_full_hamiltonian(p: DephasingParams,
                               fock_cutoffs: Sequence[int]) -> np.ndarray:
    cutoffs = [int(n) for n in fock_cutoffs]
    if len(cutoffs) != len(p.modes):
        raise ValueError(f"need one cutoff per mode ({len(p.modes)}), got {len(cutoffs)}")
    if any(n < 1 for n in cutoffs):
        raise ValueError(f"cutoffs must be >= 1, got {cutoffs}")

    env_dims = [n + 1 for n in cutoffs]
    env_dim = int(np.prod(env_dims))
    id_env = np.eye(env_dim, dtype=complex)
    id4 = np.eye(4, dtype=complex)

    h_s = 0.5 * p.omega0 * (kron(SIGMA_Z, I2) + kron(I2, SIGMA_Z)) + p.Omega * exchange_operator()
    h_e = np.zeros((env_dim, env_dim), dtype=complex)
    coupling = np.zeros((env_dim, env_dim), dtype=complex)
    for j, ((w, G), dim) in enumerate(zip(p.modes, env_dims)):
        b = annihilation(dim - 1)
        left = np.eye(int(np.prod(env_dims[:j])), dtype=complex)
        right = np.eye(int(np.prod(env_dims[j + 1:])), dtype=complex)
        h_e = h_e + w * kron_all(left, b.conj().T @ b, right)
        coupling = coupling + G * kron_all(left, b + b.conj().T, right)

    return kron(h_s, id_env) + kron(id4, h_e) + kron(exchange_operator(), coupling)


# ---------------------------------------------------------------------------
# Ising pair


def ising_hamiltonian(p: IsingParams) -> np.ndarray:
    """``omega/2 (sz_A + sz_B) + g/2 sx_A sx_B`` in computational ordering."""
    h = 0.5 * p.omega * (kron(SIGMA_Z, I2) + kron(I2, SIGMA_Z)) + 0.5 * p.g * kron(SIGMA_X, SIGMA_X)
    return tensor_to_computational(h)


def ising_propagator(p: IsingParams, t: float) -> np.ndarray:
    half = p.lam * t / 2.0
    u = np.zeros((4, 4), dtype=complex)
    u[0, 0] = math.cos(half) - 1j * (2.0 * p.omega / p.lam) * math.sin(half)
    u[1, 1] = np.conj(u[0, 0])
    u[0, 1] = u[1, 0] = -1j * (p.g / p.lam) * math.sin(half)
    u[2, 2] = u[3, 3] = math.cos(p.g * t / 2.0)
    u[2, 3] = u[3, 2] = -1j * math.sin(p.g * t / 2.0)
    return u


def ising_reduced_state(p: IsingParams, f: InitialStateFamily, t: float) -> np.ndarray:
    u = ising_propagator(p, t)
    return u @ build_initial_qubit_state(f) @ u.conj().T
