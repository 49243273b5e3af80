"""Trajectories, dark-period detection, extrema matching and parameter sweeps.

Times are always the model's rescaled time: ``g t`` for the Tavis-Cummings
model, ``omega t`` for the dephasing model (``omega`` = first bath mode) and
for the Ising pair (``omega`` = qubit splitting).
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from . import entanglement as ent
from . import models as M
from . import oracle as O
from .errors import InvalidStateError

SOURCES = ("analytic", "exact", "oracle")
ZERO_TOL = 1e-9
BISECT_RESOLUTION = 1e-6
MIN_DARK_WIDTH = 1e-4
DEFAULT_WINDOW = 0.2


# ---------------------------------------------------------------------------
# model selection


@dataclass(frozen=True)
class ModelSpec:
    kind: str  # "tc" | "dephasing" | "ising"
    params: object
    initial: M.InitialStateFamily

    def __post_init__(self):
        expected = {"tc": M.TavisCummingsParams, "dephasing": M.DephasingParams,
                    "ising": M.IsingParams}
        if self.kind not in expected:
            raise ValueError(f"unknown model kind {self.kind!r}")
        if not isinstance(self.params, expected[self.kind]):
            raise TypeError(f"{self.kind} model needs {expected[self.kind].__name__}")

    @classmethod
    def tc(cls, r: float, theta: float, g: float = 1.0, omega0: float = 1.0) -> "ModelSpec":
        return cls("tc", M.TavisCummingsParams(omega0=omega0, omega=omega0, g=g),
                   M.InitialStateFamily(r, theta, M.Family.EE_GG))

    @classmethod
    def dephasing(cls, r: float, theta: float, Gamma: float, Omega: float = 3.0,
                  omega: float = 1.0, omega0: float = 1.0) -> "ModelSpec":
        return cls("dephasing", M.DephasingParams.single_mode(Gamma, omega, Omega, omega0),
                   M.InitialStateFamily(r, theta, M.Family.EG_GE))

    @classmethod
    def ising(cls, r: float, theta: float, J: float, omega: float = 1.0,
              family: M.Family = M.Family.EE_GG) -> "ModelSpec":
        return cls("ising", M.IsingParams.from_J(J, omega), M.InitialStateFamily(r, theta, family))

    @property
    def time_scale(self) -> float:
        """Physical time per unit of rescaled time."""
        if self.kind == "tc":
            return 1.0 / self.params.g
        if self.kind == "dephasing":
            return 1.0 / self.params.modes[0][0]
        return 1.0 / self.params.omega

    @property
    def omega0(self) -> float:
        return self.params.omega if self.kind == "ising" else self.params.omega0

    def metadata(self) -> dict:
        meta = {"model": self.kind, "r": self.initial.r, "theta": self.initial.theta,
                "family": self.initial.family.value}
        p = self.params
        if self.kind == "tc":
            meta.update(omega0=p.omega0, omega=p.omega, g=p.g)
        elif self.kind == "dephasing":
            meta.update(omega0=p.omega0, Omega=p.Omega)
            for j, (w, G) in enumerate(p.modes):
                meta[f"omega_{j}"] = w
                meta[f"Gamma_{j}"] = G
        else:
            meta.update(omega=p.omega, g=p.g, J=p.J, lam=p.lam)
        return meta

    def default_policy(self) -> O.TruncationPolicy:
        return O.TC_POLICY if self.kind == "tc" else O.DEFAULT_POLICY

    def builder(self) -> O.HamiltonianBuilder:
        return {"tc": O.tc_builder, "dephasing": O.dephasing_builder,
                "ising": O.ising_builder}[self.kind](self.params)


def analytic_state(model: ModelSpec, tau: float, source: str = "analytic") -> np.ndarray:
    """Closed-form reduced state at rescaled time ``tau``.

    ``source="exact"`` selects the corrected Tavis-Cummings form; the other
    two models have a single closed form.
    """
    if model.kind == "tc":
        fn = M.tc_reduced_state_exact if source == "exact" else M.tc_reduced_state_analytic
        return fn(model.params, model.initial, tau)
    t = tau * model.time_scale
    if model.kind == "dephasing":
        return M.dephasing_reduced_state_analytic(model.params, model.initial, t)
    return M.ising_reduced_state(model.params, model.initial, t)


def model_states(model: ModelSpec, times, source: str = "analytic",
                 policy: Optional[O.TruncationPolicy] = None) -> tuple[np.ndarray, Optional[int]]:
    """States on a rescaled-time grid, plus the certified cutoff for the oracle."""
    if source not in SOURCES:
        raise ValueError(f"unknown source {source!r}; expected one of {SOURCES}")
    times = np.asarray(times, dtype=float)
    if source == "oracle":
        frame = M.tc_qubit_free_hamiltonian(model.params) if model.kind == "tc" else None
        res = O.evolve_reduced_many(model.builder(), M.build_initial_qubit_state(model.initial),
                                    times * model.time_scale, policy or model.default_policy(),
                                    frame=frame)
        return res.states, res.cutoff
    states = np.empty((len(times), 4, 4), dtype=complex)
    for i, tau in enumerate(times):
        states[i] = analytic_state(model, float(tau), source)
    return states, None


# ---------------------------------------------------------------------------
# batched observables


def check_states(states: np.ndarray) -> None:
    """Vectorised :func:`entanglement.check_density_matrix` over a stack."""
    if len(states) == 0:
        return
    herm = np.max(np.abs(states - np.conj(np.swapaxes(states, -1, -2))))
    if herm > ent.HERMITIAN_TOL:
        raise InvalidStateError(f"state is not Hermitian (deviation {herm:.3e})")
    tr = np.max(np.abs(np.trace(states, axis1=-2, axis2=-1) - 1.0))
    if tr > ent.TRACE_TOL:
        raise InvalidStateError(f"trace deviates from 1 by {tr:.3e}")
    herm_part = 0.5 * (states + np.conj(np.swapaxes(states, -1, -2)))
    lo = np.min(np.linalg.eigvalsh(herm_part))
    if lo < ent.NEG_EIG_TOL:
        raise InvalidStateError(f"state has negative eigenvalue {lo:.3e}")


def wootters_batch(states: np.ndarray) -> np.ndarray:
    """Concurrence of a stack of states; same algorithm as ``wootters_concurrence``."""
    states = np.asarray(states, dtype=complex)
    if len(states) == 0:
        return np.zeros(0)
    check_states(states)
    herm = 0.5 * (states + np.conj(np.swapaxes(states, -1, -2)))
    w, v = np.linalg.eigh(herm)
    root = (v * np.sqrt(np.clip(w, 0.0, None))[:, None, :]) @ np.conj(np.swapaxes(v, -1, -2))
    lam = np.linalg.svd(root @ ent.YY @ np.conj(root), compute_uv=False)
    c = lam[:, 0] - lam[:, 1] - lam[:, 2] - lam[:, 3]
    return np.clip(c, 0.0, 1.0)


def paper_cutoff_batch(states: np.ndarray) -> np.ndarray:
    states = np.asarray(states)
    if len(states) == 0:
        return np.zeros(0)
    d11 = np.clip(states[:, 0, 0].real, 0.0, None)
    d22 = np.clip(states[:, 1, 1].real, 0.0, None)
    return np.maximum(0.0, states[:, 2, 3].real - np.sqrt(d11 * d22))


VARIANTS = {"wootters": wootters_batch, "paper": paper_cutoff_batch}


# ---------------------------------------------------------------------------
# trajectories


@dataclass
class Trajectory:
    model: ModelSpec
    times: np.ndarray
    states: np.ndarray
    c_wootters: np.ndarray
    c_paper: np.ndarray
    e_h0: np.ndarray
    e_hI: np.ndarray  # NaN where the observable does not apply
    purity: np.ndarray
    source: str
    cutoff: Optional[int] = None

    def __post_init__(self):
        if len(self.times) > 1 and np.any(np.diff(self.times) <= 0):
            raise ValueError("trajectory times must be strictly ascending")
        if len(self.states) != len(self.times):
            raise ValueError("one state per time required")

    def __len__(self):
        return len(self.times)

    def report(self, i: int) -> ent.ConcurrenceReport:
        return ent.wootters_concurrence(self.states[i])


def sample_trajectory(model: ModelSpec, times, source: str = "analytic",
                      policy: Optional[O.TruncationPolicy] = None) -> Trajectory:
    times = np.atleast_1d(np.asarray(times, dtype=float))
    states, cutoff = model_states(model, times, source, policy)
    e_h0 = model.omega0 * (states[:, 0, 0].real - states[:, 1, 1].real)
    if model.kind == "ising":
        e_hI = model.params.g * 2.0 * (states[:, 0, 1].real + states[:, 2, 3].real)
    else:
        e_hI = np.full(len(times), np.nan)
    pur = np.real(np.einsum("nij,nji->n", states, states))
    return Trajectory(model=model, times=times, states=states,
                      c_wootters=wootters_batch(states), c_paper=paper_cutoff_batch(states),
                      e_h0=e_h0, e_hI=e_hI, purity=pur, source=source, cutoff=cutoff)


# ---------------------------------------------------------------------------
# dark periods


@dataclass(frozen=True)
class DarkPeriod:
    t_start: float
    t_end: float
    revived: bool
    i_start: int  # first dark sample
    i_end: int  # last dark sample

    @property
    def width(self) -> float:
        return self.t_end - self.t_start


def dark_runs(values: np.ndarray, zero_tol: float = ZERO_TOL,
              min_width: int = 2) -> list[tuple[int, int]]:
    """Maximal index runs ``(first, last)`` with ``values <= zero_tol``."""
    dark = np.asarray(values) <= zero_tol
    runs = []
    i, n = 0, len(dark)
    while i < n:
        if dark[i]:
            j = i
            while j + 1 < n and dark[j + 1]:
                j += 1
            if j - i + 1 >= min_width:
                runs.append((i, j))
            i = j + 1
        else:
            i += 1
    return runs


def _bisect(f: Callable[[float], bool], lo: float, hi: float, tol: float) -> float:
    """Boundary between ``f(lo) == False`` and ``f(hi) == True``."""
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if f(mid):
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


def detect_dark_periods(traj: Trajectory, zero_tol: float = ZERO_TOL, min_width: int = 2,
                        refine: bool = True) -> list[DarkPeriod]:
    """Finite intervals of vanishing Wootters concurrence.

    Boundaries are refined by bisection on the closed form when the
    trajectory came from an analytic source. Touch-zeros (runs shorter than
    ``min_width`` samples, or refined width below 1e-4) are dropped.
    """
    if min_width < 2:
        raise ValueError("min_width must be at least 2 samples")
    c, t = traj.c_wootters, traj.times
    can_refine = refine and traj.source in ("analytic", "exact")

    def is_dark(tau: float) -> bool:
        return ent.concurrence(analytic_state(traj.model, tau, traj.source)) <= zero_tol

    periods = []
    for i0, i1 in dark_runs(c, zero_tol, min_width):
        t0, t1 = float(t[i0]), float(t[i1])
        if can_refine and i0 > 0:
            t0 = _bisect(is_dark, float(t[i0 - 1]), t0, BISECT_RESOLUTION)
        if can_refine and i1 < len(t) - 1:
            t1 = _bisect(lambda x: not is_dark(x), t1, float(t[i1 + 1]), BISECT_RESOLUTION)
            t1 = float(t1)
        if can_refine and t1 - t0 < MIN_DARK_WIDTH:
            continue
        revived = bool(np.any(c[i1 + 1:] > zero_tol))
        periods.append(DarkPeriod(t_start=t0, t_end=t1, revived=revived, i_start=i0, i_end=i1))
    return periods


# ---------------------------------------------------------------------------
# extrema


@dataclass(frozen=True)
class Extremum:
    time: float
    value: float
    kind: str  # "min" | "max"


@dataclass
class ExtremaMatch:
    concurrence_extrema: list
    energy_extrema: list
    pairing: list  # (i_concurrence, i_energy, time offset)
    window: float
    unpaired_concurrence: list = field(default_factory=list)
    unpaired_energy: list = field(default_factory=list)

    @property
    def complete(self) -> bool:
        return not self.unpaired_concurrence and not self.unpaired_energy


def find_extrema(t, y, flat_tol: float = 1e-12) -> list[Extremum]:
    """Interior extrema from sign changes of the finite differences.

    Flat runs (e.g. a zero-concurrence plateau) count as one extremum at the
    run midpoint; isolated extrema are refined with a three-point parabola.
    """
    t = np.asarray(t, dtype=float)
    y = np.asarray(y, dtype=float)
    if len(y) < 3:
        return []
    scale = max(1.0, float(np.max(np.abs(y))))
    d = np.diff(y)
    sgn = np.where(np.abs(d) <= flat_tol * scale, 0, np.sign(d)).astype(int)

    out = []
    last_k, last_s = None, 0
    for k, s in enumerate(sgn):
        if s == 0:
            continue
        if last_s != 0 and s != last_s:
            i0, i1 = last_k + 1, k
            kind = "max" if last_s > 0 else "min"
            if i0 == i1:
                out.append(_parabola_vertex(t, y, i0, kind))
            else:
                out.append(Extremum(float(0.5 * (t[i0] + t[i1])), float(y[i0]), kind))
        last_k, last_s = k, s
    return out


def _parabola_vertex(t: np.ndarray, y: np.ndarray, i: int, kind: str) -> Extremum:
    x = t[i - 1:i + 2]
    v = y[i - 1:i + 2]
    a, b, c = np.polyfit(x - x[1], v, 2)
    if a == 0 or (kind == "max") != (a < 0):
        return Extremum(float(t[i]), float(y[i]), kind)
    dx = float(np.clip(-b / (2 * a), x[0] - x[1], x[2] - x[1]))
    return Extremum(float(x[1] + dx), float(a * dx * dx + b * dx + c), kind)


def pair_extrema(a: Sequence[Extremum], b: Sequence[Extremum], window: float):
    """Greedy nearest-time injective pairing within ``window``."""
    cands = []
    for i, ea in enumerate(a):
        for j, eb in enumerate(b):
            dt = abs(ea.time - eb.time)
            if dt <= window:
                cands.append((dt, min(ea.time, eb.time), i, j))
    cands.sort(key=lambda c: (c[0], c[1]))
    used_a, used_b, pairs = set(), set(), []
    for dt, _, i, j in cands:
        if i in used_a or j in used_b:
            continue
        used_a.add(i)
        used_b.add(j)
        pairs.append((i, j, float(b[j].time - a[i].time)))
    pairs.sort()
    return pairs, [i for i in range(len(a)) if i not in used_a], \
        [j for j in range(len(b)) if j not in used_b]


def match_series(t, conc, energy, window: float = DEFAULT_WINDOW,
                 t_max: Optional[float] = None) -> ExtremaMatch:
    """Pair the extrema of two series sampled on the same grid.

    With ``t_max`` set, only extrema at or before ``t_max`` are scored; later
    samples serve to locate extrema near the horizon (a flat run that crosses
    ``t_max`` has no end otherwise) and as pairing partners.
    """
    ce = find_extrema(t, conc)
    ee = find_extrema(t, energy)
    if t_max is not None:
        # drop extrema that could only pair with something past the sampled range
        ce = [e for e in ce if e.time <= t_max + window]
        ee = [e for e in ee if e.time <= t_max + window]
    pairs, ua, ub = pair_extrema(ce, ee, window)
    if t_max is not None:
        ua = [i for i in ua if ce[i].time <= t_max]
        ub = [j for j in ub if ee[j].time <= t_max]
    return ExtremaMatch(ce, ee, pairs, window, ua, ub)


def match_extrema(traj: Trajectory, observable: str = "h0", window: float = DEFAULT_WINDOW,
                  t_max: Optional[float] = None) -> ExtremaMatch:
    if observable not in ("h0", "hI"):
        raise ValueError(f"observable must be 'h0' or 'hI', got {observable!r}")
    energy = traj.e_h0 if observable == "h0" else traj.e_hI
    if np.any(np.isnan(energy)):
        raise ValueError(f"observable {observable} is not defined for model {traj.model.kind}")
    return match_series(traj.times, traj.c_wootters, energy, window, t_max)


# ---------------------------------------------------------------------------
# sweeps


@dataclass
class SweepGrid:
    x_name: str
    x_values: np.ndarray
    y_name: str
    y_values: np.ndarray
    values: np.ndarray  # (len(y), len(x))
    zero_tol: float
    variant: str = "wootters"
    source: str = "analytic"
    preset: Optional[str] = None
    params: dict = field(default_factory=dict)

    @property
    def dark_mask(self) -> np.ndarray:
        return self.values <= self.zero_tol

    @property
    def dark_fraction(self) -> float:
        return float(np.mean(self.dark_mask)) if self.values.size else 0.0


def worker_count() -> int:
    """Worker hint from ``ESDLAB_THREADS``, capped at the available CPUs."""
    avail = os.cpu_count() or 1
    raw = os.environ.get("ESDLAB_THREADS", "").strip()
    try:
        n = int(raw) if raw else 1
    except ValueError:
        n = 1
    return max(1, min(n, avail))


def sweep(family: Callable[[float], ModelSpec], y_name: str, y_values, times,
          variant: str = "wootters", source: str = "analytic", zero_tol: float = ZERO_TOL,
          preset: Optional[str] = None, params: Optional[dict] = None) -> SweepGrid:
    """Concurrence over a (parameter, time) grid.

    ``family`` maps a y-axis value to a model; every row is an independent
    trajectory, so rows may be evaluated concurrently without changing
    the result.
    """
    if variant not in VARIANTS:
        raise ValueError(f"unknown concurrence variant {variant!r}")
    times = np.asarray(times, dtype=float)
    y_values = np.asarray(y_values, dtype=float)
    f = VARIANTS[variant]

    def row(y):
        states, _ = model_states(family(float(y)), times, source)
        return f(states)

    workers = worker_count()
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(row, y_values))
    else:
        rows = [row(y) for y in y_values]
    values = np.array(rows).reshape(len(y_values), len(times))
    return SweepGrid(x_name="time", x_values=times, y_name=y_name, y_values=y_values,
                     values=values, zero_tol=zero_tol, variant=variant, source=source,
                     preset=preset, params=dict(params or {}))


# ---------------------------------------------------------------------------
# figure presets


@dataclass(frozen=True)
class SweepPreset:
    name: str
    model: str
    y_name: str
    y_values: tuple
    t_max: float
    steps: int  # number of time samples
    fixed: dict
    sections: tuple = ()

    def times(self) -> np.ndarray:
        return np.linspace(0.0, self.t_max, self.steps)

    def family(self) -> Callable[[float], ModelSpec]:
        fx = dict(self.fixed)
        if self.model == "tc":
            return lambda y: ModelSpec.tc(**{**fx, self.y_name: y})
        if self.model == "dephasing":
            return lambda y: ModelSpec.dephasing(**{**fx, self.y_name: y})
        return lambda y: ModelSpec.ising(**{**fx, self.y_name: y})

    def run(self, variant: str = "wootters", resolution: Optional[int] = None) -> SweepGrid:
        times = self.times() if resolution is None else np.linspace(0.0, self.t_max, resolution)
        ys = self.y_values
        if resolution is not None:
            ys = _axis(self.name, resolution)
        params = {"model": self.model, **self.fixed, "t_max": self.t_max}
        return sweep(self.family(), self.y_name, ys, times, variant=variant,
                     preset=self.name, params=params)


GRID_N = 201


def _axis(name: str, n: int = GRID_N) -> tuple:
    if name.startswith("fig1"):
        return tuple(np.linspace(0.0, math.pi / 2, n))
    if name.startswith("fig3"):
        return tuple(2.0 * np.arange(1, n + 1) / n)  # (0, 2]
    if name == "fig4a":
        return tuple(np.linspace(0.0, 1.0, n))
    return tuple(np.linspace(0.0, 2.0, n))  # fig4b, J axis


SWEEP_PRESETS = {
    "fig1a": SweepPreset("fig1a", "tc", "theta", _axis("fig1a"), 15.0, GRID_N, {"r": 1.0}),
    "fig1b": SweepPreset("fig1b", "tc", "theta", _axis("fig1b"), 15.0, GRID_N, {"r": 0.5}),
    "fig3a": SweepPreset("fig3a", "dephasing", "Gamma", _axis("fig3a"), 4 * math.pi, GRID_N,
                         {"r": 1.0, "theta": math.pi / 20, "Omega": 3.0}),
    "fig3b": SweepPreset("fig3b", "dephasing", "Gamma", _axis("fig3b"), 4 * math.pi, GRID_N,
                         {"r": 0.5, "theta": math.pi / 20, "Omega": 3.0}),
    "fig4a": SweepPreset("fig4a", "ising", "r", _axis("fig4a"), 10.0, GRID_N,
                         {"theta": math.pi / 4, "J": 1.0}, sections=(0.35, 1.0, 0.5)),
    "fig4b": SweepPreset("fig4b", "ising", "J", _axis("fig4b"), 10.0, GRID_N,
                         {"theta": math.pi / 4, "r": 0.5}, sections=(1.0, 0.5, 2.0)),
}

# single-trajectory presets for the concurrence/energy comparisons
TRAJECTORY_PRESETS = {
    "fig2a": (ModelSpec.tc(1.0, 0.2), 10.0, "h0"),
    "fig2b": (ModelSpec.tc(1.0, 1.4), 10.0, "h0"),
    "fig2c": (ModelSpec.tc(0.5, math.pi / 4), 10.0, "h0"),
    "fig2d": (ModelSpec.tc(0.5, math.pi / 8), 10.0, "h0"),
    "fig5a": (ModelSpec.ising(0.5, math.pi / 4, 1.0), 10.0, "hI"),
    "fig5b": (ModelSpec.ising(1.0, math.pi / 4, 1.0), 10.0, "hI"),
}
