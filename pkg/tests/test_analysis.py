import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from esdlab import analysis as A
from esdlab import entanglement as ent
from esdlab import models as M


def fake_traj(t, c, source="oracle"):
    t = np.asarray(t, dtype=float)
    c = np.asarray(c, dtype=float)
    n = len(t)
    model = A.ModelSpec.ising(1.0, 0.0, 1.0)
    states = np.tile(np.eye(4) / 4, (n, 1, 1)).astype(complex)
    z = np.zeros(n)
    return A.Trajectory(model, t, states, c, c, z, z, z, source)


# -- model selection and trajectories ---------------------------------------


def test_model_spec_validation():
    with pytest.raises(ValueError):
        A.ModelSpec("laser", M.IsingParams(), M.InitialStateFamily(1, 0))
    with pytest.raises(TypeError):
        A.ModelSpec("tc", M.IsingParams(), M.InitialStateFamily(1, 0))


def test_time_scales():
    assert A.ModelSpec.tc(1, 0, g=2.0).time_scale == 0.5
    assert A.ModelSpec.dephasing(1, 0, 0.5, omega=4.0).time_scale == 0.25
    assert A.ModelSpec.ising(1, 0, 1.0, omega=2.0).time_scale == 0.5


def test_unknown_source():
    with pytest.raises(ValueError):
        A.model_states(A.ModelSpec.ising(1, 0, 1), [0.0], "guess")


def test_trajectory_invariants():
    with pytest.raises(ValueError):
        fake_traj([0, 1, 1], [0, 0, 0])
    with pytest.raises(ValueError):
        A.Trajectory(A.ModelSpec.ising(1, 0, 1), np.array([0.0, 1.0]), np.zeros((1, 4, 4)),
                     *(np.zeros(2),) * 5, source="analytic")


def test_single_sample_at_initial_state():
    model = A.ModelSpec.ising(1.0, math.pi / 4, 1.0)
    traj = A.sample_trajectory(model, [0.0])
    assert len(traj) == 1
    assert traj.c_wootters[0] == pytest.approx(1.0, abs=1e-12)
    assert np.allclose(traj.states[0], M.build_initial_qubit_state(model.initial), atol=1e-15)
    assert traj.report(0).wootters == pytest.approx(traj.c_wootters[0], abs=1e-12)


def test_tc_analytic_vs_oracle_concurrence():
    model = A.ModelSpec.tc(1.0, 0.2)
    t = np.linspace(0, 15, 300)
    a = A.sample_trajectory(model, t, "analytic")
    o = A.sample_trajectory(model, t, "oracle")
    assert o.cutoff == 2
    assert np.max(np.abs(a.c_wootters - o.c_wootters)) <= 1e-8


def test_dephasing_stationary_concurrence():
    traj = A.sample_trajectory(A.ModelSpec.dephasing(1.0, math.pi / 4, 0.5), np.linspace(0, 12, 50))
    assert np.allclose(traj.c_wootters, 1.0, atol=1e-12)
    assert np.all(np.isnan(traj.e_hI))


def test_batched_matches_scalar():
    model = A.ModelSpec.ising(0.7, 0.5, 1.3)
    traj = A.sample_trajectory(model, np.linspace(0, 8, 33))
    for i in range(len(traj)):
        rep = ent.wootters_concurrence(traj.states[i])
        assert traj.c_wootters[i] == pytest.approx(rep.wootters, abs=1e-12)
        assert traj.c_paper[i] == pytest.approx(rep.paper_cutoff_form, abs=1e-15)
        assert traj.purity[i] == pytest.approx(ent.purity(traj.states[i]), abs=1e-14)
        assert traj.e_hI[i] == pytest.approx(ent.energy_hI_ising(traj.states[i], model.params.g), abs=1e-14)


def test_analytic_and_oracle_agree_all_models():
    cases = [A.ModelSpec.tc(0.5, 1.4), A.ModelSpec.dephasing(0.5, math.pi / 20, 1.0),
             A.ModelSpec.ising(0.5, math.pi / 4, 1.0)]
    t = np.linspace(0, 10, 101)
    for model in cases:
        src = "exact" if model.kind == "tc" else "analytic"
        a = A.sample_trajectory(model, t, src)
        o = A.sample_trajectory(model, t, "oracle")
        assert np.max(np.abs(a.c_wootters - o.c_wootters)) <= 1e-8


# -- dark periods -----------------------------------------------------------


def test_constant_zero_is_one_period():
    p = A.detect_dark_periods(fake_traj(np.linspace(0, 1, 11), np.zeros(11)))
    assert len(p) == 1
    assert (p[0].t_start, p[0].t_end, p[0].revived) == (0.0, 1.0, False)


def test_constant_positive_has_none():
    assert A.detect_dark_periods(fake_traj(np.linspace(0, 1, 11), np.full(11, 0.3))) == []


def test_touch_zero_excluded():
    c = np.array([0.5, 0.2, 0.0, 0.2, 0.5, 0.0, 0.0, 0.3])
    p = A.detect_dark_periods(fake_traj(np.arange(8.0), c))
    assert [(q.i_start, q.i_end, q.revived) for q in p] == [(5, 6, True)]


def test_min_width_validation():
    with pytest.raises(ValueError):
        A.detect_dark_periods(fake_traj([0, 1], [0, 0]), min_width=1)


def test_ising_mixed_state_death_and_revival():
    model = A.ModelSpec.ising(0.5, math.pi / 4, 1.0)
    traj = A.sample_trajectory(model, np.linspace(0, 10, 1001))
    periods = A.detect_dark_periods(traj)
    assert any(p.revived for p in periods)
    for p in periods:
        # refined edges: dark just inside, lit just outside (unless at the range edge)
        mid = 0.5 * (p.t_start + p.t_end)
        assert ent.concurrence(A.analytic_state(model, mid)) <= A.ZERO_TOL
        if p.t_start > 0:
            assert ent.concurrence(A.analytic_state(model, p.t_start - 1e-5)) > A.ZERO_TOL
        if p.t_end < 10:
            assert ent.concurrence(A.analytic_state(model, p.t_end + 1e-5)) > A.ZERO_TOL


def test_ising_eg_ge_family_has_no_death():
    model = A.ModelSpec.ising(0.5, math.pi / 4, 1.0, family=M.Family.EG_GE)
    traj = A.sample_trajectory(model, np.linspace(0, 10, 1001))
    assert A.detect_dark_periods(traj) == []


@settings(max_examples=60, deadline=None)
@given(st.lists(st.sampled_from([0.0, 0.0, 0.4, 1e-10, 0.9]), min_size=2, max_size=60))
def test_dark_periods_consistent_with_mask(values):
    c = np.array(values)
    t = np.arange(len(c), dtype=float)
    periods = A.detect_dark_periods(fake_traj(t, c))
    covered = np.zeros(len(c), dtype=bool)
    last_end = -1
    for p in periods:
        assert p.t_start <= p.t_end and p.i_start > last_end
        last_end = p.i_end
        covered[p.i_start:p.i_end + 1] = True
    mask = c <= A.ZERO_TOL
    for i0, i1 in A.dark_runs(c):
        assert covered[i0:i1 + 1].all()
    assert not np.any(covered & ~mask)


# -- extrema ----------------------------------------------------------------


def test_monotone_has_no_extrema():
    t = np.linspace(0, 1, 50)
    m = A.match_series(t, t, t ** 2)
    assert m.concurrence_extrema == [] and m.pairing == [] and m.complete


def test_parabolic_refinement():
    t = np.linspace(0, 2, 21)
    ex = A.find_extrema(t, -(t - 1.033) ** 2)
    assert len(ex) == 1 and ex[0].kind == "max"
    assert ex[0].time == pytest.approx(1.033, abs=1e-12)


def test_plateau_is_single_extremum():
    y = np.array([3, 2, 1, 0, 0, 0, 0, 1, 2, 3], dtype=float)
    ex = A.find_extrema(np.arange(10.0), y)
    assert len(ex) == 1 and ex[0].kind == "min" and ex[0].time == 4.5


def test_pairing_window_and_injectivity():
    E = A.Extremum
    a = [E(1.0, 0, "max"), E(1.1, 0, "min"), E(5.0, 0, "max")]
    b = [E(1.05, 0, "max"), E(7.0, 0, "min")]
    pairs, ua, ub = A.pair_extrema(a, b, 0.2)
    # equal offsets: the earlier pair wins
    assert [(i, j) for i, j, _ in pairs] == [(0, 0)]
    assert ua == [1, 2]
    assert ub == [1]
    assert all(abs(off) <= 0.2 for _, _, off in pairs)


@settings(max_examples=60, deadline=None)
@given(st.lists(st.floats(0, 10), max_size=12), st.lists(st.floats(0, 10), max_size=12))
def test_pairing_symmetric(ta, tb):
    a = [A.Extremum(x, 0.0, "max") for x in ta]
    b = [A.Extremum(x, 0.0, "min") for x in tb]
    pab, _, _ = A.pair_extrema(a, b, 0.2)
    pba, _, _ = A.pair_extrema(b, a, 0.2)
    assert {(i, j) for i, j, _ in pab} == {(j, i) for i, j, _ in pba}
    assert len({i for i, _, _ in pab}) == len(pab) == len({j for _, j, _ in pab})


def test_match_extrema_tc_pure_state():
    traj = A.sample_trajectory(A.ModelSpec.tc(1.0, 0.2), np.linspace(0, 12, 2401))
    m = A.match_extrema(traj, "h0", 0.2, t_max=10.0)
    assert m.complete and m.pairing


def test_match_extrema_rejects_missing_observable():
    traj = A.sample_trajectory(A.ModelSpec.tc(1.0, 0.2), np.linspace(0, 1, 10))
    with pytest.raises(ValueError):
        A.match_extrema(traj, "hI")
    with pytest.raises(ValueError):
        A.match_extrema(traj, "h2")


# -- sweeps -----------------------------------------------------------------


def test_single_row_sweep_equals_trajectory():
    t = np.linspace(0, 10, 40)
    grid = A.sweep(lambda r: A.ModelSpec.ising(r, math.pi / 4, 1.0), "r", [0.5], t)
    traj = A.sample_trajectory(A.ModelSpec.ising(0.5, math.pi / 4, 1.0), t)
    assert grid.values.shape == (1, 40)
    assert np.array_equal(grid.values[0], traj.c_wootters)


def test_sweep_independent_of_workers(monkeypatch):
    preset = A.SWEEP_PRESETS["fig4a"]
    monkeypatch.setenv("ESDLAB_THREADS", "1")
    a = preset.run(resolution=21)
    monkeypatch.setenv("ESDLAB_THREADS", "4")
    b = preset.run(resolution=21)
    assert np.array_equal(a.values, b.values)


@pytest.mark.parametrize("raw,expected", [("", 1), ("junk", 1), ("0", 1), ("1", 1)])
def test_worker_count(monkeypatch, raw, expected):
    monkeypatch.setenv("ESDLAB_THREADS", raw)
    assert A.worker_count() == expected


def test_sweep_rejects_unknown_variant():
    with pytest.raises(ValueError):
        A.sweep(lambda r: A.ModelSpec.ising(r, 0, 1), "r", [1.0], [0.0], variant="other")


def test_preset_parameters():
    p = A.SWEEP_PRESETS
    assert p["fig1a"].fixed == {"r": 1.0} and p["fig1b"].fixed == {"r": 0.5}
    assert p["fig3a"].fixed["theta"] == math.pi / 20 and p["fig3a"].fixed["Omega"] == 3.0
    assert min(p["fig3a"].y_values) > 0 and max(p["fig3a"].y_values) == 2.0
    assert p["fig4a"].sections == (0.35, 1.0, 0.5) and p["fig4a"].fixed["J"] == 1.0
    assert p["fig4b"].sections == (1.0, 0.5, 2.0) and p["fig4b"].fixed["r"] == 0.5
    assert all(len(v.y_values) == v.steps == 201 for v in p.values())


def test_dark_mask_derived_from_values():
    grid = A.SWEEP_PRESETS["fig1b"].run(resolution=15)
    assert np.array_equal(grid.dark_mask, grid.values <= grid.zero_tol)
    assert 0.0 < grid.dark_fraction < 1.0
