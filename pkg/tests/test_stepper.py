import numpy as np
import pytest

from lomac import NumericalAbort, SolverConfig, VlasovPoissonSolver, run
from lomac.lowrank import to_dense
from lomac.moments import moments


def small(name="weak_landau_1d", **kw):
    base = dict(benchmark=name, nx=8, nv=16, k=1, t_end=0.5)
    base.update(kw)
    return SolverConfig(**base)


def test_maxwellian_is_steady():
    res = run(small("maxwellian", t_end=1.0))
    solver = res.solver
    f0 = to_dense(solver.initialize().f)
    assert np.abs(to_dense(res.state.f) - f0).max() < 1e-12
    assert np.abs(res.state.field.E).max() < 1e-13
    assert res.state.f.rank <= 3


def test_maxwellian_diagnostics():
    res = run(SolverConfig(benchmark="maxwellian", nx=16, nv=64, k=2, t_end=0.1))
    d = res.series[0]
    assert np.isclose(d.mass, 4 * np.pi, rtol=1e-8)
    assert abs(d.momentum) < 1e-13
    assert np.isclose(d.kinetic_energy, 2 * np.pi, rtol=1e-7)
    assert d.field_energy < 1e-25


def test_zero_initial_condition_stays_zero():
    res = run(small("zero"))
    assert np.all(to_dense(res.state.f) == 0)
    assert all(r.mass == 0 and r.total_energy == 0 for r in res.series)


@pytest.mark.parametrize("name", ["weak_landau_1d", "strong_landau_1d", "bump_on_tail"])
@pytest.mark.parametrize("k", [1, 2])
def test_conservation_and_moment_consistency(name, k):
    cfg = small(name, k=k, perturb=0.1, seed=3, t_end=1.0, nx=12, nv=24)
    solver = VlasovPoissonSolver(cfg)
    dt, n = solver.time_step()
    st = solver.initialize()
    d0 = solver.diagnostics(st)
    for _ in range(min(n, 25)):
        st = solver.advance(st, dt)
        mom = moments(st.f, solver.ps.space)
        scale = np.abs(st.macro.rho).max()
        # kinetic moments of the corrected solution are the macro densities
        assert np.abs(mom.rho - st.macro.rho).max() < 1e-12 * scale
        assert np.abs(mom.J - st.macro.J).max() < 1e-12 * scale
        d = solver.diagnostics(st)
        assert abs(d.mass - d0.mass) < 1e-12 * d0.mass
        assert abs(d.momentum - d0.momentum) < 1e-12 * d0.mass
        assert abs(d.total_energy - d0.total_energy) < 1e-12 * d0.total_energy


def test_startup_then_multistep():
    solver = VlasovPoissonSolver(small())
    st = solver.initialize()
    with pytest.raises(ValueError):
        solver.step(st, 0.01)
    st = solver.startup(st, 0.01)
    assert st.steps == 2 and len(st.history) == 2 and np.isclose(st.t, 0.02)
    with pytest.raises(ValueError):
        solver.startup(st, 0.01)
    st = solver.step(st, 0.01)
    assert st.steps == 3


@pytest.mark.parametrize("dt", [0.0, -0.1])
def test_nonpositive_dt_rejected(dt):
    solver = VlasovPoissonSolver(small())
    st = solver.initialize()
    with pytest.raises(ValueError):
        solver.heun_step(st, dt)
    with pytest.raises(ValueError):
        solver.step(solver.startup(st, 0.01), dt)


def test_rank_cap_aborts():
    with pytest.raises(NumericalAbort, match="rank"):
        run(small("strong_landau_1d", eps=0.0, rank_cap=3))


def test_time_step_divides_t_end():
    solver = VlasovPoissonSolver(small(t_end=0.37))
    dt, n = solver.time_step()
    assert np.isclose(n * dt, 0.37)
    hmin = solver.ps.xmesh.h.min()
    assert dt <= solver.config.cfl * hmin / 6.0 + 1e-15
    dt2, n2 = VlasovPoissonSolver(small(dt=0.05, t_end=0.5)).time_step()
    assert n2 == 10 and np.isclose(dt2, 0.05)


def test_run_records_output_and_snapshots():
    res = run(small(output_every=4, snapshot_times=[0.0, 0.25]))
    n = round(0.5 / res.dt)
    assert len(res.series) == 1 + n // 4 + (n % 4 != 0)
    assert np.isclose(res.series[-1].t, 0.5)
    assert sorted(res.snapshots) == [0.0, 0.25]


def test_forced_error_small_and_exact_solution_used():
    res = run(SolverConfig(benchmark="forced_vp", nx=16, nv=32, k=2, t_end=0.2))
    last = res.series[-1]
    assert last.l2_error is not None and last.l2_error < 1e-2
    # without the manufactured source the solution departs from the exact one
    off = run(SolverConfig(benchmark="forced_vp", nx=16, nv=32, k=2, t_end=0.2, manufactured_source=False))
    assert off.series[-1].l2_error > 10 * last.l2_error


def test_landau_field_energy_decays():
    res = run(SolverConfig(benchmark="weak_landau_1d", nx=16, nv=32, k=2, t_end=5.0, output_every=10))
    fe = [r.field_energy for r in res.series]
    assert max(fe[len(fe) // 2:]) < 0.5 * fe[0]


def test_wrong_mode_rejected():
    with pytest.raises(ValueError):
        VlasovPoissonSolver(SolverConfig(benchmark="linear_advection_2d"))
