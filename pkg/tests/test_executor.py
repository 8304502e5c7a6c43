from math import pi, sqrt

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import make_wave, smooth_velocity
from fdops.executor import (HaloAccessError, InstabilityError, PointSource, WaveProblem,
                            allocate, cfl_dt, damp_mask, default_damp_max, dump_snapshot,
                            load_snapshot, ricker_wavelet, run)
from fdops.pipeline import Bound, ExprStatement, SpaceLoop, TimeLoop
from fdops.symbolic import Grid, GridFunction, fd_coefficients


def test_zero_source_keeps_field_zero():
    g = Grid((12, 12, 12), (10.0,) * 3)
    p = WaveProblem(g, 1500.0, 20, PointSource((6, 6, 6), np.zeros(20)))
    for level in ("basic", "aggressive"):
        res = p.run(p.compile(level).iet)
        assert not np.any(res.fields["u"].data)
        assert max(res.max_abs) == 0.0


def test_1d_impulse_spreads_symmetrically():
    n, x0 = 61, 30
    g = Grid((n,), (10.0,))
    w = np.zeros(120)
    w[0] = 1.0
    p = WaveProblem(g, 1500.0, 120, PointSource((x0,), w), space_order=4)
    h = p.space_order // 2
    seen = []

    def check(step, fields):
        u = fields["u"].interior((step + 1) % 3)
        left = u[x0 - 1::-1][: x0 - h]
        right = u[x0 + 1:][: x0 - h]
        seen.append(np.max(np.abs(u)))
        assert np.max(np.abs(left - right)) <= 1e-6 * max(np.max(np.abs(u)), 1e-30)

    p.run(p.compile("aggressive").iet, callback=check)
    assert len(seen) == 120 and seen[-1] > 0


@pytest.mark.parametrize("so", [2, 8])
def test_basic_and_aggressive_agree(so):
    shape = (16, 16, 16)
    p = make_wave(shape, 50, so, velocity=smooth_velocity(shape, so), damp_width=3)
    a = p.run(p.compile("basic").iet).final()
    b = p.run(p.compile("aggressive").iet).final()
    assert np.max(np.abs(a - b)) / np.max(np.abs(a)) < 1e-5


def test_runs_are_deterministic():
    p = make_wave((12, 12, 12), 20, 4, velocity=smooth_velocity((12, 12, 12), 1))
    iet = p.compile("aggressive").iet
    a, b = p.run(iet), p.run(iet)
    assert np.array_equal(a.fields["u"].data, b.fields["u"].data)
    assert a.max_abs == b.max_abs


# -- wavelet and time step -----------------------------------------------------------

def test_ricker_peaks_at_its_centre():
    w = ricker_wavelet(10.0, 1e-3, 300)
    assert w[100] == pytest.approx(1.0)
    assert np.argmax(w) == 100
    assert np.max(np.abs(w)) == pytest.approx(1.0)


def test_ricker_has_zero_mean():
    dt = 1e-3
    w = ricker_wavelet(10.0, dt, 300)
    assert abs(np.sum(w) * dt) < 1e-3 * np.max(np.abs(w))


def test_ricker_zero_crossings():
    f, dt = 10.0, 1e-3
    w = ricker_wavelet(f, dt, 300)
    t = np.arange(300) * dt
    crossings = [t[i] + dt / 2 for i in np.nonzero(np.diff(np.sign(w)))[0]]
    tau = 1 / (pi * f * sqrt(2))
    assert tau == pytest.approx(0.0225, abs=1e-4)
    assert len(crossings) == 2
    for c, expected in zip(crossings, (0.1 - tau, 0.1 + tau)):
        assert abs(c - expected) <= dt


def test_ricker_rejects_bad_frequency():
    with pytest.raises(ValueError):
        ricker_wavelet(0.0, 1e-3, 10)


@pytest.mark.parametrize("ndim, expected", [(1, 0.9), (2, 0.9 / sqrt(2)), (3, 0.5196)])
def test_cfl_reference_values(ndim, expected):
    p = WaveProblem(Grid((8,) * ndim, (1.0,) * ndim), 1.0, 1)
    assert cfl_dt(p) == pytest.approx(expected, abs=1e-4)


@given(c=st.floats(0.1, 5000.0), h=st.floats(0.1, 50.0), so=st.sampled_from([2, 4, 8, 16]))
@settings(deadline=None)
def test_cfl_scales_inversely_with_velocity(c, h, so):
    g = Grid((20, 20), (h, h))
    dt1 = cfl_dt(WaveProblem(g, c, 1, space_order=so))
    dt2 = cfl_dt(WaveProblem(g, 2 * c, 1, space_order=so))
    assert dt2 == pytest.approx(dt1 / 2, rel=1e-12)


def test_cfl_shrinks_with_space_order():
    g = Grid((40, 40, 40), (1.0,) * 3)
    dts = [cfl_dt(WaveProblem(g, 1.0, 1, space_order=so)) for so in (2, 4, 8, 16)]
    assert dts == sorted(dts, reverse=True)


# -- physics ---------------------------------------------------------------------------------

def _laplacian(u, so, spacing):
    """Same stencil as the compiler, applied with numpy (zero outside the array)."""
    out = np.zeros_like(u, dtype=np.float64)
    pad = so // 2
    up = np.pad(u.astype(np.float64), pad)
    for axis, h in enumerate(spacing):
        for off, c in fd_coefficients(2, so):
            sl = [slice(pad, pad + n) for n in u.shape]
            sl[axis] = slice(pad + off, pad + off + u.shape[axis])
            out += float(c) / h ** 2 * up[tuple(sl)]
    return out


def _energy_trace(problem, level="basic"):
    """Leapfrog-invariant discrete energy after every step."""
    m = np.broadcast_to(problem.m, problem.grid.shape)
    so, spacing, dt = problem.space_order, problem.grid.spacing, problem.dt
    energies = []

    def record(step, fields):
        f = fields["u"]
        new = f.interior((step + 1) % 3).astype(np.float64)
        old = f.interior(step % 3).astype(np.float64)
        kinetic = np.sum(m * ((new - old) / dt) ** 2)
        potential = -np.sum(new * _laplacian(old, so, spacing))
        energies.append(kinetic + potential)

    problem.run(problem.compile(level).iet, callback=record)
    return np.array(energies)


@pytest.mark.parametrize("so", [2, 4])
def test_discrete_energy_conserved_without_damping(so):
    shape, steps, quiet = (48, 48), 260, 60
    g = Grid(shape, (10.0, 10.0))
    c = smooth_velocity(shape, 7)
    probe = WaveProblem(g, c, steps, space_order=so)
    w = ricker_wavelet(25.0, probe.dt, steps)
    w[quiet:] = 0.0
    p = WaveProblem(g, c, steps, PointSource((24, 24), w), probe.dt, None, so)
    e = _energy_trace(p)[quiet:]
    assert e[0] > 0
    assert np.max(np.abs(e - e[0])) / e[0] < 0.01


def test_damping_ring_dissipates_energy():
    shape, steps, quiet = (48, 48), 400, 60
    g = Grid(shape, (10.0, 10.0))
    probe = WaveProblem(g, 1500.0, steps)
    w = ricker_wavelet(25.0, probe.dt, steps)
    w[quiet:] = 0.0
    damp = damp_mask(g, 1, 10, default_damp_max(1500.0, g, 10))
    p = WaveProblem(g, 1500.0, steps, PointSource((24, 24), w), probe.dt, damp)
    e = _energy_trace(p, "aggressive")[quiet:]
    windows = e[: len(e) // 10 * 10].reshape(-1, 10).mean(axis=1)
    assert np.all(np.diff(windows) <= 1e-6 * windows[0])
    assert windows[-1] < 0.2 * windows[0]


def test_damp_mask_profile():
    g = Grid((20, 20))
    d = damp_mask(g, 2, 5, 1.0)
    assert d[10, 10] == 0.0
    assert d[2, 10] == pytest.approx(1.0)
    assert d[4, 10] == pytest.approx(0.6)
    assert np.all(d >= 0) and np.all(d <= 1.0)
    assert np.array_equal(d, d.T)


# -- failure modes ---------------------------------------------------------------------------

def test_halo_overrun_is_detected():
    g = Grid((10,))
    u = GridFunction("u", g, space_order=2, time_order=2)
    x = g.dimensions[0]
    bad = ExprStatement((), ((u.forward, u.indexed().shifted(x, -2)),))
    iet = TimeLoop(g.time_dim, 1, 3, (SpaceLoop(Bound(x, 0, 9), (bad,)),), g)
    with pytest.raises(HaloAccessError):
        run(iet)


def test_instability_reports_step():
    g = Grid((16, 16), (10.0, 10.0))
    probe = WaveProblem(g, 1500.0, 1)
    p = WaveProblem(g, 1500.0, 2000, PointSource((8, 8), np.ones(2000)), 3 * probe.dt)
    with pytest.raises(InstabilityError) as err:
        p.run(p.compile("basic").iet)
    assert 0 < err.value.step < 2000
    assert str(err.value.step) in str(err.value)


def test_level_mismatch_is_rejected():
    g = Grid((8,))
    u = GridFunction("u", g, time_order=2)
    x = g.dimensions[0]
    st_ = ExprStatement((), ((u.forward, u.indexed()),))
    iet = TimeLoop(g.time_dim, 1, 4, (SpaceLoop(Bound(x, 1, 6), (st_,)),), g)
    with pytest.raises(ValueError, match="time levels"):
        run(iet)


@pytest.mark.parametrize("kwargs", [dict(steps=0), dict(velocity=-1.0), dict(dt=-1.0),
                                    dict(source=PointSource((0, 0), np.zeros(3)))])
def test_problem_validation(kwargs):
    base = dict(grid=Grid((10, 10)), velocity=1.0, steps=3)
    base.update(kwargs)
    with pytest.raises(ValueError):
        WaveProblem(**base)


# -- storage ----------------------------------------------------------------------------------

def test_allocate_pads_invariant_fields_by_edge_value():
    g = Grid((4, 3))
    m = GridFunction("m", g, space_order=4)
    f = allocate(m, np.arange(12.0).reshape(4, 3))
    assert f.data.shape == (8, 7)
    assert f.data[0, 0] == 0.0 and f.data[-1, -1] == 11.0
    assert np.array_equal(f.interior(), np.arange(12.0).reshape(4, 3))
    u = GridFunction("u", g, time_order=2)
    assert allocate(u).data.shape == (3, 6, 5)
    with pytest.raises(ValueError):
        allocate(u, np.ones((4, 3)))


def test_snapshot_round_trip(tmp_path):
    arr = np.random.default_rng(0).normal(size=(5, 4, 3)).astype(np.float32)
    path = dump_snapshot(tmp_path / "snap" / "u_000010", arr, (10.0, 12.5, 15.0), 10)
    assert path.suffix == ".bin" and path.stat().st_size == arr.nbytes
    data, spacing, step = load_snapshot(tmp_path / "snap" / "u_000010")
    assert np.array_equal(data, arr)
    assert spacing == (10.0, 12.5, 15.0) and step == 10
