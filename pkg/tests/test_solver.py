"""Residual assembly, boundary handling and time stepping."""

import numpy as np
import pytest

from uweno.cases import get_case
from uweno.euler import prim_to_cons
from uweno.errors import SolverAbort
from uweno.geometry import cell_average
from uweno.mesh import generate_mesh
from uweno.solver import (OUTFLOW, REFLECTIVE, BoundaryCondition, Solver, SolverState,
                          TimeControls, _resolve_bcs)

KINDS = ("regular-quad", "perturbed-quad", "regular-tri", "perturbed-tri")


def _uniform(mesh, prim=(1.2, 0.7, -0.4, 0.9)):
    return np.tile(prim_to_cons(np.array(prim)), (mesh.n_cells, 1))


def _smooth(x, y):
    rho = 1.0 + 0.2 * np.sin(np.pi * x) * np.cos(np.pi * y)
    return np.stack(np.broadcast_arrays(rho, 0.5 + 0.1 * np.cos(np.pi * y), 0.3 * np.sin(np.pi * x),
                                        1.0 + 0.1 * np.sin(np.pi * (x + y))), axis=-1)


@pytest.mark.parametrize("kind", KINDS)
def test_free_stream_preserved(kind, periodic_meshes):
    m = periodic_meshes[kind]
    s = Solver(m)
    W0 = _uniform(m)
    np.testing.assert_allclose(s.residual(W0), 0.0, atol=1e-12)
    state = SolverState(W0.copy())
    for _ in range(100):
        s.rk3_step(state, 0.02)
    np.testing.assert_allclose(state.W, W0, rtol=0, atol=1e-12)


@pytest.mark.parametrize("kind", KINDS)
@pytest.mark.parametrize("characteristic", [True, False])
def test_periodic_conservation(kind, characteristic, periodic_meshes):
    m = periodic_meshes[kind]
    s = Solver(m, characteristic=characteristic)
    W = prim_to_cons(cell_average(m, _smooth))
    r = s.residual(W)
    assert np.all(np.abs(m.area @ r) <= 1e-11)
    total = m.area @ W
    state = SolverState(W)
    for _ in range(3):
        s.rk3_step(state, 0.02)
    np.testing.assert_allclose(m.area @ state.W, total, rtol=0, atol=1e-10 * np.abs(total).max())


def test_reflective_wall_symmetry():
    m = generate_mesh("regular-quad", 12, 12)
    bcs = {"left": OUTFLOW, "right": OUTFLOW, "bottom": REFLECTIVE, "top": REFLECTIVE}
    s = Solver(m, bcs)

    def field(x, y):
        r2 = (x - 0.4) ** 2 + (y - 0.5) ** 2
        rho = 1.0 + 0.5 * np.exp(-20 * r2)
        return np.stack(np.broadcast_arrays(rho, 0.3, 0.2 * (y - 0.5), 1.0 + 0.4 * np.exp(-20 * r2)),
                        axis=-1)

    key = {tuple(np.round(c, 9)): i for i, c in enumerate(m.centroid)}
    mirror = np.array([key[(round(c[0], 9), round(1.0 - c[1], 9))] for c in m.centroid])
    flip = np.array([1.0, 1.0, -1.0, 1.0])
    # the cell quadrature splits quads along one diagonal, so symmetrise the averages
    W = prim_to_cons(cell_average(m, field))
    state = SolverState(0.5 * (W + W[mirror] * flip))
    for _ in range(10):
        s.rk3_step(state, 0.01)
    W = state.W
    np.testing.assert_allclose(W[mirror] * flip, W, rtol=0, atol=1e-10)


def test_rk3_zero_residual_is_identity(periodic_meshes, monkeypatch):
    m = periodic_meshes["perturbed-quad"]
    s = Solver(m)
    monkeypatch.setattr(s, "residual", lambda W, t=0.0: np.zeros_like(W))
    W = prim_to_cons(cell_average(m, _smooth))
    state = SolverState(W.copy())
    s.rk3_step(state, 0.1)
    np.testing.assert_allclose(state.W, W, rtol=1e-15, atol=0)
    assert state.step == 1 and state.time == 0.1


def test_rk3_linear_surrogate_order(periodic_meshes, monkeypatch):
    m = periodic_meshes["regular-quad"]
    s = Solver(m)
    lam = -0.7
    monkeypatch.setattr(s, "residual", lambda W, t=0.0: lam * W)
    W0 = _uniform(m)
    errs = []
    for dt in (0.2, 0.1, 0.05):
        state = SolverState(W0.copy())
        s.rk3_step(state, dt)
        errs.append(np.abs(state.W - W0 * np.exp(lam * dt)).max())
    # local error O(dt^4): halving dt divides it by ~16
    ratios = np.array(errs[:-1]) / np.array(errs[1:])
    assert np.all((ratios > 14.0) & (ratios < 18.0))


def test_rk3_rejects_nonpositive_dt(periodic_meshes):
    s = Solver(periodic_meshes["regular-quad"])
    with pytest.raises(ValueError):
        s.rk3_step(SolverState(_uniform(s.mesh)), 0.0)


def test_abort_reports_cell_time_stage(periodic_meshes, monkeypatch):
    m = periodic_meshes["regular-quad"]
    s = Solver(m)
    W = _uniform(m)

    def bad(W, t=0.0):
        r = np.zeros_like(W)
        r[5, 0] = -1e3
        return r
    monkeypatch.setattr(s, "residual", bad)
    with pytest.raises(SolverAbort) as info:
        s.rk3_step(SolverState(W, time=0.25), 0.1)
    assert info.value.cell == 5
    assert info.value.stage == 1
    assert info.value.time == 0.25


def test_run_rejects_unphysical_initial_state(periodic_meshes):
    m = periodic_meshes["regular-quad"]
    W = _uniform(m)
    W[3, 0] = -1.0
    with pytest.raises(SolverAbort):
        Solver(m).run(SolverState(W), TimeControls(0.1))


def test_dt_accuracy_mode():
    m = generate_mesh("regular-quad", 16, 16)
    assert m.h == pytest.approx(1.0 / 16)
    dt = Solver(m, {t: OUTFLOW for t in m.tag_names}).compute_dt(
        SolverState(_uniform(m)), TimeControls(1.0, "accuracy", 0.3))
    assert dt == pytest.approx(0.01875, rel=1e-14)


def test_dt_cfl_stationary_unit_cells():
    m = generate_mesh("regular-quad", 3, 3, (0.0, 3.0, 0.0, 3.0))
    s = Solver(m, {t: OUTFLOW for t in m.tag_names})
    W = _uniform(m, (1.0, 0.0, 0.0, 1.0))
    dt = s.compute_dt(SolverState(W), TimeControls(10.0, "cfl", 0.3))
    assert dt == pytest.approx(0.3 * 0.25 / np.sqrt(1.4), rel=1e-12)


def test_dt_clipped_to_end_time():
    m = generate_mesh("regular-quad", 4, 4)
    s = Solver(m, {t: OUTFLOW for t in m.tag_names})
    state = SolverState(_uniform(m), time=0.995)
    assert s.compute_dt(state, TimeControls(1.0, "accuracy", 0.3)) == pytest.approx(0.005)
    state.time = 0.0
    s.run(state, TimeControls(0.1, "cfl", 0.3))
    assert state.time == pytest.approx(0.1, abs=1e-14)


def test_time_controls_validation():
    with pytest.raises(ValueError):
        TimeControls(1.0, "cfl", 1.5)
    with pytest.raises(ValueError):
        TimeControls(1.0, "fixed", 0.3)
    with pytest.raises(ValueError):
        TimeControls(-1.0)
    TimeControls(1.0, "accuracy", 1.5)


def test_boundary_condition_resolution():
    m = generate_mesh("regular-quad", 4, 4)
    inflow = BoundaryCondition("prescribed", (1.0, 2.0, 0.0, 1.0))
    bcs = {"left": inflow, "right": OUTFLOW, "top": REFLECTIVE,
           "bottom": lambda mids: [inflow if x < 0.5 else REFLECTIVE for x in mids[:, 0]]}
    kind, state = _resolve_bcs(m, bcs)
    bnd = m.boundary_faces
    mids = m.face_midpoints()
    assert np.all(kind[bnd] >= 0)
    left = bnd[np.isclose(mids[bnd, 0], 0.0)]
    np.testing.assert_allclose(state[left], np.tile(prim_to_cons(np.array(inflow.state)),
                                                    (len(left), 1)))
    bottom = bnd[np.isclose(mids[bnd, 1], 0.0)]
    assert len(set(kind[bottom])) == 2
    with pytest.raises(ValueError):
        _resolve_bcs(m, {"left": OUTFLOW})
    with pytest.raises(ValueError):
        BoundaryCondition("periodic-ish")
    with pytest.raises(ValueError):
        BoundaryCondition("prescribed")


def test_solver_parameter_validation(periodic_meshes):
    m = periodic_meshes["regular-quad"]
    with pytest.raises(ValueError):
        Solver(m, theta=1.0)
    with pytest.raises(ValueError):
        Solver(m, epsilon=0.0)


def test_thread_count_does_not_change_residual(periodic_meshes):
    import numba
    from uweno.solver import set_threads
    m = periodic_meshes["perturbed-tri"]
    s = Solver(m)
    W = prim_to_cons(cell_average(m, _smooth))
    r1 = s.residual(W)
    set_threads(1)
    r2 = s.residual(W)
    set_threads(numba.config.NUMBA_NUM_THREADS)
    assert np.array_equal(r1, r2)


def _advection_residual_error(kind, n, eps):
    c = get_case("advection")
    m = c.make_mesh(kind, h=1.0 / n)
    s = Solver(m, c.bcs, epsilon=eps)
    W = c.initial_state(m)
    # exact flux divergence for rho = 1 + 0.2 sin(pi (x + y)), u = v = p = 1
    ex = cell_average(m, lambda x, y: (-0.4 * np.pi * np.cos(np.pi * (x + y)))[..., None]
                      * np.ones(4))
    return np.abs(s.residual(W) - ex).max()


def test_residual_third_order_with_linear_weights():
    # a huge epsilon makes the nonlinear weights equal to the linear ones
    errs = np.array([_advection_residual_error("regular-quad", n, 1e6) for n in (8, 16, 32)])
    orders = np.log2(errs[:-1] / errs[1:])
    assert np.all(orders > 2.7)


def test_fallback_counted_on_strong_jump():
    m = generate_mesh("regular-quad", 10, 4, (0.0, 1.0, 0.0, 0.4))
    s = Solver(m, {t: OUTFLOW for t in m.tag_names}, characteristic=False)

    def field(x, y):
        left = x < 0.5
        return np.stack(np.broadcast_arrays(np.where(left, 1.0, 1e-3), 0.0, 0.0,
                                            np.where(left, 1.0, 1e-4)), axis=-1)

    W = prim_to_cons(cell_average(m, field))
    s.residual(W)
    assert s.metrics.point_evaluations == 2 * m.nverts.sum()
    smooth = Solver(m, {t: OUTFLOW for t in m.tag_names})
    smooth.residual(_uniform(m))
    assert smooth.metrics.fallback_points == 0
