"""Initial conditions, exact solutions and error measures of the benchmark cases."""

import numpy as np
import pytest
from scipy.integrate import quad

from uweno.cases import (CASES, DMR_POST, DMR_PRE, LAX, SOD, ExactRiemann, convergence_orders,
                         dmr_shock_x, error_norms, exact_density_perturbation,
                         exact_isentropic_vortex, exact_riemann_1d, get_case, ic_density_perturbation,
                         ic_dmr, ic_isentropic_vortex, ic_lax, ic_shock_vortex, ic_shu_osher, ic_sod,
                         line_cut, normal_shock_downstream)
from uweno.euler import prim_to_cons
from uweno.geometry import cell_average
from uweno.mesh import generate_mesh

G = 1.4


def _flux1d(rho, u, p):
    E = p / (G - 1.0) + 0.5 * rho * u * u
    return np.array([rho * u, rho * u * u + p, (E + p) * u])


def _cons1d(rho, u, p):
    return np.array([rho, rho * u, p / (G - 1.0) + 0.5 * rho * u * u])


def test_density_perturbation_values():
    assert ic_density_perturbation(0.0, 0.0)[0] == pytest.approx(1.0, abs=1e-15)
    assert ic_density_perturbation(0.5, 0.0)[0] == pytest.approx(1.2, abs=1e-15)
    np.testing.assert_allclose(ic_density_perturbation(0.3, 0.7)[1:], [1.0, 1.0, 1.0])
    x, y = np.random.default_rng(0).uniform(0, 2, (2, 50))
    np.testing.assert_allclose(exact_density_perturbation(x, y, 0.37),
                               ic_density_perturbation(x - 0.37, y - 0.37))


def test_vortex_centre_and_far_field():
    q = ic_isentropic_vortex(5.0, 5.0)
    dT = -(G - 1.0) * 25.0 / (8.0 * G * np.pi ** 2) * np.e
    assert q[1] == pytest.approx(1.0) and q[2] == pytest.approx(1.0)
    assert q[3] / q[0] == pytest.approx(1.0 + dT, rel=1e-14)
    far = ic_isentropic_vortex(0.0, 0.0)
    np.testing.assert_allclose(far, [1.0, 1.0, 1.0, 1.0], atol=1e-5)


def test_vortex_isentropic():
    x, y = np.meshgrid(np.linspace(0, 10, 200), np.linspace(0, 10, 200))
    q = ic_isentropic_vortex(x, y)
    np.testing.assert_allclose(q[..., 3] / q[..., 0] ** G, 1.0, atol=1e-12)


def test_vortex_swirl_strength():
    # circumferential speed eps/(2 pi) r exp(0.5(1 - r^2)) peaks at r = 1
    r = np.linspace(0.1, 4.0, 400)
    q = ic_isentropic_vortex(5.0 + r, 5.0)
    swirl = q[:, 2] - 1.0
    np.testing.assert_allclose(swirl, 5.0 / (2 * np.pi) * r * np.exp(0.5 * (1 - r * r)), rtol=1e-13)
    assert r[np.argmax(swirl)] == pytest.approx(1.0, abs=0.01)


def test_vortex_exact_periodic():
    x, y = np.random.default_rng(1).uniform(0, 10, (2, 100))
    np.testing.assert_allclose(exact_isentropic_vortex(x, y, 10.0), ic_isentropic_vortex(x, y),
                               atol=1e-12)
    np.testing.assert_allclose(exact_isentropic_vortex(x, y, 2.0),
                               ic_isentropic_vortex(x - 2.0, y - 2.0, period=10.0), atol=1e-12)


@pytest.mark.parametrize("ic,left,right", [(ic_sod, SOD[0], SOD[1]), (ic_lax, LAX[0], LAX[1])])
def test_riemann_ic_membership(ic, left, right):
    for x, st in ((0.25, left), (0.5, right), (0.75, right)):
        q = ic(x, 0.2)
        np.testing.assert_allclose(q, [st[0], st[1], 0.0, st[2]])


def test_shu_osher_states():
    np.testing.assert_allclose(ic_shu_osher(0.5, 0.1), [3.857134, 2.629369, 0.0, 10.33333])
    np.testing.assert_allclose(ic_shu_osher(1.5, 0.1), [1 + 0.2 * np.sin(7.5), 0.0, 0.0, 1.0])
    np.testing.assert_allclose(ic_shu_osher(9.0, 0.1), [1 + 0.2 * np.sin(45.0), 0.0, 0.0, 1.0])


def test_normal_shock_relations():
    rho1, u1, p1 = 1.21, np.sqrt(G), 1.0
    rho2, u2, p2 = normal_shock_downstream(rho1, u1, p1)
    np.testing.assert_allclose(_flux1d(rho2, u2, p2), _flux1d(rho1, u1, p1), rtol=1e-13)
    assert rho2 > rho1 and p2 > p1
    # downstream Mach number from the textbook relation
    m1 = u1 / np.sqrt(G * p1 / rho1)
    m2 = np.sqrt((1 + 0.5 * (G - 1) * m1 ** 2) / (G * m1 ** 2 - 0.5 * (G - 1)))
    assert u2 / np.sqrt(G * p2 / rho2) == pytest.approx(m2, rel=1e-13)


def test_shock_vortex_states():
    far = ic_shock_vortex(0.05, 0.95)
    np.testing.assert_allclose(far, [1.21, np.sqrt(G), 0.0, 1.0], atol=1e-4)
    rho2, u2, p2 = normal_shock_downstream(1.21, np.sqrt(G), 1.0)
    np.testing.assert_allclose(ic_shock_vortex(0.75, 0.5), [rho2, u2, 0.0, p2])
    # at r = r_c the swirl equals kappa: point to the right of the centre moves in -y
    q = ic_shock_vortex(0.30, 0.5)
    assert q[1] == pytest.approx(np.sqrt(G), abs=1e-14)
    assert q[2] == pytest.approx(-0.3, rel=1e-14)
    # entropy of the vortex matches the base flow
    x, y = np.meshgrid(np.linspace(0.1, 0.45, 60), np.linspace(0.3, 0.7, 60))
    q = ic_shock_vortex(x, y)
    np.testing.assert_allclose(q[..., 3] / q[..., 0] ** G, 1.0 / 1.21 ** G, rtol=1e-12)


def test_dmr_ic():
    assert dmr_shock_x(0.0, 0.0) == pytest.approx(1.0 / 6.0)
    # the front makes a 60 degree angle with the x axis
    slope = 1.0 / (dmr_shock_x(1.0, 0.0) - dmr_shock_x(0.0, 0.0))
    assert np.degrees(np.arctan(slope)) == pytest.approx(60.0)
    np.testing.assert_allclose(ic_dmr(0.1, 0.0), DMR_POST)
    np.testing.assert_allclose(ic_dmr(0.2, 0.0), DMR_PRE)
    np.testing.assert_allclose(ic_dmr(0.5, 0.8), DMR_POST)
    np.testing.assert_allclose(ic_dmr(1.0, 0.8), DMR_PRE)
    # shock speed 10 times the pre-shock sound speed, normal to the front
    assert 20.0 / np.sqrt(3.0) * np.sin(np.pi / 3) == pytest.approx(10.0)


@pytest.mark.parametrize("name", sorted(CASES))
def test_ic_physical_everywhere(name):
    case = CASES[name]
    x0, x1, y0, y1 = case.domain
    x, y = np.meshgrid(np.linspace(x0, x1, 400), np.linspace(y0, y1, 400))
    q = case.ic(x, y)
    assert np.all(q[..., 0] > 0) and np.all(q[..., 3] > 0)
    assert np.all(np.isfinite(q))


def test_get_case():
    assert get_case("sod").end_time == 0.2
    assert get_case("lax").end_time == 0.16
    with pytest.raises(ValueError):
        get_case("nope")
    c = get_case("advection").with_overrides(h=0.5)
    assert c.cells_per_side() == (4, 4)
    assert get_case("advection").h == 1.0 / 16


# --------------------------------------------------------------------------- exact Riemann

def test_riemann_constant_state():
    out = exact_riemann_1d((1.0, 0.3, 2.0), (1.0, 0.3, 2.0), np.linspace(-3, 3, 13))
    np.testing.assert_allclose(out, np.tile([1.0, 0.3, 2.0], (13, 1)), rtol=1e-12)


def test_riemann_vacuum_rejected():
    with pytest.raises(ValueError):
        ExactRiemann((1.0, -10.0, 0.1), (1.0, 10.0, 0.1))
    with pytest.raises(ValueError):
        ExactRiemann((1.0, 0.0, -1.0), (1.0, 0.0, 1.0))


def test_sod_star_state():
    # star state of the Sod problem, reference values to 5 digits
    rs = ExactRiemann(SOD[0], SOD[1])
    assert rs.p_star == pytest.approx(0.30313, abs=1e-5)
    assert rs.u_star == pytest.approx(0.92745, abs=1e-5)
    rsl, rsr = rs.star_densities()
    assert rsl == pytest.approx(0.42632, abs=1e-5)
    assert rsr == pytest.approx(0.26557, abs=1e-5)
    np.testing.assert_allclose(rs.sample(0.5)[0], [rsl, rs.u_star, rs.p_star])


def _wave_points(rs, t, x0):
    g = rs.gamma
    pts = [rs.u_star]
    for sgn, pk, ck, uk, sp in ((-1, rs.pl, rs.cl, rs.ul, rs.shock_speeds()[0]),
                                (1, rs.pr, rs.cr, rs.ur, rs.shock_speeds()[1])):
        if sp is not None:
            pts.append(sp)
        else:
            cs = ck * (rs.p_star / pk) ** ((g - 1) / (2 * g))
            pts += [uk + sgn * ck, rs.u_star + sgn * cs]
    return sorted(x0 + t * s for s in pts)


@pytest.mark.parametrize("states", [SOD, LAX])
def test_riemann_integral_conservation(states):
    left, right = states
    rs = ExactRiemann(left, right)
    t, x0 = 0.15, 0.5
    pts = _wave_points(rs, t, x0)
    assert 0.0 < pts[0] and pts[-1] < 1.0
    for k in range(3):
        def integrand(x):
            return _cons1d(*rs.sample((x - x0) / t)[0])[k]
        num = quad(integrand, 0.0, 1.0, points=pts, limit=200, epsabs=1e-13, epsrel=1e-13)[0]
        ref = x0 * _cons1d(*left)[k] + (1 - x0) * _cons1d(*right)[k] \
            + t * (_flux1d(*left)[k] - _flux1d(*right)[k])
        assert num == pytest.approx(ref, abs=1e-8)


@pytest.mark.parametrize("states", [SOD, LAX])
def test_riemann_rankine_hugoniot(states):
    rs = ExactRiemann(*states)
    rsl, rsr = rs.star_densities()
    for k, (sp, outer, star) in enumerate(zip(
            rs.shock_speeds(),
            ((rs.rl, rs.ul, rs.pl), (rs.rr, rs.ur, rs.pr)),
            ((rsl, rs.u_star, rs.p_star), (rsr, rs.u_star, rs.p_star)))):
        if sp is None:
            continue
        jump = (_flux1d(*star) - _flux1d(*outer)) - sp * (_cons1d(*star) - _cons1d(*outer))
        assert np.abs(jump).max() < 1e-10


def test_riemann_pure_shock():
    # build a right-moving shock of speed S into gas at rest
    rho1, p1, S = 1.0, 1.0, 2.0
    rho2, w2, p2 = normal_shock_downstream(rho1, S, p1)
    u2 = S - w2
    rs = ExactRiemann((rho2, u2, p2), (rho1, 0.0, p1))
    assert rs.p_star == pytest.approx(p2, rel=1e-10)
    assert rs.u_star == pytest.approx(u2, rel=1e-10)
    assert rs.shock_speeds()[1] == pytest.approx(S, rel=1e-10)
    xi = np.array([-1.0, 0.5 * u2, S - 1e-6, S + 1e-6, 3.0])
    out = rs.sample(xi)
    np.testing.assert_allclose(out[:3], np.tile([rho2, u2, p2], (3, 1)), rtol=1e-9)
    np.testing.assert_allclose(out[3:], np.tile([rho1, 0.0, p1], (2, 1)), rtol=1e-9, atol=1e-12)


# --------------------------------------------------------------------------- diagnostics

def test_error_norms_exact_and_offset():
    m = generate_mesh("perturbed-tri", 10, 10, (0.0, 2.0, 0.0, 2.0), seed=2)
    W = prim_to_cons(cell_average(m, ic_density_perturbation))
    l1, linf = error_norms(m, W, exact_density_perturbation, 0.0)
    assert l1 < 1e-13 and linf < 1e-13
    W2 = W.copy()
    W2[:, 0] += 0.01
    l1, linf = error_norms(m, W2, exact_density_perturbation, 0.0)
    assert l1 == pytest.approx(0.01, rel=1e-10)
    assert linf == pytest.approx(0.01, rel=1e-10)


def test_convergence_orders():
    o = convergence_orders([1.0, 0.125, 1.0 / 64])
    assert np.isnan(o[0])
    np.testing.assert_allclose(o[1:], [3.0, 3.0])


def test_line_cut():
    m = generate_mesh("regular-quad", 10, 4, (0.0, 1.0, 0.0, 0.5))
    W = prim_to_cons(cell_average(m, ic_sod))
    x, prim = line_cut(m, W)
    assert len(x) == 10
    assert np.all(np.diff(x) > 0)
    np.testing.assert_allclose(x, (np.arange(10) + 0.5) / 10)
    np.testing.assert_allclose(prim[:5, 0], 1.0)
    np.testing.assert_allclose(prim[5:, 0], 0.125)
    mt = generate_mesh("regular-tri", 10, 4, (0.0, 1.0, 0.0, 0.5))
    xt, _ = line_cut(mt, prim_to_cons(cell_average(mt, ic_sod)))
    assert len(xt) >= 10 and np.all(np.diff(xt) >= 0)
