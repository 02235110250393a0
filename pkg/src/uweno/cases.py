"""Benchmark problems: initial data, boundary maps, exact solutions and error norms."""

from dataclasses import dataclass, field, replace
from typing import Callable, Optional

import numpy as np
from scipy.optimize import brentq

from .euler import GAMMA, cons_to_prim, prim_to_cons
from .geometry import cell_average
from .mesh import generate_mesh
from .solver import (DMR_EXACT, OUTFLOW, REFLECTIVE, BoundaryCondition, TimeControls)


def _prim(rho, u, v, p):
    rho, u, v, p = np.broadcast_arrays(*(np.asarray(a, dtype=float) for a in (rho, u, v, p)))
    return np.stack([rho, u, v, p], axis=-1)


# --------------------------------------------------------------------------- smooth cases

def ic_density_perturbation(x, y):
    return _prim(1.0 + 0.2 * np.sin(np.pi * (np.asarray(x) + y)), 1.0, 1.0, 1.0)


def exact_density_perturbation(x, y, t):
    return ic_density_perturbation(np.asarray(x) - t, np.asarray(y) - t)


def ic_isentropic_vortex(x, y, strength=5.0, center=(5.0, 5.0), gamma=GAMMA, period=None):
    """Isentropic vortex on a unit mean flow.

    With ``period`` the offsets from the centre are wrapped to the nearest
    periodic image.
    """
    xb = np.asarray(x, dtype=float) - center[0]
    yb = np.asarray(y, dtype=float) - center[1]
    if period is not None:
        xb = xb - period * np.round(xb / period)
        yb = yb - period * np.round(yb / period)
    r2 = xb * xb + yb * yb
    du = strength / (2.0 * np.pi) * np.exp(0.5 * (1.0 - r2))
    dT = -(gamma - 1.0) * strength ** 2 / (8.0 * gamma * np.pi ** 2) * np.exp(1.0 - r2)
    T = 1.0 + dT
    rho = T ** (1.0 / (gamma - 1.0))
    return _prim(rho, 1.0 - du * yb, 1.0 + du * xb, rho * T)


def exact_isentropic_vortex(x, y, t, length=10.0):
    return ic_isentropic_vortex(x, y, center=(5.0 + t, 5.0 + t), period=length)


# --------------------------------------------------------------------------- Riemann problems

SOD = ((1.0, 0.0, 1.0), (0.125, 0.0, 0.1))
LAX = ((0.445, 0.698, 3.528), (0.5, 0.0, 0.571))


def _riemann_ic(left, right, x0=0.5):
    def ic(x, y):
        xa = np.asarray(x, dtype=float) + 0.0 * np.asarray(y)
        lft = xa < x0
        rho = np.where(lft, left[0], right[0])
        u = np.where(lft, left[1], right[1])
        p = np.where(lft, left[2], right[2])
        return _prim(rho, u, 0.0, p)
    return ic


ic_sod = _riemann_ic(*SOD)
ic_lax = _riemann_ic(*LAX)


class ExactRiemann:
    """Exact solution of the 1D Riemann problem for an ideal gas.

    States are ``(rho, u, p)``. The star pressure is found by Newton
    iteration on the pressure function (bisection safeguarded).
    """

    def __init__(self, left, right, gamma=GAMMA, tol=1e-12):
        self.gamma = g = gamma
        self.rl, self.ul, self.pl = map(float, left)
        self.rr, self.ur, self.pr = map(float, right)
        if min(self.rl, self.pl, self.rr, self.pr) <= 0.0:
            raise ValueError("Riemann states must have positive density and pressure")
        self.cl = np.sqrt(g * self.pl / self.rl)
        self.cr = np.sqrt(g * self.pr / self.rr)
        if 2.0 * (self.cl + self.cr) / (g - 1.0) <= self.ur - self.ul:
            raise ValueError("initial data generate vacuum")
        self.p_star = self._solve_pressure(tol)
        fl, _ = self._f(self.p_star, self.rl, self.pl, self.cl)
        fr, _ = self._f(self.p_star, self.rr, self.pr, self.cr)
        self.u_star = 0.5 * (self.ul + self.ur) + 0.5 * (fr - fl)

    def _f(self, p, rk, pk, ck):
        g = self.gamma
        if p > pk:
            A = 2.0 / ((g + 1.0) * rk)
            B = (g - 1.0) / (g + 1.0) * pk
            s = np.sqrt(A / (p + B))
            return (p - pk) * s, s * (1.0 - 0.5 * (p - pk) / (B + p))
        ratio = p / pk
        f = 2.0 * ck / (g - 1.0) * (ratio ** ((g - 1.0) / (2.0 * g)) - 1.0)
        df = ratio ** (-(g + 1.0) / (2.0 * g)) / (rk * ck)
        return f, df

    def _solve_pressure(self, tol):
        du = self.ur - self.ul

        def func(p):
            return self._f(p, self.rl, self.pl, self.cl)[0] + self._f(p, self.rr, self.pr, self.cr)[0] + du

        p = max(tol, 0.5 * (self.pl + self.pr))
        for _ in range(100):
            fl, dfl = self._f(p, self.rl, self.pl, self.cl)
            fr, dfr = self._f(p, self.rr, self.pr, self.cr)
            new = p - (fl + fr + du) / (dfl + dfr)
            if new <= 0.0:
                new = 0.5 * p
            if abs(new - p) <= tol * 0.5 * (new + p):
                return new
            p = new
        hi = max(self.pl, self.pr)
        while func(hi) < 0.0:
            hi *= 2.0
        return brentq(func, 1e-14, hi, xtol=tol * hi, rtol=4 * np.finfo(float).eps)

    def star_densities(self):
        g = self.gamma
        out = []
        for rk, pk in ((self.rl, self.pl), (self.rr, self.pr)):
            ratio = self.p_star / pk
            if ratio > 1.0:
                q = (g - 1.0) / (g + 1.0)
                out.append(rk * (ratio + q) / (q * ratio + 1.0))
            else:
                out.append(rk * ratio ** (1.0 / g))
        return tuple(out)

    def shock_speeds(self):
        """Speeds of the left and right waves if they are shocks (``None`` otherwise)."""
        g = self.gamma
        out = []
        for sgn, rk, uk, pk, ck in ((-1, self.rl, self.ul, self.pl, self.cl),
                                    (1, self.rr, self.ur, self.pr, self.cr)):
            if self.p_star > pk:
                m = np.sqrt((g + 1.0) / (2.0 * g) * self.p_star / pk + (g - 1.0) / (2.0 * g))
                out.append(uk + sgn * ck * m)
            else:
                out.append(None)
        return tuple(out)

    def sample(self, xi):
        """``(rho, u, p)`` at similarity coordinates ``xi = (x - x0) / t``."""
        xi = np.atleast_1d(np.asarray(xi, dtype=float))
        out = np.empty(xi.shape + (3,))
        for i, s in np.ndenumerate(xi):
            out[i] = self._sample_one(s)
        return out

    def _sample_one(self, s):
        g = self.gamma
        ps, us = self.p_star, self.u_star
        rsl, rsr = self.star_densities()
        if s <= us:
            rk, uk, pk, ck, rs, sgn = self.rl, self.ul, self.pl, self.cl, rsl, -1.0
        else:
            rk, uk, pk, ck, rs, sgn = self.rr, self.ur, self.pr, self.cr, rsr, 1.0
        if ps > pk:
            speed = uk + sgn * ck * np.sqrt((g + 1.0) / (2.0 * g) * ps / pk + (g - 1.0) / (2.0 * g))
            outside = s < speed if sgn < 0 else s > speed
            return (rk, uk, pk) if outside else (rs, us, ps)
        cs = ck * (ps / pk) ** ((g - 1.0) / (2.0 * g))
        head = uk + sgn * ck
        tail = us + sgn * cs
        if (sgn < 0 and s <= head) or (sgn > 0 and s >= head):
            return (rk, uk, pk)
        if (sgn < 0 and s >= tail) or (sgn > 0 and s <= tail):
            return (rs, us, ps)
        c = 2.0 / (g + 1.0) * ck - sgn * (g - 1.0) / (g + 1.0) * (uk - s)
        u = 2.0 / (g + 1.0) * (-sgn * ck + 0.5 * (g - 1.0) * uk + s)
        rho = rk * (c / ck) ** (2.0 / (g - 1.0))
        p = pk * (c / ck) ** (2.0 * g / (g - 1.0))
        return (rho, u, p)


def exact_riemann_1d(left, right, xi, gamma=GAMMA):
    """Sample the exact Riemann solution; states are ``(rho, u, p)``."""
    return ExactRiemann(left, right, gamma).sample(xi)


# --------------------------------------------------------------------------- shock cases

def ic_shu_osher(x, y):
    xa = np.asarray(x, dtype=float) + 0.0 * np.asarray(y)
    lft = xa <= 1.0
    rho = np.where(lft, 3.857134, 1.0 + 0.2 * np.sin(5.0 * xa))
    u = np.where(lft, 2.629369, 0.0)
    p = np.where(lft, 10.33333, 1.0)
    return _prim(rho, u, 0.0, p)


def normal_shock_downstream(rho1, u1, p1, gamma=GAMMA):
    """Rankine-Hugoniot state behind a stationary normal shock."""
    c1 = np.sqrt(gamma * p1 / rho1)
    m2 = (u1 / c1) ** 2
    rho2 = rho1 * (gamma + 1.0) * m2 / ((gamma - 1.0) * m2 + 2.0)
    p2 = p1 * (2.0 * gamma * m2 - (gamma - 1.0)) / (gamma + 1.0)
    u2 = rho1 * u1 / rho2
    return rho2, u2, p2


def ic_shock_vortex(x, y, mach=1.1, kappa=0.3, mu=0.204, rc=0.05, center=(0.25, 0.5),
                    shock_x=0.5, gamma=GAMMA):
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    rho1, u1, p1 = mach ** 2, np.sqrt(gamma), 1.0
    rho2, u2, p2 = normal_shock_downstream(rho1, u1, p1, gamma)
    dx = x - center[0]
    dy = y - center[1]
    r = np.hypot(dx, dy)
    eta = r / rc
    th = np.arctan2(dy, dx)
    amp = kappa * eta * np.exp(mu * (1.0 - eta ** 2))
    T0 = p1 / rho1
    s0 = p1 / rho1 ** gamma
    T = T0 - (gamma - 1.0) * kappa ** 2 / (4.0 * mu * gamma) * np.exp(2.0 * mu * (1.0 - eta ** 2))
    rho_v = (T / s0) ** (1.0 / (gamma - 1.0))
    up = x < shock_x
    rho = np.where(up, rho_v, rho2)
    u = np.where(up, u1 + amp * np.sin(th), u2)
    v = np.where(up, -amp * np.cos(th), 0.0)
    p = np.where(up, rho_v * T, p2)
    return _prim(rho, u, v, p)


DMR_POST = (8.0, 4.125 * np.sqrt(3.0), -4.125, 116.5)
DMR_PRE = (1.4, 0.0, 0.0, 1.0)


def dmr_shock_x(y, t):
    """Position of the Mach 10 shock front at height ``y`` and time ``t``."""
    return 1.0 / 6.0 + (np.asarray(y) + 20.0 * t) / np.sqrt(3.0)


def ic_dmr(x, y):
    post = np.asarray(x) < dmr_shock_x(y, 0.0)
    return _prim(*(np.where(post, a, b) for a, b in zip(DMR_POST, DMR_PRE)))


def _dmr_bottom(mids):
    wall = BoundaryCondition("reflective")
    inflow = BoundaryCondition("prescribed", DMR_POST)
    return [inflow if x < 1.0 / 6.0 else wall for x in mids[:, 0]]


# --------------------------------------------------------------------------- registry

@dataclass
class CaseSpec:
    name: str
    domain: tuple
    h: float
    ic: Callable
    bcs: dict = field(default_factory=dict)
    end_time: float = 1.0
    dt_mode: str = "cfl"
    cfl: float = 0.3
    mesh_kind: str = "regular-quad"
    periodic: tuple = (False, False)
    exact: Optional[Callable] = None
    gamma: float = GAMMA

    def cells_per_side(self, h=None):
        h = self.h if h is None else h
        x0, x1, y0, y1 = self.domain
        return int(round((x1 - x0) / h)), int(round((y1 - y0) / h))

    def make_mesh(self, kind=None, h=None, amplitude=None, seed=0):
        nx, ny = self.cells_per_side(h)
        return generate_mesh(kind or self.mesh_kind, nx, ny, self.domain,
                             perturb_amplitude=amplitude, seed=seed, periodic=self.periodic)

    def controls(self, end_time=None, mode=None, coefficient=None):
        return TimeControls(self.end_time if end_time is None else end_time,
                            mode or self.dt_mode,
                            self.cfl if coefficient is None else coefficient)

    def initial_state(self, mesh):
        """Cell averages of the conservative initial field."""
        return cell_average(mesh, lambda x, y: prim_to_cons(self.ic(x, y), self.gamma))

    def with_overrides(self, **kw):
        return replace(self, **kw)


def _exact_riemann_field(left, right, x0=0.5):
    solver = ExactRiemann(left, right)

    def exact(x, y, t):
        x = np.asarray(x, dtype=float) + 0.0 * np.asarray(y)
        if t <= 0.0:
            return _riemann_ic(left, right, x0)(x, y)
        s = solver.sample((x - x0) / t)
        return _prim(s[..., 0], s[..., 1], 0.0, s[..., 2])
    return exact


_ALL_OUT = {"left": OUTFLOW, "right": OUTFLOW, "bottom": OUTFLOW, "top": OUTFLOW}

CASES = {
    "advection": CaseSpec(
        "advection", (0.0, 2.0, 0.0, 2.0), 1.0 / 16, ic_density_perturbation,
        end_time=2.0, dt_mode="accuracy", periodic=(True, True),
        exact=exact_density_perturbation),
    # |u| + c reaches ~3.4 in the vortex, which puts dt = 0.3h past the RK3 limit
    "vortex": CaseSpec(
        "vortex", (0.0, 10.0, 0.0, 10.0), 1.0 / 8, ic_isentropic_vortex,
        end_time=2.0, dt_mode="accuracy", cfl=0.15, periodic=(True, True),
        exact=exact_isentropic_vortex),
    "sod": CaseSpec(
        "sod", (0.0, 1.0, 0.0, 0.5), 1.0 / 100, ic_sod, dict(_ALL_OUT), end_time=0.2,
        exact=_exact_riemann_field(*SOD)),
    "lax": CaseSpec(
        "lax", (0.0, 1.0, 0.0, 0.5), 1.0 / 100, ic_lax, dict(_ALL_OUT), end_time=0.16,
        exact=_exact_riemann_field(*LAX)),
    "shu-osher": CaseSpec(
        "shu-osher", (0.0, 10.0, 0.0, 0.25), 1.0 / 40, ic_shu_osher,
        {"left": OUTFLOW, "right": OUTFLOW, "bottom": REFLECTIVE, "top": REFLECTIVE},
        end_time=1.8, mesh_kind="perturbed-quad"),
    "shock-vortex": CaseSpec(
        "shock-vortex", (0.0, 2.0, 0.0, 1.0), 1.0 / 100, ic_shock_vortex,
        {"left": OUTFLOW, "right": OUTFLOW, "bottom": REFLECTIVE, "top": REFLECTIVE},
        end_time=0.8),
    "dmr": CaseSpec(
        "dmr", (0.0, 4.0, 0.0, 1.0), 1.0 / 100, ic_dmr,
        {"left": BoundaryCondition("prescribed", DMR_POST), "right": OUTFLOW,
         "bottom": _dmr_bottom, "top": DMR_EXACT},
        end_time=0.2),
}


def get_case(name):
    try:
        return CASES[name]
    except KeyError:
        raise ValueError(f"unknown case {name!r}; choose from {', '.join(CASES)}") from None


# --------------------------------------------------------------------------- diagnostics

def error_norms(mesh, W, exact, t, gamma=GAMMA):
    """Density ``(L1, Linf)`` errors against exact cell averages.

    ``exact(x, y, t)`` returns primitive states. L1 is normalised by the
    domain area.
    """
    ref = cell_average(mesh, lambda x, y: exact(x, y, t)[..., 0])
    rho = np.asarray(W, dtype=float)
    if rho.ndim == 2:
        rho = rho[:, 0]
    e = np.abs(rho - ref)
    return float((mesh.area * e).sum() / mesh.area.sum()), float(e.max())


def convergence_orders(errors):
    """``log2(E_h / E_{h/2})`` between consecutive entries (``nan`` first)."""
    errors = np.asarray(errors, dtype=float)
    out = np.full(len(errors), np.nan)
    out[1:] = np.log2(errors[:-1] / errors[1:])
    return out


def line_cut(mesh, W, y=None, gamma=GAMMA):
    """Primitive states of cells straddling ``y`` (default mid-height), ordered by x.

    A cell is taken if ``ymin < y <= ymax`` over its nodes. Returns
    ``(x, prim)`` with ``prim`` of shape ``(n, 4)``.
    """
    coords = mesh.nodes[np.maximum(mesh.cells, 0)]
    ys = np.where(mesh.cells >= 0, coords[..., 1], np.nan)
    ymin = np.nanmin(ys, axis=1)
    ymax = np.nanmax(ys, axis=1)
    if y is None:
        y = 0.5 * (mesh.nodes[:, 1].min() + mesh.nodes[:, 1].max())
    sel = np.flatnonzero((ymin < y) & (y <= ymax))
    order = np.argsort(mesh.centroid[sel, 0], kind="stable")
    sel = sel[order]
    return mesh.centroid[sel, 0], cons_to_prim(np.asarray(W)[sel], gamma)

