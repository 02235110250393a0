"""Finite-volume residual, boundary conditions and SSP Runge-Kutta time stepping."""

import logging
import time as _time
from dataclasses import dataclass, field

import numba
import numpy as np

from . import _kernels as K
from .euler import GAMMA, cons_to_prim, prim_to_cons
from .errors import SolverAbort, UnphysicalStateError
from .weno import EPSILON, THETA, gauss_points, precompute_tables

log = logging.getLogger(__name__)

BC_KINDS = {
    "reflective": K.BC_REFLECTIVE,
    "outflow": K.BC_OUTFLOW,
    "prescribed": K.BC_PRESCRIBED,
    "dmr-exact": K.BC_DMR,
}

# Mach 10 oblique shock: post-shock and quiescent states (conservative form)
_DMR_POST_PRIM = np.array([8.0, 4.125 * np.sqrt(3.0), -4.125, 116.5])
_DMR_PRE_PRIM = np.array([1.4, 0.0, 0.0, 1.0])


@dataclass(frozen=True)
class BoundaryCondition:
    kind: str
    state: tuple = None  # primitive (rho, u, v, p) for prescribed states

    def __post_init__(self):
        if self.kind not in BC_KINDS:
            raise ValueError(f"unknown boundary condition {self.kind!r}")
        if self.kind == "prescribed" and (self.state is None or len(self.state) != 4):
            raise ValueError("prescribed boundary needs a primitive state")


REFLECTIVE = BoundaryCondition("reflective")
OUTFLOW = BoundaryCondition("outflow")
DMR_EXACT = BoundaryCondition("dmr-exact")


@dataclass
class TimeControls:
    end_time: float
    mode: str = "cfl"            # "cfl" or "accuracy"
    coefficient: float = 0.3

    def __post_init__(self):
        if self.mode not in ("cfl", "accuracy"):
            raise ValueError(f"unknown time-step mode {self.mode!r}")
        if not self.coefficient > 0.0:
            raise ValueError("time-step coefficient must be positive")
        if self.mode == "cfl" and self.coefficient > 1.0:
            raise ValueError("cfl must lie in (0, 1]")
        if not self.end_time >= 0.0:
            raise ValueError("end time must be non-negative")


@dataclass
class SolverState:
    W: np.ndarray
    time: float = 0.0
    step: int = 0


@dataclass
class RunMetrics:
    steps: int = 0
    wall_time: float = 0.0
    residual_evaluations: int = 0
    fallback_cells: int = 0
    fallback_points: int = 0
    point_evaluations: int = 0
    star_violations: int = 0
    min_density: float = np.inf
    min_pressure: float = np.inf
    boundary_flux: np.ndarray = field(default_factory=lambda: np.zeros(4))

    @property
    def fallback_fraction(self):
        return self.fallback_points / max(self.point_evaluations, 1)

    def as_dict(self):
        return {
            "steps": self.steps,
            "wall_time": self.wall_time,
            "residual_evaluations": self.residual_evaluations,
            "fallback_cells": self.fallback_cells,
            "fallback_points": self.fallback_points,
            "point_evaluations": self.point_evaluations,
            "fallback_fraction": self.fallback_fraction,
            "star_violations": self.star_violations,
            "min_density": self.min_density,
            "min_pressure": self.min_pressure,
        }


def set_threads(n):
    """Cap the number of threads used by the compiled kernels."""
    if n is None:
        return
    n = max(1, min(int(n), numba.config.NUMBA_NUM_THREADS))
    numba.set_num_threads(n)


def _resolve_bcs(mesh, bcs):
    """Per-face kind and prescribed state from a tag map.

    Values of ``bcs`` are :class:`BoundaryCondition` objects or callables
    taking face midpoints ``(n, 2)`` and returning one condition per face.
    """
    F = mesh.n_faces
    kind = np.zeros(F, dtype=np.int64)
    state = np.zeros((F, 4))
    bnd = mesh.boundary_faces
    if len(bnd) == 0:
        return kind, state
    mids = mesh.face_midpoints()
    bcs = bcs or {}
    for t, name in enumerate(mesh.tag_names):
        faces = bnd[mesh.face_tag[bnd] == t]
        if len(faces) == 0:
            continue
        if name not in bcs:
            raise ValueError(f"no boundary condition for tag {name!r}")
        spec = bcs[name]
        per_face = spec(mids[faces]) if callable(spec) else [spec] * len(faces)
        for f, bc in zip(faces, per_face):
            kind[f] = BC_KINDS[bc.kind]
            if bc.kind == "prescribed":
                state[f] = prim_to_cons(np.asarray(bc.state, dtype=float))
    return kind, state


class Solver:
    """Semi-discrete operator and time integrator for one mesh.

    Parameters
    ----------
    mesh : Mesh
    bcs : dict
        Boundary condition per boundary tag (see :func:`_resolve_bcs`).
    gamma : float
        Ratio of specific heats.
    epsilon, theta : float
        Nonlinear-weight floor and weight-splitting parameter.
    characteristic : bool
        Reconstruct characteristic variables (per-face Roe basis) instead
        of conservative ones.
    tables : ReconstructionTables, optional
        Reuse precomputed tables (must match ``theta``).
    """

    def __init__(self, mesh, bcs=None, gamma=GAMMA, epsilon=EPSILON, theta=THETA,
                 characteristic=True, tables=None):
        if not theta > 1.0:
            raise ValueError("theta must exceed 1")
        if not epsilon > 0.0:
            raise ValueError("epsilon must be positive")
        self.mesh = mesh
        self.gamma = float(gamma)
        self.epsilon = float(epsilon)
        self.characteristic = bool(characteristic)
        self.tables = tables if tables is not None else precompute_tables(mesh, theta)
        self.bc_kind, self.bc_state = _resolve_bcs(mesh, bcs)
        self.face_gp = np.ascontiguousarray(gauss_points(mesh))
        self.dmr_post = prim_to_cons(_DMR_POST_PRIM, self.gamma)
        self.dmr_pre = prim_to_cons(_DMR_PRE_PRIM, self.gamma)
        self._bnd = mesh.boundary_faces
        self._points_per_residual = int(2 * mesh.nverts.sum())
        self._inscribed = mesh.area / mesh.perimeter()
        self._normals = mesh.cell_normals()
        self.metrics = RunMetrics()
        self.last_boundary_flux = np.zeros(4)

    # ------------------------------------------------------------------ residual

    def reconstruct(self, W):
        """Face Gauss-point states ``(F, 2, 2, 4)`` after the positivity fallback.

        Also returns the per-cell fallback flags.
        """
        t = self.tables
        m = self.mesh
        W = np.ascontiguousarray(W, dtype=float)
        grad = K.cell_gradients(W, t.nsub, t.cand, t.cand_grad)
        rec = K.reconstruct_faces(W, grad, m.face_cells, m.face_local, m.face_normal, t.nsub,
                                  t.gp_offset, t.gplus, t.gminus, t.sigma_plus, t.sigma_minus,
                                  t.area, self.epsilon, self.gamma, self.characteristic)
        flags = K.positivity_fallback(rec, W, m.cell_faces, m.cell_face_sign, m.nverts, self.gamma)
        return rec, flags

    def residual(self, W, t=0.0):
        """``L(W)``: minus the flux balance of every cell divided by its area."""
        m = self.mesh
        rec, flags = self.reconstruct(W)
        flux, star_bad = K.face_fluxes(rec, m.face_cells, m.face_normal, m.face_length,
                                       self.face_gp, self.bc_kind, self.bc_state,
                                       self.dmr_post, self.dmr_pre, float(t), self.gamma)
        res = K.gather_residual(flux, m.cell_faces, m.cell_face_sign, m.nverts, m.area)
        met = self.metrics
        met.residual_evaluations += 1
        nflag = int(flags.sum())
        if nflag:
            met.fallback_cells += nflag
            met.fallback_points += int(2 * m.nverts[flags.astype(bool)].sum())
        met.point_evaluations += self._points_per_residual
        met.star_violations += int(star_bad.sum())
        self.last_boundary_flux = flux[self._bnd].sum(axis=0)
        return res

    # ------------------------------------------------------------------ time stepping

    def _check(self, W, t, stage):
        rho = W[:, 0]
        p = (self.gamma - 1.0) * (W[:, 3] - 0.5 * (W[:, 1] ** 2 + W[:, 2] ** 2) / rho)
        bad = ~((rho > 0.0) & (p > 0.0))
        if bad.any():
            c = int(np.flatnonzero(bad)[0])
            raise SolverAbort(f"unphysical cell average in cell {c} at t={t:.6g}, stage {stage}",
                              cell=c, time=t, stage=stage)
        self.metrics.min_density = min(self.metrics.min_density, float(rho.min()))
        self.metrics.min_pressure = min(self.metrics.min_pressure, float(p.min()))

    def rk3_step(self, state, dt):
        """Advance ``state`` by one third-order SSP Runge-Kutta step (in place)."""
        if not dt > 0.0:
            raise ValueError("dt must be positive")
        W0 = state.W
        t = state.time
        L0 = self.residual(W0, t)
        b0 = self.last_boundary_flux
        W1 = W0 + dt * L0
        self._check(W1, t, 1)
        L1 = self.residual(W1, t + dt)
        b1 = self.last_boundary_flux
        W2 = 0.75 * W0 + 0.25 * W1 + 0.25 * dt * L1
        self._check(W2, t, 2)
        L2 = self.residual(W2, t + 0.5 * dt)
        b2 = self.last_boundary_flux
        W3 = W0 / 3.0 + 2.0 / 3.0 * W2 + 2.0 / 3.0 * dt * L2
        self._check(W3, t, 3)
        self.metrics.boundary_flux += dt * (b0 / 6.0 + b1 / 6.0 + 2.0 / 3.0 * b2)
        state.W = W3
        state.time = t + dt
        state.step += 1
        return state

    def compute_dt(self, state, controls):
        remaining = controls.end_time - state.time
        if controls.mode == "accuracy":
            if self.mesh.h is None:
                raise ValueError("accuracy mode needs the nominal mesh size")
            dt = controls.coefficient * self.mesh.h
        else:
            prim = cons_to_prim(state.W, self.gamma)
            c = np.sqrt(self.gamma * prim[:, 3] / prim[:, 0])
            un = np.abs(prim[:, None, 1] * self._normals[..., 0]
                        + prim[:, None, 2] * self._normals[..., 1])
            s = un.max(axis=1) + c
            dt = controls.coefficient * float(np.min(self._inscribed / s))
        return min(dt, remaining)

    def run(self, state, controls, progress=None, max_steps=None):
        """Integrate to ``controls.end_time``; returns the run metrics."""
        try:
            cons_to_prim(state.W, self.gamma, check=True)
        except UnphysicalStateError as exc:
            raise SolverAbort(f"initial state is unphysical: {exc}", time=state.time) from None
        start = _time.perf_counter()
        tol = 1e-12 * max(1.0, abs(controls.end_time))
        while state.time < controls.end_time - tol:
            if max_steps is not None and state.step >= max_steps:
                break
            dt = self.compute_dt(state, controls)
            self.rk3_step(state, dt)
            if progress is not None:
                progress(state)
        self.metrics.steps = state.step
        self.metrics.wall_time += _time.perf_counter() - start
        return self.metrics

