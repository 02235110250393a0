"""Ideal-gas Euler physics: state conversion, HLLC flux and characteristic bases.

Conservative states are ``(rho, rho*u, rho*v, E)`` along the last axis,
primitive states ``(rho, u, v, p)``.
"""

import numpy as np

from .errors import UnphysicalStateError

GAMMA = 1.4


def prim_to_cons(prim, gamma=GAMMA):
    prim = np.asarray(prim, dtype=float)
    rho, u, v, p = (prim[..., i] for i in range(4))
    E = p / (gamma - 1.0) + 0.5 * rho * (u * u + v * v)
    return np.stack([rho, rho * u, rho * v, E], axis=-1)


def cons_to_prim(U, gamma=GAMMA, check=False):
    """Primitive variables; with ``check`` raise on non-positive density or pressure."""
    U = np.asarray(U, dtype=float)
    rho = U[..., 0]
    u = U[..., 1] / rho
    v = U[..., 2] / rho
    p = (gamma - 1.0) * (U[..., 3] - 0.5 * rho * (u * u + v * v))
    if check:
        bad = ~((rho > 0.0) & (p > 0.0))
        if np.any(bad):
            idx = np.argwhere(np.atleast_1d(bad))[0]
            raise UnphysicalStateError(
                f"non-positive density or pressure at index {tuple(int(i) for i in idx)}",
                state=np.atleast_2d(U)[idx[0]] if U.ndim > 1 else U,
            )
    return np.stack([rho, u, v, p], axis=-1)


def pressure(U, gamma=GAMMA):
    U = np.asarray(U, dtype=float)
    return (gamma - 1.0) * (U[..., 3] - 0.5 * (U[..., 1] ** 2 + U[..., 2] ** 2) / U[..., 0])


def sound_speed(rho, p, gamma=GAMMA):
    return np.sqrt(gamma * p / rho)


def flux_x(U, gamma=GAMMA):
    """Physical flux in the x direction."""
    U = np.asarray(U, dtype=float)
    rho, mu, mv, E = (U[..., i] for i in range(4))
    u = mu / rho
    p = pressure(U, gamma)
    return np.stack([mu, mu * u + p, mv * u, (E + p) * u], axis=-1)


def flux_normal(U, n, gamma=GAMMA):
    """Physical flux through a face with unit normal ``n``."""
    U = np.asarray(U, dtype=float)
    n = np.asarray(n, dtype=float)
    nx, ny = n[..., 0], n[..., 1]
    rho = U[..., 0]
    u = U[..., 1] / rho
    v = U[..., 2] / rho
    p = pressure(U, gamma)
    un = u * nx + v * ny
    return np.stack([rho * un, U[..., 1] * un + p * nx, U[..., 2] * un + p * ny,
                     (U[..., 3] + p) * un], axis=-1)


def rotate_to_local(U, n):
    """Express momentum in the face frame (normal, tangential)."""
    U = np.asarray(U, dtype=float)
    n = np.asarray(n, dtype=float)
    nx, ny = n[..., 0], n[..., 1]
    mn = U[..., 1] * nx + U[..., 2] * ny
    mt = -U[..., 1] * ny + U[..., 2] * nx
    return np.stack([U[..., 0], mn, mt, U[..., 3]], axis=-1)


def rotate_back(F, n):
    F = np.asarray(F, dtype=float)
    n = np.asarray(n, dtype=float)
    nx, ny = n[..., 0], n[..., 1]
    fx = F[..., 1] * nx - F[..., 2] * ny
    fy = F[..., 1] * ny + F[..., 2] * nx
    return np.stack([F[..., 0], fx, fy, F[..., 3]], axis=-1)


def roe_average(UL, UR, gamma=GAMMA):
    """Roe-averaged ``(u, v, H, c)``."""
    pl = cons_to_prim(UL, gamma)
    pr = cons_to_prim(UR, gamma)
    sl = np.sqrt(pl[..., 0])
    sr = np.sqrt(pr[..., 0])
    HL = (UL[..., 3] + pl[..., 3]) / pl[..., 0]
    HR = (UR[..., 3] + pr[..., 3]) / pr[..., 0]
    w = sl + sr
    u = (sl * pl[..., 1] + sr * pr[..., 1]) / w
    v = (sl * pl[..., 2] + sr * pr[..., 2]) / w
    H = (sl * HL + sr * HR) / w
    c = np.sqrt(np.maximum((gamma - 1.0) * (H - 0.5 * (u * u + v * v)), 1e-300))
    return u, v, H, c


def hllc_flux(UL, UR, n, gamma=GAMMA):
    """HLLC numerical flux across a face with unit normal ``n`` (from L to R).

    Wave speeds use the Einfeldt/Roe estimate.
    """
    UL = np.asarray(UL, dtype=float)
    UR = np.asarray(UR, dtype=float)
    qL = rotate_to_local(UL, n)
    qR = rotate_to_local(UR, n)
    F = _hllc_x(qL, qR, gamma)
    return rotate_back(F, n)


def _hllc_x(qL, qR, gamma):
    rL, uL, vL, pL = np.moveaxis(cons_to_prim(qL, gamma), -1, 0)
    rR, uR, vR, pR = np.moveaxis(cons_to_prim(qR, gamma), -1, 0)
    cL = np.sqrt(gamma * pL / rL)
    cR = np.sqrt(gamma * pR / rR)
    ut, _, _, ct = roe_average(qL, qR, gamma)
    SL = np.minimum(uL - cL, ut - ct)
    SR = np.maximum(uR + cR, ut + ct)
    SM = ((pR - pL + rL * uL * (SL - uL) - rR * uR * (SR - uR))
          / (rL * (SL - uL) - rR * (SR - uR)))
    FL = flux_x(qL, gamma)
    FR = flux_x(qR, gamma)

    def star(q, r, u, v, p, S):
        fac = r * (S - u) / (S - SM)
        E = q[..., 3]
        return np.stack([fac, fac * SM, fac * v,
                         fac * (E / r + (SM - u) * (SM + p / (r * (S - u))))], axis=-1)

    FsL = FL + SL[..., None] * (star(qL, rL, uL, vL, pL, SL) - qL)
    FsR = FR + SR[..., None] * (star(qR, rR, uR, vR, pR, SR) - qR)
    out = np.where((SL >= 0.0)[..., None], FL,
                   np.where((SM >= 0.0)[..., None], FsL,
                            np.where((SR > 0.0)[..., None], FsR, FR)))
    return out


def eigenvectors(U, n, gamma=GAMMA):
    """Right and left eigenvector matrices of the flux Jacobian along ``n``.

    ``U`` is the (averaged) state the Jacobian is evaluated at. Returns
    ``(R, L)`` with ``L @ R = I``; columns of ``R`` are ordered by the
    eigenvalues ``u.n - c, u.n, u.n, u.n + c``.
    """
    U = np.asarray(U, dtype=float)
    nx, ny = float(n[0]), float(n[1])
    rho, u, v, p = cons_to_prim(U, gamma)
    c = np.sqrt(gamma * p / rho)
    H = (U[3] + p) / rho
    return _eigen(u, v, H, c, nx, ny, gamma)


def _eigen(u, v, H, c, nx, ny, gamma):
    q2 = u * u + v * v
    un = u * nx + v * ny
    ut = -u * ny + v * nx
    R = np.array([
        [1.0, 1.0, 0.0, 1.0],
        [u - c * nx, u, -ny, u + c * nx],
        [v - c * ny, v, nx, v + c * ny],
        [H - c * un, 0.5 * q2, ut, H + c * un],
    ])
    b1 = (gamma - 1.0) / (c * c)
    b2 = 0.5 * q2 * b1
    L = np.array([
        [0.5 * (b2 + un / c), 0.5 * (-b1 * u - nx / c), 0.5 * (-b1 * v - ny / c), 0.5 * b1],
        [1.0 - b2, b1 * u, b1 * v, -b1],
        [-ut, -ny, nx, 0.0],
        [0.5 * (b2 - un / c), 0.5 * (-b1 * u + nx / c), 0.5 * (-b1 * v + ny / c), 0.5 * b1],
    ])
    return R, L


def roe_eigenvectors(UL, UR, n, gamma=GAMMA):
    """Eigenvector matrices at the Roe average of two states."""
    u, v, H, c = roe_average(np.asarray(UL, dtype=float), np.asarray(UR, dtype=float), gamma)
    return _eigen(float(u), float(v), float(H), float(c), float(n[0]), float(n[1]), gamma)


def char_project(L, U):
    """Characteristic variables ``L @ U`` (``U`` may carry leading axes)."""
    return np.asarray(U, dtype=float) @ np.asarray(L).T


def char_unproject(R, w):
    return np.asarray(w, dtype=float) @ np.asarray(R).T


def max_wave_speed(U, n, gamma=GAMMA):
    prim = cons_to_prim(U, gamma)
    c = np.sqrt(gamma * prim[..., 3] / prim[..., 0])
    return np.abs(prim[..., 1] * n[..., 0] + prim[..., 2] * n[..., 1]) + c
