"""Compiled residual kernels.

The arithmetic mirrors :mod:`uweno.weno` and :mod:`uweno.euler`; those
modules stay the readable reference and the tests compare the two.
"""

import math

import numpy as np
from numba import njit, prange

BC_INTERIOR = 0
BC_REFLECTIVE = 1
BC_OUTFLOW = 2
BC_PRESCRIBED = 3
BC_DMR = 4

_SQRT3 = math.sqrt(3.0)
# IEEE special values stay honoured so unphysical states are still detected
FASTMATH = {"nsz", "arcp", "contract", "afn", "reassoc"}
CHUNK = 256


@njit(cache=True, parallel=True)
def cell_gradients(W, nsub, cand, cand_grad):
    """Conservative-variable gradients of every candidate, ``(C, 12, 2, 4)``."""
    C = W.shape[0]
    out = np.zeros((C, 12, 2, 4))
    for c in prange(C):
        for j in range(nsub[c]):
            a = cand[c, j, 0]
            b = cand[c, j, 1]
            for v in range(4):
                da = W[a, v] - W[c, v]
                db = W[b, v] - W[c, v]
                out[c, j, 0, v] = cand_grad[c, j, 0, 0] * da + cand_grad[c, j, 0, 1] * db
                out[c, j, 1, v] = cand_grad[c, j, 1, 0] * da + cand_grad[c, j, 1, 1] * db
    return out


@njit(cache=True)
def _eigen(u, v, H, c, nx, ny, gamma, R, L):
    q2 = u * u + v * v
    un = u * nx + v * ny
    ut = -u * ny + v * nx
    R[0, 0] = 1.0
    R[0, 1] = 1.0
    R[0, 2] = 0.0
    R[0, 3] = 1.0
    R[1, 0] = u - c * nx
    R[1, 1] = u
    R[1, 2] = -ny
    R[1, 3] = u + c * nx
    R[2, 0] = v - c * ny
    R[2, 1] = v
    R[2, 2] = nx
    R[2, 3] = v + c * ny
    R[3, 0] = H - c * un
    R[3, 1] = 0.5 * q2
    R[3, 2] = ut
    R[3, 3] = H + c * un
    b1 = (gamma - 1.0) / (c * c)
    b2 = 0.5 * q2 * b1
    L[0, 0] = 0.5 * (b2 + un / c)
    L[0, 1] = 0.5 * (-b1 * u - nx / c)
    L[0, 2] = 0.5 * (-b1 * v - ny / c)
    L[0, 3] = 0.5 * b1
    L[1, 0] = 1.0 - b2
    L[1, 1] = b1 * u
    L[1, 2] = b1 * v
    L[1, 3] = -b1
    L[2, 0] = -ut
    L[2, 1] = -ny
    L[2, 2] = nx
    L[2, 3] = 0.0
    L[3, 0] = 0.5 * (b2 - un / c)
    L[3, 1] = 0.5 * (-b1 * u + nx / c)
    L[3, 2] = 0.5 * (-b1 * v + ny / c)
    L[3, 3] = 0.5 * b1


@njit(cache=True)
def _roe_state(WL, WR, gamma):
    rl = WL[0]
    rr = WR[0]
    ul = WL[1] / rl
    vl = WL[2] / rl
    ur = WR[1] / rr
    vr = WR[2] / rr
    pl = (gamma - 1.0) * (WL[3] - 0.5 * rl * (ul * ul + vl * vl))
    pr = (gamma - 1.0) * (WR[3] - 0.5 * rr * (ur * ur + vr * vr))
    hl = (WL[3] + pl) / rl
    hr = (WR[3] + pr) / rr
    sl = math.sqrt(rl)
    sr = math.sqrt(rr)
    w = sl + sr
    u = (sl * ul + sr * ur) / w
    v = (sl * vl + sr * vr) / w
    H = (sl * hl + sr * hr) / w
    c2 = (gamma - 1.0) * (H - 0.5 * (u * u + v * v))
    if c2 < 1e-300:
        c2 = 1e-300
    return u, v, H, math.sqrt(c2)


@njit(cache=True, fastmath=FASTMATH)
def _weno_side(c, k, W, grad, gp_offset, nsub, gplus, gminus, sigp, sigm, area,
               L, R, eps, out, gc, beta, vals, wc):
    """Reconstruct cell ``c`` at the two Gauss points of its local face ``k``.

    ``out`` receives ``(2, 4)`` conservative values; the remaining
    arguments are scratch buffers.
    """
    m = nsub[c]
    for f in range(4):
        w0 = 0.0
        for q in range(4):
            w0 += L[f, q] * W[c, q]
        for j in range(m):
            gx = 0.0
            gy = 0.0
            for q in range(4):
                gx += L[f, q] * grad[c, j, 0, q]
                gy += L[f, q] * grad[c, j, 1, q]
            gc[j, 0] = gx
            gc[j, 1] = gy
            beta[j] = area[c] * (gx * gx + gy * gy)
        for g in range(2):
            lg = 2 * k + g
            ox = gp_offset[c, lg, 0]
            oy = gp_offset[c, lg, 1]
            for j in range(m):
                vals[j] = w0 + gc[j, 0] * ox + gc[j, 1] * oy
            ap_sum = 0.0
            am_sum = 0.0
            rp = 0.0
            rm = 0.0
            for j in range(m):
                wp = gplus[c, lg, j]
                tp = wp * beta[j]
                bp = beta[j] * (1.0 + tp + tp * tp) + eps
                ap = wp / (bp * bp)
                wm = gminus[c, lg, j]
                tm = wm * beta[j]
                bm = beta[j] * (1.0 + tm + tm * tm) + eps
                am = wm / (bm * bm)
                ap_sum += ap
                am_sum += am
                rp += ap * vals[j]
                rm += am * vals[j]
            wc[g, f] = sigp[c, lg] * rp / ap_sum - sigm[c, lg] * rm / am_sum
    for g in range(2):
        for q in range(4):
            s = 0.0
            for f in range(4):
                s += R[q, f] * wc[g, f]
            out[g, q] = s


@njit(cache=True, parallel=True, fastmath=FASTMATH)
def reconstruct_faces(W, grad, face_cells, face_local, face_normal, nsub, gp_offset,
                      gplus, gminus, sigp, sigm, area, eps, gamma, characteristic):
    """Left/right states at both Gauss points of every face, ``(F, 2, 2, 4)``."""
    F = face_cells.shape[0]
    rec = np.zeros((F, 2, 2, 4))
    nchunk = (F + CHUNK - 1) // CHUNK
    for ch in prange(nchunk):
        R = np.eye(4)
        L = np.eye(4)
        buf = np.empty((2, 4))
        gc = np.empty((12, 2))
        beta = np.empty(12)
        vals = np.empty(12)
        wc = np.empty((2, 4))
        for f in range(ch * CHUNK, min(F, (ch + 1) * CHUNK)):
            a = face_cells[f, 0]
            b = face_cells[f, 1]
            if characteristic:
                if b >= 0:
                    u, v, H, cs = _roe_state(W[a], W[b], gamma)
                else:
                    u, v, H, cs = _roe_state(W[a], W[a], gamma)
                _eigen(u, v, H, cs, face_normal[f, 0], face_normal[f, 1], gamma, R, L)
            _weno_side(a, face_local[f, 0], W, grad, gp_offset, nsub, gplus, gminus,
                       sigp, sigm, area, L, R, eps, buf, gc, beta, vals, wc)
            rec[f, 0] = buf
            if b >= 0:
                _weno_side(b, face_local[f, 1], W, grad, gp_offset, nsub, gplus, gminus,
                           sigp, sigm, area, L, R, eps, buf, gc, beta, vals, wc)
                rec[f, 1] = buf
    return rec


@njit(cache=True)
def _unphysical(U, gamma):
    rho = U[0]
    if not rho > 0.0:
        return True
    p = (gamma - 1.0) * (U[3] - 0.5 * (U[1] * U[1] + U[2] * U[2]) / rho)
    return not p > 0.0


@njit(cache=True, parallel=True)
def positivity_fallback(rec, W, cell_faces, cell_face_sign, nverts, gamma):
    """Replace every Gauss value of a cell with its average if any is unphysical.

    Returns the per-cell flag array.
    """
    C = W.shape[0]
    flags = np.zeros(C, dtype=np.int64)
    for c in prange(C):
        bad = False
        for k in range(nverts[c]):
            f = cell_faces[c, k]
            s = 0 if cell_face_sign[c, k] > 0 else 1
            for g in range(2):
                if _unphysical(rec[f, s, g], gamma):
                    bad = True
        if bad:
            flags[c] = 1
            for k in range(nverts[c]):
                f = cell_faces[c, k]
                s = 0 if cell_face_sign[c, k] > 0 else 1
                for g in range(2):
                    for q in range(4):
                        rec[f, s, g, q] = W[c, q]
    return flags


@njit(cache=True)
def _hllc(qL, qR, nx, ny, gamma, out):
    """HLLC flux in the face frame, rotated back; returns ``True`` if a star state is unphysical."""
    rl = qL[0]
    ul = (qL[1] * nx + qL[2] * ny) / rl
    vl = (-qL[1] * ny + qL[2] * nx) / rl
    El = qL[3]
    pl = (gamma - 1.0) * (El - 0.5 * rl * (ul * ul + vl * vl))
    rr = qR[0]
    ur = (qR[1] * nx + qR[2] * ny) / rr
    vr = (-qR[1] * ny + qR[2] * nx) / rr
    Er = qR[3]
    pr = (gamma - 1.0) * (Er - 0.5 * rr * (ur * ur + vr * vr))
    cl = math.sqrt(gamma * pl / rl)
    cr = math.sqrt(gamma * pr / rr)
    sl = math.sqrt(rl)
    sr = math.sqrt(rr)
    w = sl + sr
    ut = (sl * ul + sr * ur) / w
    vt = (sl * vl + sr * vr) / w
    Ht = (sl * (El + pl) / rl + sr * (Er + pr) / rr) / w
    c2 = (gamma - 1.0) * (Ht - 0.5 * (ut * ut + vt * vt))
    ct = math.sqrt(c2) if c2 > 0.0 else 0.0
    SL = min(ul - cl, ut - ct)
    SR = max(ur + cr, ut + ct)
    SM = ((pr - pl + rl * ul * (SL - ul) - rr * ur * (SR - ur))
          / (rl * (SL - ul) - rr * (SR - ur)))
    f0 = 0.0
    f1 = 0.0
    f2 = 0.0
    f3 = 0.0
    bad = False
    if SL >= 0.0:
        f0 = rl * ul
        f1 = rl * ul * ul + pl
        f2 = rl * ul * vl
        f3 = (El + pl) * ul
    elif SR <= 0.0:
        f0 = rr * ur
        f1 = rr * ur * ur + pr
        f2 = rr * ur * vr
        f3 = (Er + pr) * ur
    elif SM >= 0.0:
        fac = rl * (SL - ul) / (SL - SM)
        ps = pl + rl * (SL - ul) * (SM - ul)
        if not (fac > 0.0 and ps > 0.0):
            bad = True
        e = fac * (El / rl + (SM - ul) * (SM + pl / (rl * (SL - ul))))
        f0 = rl * ul + SL * (fac - rl)
        f1 = rl * ul * ul + pl + SL * (fac * SM - rl * ul)
        f2 = rl * ul * vl + SL * (fac * vl - rl * vl)
        f3 = (El + pl) * ul + SL * (e - El)
    else:
        fac = rr * (SR - ur) / (SR - SM)
        ps = pr + rr * (SR - ur) * (SM - ur)
        if not (fac > 0.0 and ps > 0.0):
            bad = True
        e = fac * (Er / rr + (SM - ur) * (SM + pr / (rr * (SR - ur))))
        f0 = rr * ur + SR * (fac - rr)
        f1 = rr * ur * ur + pr + SR * (fac * SM - rr * ur)
        f2 = rr * ur * vr + SR * (fac * vr - rr * vr)
        f3 = (Er + pr) * ur + SR * (e - Er)
    out[0] = f0
    out[1] = f1 * nx - f2 * ny
    out[2] = f1 * ny + f2 * nx
    out[3] = f3
    return bad


@njit(cache=True)
def ghost_state(U, kind, nx, ny, x, y, t, prescribed, dmr_post, dmr_pre, out):
    if kind == BC_REFLECTIVE:
        mn = U[1] * nx + U[2] * ny
        out[0] = U[0]
        out[1] = U[1] - 2.0 * mn * nx
        out[2] = U[2] - 2.0 * mn * ny
        out[3] = U[3]
    elif kind == BC_PRESCRIBED:
        for q in range(4):
            out[q] = prescribed[q]
    elif kind == BC_DMR:
        xs = 1.0 / 6.0 + (y + 20.0 * t) / _SQRT3
        if x < xs:
            for q in range(4):
                out[q] = dmr_post[q]
        else:
            for q in range(4):
                out[q] = dmr_pre[q]
    else:
        for q in range(4):
            out[q] = U[q]


@njit(cache=True, parallel=True)
def face_fluxes(rec, face_cells, face_normal, face_length, face_gp, bc_kind, bc_state,
                dmr_post, dmr_pre, t, gamma):
    """Gauss-integrated HLLC flux through every face (left to right), ``(F, 4)``.

    Also returns a per-face count of unphysical intermediate states.
    """
    F = face_cells.shape[0]
    flux = np.zeros((F, 4))
    star_bad = np.zeros(F, dtype=np.int64)
    nchunk = (F + CHUNK - 1) // CHUNK
    for ch in prange(nchunk):
        ghost = np.empty(4)
        fg = np.empty(4)
        for f in range(ch * CHUNK, min(F, (ch + 1) * CHUNK)):
            nx = face_normal[f, 0]
            ny = face_normal[f, 1]
            for g in range(2):
                qL = rec[f, 0, g]
                if face_cells[f, 1] >= 0:
                    qR = rec[f, 1, g]
                else:
                    ghost_state(qL, bc_kind[f], nx, ny, face_gp[f, g, 0], face_gp[f, g, 1], t,
                                bc_state[f], dmr_post, dmr_pre, ghost)
                    qR = ghost
                if _hllc(qL, qR, nx, ny, gamma, fg):
                    star_bad[f] += 1
                for q in range(4):
                    flux[f, q] += 0.5 * face_length[f] * fg[q]
    return flux, star_bad


@njit(cache=True, parallel=True)
def gather_residual(flux, cell_faces, cell_face_sign, nverts, area):
    C = area.shape[0]
    res = np.zeros((C, 4))
    for c in prange(C):
        for k in range(nverts[c]):
            f = cell_faces[c, k]
            s = cell_face_sign[c, k]
            for q in range(4):
                res[c, q] -= s * flux[f, q]
        for q in range(4):
            res[c, q] /= area[c]
    return res
