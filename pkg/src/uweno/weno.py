"""Third-order WENO reconstruction on triangle and quad stencils.

Everything that depends only on geometry is computed once by
:func:`precompute_tables`: the quadratic fit, the linear candidates, the
linear weights (raw and after the large-weight optimisation) and their
positive/negative split. At run time a field is reconstructed from its
cell averages with :func:`weno_reconstruct` (or the compiled kernel in
:mod:`uweno._kernels`, which follows the same arithmetic).

Geometry is handled in a frame centred on the owner cell's centroid. The
zero-mean basis spans the same space in any translated frame, so this
changes nothing but the conditioning of the fit.
"""

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateWeightsError
from .geometry import basis_eval, edge_gauss_points, translate_moments
from .mesh import select_stencil
from .smalldense import ZETA, ridge_batch, ridge_operator

THETA = 3.0
EPSILON = 1e-6
MAX_SUB = 12
MAX_GP = 8

# Non-owner members of each three-cell sub-stencil, as stencil positions.
QUAD_SUBSTENCILS = np.array([(1, 2), (2, 3), (3, 4), (4, 1), (1, 5), (1, 6),
                             (3, 7), (3, 8), (4, 9), (2, 10), (2, 11), (4, 12)])
TRI_SUBSTENCILS = np.array([(1, 2), (2, 3), (3, 1), (1, 4), (2, 5), (3, 6),
                            (3, 7), (1, 8), (2, 9)])
# Second-ring triangle slots whose optimisation weight is shared.
TRI_PAIRS = ((4, 8), (5, 9), (6, 7))


def substencils(kind):
    return QUAD_SUBSTENCILS if kind == "quad" else TRI_SUBSTENCILS


def effective_positions(exists, kind):
    """Stencil position whose cell actually sits in each slot.

    Absent slots point at their replacement: the owner for face neighbours
    and the first second-ring group, the paired slot (``j-4`` for quads,
    ``j-3`` for triangles) for the second group, followed transitively.
    """
    exists = np.asarray(exists)
    eff = np.broadcast_to(np.arange(exists.shape[-1]), exists.shape).copy()
    nface, first_hi, back = (4, 8, 4) if kind == "quad" else (3, 6, 3)
    for p in range(1, exists.shape[-1]):
        if p <= first_hi:
            repl = np.zeros_like(eff[..., p])
        else:
            repl = eff[..., p - back]
        eff[..., p] = np.where(exists[..., p] == 1, p, repl)
    return eff


# --------------------------------------------------------------------------- fits

def fit_matrix(local_moments, exists):
    """Rows ``A_jk = E_j * avg_{cell j} p^k`` for ``j = 1..M``."""
    m0 = local_moments[..., :1, :]
    return exists[..., 1:, None] * (local_moments[..., 1:, :] - m0)


def fit_quadratic(A, d=None, zeta=ZETA):
    """Operator mapping ``W_{i_j} - W_{i_0}`` (j = 1..M) to the coefficients ``a_1..a_5``."""
    return ridge_operator(A, zeta, d)


def compute_eta(fit_op, basis_at_point):
    """Point-value weights ``eta_0..eta_M`` of the quadratic at a Gauss point."""
    tail = np.einsum("...k,...km->...m", basis_at_point, fit_op)
    head = 1.0 - tail.sum(axis=-1, keepdims=True)
    return np.concatenate([head, tail], axis=-1)


def candidate_gradients(local_moments, cand_pos, zeta=ZETA):
    """Gradient operators of the linear candidates.

    Returns ``(..., M, 2, 2)``: entry ``[j, dir, k]`` multiplies
    ``W_{S_j,k+1} - W_{i_0}`` in the ``dir`` derivative of candidate ``j``.
    """
    centroids = local_moments[..., :2]
    offsets = _gather_positions(centroids, cand_pos) - centroids[..., :1, None, :]
    return ridge_operator(offsets, zeta)


def _gather_positions(arr, pos):
    """``arr[..., pos[..., j, k], :]`` for leading batch dims shared by both."""
    lead = arr.shape[:-2]
    flat = arr.reshape((-1,) + arr.shape[-2:])
    p = pos.reshape((flat.shape[0],) + pos.shape[-2:])
    rows = np.arange(flat.shape[0])[:, None, None]
    out = flat[rows, p]
    return out.reshape(lead + pos.shape[-2:] + arr.shape[-1:])


def candidate_rows(cand_grad, point_offset):
    """Point-value coefficients ``b_j0, b_j1, b_j2`` at a point.

    ``point_offset`` is the point minus the owner centroid.
    """
    b12 = np.einsum("...d,...jdk->...jk", point_offset, cand_grad)
    b0 = 1.0 - b12.sum(axis=-1, keepdims=True)
    return np.concatenate([b0, b12], axis=-1)


def assemble_B(rows, cand_pos, m):
    """Linear-weight matrix ``B`` with rows indexed by stencil position.

    ``rows`` is ``(n, G, M, 3)``, ``cand_pos`` ``(n, M, 2)``.
    """
    n, g = rows.shape[:2]
    B = np.zeros((n, g, m + 1, m))
    idx = np.arange(n)
    for j in range(m):
        B[:, :, 0, j] += rows[:, :, j, 0]
        for k in range(2):
            B[idx, :, cand_pos[:, j, k], j] += rows[:, :, j, k + 1]
    return B


def solve_linear_weights(B, eta, zeta=ZETA, normalize=True):
    """Least-squares weights ``gamma`` with ``B gamma ~= eta``.

    Returns ``(gamma, raw_sum)``; with ``normalize`` the weights are divided
    by their sum so they add up to one exactly.
    """
    gamma = ridge_batch(B, eta, zeta)
    total = gamma.sum(axis=-1)
    if normalize:
        gamma = gamma / total[..., None]
    return gamma, total


def optimization_weights(gamma, kind):
    """Row weights ``d_j`` of the re-weighted quadratic fit (j = 1..M)."""
    mag = np.abs(gamma)
    d = np.ones_like(gamma)
    if kind == "quad":
        d[..., 4:] = 1.0 / np.maximum(1.0, mag[..., 4:])
    else:
        for a, b in TRI_PAIRS:
            big = np.maximum(1.0, np.maximum(mag[..., a - 1], mag[..., b - 1]))
            d[..., a - 1] = 1.0 / big
            d[..., b - 1] = 1.0 / big
    return d


def split_weights(gamma, theta=THETA):
    """Split signed weights into two non-negative sets.

    Returns ``(gamma_plus, gamma_minus, sigma_plus, sigma_minus)`` with
    ``gamma = sigma_plus * gamma_plus - sigma_minus * gamma_minus``.
    """
    gamma = np.asarray(gamma, dtype=float)
    gp = 0.5 * (gamma + theta * np.abs(gamma))
    gm = gp - gamma
    sp = gp.sum(axis=-1)
    sm = gm.sum(axis=-1)
    return gp / sp[..., None], gm / sm[..., None], sp, sm


# --------------------------------------------------------------------------- nonlinear part

def smoothness_beta(grad, area):
    """Smoothness indicator of a linear polynomial: ``|cell| * |grad P|^2``."""
    grad = np.asarray(grad, dtype=float)
    return np.asarray(area) * (grad[..., 0] ** 2 + grad[..., 1] ** 2)


def beta_tilde(beta, weight):
    t = weight * beta
    return beta * (1.0 + t + t * t)


def nonlinear_weights(weight, beta_t, eps=EPSILON):
    alpha = weight / (beta_t + eps) ** 2
    return alpha / alpha.sum(axis=-1, keepdims=True)


def weno_reconstruct(values, beta, gplus, gminus, sigma_plus, sigma_minus, eps=EPSILON):
    """Nonlinear combination ``sigma+ sum d+ P - sigma- sum d- P``."""
    dp = nonlinear_weights(gplus, beta_tilde(beta, gplus), eps)
    dm = nonlinear_weights(gminus, beta_tilde(beta, gminus), eps)
    return (sigma_plus * (dp * values).sum(axis=-1)
            - sigma_minus * (dm * values).sum(axis=-1))


# --------------------------------------------------------------------------- tables

@dataclass(eq=False)
class ReconstructionTables:
    nsub: np.ndarray           # (C,)
    ngp: np.ndarray            # (C,) Gauss points per cell = 2 * faces
    stencil_ids: np.ndarray    # (C, 13)
    exists: np.ndarray         # (C, 13)
    stencil_shift: np.ndarray  # (C, 13, 2)
    cand: np.ndarray           # (C, 12, 2) cell ids of sub-stencil members besides the owner
    cand_pos: np.ndarray       # (C, 12, 2)
    cand_grad: np.ndarray      # (C, 12, 2, 2)
    gp_offset: np.ndarray      # (C, 8, 2) Gauss point minus owner centroid
    eta_raw: np.ndarray        # (C, 8, 13)
    eta: np.ndarray            # (C, 8, 13) after optimisation
    gamma_raw: np.ndarray      # (C, 8, 12)
    gamma: np.ndarray          # (C, 8, 12) after optimisation
    gamma_sum_raw: np.ndarray  # (C, 8) sums before normalisation
    gamma_sum: np.ndarray
    d: np.ndarray              # (C, 8, 12)
    gplus: np.ndarray          # (C, 8, 12)
    gminus: np.ndarray
    sigma_plus: np.ndarray     # (C, 8)
    sigma_minus: np.ndarray
    area: np.ndarray
    theta: float
    zeta: float

    def full_stencil(self):
        """Cells whose stencil has every member present."""
        m = self.nsub
        ok = np.ones(len(m), dtype=bool)
        for c in range(len(m)):
            ok[c] = bool(self.exists[c, :m[c] + 1].all())
        return ok

    def interior_stencil(self):
        """Cells whose face neighbours all exist (second ring may be replaced)."""
        nface = np.where(self.nsub == 12, 4, 3)
        ok = np.ones(len(nface), dtype=bool)
        for c in range(len(nface)):
            ok[c] = bool(self.exists[c, 1:nface[c] + 1].all())
        return ok


def gauss_points(mesh):
    """Face Gauss points ``(F, 2, 2)`` in each face's left-cell frame."""
    return edge_gauss_points(mesh.nodes[mesh.face_nodes[:, 0]], mesh.nodes[mesh.face_nodes[:, 1]])


def cell_gauss_offsets(mesh, cells=None):
    """Gauss points of every cell face relative to the cell centroid, ``(n, 8, 2)``."""
    if cells is None:
        cells = np.arange(mesh.n_cells)
    gp = gauss_points(mesh)
    out = np.zeros((len(cells), MAX_GP, 2))
    for k in range(4):
        f = mesh.cell_faces[cells, k]
        have = f >= 0
        fsafe = np.maximum(f, 0)
        pts = gp[fsafe]  # (n, 2, 2)
        right = mesh.cell_face_sign[cells, k] < 0
        pts = pts - np.where(right, 1.0, 0.0)[:, None, None] * mesh.face_shift[fsafe][:, None, :]
        pts = pts - mesh.centroid[cells][:, None, :]
        out[:, 2 * k:2 * k + 2] = np.where(have[:, None, None], pts, 0.0)
    return out


def build_stencils(mesh, cells=None):
    if cells is None:
        cells = np.arange(mesh.n_cells)
    n = len(cells)
    ids = np.zeros((n, 13), dtype=np.int64)
    exists = np.zeros((n, 13), dtype=np.int64)
    shifts = np.zeros((n, 13, 2))
    for r, c in enumerate(cells):
        st = select_stencil(mesh, c, allow_boundary=True)
        m = st.size + 1
        ids[r, :m] = st.ids
        ids[r, m:] = c
        exists[r, :m] = st.exists
        shifts[r, :m] = st.shifts
    return ids, exists, shifts


def local_moments(mesh, cells, ids, shifts):
    """Stencil member moments in the owner-centred frame, ``(n, M+1, 5)``."""
    offset = shifts - mesh.centroid[cells][:, None, :]
    return translate_moments(mesh.moments[ids], offset)


def _process_group(mesh, cells, kind, theta, zeta, out, chunk=2048):
    m = 12 if kind == "quad" else 9
    ng = 8 if kind == "quad" else 6
    subs = substencils(kind)
    for start in range(0, len(cells), chunk):
        cs = cells[start:start + chunk]
        n = len(cs)
        ids, exists, shifts = build_stencils(mesh, cs)
        ids, exists, shifts = ids[:, :m + 1], exists[:, :m + 1], shifts[:, :m + 1]
        tm = local_moments(mesh, cs, ids, shifts)
        m0 = tm[:, 0]
        eff = effective_positions(exists, kind)
        cand_pos = np.take_along_axis(eff, subs.reshape(1, -1), axis=1).reshape(n, m, 2)

        A = fit_matrix(tm, exists.astype(float))
        offs = cell_gauss_offsets(mesh, cs)[:, :ng]
        pG = basis_eval(m0[:, None, :], offs[..., 0], offs[..., 1])

        X0 = fit_quadratic(A, zeta=zeta)
        eta_raw = compute_eta(X0[:, None], pG)

        Gc = candidate_gradients(tm, cand_pos, zeta)
        rel = offs - m0[:, None, :2]
        rows = candidate_rows(Gc[:, None], rel)
        B = assemble_B(rows, cand_pos, m)

        gamma_raw, sum_raw = solve_linear_weights(B, eta_raw, zeta)
        d = optimization_weights(gamma_raw, kind)
        A_g = np.broadcast_to(A[:, None], (n, ng) + A.shape[1:])
        X1 = fit_quadratic(A_g, d, zeta)
        eta = compute_eta(X1, pG)
        gamma, total = solve_linear_weights(B, eta, zeta)
        for arr, name in ((sum_raw, "raw"), (total, "optimised")):
            bad = np.argwhere(np.abs(arr) < 1e-8)
            if len(bad):
                r, g = bad[0]
                raise DegenerateWeightsError(int(cs[r]), int(g), float(arr[r, g]))
        gp, gm, sp, sm = split_weights(gamma, theta)

        sl = slice(start, start + n)
        idx = cells[sl]
        out["stencil_ids"][idx, :m + 1] = ids
        out["stencil_ids"][idx, m + 1:] = idx[:, None]
        out["exists"][idx, :m + 1] = exists
        out["stencil_shift"][idx, :m + 1] = shifts
        out["cand_pos"][idx, :m] = cand_pos
        out["cand"][idx, :m] = np.take_along_axis(ids, cand_pos.reshape(n, -1), axis=1).reshape(n, m, 2)
        out["cand_grad"][idx, :m] = Gc
        out["gp_offset"][idx, :ng] = rel
        out["eta_raw"][idx, :ng, :m + 1] = eta_raw
        out["eta"][idx, :ng, :m + 1] = eta
        out["gamma_raw"][idx, :ng, :m] = gamma_raw
        out["gamma"][idx, :ng, :m] = gamma
        out["gamma_sum_raw"][idx, :ng] = sum_raw
        out["gamma_sum"][idx, :ng] = total
        out["d"][idx, :ng, :m] = d
        out["gplus"][idx, :ng, :m] = gp
        out["gminus"][idx, :ng, :m] = gm
        out["sigma_plus"][idx, :ng] = sp
        out["sigma_minus"][idx, :ng] = sm


def precompute_tables(mesh, theta=THETA, zeta=ZETA):
    """Geometry-only reconstruction data for every cell and Gauss point.

    Boundary cells of non-periodic meshes get absent face neighbours
    (flag 0, replaced by the owner) so the same machinery applies.
    """
    C = mesh.n_cells
    out = {
        "stencil_ids": np.zeros((C, 13), dtype=np.int64),
        "exists": np.zeros((C, 13), dtype=np.int64),
        "stencil_shift": np.zeros((C, 13, 2)),
        "cand": np.zeros((C, MAX_SUB, 2), dtype=np.int64),
        "cand_pos": np.zeros((C, MAX_SUB, 2), dtype=np.int64),
        "cand_grad": np.zeros((C, MAX_SUB, 2, 2)),
        "gp_offset": np.zeros((C, MAX_GP, 2)),
        "eta_raw": np.zeros((C, MAX_GP, 13)),
        "eta": np.zeros((C, MAX_GP, 13)),
        "gamma_raw": np.zeros((C, MAX_GP, MAX_SUB)),
        "gamma": np.zeros((C, MAX_GP, MAX_SUB)),
        "gamma_sum_raw": np.zeros((C, MAX_GP)),
        "gamma_sum": np.zeros((C, MAX_GP)),
        "d": np.zeros((C, MAX_GP, MAX_SUB)),
        "gplus": np.zeros((C, MAX_GP, MAX_SUB)),
        "gminus": np.zeros((C, MAX_GP, MAX_SUB)),
        "sigma_plus": np.zeros((C, MAX_GP)),
        "sigma_minus": np.zeros((C, MAX_GP)),
    }
    out["cand"][:] = np.arange(C)[:, None, None]
    for kind, nv in (("quad", 4), ("tri", 3)):
        cells = np.flatnonzero(mesh.nverts == nv)
        if len(cells):
            _process_group(mesh, cells, kind, theta, zeta, out)
    nsub = np.where(mesh.nverts == 4, 12, 9)
    return ReconstructionTables(nsub=nsub, ngp=2 * mesh.nverts, area=mesh.area.copy(),
                                theta=theta, zeta=zeta, **out)


# --------------------------------------------------------------------------- evaluation

def candidate_gradient_values(tables, W):
    """Candidate gradients for cell-average data ``W`` of shape ``(C,)`` or ``(C, nvar)``.

    Returns ``(C, 12, 2)`` or ``(C, 12, 2, nvar)``.
    """
    W = np.asarray(W, dtype=float)
    dW = W[tables.cand] - W[:, None, None]  # (C, 12, 2[, nvar])
    return np.einsum("cjdk,cjk...->cjd...", tables.cand_grad, dW)


def candidate_values(tables, W):
    """Candidate point values at every Gauss point, ``(C, 8, 12[, nvar])``."""
    W = np.asarray(W, dtype=float)
    grad = candidate_gradient_values(tables, W)
    vals = np.einsum("cgd,cjd...->cgj...", tables.gp_offset, grad)
    return vals + W[:, None, None]


def reconstruct_linear(tables, W):
    """Linear-weight reconstruction ``sum gamma_j P_j`` at every Gauss point."""
    vals = candidate_values(tables, W)
    return np.einsum("cgj,cgj...->cg...", tables.gamma, vals)


def reconstruct_quadratic(tables, W):
    """Point values of the (optimised) quadratic fit via ``eta``."""
    W = np.asarray(W, dtype=float)
    return np.einsum("cgm,cm...->cg...", tables.eta, W[tables.stencil_ids])


def reconstruct_all(tables, W, eps=EPSILON):
    """Nonlinear WENO values for a scalar field at every cell Gauss point, ``(C, 8)``."""
    W = np.asarray(W, dtype=float)
    grad = candidate_gradient_values(tables, W)
    vals = np.einsum("cgd,cjd->cgj", tables.gp_offset, grad) + W[:, None, None]
    beta = smoothness_beta(grad, tables.area[:, None])[:, None, :]
    mask = np.arange(MAX_SUB)[None, :] < tables.nsub[:, None]
    beta = np.where(mask[:, None, :], beta, 0.0)
    with np.errstate(invalid="ignore", divide="ignore"):
        out = weno_reconstruct(vals, beta, tables.gplus, tables.gminus,
                               tables.sigma_plus, tables.sigma_minus, eps)
    valid = np.arange(MAX_GP)[None, :] < tables.ngp[:, None]
    return np.where(valid, out, 0.0)


def reconstruct_point(tables, W, cell, gauss_point, eps=EPSILON):
    """Nonlinear reconstruction of a scalar field at one Gauss point of one cell."""
    W = np.asarray(W, dtype=float)
    m = tables.nsub[cell]
    dW = W[tables.cand[cell, :m]] - W[cell]
    grad = np.einsum("jdk,jk->jd", tables.cand_grad[cell, :m], dW)
    vals = W[cell] + grad @ tables.gp_offset[cell, gauss_point]
    beta = smoothness_beta(grad, tables.area[cell])
    g = gauss_point
    return float(weno_reconstruct(vals, beta, tables.gplus[cell, g, :m], tables.gminus[cell, g, :m],
                                  tables.sigma_plus[cell, g], tables.sigma_minus[cell, g], eps))
