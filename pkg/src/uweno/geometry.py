"""Polygon moments, the zero-mean quadratic basis and edge quadrature.

Moment vectors are always ordered ``(x, y, x**2, y**2, x*y)`` and hold
cell *averages* of the monomials, not integrals.
"""

from dataclasses import dataclass

import numpy as np

from .errors import GeometryError

SQRT3 = np.sqrt(3.0)
GAUSS_NEAR = (3.0 + SQRT3) / 6.0
GAUSS_FAR = (3.0 - SQRT3) / 6.0


@dataclass(frozen=True)
class CellMoments:
    mean_x: float
    mean_y: float
    mean_x2: float
    mean_y2: float
    mean_xy: float

    def as_array(self):
        return np.array([self.mean_x, self.mean_y, self.mean_x2, self.mean_y2, self.mean_xy])

    @classmethod
    def from_array(cls, m):
        return cls(*(float(v) for v in m))


@dataclass(frozen=True)
class EdgeQuadrature:
    points: np.ndarray  # (2, 2)
    weights: tuple
    length: float


def triangle_moments(a, b, c):
    """Signed area and exact monomial averages of triangles.

    ``a, b, c`` are ``(..., 2)`` vertex arrays. Returns ``(area, moments)`` with
    ``moments`` of shape ``(..., 5)``.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    c = np.asarray(c, dtype=float)
    area = 0.5 * ((b[..., 0] - a[..., 0]) * (c[..., 1] - a[..., 1])
                  - (c[..., 0] - a[..., 0]) * (b[..., 1] - a[..., 1]))
    xs = np.stack([a[..., 0], b[..., 0], c[..., 0]])
    ys = np.stack([a[..., 1], b[..., 1], c[..., 1]])
    sx = xs.sum(axis=0)
    sy = ys.sum(axis=0)
    m = np.stack([
        sx / 3.0,
        sy / 3.0,
        ((xs * xs).sum(axis=0) + sx * sx) / 12.0,
        ((ys * ys).sum(axis=0) + sy * sy) / 12.0,
        ((xs * ys).sum(axis=0) + sx * sy) / 12.0,
    ], axis=-1)
    return area, m


def polygon_moments(coords, nverts=None, split=0):
    """Area and monomial averages for a batch of triangles/quads.

    Parameters
    ----------
    coords : array_like, shape (n, 4, 2) or (4, 2) / (3, 2)
        Vertex coordinates, counter-clockwise. Triangles in a padded batch
        ignore the fourth slot.
    nverts : array_like of int, optional
        Vertex count per polygon (3 or 4). Inferred from the shape if omitted.
    split : {0, 1}
        Which diagonal splits a quad: 0 uses the diagonal from the first node,
        1 the one from the second node. Exact moments do not depend on it.

    Returns
    -------
    area : ndarray, shape (n,)
    moments : ndarray, shape (n, 5)
    """
    coords = np.asarray(coords, dtype=float)
    single = coords.ndim == 2
    if single:
        coords = coords[None]
    n, k = coords.shape[:2]
    if nverts is None:
        nverts = np.full(n, k)
    nverts = np.asarray(nverts)
    area, mom = triangle_moments(coords[:, 0], coords[:, 1], coords[:, 2])
    quad = nverts == 4
    if quad.any():
        q = coords[quad]
        if split == 0:
            t1 = triangle_moments(q[:, 0], q[:, 1], q[:, 2])
            t2 = triangle_moments(q[:, 0], q[:, 2], q[:, 3])
        else:
            t1 = triangle_moments(q[:, 1], q[:, 2], q[:, 3])
            t2 = triangle_moments(q[:, 1], q[:, 3], q[:, 0])
        qa = t1[0] + t2[0]
        safe = np.where(qa != 0.0, qa, 1.0)
        mom[quad] = (t1[0][:, None] * t1[1] + t2[0][:, None] * t2[1]) / safe[:, None]
        area[quad] = qa
    if single:
        return area[0], mom[0]
    return area, mom


def cell_moments(coords):
    """Exact averages of ``x, y, x^2, y^2, xy`` over one polygon."""
    area, m = polygon_moments(np.asarray(coords, dtype=float))
    if not area > 0.0:
        raise GeometryError(f"degenerate or inverted cell (signed area {area:.3e})")
    return CellMoments.from_array(m)


def translate_moments(m, shift):
    """Moments of a cell after translating it by ``shift``."""
    m = np.asarray(m, dtype=float)
    shift = np.asarray(shift, dtype=float)
    sx = shift[..., 0]
    sy = shift[..., 1]
    mx, my, mxx, myy, mxy = (m[..., i] for i in range(5))
    return np.stack([
        mx + sx,
        my + sy,
        mxx + 2.0 * sx * mx + sx * sx,
        myy + 2.0 * sy * my + sy * sy,
        mxy + sx * my + sy * mx + sx * sy,
    ], axis=-1)


def _as_moment_array(m):
    if isinstance(m, CellMoments):
        return m.as_array()
    return np.asarray(m, dtype=float)


def basis_eval(owner_moments, x, y):
    """Zero-mean quadratic basis ``p^1..p^5`` of the owner cell at ``(x, y)``."""
    m = _as_moment_array(owner_moments)
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    mono = np.stack(np.broadcast_arrays(x, y, x * x, y * y, x * y), axis=-1)
    return mono - m


def basis_cell_average(owner_moments, target_moments):
    """Average of the owner's basis functions over a target cell."""
    return _as_moment_array(target_moments) - _as_moment_array(owner_moments)


def edge_gauss(x1, x2):
    """Two-point Gauss rule on the segment ``x1 -> x2``."""
    x1 = np.asarray(x1, dtype=float)
    x2 = np.asarray(x2, dtype=float)
    length = float(np.hypot(*(x2 - x1)))
    if length <= 0.0:
        raise GeometryError("zero-length face")
    p1 = GAUSS_NEAR * x1 + GAUSS_FAR * x2
    p2 = GAUSS_NEAR * x2 + GAUSS_FAR * x1
    return EdgeQuadrature(points=np.array([p1, p2]), weights=(0.5, 0.5), length=length)


def edge_gauss_points(x1, x2):
    """Vectorised Gauss points for a batch of segments: ``(n, 2, 2)``."""
    x1 = np.asarray(x1, dtype=float)
    x2 = np.asarray(x2, dtype=float)
    return np.stack([GAUSS_NEAR * x1 + GAUSS_FAR * x2,
                     GAUSS_NEAR * x2 + GAUSS_FAR * x1], axis=-2)


# Degree-4 symmetric 6-point rule on the reference triangle (barycentric, weights sum to 1).
_TRI_Q4_A = (0.445948490915965, 0.091576213509771)
_TRI_Q4_W = (0.223381589678011, 0.109951743655322)


def _tri_rule():
    bary = []
    w = []
    for a, wt in zip(_TRI_Q4_A, _TRI_Q4_W):
        b = 1.0 - 2.0 * a
        bary += [(a, a, b), (a, b, a), (b, a, a)]
        w += [wt] * 3
    return np.array(bary), np.array(w)


TRI_BARY, TRI_WEIGHTS = _tri_rule()


def cell_average(mesh, func):
    """Cell averages of ``func(x, y)`` using degree-4 triangulated quadrature.

    ``func`` must accept coordinate arrays and return an array whose leading
    shape matches them (extra trailing axes allowed).
    """
    coords = mesh.nodes[np.where(mesh.cells >= 0, mesh.cells, 0)]
    tris = [(0, 1, 2)]
    if (mesh.nverts == 4).any():
        tris.append((0, 2, 3))
    total = None
    for t, (i, j, k) in enumerate(tris):
        a, b, c = coords[:, i], coords[:, j], coords[:, k]
        area, _ = triangle_moments(a, b, c)
        if t == 1:
            area = np.where(mesh.nverts == 4, area, 0.0)
        pts = (TRI_BARY[:, 0, None, None] * a + TRI_BARY[:, 1, None, None] * b
               + TRI_BARY[:, 2, None, None] * c)  # (6, n, 2)
        vals = np.asarray(func(pts[..., 0], pts[..., 1]), dtype=float)
        w = TRI_WEIGHTS.reshape((6,) + (1,) * (vals.ndim - 1))
        part = (w * vals).sum(axis=0)
        area_b = area.reshape(area.shape + (1,) * (part.ndim - 1))
        part = part * area_b
        total = part if total is None else total + part
    area_b = mesh.area.reshape(mesh.area.shape + (1,) * (total.ndim - 1))
    return total / area_b
