"""Unstructured triangle/quad meshes, stencil selection and mesh files.

Cells are stored as a ``(C, 4)`` node table padded with ``-1`` for
triangles; local face ``k`` of a cell runs from local node ``k`` to node
``k + 1``. Faces carry an outward normal relative to their left cell. On
periodic meshes a face may join cells on opposite sides of the domain; the
right cell then lives at ``coords + face_shift`` in the left cell's frame.
"""

from dataclasses import dataclass, field
import io

import numpy as np

from .errors import GeometryError, MeshError, MeshParseError, StencilError
from .geometry import polygon_moments

QUAD_STENCIL = 12
TRI_STENCIL = 9


@dataclass(eq=False)
class Mesh:
    nodes: np.ndarray            # (N, 2)
    cells: np.ndarray            # (C, 4), -1 padded
    nverts: np.ndarray           # (C,)
    area: np.ndarray             # (C,)
    centroid: np.ndarray         # (C, 2)
    moments: np.ndarray          # (C, 5)
    face_nodes: np.ndarray       # (F, 2), oriented counter-clockwise w.r.t. the left cell
    face_cells: np.ndarray       # (F, 2), right = -1 on boundary faces
    face_local: np.ndarray       # (F, 2), local face index inside left/right cell
    face_normal: np.ndarray      # (F, 2)
    face_length: np.ndarray      # (F,)
    face_shift: np.ndarray       # (F, 2)
    face_tag: np.ndarray         # (F,), -1 for interior faces
    cell_faces: np.ndarray       # (C, 4), -1 padded
    cell_face_sign: np.ndarray   # (C, 4), +1 if the cell is the face's left cell
    cell_neighbors: np.ndarray   # (C, 4), -1 across boundary faces
    cell_neighbor_shift: np.ndarray  # (C, 4, 2)
    tag_names: list = field(default_factory=list)
    h: float = None
    periodic: tuple = (None, None)
    amplitude: float = 0.0

    @property
    def n_cells(self):
        return len(self.cells)

    @property
    def n_faces(self):
        return len(self.face_nodes)

    @property
    def boundary_faces(self):
        return np.flatnonzero(self.face_cells[:, 1] < 0)

    def face_midpoints(self):
        return 0.5 * (self.nodes[self.face_nodes[:, 0]] + self.nodes[self.face_nodes[:, 1]])

    def perimeter(self):
        lengths = np.where(self.cell_faces >= 0, self.face_length[self.cell_faces], 0.0)
        return lengths.sum(axis=1)

    def cell_normals(self):
        """Outward unit normals per (cell, local face); zeros in padded slots."""
        n = self.face_normal[np.maximum(self.cell_faces, 0)] * self.cell_face_sign[..., None]
        return np.where(self.cell_faces[..., None] >= 0, n, 0.0)

    def tag_id(self, name):
        return self.tag_names.index(name)


def _pad_cells(cells):
    if isinstance(cells, np.ndarray) and cells.ndim == 2:
        out = np.full((len(cells), 4), -1, dtype=np.int64)
        out[:, :cells.shape[1]] = cells
        return out
    out = np.full((len(cells), 4), -1, dtype=np.int64)
    for i, c in enumerate(cells):
        if len(c) not in (3, 4):
            raise MeshError(f"cell {i} has {len(c)} nodes; only triangles and quads are supported")
        out[i, :len(c)] = c
    return out


def build_connectivity(nodes, cells, boundary_tags=None, periodic=None, h=None):
    """Assemble faces, normals and neighbour tables.

    Parameters
    ----------
    nodes : array_like, (N, 2)
    cells : sequence of node-id sequences (3 or 4 entries, counter-clockwise)
        or an ``(C, 4)`` array padded with -1.
    boundary_tags : dict, optional
        Maps ``frozenset({n1, n2})`` to a tag name for boundary faces.
        Untagged boundary faces get the tag ``"boundary"``.
    periodic : (float or None, float or None), optional
        Domain lengths along x and y to wrap. Boundary faces on opposite
        sides are merged into interior faces.
    h : float, optional
        Nominal mesh size, kept for time-step control.
    """
    nodes = np.ascontiguousarray(nodes, dtype=float)
    if not np.isfinite(nodes).all():
        raise GeometryError("non-finite node coordinates")
    cells = _pad_cells(cells)
    nverts = (cells >= 0).sum(axis=1)
    if cells.size and (cells.max() >= len(nodes) or (cells[cells >= 0] < 0).any()):
        raise MeshError("cell references a node id outside the mesh")
    for i in range(len(cells)):
        if nverts[i] < 3 or (cells[i, :nverts[i]] < 0).any():
            raise MeshError(f"cell {i} has an invalid node list")

    coords = nodes[np.maximum(cells, 0)]
    area, moments = polygon_moments(coords, nverts)
    bad = np.flatnonzero(~(area > 0.0))
    if len(bad):
        raise GeometryError(f"cell {bad[0]} has non-positive signed area {area[bad[0]]:.3e}")
    if (nverts == 4).any():
        q = np.flatnonzero(nverts == 4)
        a1, _ = polygon_moments(coords[q, :3])
        a2, _ = polygon_moments(coords[q][:, [0, 2, 3]])
        inv = q[(a1 <= 0.0) | (a2 <= 0.0)]
        if len(inv):
            raise GeometryError(f"quadrilateral cell {inv[0]} is inverted")

    # enumerate faces by node pair, in cell order
    owners = {}
    order = []
    for c in range(len(cells)):
        nv = nverts[c]
        for k in range(nv):
            a = int(cells[c, k])
            b = int(cells[c, (k + 1) % nv])
            key = (a, b) if a < b else (b, a)
            if key not in owners:
                owners[key] = []
                order.append(key)
            owners[key].append((c, k))
            if len(owners[key]) > 2:
                raise MeshError(f"face {key} is shared by more than two cells")

    nf = len(order)
    face_cells = np.full((nf, 2), -1, dtype=np.int64)
    face_local = np.full((nf, 2), -1, dtype=np.int64)
    face_nodes = np.empty((nf, 2), dtype=np.int64)
    for f, key in enumerate(order):
        own = owners[key]
        (c0, k0) = own[0]
        face_cells[f, 0] = c0
        face_local[f, 0] = k0
        nv = nverts[c0]
        face_nodes[f] = (cells[c0, k0], cells[c0, (k0 + 1) % nv])
        if len(own) == 2:
            face_cells[f, 1], face_local[f, 1] = own[1]
    face_shift = np.zeros((nf, 2))

    keep = np.ones(nf, dtype=bool)
    if periodic is not None and any(p is not None for p in periodic):
        _wrap_periodic(nodes, face_nodes, face_cells, face_local, face_shift, keep, periodic)

    face_nodes = face_nodes[keep]
    face_cells = face_cells[keep]
    face_local = face_local[keep]
    face_shift = face_shift[keep]
    nf = len(face_nodes)

    d = nodes[face_nodes[:, 1]] - nodes[face_nodes[:, 0]]
    length = np.hypot(d[:, 0], d[:, 1])
    if (length <= 0.0).any():
        raise GeometryError("zero-length face")
    normal = np.stack([d[:, 1], -d[:, 0]], axis=1) / length[:, None]

    cell_faces = np.full((len(cells), 4), -1, dtype=np.int64)
    cell_sign = np.zeros((len(cells), 4))
    cell_nb = np.full((len(cells), 4), -1, dtype=np.int64)
    cell_nb_shift = np.zeros((len(cells), 4, 2))
    for f in range(nf):
        for side in (0, 1):
            c = face_cells[f, side]
            if c < 0:
                continue
            k = face_local[f, side]
            cell_faces[c, k] = f
            cell_sign[c, k] = 1.0 if side == 0 else -1.0
            other = face_cells[f, 1 - side]
            cell_nb[c, k] = other
            cell_nb_shift[c, k] = face_shift[f] if side == 0 else -face_shift[f]

    tag_names = []
    face_tag = np.full(nf, -1, dtype=np.int64)
    boundary_tags = boundary_tags or {}
    for f in np.flatnonzero(face_cells[:, 1] < 0):
        name = boundary_tags.get(frozenset(int(v) for v in face_nodes[f]), "boundary")
        if name not in tag_names:
            tag_names.append(name)
        face_tag[f] = tag_names.index(name)

    if periodic is None:
        periodic = (None, None)
    return Mesh(
        nodes=nodes, cells=cells, nverts=nverts, area=area,
        centroid=moments[:, :2].copy(), moments=moments,
        face_nodes=face_nodes, face_cells=face_cells, face_local=face_local,
        face_normal=normal, face_length=length, face_shift=face_shift, face_tag=face_tag,
        cell_faces=cell_faces, cell_face_sign=cell_sign, cell_neighbors=cell_nb,
        cell_neighbor_shift=cell_nb_shift, tag_names=tag_names, h=h,
        periodic=tuple(periodic),
    )


def _wrap_periodic(nodes, face_nodes, face_cells, face_local, face_shift, keep, periodic):
    lo = nodes.min(axis=0)
    hi = nodes.max(axis=0)
    bnd = np.flatnonzero(face_cells[:, 1] < 0)
    p0 = nodes[face_nodes[bnd, 0]]
    p1 = nodes[face_nodes[bnd, 1]]
    mid = 0.5 * (p0 + p1)
    scale = max(hi - lo)
    tol = 1e-9 * scale
    for axis, length in enumerate(periodic):
        if length is None:
            continue
        other = 1 - axis
        if abs((hi[axis] - lo[axis]) - length) > 1e-9 * scale:
            raise MeshError(f"periodic length {length} does not match the mesh extent")
        on_lo = (np.abs(p0[:, axis] - lo[axis]) < tol) & (np.abs(p1[:, axis] - lo[axis]) < tol)
        on_hi = (np.abs(p0[:, axis] - hi[axis]) < tol) & (np.abs(p1[:, axis] - hi[axis]) < tol)
        lo_faces = bnd[on_lo]
        hi_faces = bnd[on_hi]
        if len(lo_faces) != len(hi_faces):
            raise MeshError("periodic sides have different face counts")
        lo_key = np.round(mid[on_lo, other] / tol).astype(np.int64)
        hi_key = np.round(mid[on_hi, other] / tol).astype(np.int64)
        hi_lookup = {k: f for k, f in zip(hi_key, hi_faces)}
        for k, f in zip(lo_key, lo_faces):
            g = hi_lookup.get(k)
            if g is None:
                # tolerate rounding at bucket edges
                g = hi_lookup.get(k + 1, hi_lookup.get(k - 1))
            if g is None:
                raise MeshError("periodic sides do not match")
            face_cells[f, 1] = face_cells[g, 0]
            face_local[f, 1] = face_local[g, 0]
            face_shift[f, axis] = -length
            keep[g] = False


# --------------------------------------------------------------------------- stencils

@dataclass(frozen=True)
class Stencil:
    owner: int
    ids: np.ndarray      # (M + 1,), position 0 is the owner; replacement ids where absent
    exists: np.ndarray   # (M + 1,) of {0, 1}
    shifts: np.ndarray   # (M + 1, 2): offset placing each member in the owner's frame
    kind: str

    @property
    def size(self):
        return len(self.ids) - 1


def _local_face_of(mesh, cell, face):
    row = mesh.cell_faces[cell]
    for k in range(mesh.nverts[cell]):
        if row[k] == face:
            return k
    raise MeshError(f"face {face} is not a face of cell {cell}")


def _side_neighbor(mesh, parent, via_face, toward):
    """Neighbour of ``parent`` across the face adjacent to ``via_face``.

    ``toward=+1`` picks the face that follows the shared face in the
    parent's counter-clockwise order (it touches the shared face's start
    vertex as seen from the owner); ``-1`` the preceding one.
    """
    s = _local_face_of(mesh, parent, via_face)
    nv = mesh.nverts[parent]
    k = (s + toward) % nv
    return mesh.cell_neighbors[parent, k], mesh.cell_neighbor_shift[parent, k]


# (parent face-neighbour position, direction) for each second-ring slot, in
# the order the selection procedure reads them.
_QUAD_RING = {5: (1, +1), 6: (1, -1), 7: (3, +1), 8: (3, -1),
              10: (2, +1), 11: (2, -1), 9: (4, -1), 12: (4, +1)}
_TRI_RING = {4: (1, +1), 5: (2, +1), 6: (3, +1), 7: (3, -1), 8: (1, -1), 9: (2, -1)}


def _select(mesh, i0, n_face, ring, fallback, allow_boundary):
    nv = mesh.nverts[i0]
    if nv != n_face:
        raise StencilError(f"cell {i0} has {nv} nodes, expected {n_face}")
    m = len(ring) + n_face
    ids = np.full(m + 1, i0, dtype=np.int64)
    exists = np.zeros(m + 1, dtype=np.int64)
    shifts = np.zeros((m + 1, 2))
    via = np.full(m + 1, -1, dtype=np.int64)
    exists[0] = 1
    start = int(np.argmin(np.where(mesh.cell_faces[i0, :nv] >= 0,
                                   mesh.cell_faces[i0, :nv], np.iinfo(np.int64).max)))
    for j in range(1, n_face + 1):
        k = (start + j - 1) % nv
        nb = mesh.cell_neighbors[i0, k]
        via[j] = mesh.cell_faces[i0, k]
        if nb < 0:
            if not allow_boundary:
                raise StencilError(f"cell {i0} lacks face neighbour {j}")
            continue
        ids[j] = nb
        exists[j] = 1
        shifts[j] = mesh.cell_neighbor_shift[i0, k]
    chosen = {i0} | {int(ids[j]) for j in range(1, n_face + 1) if exists[j]}
    for j, (parent, toward) in ring.items():
        cand = -1
        if exists[parent]:
            cand, sh = _side_neighbor(mesh, ids[parent], via[parent], toward)
        if cand >= 0 and int(cand) not in chosen:
            ids[j] = cand
            exists[j] = 1
            shifts[j] = shifts[parent] + sh
            chosen.add(int(cand))
        else:
            r = fallback(j)
            ids[j] = ids[r]
            shifts[j] = shifts[r]
    return ids, exists, shifts


def select_stencil_quad(mesh, i0, allow_boundary=False):
    """Twelve-neighbour stencil of a quadrilateral cell.

    Face neighbours ``i1..i4`` run counter-clockwise from the cell's
    lowest-numbered face. The second ring is read per vertex of ``i0``:
    ``i5``/``i9`` sit at the vertex shared by ``i1`` and ``i4``, ``i6``/``i10``
    at ``i1``/``i2``, ``i7``/``i11`` at ``i2``/``i3`` and ``i8``/``i12`` at
    ``i3``/``i4``. Absent (or duplicate) cells get ``E_j = 0`` and are
    replaced by ``i0`` for ``j = 5..8`` and by ``i_{j-4}`` for ``j = 9..12``.

    With ``allow_boundary`` a missing face neighbour is flagged absent and
    replaced by ``i0`` instead of raising.
    """
    ids, exists, shifts = _select(mesh, i0, 4, _QUAD_RING,
                                  lambda j: 0 if j <= 8 else j - 4, allow_boundary)
    return Stencil(int(i0), ids, exists, shifts, "quad")


def select_stencil_tri(mesh, i0, allow_boundary=False):
    """Nine-neighbour stencil of a triangular cell.

    ``i4, i8`` are the other neighbours of ``i1``, ``i5, i9`` of ``i2`` and
    ``i6, i7`` of ``i3``; ``i7`` pairs with ``i4`` at the vertex shared by
    ``i3`` and ``i1`` (likewise ``i8``/``i5`` and ``i9``/``i6``). Absent cells
    are replaced by ``i0`` for ``j = 4..6`` and by ``i_{j-3}`` for ``j = 7..9``.
    """
    ids, exists, shifts = _select(mesh, i0, 3, _TRI_RING,
                                  lambda j: 0 if j <= 6 else j - 3, allow_boundary)
    return Stencil(int(i0), ids, exists, shifts, "tri")


def select_stencil(mesh, i0, allow_boundary=False):
    if mesh.nverts[i0] == 4:
        return select_stencil_quad(mesh, i0, allow_boundary)
    return select_stencil_tri(mesh, i0, allow_boundary)


# --------------------------------------------------------------------------- generation

MESH_KINDS = ("regular-quad", "perturbed-quad", "regular-tri", "perturbed-tri")


def normalize_kind(kind):
    parts = kind.lower().replace("_", "-").split("-")
    if len(parts) == 2 and parts[0] in ("quad", "tri"):
        parts = parts[::-1]
    name = "-".join(parts)
    aliases = {"irregular-quad": "perturbed-quad", "irregular-tri": "perturbed-tri"}
    name = aliases.get(name, name)
    if name not in MESH_KINDS:
        raise ValueError(f"unknown mesh kind {kind!r}; expected one of {', '.join(MESH_KINDS)}")
    return name


def _grid(nx, ny, domain):
    x0, x1, y0, y1 = domain
    xs = np.linspace(x0, x1, nx + 1)
    ys = np.linspace(y0, y1, ny + 1)
    X, Y = np.meshgrid(xs, ys, indexing="xy")
    nodes = np.stack([X.ravel(), Y.ravel()], axis=1)
    nid = np.arange((nx + 1) * (ny + 1)).reshape(ny + 1, nx + 1)
    return nodes, nid


def _side_tags(nodes, cells, domain):
    x0, x1, y0, y1 = domain
    scale = max(x1 - x0, y1 - y0)
    tol = 1e-9 * scale
    tags = {}
    for c in cells:
        nv = len(c)
        for k in range(nv):
            a, b = c[k], c[(k + 1) % nv]
            pa, pb = nodes[a], nodes[b]
            for name, axis, val in (("left", 0, x0), ("right", 0, x1),
                                    ("bottom", 1, y0), ("top", 1, y1)):
                if abs(pa[axis] - val) < tol and abs(pb[axis] - val) < tol:
                    tags[frozenset((int(a), int(b)))] = name
    return tags


def _cells_for(kind, nx, ny, nid):
    cells = []
    for j in range(ny):
        for i in range(nx):
            a, b = nid[j, i], nid[j, i + 1]
            c, d = nid[j + 1, i + 1], nid[j + 1, i]
            if kind.endswith("quad"):
                cells.append((a, b, c, d))
            elif (i + j) % 2 == 0:
                cells.append((a, b, c))
                cells.append((a, c, d))
            else:
                cells.append((a, b, d))
                cells.append((b, c, d))
    return np.array(cells, dtype=np.int64)


def generate_mesh(kind, nx, ny, domain=(0.0, 1.0, 0.0, 1.0), perturb_amplitude=None,
                  seed=0, periodic=(False, False)):
    """Structured-topology mesh on a rectangle.

    ``regular-*`` meshes are uniform; ``perturbed-*`` meshes move every
    interior node by a uniform offset in ``[-a h, a h]^2`` drawn from
    ``numpy.random.default_rng(seed)``. If the draw inverts a cell the same
    offsets are retried at half the amplitude, up to five times.
    Triangles split each square along alternating diagonals.
    """
    kind = normalize_kind(kind)
    if nx < 2 or ny < 2:
        raise ValueError("nx and ny must be at least 2")
    if perturb_amplitude is None:
        perturb_amplitude = 0.3 if kind.startswith("perturbed") else 0.0
    if not 0.0 <= perturb_amplitude <= 0.4:
        raise ValueError("perturbation amplitude must lie in [0, 0.4]")
    if kind.startswith("regular"):
        perturb_amplitude = 0.0
    x0, x1, y0, y1 = domain
    nodes, nid = _grid(nx, ny, domain)
    h = max((x1 - x0) / nx, (y1 - y0) / ny)
    cells = _cells_for(kind, nx, ny, nid)
    tags = _side_tags(nodes, cells, domain)
    per = (x1 - x0 if periodic[0] else None, y1 - y0 if periodic[1] else None)

    if perturb_amplitude == 0.0:
        return build_connectivity(nodes, cells, tags, per, h=h)

    rng = np.random.default_rng(seed)
    offsets = rng.uniform(-1.0, 1.0, size=nodes.shape) * h
    interior = np.zeros(len(nodes), dtype=bool)
    interior[nid[1:-1, 1:-1].ravel()] = True
    offsets[~interior] = 0.0
    amp = perturb_amplitude
    for _ in range(6):
        try:
            mesh = build_connectivity(nodes + amp * offsets, cells, tags, per, h=h)
        except GeometryError:
            amp *= 0.5
            continue
        mesh.amplitude = amp
        return mesh
    raise GeometryError("perturbation keeps inverting cells after 5 retries")


# --------------------------------------------------------------------------- file I/O

def write_mesh(mesh, path_or_file):
    """Write the plain-text ``umesh 1`` format (1-based ids)."""
    buf = io.StringIO()
    buf.write("umesh 1\n")
    buf.write(f"nodes {len(mesh.nodes)}\n")
    for i, (x, y) in enumerate(mesh.nodes):
        buf.write(f"{i + 1} {float(x)!r} {float(y)!r}\n")
    buf.write(f"cells {mesh.n_cells}\n")
    for i in range(mesh.n_cells):
        nv = mesh.nverts[i]
        ids = " ".join(str(int(v) + 1) for v in mesh.cells[i, :nv])
        buf.write(f"{i + 1} {nv} {ids}\n")
    for f in mesh.boundary_faces:
        name = mesh.tag_names[mesh.face_tag[f]]
        a, b = mesh.face_nodes[f]
        buf.write(f"boundary {name} {a + 1} {b + 1}\n")
    text = buf.getvalue()
    if hasattr(path_or_file, "write"):
        path_or_file.write(text)
    else:
        with open(path_or_file, "w", newline="\n") as fh:
            fh.write(text)


def _parse_float(tok, lineno):
    try:
        return float(tok)
    except ValueError:
        raise MeshParseError(f"expected a number, got {tok!r}", lineno) from None


def _parse_int(tok, lineno):
    try:
        return int(tok)
    except ValueError:
        raise MeshParseError(f"expected an integer, got {tok!r}", lineno) from None


def parse_mesh(text):
    """Parse mesh text into ``(nodes, cells, boundary_tags)``."""
    lines = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if line:
            lines.append((lineno, line.split()))
    it = iter(lines)

    def take(what):
        try:
            return next(it)
        except StopIteration:
            raise MeshParseError(f"unexpected end of file, expected {what}") from None

    lineno, tok = take("header")
    if tok != ["umesh", "1"]:
        raise MeshParseError("expected header 'umesh 1'", lineno)
    lineno, tok = take("'nodes N'")
    if len(tok) != 2 or tok[0] != "nodes":
        raise MeshParseError("expected 'nodes N'", lineno)
    n = _parse_int(tok[1], lineno)
    nodes = np.empty((n, 2))
    for i in range(n):
        lineno, tok = take("node line")
        if len(tok) != 3:
            raise MeshParseError("node line needs 'id x y'", lineno)
        nid = _parse_int(tok[0], lineno)
        if nid != i + 1:
            raise MeshParseError(f"node ids must be consecutive; expected {i + 1}", lineno)
        nodes[i] = (_parse_float(tok[1], lineno), _parse_float(tok[2], lineno))
    lineno, tok = take("'cells M'")
    if len(tok) != 2 or tok[0] != "cells":
        raise MeshParseError("expected 'cells M'", lineno)
    m = _parse_int(tok[1], lineno)
    cells = []
    for i in range(m):
        lineno, tok = take("cell line")
        if len(tok) < 2:
            raise MeshParseError("cell line needs 'id k n1..nk'", lineno)
        cid = _parse_int(tok[0], lineno)
        if cid != i + 1:
            raise MeshParseError(f"cell ids must be consecutive; expected {i + 1}", lineno)
        k = _parse_int(tok[1], lineno)
        if k not in (3, 4) or len(tok) != 2 + k:
            raise MeshParseError("cells must list 3 or 4 node ids", lineno)
        ids = [_parse_int(t, lineno) - 1 for t in tok[2:]]
        for v in ids:
            if not 0 <= v < n:
                raise MeshParseError(f"cell references node {v + 1} but only {n} nodes exist",
                                     lineno)
        cells.append(ids)
    tags = {}
    for lineno, tok in it:
        if tok[0] != "boundary" or len(tok) != 4:
            raise MeshParseError(f"unexpected line {' '.join(tok)!r}", lineno)
        a = _parse_int(tok[2], lineno) - 1
        b = _parse_int(tok[3], lineno) - 1
        if not (0 <= a < n and 0 <= b < n):
            raise MeshParseError("boundary line references a missing node", lineno)
        tags[frozenset((a, b))] = tok[1]
    return nodes, cells, tags


def read_mesh(path_or_file, periodic=None, h=None):
    if hasattr(path_or_file, "read"):
        text = path_or_file.read()
    else:
        with open(path_or_file, "r", newline="") as fh:
            text = fh.read()
    nodes, cells, tags = parse_mesh(text)
    if h is None and cells:
        # nominal size: square root of the mean cell area times a shape factor
        area, _ = polygon_moments(nodes[np.array([c + [c[0]] * (4 - len(c)) for c in cells])],
                                  np.array([len(c) for c in cells]))
        tri = np.mean([len(c) == 3 for c in cells])
        h = float(np.sqrt(area.mean() * (1.0 + tri)))
    return build_connectivity(nodes, cells, tags, periodic, h=h)


def mesh_extent(mesh):
    lo = mesh.nodes.min(axis=0)
    hi = mesh.nodes.max(axis=0)
    return (lo[0], hi[0], lo[1], hi[1])

