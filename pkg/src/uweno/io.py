"""Field and table output: legacy VTK cell data and CSV files."""

import csv
import json
from pathlib import Path

import numpy as np

from .euler import GAMMA, cons_to_prim

_VTK_TRI = 5
_VTK_QUAD = 9


def write_vtk(path, mesh, W, gamma=GAMMA, title="uweno"):
    """Legacy ASCII unstructured grid with cell data rho, u, v, p."""
    prim = cons_to_prim(np.asarray(W, dtype=float), gamma)
    path = Path(path)
    n_entries = int((mesh.nverts + 1).sum())
    with path.open("w") as fh:
        fh.write("# vtk DataFile Version 3.0\n")
        fh.write(f"{title}\nASCII\nDATASET UNSTRUCTURED_GRID\n")
        fh.write(f"POINTS {len(mesh.nodes)} double\n")
        for x, y in mesh.nodes:
            fh.write(f"{x:.9g} {y:.9g} 0\n")
        fh.write(f"CELLS {mesh.n_cells} {n_entries}\n")
        for cell, nv in zip(mesh.cells, mesh.nverts):
            fh.write(f"{nv} " + " ".join(str(int(v)) for v in cell[:nv]) + "\n")
        fh.write(f"CELL_TYPES {mesh.n_cells}\n")
        for nv in mesh.nverts:
            fh.write(f"{_VTK_QUAD if nv == 4 else _VTK_TRI}\n")
        fh.write(f"CELL_DATA {mesh.n_cells}\n")
        for k, name in enumerate(("rho", "u", "v", "p")):
            fh.write(f"SCALARS {name} double 1\nLOOKUP_TABLE default\n")
            fh.write("\n".join(f"{val:.9g}" for val in prim[:, k]))
            fh.write("\n")
    return path


def _fmt(v):
    return format(float(v), ".17g")


def write_csv(path, header, rows):
    """CSV with floats written at full (17 significant digit) precision."""
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) if isinstance(v, (float, np.floating)) else v for v in row])
    return path


def write_line_cut(path, x, prim):
    rows = [(float(xi), *map(float, p)) for xi, p in zip(x, prim)]
    return write_csv(path, ("x", "rho", "u", "v", "p"), rows)


def write_error_table(path, sizes, l1, l1_order, linf, linf_order):
    rows = zip(map(float, sizes), map(float, l1), map(float, l1_order),
               map(float, linf), map(float, linf_order))
    return write_csv(path, ("mesh_size", "L1", "L1_order", "Linf", "Linf_order"), rows)


def write_metrics(path, metrics):
    path = Path(path)
    path.write_text(json.dumps(metrics, indent=2, default=float) + "\n")
    return path
