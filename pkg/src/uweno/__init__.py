"""Third-order WENO finite-volume solver for the 2D Euler equations on
unstructured quadrilateral and triangular meshes."""

from .cases import CASES, get_case
from .errors import DegenerateWeightsError, MeshError, SolverAbort, UnphysicalStateError, UwenoError
from .mesh import Mesh, generate_mesh, read_mesh, write_mesh
from .solver import BoundaryCondition, RunMetrics, Solver, SolverState, TimeControls
from .weno import precompute_tables

__version__ = "0.1.0"

__all__ = [
    "CASES", "get_case", "DegenerateWeightsError", "MeshError", "SolverAbort",
    "UnphysicalStateError", "UwenoError", "Mesh", "generate_mesh", "read_mesh", "write_mesh",
    "BoundaryCondition", "RunMetrics", "Solver", "SolverState", "TimeControls",
    "precompute_tables",
]
