"""Exception hierarchy shared by all modules."""


class UwenoError(Exception):
    pass


class MeshError(UwenoError):
    """Structural problem with a mesh (non-conforming faces, bad ids)."""


class GeometryError(UwenoError):
    """Degenerate or inverted geometry."""


class StencilError(UwenoError):
    pass


class MeshParseError(MeshError):
    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class SingularMatrixError(UwenoError):
    pass


class DegenerateWeightsError(UwenoError):
    def __init__(self, cell, gauss_point, total):
        self.cell = cell
        self.gauss_point = gauss_point
        self.total = total
        super().__init__(
            f"linear weights sum to {total:.3e} at cell {cell}, gauss point {gauss_point}"
        )


class UnphysicalStateError(UwenoError):
    def __init__(self, message, state=None):
        self.state = state
        super().__init__(message)


class SolverAbort(UwenoError):
    def __init__(self, message, cell=None, time=None, stage=None):
        self.cell = cell
        self.time = time
        self.stage = stage
        super().__init__(message)
