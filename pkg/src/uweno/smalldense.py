"""Regularised least squares for the small systems of the reconstruction.

All solvers return the solution of the regularised normal equations
``(zeta I + A^T A) x = A^T b``. The single-system routine factors them with
Cholesky; the batched routines evaluate the same solution through a
stacked SVD so rank-deficient systems stay well defined.
"""

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from .errors import SingularMatrixError

ZETA = 1e-14
_PIVOT_FLOOR = 1e-300


def _normal_matrix(A, zeta):
    n = A.shape[-1]
    N = np.swapaxes(A, -1, -2) @ A
    if zeta:
        N = N + zeta * np.eye(n)
    return N


def ridge_solve(A, b, zeta=ZETA):
    """Solve ``(zeta I + A^T A) x = A^T b`` for one small system."""
    A = np.atleast_2d(np.asarray(A, dtype=float))
    b = np.asarray(b, dtype=float)
    if zeta < 0:
        raise ValueError("zeta must be non-negative")
    N = _normal_matrix(A, zeta)
    try:
        factor = cho_factor(N, lower=True, check_finite=True)
    except np.linalg.LinAlgError as exc:
        raise SingularMatrixError(str(exc)) from None
    pivots = np.abs(np.diag(factor[0])) ** 2
    floor = _PIVOT_FLOOR
    if zeta == 0:
        # without regularisation also reject pivots lost to round-off
        floor = max(floor, N.shape[0] * np.finfo(float).eps * np.abs(np.diag(N)).max())
    if pivots.min() < floor:
        raise SingularMatrixError("normal matrix is numerically singular")
    return cho_solve(factor, A.T @ b)


def weighted_ridge_solve(A, b, d, zeta=ZETA):
    """Ridge solve with every row ``j`` of ``A x = b`` scaled by ``d[j] >= 0``."""
    d = np.asarray(d, dtype=float)
    if (d < 0).any():
        raise ValueError("row weights must be non-negative")
    A = np.atleast_2d(np.asarray(A, dtype=float))
    return ridge_solve(d[:, None] * A, d * np.asarray(b, dtype=float), zeta)


def _filtered_pinv(A, zeta):
    """``(zeta I + A^T A)^{-1} A^T`` through the SVD of ``A``.

    Equal to the normal-equation form in exact arithmetic. Singular values
    at round-off level (below ``max(m, n) * eps * s_max``) are treated as the
    exact zeros they stand for: the filter ``s / zeta`` would otherwise turn
    them into geometry-dependent noise of relative size up to ``1e-4``.
    """
    U, s, Vh = np.linalg.svd(A, full_matrices=False)
    tol = max(A.shape[-2:]) * np.finfo(float).eps * s[..., :1]
    f = np.where(s > tol, s / (s * s + zeta), 0.0)
    X = np.swapaxes(Vh, -1, -2) @ (f[..., :, None] * np.swapaxes(U, -1, -2))
    # rows of A that are identically zero carry no data
    return X * (np.abs(A).max(axis=-1) > 0.0)[..., None, :]


def ridge_operator(A, zeta=ZETA, d=None):
    """Batched solve operator ``X = (zeta I + A^T D^2 A)^{-1} A^T D^2``.

    ``A`` has shape ``(..., m, n)`` and ``d`` (optional) ``(..., m)``. The
    returned ``X`` has shape ``(..., n, m)`` so that ``x = X @ b`` is the
    weighted ridge solution for right-hand side ``b``. ``zeta`` must be
    positive so every system has a unique solution.
    """
    A = np.asarray(A, dtype=float)
    if not zeta > 0:
        raise ValueError("batched operator requires zeta > 0")
    if d is None:
        return _filtered_pinv(A, zeta)
    d = np.asarray(d, dtype=float)
    return _filtered_pinv(d[..., :, None] * A, zeta) * d[..., None, :]


def ridge_batch(A, b, zeta=ZETA):
    """Batched ridge solve: ``A`` is ``(..., m, n)``, ``b`` is ``(..., m)``."""
    A = np.asarray(A, dtype=float)
    if not zeta > 0:
        raise ValueError("batched solve requires zeta > 0")
    return np.einsum("...nm,...m->...n", _filtered_pinv(A, zeta), b)
