"""Small dense linear algebra used by the filters and the fusion step.

Everything works on single matrices or on stacks of matrices (leading batch
axes), which is how the simulator evaluates many tracks at once.
"""

import numpy as np

SYM_TOL = 1e-9
EIG_FLOOR = 1e-12


class NumericalError(ArithmeticError):
    """Raised when a matrix that must be symmetric positive definite is not."""


def _check_square(m):
    if m.ndim < 2 or m.shape[-1] != m.shape[-2]:
        raise ValueError(f"expected square matrix, got shape {m.shape}")


def symmetrize(m):
    m = np.asarray(m, dtype=float)
    return 0.5 * (m + np.swapaxes(m, -1, -2))


def transpose(m):
    return np.swapaxes(np.asarray(m, dtype=float), -1, -2)


def multiply(a, b):
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape[-1] != b.shape[-2]:
        raise ValueError(f"cannot multiply {a.shape} by {b.shape}")
    return a @ b


def trace(m):
    m = np.asarray(m, dtype=float)
    _check_square(m)
    return np.trace(m, axis1=-2, axis2=-1)


def is_spd(m, sym_tol=SYM_TOL, eig_floor=EIG_FLOOR):
    """True when every matrix in ``m`` is symmetric with a healthy eigenvalue floor."""
    m = np.asarray(m, dtype=float)
    _check_square(m)
    if not np.all(np.isfinite(m)):
        return False
    scale = np.maximum(np.abs(m).max(axis=(-1, -2)), 1.0)
    asym = np.abs(m - np.swapaxes(m, -1, -2)).max(axis=(-1, -2))
    if np.any(asym > sym_tol * scale):
        return False
    eig = np.linalg.eigvalsh(symmetrize(m))
    tr = np.trace(m, axis1=-2, axis2=-1)
    return bool(np.all(eig[..., 0] > eig_floor * np.abs(tr)) and np.all(eig[..., 0] > 0))


def spd_inverse(m, check=True):
    """Inverse of a symmetric positive definite matrix (or stack of them).

    The Cholesky factorisation doubles as the PD check; the result is
    symmetrized before it is returned.
    """
    m = np.asarray(m, dtype=float)
    _check_square(m)
    if not check:
        # hot path: inputs are covariances produced by this package
        try:
            return symmetrize(np.linalg.inv(symmetrize(m)))
        except np.linalg.LinAlgError as exc:
            raise NumericalError(str(exc)) from exc
    if not is_spd(m):
        raise NumericalError("matrix is not symmetric positive definite")
    m = symmetrize(m)
    diag = np.diagonal(m, axis1=-2, axis2=-1)
    if np.array_equal(m, diag[..., None] * np.eye(m.shape[-1])):
        # exact reciprocal on diagonal inputs
        return (1.0 / diag)[..., None] * np.eye(m.shape[-1])
    try:
        low = np.linalg.cholesky(m)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(str(exc)) from exc
    eye = np.broadcast_to(np.eye(m.shape[-1]), m.shape)
    low_inv = np.linalg.solve(low, eye)
    return symmetrize(np.swapaxes(low_inv, -1, -2) @ low_inv)
