"""Dense complex matrix algebra for small open-system generators.

Conventions used throughout the package:

* Density matrices and operators are plain ``numpy`` complex arrays.
* Vectorization is **column-stacking**: column ``j`` of an ``n x n`` matrix
  occupies slots ``j*n .. j*n+n-1`` of the vector (Fortran order).  With this
  convention ``vec(A @ X @ B) == kron(B.T, A) @ vec(X)``, which is how all
  superoperators here are assembled.
* A superoperator on an ``n``-dimensional Hilbert space is an ``n^2 x n^2``
  complex matrix acting on column-stacked density matrices.

Hilbert dimensions in this package stay below ~64 (the three-qubit model is
8, ideal pumps are at most 10), so everything is dense and double precision.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

__all__ = [
    "SuperOp",
    "DegenerateKernelError",
    "NoKernelError",
    "kron",
    "vectorize",
    "devectorize",
    "trace_row",
    "trace_defect",
    "stationary_vector",
    "propagate",
    "KERNEL_RESIDUAL_RTOL",
    "KERNEL_DEGENERACY_RTOL",
]

# Residual gate for the kernel solve, relative to the sup-norm of the generator.
KERNEL_RESIDUAL_RTOL = 1e-10
# Two singular values below this (relative to the largest) signal a non-unique
# steady state; none below it signals an empty kernel.
KERNEL_DEGENERACY_RTOL = 1e-9
# Reciprocal condition estimate below which the trace-constrained solve is
# not trusted: a near-degenerate kernel can satisfy the residual gate with a
# meaningless mixture, so such systems are sent to the SVD diagnostics.
KERNEL_RCOND_FLOOR = 1e-13


class DegenerateKernelError(np.linalg.LinAlgError):
    """The generator has more than one stationary state (kernel dim > 1)."""


class NoKernelError(np.linalg.LinAlgError):
    """The generator has no stationary state within tolerance."""


def kron(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Kronecker product with complex promotion, shape (ra*rb, ca*cb)."""
    return np.kron(np.asarray(a, dtype=complex), np.asarray(b, dtype=complex))


def vectorize(m: np.ndarray) -> np.ndarray:
    """Column-stack a square matrix into a vector."""
    m = np.asarray(m)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {m.shape}")
    return m.reshape(-1, order="F")


def devectorize(v: np.ndarray, n: int) -> np.ndarray:
    """Invert :func:`vectorize` for an ``n x n`` matrix."""
    v = np.asarray(v)
    if v.size != n * n:
        raise ValueError(f"vector of length {v.size} is not {n}x{n}")
    return v.reshape((n, n), order="F")


def trace_row(n: int) -> np.ndarray:
    """Row vector representing tr(.) on column-stacked ``n x n`` matrices."""
    row = np.zeros(n * n, dtype=complex)
    row[:: n + 1] = 1.0
    return row


@dataclass(frozen=True)
class SuperOp:
    """A superoperator on an ``dim``-dimensional Hilbert space.

    ``matrix`` is ``dim^2 x dim^2`` and acts on column-stacked density
    matrices.  Instances are treated as immutable; operations on them are
    pure functions, so they are safe to share across threads.
    """

    dim: int
    matrix: np.ndarray

    def __post_init__(self):
        d2 = self.dim * self.dim
        if self.matrix.shape != (d2, d2):
            raise ValueError(
                f"superoperator for dim {self.dim} must be {d2}x{d2}, "
                f"got {self.matrix.shape}"
            )

    def apply(self, rho: np.ndarray) -> np.ndarray:
        """Apply to a density matrix, returning a matrix of the same shape."""
        return devectorize(self.matrix @ vectorize(rho), self.dim)


def trace_defect(op: SuperOp) -> float:
    """How badly the superoperator fails to annihilate the trace functional.

    Returns ``max |tr_row @ matrix|`` relative to ``max |matrix|``; a proper
    generator of trace-preserving dynamics gives ~1e-16.
    """
    scale = np.max(np.abs(op.matrix))
    if scale == 0.0:
        return 0.0
    return float(np.max(np.abs(trace_row(op.dim) @ op.matrix)) / scale)


def _rcond_estimate(lu: np.ndarray, anorm: float) -> float:
    """LAPACK reciprocal condition estimate from an LU factorization."""
    from scipy.linalg.lapack import zgecon

    rcond, info = zgecon(lu, anorm)
    if info != 0:
        return 0.0
    return float(rcond)


def _kernel_diagnostics(matrix: np.ndarray) -> np.ndarray:
    """Singular-value based kernel extraction with uniqueness checks.

    Raises :class:`NoKernelError` / :class:`DegenerateKernelError` per the
    relative threshold ``KERNEL_DEGENERACY_RTOL``; otherwise returns the
    right singular vector of the smallest singular value.
    """
    _, s, vh = np.linalg.svd(matrix)
    largest = s[0] if s[0] > 0 else 1.0
    if s[-1] > KERNEL_DEGENERACY_RTOL * largest:
        raise NoKernelError(
            f"smallest singular value {s[-1]:.3e} exceeds "
            f"{KERNEL_DEGENERACY_RTOL:.0e} x {largest:.3e}; no stationary state"
        )
    if len(s) > 1 and s[-2] < KERNEL_DEGENERACY_RTOL * largest:
        raise DegenerateKernelError(
            f"two smallest singular values {s[-2]:.3e}, {s[-1]:.3e} below "
            f"{KERNEL_DEGENERACY_RTOL:.0e} x {largest:.3e}; steady state not unique"
        )
    return vh[-1].conj()


def _normalize_trace(v: np.ndarray, n: int) -> np.ndarray:
    tr = np.trace(devectorize(v, n))
    if abs(tr) < 1e-12 * np.max(np.abs(v)):
        raise DegenerateKernelError(
            "kernel vector has (near-)zero trace; stationary state ill-defined"
        )
    return v / tr


def stationary_vector(op: SuperOp, check_uniqueness: bool = False) -> np.ndarray:
    """Solve ``op.matrix @ v = 0`` with ``devectorize(v)`` of unit trace.

    Primary path replaces the first row of the ``n^2 x n^2`` system with the
    trace constraint and solves the resulting linear system (plus one step of
    iterative refinement).  If that fails its residual gate, or if
    ``check_uniqueness`` is set, falls back to an SVD of the generator which
    doubles as the uniqueness diagnostic.

    Raises
    ------
    NoKernelError
        No singular value small enough for a stationary state.
    DegenerateKernelError
        More than one stationary state within tolerance.
    """
    mat = op.matrix
    n = op.dim
    scale = np.max(np.abs(mat))
    if scale == 0.0:
        raise DegenerateKernelError("zero generator: every state is stationary")
    if check_uniqueness:
        v = _kernel_diagnostics(mat)
        v = _normalize_trace(v, n)
        return v

    m = mat.copy()
    m[0, :] = trace_row(n)
    b = np.zeros(n * n, dtype=complex)
    b[0] = 1.0
    try:
        anorm = np.abs(m).sum(axis=0).max()
        with warnings.catch_warnings():
            # conditioning is judged explicitly below; scipy's own
            # ill-conditioned-matrix warning would only duplicate it
            warnings.simplefilter("ignore", sla.LinAlgWarning)
            lu = sla.lu_factor(m, check_finite=False)
            if _rcond_estimate(lu[0], anorm) < KERNEL_RCOND_FLOOR:
                v = None
            else:
                v = sla.lu_solve(lu, b, check_finite=False)
                v = v + sla.lu_solve(lu, b - m @ v, check_finite=False)
    except (np.linalg.LinAlgError, ValueError):
        v = None
    if v is not None and np.all(np.isfinite(v)):
        try:
            v = _normalize_trace(v, n)
        except DegenerateKernelError:
            v = None
    if v is not None and np.max(np.abs(mat @ v)) <= KERNEL_RESIDUAL_RTOL * scale:
        return v

    # Replacement solve failed: run the SVD path, which either produces a
    # usable kernel vector or explains the failure.
    v = _normalize_trace(_kernel_diagnostics(mat), n)
    if np.max(np.abs(mat @ v)) > KERNEL_RESIDUAL_RTOL * scale:
        raise NoKernelError(
            "kernel residual exceeds tolerance even on the singular-vector path"
        )
    return v


def propagate(op: SuperOp, rho0: np.ndarray, dt: float | None = None,
              steps: int = 1000) -> np.ndarray:
    """Approximate ``expm(op.matrix * dt * steps) @ rho0`` by fixed-step RK4.

    ``dt`` defaults to ``0.1 / max|matrix|``, conservative for classical
    4th-order stepping at these dimensions.  The integrator never
    renormalizes: trace drift is the caller's divergence diagnostic (callers
    should confirm convergence by step halving).
    """
    mat = op.matrix
    if dt is None:
        scale = np.max(np.abs(mat))
        if scale == 0.0:
            return np.array(rho0, dtype=complex, copy=True)
        dt = 0.1 / scale
    v = vectorize(np.asarray(rho0, dtype=complex)).copy()
    for _ in range(steps):
        k1 = mat @ v
        k2 = mat @ (v + (0.5 * dt) * k1)
        k3 = mat @ (v + (0.5 * dt) * k2)
        k4 = mat @ (v + dt * k3)
        v += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    return devectorize(v, op.dim)
