"""Sparse assembly and linear solves for A = -Laplacian + U.grad + V.

The convection term is discretized in the split (skew-symmetric) form
K = (diag(U) D + D diag(U)) / 2, which is consistent with U.grad for
discretely divergence-free U and makes K + K^T vanish identically.  The
transpose of the assembled matrix is then exactly the adjoint operator
-Laplacian - U.grad + V.

Under the mesh-Peclet guard |U| h / 2 <= 1 the matrix is an M-matrix, so
solutions inherit inverse positivity; factorizations keep the natural
diagonal pivots to preserve that structure in floating point.
"""

from __future__ import annotations

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from . import fd
from .mesh import GridFunction, GridVector, Mesh
from .model import discrete_divergence

__all__ = [
    "AssemblyError",
    "SolverError",
    "DiscreteOperator",
    "assemble",
    "apply_adjoint",
    "resolvent_solve",
    "direct_solve",
]

_RESIDUAL_TOL = 1e-10
_DIV_GUARD = 1e-8

# Diagonal pivoting with a symmetric fill-reducing ordering keeps the LU
# factors of an M-matrix sign-structured, so solves with nonnegative data
# never produce catastrophic cancellation in the tiny boundary values.
_MMATRIX_SPLU_OPTS = dict(
    permc_spec="MMD_AT_PLUS_A",
    diag_pivot_thresh=0.0,
    options=dict(SymmetricMode=True),
)


class AssemblyError(ValueError):
    """Operator data violates an assembly precondition."""


class SolverError(RuntimeError):
    """A sparse solve did not reach the required residual."""

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class DiscreteOperator:
    """Matrix realization of -Laplacian + U.grad + V on a mesh."""

    def __init__(self, mesh: Mesh, diffusion, convection, potential: np.ndarray,
                 flow: GridVector | None):
        self.mesh = mesh
        self.diffusion = diffusion
        self.convection = convection
        self.potential = potential
        self.flow = flow
        self.matrix = (diffusion + convection + sp.diags(potential)).tocsr()
        self._factors = {}

    @property
    def is_symmetric(self) -> bool:
        return self.flow is None or not np.any(self.flow.components)

    def apply(self, u) -> np.ndarray:
        vals = u.values if isinstance(u, GridFunction) else np.asarray(u)
        return self.matrix @ vals

    def shifted(self, lam: float):
        return (sp.identity(self.mesh.n_cells, format="csr") + lam * self.matrix).tocsc()

    def factor(self, key, matrix, mmatrix: bool):
        if key not in self._factors:
            opts = _MMATRIX_SPLU_OPTS if mmatrix else {}
            self._factors[key] = spla.splu(matrix.tocsc(), **opts)
        return self._factors[key]


def assemble(mesh: Mesh, V: GridFunction, U: GridVector | None = None) -> DiscreteOperator:
    """Build the sparse operator; rejects negative potentials, flows with a
    nonzero discrete divergence, and under-resolved convection."""
    v = V.values if isinstance(V, GridFunction) else np.asarray(V, dtype=float)
    if v.shape != (mesh.n_cells,):
        raise AssemblyError("potential does not match the mesh")
    if np.any(v < 0):
        raise AssemblyError("potential must be nonnegative cellwise")

    diffusion = fd.laplacian(mesh)
    n = mesh.n_cells
    if U is None or not np.any(U.components):
        convection = sp.csr_matrix((n, n))
        flow = None
    else:
        if U.mesh is not mesh and U.mesh.shape != mesh.shape:
            raise AssemblyError("flow does not match the mesh")
        div = discrete_divergence(U)
        scale = max(1.0, float(np.max(np.abs(U.components))))
        if np.max(np.abs(div)) > _DIV_GUARD * scale:
            raise AssemblyError(
                f"flow divergence {np.max(np.abs(div)):.3e} exceeds the guard"
            )
        convection = sp.csr_matrix((n, n))
        for axis in range(mesh.dim):
            d = fd.central_diff(mesh, axis)
            ucomp = sp.diags(U.components[:, axis])
            convection = convection + 0.5 * (ucomp @ d + d @ ucomp)
            # mesh-Peclet guard: keep the off-diagonals of the full matrix
            # nonpositive so the M-matrix maximum principle survives
            h = mesh.spacing[axis]
            peclet = np.max(np.abs(U.components[:, axis])) * h / 2.0
            if peclet > 1.0 + 1e-12:
                raise AssemblyError(
                    f"mesh Peclet number {peclet:.3f} > 1 along axis {axis}; refine the mesh"
                )
        flow = U
    return DiscreteOperator(mesh, diffusion, convection.tocsr(), v.astype(float), flow)


def apply_adjoint(op: DiscreteOperator, phi: GridFunction, include_potential: bool = False) -> GridFunction:
    """Action of -Laplacian - U.grad (+ V); equals the matrix transpose."""
    vals = phi.values if isinstance(phi, GridFunction) else np.asarray(phi)
    if vals.shape != (op.mesh.n_cells,):
        raise ValueError("test function does not match the operator mesh")
    out = op.diffusion @ vals - op.convection @ vals
    if include_potential:
        out = out + op.potential * vals
    return GridFunction(op.mesh, out)


def _solve(op: DiscreteOperator, key, matrix, rhs: np.ndarray) -> np.ndarray:
    mmatrix = not np.iscomplexobj(matrix.data)
    lu = op.factor(key, matrix, mmatrix)
    u = lu.solve(rhs)
    norm_rhs = np.linalg.norm(rhs)
    residual = np.linalg.norm(matrix @ u - rhs)
    if norm_rhs > 0 and residual > _RESIDUAL_TOL * norm_rhs:
        # one step of iterative refinement before giving up
        u = u + lu.solve(rhs - matrix @ u)
        residual = np.linalg.norm(matrix @ u - rhs)
        if residual > _RESIDUAL_TOL * norm_rhs:
            raise SolverError(
                f"solve stalled at relative residual {residual / norm_rhs:.3e}",
                residual=residual,
            )
    return u


def resolvent_solve(op: DiscreteOperator, lam: float, f) -> GridFunction:
    """Solve (I + lam A) u = f for lam > 0."""
    if lam <= 0:
        raise ValueError(f"resolvent parameter must be positive, got {lam}")
    rhs = f.values if isinstance(f, GridFunction) else np.asarray(f)
    u = _solve(op, ("resolvent", float(lam)), op.shifted(lam), rhs)
    return GridFunction(op.mesh, u)


def direct_solve(op: DiscreteOperator, f) -> GridFunction:
    """Solve A u = f."""
    rhs = f.values if isinstance(f, GridFunction) else np.asarray(f)
    u = _solve(op, ("direct",), op.matrix.tocsc(), rhs)
    return GridFunction(op.mesh, u)
