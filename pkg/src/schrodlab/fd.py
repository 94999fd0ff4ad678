"""Finite-difference matrices shared by the operator assembly and field samplers.

Two boundary closures coexist on the cell-centered grid:

* the Laplacian imposes u = 0 at the boundary *face* through an
  antisymmetric ghost cell (ghost = -first interior value), which keeps
  second-order accuracy and makes the discrete Dirichlet eigenvectors
  exact samples of sine modes;
* first-derivative matrices use a zero ghost *cell*, which makes them
  exactly skew-symmetric.  Skewness is what the convection term and the
  divergence check rely on, so both must use the same matrices.
"""

from __future__ import annotations

import numpy as np
import scipy.sparse as sp

from .mesh import Mesh

__all__ = [
    "laplacian",
    "central_diff",
    "measurement_gradient_1d",
    "axis_matrices",
]


def _lap_1d(n: int, h: float) -> sp.csr_matrix:
    main = np.full(n, 2.0 / h**2)
    main[0] += 1.0 / h**2   # ghost = -u[0] puts the zero on the face
    main[-1] += 1.0 / h**2
    off = np.full(n - 1, -1.0 / h**2)
    return sp.diags([off, main, off], [-1, 0, 1], format="csr")


def _cdiff_1d(n: int, h: float) -> sp.csr_matrix:
    off = np.full(n - 1, 1.0 / (2.0 * h))
    return sp.diags([-off, off], [-1, 1], format="csr")


def _grad_1d(n: int, h: float) -> sp.csr_matrix:
    """Measurement gradient: central inside, one-sided quadratic at the ends.

    The boundary rows fit the parabola through (face, 0) and the two nearest
    cells, so the stencil is exact on quadratics that vanish on the face.
    """
    d = _cdiff_1d(n, h).tolil()
    d[0, 0] = 1.0 / h
    d[0, 1] = 1.0 / (3.0 * h)
    d[n - 1, n - 1] = -1.0 / h
    d[n - 1, n - 2] = -1.0 / (3.0 * h)
    return d.tocsr()


def _kron_axis(mat_1d: sp.spmatrix, axis: int, shape: tuple) -> sp.csr_matrix:
    if len(shape) == 1:
        return mat_1d.tocsr()
    nx, ny = shape
    if axis == 0:
        return sp.kron(mat_1d, sp.identity(ny), format="csr")
    return sp.kron(sp.identity(nx), mat_1d, format="csr")


def laplacian(mesh: Mesh) -> sp.csr_matrix:
    """Negative Laplacian with homogeneous Dirichlet faces."""
    out = None
    for axis, (n, h) in enumerate(zip(mesh.shape, mesh.spacing)):
        term = _kron_axis(_lap_1d(n, h), axis, mesh.shape)
        out = term if out is None else out + term
    return out.tocsr()


def central_diff(mesh: Mesh, axis: int) -> sp.csr_matrix:
    """Skew-symmetric central first derivative along one axis (zero ghost cell)."""
    n = mesh.shape[axis]
    h = mesh.spacing[axis]
    return _kron_axis(_cdiff_1d(n, h), axis, mesh.shape)


def measurement_gradient_1d(mesh: Mesh, axis: int) -> sp.csr_matrix:
    n = mesh.shape[axis]
    h = mesh.spacing[axis]
    return _kron_axis(_grad_1d(n, h), axis, mesh.shape)


def axis_matrices(mesh: Mesh, kind: str) -> list:
    """All per-axis derivative matrices of the requested kind."""
    builder = {"central": central_diff, "gradient": measurement_gradient_1d}[kind]
    return [builder(mesh, axis) for axis in range(mesh.dim)]
