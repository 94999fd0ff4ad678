"""Symbolic potentials, truncations, finite extensions and incompressible flows.

Potentials are inverse powers of the boundary distance plus an optional
bounded part.  Flows come from stream functions that are constant on the
boundary, so incompressibility and zero normal flux hold by construction
rather than by penalty.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Callable, Optional

import numpy as np

from .fd import axis_matrices
from .mesh import Domain, GridFunction, GridVector, Mesh

__all__ = [
    "PotentialSpec",
    "FlowSpec",
    "ExtendedPotential",
    "sample_potential",
    "truncate",
    "truncate_rhs",
    "sample_flow",
    "extend_potential",
    "omega_mask",
]

_DIV_TOL = 1e-10


@dataclass(frozen=True)
class PotentialSpec:
    """V(x) = C * delta(x)^(-r) + bounded_part(x), optionally capped at j."""

    C: float
    r: float
    bounded_part: Optional[Callable] = None
    truncation: Optional[float] = None

    def __post_init__(self):
        if self.C < 0:
            raise ValueError(f"strength C must be >= 0, got {self.C}")
        if self.r < 0:
            raise ValueError(f"exponent r must be >= 0, got {self.r}")
        if self.truncation is not None and self.truncation <= 0:
            raise ValueError(f"truncation level must be positive, got {self.truncation}")


@dataclass(frozen=True)
class FlowSpec:
    """Divergence-free convective field: zero, or the rotated gradient of a
    stream function sigma(x, y) that is constant on the boundary."""

    kind: str = "zero"
    stream: Optional[Callable] = None

    def __post_init__(self):
        if self.kind not in ("zero", "stream"):
            raise ValueError(f"unknown flow kind {self.kind!r}")
        if self.kind == "stream" and self.stream is None:
            raise ValueError("stream flow needs a stream function")


@dataclass(frozen=True)
class ExtendedPotential:
    """Potential of ``inner`` on omega, constant q on the rest of the box."""

    inner: PotentialSpec
    omega: Domain
    q: float

    def __post_init__(self):
        if self.q < 0:
            raise ValueError(f"exterior level q must be >= 0, got {self.q}")


def sample_potential(spec: PotentialSpec, mesh: Mesh) -> GridFunction:
    """Evaluate the potential at the cell centers, applying the cap if set."""
    vals = _potential_on(spec, mesh.delta, mesh)
    return GridFunction(mesh, vals)


def _potential_on(spec: PotentialSpec, delta: np.ndarray, mesh: Mesh) -> np.ndarray:
    if spec.r == 0.0:
        vals = np.full(delta.shape, spec.C)
    else:
        vals = spec.C * delta ** (-spec.r)
    if spec.bounded_part is not None:
        if mesh.dim == 1:
            vals = vals + spec.bounded_part(mesh.cell_centers)
        else:
            vals = vals + spec.bounded_part(mesh.cell_centers[:, 0], mesh.cell_centers[:, 1])
    if np.any(vals < 0):
        raise ValueError("potential is negative at some cells; check bounded_part")
    if spec.truncation is not None:
        vals = np.minimum(vals, spec.truncation)
    return vals


def truncate(spec: PotentialSpec, j: float) -> PotentialSpec:
    """Cap the potential at level j: samples become min(V, j)."""
    if j <= 0:
        raise ValueError(f"truncation level must be positive, got {j}")
    return replace(spec, truncation=float(j))


def truncate_rhs(f: GridFunction, j: float) -> GridFunction:
    """Sign-preserving cap: sign(f) * min(|f|, j)."""
    if j <= 0:
        raise ValueError(f"truncation level must be positive, got {j}")
    if f.is_complex:
        raise ValueError("right-hand side truncation needs real values")
    return GridFunction(f.mesh, np.sign(f.values) * np.minimum(np.abs(f.values), j))


def sample_flow(spec: FlowSpec, mesh: Mesh) -> GridVector:
    """Sample the flow at cell centers.

    Stream flows are U = (d sigma / dy, -d sigma / dx) with both derivatives
    taken by the same skew central-difference matrices that the divergence
    check uses; those commute across axes, so the discrete divergence
    vanishes identically.
    """
    if spec.kind == "zero":
        return GridVector(mesh, np.zeros((mesh.n_cells, mesh.dim)))
    if mesh.dim != 2:
        raise ValueError("stream flows need a 2D mesh")
    x = mesh.cell_centers[:, 0]
    y = mesh.cell_centers[:, 1]
    sigma = np.asarray(spec.stream(x, y), dtype=float)
    # Shift so the boundary constant is 0: the zero-ghost closure of the
    # derivative matrices is then consistent with the true stream function.
    sigma = sigma - float(spec.stream(0.0, 0.0))
    dx, dy = axis_matrices(mesh, "central")
    comps = np.column_stack([dy @ sigma, -(dx @ sigma)])
    U = GridVector(mesh, comps)
    div = discrete_divergence(U)
    scale = max(1.0, float(np.max(np.abs(comps))))
    if np.max(np.abs(div)) > _DIV_TOL * scale:
        raise ValueError("sampled flow is not discretely divergence-free")
    return U


def discrete_divergence(U: GridVector) -> np.ndarray:
    mats = axis_matrices(U.mesh, "central")
    out = np.zeros(U.mesh.n_cells)
    for axis, m in enumerate(mats):
        out += m @ U.components[:, axis]
    return out


def omega_mask(omega: Domain, box_mesh: Mesh, origin=None) -> np.ndarray:
    """Cells of the box mesh whose center lies inside omega (shifted by origin)."""
    pts = omega_coordinates(omega, box_mesh, origin)
    return omega.contains(pts)


def omega_coordinates(omega: Domain, box_mesh: Mesh, origin=None) -> np.ndarray:
    """Box cell centers expressed in omega's own coordinates.

    Intervals carry their endpoints, so no shift is needed; rectangles are
    placed at ``origin`` inside the box (default centered).
    """
    pts = box_mesh.cell_centers
    if omega.kind == "interval":
        return pts
    if origin is None:
        box = box_mesh.domain
        origin = ((box.lx - omega.lx) / 2.0, (box.ly - omega.ly) / 2.0)
    return pts - np.asarray(origin)


def extend_potential(
    inner: PotentialSpec,
    omega: Domain,
    q: float,
    box_mesh: Mesh,
    origin=None,
) -> GridFunction:
    """Sample the potential extended by the constant q outside omega.

    ``origin`` places a rectangular omega inside the box (default centered);
    intervals carry their own endpoints.  The box must contain the closure
    of omega.
    """
    ext = ExtendedPotential(inner=inner, omega=omega, q=q)
    box = box_mesh.domain
    if omega.kind == "interval":
        if box.kind != "interval" or omega.a < box.a or omega.b > box.b:
            raise ValueError("omega is not contained in the box")
    else:
        if box.kind != "rectangle" or omega.lx > box.lx or omega.ly > box.ly:
            raise ValueError("omega is not contained in the box")
    pts = omega_coordinates(omega, box_mesh, origin)
    inside = omega.contains(pts)
    vals = np.full(box_mesh.n_cells, float(q))
    delta_omega = omega.boundary_distance(pts[inside])
    vals[inside] = _extend_inner(ext.inner, delta_omega, box_mesh, pts[inside])
    return GridFunction(box_mesh, vals)


def _extend_inner(spec: PotentialSpec, delta: np.ndarray, box_mesh: Mesh, pts: np.ndarray) -> np.ndarray:
    if spec.r == 0.0:
        vals = np.full(delta.shape, spec.C)
    else:
        vals = spec.C * delta ** (-spec.r)
    if spec.bounded_part is not None:
        if box_mesh.dim == 1:
            vals = vals + spec.bounded_part(pts)
        else:
            vals = vals + spec.bounded_part(pts[:, 0], pts[:, 1])
    if np.any(vals < 0):
        raise ValueError("potential is negative at some cells; check bounded_part")
    if spec.truncation is not None:
        vals = np.minimum(vals, spec.truncation)
    return vals
