"""Cell-centered grids on intervals and rectangles.

Every mesh carries the exact distance from each cell center to the domain
boundary and a midpoint quadrature rule.  Cell centers never touch the
boundary, so inverse-power functions of the boundary distance stay finite
at every sample point.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "DomainError",
    "Domain",
    "Mesh",
    "GridFunction",
    "GridVector",
    "build_interval",
    "build_rectangle",
    "integrate",
]


class DomainError(ValueError):
    """Invalid domain geometry or mesh resolution."""


@dataclass(frozen=True)
class Domain:
    """Open interval (a, b) or axis-aligned open rectangle (0, lx) x (0, ly)."""

    kind: str
    a: float = 0.0
    b: float = 0.0
    lx: float = 0.0
    ly: float = 0.0

    @staticmethod
    def interval(a: float, b: float) -> "Domain":
        if not b > a:
            raise DomainError(f"interval needs b > a, got ({a}, {b})")
        return Domain(kind="interval", a=float(a), b=float(b))

    @staticmethod
    def rectangle(lx: float, ly: float) -> "Domain":
        if lx <= 0 or ly <= 0:
            raise DomainError(f"rectangle needs positive sides, got ({lx}, {ly})")
        return Domain(kind="rectangle", lx=float(lx), ly=float(ly))

    @property
    def dim(self) -> int:
        return 1 if self.kind == "interval" else 2

    @property
    def measure(self) -> float:
        if self.kind == "interval":
            return self.b - self.a
        return self.lx * self.ly

    def boundary_distance(self, points: np.ndarray) -> np.ndarray:
        """Exact Euclidean distance from points to the boundary.

        ``points`` has shape (m,) for intervals and (m, 2) for rectangles.
        Points outside the closure get distance 0.
        """
        points = np.asarray(points, dtype=float)
        if self.kind == "interval":
            d = np.minimum(points - self.a, self.b - points)
        else:
            x = points[..., 0]
            y = points[..., 1]
            d = np.minimum(np.minimum(x, self.lx - x), np.minimum(y, self.ly - y))
        return np.maximum(d, 0.0)

    def contains(self, points: np.ndarray) -> np.ndarray:
        """Boolean mask of points strictly inside the open domain."""
        return self.boundary_distance(points) > 0.0


@dataclass(frozen=True)
class Mesh:
    """Uniform cell-centered grid over a :class:`Domain`.

    ``cell_centers`` has shape (n,) in 1D and (n, 2) in 2D with the flat
    index running as ``i = ix * ny + iy`` (C order along x first).
    """

    domain: Domain
    shape: tuple
    cell_centers: np.ndarray = field(repr=False)
    spacing: tuple
    cell_volume: float
    delta: np.ndarray = field(repr=False)

    @property
    def dim(self) -> int:
        return self.domain.dim

    @property
    def n_cells(self) -> int:
        return int(np.prod(self.shape))

    @property
    def min_spacing(self) -> float:
        return min(self.spacing)

    def function(self, values) -> "GridFunction":
        return GridFunction(self, np.asarray(values))

    def sample(self, fn) -> "GridFunction":
        """Sample a callable at the cell centers.

        1D callables receive x, 2D callables receive (x, y).
        """
        if self.dim == 1:
            vals = fn(self.cell_centers)
        else:
            vals = fn(self.cell_centers[:, 0], self.cell_centers[:, 1])
        return GridFunction(self, np.broadcast_to(np.asarray(vals), (self.n_cells,)).copy())

    def constant(self, c) -> "GridFunction":
        return GridFunction(self, np.full(self.n_cells, c))


@dataclass(frozen=True)
class GridFunction:
    """Scalar function sampled at the cell centers of a mesh."""

    mesh: Mesh
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        values = np.asarray(self.values)
        if values.shape != (self.mesh.n_cells,):
            raise ValueError(
                f"values shape {values.shape} does not match mesh with {self.mesh.n_cells} cells"
            )
        object.__setattr__(self, "values", values)

    @property
    def is_complex(self) -> bool:
        return np.iscomplexobj(self.values)

    def abs(self) -> "GridFunction":
        return GridFunction(self.mesh, np.abs(self.values))

    def __add__(self, other):
        return GridFunction(self.mesh, self.values + _raw(other))

    def __sub__(self, other):
        return GridFunction(self.mesh, self.values - _raw(other))

    def __mul__(self, other):
        return GridFunction(self.mesh, self.values * _raw(other))

    __rmul__ = __mul__

    def __neg__(self):
        return GridFunction(self.mesh, -self.values)


@dataclass(frozen=True)
class GridVector:
    """Vector field sampled at cell centers; components has shape (n, dim)."""

    mesh: Mesh
    components: np.ndarray = field(repr=False)

    def __post_init__(self):
        comp = np.asarray(self.components, dtype=float)
        want = (self.mesh.n_cells, self.mesh.dim)
        if comp.shape != want:
            raise ValueError(f"components shape {comp.shape}, expected {want}")
        object.__setattr__(self, "components", comp)

    def magnitude(self) -> GridFunction:
        return GridFunction(self.mesh, np.sqrt(np.sum(self.components**2, axis=1)))


def _raw(g):
    return g.values if isinstance(g, GridFunction) else g


def build_interval(a: float, b: float, n: int) -> Mesh:
    """Mesh of n equal cells on (a, b); centers at a + (i + 1/2) h."""
    if n < 2:
        raise DomainError(f"need at least 2 cells, got {n}")
    dom = Domain.interval(a, b)
    h = (b - a) / n
    centers = a + (np.arange(n) + 0.5) * h
    delta = dom.boundary_distance(centers)
    return Mesh(
        domain=dom,
        shape=(n,),
        cell_centers=centers,
        spacing=(h,),
        cell_volume=h,
        delta=delta,
    )


def build_rectangle(lx: float, ly: float, nx: int, ny: int) -> Mesh:
    """Tensor mesh of nx x ny cells on (0, lx) x (0, ly)."""
    if nx < 2 or ny < 2:
        raise DomainError(f"need at least 2 cells per axis, got ({nx}, {ny})")
    dom = Domain.rectangle(lx, ly)
    hx = lx / nx
    hy = ly / ny
    xs = (np.arange(nx) + 0.5) * hx
    ys = (np.arange(ny) + 0.5) * hy
    X, Y = np.meshgrid(xs, ys, indexing="ij")
    centers = np.column_stack([X.ravel(), Y.ravel()])
    delta = dom.boundary_distance(centers)
    return Mesh(
        domain=dom,
        shape=(nx, ny),
        cell_centers=centers,
        spacing=(hx, hy),
        cell_volume=hx * hy,
        delta=delta,
    )


def integrate(mesh: Mesh, g) -> float:
    """Midpoint-rule integral: sum of cell values times cell volume."""
    vals = _raw(g)
    vals = np.asarray(vals)
    if vals.shape != (mesh.n_cells,):
        raise ValueError(f"integrand has shape {vals.shape}, mesh has {mesh.n_cells} cells")
    return vals.sum() * mesh.cell_volume
