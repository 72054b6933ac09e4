"""Regular rectangular admissible meshes.

Cells are indexed row-major, ``K = j * nx + i``.  Interior edges are stored
once with ``K < L``: all x-edges (between ``(i, j)`` and ``(i + 1, j)``) first,
then all y-edges, each group in lexicographic ``(j, i)`` order.  Boundary edges
follow the same convention (left, right, bottom, top).

The scheme only ever touches the flat edge arrays, so nothing downstream
assumes the grid structure.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError, GeometryError

__all__ = ["Mesh", "build_regular_mesh", "transmissibility"]


def transmissibility(edge_length, distance):
    """Two-point transmissibility ``|sigma| / distance``.

    ``distance`` is the center-to-center distance for an interior edge and the
    center-to-edge distance for a boundary edge.
    """
    edge_length = np.asarray(edge_length, dtype=float)
    distance = np.asarray(distance, dtype=float)
    if np.any(~(edge_length > 0)) or np.any(~(distance > 0)):
        raise GeometryError(
            f"transmissibility needs positive length and distance, got "
            f"{edge_length!r}, {distance!r}"
        )
    out = edge_length / distance
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True, eq=False)
class Mesh:
    nx: int
    ny: int
    x_min: float
    x_max: float
    y_min: float
    y_max: float
    cell_measure: float
    centers: np.ndarray = field(repr=False)
    edge_k: np.ndarray = field(repr=False)
    edge_l: np.ndarray = field(repr=False)
    edge_tau: np.ndarray = field(repr=False)
    boundary_cell: np.ndarray = field(repr=False)
    boundary_tau: np.ndarray = field(repr=False)

    @property
    def n_cells(self) -> int:
        return self.nx * self.ny

    @property
    def hx(self) -> float:
        return (self.x_max - self.x_min) / self.nx

    @property
    def hy(self) -> float:
        return (self.y_max - self.y_min) / self.ny

    @property
    def area(self) -> float:
        return (self.x_max - self.x_min) * (self.y_max - self.y_min)

    @property
    def is_square(self) -> bool:
        return np.isclose(self.hx, self.hy, rtol=1e-12, atol=0.0)

    @property
    def volumes(self) -> np.ndarray:
        return np.full(self.n_cells, self.cell_measure)

    def cell_center(self, i: int, j: int) -> tuple[float, float]:
        c = self.centers[self.index(i, j)]
        return float(c[0]), float(c[1])

    def index(self, i: int, j: int) -> int:
        if not (0 <= i < self.nx and 0 <= j < self.ny):
            raise IndexError(f"cell ({i}, {j}) outside {self.nx}x{self.ny} mesh")
        return j * self.nx + i

    @property
    def interior_edges(self) -> list[tuple[int, int, float]]:
        return list(
            zip(self.edge_k.tolist(), self.edge_l.tolist(), self.edge_tau.tolist())
        )

    @property
    def boundary_edges(self) -> list[tuple[int, float]]:
        return list(zip(self.boundary_cell.tolist(), self.boundary_tau.tolist()))

    def cell_degree(self) -> np.ndarray:
        """Number of edges (interior + boundary) incident to each cell."""
        deg = np.bincount(self.edge_k, minlength=self.n_cells)
        deg += np.bincount(self.edge_l, minlength=self.n_cells)
        deg += np.bincount(self.boundary_cell, minlength=self.n_cells)
        return deg

    def interior_tau_sum(self) -> np.ndarray:
        """Per-cell sum of interior transmissibilities."""
        return np.bincount(
            np.concatenate([self.edge_k, self.edge_l]),
            weights=np.concatenate([self.edge_tau, self.edge_tau]),
            minlength=self.n_cells,
        )

    def as_grid(self, field_values) -> np.ndarray:
        """View a cell field as an ``(ny, nx)`` array (row ``j``, column ``i``)."""
        return np.asarray(field_values).reshape(self.ny, self.nx)


def build_regular_mesh(x_min, x_max, y_min, y_max, nx, ny) -> Mesh:
    """Uniform ``nx`` by ``ny`` mesh of the rectangle ``[x_min, x_max] x [y_min, y_max]``."""
    try:
        x_min, x_max, y_min, y_max = (float(b) for b in (x_min, x_max, y_min, y_max))
    except (TypeError, ValueError) as exc:
        raise ConfigurationError(f"domain bounds must be real numbers: {exc}") from None
    if not all(np.isfinite([x_min, x_max, y_min, y_max])):
        raise ConfigurationError("domain bounds must be finite")
    if not (x_max > x_min and y_max > y_min):
        raise ConfigurationError(
            f"empty domain [{x_min}, {x_max}] x [{y_min}, {y_max}]"
        )
    if int(nx) != nx or int(ny) != ny or nx < 1 or ny < 1:
        raise ConfigurationError(f"resolution must be positive integers, got {nx}x{ny}")
    nx, ny = int(nx), int(ny)

    hx = (x_max - x_min) / nx
    hy = (y_max - y_min) / ny
    xc = x_min + hx * (np.arange(nx) + 0.5)
    yc = y_min + hy * (np.arange(ny) + 0.5)
    X, Y = np.meshgrid(xc, yc)
    centers = np.column_stack([X.ravel(), Y.ravel()])

    idx = np.arange(nx * ny).reshape(ny, nx)
    # x-edges have length hy and span hx between centers; y-edges the reverse
    tau_x = transmissibility(hy, hx)
    tau_y = transmissibility(hx, hy)
    kx, lx = idx[:, :-1].ravel(), idx[:, 1:].ravel()
    ky, ly = idx[:-1, :].ravel(), idx[1:, :].ravel()
    edge_k = np.concatenate([kx, ky]).astype(np.intp)
    edge_l = np.concatenate([lx, ly]).astype(np.intp)
    edge_tau = np.concatenate([np.full(kx.size, tau_x), np.full(ky.size, tau_y)])

    btau_x = transmissibility(hy, hx / 2)
    btau_y = transmissibility(hx, hy / 2)
    left, right = idx[:, 0], idx[:, -1]
    bottom, top = idx[0, :], idx[-1, :]
    boundary_cell = np.concatenate([left, right, bottom, top]).astype(np.intp)
    boundary_tau = np.concatenate(
        [
            np.full(ny, btau_x),
            np.full(ny, btau_x),
            np.full(nx, btau_y),
            np.full(nx, btau_y),
        ]
    )

    for arr in (centers, edge_k, edge_l, edge_tau, boundary_cell, boundary_tau):
        arr.setflags(write=False)

    return Mesh(
        nx=nx,
        ny=ny,
        x_min=x_min,
        x_max=x_max,
        y_min=y_min,
        y_max=y_max,
        cell_measure=hx * hy,
        centers=centers,
        edge_k=edge_k,
        edge_l=edge_l,
        edge_tau=edge_tau,
        boundary_cell=boundary_cell,
        boundary_tau=boundary_tau,
    )
