"""Structured grids with ghost layers, boundary conditions and blanking masks.

Grids are cell-centered point-value containers: component axis first, then
x, then y, with a fixed ghost frame of width 3 on every side (the widest
stencil any sweep needs).  1D problems use ny = 1; the y axis is still
padded so that all indexing is uniform.

L-shaped domains are bounding boxes with blanked cells.  Internal wall
faces between active and blanked cells behave like reflective walls; the
mirror fill is direction-dependent and therefore applied per sweep (see
:func:`build_wall_maps`), not here.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

GHOST = 3


class ConfigError(ValueError):
    """Invalid case or boundary configuration."""


@dataclass
class EdgeBC:
    kind: str  # periodic | outflow | reflective | dirichlet
    state_fn: Optional[Callable] = None  # (t, coord_along_edge) -> (ncomp, ...) values

    def __post_init__(self):
        if self.kind not in ("periodic", "outflow", "reflective", "dirichlet"):
            raise ConfigError(f"unknown boundary kind {self.kind!r}")
        if self.kind == "dirichlet" and self.state_fn is None:
            raise ConfigError("dirichlet edge needs a state function")


@dataclass
class BoundarySpec:
    left: EdgeBC
    right: EdgeBC
    bottom: Optional[EdgeBC] = None
    top: Optional[EdgeBC] = None

    def __post_init__(self):
        if (self.left.kind == "periodic") != (self.right.kind == "periodic"):
            raise ConfigError("periodic must be set on both x edges or neither")
        if self.bottom is not None or self.top is not None:
            if self.bottom is None or self.top is None:
                raise ConfigError("2D spec needs both bottom and top edges")
            if (self.bottom.kind == "periodic") != (self.top.kind == "periodic"):
                raise ConfigError("periodic must be set on both y edges or neither")

    @property
    def periodic_x(self):
        return self.left.kind == "periodic"

    @property
    def periodic_y(self):
        return self.bottom is not None and self.bottom.kind == "periodic"


@dataclass
class FieldGrid:
    """Cell-centered states on a padded structured grid."""

    ncomp: int
    nx: int
    ny: int
    dx: float
    dy: float
    origin: tuple  # physical coordinates of interior cell center (0, 0)
    data: np.ndarray = field(default=None, repr=False)
    mask: np.ndarray = field(default=None, repr=False)  # (nx, ny), True = active

    def __post_init__(self):
        if self.nx < 1 or self.ny < 1 or self.dx <= 0 or self.dy <= 0:
            raise ConfigError("grid extents and spacings must be positive")
        if self.data is None:
            self.data = np.zeros((self.ncomp, self.nx + 2 * GHOST, self.ny + 2 * GHOST))
        if self.mask is None:
            self.mask = np.ones((self.nx, self.ny), dtype=bool)
        self._wall_maps = {}

    @property
    def ndim(self):
        return 1 if self.ny == 1 else 2

    def interior(self):
        g = GHOST
        return self.data[:, g : g + self.nx, g : g + self.ny]

    def x_centers(self):
        return self.origin[0] + self.dx * np.arange(self.nx)

    def y_centers(self):
        return self.origin[1] + self.dy * np.arange(self.ny)

    def cell_volume(self):
        return self.dx * (self.dy if self.ndim == 2 else 1.0)

    def copy(self):
        g = FieldGrid(
            self.ncomp, self.nx, self.ny, self.dx, self.dy, self.origin,
            data=self.data.copy(), mask=self.mask,
        )
        g._wall_maps = self._wall_maps
        return g

    def set_initial(self, fn):
        """Fill every interior cell (blanked ones too) from fn(x, y) -> (ncomp,...)."""
        xs = self.x_centers()[:, None]
        ys = self.y_centers()[None, :]
        vals = fn(xs, ys)
        self.interior()[...] = vals
        return self

    def wall_maps(self, direction):
        if direction not in self._wall_maps:
            self._wall_maps[direction] = build_wall_maps(self.mask, direction)
        return self._wall_maps[direction]


def _fill_x_edge(grid, edge, family, t, low):
    g, nx, ny = GHOST, grid.nx, grid.ny
    d = grid.data
    ys = grid.y_centers()
    if edge.kind == "periodic":
        if low:
            d[:, 0:g, g : g + ny] = d[:, nx : nx + g, g : g + ny]
        else:
            d[:, g + nx :, g : g + ny] = d[:, g : 2 * g, g : g + ny]
    elif edge.kind == "outflow":
        src = d[:, g : g + 1, g : g + ny] if low else d[:, g + nx - 1 : g + nx, g : g + ny]
        tgt = d[:, 0:g, g : g + ny] if low else d[:, g + nx :, g : g + ny]
        tgt[...] = src
    elif edge.kind == "reflective":
        if low:
            d[:, 0:g, g : g + ny] = d[:, g : 2 * g, g : g + ny][:, ::-1, :]
        else:
            d[:, g + nx :, g : g + ny] = d[:, nx : g + nx, g : g + ny][:, ::-1, :]
        slot = family.momentum_slot(0)
        if slot is not None:
            tgt = d[slot, 0:g, g : g + ny] if low else d[slot, g + nx :, g : g + ny]
            tgt *= -1.0
    else:  # dirichlet
        state = np.asarray(edge.state_fn(t, ys))
        if state.ndim == 1:
            state = np.repeat(state[:, None], ny, axis=1)
        tgt = d[:, 0:g, g : g + ny] if low else d[:, g + nx :, g : g + ny]
        tgt[...] = state[:, None, :]


def _fill_y_edge(grid, edge, family, t, low):
    g, nx, ny = GHOST, grid.nx, grid.ny
    d = grid.data
    # include the x ghost columns so corner blocks carry usable values
    xs = grid.origin[0] + grid.dx * (np.arange(nx + 2 * g) - g)
    if edge.kind == "periodic":
        if low:
            d[:, :, 0:g] = d[:, :, ny : ny + g]
        else:
            d[:, :, g + ny :] = d[:, :, g : 2 * g]
    elif edge.kind == "outflow":
        src = d[:, :, g : g + 1] if low else d[:, :, g + ny - 1 : g + ny]
        tgt = d[:, :, 0:g] if low else d[:, :, g + ny :]
        tgt[...] = src
    elif edge.kind == "reflective":
        if low:
            d[:, :, 0:g] = d[:, :, g : 2 * g][:, :, ::-1]
        else:
            d[:, :, g + ny :] = d[:, :, ny : g + ny][:, :, ::-1]
        slot = family.momentum_slot(1)
        if slot is not None:
            tgt = d[slot, :, 0:g] if low else d[slot, :, g + ny :]
            tgt *= -1.0
    else:  # dirichlet
        state = np.asarray(edge.state_fn(t, xs))
        if state.ndim == 1:
            state = np.repeat(state[:, None], nx + 2 * g, axis=1)
        tgt = d[:, :, 0:g] if low else d[:, :, g + ny :]
        tgt[...] = state[:, :, None]


def apply_boundaries(grid, spec, family, time=0.0):
    """Fill the ghost frame per edge kind; returns the grid.

    x edges are filled from interior data first, then y edges from interior
    plus x-ghost columns, so repeated application is idempotent.  For 1D
    grids the single interior row is broadcast into the y padding so the
    whole padded array stays finite.
    """
    _fill_x_edge(grid, spec.left, family, time, low=True)
    _fill_x_edge(grid, spec.right, family, time, low=False)
    if grid.ndim == 2:
        _fill_y_edge(grid, spec.bottom, family, time, low=True)
        _fill_y_edge(grid, spec.top, family, time, low=False)
    else:
        g = GHOST
        row = grid.data[:, :, g : g + 1]
        grid.data[:, :, 0:g] = row
        grid.data[:, :, g + 1 :] = row
    return grid


def validate_dirichlet_states(spec, family, grid, time=0.0):
    """Dirichlet inflow must be physically admissible under the family EOS."""
    edges = [(spec.left, grid.y_centers()), (spec.right, grid.y_centers())]
    if grid.ndim == 2:
        edges += [(spec.bottom, grid.x_centers()), (spec.top, grid.x_centers())]
    for edge, coords in edges:
        if edge is None or edge.kind != "dirichlet":
            continue
        state = np.asarray(edge.state_fn(time, coords), dtype=float)
        if state.ndim == 1:
            state = state[:, None]
        if getattr(family, "has_pressure", False):
            for slot in family.density_slots:
                if np.any(state[slot] <= 0.0):
                    raise ConfigError("dirichlet state has nonpositive density")
            if np.any(family.pressure(state) <= 0.0):
                raise ConfigError("dirichlet state has nonpositive pressure")
        if not np.all(np.isfinite(state)):
            raise ConfigError("dirichlet state is not finite")


def _snap_index(coord, anchor, h, what):
    s = (coord - anchor) / h
    i = round(s)
    if abs(s - i) > 1e-9 * max(1.0, abs(s)):
        raise ConfigError(f"{what}={coord} is not on the common lattice (h={h})")
    return int(i)


def corner_domain(rects, dx, dy, ncomp):
    """Bounding-box grid for a union of axis-aligned rectangles.

    Cells outside the union are blanked; faces between active and blanked
    cells act as reflective walls during sweeps.  Every rectangle edge must
    sit on the lattice spanned by (dx, dy) anchored at the union's lower
    left corner.
    """
    rects = [tuple(map(float, r)) for r in rects]
    x0 = min(r[0] for r in rects)
    x1 = max(r[1] for r in rects)
    y0 = min(r[2] for r in rects)
    y1 = max(r[3] for r in rects)
    nx = _snap_index(x1, x0, dx, "x-extent")
    ny = _snap_index(y1, y0, dy, "y-extent")
    mask = np.zeros((nx, ny), dtype=bool)
    for (ra, rb, rc, rd) in rects:
        ia = _snap_index(ra, x0, dx, "rect x0")
        ib = _snap_index(rb, x0, dx, "rect x1")
        ja = _snap_index(rc, y0, dy, "rect y0")
        jb = _snap_index(rd, y0, dy, "rect y1")
        mask[ia:ib, ja:jb] = True
    grid = FieldGrid(ncomp, nx, ny, dx, dy, (x0 + 0.5 * dx, y0 + 0.5 * dy), mask=mask)
    for direction in (0, 1):
        build_wall_maps(mask, direction)  # validates run lengths
    return grid


def build_wall_maps(mask, direction):
    """Mirror-fill index maps for internal walls along one sweep direction.

    Returns (lines, targets, sources) arrays in sweep layout: for line l the
    padded point ``targets[k]`` receives the mirrored value of ``sources[k]``
    (with the normal momentum negated by the caller).  Walls are faces where
    an active run meets blanked interior cells; domain edges are handled by
    the ordinary boundary fill instead.
    """
    m = mask if direction == 0 else mask.T
    npts, nlines = m.shape
    lines, tgts, srcs = [], [], []
    for l in range(nlines):
        col = m[:, l]
        i = 0
        while i < npts:
            if not col[i]:
                i += 1
                continue
            a = i
            while i < npts and col[i]:
                i += 1
            b = i - 1
            run = b - a + 1
            if run < GHOST:
                raise ConfigError(
                    f"active run of {run} cells along direction {direction} is "
                    f"narrower than the stencil ({GHOST})"
                )
            if a > 0:
                if a >= GHOST and np.any(col[a - GHOST : a]):
                    raise ConfigError("blanked gap narrower than the stencil")
                for k in range(GHOST):
                    lines.append(l)
                    tgts.append(GHOST + a - 1 - k)
                    srcs.append(GHOST + a + k)
            if b < npts - 1:
                if b + 1 + GHOST <= npts and np.any(col[b + 1 : b + 1 + GHOST]):
                    raise ConfigError("blanked gap narrower than the stencil")
                for k in range(GHOST):
                    lines.append(l)
                    tgts.append(GHOST + b + 1 + k)
                    srcs.append(GHOST + b - k)
    return (
        np.asarray(lines, dtype=np.int64),
        np.asarray(tgts, dtype=np.int64),
        np.asarray(srcs, dtype=np.int64),
    )


def fill_walls(sweep_data, maps, momentum_slot):
    """Apply mirror maps to a sweep-layout array (ncomp, nlines, npts)."""
    lines, tgts, srcs = maps
    if lines.size == 0:
        return sweep_data
    sweep_data[:, lines, tgts] = sweep_data[:, lines, srcs]
    if momentum_slot is not None:
        sweep_data[momentum_slot, lines, tgts] *= -1.0
    return sweep_data
