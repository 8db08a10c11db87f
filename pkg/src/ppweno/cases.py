"""Built-in benchmark cases: accuracy tests, low-density blasts, jets,
detonation and the three-species shock tube.

Each builder returns a fresh :class:`CaseSetup` with the initial condition
already on the grid.  The meaning of ``n`` is case-specific (cells on the
domain, cells per unit length, or cells per axis) and noted per builder.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .eos import (
    IdealGasEuler,
    ReactiveEuler,
    ThreeSpeciesGas,
    advection_law,
    burgers_law,
    conserved_from_primitive,
)
from .grid import BoundarySpec, ConfigError, EdgeBC, FieldGrid, corner_domain


@dataclass
class CaseSetup:
    """A runnable problem: family, initialized grid, boundaries and knobs."""

    name: str
    family: object
    grid: FieldGrid
    bc: BoundarySpec
    t_final: float
    cfl: float = 0.6
    rk_order: int = 4
    eps_weno: float = 1e-6
    characteristic: bool = True
    linear_weights: bool = False
    alpha_fixed: Optional[float] = None
    scalar_lower: object = None
    scalar_upper: Optional[float] = None
    exact_fn: Optional[Callable] = None  # (x, y, t) -> (ncomp, ...) conserved states
    exact_max: Optional[float] = None  # analytic max of the exact solution (scalar)
    error_component: int = 0
    source_aware_dt: bool = True
    description: str = ""

    def __post_init__(self):
        if self.t_final <= 0:
            raise ConfigError("final time must be positive")
        if not 0.0 < self.cfl < 1.0:
            raise ConfigError("cfl must lie in (0, 1)")


def post_shock_state(gamma, mach, rho0, p0):
    """Downstream (rho, u, p) of a normal shock running into gas at rest."""
    c0 = math.sqrt(gamma * p0 / rho0)
    m2 = mach * mach
    p1 = p0 * (1.0 + 2.0 * gamma / (gamma + 1.0) * (m2 - 1.0))
    rho1 = rho0 * (gamma + 1.0) * m2 / ((gamma - 1.0) * m2 + 2.0)
    u1 = 2.0 / (gamma + 1.0) * (mach - 1.0 / mach) * c0
    return rho1, u1, p1


def burgers_exact(x, t, n_iter=60):
    """Characteristic solve of the pre-shock Burgers solution for
    u(x,0) = (1 + sin x)/2 (Newton on the foot point)."""
    xi = np.array(x, dtype=float)
    for _ in range(n_iter):
        g = xi + 0.5 * (1.0 + np.sin(xi)) * t - x
        dg = 1.0 + 0.5 * np.cos(xi) * t
        step = g / dg
        xi = xi - step
        if np.max(np.abs(step)) < 1e-15:
            break
    return 0.5 * (1.0 + np.sin(xi))


# ---------------------------------------------------------------------------
# builders
# ---------------------------------------------------------------------------


def scalar_source(n=40):
    """Advection-reaction accuracy test on [0, 2pi]: u_t + u_x = -u,
    u(x,0)=sin^4 x; ``n`` is the cell count."""
    fam = advection_law(1.0, source_fn=lambda u: -u, source_rate=1.0)
    length = 2.0 * np.pi
    g = FieldGrid(1, n, 1, length / n, 1.0, (0.5 * length / n, 0.0))
    g.set_initial(lambda x, y: np.sin(x)[None] ** 4)
    bc = BoundarySpec(EdgeBC("periodic"), EdgeBC("periodic"))

    def exact(x, y, t):
        return (np.exp(-t) * np.sin(x - t) ** 4)[None]

    return CaseSetup(
        name="scalar-source", family=fam, grid=g, bc=bc, t_final=0.1,
        characteristic=False, scalar_lower="floor", exact_fn=exact,
        description="scalar advection with a decay source, floor-limited",
    )


def burgers_lxf(n=40):
    """Burgers accuracy test with the oversized fixed splitting speed 1.3,
    linear weights, dt = 0.886 dx / 1.3; ``n`` is the cell count."""
    fam = burgers_law()
    length = 2.0 * np.pi
    g = FieldGrid(1, n, 1, length / n, 1.0, (0.5 * length / n, 0.0))
    g.set_initial(lambda x, y: 0.5 * (1.0 + np.sin(x))[None])
    bc = BoundarySpec(EdgeBC("periodic"), EdgeBC("periodic"))

    def exact(x, y, t):
        return burgers_exact(x, t)[None]

    return CaseSetup(
        name="burgers-lxf", family=fam, grid=g, bc=bc, t_final=0.2, cfl=0.886,
        characteristic=False, linear_weights=True, alpha_fixed=1.3,
        scalar_lower=0.0, scalar_upper=1.0, exact_fn=exact, exact_max=1.0,
        description="Burgers with global LxF splitting, linear weights, bounds [0,1]",
    )


VORTEX_STRENGTH = 10.0828


def _vortex_primitives(x, y, eps_v, gamma, x0=5.0, y0=5.0):
    xb = x - x0
    yb = y - y0
    r2 = xb * xb + yb * yb
    du = eps_v / (2.0 * np.pi) * np.exp(0.5 * (1.0 - r2)) * (-yb)
    dv = eps_v / (2.0 * np.pi) * np.exp(0.5 * (1.0 - r2)) * xb
    dT = -(gamma - 1.0) * eps_v**2 / (8.0 * gamma * np.pi**2) * np.exp(1.0 - r2)
    temp = 1.0 + dT
    rho = temp ** (1.0 / (gamma - 1.0))
    p = temp ** (gamma / (gamma - 1.0))
    return rho, 1.0 + du, 1.0 + dv, p


def vortex(n=64, eps_vortex=VORTEX_STRENGTH):
    """Isentropic vortex advected by a uniform flow on [-5,15]^2, periodic;
    the strength drives the core to near-vacuum.  ``n`` cells per axis."""
    gamma = 1.4
    fam = IdealGasEuler(gamma=gamma, ndim=2)
    length = 20.0
    h = length / n
    g = FieldGrid(4, n, n, h, h, (-5.0 + 0.5 * h, -5.0 + 0.5 * h))

    def init(x, y):
        rho, u, v, p = _vortex_primitives(x, y, eps_vortex, gamma)
        return conserved_from_primitive(fam, rho, [u, v], p)

    g.set_initial(init)
    bc = BoundarySpec(EdgeBC("periodic"), EdgeBC("periodic"),
                      EdgeBC("periodic"), EdgeBC("periodic"))

    def exact(x, y, t):
        xs = -5.0 + np.mod(x - t + 5.0, length)
        ys = -5.0 + np.mod(y - t + 5.0, length)
        rho, u, v, p = _vortex_primitives(xs, ys, eps_vortex, gamma)
        return conserved_from_primitive(fam, rho, [u, v], p)

    return CaseSetup(
        name="vortex", family=fam, grid=g, bc=bc, t_final=0.01,
        eps_weno=1e-5, exact_fn=exact,
        description="near-vacuum isentropic vortex accuracy test",
    )


def double_rarefaction(n=400):
    """Outward Riemann fan on [-1,1] reaching near-vacuum at the center;
    ``n`` is the cell count (n=400 gives dx=1/200)."""
    fam = IdealGasEuler(gamma=1.4, ndim=1)
    h = 2.0 / n
    g = FieldGrid(3, n, 1, h, 1.0, (-1.0 + 0.5 * h, 0.0))

    def init(x, y):
        u = np.where(x < 0.0, -1.0, 1.0)
        return conserved_from_primitive(
            fam, np.full_like(x, 7.0), [u], np.full_like(x, 0.2)
        )

    g.set_initial(init)
    bc = BoundarySpec(EdgeBC("outflow"), EdgeBC("outflow"))
    return CaseSetup(
        name="double-rarefaction", family=fam, grid=g, bc=bc, t_final=0.6,
        description="symmetric double rarefaction, vacuum-adjacent",
    )


SEDOV1D_ENERGY = 3.2e6


def sedov_1d(n=801):
    """Point blast on a line: all energy in the cell centered at the origin.

    ``n`` must be odd so a cell center sits exactly at x=0; the spacing is
    dx = 4/(n-1), i.e. n=801 gives dx=1/200 on a domain a hair over [-2,2].
    """
    if n % 2 == 0:
        raise ConfigError("sedov-1d needs an odd cell count (origin-centered cell)")
    dx = 4.0 / (n - 1)
    g = FieldGrid(3, n, 1, dx, 1.0, (-0.5 * (n - 1) * dx, 0.0))
    fam = IdealGasEuler(gamma=1.4, ndim=1)

    def init(x, y):
        q = np.zeros((3,) + np.broadcast(x, y).shape)
        q[0] = 1.0
        q[2] = 1e-12
        return q

    g.set_initial(init)
    g.interior()[2, (n - 1) // 2, 0] = SEDOV1D_ENERGY / dx
    bc = BoundarySpec(EdgeBC("outflow"), EdgeBC("outflow"))
    return CaseSetup(
        name="sedov-1d", family=fam, grid=g, bc=bc, t_final=0.001,
        description="1D point blast with a concentrated-energy cell",
    )


SEDOV2D_ENERGY = 0.244816  # calibrated so the cylindrical shock reaches r=1 at t=1


def sedov_2d(n=80):
    """Quarter-plane point blast on [0,1.1]^2 with reflective walls at the
    energy corner; ``n`` cells per axis."""
    fam = IdealGasEuler(gamma=1.4, ndim=2)
    h = 1.1 / n
    g = FieldGrid(4, n, n, h, h, (0.5 * h, 0.5 * h))

    def init(x, y):
        q = np.zeros((4,) + np.broadcast(x, y).shape)
        q[0] = 1.0
        q[3] = 1e-12
        return q

    g.set_initial(init)
    g.interior()[3, 0, 0] = SEDOV2D_ENERGY / (h * h)
    bc = BoundarySpec(
        EdgeBC("reflective"), EdgeBC("outflow"), EdgeBC("reflective"), EdgeBC("outflow")
    )
    return CaseSetup(
        name="sedov-2d", family=fam, grid=g, bc=bc, t_final=1.0,
        description="2D quarter-plane point blast",
    )


def shock_diffraction(n=32):
    """Mach 5.09 shock diffracting around a backward-facing corner.

    Domain is the union of [0,1]x[6,11] and [1,13]x[0,11]; ``n`` is the cell
    count per unit length (n=32 gives the 416x352 bounding grid).
    """
    fam = IdealGasEuler(gamma=1.4, ndim=2)
    h = 1.0 / n
    g = corner_domain([(0.0, 1.0, 6.0, 11.0), (1.0, 13.0, 0.0, 11.0)], h, h, 4)
    rho1, u1, p1 = post_shock_state(1.4, 5.09, 1.4, 1.0)

    def init(x, y):
        behind = (x < 0.5) & (y >= 6.0)
        rho = np.where(behind, rho1, 1.4)
        u = np.where(behind, u1, 0.0)
        p = np.where(behind, p1, 1.0)
        return conserved_from_primitive(fam, rho, [u, np.zeros_like(u)], p)

    g.set_initial(init)
    inflow = conserved_from_primitive(fam, rho1, [u1, 0.0], p1)
    bc = BoundarySpec(
        EdgeBC("dirichlet", lambda t, y: np.repeat(inflow[:, None], np.size(y), axis=1)),
        EdgeBC("outflow"), EdgeBC("outflow"), EdgeBC("outflow"),
    )
    return CaseSetup(
        name="shock-diffraction", family=fam, grid=g, bc=bc, t_final=2.3,
        description="shock diffraction at a 90 degree corner",
    )


def _jet_case(name, domain, nx, ny, jet_u, t_final):
    fam = IdealGasEuler(gamma=5.0 / 3.0, ndim=2)
    (xa, xb), (ya, yb) = domain
    hx = (xb - xa) / nx
    hy = (yb - ya) / ny
    g = FieldGrid(4, nx, ny, hx, hy, (xa + 0.5 * hx, ya + 0.5 * hy))
    ambient = conserved_from_primitive(fam, 0.5, [0.0, 0.0], 0.4127)
    g.interior()[...] = ambient[:, None, None]

    jet = conserved_from_primitive(fam, 5.0, [jet_u, 0.0], 0.4127)
    still = conserved_from_primitive(fam, 5.0, [0.0, 0.0], 0.4127)

    def inflow(t, y):
        y = np.atleast_1d(np.asarray(y, dtype=float))
        inside = (y >= -0.05) & (y <= 0.05)
        return np.where(inside[None, :], jet[:, None], still[:, None])

    bc = BoundarySpec(
        EdgeBC("dirichlet", inflow), EdgeBC("outflow"), EdgeBC("outflow"), EdgeBC("outflow")
    )
    return CaseSetup(
        name=name, family=fam, grid=g, bc=bc, t_final=t_final,
        description=f"astrophysical jet, inflow speed {jet_u}",
    )


def mach80_jet(n=224):
    """Mach 80 jet into quiet gas on [0,2]x[-0.5,0.5]; ``n`` is nx (ny=n/2)."""
    return _jet_case("mach80-jet", ((0.0, 2.0), (-0.5, 0.5)), n, n // 2, 30.0, 0.07)


def mach2000_jet(n=200):
    """Mach 2000 jet on [0,1]x[-0.25,0.25]; ``n`` is nx (ny=n/2)."""
    return _jet_case("mach2000-jet", ((0.0, 1.0), (-0.25, 0.25)), n, n // 2, 800.0, 0.001)


def detonation(n=200):
    """Detonation wave diffracting around a corner, reactive Euler.

    Domain is the union of [0,1]x[2,5] and [1,5]x[0,5]; ``n`` is the cell
    count per bounding-box axis (must be a multiple of 5).
    """
    fam = ReactiveEuler()
    h = 5.0 / n
    g = corner_domain([(0.0, 1.0, 2.0, 5.0), (1.0, 5.0, 0.0, 5.0)], h, h, 5)
    left = np.array([11.0, 11.0 * 6.18, 0.0, 970.0, 11.0])
    right = np.array([1.0, 0.0, 0.0, 55.0, 1.0])

    def init(x, y):
        behind = x < 0.5
        shp = np.broadcast(x, y).shape
        q = np.where(behind[None] & np.ones(shp, dtype=bool)[None],
                     left[:, None, None], right[:, None, None])
        return q

    g.set_initial(init)
    bc = BoundarySpec(
        EdgeBC("dirichlet", lambda t, y: np.repeat(left[:, None], np.size(y), axis=1)),
        EdgeBC("reflective"), EdgeBC("reflective"), EdgeBC("reflective"),
    )
    return CaseSetup(
        name="detonation", family=fam, grid=g, bc=bc, t_final=0.6,
        description="corner detonation diffraction with Arrhenius source",
    )


THREE_SPECIES_LEFT = (5.251896311257204e-5, 3.748071704863518e-5, 2.962489471973072e-4)
THREE_SPECIES_RIGHT = (8.341661837019181e-8, 9.455418692098664e-11, 2.748909430004963e-7)


def three_species(n=1000):
    """High/low pressure shock tube for the dissociating three-species gas
    on [-1,1], initially in chemical equilibrium; ``n`` is the cell count."""
    fam = ThreeSpeciesGas()
    h = 2.0 / n
    g = FieldGrid(5, n, 1, h, 1.0, (-1.0 + 0.5 * h, 0.0))
    t0 = 8000.0

    def state(dens):
        q = np.array([dens[0], dens[1], dens[2], 0.0, 0.0])
        q[4] = fam.energy_from_temperature(q, t0)
        return q

    left = state(THREE_SPECIES_LEFT)
    right = state(THREE_SPECIES_RIGHT)

    def init(x, y):
        shp = np.broadcast(x, y).shape
        behind = (x < 0.0) & np.ones(shp, dtype=bool)
        return np.where(behind[None], left[:, None, None], right[:, None, None])

    g.set_initial(init)
    bc = BoundarySpec(EdgeBC("outflow"), EdgeBC("outflow"))
    return CaseSetup(
        name="three-species", family=fam, grid=g, bc=bc, t_final=1e-4,
        eps_weno=1e-20,
        description="three-species real-gas shock tube in chemical equilibrium",
    )


REGISTRY = {
    "scalar-source": (scalar_source, 40),
    "burgers-lxf": (burgers_lxf, 40),
    "vortex": (vortex, 64),
    "double-rarefaction": (double_rarefaction, 400),
    "sedov-1d": (sedov_1d, 801),
    "sedov-2d": (sedov_2d, 80),
    "shock-diffraction": (shock_diffraction, 32),
    "mach80-jet": (mach80_jet, 224),
    "mach2000-jet": (mach2000_jet, 200),
    "detonation": (detonation, 200),
    "three-species": (three_species, 1000),
}


def build_case(name, n=None, **overrides):
    if name not in REGISTRY:
        raise ConfigError(f"unknown case {name!r}; see `ppweno list`")
    builder, default_n = REGISTRY[name]
    setup = builder(n if n is not None else default_n)
    for key, val in overrides.items():
        if not hasattr(setup, key):
            raise ConfigError(f"unknown case option {key!r}")
        setattr(setup, key, val)
    setup.__post_init__()
    return setup


def case_descriptions():
    out = []
    for name, (builder, default_n) in REGISTRY.items():
        doc = (builder.__doc__ or "").strip().splitlines()[0]
        out.append((name, default_n, doc))
    return out
