"""Problem families: fluxes, eigen-structure, closures and source terms.

Four families are supported: scalar conservation laws (optionally with a
source), ideal-gas Euler in 1D/2D, reactive Euler with a one-step Arrhenius
reaction, and a three-species real-gas model with dissociation chemistry.

A family object bundles everything the solver needs to know about the
equations; state arrays are always (ncomp, ...) float64 with broadcasting
over the trailing grid axes.  Negative intermediate states are tolerated:
sound speeds are evaluated with absolute values under the radical.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

UNIVERSAL_GAS_CONSTANT = 8.31447215


class SingularStateError(ValueError):
    """Raised when a closure is evaluated on a state it cannot invert."""


class PositivityViolationError(RuntimeError):
    """A final-stage state broke its positivity floor (limiter bug or misuse)."""


# ---------------------------------------------------------------------------
# scalar laws
# ---------------------------------------------------------------------------


@dataclass
class ScalarLaw:
    """Scalar conservation law u_t + f(u)_x = s(u).

    ``flux_fn``/``dflux_fn`` evaluate f and f'; ``source_fn`` may be None.
    ``source_rate`` bounds |s'(u)| for the time-step formula.
    """

    flux_fn: Callable[[np.ndarray], np.ndarray]
    dflux_fn: Callable[[np.ndarray], np.ndarray]
    source_fn: Optional[Callable[[np.ndarray], np.ndarray]] = None
    source_rate: float = 0.0

    ncomp = 1
    ndim = 1
    density_slots: tuple = ()
    has_pressure = False

    def flux(self, q, direction=0):
        return self.flux_fn(q)

    def max_speed(self, q):
        return float(np.max(np.abs(self.dflux_fn(q))))

    def char_alphas(self, q, direction=0):
        return np.array([self.max_speed(q)])

    def right_eigenvectors(self, avg, direction=0):
        return None

    def source(self, q):
        if self.source_fn is None:
            return None
        return self.source_fn(q), 0

    def source_rate_max(self, q):
        return self.source_rate

    def momentum_slot(self, direction):
        return None


def advection_law(speed=1.0, source_fn=None, source_rate=0.0):
    return ScalarLaw(
        flux_fn=lambda u: speed * u,
        dflux_fn=lambda u: np.full_like(u, speed),
        source_fn=source_fn,
        source_rate=source_rate,
    )


def burgers_law():
    return ScalarLaw(flux_fn=lambda u: 0.5 * u * u, dflux_fn=lambda u: u)


# ---------------------------------------------------------------------------
# ideal-gas Euler
# ---------------------------------------------------------------------------


@dataclass
class IdealGasEuler:
    """Compressible Euler closed by E = p/(gamma-1) + kinetic energy.

    1D states are (rho, m, E); 2D states are (rho, mu, mv, E).
    """

    gamma: float = 1.4
    ndim: int = 1

    has_pressure = True

    def __post_init__(self):
        if self.gamma <= 1.0:
            raise ValueError("gamma must exceed 1")
        if self.ndim not in (1, 2):
            raise ValueError("ndim must be 1 or 2")

    @property
    def ncomp(self):
        return 2 + self.ndim

    @property
    def density_slots(self):
        return (0,)

    @property
    def momentum_slots(self):
        return tuple(range(1, 1 + self.ndim))

    def momentum_slot(self, direction):
        return 1 + direction

    def kinetic(self, q):
        k = q[1] * q[1]
        if self.ndim == 2:
            k = k + q[2] * q[2]
        return 0.5 * k / q[0]

    def pressure(self, q):
        return (self.gamma - 1.0) * (q[-1] - self.kinetic(q))

    def pp_value(self, q):
        return self.pressure(q)

    @property
    def pp_scale(self):
        return self.gamma - 1.0

    def pp_linear_parts(self, arr):
        """(density, effective energy, momenta): the linear ingredients of the
        pressure functional, valid for states and state differences alike."""
        return arr[0], arr[-1], [arr[1 + d] for d in range(self.ndim)]

    def sound_speed(self, q):
        return np.sqrt(self.gamma * np.abs(self.pressure(q)) / np.abs(q[0]))

    def velocity(self, q, direction=0):
        return q[1 + direction] / q[0]

    def flux(self, q, direction=0):
        rho = q[0]
        un = q[1 + direction] / rho
        p = self.pressure(q)
        out = np.empty_like(q)
        out[0] = q[1 + direction]
        for d in range(self.ndim):
            out[1 + d] = q[1 + d] * un
        out[1 + direction] += p
        out[-1] = (q[-1] + p) * un
        return out

    def max_speed(self, q):
        c = self.sound_speed(q)
        lam = 0.0
        for d in range(self.ndim):
            lam = max(lam, float(np.max(np.abs(q[1 + d] / q[0]) + c)))
        return lam

    def char_alphas(self, q, direction=0):
        un = q[1 + direction] / q[0]
        c = self.sound_speed(q)
        lo = float(np.max(np.abs(un - c)))
        mid = float(np.max(np.abs(un)))
        hi = float(np.max(np.abs(un + c)))
        if self.ndim == 1:
            return np.array([lo, mid, hi])
        return np.array([lo, mid, mid, hi])

    def right_eigenvectors(self, avg, direction=0):
        """Right eigenvector matrices at given states, shape (..., nc, nc)."""
        rho = avg[0]
        u = avg[1] / rho
        p = self.pressure(avg)
        c = np.sqrt(self.gamma * np.abs(p) / np.abs(rho))
        h = (avg[-1] + p) / rho
        nc = self.ncomp
        out = np.zeros(avg.shape[1:] + (nc, nc))
        if self.ndim == 1:
            ek = 0.5 * u * u
            out[..., 0, 0] = 1.0
            out[..., 1, 0] = u - c
            out[..., 2, 0] = h - u * c
            out[..., 0, 1] = 1.0
            out[..., 1, 1] = u
            out[..., 2, 1] = ek
            out[..., 0, 2] = 1.0
            out[..., 1, 2] = u + c
            out[..., 2, 2] = h + u * c
            return out
        v = avg[2] / rho
        ek = 0.5 * (u * u + v * v)
        if direction == 0:
            un, ut, nslot, tslot = u, v, 1, 2
        else:
            un, ut, nslot, tslot = v, u, 2, 1
        # acoustic pair, entropy wave, shear wave
        out[..., 0, 0] = 1.0
        out[..., nslot, 0] = un - c
        out[..., tslot, 0] = ut
        out[..., 3, 0] = h - un * c
        out[..., 0, 1] = 1.0
        out[..., nslot, 1] = un
        out[..., tslot, 1] = ut
        out[..., 3, 1] = ek
        out[..., tslot, 2] = 1.0
        out[..., 3, 2] = ut
        out[..., 0, 3] = 1.0
        out[..., nslot, 3] = un + c
        out[..., tslot, 3] = ut
        out[..., 3, 3] = h + un * c
        return out

    def source(self, q):
        return None

    def source_rate_max(self, q):
        return 0.0


# ---------------------------------------------------------------------------
# reactive Euler (one-step Arrhenius detonation model)
# ---------------------------------------------------------------------------


@dataclass
class ReactiveEuler:
    """2D Euler with reactant mass fraction: states (rho, mu, mv, E, rho*Y).

    The total energy carries the chemical term rho*q_heat*Y, so the
    thermodynamic pressure subtracts it.  The reaction progress source is
    -k_rate * rho*Y * exp(-t_act / T) with T = p/rho.
    """

    gamma: float = 1.2
    q_heat: float = 50.0
    t_act: float = 50.0
    k_rate: float = 2566.4

    ncomp = 5
    ndim = 2
    density_slots: tuple = (0,)
    has_pressure = True

    def __post_init__(self):
        if self.k_rate < 0:
            raise ValueError("rate constant must be nonnegative")

    @property
    def momentum_slots(self):
        return (1, 2)

    def momentum_slot(self, direction):
        return 1 + direction

    def kinetic(self, q):
        return 0.5 * (q[1] * q[1] + q[2] * q[2]) / q[0]

    def pressure(self, q):
        return (self.gamma - 1.0) * (q[3] - self.kinetic(q) - self.q_heat * q[4])

    def pp_value(self, q):
        return self.pressure(q)

    @property
    def pp_scale(self):
        return self.gamma - 1.0

    def pp_linear_parts(self, arr):
        return arr[0], arr[3] - self.q_heat * arr[4], [arr[1], arr[2]]

    def sound_speed(self, q):
        return np.sqrt(self.gamma * np.abs(self.pressure(q)) / np.abs(q[0]))

    def velocity(self, q, direction=0):
        return q[1 + direction] / q[0]

    def flux(self, q, direction=0):
        rho = q[0]
        un = q[1 + direction] / rho
        p = self.pressure(q)
        out = np.empty_like(q)
        out[0] = q[1 + direction]
        out[1] = q[1] * un
        out[2] = q[2] * un
        out[1 + direction] += p
        out[3] = (q[3] + p) * un
        out[4] = q[4] * un
        return out

    def max_speed(self, q):
        c = self.sound_speed(q)
        lx = float(np.max(np.abs(q[1] / q[0]) + c))
        ly = float(np.max(np.abs(q[2] / q[0]) + c))
        return max(lx, ly)

    def char_alphas(self, q, direction=0):
        un = q[1 + direction] / q[0]
        c = self.sound_speed(q)
        lo = float(np.max(np.abs(un - c)))
        mid = float(np.max(np.abs(un)))
        hi = float(np.max(np.abs(un + c)))
        return np.array([lo, mid, mid, mid, hi])

    def right_eigenvectors(self, avg, direction=0):
        rho = avg[0]
        u = avg[1] / rho
        v = avg[2] / rho
        y = avg[4] / rho
        p = self.pressure(avg)
        c = np.sqrt(self.gamma * np.abs(p) / np.abs(rho))
        h = (avg[3] + p) / rho
        ek = 0.5 * (u * u + v * v)
        if direction == 0:
            un, ut, nslot, tslot = u, v, 1, 2
        else:
            un, ut, nslot, tslot = v, u, 2, 1
        out = np.zeros(avg.shape[1:] + (5, 5))
        out[..., 0, 0] = 1.0
        out[..., nslot, 0] = un - c
        out[..., tslot, 0] = ut
        out[..., 3, 0] = h - un * c
        out[..., 4, 0] = y
        out[..., 0, 1] = 1.0
        out[..., nslot, 1] = un
        out[..., tslot, 1] = ut
        out[..., 3, 1] = ek + self.q_heat * y
        out[..., 4, 1] = y
        out[..., tslot, 2] = 1.0
        out[..., 3, 2] = ut
        out[..., 3, 3] = self.q_heat
        out[..., 4, 3] = 1.0
        out[..., 0, 4] = 1.0
        out[..., nslot, 4] = un + c
        out[..., tslot, 4] = ut
        out[..., 3, 4] = h + un * c
        out[..., 4, 4] = y
        return out

    def source(self, q):
        t = self.pressure(q) / q[0]
        pos = t > 0.0
        clamped = int(np.size(pos) - np.count_nonzero(pos))
        rate = np.where(pos, np.exp(-self.t_act / np.where(pos, t, 1.0)), 0.0)
        omega = -self.k_rate * q[4] * rate
        out = np.zeros_like(q)
        out[4] = omega
        return out, clamped

    def source_rate_max(self, q):
        return self.k_rate


# ---------------------------------------------------------------------------
# three-species dissociation model (general equation of state)
# ---------------------------------------------------------------------------


@dataclass
class ThreeSpeciesGas:
    """1D five-equation model for O / O2 / N2 with O2 + N2 <-> 2 O + N2.

    States are (rho_O, rho_O2, rho_N2, m, E).  Internal energies are linear
    in temperature (monoatomic 3/2, diatomic 5/2), O carries the formation
    enthalpy, and pressure follows the ideal-mixture law p = R T sum(rho_s/M_s).
    """

    molar_masses: tuple = (0.016, 0.032, 0.028)
    heat_coeffs: tuple = (1.5, 2.5, 2.5)
    h0_first: float = 1.558e7
    gas_constant: float = UNIVERSAL_GAS_CONSTANT
    c0: float = 2.9e17
    e0: float = 59750.0
    rate_fit: tuple = (2.855, 0.988, -6.181, -0.023, -0.001)

    ncomp = 5
    ndim = 1
    density_slots: tuple = (0, 1, 2)
    has_pressure = True

    @property
    def momentum_slots(self):
        return (3,)

    def momentum_slot(self, direction):
        return 3

    def total_density(self, q):
        return q[0] + q[1] + q[2]

    def molar_density(self, q):
        m1, m2, m3 = self.molar_masses
        return q[0] / m1 + q[1] / m2 + q[2] / m3

    def heat_capacity(self, q):
        """Volumetric heat capacity sum(rho_s c_s R / M_s) (dE/dT at fixed rho)."""
        r = self.gas_constant
        m1, m2, m3 = self.molar_masses
        c1, c2, c3 = self.heat_coeffs
        return r * (c1 * q[0] / m1 + c2 * q[1] / m2 + c3 * q[2] / m3)

    def thermal_energy(self, q):
        """E minus kinetic and formation parts; positive iff T is positive."""
        rho = self.total_density(q)
        return q[4] - 0.5 * q[3] * q[3] / rho - self.h0_first * q[0]

    def temperature(self, q):
        cv = self.heat_capacity(q)
        if np.any(cv <= 0.0):
            raise SingularStateError("nonpositive heat capacity in temperature inversion")
        return self.thermal_energy(q) / cv

    def energy_from_temperature(self, q_partial, t):
        """Total energy for given partial densities, momentum and temperature."""
        rho = q_partial[0] + q_partial[1] + q_partial[2]
        cv = self.heat_capacity(q_partial)
        return cv * t + self.h0_first * q_partial[0] + 0.5 * q_partial[3] * q_partial[3] / rho

    def pressure(self, q):
        cv = self.heat_capacity(q)
        t = self.thermal_energy(q) / cv
        return self.gas_constant * t * self.molar_density(q)

    def pp_value(self, q):
        return self.thermal_energy(q)

    @property
    def pp_scale(self):
        return 1.0

    def pp_linear_parts(self, arr):
        return arr[0] + arr[1] + arr[2], arr[4] - self.h0_first * arr[0], [arr[3]]

    def gamma_eff(self, q):
        return 1.0 + np.abs(self.gas_constant * self.molar_density(q) / self.heat_capacity(q))

    def sound_speed(self, q):
        g = self.gamma_eff(q)
        return np.sqrt(g * np.abs(self.pressure(q)) / np.abs(self.total_density(q)))

    def velocity(self, q, direction=0):
        return q[3] / self.total_density(q)

    def flux(self, q, direction=0):
        rho = self.total_density(q)
        u = q[3] / rho
        p = self.pressure(q)
        out = np.empty_like(q)
        out[0] = q[0] * u
        out[1] = q[1] * u
        out[2] = q[2] * u
        out[3] = q[3] * u + p
        out[4] = (q[4] + p) * u
        return out

    def max_speed(self, q):
        u = q[3] / self.total_density(q)
        return float(np.max(np.abs(u) + self.sound_speed(q)))

    def char_alphas(self, q, direction=0):
        u = q[3] / self.total_density(q)
        c = self.sound_speed(q)
        lo = float(np.max(np.abs(u - c)))
        mid = float(np.max(np.abs(u)))
        hi = float(np.max(np.abs(u + c)))
        return np.array([lo, mid, mid, mid, hi])

    def right_eigenvectors(self, avg, direction=0):
        r = self.gas_constant
        m = self.molar_masses
        cs = self.heat_coeffs
        rho = self.total_density(avg)
        u = avg[3] / rho
        cv = self.heat_capacity(avg)
        n = self.molar_density(avg)
        t = self.thermal_energy(avg) / cv
        p = r * t * n
        kappa = r * n / cv
        c = np.sqrt((1.0 + np.abs(kappa)) * np.abs(p) / np.abs(rho))
        h = (avg[4] + p) / rho
        out = np.zeros(avg.shape[1:] + (5, 5))
        out[..., 0, 0] = avg[0] / rho
        out[..., 1, 0] = avg[1] / rho
        out[..., 2, 0] = avg[2] / rho
        out[..., 3, 0] = u - c
        out[..., 4, 0] = h - u * c
        for s in range(3):
            # species wave riding the flow: zero pressure and velocity jump
            dp_ds = r * t / m[s] + kappa * (
                0.5 * u * u - (self.h0_first if s == 0 else 0.0) - t * r * cs[s] / m[s]
            )
            out[..., s, 1 + s] = 1.0
            out[..., 3, 1 + s] = u
            out[..., 4, 1 + s] = u * u - dp_ds / kappa
        out[..., 0, 4] = avg[0] / rho
        out[..., 1, 4] = avg[1] / rho
        out[..., 2, 4] = avg[2] / rho
        out[..., 3, 4] = u + c
        out[..., 4, 4] = h + u * c
        return out

    def reaction_rate(self, q):
        """Net molar production rate of O pairs; zero where T is nonpositive."""
        m1, m2, _ = self.molar_masses
        cv = self.heat_capacity(q)
        t = self.thermal_energy(q) / cv
        pos = t > 0.0
        nclamp = int(np.size(pos) - np.count_nonzero(pos))
        ts = np.where(pos, t, 1.0)
        b1, b2, b3, b4, b5 = self.rate_fit
        z = 1.0e4 / ts
        kf = self.c0 * ts**-2 * np.exp(-self.e0 / ts)
        kb = kf / np.exp(b1 + b2 * np.log(z) + b3 * z + b4 * z * z + b5 * z**3)
        omega = (kf * q[1] / m2 - kb * (q[0] / m1) ** 2) * self.molar_density(q)
        return np.where(pos, omega, 0.0), nclamp

    def source(self, q):
        omega, nclamp = self.reaction_rate(q)
        m1, m2, _ = self.molar_masses
        out = np.zeros_like(q)
        out[0] = 2.0 * m1 * omega
        out[1] = -m2 * omega
        return out, nclamp

    def source_rate_max(self, q):
        omega, _ = self.reaction_rate(q)
        m1, m2, _ = self.molar_masses
        r1 = np.where(q[0] != 0.0, np.abs(2.0 * m1 * omega / q[0]), 0.0)
        r2 = np.where(q[1] != 0.0, np.abs(m2 * omega / q[1]), 0.0)
        return float(max(np.max(r1), np.max(r2)))


# ---------------------------------------------------------------------------
# shared helpers
# ---------------------------------------------------------------------------


def pressure_and_sound(q, family, stage_mode="final", floor=0.0):
    """Pressure and sound speed with the intermediate-stage guard.

    Intermediate stages evaluate c with |p| and |rho| under the radical and
    never raise.  Final mode checks the positivity floor and raises when the
    flux limiter failed to hold it.
    """
    p = family.pressure(q)
    c = family.sound_speed(q)
    if stage_mode == "final" and np.any(p < floor):
        raise PositivityViolationError(
            f"pressure below floor {floor!r} in a final-stage state"
        )
    return p, c


def conserved_from_primitive(family, rho, velocities, p, extra=None):
    """Assemble a conserved state from primitive fields (broadcasting)."""
    shp = np.broadcast(rho, p, *velocities).shape
    q = np.zeros((family.ncomp,) + shp)
    if isinstance(family, IdealGasEuler):
        q[0] = rho
        kin = np.zeros(shp)
        for d, v in enumerate(velocities):
            q[1 + d] = rho * v
            kin = kin + 0.5 * rho * np.asarray(v) ** 2
        q[-1] = p / (family.gamma - 1.0) + kin
        return q
    if isinstance(family, ReactiveEuler):
        y = extra
        q[0] = rho
        q[1] = rho * velocities[0]
        q[2] = rho * velocities[1]
        q[4] = rho * y
        kin = 0.5 * rho * (np.asarray(velocities[0]) ** 2 + np.asarray(velocities[1]) ** 2)
        q[3] = p / (family.gamma - 1.0) + kin + family.q_heat * rho * y
        return q
    raise TypeError(f"unsupported family {type(family).__name__}")
