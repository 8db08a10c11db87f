"""Runge-Kutta stepping in flux-accumulation form.

Intermediate stages advance unlimited; the final stage is rewritten as a
single conservative update with the stage-combined flux, which is where the
flux limiter blends toward the first-order monotone flux.  The combined
source is blended first (per cell), then the face parameters are found.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

import numpy as np

from . import limiter as lim
from .eos import PositivityViolationError
from .grid import GHOST, ConfigError, apply_boundaries
from .weno import WenoConfig, direction_fluxes


class NonFiniteState(lim.SolverAbort):
    pass


@dataclass(frozen=True)
class RkScheme:
    """Explicit RK scheme with a final-stage flux combination.

    ``stage_rows`` hold the coefficients of the stored stage derivatives in
    each intermediate stage update; ``weights_num``/``weights_den`` give the
    exact rational combination weights of the stage fluxes.
    """

    name: str
    stage_rows: tuple
    weights_num: tuple
    weights_den: int
    stage_times: tuple

    def __post_init__(self):
        if sum(self.weights_num) != self.weights_den:
            raise ConfigError("flux combination weights must sum to one")

    @property
    def nstages(self):
        return len(self.weights_num)

    @property
    def weights(self):
        return tuple(Fraction(n, self.weights_den) for n in self.weights_num)


RK3 = RkScheme(
    name="rk3",
    stage_rows=((1.0,), (0.25, 0.25)),
    weights_num=(1, 1, 4),
    weights_den=6,
    stage_times=(0.0, 1.0, 0.5),
)

RK4 = RkScheme(
    name="rk4",
    stage_rows=((0.5,), (0.0, 0.5), (0.0, 0.0, 1.0)),
    weights_num=(1, 2, 2, 1),
    weights_den=6,
    stage_times=(0.0, 0.5, 0.5, 1.0),
)


def rk_scheme(order):
    if order == 3:
        return RK3
    if order == 4:
        return RK4
    raise ConfigError(f"unsupported RK order {order}")


@dataclass
class TimeStepPolicy:
    cfl: float = 0.6
    source_aware: bool = True

    def __post_init__(self):
        if not 0.0 < self.cfl < 1.0:
            raise ConfigError("cfl must lie in (0, 1)")


@dataclass
class StageFluxAccumulator:
    """Final-stage ingredients: combined high-order fluxes, the monotone
    fluxes at time level n, and the combined/initial sources."""

    h_rk: list
    h_low: list
    s_rk: Optional[np.ndarray]
    s_n: Optional[np.ndarray]


@dataclass
class StepRecord:
    t: float
    dt: float
    min_density: float = np.nan
    min_pressure: float = np.nan
    min_floor_value: float = np.nan
    min_value: float = np.nan
    eps_rho: float = np.nan
    eps_p: float = np.nan
    theta_min: float = 1.0
    theta_limited: int = 0
    source_factor_min: float = 1.0
    eigen_fallbacks: int = 0
    rate_clamps: int = 0

    FIELDS = (
        "t", "dt", "min_density", "min_pressure", "min_floor_value", "min_value",
        "eps_rho", "eps_p", "theta_min", "theta_limited", "source_factor_min",
        "eigen_fallbacks", "rate_clamps",
    )

    def row(self):
        return [getattr(self, f) for f in self.FIELDS]


@dataclass
class SolverContext:
    family: object
    bc: object
    scheme: RkScheme = RK4
    weno: WenoConfig = field(default_factory=WenoConfig)
    policy: lim.LimiterPolicy = field(default_factory=lim.LimiterPolicy)
    dt_policy: TimeStepPolicy = field(default_factory=TimeStepPolicy)
    scalar_lower: object = None  # None | float | "floor"
    scalar_upper: Optional[float] = None


def compute_dt(grid, family, dt_policy, weno_cfg=None, time=0.0):
    """Time step from the bound-preservation constraint of the monotone scheme.

    dt = cfl / (lam_max * sum_d 1/h_d + s_rate); the source rate term enters
    only for source-aware policies.  A fixed splitting speed (when set)
    replaces the measured maximum wave speed.
    """
    if weno_cfg is not None and weno_cfg.alpha_fixed is not None:
        lam_max = weno_cfg.alpha_fixed
    else:
        lam_max = family.max_speed(grid.data)
    denom = lam_max / grid.dx
    if grid.ndim == 2:
        denom += lam_max / grid.dy
    if dt_policy.source_aware and family.source(grid.interior()) is not None:
        denom += family.source_rate_max(grid.interior())
    if denom <= 0.0:
        raise ConfigError("no wave speed and no source rate: time step undefined")
    return dt_policy.cfl / denom


def _check_finite(arr, mask, what, step=None):
    sub = arr[:, mask]
    if not np.all(np.isfinite(sub)):
        bad = np.argwhere(~np.isfinite(arr))
        cell = tuple(int(v) for v in bad[0][1:])
        raise NonFiniteState(f"non-finite state in {what}", step=step, cell=cell)


def rk_step(grid, t, dt, ctx, step_index=0):
    """Advance one limited RK step in place; returns (record, accumulator).

    Stage states evolve without limiting; the final update applies the
    source blend and the face limiters to the combined fluxes.  Blanked
    cells are frozen throughout.
    """
    family, scheme = ctx.family, ctx.scheme
    mask = grid.mask
    active_any = bool(mask.all())
    lamd = [dt / grid.dx] + ([dt / grid.dy] if grid.ndim == 2 else [])
    ndirs = len(lamd)
    wnum, wden = scheme.weights_num, scheme.weights_den

    apply_boundaries(grid, ctx.bc, family, time=t)
    u0 = grid.interior().copy()
    cur = grid
    h_low = [None] * ndirs
    h_acc = [None] * ndirs
    stage_rhs = []
    s_n = None
    s_acc = None
    fallbacks = 0
    clamps = 0

    for k in range(scheme.nstages):
        if ctx.weno.alpha_fixed is not None:
            alpha_glob = ctx.weno.alpha_fixed
        else:
            alpha_glob = family.max_speed(cur.data)
        rhs = None
        for d in range(ndirs):
            if ctx.weno.alpha_fixed is not None:
                alphas = np.full(family.ncomp, ctx.weno.alpha_fixed)
            elif ctx.weno.characteristic:
                alphas = family.char_alphas(cur.data, d)
            else:
                alphas = np.full(family.ncomp, alpha_glob)
            hi, lo, nfb = direction_fluxes(
                family, grid, cur.data, d, ctx.weno, alphas, alpha_glob,
                want_monotone=(k == 0),
            )
            fallbacks += nfb
            if k == 0:
                h_low[d] = lo
            h_acc[d] = wnum[k] * hi if h_acc[d] is None else h_acc[d] + wnum[k] * hi
            rhs = -_face_difference(hi, d) * (lamd[d] / dt) if rhs is None \
                else rhs - _face_difference(hi, d) * (lamd[d] / dt)
        src = family.source(cur.interior())
        if src is not None:
            s_k, ncl = src
            clamps += ncl
            rhs = rhs + s_k
            if k == 0:
                s_n = s_k
            s_acc = wnum[k] * s_k if s_acc is None else s_acc + wnum[k] * s_k
        stage_rhs.append(rhs)
        if k < scheme.nstages - 1:
            nxt = u0.copy()
            for j, a in enumerate(scheme.stage_rows[k]):
                if a != 0.0:
                    nxt += (dt * a) * stage_rhs[j]
            if not active_any:
                nxt = np.where(mask[None, :, :], nxt, u0)
            cur = grid.copy()
            cur.interior()[...] = nxt
            _check_finite(nxt, mask, f"stage {k + 1}", step=step_index)
            apply_boundaries(cur, ctx.bc, family, time=t + scheme.stage_times[k + 1] * dt)

    h_rk = [acc / wden for acc in h_acc]
    s_rk = s_acc / wden if s_acc is not None else None
    accum = StageFluxAccumulator(h_rk=h_rk, h_low=h_low, s_rk=s_rk, s_n=s_n)

    record = StepRecord(t=t, dt=dt, eigen_fallbacks=fallbacks, rate_clamps=clamps)
    u_first = u0.copy()
    for d in range(ndirs):
        u_first -= lamd[d] * _face_difference(h_low[d], d)
    if s_n is not None:
        u_first += dt * s_n

    pol = ctx.policy
    s_tilde = s_rk
    thetas = None
    if pol.enabled:
        if family.has_pressure:
            floors = lim.floors_from_first_order(family, u_first, active=mask)
            floors.eps_div = pol.eps_div
            record.eps_rho, record.eps_p = floors.eps_rho, floors.eps_p
            if s_rk is not None:
                if pol.force_source_factor is not None:
                    r = np.full(u0.shape[1:], float(pol.force_source_factor))
                else:
                    r = lim.system_source_factor(
                        family, u_first, dt * (s_rk - s_n), floors.eps_rho,
                        floors.eps_p, where=mask,
                    )
                record.source_factor_min = float(r[mask].min())
                s_tilde = s_n + r * (s_rk - s_n)
            base_source = s_tilde
            if pol.force_theta is None:
                thetas = lim.system_face_theta(
                    family, u0, h_low, h_rk, lamd, dt, base_source, floors,
                    periodic_flags=_periodic_flags(ctx.bc, ndirs), active=_active_or_none(mask),
                )
        else:
            lower, upper = _scalar_bounds(ctx, u_first, mask, pol)
            if s_rk is not None:
                if pol.force_source_factor is not None:
                    r = np.full(u0.shape[1:], float(pol.force_source_factor))
                else:
                    r = lim.source_factor(
                        u0[0], h_low[0][0, :-1], h_low[0][0, 1:], dt, lamd[0],
                        s_n[0], s_rk[0], lower if lower is not None else 0.0,
                    )[None]
                record.source_factor_min = float(r.min())
                s_tilde = s_n + r * (s_rk - s_n)
            if pol.force_theta is None:
                theta1d = lim.scalar_face_theta(
                    u0[:, :, 0], h_low[0][:, :, 0], h_rk[0][:, :, 0], lamd[0], dt,
                    s_tilde[:, :, 0] if s_tilde is not None else None,
                    lower, upper, _periodic_flags(ctx.bc, 1)[0],
                    eps_div=pol.eps_div,
                )[0]
                thetas = [theta1d[:, None]]
        if pol.force_theta is not None:
            thetas = _constant_thetas(u0, ndirs, float(pol.force_theta))
    else:
        if pol.force_source_factor is not None and s_rk is not None:
            s_tilde = s_n + float(pol.force_source_factor) * (s_rk - s_n)
        thetas = _constant_thetas(u0, ndirs, 1.0 if pol.force_theta is None
                                  else float(pol.force_theta))

    u_new = u0.copy()
    for d in range(ndirs):
        th = thetas[d][None]
        h_tilde = np.where(th >= 1.0, h_rk[d], h_low[d] + th * (h_rk[d] - h_low[d]))
        u_new -= lamd[d] * _face_difference(h_tilde, d)
        record.theta_limited += int(np.count_nonzero(thetas[d] < 1.0))
        record.theta_min = min(record.theta_min, float(thetas[d].min()))
    if s_tilde is not None:
        u_new += dt * s_tilde
    if not active_any:
        u_new = np.where(mask[None, :, :], u_new, u0)
    _check_finite(u_new, mask, "final update", step=step_index)

    if family.has_pressure:
        dens = min(float(u_new[dslot][mask].min()) for dslot in family.density_slots)
        ppv = float(family.pp_value(u_new)[mask].min())
        record.min_density = dens
        record.min_floor_value = ppv
        record.min_pressure = float(family.pressure(u_new)[mask].min())
        if pol.enabled and pol.force_theta is None:
            if dens < record.eps_rho - 1e-15 or ppv < record.eps_p - 1e-15:
                raise PositivityViolationError(
                    f"limited update broke its floors at step {step_index}: "
                    f"min density {dens:.3e} vs {record.eps_rho:.3e}, "
                    f"min floor value {ppv:.3e} vs {record.eps_p:.3e}"
                )
    else:
        record.min_value = float(u_new[0][mask].min())

    grid.interior()[...] = u_new
    return record, accum


def _face_difference(faces, d):
    lo = [slice(None)] * (faces.ndim - 1)
    hi = [slice(None)] * (faces.ndim - 1)
    lo[d] = slice(0, -1)
    hi[d] = slice(1, None)
    return faces[(slice(None),) + tuple(hi)] - faces[(slice(None),) + tuple(lo)]


def _periodic_flags(bc, ndirs):
    flags = [bc.periodic_x]
    if ndirs == 2:
        flags.append(bc.periodic_y)
    return flags


def _active_or_none(mask):
    return None if mask.all() else mask


def _constant_thetas(u0, ndirs, value):
    out = []
    for d in range(ndirs):
        shape = list(u0.shape[1:])
        shape[d] += 1
        out.append(np.full(shape, value))
    return out


def _scalar_bounds(ctx, u_first, mask, pol):
    lower = ctx.scalar_lower
    upper = ctx.scalar_upper
    if lower == "floor":
        lower = min(float(u_first[0][mask].min()), lim.FLOOR_CAP)
    elif lower is not None:
        lower = float(lower) - pol.bound_slack
    if upper is not None:
        upper = float(upper) + pol.bound_slack
    return lower, upper
