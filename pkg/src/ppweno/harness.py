"""Benchmark driver: advances cases to their final time, computes error
norms against exact solutions, and assembles grid-refinement reports."""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .cases import CaseSetup
from .grid import ConfigError, apply_boundaries
from .integrator import (
    SolverContext,
    StepRecord,
    TimeStepPolicy,
    compute_dt,
    rk_scheme,
    rk_step,
)
from .limiter import LimiterPolicy
from .weno import WenoConfig


@dataclass
class RunResult:
    setup: CaseSetup
    grid: object
    steps: list
    wall_time: float

    @property
    def final_time(self):
        return self.setup.t_final

    def step_minima(self):
        rho = min((r.min_density for r in self.steps), default=np.nan)
        p = min((r.min_pressure for r in self.steps), default=np.nan)
        pp = min((r.min_floor_value for r in self.steps), default=np.nan)
        val = min((r.min_value for r in self.steps), default=np.nan)
        return {"min_density": rho, "min_pressure": p, "min_floor_value": pp,
                "min_value": val}

    def limited_steps(self):
        return sum(1 for r in self.steps if r.theta_limited > 0)

    def limited_faces(self):
        return sum(r.theta_limited for r in self.steps)


def make_context(setup, limiter=True, policy=None):
    pol = policy if policy is not None else LimiterPolicy(enabled=limiter)
    return SolverContext(
        family=setup.family,
        bc=setup.bc,
        scheme=rk_scheme(setup.rk_order),
        weno=WenoConfig(
            eps_weno=setup.eps_weno,
            characteristic=setup.characteristic,
            linear_weights=setup.linear_weights,
            alpha_fixed=setup.alpha_fixed,
        ),
        policy=pol,
        dt_policy=TimeStepPolicy(cfl=setup.cfl, source_aware=setup.source_aware_dt),
        scalar_lower=setup.scalar_lower,
        scalar_upper=setup.scalar_upper,
    )


def run_case(setup, limiter=True, policy=None, max_steps=2_000_000, on_step=None):
    """Advance a case to its final time; the last step lands on it exactly.

    Raises SolverAbort subclasses on failure; the step log records per-step
    minima, floors and limiter activity.
    """
    ctx = make_context(setup, limiter=limiter, policy=policy)
    grid = setup.grid
    t = 0.0
    records = []
    t0 = time.perf_counter()
    for k in range(max_steps):
        if t >= setup.t_final * (1.0 - 1e-14):
            break
        apply_boundaries(grid, setup.bc, setup.family, time=t)
        dt = compute_dt(grid, setup.family, ctx.dt_policy, ctx.weno, time=t)
        clipped = False
        if t + dt >= setup.t_final:
            dt = setup.t_final - t
            clipped = True
        rec, _ = rk_step(grid, t, dt, ctx, step_index=k)
        records.append(rec)
        t = setup.t_final if clipped else t + dt
        if on_step is not None:
            on_step(k, rec)
    else:
        raise ConfigError(f"case {setup.name} did not reach t_final in {max_steps} steps")
    return RunResult(setup=setup, grid=grid, steps=records, wall_time=time.perf_counter() - t0)


def error_norms(setup, grid=None, component=None, time=None):
    """Cell-centered error norms against the case's exact solution.

    L1 is the mean absolute error over active cells (the sum scaled by the
    cell volume divided by the domain measure), Linf the maximum.
    """
    if setup.exact_fn is None:
        raise ConfigError(f"case {setup.name} has no exact solution")
    grid = setup.grid if grid is None else grid
    comp = setup.error_component if component is None else component
    t = setup.t_final if time is None else time
    xs = grid.x_centers()[:, None]
    ys = grid.y_centers()[None, :]
    exact = np.asarray(setup.exact_fn(xs, ys, t))
    err = np.abs(grid.interior()[comp] - exact[comp])[grid.mask]
    return float(err.mean()), float(err.max())


@dataclass
class ConvergenceRow:
    n: int
    l1: float
    l1_order: float
    linf: float
    linf_order: float
    extras: dict = field(default_factory=dict)


@dataclass
class ConvergenceReport:
    case: str
    limiter: bool
    rows: list

    HEAD = ("N", "L1_error", "L1_order", "Linf_error", "Linf_order")

    def header(self):
        extras = list(self.rows[0].extras) if self.rows else []
        return list(self.HEAD) + extras

    def table_rows(self):
        out = []
        for r in self.rows:
            row = [r.n, r.l1, r.l1_order, r.linf, r.linf_order]
            row += [r.extras[k] for k in self.rows[0].extras]
            out.append(row)
        return out

    def to_csv(self, path=None):
        lines = [
            f"# ppweno convergence case={self.case} limiter={'on' if self.limiter else 'off'}",
            ",".join(self.header()),
        ]
        for row in self.table_rows():
            lines.append(",".join(_fmt(v) for v in row))
        text = "\n".join(lines) + "\n"
        if path is not None:
            with open(path, "w") as fh:
                fh.write(text)
        return text

    def orders(self, norm="l1"):
        return [getattr(r, f"{norm}_order") for r in self.rows[1:]]


def _fmt(v):
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if v is None or (isinstance(v, float) and np.isnan(v)):
        return "nan"
    return f"{v:.6e}"


def _case_extras(setup, result):
    """Per-family report columns mirroring the published tables."""
    mins = result.step_minima()
    fam = setup.family
    if not getattr(fam, "has_pressure", False):
        extras = {"v_min": min(mins["min_value"],
                               float(result.grid.interior()[0][result.grid.mask].min()))}
        if setup.exact_max is not None:
            umax = float(result.grid.interior()[0][result.grid.mask].max())
            extras["umax_minus_vmax"] = umax - setup.exact_max
        return extras
    rho_fin = min(
        float(result.grid.interior()[d][result.grid.mask].min()) for d in fam.density_slots
    )
    p_fin = float(fam.pressure(result.grid.interior())[result.grid.mask].min())
    return {"rho_min": rho_fin, "p_min": p_fin}


def convergence_study(builder, grids, limiter=True, **overrides):
    """Run a doubling sequence of grids and report errors and observed orders."""
    grids = list(grids)
    for a, b in zip(grids, grids[1:]):
        if b != 2 * a:
            raise ConfigError("convergence grids must double: got "
                              f"{a} -> {b}")
    rows = []
    name = None
    prev = None
    for n in grids:
        setup = builder(n)
        for key, val in overrides.items():
            setattr(setup, key, val)
        name = setup.name
        result = run_case(setup, limiter=limiter)
        l1, linf = error_norms(setup)
        extras = _case_extras(setup, result)
        if prev is None:
            rows.append(ConvergenceRow(n, l1, np.nan, linf, np.nan, extras))
        else:
            rows.append(ConvergenceRow(
                n, l1, float(np.log2(prev[0] / l1)), linf,
                float(np.log2(prev[1] / linf)), extras,
            ))
        prev = (l1, linf)
    return ConvergenceReport(case=name, limiter=limiter, rows=rows)
