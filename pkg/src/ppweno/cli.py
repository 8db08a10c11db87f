"""Command-line front end: run single cases, grid-convergence studies, and
list the built-in benchmark problems.

Outputs are plain CSV with a ``#``-prefixed header carrying the resolved
configuration, one file per derived field plus the per-step log.  Exit
codes: 0 success, 2 usage, 3 bad configuration, 4 solver abort, 5 I/O.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from . import cases as case_mod
from .cases import CaseSetup, build_case, case_descriptions
from .eos import (
    IdealGasEuler,
    PositivityViolationError,
    ReactiveEuler,
    ThreeSpeciesGas,
    advection_law,
    burgers_law,
    conserved_from_primitive,
)
from .grid import BoundarySpec, ConfigError, EdgeBC, FieldGrid
from .harness import convergence_study, error_norms, run_case
from .integrator import StepRecord
from .limiter import SolverAbort

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_CONFIG = 3
EXIT_SOLVER = 4
EXIT_IO = 5


def main(argv=None):
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        _error_line("config", exc)
        return EXIT_CONFIG
    except (SolverAbort, PositivityViolationError) as exc:
        _error_line("solver", exc, step=getattr(exc, "step", None),
                    cell=getattr(exc, "cell", None))
        return EXIT_SOLVER
    except OSError as exc:
        _error_line("io", exc)
        return EXIT_IO


def _error_line(kind, exc, step=None, cell=None):
    parts = [f"error kind={kind}"]
    if step is not None:
        parts.append(f"step={step}")
    if cell is not None:
        parts.append(f"cell={','.join(str(c) for c in cell)}")
    parts.append(f'msg="{exc}"')
    print(" ".join(parts), file=sys.stderr)


def _build_parser():
    p = argparse.ArgumentParser(prog="ppweno",
                                description="bound-preserving WENO5 solver")
    sub = p.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run one case and write field CSVs")
    _common_case_args(run)
    run.add_argument("--out", default=None, help="output directory")
    run.set_defaults(func=cmd_run)

    conv = sub.add_parser("converge", help="grid convergence study")
    _common_case_args(conv)
    conv.add_argument("--grids", required=True,
                      help="comma-separated doubling cell counts, e.g. 40,80,160")
    conv.add_argument("--out", default=None, help="output directory")
    conv.set_defaults(func=cmd_converge)

    lst = sub.add_parser("list", help="list built-in cases")
    lst.set_defaults(func=cmd_list)
    return p


def _common_case_args(sp):
    sp.add_argument("--case", default=None, help="built-in case id")
    sp.add_argument("--config", default=None, help="JSON case file")
    sp.add_argument("--n", type=int, default=None, help="grid size (case-specific)")
    sp.add_argument("--limiter", choices=("on", "off"), default="on")
    sp.add_argument("--cfl", type=float, default=None)
    sp.add_argument("--eps-weno", type=float, default=None)
    sp.add_argument("--rk", type=int, choices=(3, 4), default=None)
    sp.add_argument("--characteristic", choices=("on", "off"), default=None)


def _overrides_from_args(args):
    over = {}
    if args.cfl is not None:
        over["cfl"] = args.cfl
    if args.eps_weno is not None:
        over["eps_weno"] = args.eps_weno
    if args.rk is not None:
        over["rk_order"] = args.rk
    if args.characteristic is not None:
        over["characteristic"] = args.characteristic == "on"
    return over


def _setup_from_args(args):
    over = _overrides_from_args(args)
    if args.config is not None:
        setup, file_limiter = load_case_file(args.config, n=args.n, overrides=over)
        limiter = file_limiter if file_limiter is not None else (args.limiter == "on")
        return setup, limiter
    if args.case is None:
        raise ConfigError("provide --case or --config")
    return build_case(args.case, n=args.n, **over), args.limiter == "on"


def _out_dir(args, setup):
    if args.out is not None:
        out = args.out
    else:
        root = os.environ.get("PPWENO_OUT_ROOT", "ppweno_out")
        out = os.path.join(root, setup.name)
    os.makedirs(out, exist_ok=True)
    return out


def _resolved_config(setup, limiter):
    return {
        "case": setup.name,
        "nx": setup.grid.nx,
        "ny": setup.grid.ny,
        "dx": setup.grid.dx,
        "dy": setup.grid.dy,
        "t_final": setup.t_final,
        "cfl": setup.cfl,
        "rk_order": setup.rk_order,
        "eps_weno": setup.eps_weno,
        "characteristic": setup.characteristic,
        "linear_weights": setup.linear_weights,
        "alpha_fixed": setup.alpha_fixed,
        "limiter": limiter,
    }


def cmd_run(args):
    setup, limiter = _setup_from_args(args)
    out = _out_dir(args, setup)
    result = run_case(setup, limiter=limiter)
    header = "# ppweno " + json.dumps(_resolved_config(setup, limiter), sort_keys=True)
    write_fields(out, setup, header)
    write_steplog(os.path.join(out, "steplog.csv"), result.steps, header)
    print(f"{setup.name}: {len(result.steps)} steps to t={setup.t_final} "
          f"({result.wall_time:.2f}s), output in {out}")
    return EXIT_OK


def cmd_converge(args):
    setup_probe, limiter = _setup_from_args(args)
    if args.config is not None:
        raise ConfigError("convergence studies run built-in cases only")
    grids = [int(v) for v in args.grids.split(",") if v]
    builder = case_mod.REGISTRY[setup_probe.name][0]
    report = convergence_study(builder, grids, limiter=limiter,
                               **_overrides_from_args(args))
    text = report.to_csv()
    print(text, end="")
    if args.out is not None:
        os.makedirs(args.out, exist_ok=True)
        path = os.path.join(args.out, f"convergence-{setup_probe.name}.csv")
        with open(path, "w") as fh:
            fh.write(text)
        print(f"written to {path}")
    return EXIT_OK


def cmd_list(args):
    for name, default_n, doc in case_descriptions():
        print(f"{name:20s} (default n={default_n})  {doc}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# field output
# ---------------------------------------------------------------------------


def _field_values(setup, grid):
    fam = setup.family
    q = grid.interior()
    if not getattr(fam, "has_pressure", False):
        return {"solution": q[0]}
    out = {}
    if isinstance(fam, ThreeSpeciesGas):
        out["density"] = fam.total_density(q)
        out["species_o"] = q[0]
        out["species_o2"] = q[1]
        out["species_n2"] = q[2]
        out["velocity"] = fam.velocity(q)
        out["pressure"] = fam.pressure(q)
        out["temperature"] = fam.temperature(q)
        return out
    out["density"] = q[0]
    if fam.ndim == 1:
        out["velocity"] = fam.velocity(q, 0)
    else:
        out["velocity_x"] = fam.velocity(q, 0)
        out["velocity_y"] = fam.velocity(q, 1)
    out["pressure"] = fam.pressure(q)
    if isinstance(fam, ReactiveEuler):
        out["reactant"] = q[4] / q[0]
    return out


def write_fields(out_dir, setup, header):
    grid = setup.grid
    xs = grid.x_centers()
    ys = grid.y_centers()
    for name, values in _field_values(setup, grid).items():
        path = os.path.join(out_dir, f"{name}.csv")
        with open(path, "w") as fh:
            fh.write(header + "\n")
            if grid.ndim == 1:
                fh.write("x,value\n")
                for i in range(grid.nx):
                    fh.write(f"{xs[i]:.17g},{values[i, 0]:.17g}\n")
            else:
                fh.write("x,y,value\n")
                for i in range(grid.nx):
                    for j in range(grid.ny):
                        if grid.mask[i, j]:
                            fh.write(f"{xs[i]:.17g},{ys[j]:.17g},{values[i, j]:.17g}\n")


def write_steplog(path, records, header):
    with open(path, "w") as fh:
        fh.write(header + "\n")
        fh.write(",".join(StepRecord.FIELDS) + "\n")
        for rec in records:
            fh.write(",".join(_num(v) for v in rec.row()) + "\n")


def _num(v):
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return f"{float(v):.17g}"


# ---------------------------------------------------------------------------
# JSON case files
# ---------------------------------------------------------------------------


def load_case_file(path, n=None, overrides=None):
    """Build a case from a JSON file.

    Two forms are accepted: ``{"case": <builtin id>, ...overrides}`` and a
    self-contained description with family/domain/bc/initial keys (uniform
    or two-state initial data given in primitive variables).
    Returns (setup, limiter_or_None).
    """
    with open(path) as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"malformed case file {path}: {exc}") from exc
    limiter = doc.pop("limiter", None)
    if limiter is not None:
        limiter = limiter in (True, "on", 1)
    overrides = dict(overrides or {})
    if "case" in doc:
        name = doc.pop("case")
        doc.pop("name", None)
        n = doc.pop("n", None) if n is None else n
        overrides.update(doc)
        return build_case(name, n=n, **overrides), limiter
    setup = _custom_case(doc, n=n)
    for key, val in overrides.items():
        setattr(setup, key, val)
    return setup, limiter


_FAMILY_BUILDERS = {
    "euler1d": lambda doc: IdealGasEuler(gamma=doc.get("gamma", 1.4), ndim=1),
    "euler2d": lambda doc: IdealGasEuler(gamma=doc.get("gamma", 1.4), ndim=2),
    "burgers": lambda doc: burgers_law(),
    "advection": lambda doc: advection_law(doc.get("speed", 1.0)),
}


def _primitive_state(family, d):
    if not getattr(family, "has_pressure", False):
        return np.array([float(d["u"])])
    vels = [float(d.get("u", 0.0))]
    if family.ndim == 2:
        vels.append(float(d.get("v", 0.0)))
    return conserved_from_primitive(family, float(d["rho"]), vels, float(d["p"]))


def _custom_case(doc, n=None):
    try:
        family = _FAMILY_BUILDERS[doc["family"]](doc)
        dom = doc["domain"]
        xa, xb = (float(v) for v in dom["x"])
        nx = int(n if n is not None else doc["n"])
        ny = 1
        ya, yb = 0.0, 1.0
        if family.ndim == 2:
            ya, yb = (float(v) for v in dom["y"])
            ny = int(doc.get("ny", nx))
        hx = (xb - xa) / nx
        hy = (yb - ya) / ny if family.ndim == 2 else 1.0
        grid = FieldGrid(family.ncomp, nx, ny, hx, hy,
                         (xa + 0.5 * hx, ya + 0.5 * hy if family.ndim == 2 else 0.0))
        init = doc["initial"]
        if init["kind"] == "uniform":
            state = _primitive_state(family, init["state"])
            grid.interior()[...] = state.reshape((family.ncomp, 1, 1))
        elif init["kind"] == "riemann":
            split = float(init.get("split", 0.0))
            left = _primitive_state(family, init["left"])
            right = _primitive_state(family, init["right"])
            xs = grid.x_centers()
            sel = xs < split
            grid.interior()[...] = np.where(
                sel[None, :, None], left.reshape((-1, 1, 1)), right.reshape((-1, 1, 1))
            )
        else:
            raise ConfigError(f"unknown initial kind {init['kind']!r}")
        bc_doc = doc.get("bc", {})
        edges = {}
        for side in ("left", "right", "bottom", "top"):
            kind = bc_doc.get(side, "outflow")
            if isinstance(kind, dict):
                state = _primitive_state(family, kind["state"])
                edges[side] = EdgeBC("dirichlet",
                                     lambda t, c, s=state: np.repeat(s[:, None], np.size(c), 1))
            else:
                edges[side] = EdgeBC(kind)
        bc = BoundarySpec(edges["left"], edges["right"],
                          edges["bottom"] if family.ndim == 2 else None,
                          edges["top"] if family.ndim == 2 else None)
        return CaseSetup(
            name=doc.get("name", "custom"),
            family=family, grid=grid, bc=bc,
            t_final=float(doc["t_final"]),
            cfl=float(doc.get("cfl", 0.6)),
            rk_order=int(doc.get("rk_order", 4)),
            eps_weno=float(doc.get("eps_weno", 1e-6)),
            characteristic=bool(doc.get("characteristic", True)),
            scalar_lower=doc.get("scalar_lower"),
            scalar_upper=doc.get("scalar_upper"),
            description="user case file",
        )
    except KeyError as exc:
        raise ConfigError(f"case file missing key {exc}") from exc


if __name__ == "__main__":
    sys.exit(main())
