"""WENO5 interface fluxes with global Lax-Friedrichs splitting.

The reconstruction is component-wise for scalars and (by default)
characteristic-wise for systems, using arithmetic-average states at the
faces to evaluate the eigenvector basis.  The first-order monotone flux is
the global Lax-Friedrichs flux built with the same splitting speed.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import kernels
from .grid import GHOST, ConfigError, fill_walls


@dataclass
class WenoConfig:
    """Reconstruction knobs.

    alpha_fixed pins the splitting speed (the user-fixed mode); otherwise it
    is recomputed from the current states as the global maximum wave speed.
    """

    eps_weno: float = 1e-6
    characteristic: bool = True
    linear_weights: bool = False
    alpha_fixed: Optional[float] = None

    def __post_init__(self):
        if self.eps_weno <= 0:
            raise ConfigError("eps_weno must be positive")
        if self.alpha_fixed is not None and self.alpha_fixed <= 0:
            raise ConfigError("fixed splitting speed must be positive")


@dataclass
class SplitFluxPair:
    f_plus: np.ndarray
    f_minus: np.ndarray


def lxf_split(u, f, alpha):
    """Global Lax-Friedrichs splitting f± = (f ± alpha*u)/2."""
    if alpha <= 0:
        raise ConfigError("splitting speed alpha must be positive")
    u = np.asarray(u, dtype=float)
    f = np.asarray(f, dtype=float)
    return SplitFluxPair(0.5 * (f + alpha * u), 0.5 * (f - alpha * u))


def weno5_face(values, side="left", eps=1e-6, linear=False):
    """Face value from five contiguous samples; reference implementation.

    ``side='left'`` reconstructs at the right face of the middle-right
    sample (upwind for positive speeds); ``side='right'`` is the mirror
    image, obtained by reversing the sample order.
    """
    v = [float(x) for x in values]
    if len(v) != 5:
        raise ValueError("weno5_face needs exactly 5 samples")
    if side == "right":
        v = v[::-1]
    elif side != "left":
        raise ValueError(f"unknown side {side!r}")
    return kernels.weno5_scalar(v[0], v[1], v[2], v[3], v[4], eps, linear)


def weno5_weights(values, eps=1e-6):
    """Nonlinear weights of the three candidate stencils (left-biased)."""
    a, b, c, d, e = (float(x) for x in values)
    b0 = 13.0 / 12.0 * (a - 2 * b + c) ** 2 + 0.25 * (a - 4 * b + 3 * c) ** 2
    b1 = 13.0 / 12.0 * (b - 2 * c + d) ** 2 + 0.25 * (b - d) ** 2
    b2 = 13.0 / 12.0 * (c - 2 * d + e) ** 2 + 0.25 * (3 * c - 4 * d + e) ** 2
    al = np.array([0.1 / (eps + b0) ** 2, 0.6 / (eps + b1) ** 2, 0.3 / (eps + b2) ** 2])
    return al / al.sum()


def monotone_flux(u_left, u_right, flux_fn, alpha):
    """Two-point Lax-Friedrichs flux; consistent and monotone for valid alpha."""
    u_left = np.asarray(u_left, dtype=float)
    u_right = np.asarray(u_right, dtype=float)
    return 0.5 * (flux_fn(u_left) + flux_fn(u_right)) - 0.5 * alpha * (u_right - u_left)


def _sweep_view(qpad, nx, ny, direction):
    g = GHOST
    if direction == 0:
        return np.ascontiguousarray(qpad[:, :, g : g + ny].transpose(0, 2, 1))
    return np.ascontiguousarray(qpad[:, g : g + nx, :])


def _from_sweep(arr, direction):
    if direction == 0:
        return np.ascontiguousarray(arr.transpose(0, 2, 1))
    return arr


def direction_fluxes(family, grid, qpad, direction, cfg, alphas, alpha_mono,
                     want_monotone=False):
    """High-order (and optionally monotone) face fluxes along one direction.

    Returns (H, h, fallback_count) in canonical layout: direction 0 gives
    (ncomp, nx+1, ny) arrays, direction 1 gives (ncomp, nx, ny+1).  ``h`` is
    None unless requested.
    """
    g = GHOST
    n = grid.nx if direction == 0 else grid.ny
    qs = _sweep_view(qpad, grid.nx, grid.ny, direction)
    fill_walls(qs, grid.wall_maps(direction), family.momentum_slot(direction))
    fs = family.flux(qs, direction)
    nc, nlines, _ = qs.shape
    use_char = cfg.characteristic and family.right_eigenvectors(qs[:, :1, :1], direction) is not None
    if use_char:
        avg = 0.5 * (qs[:, :, g - 1 : g + n] + qs[:, :, g : g + n + 1])
        rmat = np.ascontiguousarray(family.right_eigenvectors(avg, direction))
    else:
        rmat = np.empty((1, 1, nc, nc))
    hout = np.empty((nc, nlines, n + 1))
    nfb = kernels.sweep(
        qs, fs, rmat, use_char, np.asarray(alphas, dtype=float), float(alpha_mono),
        cfg.eps_weno, cfg.linear_weights, hout,
    )
    hmono = None
    if want_monotone:
        hmono = 0.5 * (fs[:, :, g - 1 : g + n] + fs[:, :, g : g + n + 1]) \
            - 0.5 * alpha_mono * (qs[:, :, g : g + n + 1] - qs[:, :, g - 1 : g + n])
        hmono = _from_sweep(hmono, direction)
    return _from_sweep(hout, direction), hmono, nfb


def characteristic_interface_flux(states, fluxes, family, alpha_fields,
                                  direction=0, eps=1e-6, linear=False,
                                  characteristic=True):
    """Single-interface flux from a 6-point window (testing convenience).

    ``states``/``fluxes`` are (6, ncomp) or (6,) windows around the face
    between points 2 and 3; runs through the same kernel as production
    sweeps.  Returns (flux_vector, used_fallback).
    """
    q = np.atleast_2d(np.asarray(states, dtype=float))
    f = np.atleast_2d(np.asarray(fluxes, dtype=float))
    if q.shape[0] != 6:
        raise ValueError("need a 6-point window")
    nc = q.shape[1]
    qs = np.ascontiguousarray(q.T[:, None, :])
    fsw = np.ascontiguousarray(f.T[:, None, :])
    use_char = characteristic and family is not None \
        and family.right_eigenvectors(qs[:, :1, :1], direction) is not None
    if use_char:
        avg = 0.5 * (qs[:, :, 2:3] + qs[:, :, 3:4])
        rmat = np.ascontiguousarray(family.right_eigenvectors(avg, direction))
    else:
        rmat = np.empty((1, 1, nc, nc))
    alphas = np.asarray(alpha_fields, dtype=float)
    hout = np.empty((nc, 1, 1))
    nfb = kernels.sweep(qs, fsw, rmat, use_char, alphas, float(alphas.max()),
                        eps, linear, hout)
    return hout[:, 0, 0], nfb > 0
