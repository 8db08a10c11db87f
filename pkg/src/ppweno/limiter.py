"""Parametrized flux limiters: bound-preserving blends of high-order and
monotone fluxes.

Per cell, admissible intervals for the face blending parameters theta are
found by decoupling the (linear) bound constraints; for gas dynamics the
density floor gives a box and the pressure floor shrinks it through scaled
box vertices, using that pressure is concave in the conserved state.  Face
values of theta are the minima of the two adjacent cells' intervals, so
every cell's constraint holds no matter what its neighbors chose.

theta = 1 leaves the high-order update untouched; theta = 0 falls back to
the first-order monotone update.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

EPS_DIV = 1e-13  # guards denominators, mirrors the floor cap


class SolverAbort(RuntimeError):
    """Unrecoverable step failure; carries the offending step/cell if known."""

    def __init__(self, message, step=None, cell=None):
        super().__init__(message)
        self.step = step
        self.cell = cell


class PreconditionViolation(SolverAbort):
    """First-order update broke a bound: the CFL constraint is not honored."""


@dataclass
class LimiterPolicy:
    """Switches for the limiting stage.

    ``force_theta``/``force_source_factor`` override the computed values
    (testing hooks and the limiter-off path).  ``bound_slack`` widens the
    scalar min/max bounds by a fixed margin; floors computed per step are
    never widened.
    """

    enabled: bool = True
    force_theta: Optional[float] = None
    force_source_factor: Optional[float] = None
    eps_div: float = EPS_DIV
    bound_slack: float = 0.0


@dataclass
class PositivityFloors:
    eps_rho: float
    eps_p: float
    eps_div: float = EPS_DIV


FLOOR_CAP = 1e-13


def floors_from_first_order(family, u_first, active=None):
    """Per-step floors: the first-order minima capped at a machine-level value."""
    sel = (slice(None),) if active is None else (active,)
    dens_min = min(float(u_first[d][sel].min()) for d in family.density_slots)
    pval = family.pp_value(u_first)
    p_min = float(pval[sel].min())
    return PositivityFloors(eps_rho=min(dens_min, FLOOR_CAP), eps_p=min(p_min, FLOOR_CAP))


# ---------------------------------------------------------------------------
# generic decoupling of one linear bound over a theta box
# ---------------------------------------------------------------------------


def decouple_min(gamma, terms, eps_div=EPS_DIV, validate=None):
    """Per-face caps so that sum(theta_i * t_i) >= gamma holds on the box.

    ``gamma`` must be <= 0 (up to eps_div); faces with nonnegative
    coefficients are unconstrained, the rest share gamma through the worst
    corner.  Returns one array per term, each in [0, 1].
    """
    gamma = np.asarray(gamma, dtype=float)
    terms = [np.asarray(t, dtype=float) for t in terms]
    bad = gamma > eps_div
    if validate is not None:
        bad = bad & validate
    if np.any(bad):
        idx = np.unravel_index(int(np.argmax(np.where(bad, gamma, -np.inf))), gamma.shape)
        raise PreconditionViolation(
            f"lower-bound margin positive ({float(gamma[idx]):.3e}) at cell {idx}; "
            "first-order scheme is not bound-preserving at this time step",
            cell=idx,
        )
    g = np.minimum(gamma, 0.0)
    neg_sum = sum(np.where(t < 0.0, t, 0.0) for t in terms)
    hold = neg_sum >= g  # worst corner at full theta already satisfies the bound
    ratio = g / (neg_sum - eps_div)
    out = []
    for t in terms:
        lam = np.where((t < 0.0) & ~hold, ratio, 1.0)
        out.append(np.clip(lam, 0.0, 1.0))
    return out


def decouple_max(gamma, terms, eps_div=EPS_DIV, validate=None):
    """Mirror of :func:`decouple_min` for sum(theta_i * t_i) <= gamma, gamma >= 0."""
    flipped = decouple_min(
        -np.asarray(gamma, dtype=float),
        [-np.asarray(t, dtype=float) for t in terms],
        eps_div=eps_div,
        validate=validate,
    )
    return flipped


def mpp_bounds_max(u_j, u_max, lam, f_minus, f_plus, h_minus, h_plus, eps_div=EPS_DIV):
    """Caps (lo, hi) keeping the updated value below ``u_max``.

    ``f_minus``/``f_plus`` are the high-minus-monotone flux differences at
    the two faces of the cell, ``h_minus``/``h_plus`` the monotone fluxes.
    """
    gamma = u_max - u_j + lam * (h_plus - h_minus)
    lo, hi = decouple_max(gamma, [lam * np.asarray(f_minus), -lam * np.asarray(f_plus)],
                          eps_div=eps_div)
    return lo, hi


def mpp_bounds_min(u_j, u_floor, lam, f_minus, f_plus, h_minus, h_plus,
                   source_term=0.0, dt=0.0, eps_div=EPS_DIV):
    """Caps (lo, hi) keeping the updated value above ``u_floor``.

    With a source term the first-order part of the update includes
    dt*source_term, matching the modified-source scheme.
    """
    gamma = u_floor - u_j + lam * (np.asarray(h_plus) - np.asarray(h_minus)) \
        - dt * np.asarray(source_term)
    lo, hi = decouple_min(gamma, [lam * np.asarray(f_minus), -lam * np.asarray(f_plus)],
                          eps_div=eps_div)
    return lo, hi


def density_bounds(rho_n, lam, f_high_minus, f_high_plus, f_low_minus, f_low_plus,
                   eps_rho, source_term=0.0, dt=0.0, eps_div=EPS_DIV):
    """Caps keeping the updated density above its floor (lower bound reuse)."""
    return mpp_bounds_min(
        rho_n, eps_rho, lam,
        np.asarray(f_high_minus) - np.asarray(f_low_minus),
        np.asarray(f_high_plus) - np.asarray(f_low_plus),
        f_low_minus, f_low_plus,
        source_term=source_term, dt=dt, eps_div=eps_div,
    )


# ---------------------------------------------------------------------------
# pressure floor: vertex scaling and box decoupling
# ---------------------------------------------------------------------------


def state_at_theta(base, deltas, theta):
    """Candidate update for a theta tuple; all components affine in theta."""
    out = np.array(base, dtype=float, copy=True)
    for th, d in zip(theta, deltas):
        out += th * np.asarray(d)
    return out


def pressure_at_theta(family, base, deltas, theta):
    """Floor functional (pressure, or thermal energy for real gases) of the
    candidate update at a theta tuple."""
    return family.pp_value(state_at_theta(base, deltas, theta))


def _pp_quad_coeffs(family, base, delta, eps_p):
    """Coefficients of q(r) = rho(r) * (P(base + r*delta) - eps_p) * scale factor.

    q is an exact quadratic because every conserved component is affine in r
    and P is (scaled) thermal energy minus kinetic energy over density.
    """
    rho_b, e_b, m_b = family.pp_linear_parts(base)
    rho_d, e_d, m_d = family.pp_linear_parts(delta)
    s = family.pp_scale
    a = s * (e_d * rho_d - 0.5 * sum(md * md for md in m_d))
    b = s * (e_b * rho_d + e_d * rho_b - sum(mb * md for mb, md in zip(m_b, m_d))) \
        - eps_p * rho_d
    c = s * (e_b * rho_b - 0.5 * sum(mb * mb for mb in m_b)) - eps_p * rho_b
    return a, b, c


def scale_to_pressure_floor(family, base, delta, eps_p, where=None,
                            tol=1e-12, max_iter=200):
    """Largest r in [0, 1] with P(base + r*delta) >= eps_p, given P(base) >= eps_p.

    Solved from the exact quadratic q(r); lanes where the analytic root is
    unusable (non-finite data, cancellation) fall back to bisection on q.
    ``where`` restricts which lanes are trusted/validated; the rest return 1.
    """
    a, b, c = _pp_quad_coeffs(family, base, delta, eps_p)
    a = np.atleast_1d(np.asarray(a, dtype=float))
    b = np.atleast_1d(np.asarray(b, dtype=float)) + np.zeros_like(a)
    c = np.atleast_1d(np.asarray(c, dtype=float)) + np.zeros_like(a)
    scale = np.maximum(np.abs(a) + np.abs(b) + np.abs(c), 1.0)
    trust = np.ones(a.shape, dtype=bool) if where is None else np.asarray(where)
    if np.any((c < -1e-9 * scale) & trust):
        raise PreconditionViolation(
            "pressure floor violated at the zero-theta update (caller bug)"
        )
    c = np.maximum(c, 0.0)
    q1 = a + b + c
    need = (q1 < 0.0) & trust
    r = np.ones_like(a)
    if np.any(need):
        with np.errstate(divide="ignore", invalid="ignore"):
            disc = np.sqrt(np.maximum(b * b - 4.0 * a * c, 0.0))
            qq = -0.5 * (b + np.where(b >= 0, disc, -disc))
            r1 = np.where(a != 0.0, qq / np.where(a != 0.0, a, 1.0), np.inf)
            r2 = np.where(qq != 0.0, c / np.where(qq != 0.0, qq, 1.0), np.inf)
            lin = np.where(b != 0.0, -c / np.where(b != 0.0, b, 1.0), np.inf)
        cand = np.where(np.abs(a) > 1e-14 * scale,
                        np.minimum(np.where(r1 > 0, r1, np.inf),
                                   np.where(r2 > 0, r2, np.inf)),
                        lin)
        cand = np.where(need, cand, 1.0)
        ok = np.isfinite(cand) & (cand >= 0.0)
        rc = np.clip(np.where(ok, cand, 0.0), 0.0, 1.0)
        qa = (a * rc + b) * rc + c
        ok &= qa >= -tol * scale
        r = np.where(need, np.where(ok, rc, np.nan), r)
        retry = need & ~ok
        if np.any(retry):
            lo = np.zeros_like(a)
            hi = np.ones_like(a)
            for _ in range(max_iter):
                mid = 0.5 * (lo + hi)
                qm = (a * mid + b) * mid + c
                good = (qm >= 0.0) & np.isfinite(qm)
                lo = np.where(retry & good, mid, lo)
                hi = np.where(retry & ~good, mid, hi)
                if float(np.max(np.where(retry, hi - lo, 0.0))) < tol:
                    break
            r = np.where(retry, lo, r)
    return np.clip(np.where(trust, r, 1.0), 0.0, 1.0)


def decouple_positivity_box(family, base, deltas, rho_caps, eps_p, where=None):
    """Shrink a density box so the pressure floor holds everywhere inside it.

    ``deltas[i]`` is the state change per unit theta at face slot i and
    ``rho_caps[i]`` the density-box cap for that slot.  Every nonzero vertex
    of the box is scaled back onto the admissible set along its ray; the cap
    for slot i is then the smallest scaled-vertex coordinate over all
    vertices that involve slot i.  Any theta tuple under the returned caps
    is a convex combination of the origin and scaled vertices, so the
    (concave) floor functional stays admissible on the whole box.
    """
    nf = len(deltas)
    base = np.asarray(base, dtype=float)
    mins = [None] * nf
    for k in range(1, 2 ** nf):
        bits = [(k >> i) & 1 for i in range(nf)]
        d = sum(bits[i] * rho_caps[i] * np.asarray(deltas[i]) for i in range(nf))
        r_k = scale_to_pressure_floor(family, base, d, eps_p, where=where)
        for i in range(nf):
            if bits[i]:
                mins[i] = r_k if mins[i] is None else np.minimum(mins[i], r_k)
    return [np.asarray(rho_caps[i]) * mins[i] for i in range(nf)]


def decouple_rectangle_1d(family, base, delta_minus, delta_plus, rho_caps, eps_p,
                          where=None):
    """1D specialization: caps (lo, hi) from the three nonzero box vertices."""
    lo, hi = decouple_positivity_box(
        family, base, [delta_minus, delta_plus], list(rho_caps), eps_p, where=where
    )
    return lo, hi


def decouple_tesseract_2d(family, base, deltas, rho_caps, eps_p, where=None):
    """2D specialization: caps (L, R, D, U) from the fifteen nonzero vertices."""
    return decouple_positivity_box(family, base, list(deltas), list(rho_caps),
                                   eps_p, where=where)


# ---------------------------------------------------------------------------
# source modification
# ---------------------------------------------------------------------------


def source_factor(u_n, h_minus, h_plus, dt, lam, s_n, s_rk, eps_s):
    """Scalar blend r of the stage-combined source toward s(u^n).

    Keeps the first-order update with the blended source above ``eps_s``;
    r = 1 when the combined source already satisfies the floor.
    """
    u_n = np.asarray(u_n, dtype=float)
    adv = u_n - lam * (np.asarray(h_plus) - np.asarray(h_minus))
    u_first = adv + dt * np.asarray(s_n)
    u_comb = adv + dt * np.asarray(s_rk)
    dts = dt * (np.asarray(s_rk) - np.asarray(s_n))
    violate = u_comb < eps_s
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = (eps_s - u_first) / dts
    r = np.where(violate, np.where(dts != 0.0, np.minimum(ratio, 1.0), 0.0), 1.0)
    return np.clip(r, 0.0, 1.0)


def system_source_factor(family, u_first, source_delta, eps_rho, eps_p, where=None):
    """One factor per cell keeping density and pressure floors under the
    blended source; density floors are linear in r, the pressure floor
    concave, so the admissible set is an interval from zero."""
    r = np.ones(u_first.shape[1:])
    for dslot in family.density_slots:
        d = source_delta[dslot]
        num = eps_rho - u_first[dslot]
        with np.errstate(divide="ignore", invalid="ignore"):
            cap = np.where(d < 0.0, np.minimum(num / np.where(d < 0.0, d, -1.0), 1.0), 1.0)
        r = np.minimum(r, np.clip(cap, 0.0, 1.0))
    r_p = scale_to_pressure_floor(family, u_first, source_delta, eps_p, where=where)
    return np.minimum(r, r_p)


# ---------------------------------------------------------------------------
# per-face combination
# ---------------------------------------------------------------------------


def combine_interface_theta(lam_lo, lam_hi, axis=0, periodic=False):
    """Face theta as the minimum of the adjacent cells' caps along one axis.

    ``lam_lo``/``lam_hi`` are the per-cell caps for the low/high face of
    each cell; the returned array has one more entry along ``axis``.  Edge
    faces see only the interior cell unless periodic.
    """
    lam_lo = np.asarray(lam_lo, dtype=float)
    lam_hi = np.asarray(lam_hi, dtype=float)
    n = lam_lo.shape[axis]
    out_shape = list(lam_lo.shape)
    out_shape[axis] = n + 1
    theta = np.ones(out_shape)

    def sl(a, lo, hi):
        idx = [slice(None)] * a.ndim
        idx[axis] = slice(lo, hi)
        return a[tuple(idx)]

    sl(theta, 1, n)[...] = np.minimum(sl(lam_hi, 0, n - 1), sl(lam_lo, 1, n))
    first = sl(theta, 0, 1)
    last = sl(theta, n, n + 1)
    first[...] = sl(lam_lo, 0, 1)
    last[...] = sl(lam_hi, n - 1, n)
    if periodic:
        wrap = np.minimum(sl(lam_lo, 0, 1), sl(lam_hi, n - 1, n))
        first[...] = wrap
        last[...] = wrap
    return theta


# ---------------------------------------------------------------------------
# full per-step assembly
# ---------------------------------------------------------------------------


def scalar_face_theta(u0, h_faces, hi_faces, lam, dt, s_tilde, lower, upper,
                      periodic, eps_div=EPS_DIV):
    """Face thetas enforcing scalar lower/upper bounds (either may be None)."""
    h = h_faces[0]
    f = hi_faces[0] - h
    base = u0[0] - lam * (h[1:] - h[:-1])
    if s_tilde is not None:
        base = base + dt * s_tilde[0]
    terms = [lam * f[:-1], -lam * f[1:]]
    lo_caps = np.ones_like(base)
    hi_caps = np.ones_like(base)
    if lower is not None:
        a, b = decouple_min(lower - base, terms, eps_div=eps_div)
        lo_caps, hi_caps = np.minimum(lo_caps, a), np.minimum(hi_caps, b)
    if upper is not None:
        a, b = decouple_max(upper - base, terms, eps_div=eps_div)
        lo_caps, hi_caps = np.minimum(lo_caps, a), np.minimum(hi_caps, b)
    return [combine_interface_theta(lo_caps, hi_caps, axis=0, periodic=periodic)]


def system_face_theta(family, u0, h_faces, hi_faces, lams, dt, s_tilde, floors,
                      periodic_flags, active=None):
    """Face thetas enforcing density and pressure floors for a gas system.

    ``h_faces``/``hi_faces`` hold one face array per direction.  Returns one
    theta array per direction.  Blanked cells contribute no constraints.
    """
    ndirs = len(h_faces)
    base = np.array(u0, dtype=float, copy=True)
    deltas = []
    for d in range(ndirs):
        h = h_faces[d]
        f = hi_faces[d] - h
        lo = [slice(None)] * (u0.ndim - 1)
        hi = [slice(None)] * (u0.ndim - 1)
        lo[d] = slice(0, -1)
        hi[d] = slice(1, None)
        base -= lams[d] * (h[(slice(None),) + tuple(hi)] - h[(slice(None),) + tuple(lo)])
        deltas.append(lams[d] * f[(slice(None),) + tuple(lo)])   # low face slot
        deltas.append(-lams[d] * f[(slice(None),) + tuple(hi)])  # high face slot
    if s_tilde is not None:
        base += dt * s_tilde
    nf = 2 * ndirs
    rho_caps = [np.ones(base.shape[1:]) for _ in range(nf)]
    for dslot in family.density_slots:
        gam = floors.eps_rho - base[dslot]
        caps = decouple_min(gam, [d_[dslot] for d_ in deltas],
                            eps_div=floors.eps_div, validate=active)
        rho_caps = [np.minimum(rc, c) for rc, c in zip(rho_caps, caps)]
    if active is not None:
        rho_caps = [np.where(active, rc, 1.0) for rc in rho_caps]
    caps = decouple_positivity_box(family, base, deltas, rho_caps, floors.eps_p,
                                   where=active)
    if active is not None:
        caps = [np.where(active, c, 1.0) for c in caps]
    thetas = []
    for d in range(ndirs):
        thetas.append(
            combine_interface_theta(caps[2 * d], caps[2 * d + 1], axis=d,
                                    periodic=periodic_flags[d])
        )
    return thetas
