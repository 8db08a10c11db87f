"""Numba-compiled inner loops: WENO5 face reconstruction and characteristic sweeps.

Everything here operates on plain float64 arrays laid out as (ncomp, nlines,
npoints) with the sweep direction along the last axis.  The Python-level
wrappers in :mod:`ppweno.weno` own all layout/boundary logic; these kernels
are deliberately free of any grid or physics knowledge.
"""

import numpy as np
from numba import njit

#: linear (optimal) weights of the three candidate stencils
_D0, _D1, _D2 = 0.1, 0.6, 0.3


@njit(cache=True, inline="always")
def weno5_scalar(a, b, c, d, e, eps, linear):
    """Fifth-order biased face value from five upwind-ordered samples.

    Returns the reconstruction at the face lying between samples ``d`` and
    ``e`` using the candidate stencils of the classic fifth-order scheme.
    With ``linear=True`` the smoothness adaption is skipped and the optimal
    linear weights are used directly.
    """
    v0 = (2.0 * a - 7.0 * b + 11.0 * c) / 6.0
    v1 = (-b + 5.0 * c + 2.0 * d) / 6.0
    v2 = (2.0 * c + 5.0 * d - e) / 6.0
    if linear:
        return _D0 * v0 + _D1 * v1 + _D2 * v2
    b0 = 13.0 / 12.0 * (a - 2.0 * b + c) ** 2 + 0.25 * (a - 4.0 * b + 3.0 * c) ** 2
    b1 = 13.0 / 12.0 * (b - 2.0 * c + d) ** 2 + 0.25 * (b - d) ** 2
    b2 = 13.0 / 12.0 * (c - 2.0 * d + e) ** 2 + 0.25 * (3.0 * c - 4.0 * d + e) ** 2
    a0 = _D0 / (eps + b0) ** 2
    a1 = _D1 / (eps + b1) ** 2
    a2 = _D2 / (eps + b2) ** 2
    s = a0 + a1 + a2
    return (a0 * v0 + a1 * v1 + a2 * v2) / s


@njit(cache=True)
def invert_small(a, out):
    """Gauss-Jordan inverse with partial pivoting for n<=5 matrices.

    Returns False when a pivot collapses or a non-finite entry appears, in
    which case ``out`` must not be used by the caller.
    """
    n = a.shape[0]
    w = np.empty((n, 2 * n))
    for i in range(n):
        for j in range(n):
            v = a[i, j]
            if not np.isfinite(v):
                return False
            w[i, j] = v
            w[i, n + j] = 0.0
        w[i, n + i] = 1.0
    for col in range(n):
        piv = col
        big = abs(w[col, col])
        for r in range(col + 1, n):
            if abs(w[r, col]) > big:
                big = abs(w[r, col])
                piv = r
        if big == 0.0 or not np.isfinite(big):
            return False
        if piv != col:
            for j in range(2 * n):
                tmp = w[col, j]
                w[col, j] = w[piv, j]
                w[piv, j] = tmp
        d = w[col, col]
        for j in range(2 * n):
            w[col, j] /= d
        for r in range(n):
            if r != col:
                f = w[r, col]
                if f != 0.0:
                    for j in range(2 * n):
                        w[r, j] -= f * w[col, j]
    for i in range(n):
        for j in range(n):
            v = w[i, n + j]
            if not np.isfinite(v):
                return False
            out[i, j] = v
    return True


@njit(cache=True)
def sweep(q, f, rmat, use_char, alphas, alpha_fb, eps, linear, hout):
    """Reconstruct high-order interface fluxes along the last axis.

    q, f      : (nc, nlines, npts) padded point values and physical fluxes
    rmat      : (nlines, nfaces, nc, nc) right eigenvector matrices at the
                face-average states; ignored when ``use_char`` is False
    alphas    : (nc,) per-field splitting speeds
    alpha_fb  : fallback speed used when an eigen transform is unusable
    hout      : (nc, nlines, nfaces) output interface fluxes

    The face ``t`` of a line sits between padded points g+t-1 and g+t where
    g is the ghost width implied by the shapes.  Returns the number of faces
    that fell back to component-wise reconstruction.
    """
    nc, nlines, npts = q.shape
    nfaces = hout.shape[2]
    g = (npts - nfaces + 1) // 2
    li = np.empty((nc, nc))
    wq = np.empty((6, nc))
    wf = np.empty((6, nc))
    what = np.empty(nc)
    nfallback = 0
    for l in range(nlines):
        for t in range(nfaces):
            pc = g + t
            ok_char = False
            if use_char:
                ok_char = invert_small(rmat[l, t], li)
                if not ok_char:
                    nfallback += 1
            if ok_char:
                for w in range(6):
                    p = pc - 3 + w
                    for k in range(nc):
                        aq = 0.0
                        af = 0.0
                        for c in range(nc):
                            aq += li[k, c] * q[c, l, p]
                            af += li[k, c] * f[c, l, p]
                        wq[w, k] = aq
                        wf[w, k] = af
            else:
                for w in range(6):
                    p = pc - 3 + w
                    for k in range(nc):
                        wq[w, k] = q[k, l, p]
                        wf[w, k] = f[k, l, p]
            for k in range(nc):
                if use_char and ok_char:
                    al = alphas[k]
                elif use_char:
                    al = alpha_fb
                else:
                    al = alphas[k]
                # upwind (plus) part, stencil biased to the left of the face
                gp0 = 0.5 * (wf[0, k] + al * wq[0, k])
                gp1 = 0.5 * (wf[1, k] + al * wq[1, k])
                gp2 = 0.5 * (wf[2, k] + al * wq[2, k])
                gp3 = 0.5 * (wf[3, k] + al * wq[3, k])
                gp4 = 0.5 * (wf[4, k] + al * wq[4, k])
                hp = weno5_scalar(gp0, gp1, gp2, gp3, gp4, eps, linear)
                # downwind (minus) part is the mirror image
                gm5 = 0.5 * (wf[5, k] - al * wq[5, k])
                gm4 = 0.5 * (wf[4, k] - al * wq[4, k])
                gm3 = 0.5 * (wf[3, k] - al * wq[3, k])
                gm2 = 0.5 * (wf[2, k] - al * wq[2, k])
                gm1 = 0.5 * (wf[1, k] - al * wq[1, k])
                hm = weno5_scalar(gm5, gm4, gm3, gm2, gm1, eps, linear)
                what[k] = hp + hm
            if use_char and ok_char:
                for c in range(nc):
                    acc = 0.0
                    for k in range(nc):
                        acc += rmat[l, t, c, k] * what[k]
                    hout[c, l, t] = acc
            else:
                for c in range(nc):
                    hout[c, l, t] = what[c]
    return nfallback
