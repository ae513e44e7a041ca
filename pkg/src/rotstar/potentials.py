"""Newtonian potentials of axisymmetric densities, one spherical-harmonic
mode at a time.

For a density rho(y) = sum_l rho_l(t) Y_l0(theta), the potential
V(x) = int rho(y)/|x-y| dy has modes

    Phi_l(s) = 4 pi/(2l+1) [ s^-(l+1) I_in(s) + s^l I_out(s) ],
    I_in(s)  = int_0^s rho_l(t) t^{l+2} dt,
    I_out(s) = int_s^b rho_l(t) t^{1-l} dt.

Densities live as nodal values on composite Gauss-Legendre panels; the
min/max kink at t = s is handled exactly by splitting the containing panel
at s and integrating the panel interpolant on each side.
"""

import numpy as np

from .numerics import Panels, Ytilde, gl_nodes


def mode_projection(ells, mu, wmu):
    """Weights P with sigma_l(t) = (P @ f(t, mu_j))_l for x3-even fields
    sampled at Gauss nodes mu_j in (0, 1) with weights wmu."""
    P = np.empty((len(ells), len(mu)))
    for i, l in enumerate(ells):
        P[i] = 4.0 * np.pi * wmu * Ytilde(l, mu)
    return P


def _sub_rows(panels, p, s, side, power, n_sub=12):
    """Rows integrating interpolant * t^power over [a_p, s] (side='in') or
    [s, b_p] (side='out') for each target s inside panel p.

    Returns (rows over panel-node values, shape (len(s), order)).
    """
    a, b = panels.edges[p], panels.edges[p + 1]
    xg, wg = gl_nodes(n_sub)
    if side == "in":
        lo = np.full_like(s, a)
        hi = s
    else:
        lo = s
        hi = np.full_like(s, b)
    half = 0.5 * (hi - lo)
    t = half[:, None] * (xg[None, :] + 1.0) + lo[:, None]   # (ns, n_sub)
    w = half[:, None] * wg[None, :]
    # interpolation rows from panel nodes to the sub-nodes
    xr = (2.0 * t - (a + b)) / (b - a)
    nodes = panels._xg
    diff = xr[..., None] - nodes[None, None, :]
    near = np.abs(diff) < 1e-14
    diff = np.where(near, 1.0, diff)
    terms = panels._ref_bw[None, None, :] / diff
    interp = terms / terms.sum(axis=-1, keepdims=True)
    hit = near.any(axis=-1)
    interp[hit] = near[hit].astype(float)
    integrand = w * t ** power
    return np.einsum("sq,sqm->sm", integrand, interp)


def mode_potential_matrices(panels, l, s_targets, n_sub=12):
    """Matrices (A, Ap) with A @ sigma = Phi_l(s) and Ap @ sigma = Phi_l'(s)
    for sigma given at panels.x."""
    s = np.asarray(s_targets, dtype=float)
    n_s = len(s)
    n_q = len(panels.x)
    Iin = np.zeros((n_s, n_q))
    Iout = np.zeros((n_s, n_q))
    b = panels.edges[-1]
    m = panels.order
    tiny = 1e-12 * b
    pidx = panels.panel_of(np.clip(s, panels.edges[0], b))
    win = panels.w * panels.x ** (l + 2)
    wout = panels.w * panels.x ** (1 - l)
    for p in range(panels.n_panels):
        cols = slice(p * m, (p + 1) * m)
        below = panels.edges[p + 1] <= s + tiny
        above = panels.edges[p] >= s - tiny
        inside = (pidx == p) & ~below & ~above
        Iin[below, cols] += win[cols]
        Iout[above, cols] += wout[cols]
        if np.any(inside):
            idx = inside.nonzero()[0]
            Iin[np.ix_(idx, np.arange(p * m, (p + 1) * m))] += \
                _sub_rows(panels, p, s[idx], "in", l + 2, n_sub)
            Iout[np.ix_(idx, np.arange(p * m, (p + 1) * m))] += \
                _sub_rows(panels, p, s[idx], "out", 1 - l, n_sub)
    pref = 4.0 * np.pi / (2 * l + 1)
    small = s < tiny
    ss = np.where(small, 1.0, s)
    A = pref * (ss[:, None] ** -(l + 1) * Iin + ss[:, None] ** l * Iout)
    Ap = pref * (-(l + 1) * ss[:, None] ** -(l + 2) * Iin
                 + l * ss[:, None] ** (l - 1) * Iout)
    if np.any(small):
        # limit s -> 0: only the l=0 outer integral survives in Phi; Phi'(0)=0
        A[small] = 0.0
        Ap[small] = 0.0
        if l == 0:
            A[small] = pref * wout[None, :]
    return A, Ap


def potential_at_zero_row(panels):
    """Row vector R with R @ sigma_0 = full-space value of the potential at
    the origin for the l=0 mode: Phi_0(0) = 4 pi int sigma_0(t) t dt."""
    return 4.0 * np.pi * panels.w * panels.x
