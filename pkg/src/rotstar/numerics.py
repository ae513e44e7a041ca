"""Shared numerical kernels.

Adaptive ODE integration with event location, composite Gauss-Legendre
quadrature on graded panels, axisymmetric spherical harmonics, and small
dense linear algebra helpers.
"""

import numpy as np
from scipy.integrate import solve_ivp
from scipy.optimize import brentq
from scipy.special import eval_legendre

from .errors import NoEventError, StiffnessError

_GL_CACHE = {}


def gl_nodes(n):
    """Gauss-Legendre nodes/weights on [-1, 1], cached."""
    if n not in _GL_CACHE:
        _GL_CACHE[n] = np.polynomial.legendre.leggauss(n)
    return _GL_CACHE[n]


def gauss_legendre(f, a, b, n):
    """n-point Gauss-Legendre quadrature of f on [a, b].

    Exact for polynomials of degree <= 2n-1.
    """
    if not a < b:
        raise ValueError("need a < b")
    if n < 1:
        raise ValueError("need n >= 1")
    x, w = gl_nodes(n)
    t = 0.5 * (b - a) * x + 0.5 * (b + a)
    ft = np.asarray(f(t), dtype=float)
    if not np.all(np.isfinite(ft)):
        bad = t[~np.isfinite(ft)][0]
        raise ValueError(f"integrand not finite at t={bad!r}")
    return 0.5 * (b - a) * float(np.dot(w, ft))


def legendre_P(l, x):
    """Legendre polynomial P_l(x)."""
    return eval_legendre(l, x)


def Y_l0(l, theta):
    """Axisymmetric real spherical harmonic Y_{l0}(theta)."""
    return np.sqrt((2 * l + 1) / (4.0 * np.pi)) * eval_legendre(l, np.cos(theta))


def Ytilde(l, mu):
    """Y_{l0} as a function of mu = cos(theta)."""
    return np.sqrt((2 * l + 1) / (4.0 * np.pi)) * eval_legendre(l, mu)


def dY_dtheta(l, theta):
    """d/dtheta of Y_{l0}(theta); zero at the poles by symmetry."""
    theta = np.asarray(theta, dtype=float)
    mu = np.cos(theta)
    s = np.sin(theta)
    out = np.zeros_like(mu)
    reg = np.abs(s) > 1e-12
    if l > 0:
        m = mu[reg]
        # (mu^2-1) P_l' = l (mu P_l - P_{l-1})
        dP = l * (m * eval_legendre(l, m) - eval_legendre(l - 1, m)) / (m * m - 1.0)
        out[reg] = -s[reg] * dP * np.sqrt((2 * l + 1) / (4.0 * np.pi))
    return out


class Trajectory:
    """Result of integrate_ivp: sampled states, dense output, event location."""

    def __init__(self, t, y, sol, event_r):
        self.t = t
        self.y = y
        self.sol = sol
        self.event_r = event_r

    def __call__(self, r):
        return self.sol(r)


def integrate_ivp(rhs, y0, r0, stop=None, tol=1e-12, r_max=None, args=(),
                  require_event=False, method="RK45"):
    """Integrate y' = rhs(r, y) from r0 with dense output.

    stop is an optional scalar event function of (r, y); integration
    terminates at its first decreasing zero and the event abscissa is
    polished on the dense output to within tol.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    if r_max is None:
        r_max = r0 + 1.0
    events = None
    if stop is not None:
        def ev(r, y, *a):
            return stop(r, y)
        ev.terminal = True
        ev.direction = -1
        events = [ev]
    sol = solve_ivp(rhs, (r0, r_max), np.asarray(y0, dtype=float),
                    method=method, rtol=tol, atol=tol * 1e-2,
                    dense_output=True, events=events, args=args or None)
    if sol.status == -1:
        raise StiffnessError(f"integration failed: {sol.message}")
    event_r = None
    if stop is not None:
        if sol.status == 1 and len(sol.t_events[0]) > 0:
            event_r = float(sol.t_events[0][0])
            # polish by bisection on the dense output
            w = max(tol * max(abs(event_r), 1.0), 1e3 * np.finfo(float).eps * abs(event_r))
            lo, hi = event_r - w, min(event_r + w, sol.t[-1])
            flo = stop(lo, sol.sol(lo))
            fhi = stop(hi, sol.sol(hi))
            if flo * fhi < 0:
                event_r = brentq(lambda r: stop(r, sol.sol(r)), lo, hi,
                                 xtol=tol * max(abs(event_r), 1.0))
        elif require_event:
            raise NoEventError(f"event did not trigger before r_max={r_max}")
    return Trajectory(sol.t, sol.y, sol.sol, event_r)


def smallest_singular_value(A):
    """Smallest singular value and its right singular vector."""
    A = np.asarray(A, dtype=float)
    if not np.all(np.isfinite(A)):
        raise ValueError("matrix has non-finite entries")
    U, s, Vt = np.linalg.svd(A)
    return float(s[-1]), Vt[-1]


class RadialGrid:
    """Strictly increasing nodes on [0, R], first node 0, last node R."""

    def __init__(self, nodes):
        nodes = np.asarray(nodes, dtype=float)
        if nodes[0] != 0.0 or np.any(np.diff(nodes) <= 0):
            raise ValueError("nodes must start at 0 and increase strictly")
        self.nodes = nodes
        self.R = float(nodes[-1])

    def __len__(self):
        return len(self.nodes)


def _bary_weights(x):
    """Barycentric interpolation weights for nodes x."""
    m = len(x)
    w = np.ones(m)
    for j in range(m):
        d = x[j] - np.delete(x, j)
        w[j] = 1.0 / np.prod(d)
    return w


class Panels:
    """Composite Gauss-Legendre quadrature on [a, b] with arbitrary panel edges.

    Doubles as a piecewise-polynomial representation: values at the panel
    nodes determine a degree-(order-1) interpolant per panel.
    """

    def __init__(self, edges, order):
        edges = np.asarray(edges, dtype=float)
        if np.any(np.diff(edges) <= 0):
            raise ValueError("panel edges must increase")
        self.edges = edges
        self.order = int(order)
        xg, wg = gl_nodes(self.order)
        a = edges[:-1][:, None]
        b = edges[1:][:, None]
        self.x = (0.5 * (b - a) * xg + 0.5 * (b + a)).ravel()
        self.w = (0.5 * (b - a) * wg * np.ones_like(xg)).ravel()
        self.n_panels = len(edges) - 1
        self._ref_bw = _bary_weights(xg)
        self._xg = xg

    @classmethod
    def graded(cls, b, n_nodes, order=8, a=0.0):
        """Panels on [a, b] with cosine-graded edges (clustered at both ends)."""
        npan = max(2, int(round(n_nodes / order)))
        u = np.linspace(0.0, 1.0, npan + 1)
        edges = a + (b - a) * 0.5 * (1.0 - np.cos(np.pi * u))
        return cls(edges, order)

    def __len__(self):
        return len(self.x)

    def integrate(self, fvals):
        return float(np.dot(self.w, fvals))

    def panel_of(self, r):
        """Panel index containing each r (clamped to the boundary panels)."""
        idx = np.searchsorted(self.edges, r, side="right") - 1
        return np.clip(idx, 0, self.n_panels - 1)

    def interp_rows(self, r):
        """Matrix T with (T @ fvals)[i] = interpolant of f at r[i]."""
        r = np.atleast_1d(np.asarray(r, dtype=float))
        m = self.order
        T = np.zeros((len(r), len(self.x)))
        pidx = self.panel_of(r)
        for p in np.unique(pidx):
            sel = pidx == p
            a, b = self.edges[p], self.edges[p + 1]
            # map to reference [-1, 1]
            xr = (2.0 * r[sel] - (a + b)) / (b - a)
            nodes = self._xg
            diff = xr[:, None] - nodes[None, :]
            exact = np.abs(diff) < 1e-14
            diff[exact] = 1.0
            terms = self._ref_bw[None, :] / diff
            rows = terms / terms.sum(axis=1, keepdims=True)
            rows[exact.any(axis=1)] = exact[exact.any(axis=1)].astype(float)
            T[np.ix_(sel.nonzero()[0], np.arange(p * m, (p + 1) * m))] = rows
        return T

    def interp(self, fvals, r):
        return self.interp_rows(r) @ np.asarray(fvals, dtype=float)
