"""Deformation machinery: the dilating map g_zeta(x) = (1 + zeta(x)/|x|^2) x,
its inverse, Jacobian determinant, mass factor, X-norm, and the symmetrizing
extension operator.

Fields are axisymmetric and even in x3, stored on a tensor (r, theta) grid
over the half-disc 0 <= theta <= pi/2 with bicubic interpolation.
"""

import numpy as np
from scipy.interpolate import RectBivariateSpline

from .errors import DeformationError
from .numerics import Panels, gl_nodes

#: hard cap on the admissible X-norm
EPS0 = 0.1


class DeformationField:
    """Axisymmetric, x3-even scalar field zeta on {r <= R_dom}."""

    def __init__(self, r_grid, theta_grid, values):
        self.r_grid = np.asarray(r_grid, dtype=float)
        self.theta_grid = np.asarray(theta_grid, dtype=float)
        self.values = np.asarray(values, dtype=float)
        self.R_dom = float(self.r_grid[-1])
        if abs(self.values[0]).max() > 1e-12 * max(1.0, abs(self.values).max()):
            raise DeformationError("zeta(0) must vanish")
        kx = min(3, len(self.r_grid) - 1)
        ky = min(3, len(self.theta_grid) - 1)
        self._spl = RectBivariateSpline(self.r_grid, self.theta_grid,
                                        self.values, kx=kx, ky=ky)

    # constructors ------------------------------------------------------------

    @classmethod
    def from_callable(cls, f, R_dom, nr=128, ntheta=64):
        r = np.linspace(0.0, R_dom, nr)
        th = np.linspace(0.0, np.pi / 2, ntheta)
        vals = f(r[:, None], th[None, :]) * np.ones((nr, ntheta))
        return cls(r, th, vals)

    @classmethod
    def zero(cls, R_dom, nr=128, ntheta=64):
        return cls.from_callable(lambda r, th: np.zeros_like(r * th), R_dom,
                                 nr, ntheta)

    @classmethod
    def uniform(cls, c, R_dom, nr=128, ntheta=64):
        """zeta = c |x|^2, the uniform dilation by factor 1+c."""
        return cls.from_callable(lambda r, th: c * r * r, R_dom, nr, ntheta)

    # evaluation --------------------------------------------------------------

    def _fold(self, theta):
        """Map theta into [0, pi/2] using evenness in x3; returns (theta, sign)
        where sign flips the theta-derivative on the mirrored half."""
        theta = np.asarray(theta, dtype=float)
        mirrored = theta > np.pi / 2
        tt = np.where(mirrored, np.pi - theta, theta)
        return tt, np.where(mirrored, -1.0, 1.0)

    def value(self, r, theta):
        r = np.asarray(r, dtype=float)
        tt, _ = self._fold(theta)
        rr = np.clip(r, 0.0, self.R_dom)
        return self._spl.ev(rr, tt)

    def d_r(self, r, theta):
        tt, _ = self._fold(theta)
        rr = np.clip(r, 0.0, self.R_dom)
        return self._spl.ev(rr, tt, dx=1)

    def d_theta(self, r, theta):
        tt, sgn = self._fold(theta)
        rr = np.clip(r, 0.0, self.R_dom)
        return sgn * self._spl.ev(rr, tt, dy=1)

    def ratio(self, r, theta):
        """zeta(x)/|x|^2, with a quadratic Taylor coefficient along rays near 0."""
        r = np.asarray(r, dtype=float)
        theta = np.asarray(theta, dtype=float) * np.ones_like(r)
        r_small = 1e-3 * self.R_dom
        rr = np.maximum(r, r_small)
        return self.value(rr, theta) / rr ** 2

    def grad_norm_over_r(self, r, theta):
        """|grad zeta|/|x| at (r, theta)."""
        r = np.asarray(r, dtype=float)
        zr = self.d_r(r, theta)
        zt = self.d_theta(r, theta)
        return np.sqrt(zr ** 2 + (zt / r) ** 2) / r

    def xnorm(self, nsample=(160, 33)):
        """Sampled sup of |grad zeta|/|x| over the half-disc."""
        nr, nt = nsample
        r = np.linspace(self.R_dom / nr, self.R_dom, nr)
        th = np.linspace(1e-3, np.pi / 2, nt)
        R, T = np.meshgrid(r, th, indexing="ij")
        return float(np.max(self.grad_norm_over_r(R, T)))

    # algebra -----------------------------------------------------------------

    def scaled(self, c):
        return DeformationField(self.r_grid, self.theta_grid, c * self.values)

    def __add__(self, other):
        if not np.array_equal(self.r_grid, other.r_grid):
            raise DeformationError("grid mismatch")
        return DeformationField(self.r_grid, self.theta_grid,
                                self.values + other.values)

    # serialization -----------------------------------------------------------

    def dump(self, json_path, csv_path):
        import csv as _csv
        import json as _json
        with open(json_path, "w") as f:
            _json.dump({"R_dom": self.R_dom,
                        "nr": len(self.r_grid),
                        "ntheta": len(self.theta_grid)}, f, indent=1)
        with open(csv_path, "w", newline="") as f:
            w = _csv.writer(f)
            w.writerow(["r", "theta", "zeta"])
            for i, r in enumerate(self.r_grid):
                for j, t in enumerate(self.theta_grid):
                    w.writerow([repr(r), repr(t), repr(self.values[i, j])])


def _as_rt(x):
    """Split cartesian points (..., 3) into (radius, polar angle)."""
    x = np.asarray(x, dtype=float)
    single = x.ndim == 1
    x = np.atleast_2d(x)
    r = np.linalg.norm(x, axis=1)
    with np.errstate(invalid="ignore"):
        th = np.arccos(np.clip(np.where(r > 0, x[:, 2] / np.maximum(r, 1e-300), 1.0), -1, 1))
    return x, r, th, single


class DilationMap:
    """g_zeta(x) = (1 + zeta(x)/|x|^2) x for ||zeta||_X < EPS0."""

    def __init__(self, zeta, eps0=EPS0):
        xn = zeta.xnorm()
        if xn >= eps0:
            raise DeformationError(f"||zeta||_X = {xn:.4g} >= cap {eps0}")
        self.zeta = zeta
        self.xnorm = xn

    def apply(self, x):
        x, r, th, single = _as_rt(x)
        lam = 1.0 + self.zeta.ratio(r, th)
        y = lam[:, None] * x
        return y[0] if single else y

    def invert(self, y, tol=1e-12, max_iter=200):
        y, t, th, single = _as_rt(y)
        r = self.radial_invert(t, th, tol=tol, max_iter=max_iter)
        x = y * (r / np.maximum(t, 1e-300))[:, None]
        return x[0] if single else x

    def radial_invert(self, t, theta, tol=1e-12, max_iter=200):
        """Solve r (1 + zeta(r,theta)/r^2) = t along each ray by fixed point."""
        t = np.asarray(t, dtype=float)
        theta = np.asarray(theta, dtype=float) * np.ones_like(t)
        r = t.copy()
        scale = np.maximum(np.abs(t), 1e-300)
        for _ in range(max_iter):
            rn = t / (1.0 + self.zeta.ratio(r, theta))
            if np.all(np.abs(rn - r) < tol * scale):
                return rn
            r = rn
        raise DeformationError("deformation too large: inversion did not converge")

    def jacobian_det(self, x):
        """det Dg from the rank-one-update form: lam^2 (lam + (r z_r - 2 z)/r^2)."""
        x, r, th, single = _as_rt(x)
        det = self.radial_det(r, th)
        return det[0] if single else det

    def radial_det(self, r, theta):
        r = np.asarray(r, dtype=float)
        theta = np.asarray(theta, dtype=float) * np.ones_like(r)
        lam = 1.0 + self.zeta.ratio(r, theta)
        rr = np.maximum(r, 1e-3 * self.zeta.R_dom)
        det = lam ** 2 * (lam + (rr * self.zeta.d_r(rr, theta) - 2.0 * self.zeta.value(rr, theta)) / rr ** 2)
        if np.any(det <= 0):
            raise DeformationError("fold: det Dg <= 0")
        return det


def mass_factor(dmap, star, n_r=96, n_mu=32):
    """Mass factor M(zeta) = M / int_{B_R} rho0 det Dg dz."""
    pan = Panels.graded(star.R, n_r, order=8)
    mu, wmu = gl_nodes(n_mu)
    mu = 0.5 * (mu + 1.0)          # [0, 1], even reflection doubles
    wmu = 0.5 * wmu
    th = np.arccos(mu)
    R2, T2 = np.meshgrid(pan.x, th, indexing="ij")
    det = dmap.radial_det(R2.ravel(), T2.ravel()).reshape(R2.shape)
    rho = star.rho0_of(pan.x)
    integrand = rho[:, None] * det * pan.x[:, None] ** 2
    total = 4.0 * np.pi * np.einsum("i,ij,j->", pan.w, integrand, wmu)
    return star.mass / total


def extend(zeta):
    """Extend zeta from B_R to B_2R: higher-order reflection across r=R with
    a smooth cutoff vanishing before 2R, symmetrized over axial rotations and
    the x3-reflection (both are identities for fields stored axisymmetric and
    even, but the averaging is applied for linearity of the construction)."""
    R = zeta.R_dom
    nr = len(zeta.r_grid)
    nt = len(zeta.theta_grid)
    ks = np.arange(1, 5, dtype=float)
    V = np.vander(-1.0 / ks, 4, increasing=True).T  # V[j,k] = (-1/k)^j
    coef = np.linalg.solve(V, np.ones(4))

    r_ext = np.linspace(0.0, 2.0 * R, 2 * nr - 1)
    th = zeta.theta_grid
    vals = np.zeros((len(r_ext), nt))
    vals[:nr] = zeta.values  # exact agreement on B_R
    s = r_ext[nr:] - R
    # reflected samples, x3-reflection average built in via field evenness
    for c, k in zip(coef, ks):
        refl = zeta.value((R - s / k)[:, None] * np.ones((1, nt)),
                          th[None, :] * np.ones((len(s), 1)))
        vals[nr:] += c * refl
    # cutoff: 1 up to 1.4R, smooth to 0 at 1.9R
    chi = np.ones_like(r_ext)
    ramp = (r_ext > 1.4 * R) & (r_ext < 1.9 * R)
    chi[ramp] = 0.5 * (1.0 + np.cos(np.pi * (r_ext[ramp] - 1.4 * R) / (0.5 * R)))
    chi[r_ext >= 1.9 * R] = 0.0
    vals *= chi[:, None]
    return DeformationField(r_ext, th, vals)
