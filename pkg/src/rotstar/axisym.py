"""Axisymmetric field machinery for the nonlinear solvers.

Fields are represented either on a tensor (r, theta) grid (DeformationField)
or as even spherical-harmonic mode profiles on composite Gauss-Legendre
panels (ModalField).  Geometry caches everything that depends on the
deformation but not on the model: the inverse map on the source grid, the
dilating-map Jacobian pieces, and the per-mode potential matrices evaluated
at the deformed collocation radii.
"""

import numpy as np

from .dilation import DeformationField
from .numerics import Panels, Ytilde, dY_dtheta, gl_nodes
from .potentials import mode_potential_matrices


def _bary_diff_matrix(x, bw):
    """Differentiation matrix on polynomial nodes x with barycentric weights bw."""
    m = len(x)
    D = np.zeros((m, m))
    for i in range(m):
        for j in range(m):
            if i != j:
                D[i, j] = (bw[j] / bw[i]) / (x[i] - x[j])
        D[i, i] = -np.sum(D[i])
    return D


class ModalField:
    """zeta(x) = sum_l zeta_l(r) Y_l0(theta), even l only, nodal profiles on
    composite panels.  Implements the same evaluation interface as
    DeformationField so the dilating-map machinery accepts either."""

    def __init__(self, panels, ells, coefs):
        self.panels = panels
        self.ells = tuple(ells)
        self.coefs = np.asarray(coefs, dtype=float)  # (n_l, n_nodes)
        self.R_dom = float(panels.edges[-1])
        xg = panels._xg
        Dref = _bary_diff_matrix(xg, panels._ref_bw)
        # nodal derivative values per mode (chain rule for the panel maps)
        n_l, nq = self.coefs.shape
        m = panels.order
        self.dcoefs = np.empty_like(self.coefs)
        for p in range(panels.n_panels):
            scale = 2.0 / (panels.edges[p + 1] - panels.edges[p])
            cols = slice(p * m, (p + 1) * m)
            self.dcoefs[:, cols] = self.coefs[:, cols] @ (scale * Dref.T)

    @classmethod
    def zeros(cls, panels, ells):
        return cls(panels, ells, np.zeros((len(ells), len(panels))))

    def _eval(self, coefs, r, theta):
        r = np.asarray(r, dtype=float)
        theta = np.asarray(theta, dtype=float) * np.ones_like(r)
        shp = r.shape
        T = self.panels.interp_rows(np.clip(r.ravel(), 0.0, self.R_dom))
        mu = np.cos(theta.ravel())
        out = np.zeros(r.size)
        for i, l in enumerate(self.ells):
            out += (T @ coefs[i]) * Ytilde(l, mu)
        return out.reshape(shp)

    def value(self, r, theta):
        return self._eval(self.coefs, r, theta)

    def d_r(self, r, theta):
        return self._eval(self.dcoefs, r, theta)

    def d_theta(self, r, theta):
        r = np.asarray(r, dtype=float)
        theta = np.asarray(theta, dtype=float) * np.ones_like(r)
        shp = r.shape
        T = self.panels.interp_rows(np.clip(r.ravel(), 0.0, self.R_dom))
        out = np.zeros(r.size)
        for i, l in enumerate(self.ells):
            out += (T @ self.coefs[i]) * dY_dtheta(l, theta.ravel())
        return out.reshape(shp)

    def ratio(self, r, theta):
        r = np.asarray(r, dtype=float)
        theta = np.asarray(theta, dtype=float) * np.ones_like(r)
        r_small = 1e-3 * self.R_dom
        rr = np.maximum(r, r_small)
        return self.value(rr, theta) / rr ** 2

    def xnorm(self, nsample=(120, 25)):
        nr, nt = nsample
        r = np.linspace(self.R_dom / nr, self.R_dom, nr)
        th = np.linspace(1e-3, np.pi / 2, nt)
        R, T = np.meshgrid(r, th, indexing="ij")
        zr = self.d_r(R, T)
        zt = self.d_theta(R, T)
        return float(np.max(np.sqrt(zr ** 2 + (zt / R) ** 2) / R))

    def to_deformation_field(self, nr=128, ntheta=64):
        r = np.linspace(0.0, self.R_dom, nr)
        th = np.linspace(0.0, np.pi / 2, ntheta)
        vals = self.value(r[:, None] * np.ones((1, ntheta)),
                          th[None, :] * np.ones((nr, 1)))
        vals[0] = 0.0
        return DeformationField(r, th, vals)


def field_ratio(zeta, r, theta):
    """zeta/|x|^2 for a field or None (the zero deformation)."""
    if zeta is None:
        return np.zeros_like(np.asarray(r, dtype=float))
    return zeta.ratio(r, theta)


class Discretization:
    """Grids and mode set for the nonlinear solvers."""

    def __init__(self, R, ells=(0, 2, 4, 6, 8, 10, 12), n_rc=48, order=8,
                 n_mu=24, n_rt=104, n_sub=12, n_ru=64, n_ann=8):
        self.R = float(R)
        self.ells = tuple(ells)
        self.order = order
        self.n_sub = n_sub
        self.n_ann = n_ann   # radial panels across the deformed-boundary band
        self.panels_c = Panels.graded(R, n_rc, order)   # collocation / unknowns
        self.n_rt = n_rt                                 # source-grid budget
        xm, wm = gl_nodes(n_mu)
        self.mu = 0.5 * (xm + 1.0)
        self.wmu = 0.5 * wm
        self.theta = np.arccos(self.mu)
        self.sin_theta = np.sqrt(1.0 - self.mu ** 2)
        self.Yt = np.array([Ytilde(l, self.mu) for l in ells])        # (n_l, n_mu)
        self.proj = 4.0 * np.pi * self.wmu[None, :] * self.Yt         # full-sphere modes
        self.panels_u = Panels.graded(R, n_ru, order)   # undeformed volume grid

    def n_unknowns(self):
        return len(self.ells) * len(self.panels_c)


class Geometry:
    """Deformation-dependent caches shared by evaluate/frechet for one zeta."""

    def __init__(self, zeta, star, disc):
        self.zeta = zeta
        self.star = star
        self.disc = disc
        R = star.R
        th = disc.theta
        n_mu = len(th)

        # deformed boundary radius per quadrature colatitude
        self.tb = R * (1.0 + field_ratio(zeta, np.full(n_mu, R), th))
        tb_min, tb_max = float(np.min(self.tb)), float(np.max(self.tb))

        # physical-space source panels: graded bulk + boundary annulus fine
        # enough to control the density cusp crossing it per colatitude
        bulk = Panels.graded(tb_min, disc.n_rt, disc.order)
        if tb_max - tb_min > 1e-13 * R:
            k = np.linspace(tb_min, tb_max, disc.n_ann + 1)
            edges = np.concatenate([bulk.edges, k[1:]])
        else:
            edges = bulk.edges
        self.panels_t = Panels(edges, disc.order)
        tq = self.panels_t.x
        self.tq = tq

        # inverse map z(y) on the source grid, one column per colatitude
        T2, TH2 = np.meshgrid(tq, th, indexing="ij")
        self.inside = T2 <= self.tb[None, :] * (1.0 + 1e-14)
        if zeta is None:
            self.z0 = np.where(self.inside, T2, np.nan)
        else:
            z = T2.copy()
            for _ in range(200):
                zn = T2 / (1.0 + field_ratio(zeta, z, TH2))
                if np.max(np.abs(zn - z)) < 1e-13 * R:
                    z = zn
                    break
                z = zn
            self.z0 = np.where(self.inside, np.minimum(z, R), np.nan)
        self.T2, self.TH2 = T2, TH2

        # dilating-map pieces at the source points (lam + w1 = radial stretch)
        if zeta is None:
            self.g1_src = np.ones_like(T2)
        else:
            zz = np.where(self.inside, self.z0, R)
            lam = 1.0 + field_ratio(zeta, zz, TH2)
            w1 = zeta.d_r(zz, TH2) / np.maximum(zz, 1e-3 * R) \
                - 2.0 * zeta.value(zz, TH2) / np.maximum(zz, 1e-3 * R) ** 2
            self.g1_src = lam + w1

        # deformed radii of the collocation targets
        rc = disc.panels_c.x
        RC, THC = np.meshgrid(rc, th, indexing="ij")
        self.rc, self.RC, self.THC = rc, RC, THC
        lam_t = 1.0 + field_ratio(zeta, RC, THC)
        self.s_t = RC * lam_t
        self.lam_t = lam_t

        # potential matrices per mode at the deformed target radii (+ origin)
        s_flat = self.s_t.ravel()
        self.A = {}
        self.Ap = {}
        for l in disc.ells:
            A, Ap = mode_potential_matrices(self.panels_t, l, s_flat,
                                            n_sub=disc.n_sub)
            self.A[l] = A
            self.Ap[l] = Ap
        A0z, _ = mode_potential_matrices(self.panels_t, 0, np.array([0.0]),
                                         n_sub=disc.n_sub)
        self.A0_zero = A0z[0]

        # undeformed volume grid caches (mass factor, M'(zeta)xi)
        ru = disc.panels_u.x
        RU, THU = np.meshgrid(ru, th, indexing="ij")
        self.RU, self.THU = RU, THU
        self.rho_u = np.atleast_1d(star.rho0_of(ru))
        if zeta is None:
            self.lam_u = np.ones_like(RU)
            self.g1_u = np.ones_like(RU)
        else:
            self.lam_u = 1.0 + field_ratio(zeta, RU, THU)
            w1u = zeta.d_r(RU, THU) / RU - 2.0 * zeta.value(RU, THU) / RU ** 2
            self.g1_u = self.lam_u + w1u
        self.det_u = self.lam_u ** 2 * self.g1_u
        if np.any(self.det_u <= 0):
            from .errors import DeformationError
            raise DeformationError("fold: det Dg <= 0 on the volume grid")
        # int rho0 det Dg dx (weights: 2 * 2 pi t^2 dt dmu, evenness doubled)
        wu = disc.panels_u.w * ru ** 2
        self.vol_rho_det = 4.0 * np.pi * np.einsum(
            "i,ij,j->", wu, self.rho_u[:, None] * self.det_u, disc.wmu)

    # ------------------------------------------------------------------

    def project_modes(self, vals_src):
        """Mode profiles (n_l, n_tq) of a field sampled on the source grid."""
        return np.einsum("lj,ij->li", self.disc.proj, vals_src)

    def potential_at_targets(self, sigma, deriv=False):
        """Potential (and optionally d/ds) fields at the collocation targets
        from mode source profiles sigma (n_l, n_tq); also the origin value."""
        shp = self.s_t.shape
        V = np.zeros(shp)
        Vp = np.zeros(shp) if deriv else None
        for i, l in enumerate(self.disc.ells):
            phi = (self.A[l] @ sigma[i]).reshape(shp)
            V += phi * self.disc.Yt[i][None, :]
            if deriv:
                Vp += (self.Ap[l] @ sigma[i]).reshape(shp) * self.disc.Yt[i][None, :]
        V0 = float(self.A0_zero @ sigma[0]) * Ytilde(0, 1.0)
        if deriv:
            return V, Vp, V0
        return V, V0

    def volume_integral_src(self, vals_src):
        """Integral over the ball of a field sampled on the source grid."""
        wt = self.panels_t.w * self.tq ** 2
        return 4.0 * np.pi * np.einsum("i,ij,j->", wt, vals_src, self.disc.wmu)
