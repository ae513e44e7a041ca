"""Slowly rotating Euler-Poisson equilibria.

The unknown is the deformation zeta of the dilating map g_zeta; the residual
field is

    F(zeta, kappa)(x) = Mfac [V(g(x)) - V(0)] + kappa J(r_cyl(g(x)))
                        - h(Mfac rho0(x)) + h(Mfac rho0(0)),

where V is the potential of the transported density rho0(g^-1 .), Mfac the
mass factor restoring the total mass, and J(r) = int_0^r omega^2(s) s ds the
centrifugal antiderivative.  At zeta = 0 the gravity and enthalpy terms
cancel against the radial equilibrium and F = kappa J exactly.

first_order_shape solves the linearized problem mode by mode; newton_continue
runs Newton iteration on the spherical-harmonic coefficients of zeta along a
schedule of rotation intensities kappa.
"""

import csv
import json

import numpy as np

from .axisym import Discretization, Geometry, ModalField
from .dilation import EPS0
from .errors import DeformationError, SolverError
from .linop import assemble_mode, solve as linop_solve
from .numerics import Ytilde, gl_nodes

_TINY = 1e-14


# ---------------------------------------------------------------------------
# centrifugal forcing


def centrifugal_rhs(profile, star, ells=(0, 2, 4, 6, 8), nodes=None, n_mu=24):
    """Mode profiles of dF/dkappa at zeta=0, i.e. of J(r sin(theta)).

    Returns (nodes, rhs) with rhs shape (n_l, n_nodes)."""
    if nodes is None:
        nodes = np.linspace(0.0, star.R, 129)[1:]
    xm, wm = gl_nodes(n_mu)
    mu = 0.5 * (xm + 1.0)
    wmu = 0.5 * wm
    sth = np.sqrt(1.0 - mu ** 2)
    Jvals = profile.J(np.outer(nodes, sth).ravel()).reshape(len(nodes), n_mu)
    rhs = np.empty((len(ells), len(nodes)))
    for i, l in enumerate(ells):
        rhs[i] = Jvals @ (4.0 * np.pi * wmu * Ytilde(l, mu))
    return nodes, rhs


# ---------------------------------------------------------------------------
# the nonlinear residual and its derivative


def _model_fields(geo):
    """EP caches on a geometry: transported density modes, its potential at
    the targets, and the mass factor."""
    if getattr(geo, "_ep", None) is not None:
        return geo._ep
    star = geo.star
    rho_src = np.zeros_like(geo.T2)
    if np.any(geo.inside):
        rho_src[geo.inside] = star.rho0_of(geo.z0[geo.inside])
    sigma = geo.project_modes(rho_src)
    V, Vp, V0 = geo.potential_at_targets(sigma, deriv=True)
    mfac = star.mass / geo.vol_rho_det
    geo._ep = {"rho_src": rho_src, "sigma": sigma, "V": V, "Vp": Vp,
               "V0": V0, "mfac": mfac}
    return geo._ep


def evaluate_F(zeta, kappa, star, profile, disc=None, geo=None):
    """Residual field F(zeta, kappa) at the collocation targets.

    Returns (F, geo) with F of shape (n_rc, n_mu); geo can be reused for
    frechet_apply at the same zeta."""
    if disc is None:
        disc = Discretization(star.R)
    if geo is None:
        geo = Geometry(zeta, star, disc)
    ep = _model_fields(geo)
    mfac = ep["mfac"]
    rc = geo.rc
    r_cyl = geo.s_t * disc.sin_theta[None, :]
    grav = mfac * (ep["V"] - ep["V0"])
    cent = kappa * profile.J(r_cyl.ravel()).reshape(r_cyl.shape)
    rho_c = np.atleast_1d(star.rho0_of(rc))
    rho_00 = float(np.atleast_1d(star.rho0_of(np.array([0.0])))[0])
    h_term = (-np.atleast_1d(star.eos.h(mfac * rho_c))
              + float(np.atleast_1d(star.eos.h(np.array([mfac * rho_00])))[0]))
    return grav + cent + h_term[:, None], geo


def frechet_apply(zeta, kappa, xi, star, profile, disc=None, geo=None):
    """Directional derivative dF(zeta, kappa)[xi] at the collocation targets.

    xi is a DeformationField or ModalField; zeta may be None for the
    undeformed state."""
    if disc is None:
        disc = Discretization(star.R)
    if geo is None:
        geo = Geometry(zeta, star, disc)
    ep = _model_fields(geo)
    mfac = ep["mfac"]
    R = star.R

    # mass-factor derivative: trace formula on the undeformed volume grid
    ru = disc.panels_u.x
    xi_u = xi.value(geo.RU, geo.THU)
    xir_u = xi.d_r(geo.RU, geo.THU)
    tr = (xir_u / geo.RU - xi_u / geo.RU ** 2) / geo.g1_u \
        + 2.0 * xi_u / (geo.lam_u * geo.RU ** 2)
    wu = disc.panels_u.w * ru ** 2
    integral = 4.0 * np.pi * np.einsum(
        "i,ij,j->", wu, geo.rho_u[:, None] * geo.det_u * tr, disc.wmu)
    mfac_p = -star.mass / geo.vol_rho_det ** 2 * integral

    # transported-density derivative: potential of
    # q(z) = rho0'(z) (xi(z)/|z|) / (radial stretch)
    zz = np.where(geo.inside, geo.z0, R)
    q_src = np.zeros_like(geo.T2)
    msk = geo.inside
    rho0p_z = np.atleast_1d(star.rho0p_of(zz))
    q_src[msk] = rho0p_z[msk] \
        * (xi.value(zz, geo.TH2)[msk] / np.maximum(zz[msk], 1e-6 * R)) \
        / geo.g1_src[msk]
    sig_q = geo.project_modes(q_src)
    Vq, Vq0 = geo.potential_at_targets(sig_q)

    xi_t = xi.value(geo.RC, geo.THC)
    r_cyl = geo.s_t * disc.sin_theta[None, :]
    omega2 = profile.omega_sq(r_cyl.ravel()).reshape(r_cyl.shape)

    rho_c = np.atleast_1d(star.rho0_of(geo.rc))
    rho_00 = float(np.atleast_1d(star.rho0_of(np.array([0.0])))[0])
    dh_c = np.atleast_1d(star.eos.dh(mfac * rho_c))
    dh_0 = float(np.atleast_1d(star.eos.dh(np.array([mfac * rho_00])))[0])

    out = mfac_p * (ep["V"] - ep["V0"])                       # M' F1
    out += mfac * (-(Vq - Vq0))                               # moved density
    out += mfac * ep["Vp"] * (xi_t / geo.RC)                  # moved target
    out += kappa * omega2 * r_cyl * xi_t * disc.sin_theta[None, :] / geo.RC
    out += (-dh_c * rho_c + dh_0 * rho_00)[:, None] * mfac_p  # enthalpy terms
    return out


# ---------------------------------------------------------------------------
# first-order response


class ShapeReport:
    """Linear response xi with L xi = -dF/dkappa, per harmonic mode."""

    def __init__(self, star, profile, ells, ops, xi):
        self.star = star
        self.profile = profile
        self.ells = tuple(ells)
        self.ops = ops          # l -> ModeOperator
        self.xi = xi            # l -> nodal profile on ops[l].panels.x
        self.xi_R = {l: float(ops[l].panels.interp(xi[l], np.array([star.R]))[0])
                     for l in ells}

    def boundary_shift(self, theta):
        """xi(R, theta)/R, the first-order radial boundary displacement per
        unit kappa."""
        mu = np.cos(np.asarray(theta, dtype=float))
        out = np.zeros_like(np.atleast_1d(mu), dtype=float)
        for l in self.ells:
            out += self.xi_R[l] * Ytilde(l, np.atleast_1d(mu))
        return out / self.star.R

    def oblateness_slope(self):
        """d(R_eq - R_pole)/dkappa at kappa = 0."""
        eq, pole = self.boundary_shift(np.array([np.pi / 2, 0.0]))
        return float(eq - pole)

    def dump(self, json_path, csv_path):
        with open(json_path, "w") as f:
            json.dump({"ells": list(self.ells),
                       "xi_R": {str(l): self.xi_R[l] for l in self.ells},
                       "oblateness_slope": self.oblateness_slope()}, f, indent=1)
        with open(csv_path, "w", newline="") as f:
            w = csv.writer(f)
            w.writerow(["l", "r", "xi"])
            for l in self.ells:
                for r, v in zip(self.ops[l].nodes, self.xi[l]):
                    w.writerow([l, repr(r), repr(v)])


def first_order_shape(star, profile, ells=(0, 2, 4, 6, 8), n=256, order=8,
                      rank_one="ep", n_mu=24):
    """Solve L xi_l = -(dF/dkappa)_l for each even mode."""
    ops = {}
    xi = {}
    for l in ells:
        op = assemble_mode(star, l, n=n, order=order, rank_one=rank_one)
        _, rhs = centrifugal_rhs(profile, star, ells=(l,), nodes=op.nodes,
                                 n_mu=n_mu)
        if np.max(np.abs(rhs[0])) < 1e-14 * max(1.0, star.R ** 2):
            ops[l] = op
            xi[l] = np.zeros_like(op.nodes)
            continue
        ops[l] = op
        xi[l] = linop_solve(op, -rhs[0])
    return ShapeReport(star, profile, ells, ops, xi)


# ---------------------------------------------------------------------------
# Newton continuation


class RotatingSolution:
    """A converged rotating state: modal deformation plus diagnostics."""

    def __init__(self, star, profile, kappa, disc, coefs, residual_sup,
                 iters, mfac, mass_value):
        self.star = star
        self.profile = profile
        self.kappa = float(kappa)
        self.disc = disc
        self.coefs = coefs
        self.residual_sup = float(residual_sup)
        self.iters = int(iters)
        self.mass_factor = float(mfac)
        self.mass_value = float(mass_value)
        zr = self.zeta_field()
        R = star.R
        if zr is None:
            self.R_eq = self.R_pole = R
        else:
            self.R_eq = R * (1.0 + float(zr.ratio(np.array([R]),
                                                  np.array([np.pi / 2]))[0]))
            self.R_pole = R * (1.0 + float(zr.ratio(np.array([R]),
                                                    np.array([0.0]))[0]))

    def zeta_field(self):
        if np.max(np.abs(self.coefs)) == 0.0:
            return None
        return ModalField(self.disc.panels_c, self.disc.ells, self.coefs)

    def to_row(self):
        return [self.kappa, self.R_eq, self.R_pole, self.mass_value,
                self.residual_sup, self.iters]

    def dump(self, json_path, csv_path):
        with open(json_path, "w") as f:
            json.dump({"kappa": self.kappa, "R_eq": self.R_eq,
                       "R_pole": self.R_pole, "mass": self.mass_value,
                       "mass_factor": self.mass_factor,
                       "residual_sup": self.residual_sup,
                       "iters": self.iters,
                       "ells": list(self.disc.ells)}, f, indent=1)
        with open(csv_path, "w", newline="") as f:
            w = csv.writer(f)
            w.writerow(["l", "r", "zeta_l"])
            for i, l in enumerate(self.disc.ells):
                for r, v in zip(self.disc.panels_c.x, self.coefs[i]):
                    w.writerow([l, repr(r), repr(v)])


def _project_residual(F, disc):
    """Harmonic coefficients (n_l, n_rc) of a target field."""
    return np.einsum("lj,ij->li", disc.proj, F)


def _newton_at(star, profile, kappa, coefs, disc, evaluator, frechet,
               tol, max_iter):
    """Newton iteration at fixed kappa from the warm start coefs."""
    ells = disc.ells
    n_l, n_c = len(ells), len(disc.panels_c)
    coefs = coefs.copy()
    prev_res = np.inf
    for it in range(max_iter + 1):
        field = None if np.max(np.abs(coefs)) == 0.0 else \
            ModalField(disc.panels_c, ells, coefs)
        if field is not None:
            xn = field.xnorm()
            if xn >= EPS0:
                raise DeformationError(
                    f"deformation cap: ||zeta||_X = {xn:.4g} >= {EPS0} "
                    f"at kappa={kappa:g}")
        F, geo = evaluator(field, kappa, disc)
        res_sup = float(np.max(np.abs(F)))
        if res_sup < tol:
            return coefs, geo, res_sup, it
        if it == max_iter or res_sup > 0.5 * prev_res:
            # stagnation at the discretization floor is not convergence
            raise SolverError(
                f"Newton stalled at kappa={kappa:g}: residual {res_sup:.3e}")
        prev_res = res_sup
        res = _project_residual(F, disc).ravel()
        J = np.empty((n_l * n_c, n_l * n_c))
        for col in range(n_l * n_c):
            e = np.zeros((n_l, n_c))
            e[divmod(col, n_c)] = 1.0
            basis = ModalField(disc.panels_c, ells, e)
            dF = frechet(field, kappa, basis, disc, geo)
            J[:, col] = _project_residual(dF, disc).ravel()
        delta = np.linalg.solve(J, -res)
        coefs = coefs + delta.reshape(n_l, n_c)
    raise SolverError("unreachable")


def _warm_start_coefs(shape, disc):
    """Sample the first-order response onto the collocation nodes, per unit
    kappa."""
    coefs = np.zeros((len(disc.ells), len(disc.panels_c)))
    for i, l in enumerate(disc.ells):
        if l in shape.ells:
            coefs[i] = shape.ops[l].panels.interp(shape.xi[l], disc.panels_c.x)
    return coefs


def newton_continue(star, profile, kappas, disc=None, tol=1e-8, max_iter=8,
                    max_halvings=6, evaluator=None, frechet=None, shape=None,
                    on_solution=None):
    """Continuation in the rotation intensity kappa with exact mass.

    Returns one RotatingSolution per requested kappa.  Steps between
    requested values are halved when Newton fails to converge.  on_solution
    is called with each accepted solution as it is produced, so callers can
    persist partial curves before a later step fails."""
    if disc is None:
        disc = Discretization(star.R)
    if evaluator is None:
        def evaluator(field, kappa, d):
            return evaluate_F(field, kappa, star, profile, disc=d)
    if frechet is None:
        def frechet(field, kappa, basis, d, geo):
            return frechet_apply(field, kappa, basis, star, profile,
                                 disc=d, geo=geo)
    if shape is None:
        shape = first_order_shape(star, profile, ells=disc.ells)
    slope = _warm_start_coefs(shape, disc)

    sols = []
    k_cur = 0.0
    coefs = np.zeros((len(disc.ells), len(disc.panels_c)))
    for target in kappas:
        if target < k_cur - _TINY:
            raise SolverError("kappa schedule must be nondecreasing")
        step = max(target - k_cur, 0.0)
        halvings = 0
        done = False
        while not done:
            k_try = min(target, k_cur + step) if step > 0 else target
            warm = coefs + (k_try - k_cur) * slope
            try:
                coefs_new, geo, res_sup, iters = _newton_at(
                    star, profile, k_try, warm, disc, evaluator, frechet,
                    tol, max_iter)
            except SolverError:
                halvings += 1
                if halvings > max_halvings:
                    raise
                step *= 0.5
                continue
            k_cur, coefs = k_try, coefs_new
            if abs(k_cur - target) <= _TINY:
                model = getattr(geo, "_ep", None) or getattr(geo, "_vp", None)
                mfac = model["mfac"]
                dens = model.get("rho_src", model.get("w_src"))
                mass_value = mfac * geo.volume_integral_src(dens)
                sol = RotatingSolution(star, profile, k_cur, disc, coefs,
                                       res_sup, iters, mfac, mass_value)
                sols.append(sol)
                if on_solution is not None:
                    on_solution(sol)
                done = True
    return sols
