"""Vlasov-Poisson steady states with a polytropic microscopic ansatz.

The phase-space density is f = phi(E, kappa r v) with
phi(E, L) = (-E)_+^{-mu} psi(L) and psi an even polynomial, so the spatial
density at rotation intensity kappa is

    w(kappa, r, u) = 2 pi int_{-u}^0 int_{-S}^{S} phi(E, kappa r s) ds dE,
    S = sqrt(2(E + u)),

with w(0, r, u) = G(u) closed-form in Beta functions.  The radial problem
reuses the shooting core with source 4 pi G; the nonlinear rotation problem
reuses the dilating-map geometry and Newton continuation with model-specific
residual and derivative fields.
"""

import numpy as np
from scipy.special import beta as beta_fn
from scipy.special import roots_jacobi

from .axisym import Discretization, Geometry
from .errors import EOSError, SolverError, UnboundStarError
from .linop import assemble_mode, solve as linop_solve
from .numerics import Ytilde, gl_nodes, integrate_ivp
from .radial import N_GRID, RadialStar, _shoot_profile
from . import rotating


class VlasovAnsatz:
    """phi(E, L) = (-E)_+^{-mu} (psi0 + psi2 L^2), 0 < mu < 1."""

    def __init__(self, mu, psi0=1.0, psi2=0.0):
        if not mu < 1.0:
            raise EOSError(f"need mu < 1 for an integrable energy power, got {mu}")
        if psi0 <= 0:
            raise EOSError("psi0 must be positive")
        self.mu = float(mu)
        self.psi0 = float(psi0)
        self.psi2 = float(psi2)
        # closed-form coefficients of the velocity integrals
        self._cG = 4.0 * np.pi * np.sqrt(2.0) * self.psi0 * beta_fn(1.0 - mu, 1.5)
        self._cGp = 2.0 * np.pi * np.sqrt(2.0) * self.psi0 * beta_fn(1.0 - mu, 0.5)
        self._cK = (4.0 * np.pi / 3.0) * 2.0 ** 1.5 * 2.0 * self.psi2 \
            * beta_fn(1.0 - mu, 2.5)
        self._cKp = 4.0 * np.pi * np.sqrt(2.0) * 2.0 * self.psi2 \
            * beta_fn(1.0 - mu, 1.5)

    @classmethod
    def matched_to_power_law(cls, mu, psi2=0.0):
        """psi0 chosen so that G(u) equals the inverse enthalpy of the
        power law p = s^gamma with gamma = 1 + 1/(3/2 - mu)."""
        n = 1.5 - mu
        gamma = 1.0 + 1.0 / n
        K = ((gamma - 1.0) / gamma) ** n
        psi0 = K / (4.0 * np.pi * np.sqrt(2.0) * beta_fn(1.0 - mu, 1.5))
        return cls(mu, psi0=psi0, psi2=psi2)

    def equivalent_gamma(self):
        return 1.0 + 1.0 / (1.5 - self.mu)

    # kappa = 0 profile ----------------------------------------------------

    def G(self, u):
        """G(u) = w(0, ., u)."""
        u = np.maximum(np.asarray(u, dtype=float), 0.0)
        return self._cG * u ** (1.5 - self.mu)

    def Gp(self, u):
        u = np.asarray(u, dtype=float)
        with np.errstate(invalid="ignore"):
            out = np.where(u > 0,
                           self._cGp * np.maximum(u, 1e-300) ** (0.5 - self.mu),
                           0.0)
        return out

    # full w and derivatives (closed forms: psi is an even quadratic) -------

    def w(self, kappa, r, u):
        u = np.maximum(np.asarray(u, dtype=float), 0.0)
        r = np.asarray(r, dtype=float)
        return self._cG * u ** (1.5 - self.mu) \
            + 0.5 * kappa ** 2 * r ** 2 * self._cK * u ** (2.5 - self.mu)

    def dw_du(self, kappa, r, u):
        u = np.asarray(u, dtype=float)
        r = np.asarray(r, dtype=float)
        with np.errstate(invalid="ignore"):
            uu = np.maximum(u, 1e-300)
            out = np.where(u > 0,
                           self._cGp * uu ** (0.5 - self.mu)
                           + 0.5 * kappa ** 2 * r ** 2 * self._cKp
                           * uu ** (1.5 - self.mu),
                           0.0)
        return out

    def d2w_dkappa2_unit(self, u):
        """d^2 w/d kappa^2 at kappa=0 divided by r^2 (pure function of u)."""
        u = np.maximum(np.asarray(u, dtype=float), 0.0)
        return self._cK * u ** (2.5 - self.mu)

    # quadrature oracle of the definition ----------------------------------

    def w_quad(self, kappa, r, u, n_E=48, n_s=32):
        """w by Gauss-Jacobi in the energy (weight t^-mu (1-t)^1/2 after
        E = -u t) and Gauss-Legendre in the velocity component."""
        u = float(u)
        if u <= 0:
            return 0.0
        xj, wj = roots_jacobi(n_E, 0.5, -self.mu)
        t = 0.5 * (xj + 1.0)
        S = np.sqrt(2.0 * u * (1.0 - t))
        xs, ws = gl_nodes(n_s)
        s = 0.5 * S[:, None] * (xs[None, :] + 1.0)       # [0, S] per energy
        psi = self.psi0 + self.psi2 * (kappa * r * s) ** 2
        inner = S * np.einsum("ij,j->i", psi, ws)        # int_{-S}^{S} psi ds
        # strip the (1-t)^(1/2) factor already in the Jacobi weight
        f = inner / np.sqrt(1.0 - t)
        return 2.0 * np.pi * u ** (1.0 - self.mu) * 2.0 ** (self.mu - 1.5) \
            * float(np.dot(wj, f))


def G_of_u(ansatz, u):
    return ansatz.G(u)


def w_eval(ansatz, kappa, r, u):
    return ansatz.w(kappa, r, u)


# ---------------------------------------------------------------------------
# radial problem


class _DensityOfU:
    """Adapter exposing G as an inverse enthalpy, so the radial-star profile
    machinery applies verbatim to the Vlasov model."""

    def __init__(self, ansatz):
        self._ansatz = ansatz

    def hinv(self, u):
        return self._ansatz.G(u)

    def dhinv(self, u):
        return self._ansatz.Gp(u)


class VlasovStar(RadialStar):
    """Radial Vlasov-Poisson steady state: u0 profile with density G(u0)."""

    def __init__(self, ansatz, a, R, M, traj, n_grid=N_GRID):
        self.ansatz = ansatz
        super().__init__(_DensityOfU(ansatz), a, R, M, traj, n_grid=n_grid)

    def to_json_dict(self):
        return {
            "mu": self.ansatz.mu,
            "a": self.a,
            "R": self.R,
            "mass": self.mass,
            "grid": self.grid.nodes.tolist(),
            "u0": self.u0.tolist(),
            "rho0": self.rho0.tolist(),
        }


def solve_vp_radial(ansatz, a, tol=1e-12, n_grid=N_GRID):
    """Shooting solution of Delta u + 4 pi G(u) = 0 (radial), u(0)=a."""
    if a <= 0:
        raise EOSError("central value a must be positive")

    def source(v):
        return 4.0 * np.pi * float(np.atleast_1d(ansatz.G(v))[0])

    R, traj = _shoot_profile(source, a, tol=tol)
    M = float(traj(R)[2])
    return VlasovStar(ansatz, a, R, M, traj, n_grid=n_grid)


def scaling_response(star, tol=1e-12):
    """v_S with Delta v_S + 4 pi G'(u0) v_S + 4 pi G(u0) = 0, v_S(0)=v_S'(0)=0.

    The scaling identities r u0' = 2 v_S (all r) and 2 v_S'(R) = -u0'(R)
    hold exactly on solutions; they are the standard consistency check."""
    ans = star.ansatz
    s_a = 4.0 * np.pi * float(np.atleast_1d(ans.G(star.a))[0])
    r0 = 1e-4 * star.R
    # series: v_S ~ -(s_a/6) r^2 near 0 (forced, homogeneous part higher order)
    y0 = [-s_a / 6.0 * r0 ** 2, -s_a / 3.0 * r0]

    def rhs(r, y):
        u = float(star.u0_of(r)[0])
        gp = float(np.atleast_1d(ans.Gp(u))[0])
        g = float(np.atleast_1d(ans.G(u))[0])
        return [y[1], -2.0 / r * y[1] - 4.0 * np.pi * (gp * y[0] + g)]

    return integrate_ivp(rhs, y0, r0, tol=tol, r_max=star.R)


def assemble_L_vp(star, l, n=256, order=8, n_sub=12):
    """Mode-l block of the linearized Vlasov-Poisson operator."""
    return assemble_mode(star, l, n=n, order=order, rank_one="vp", n_sub=n_sub)


# ---------------------------------------------------------------------------
# rotation response


def kappa_derivative_norm(star, ansatz, disc=None):
    """Sup norm of dF/dkappa at (0, 0), computed from the odd-in-kappa part
    of the residual (identically zero for an even ansatz)."""
    if disc is None:
        disc = Discretization(star.R)
    k = 1e-2
    Fp, geo = _evaluate_F_vp(None, k, star, ansatz, disc)
    Fm, _ = _evaluate_F_vp(None, -k, star, ansatz, disc, geo=geo)
    return float(np.max(np.abs(Fp - Fm)) / (2.0 * k))


def vp_rotation_response(star, ansatz, kappa, n=256, order=8, ells=(0, 2)):
    """Leading-order deformation zeta = -(kappa^2/2) L^-1 d2F/dkappa2(0,0).

    The forcing r_cyl^2 d2w-potential splits into l=0 and l=2; returns
    (ops, xi) with nodal profiles of zeta per mode (kappa included)."""
    from .potentials import mode_potential_matrices
    ops = {l: assemble_L_vp(star, l, n=n, order=order) for l in ells}
    pan = ops[ells[0]].panels
    t = pan.x
    d2 = ansatz.d2w_dkappa2_unit(star.u0_of(t))
    # r_cyl^2 = t^2 (1 - mu^2) = t^2 (2/3)(1 - P2)
    sig = {0: (2.0 / 3.0) * t ** 2 * d2 * np.sqrt(4.0 * np.pi),
           2: -(2.0 / 3.0) * t ** 2 * d2 * np.sqrt(4.0 * np.pi / 5.0)}
    # M_kk = int A dy with A = r_cyl^2 d2w (only the l=0 part integrates)
    M_kk = 4.0 * np.pi * (2.0 / 3.0) * float(np.dot(pan.w, t ** 4 * d2))
    xi = {}
    for l in ells:
        if l not in sig:
            xi[l] = np.zeros_like(t)
            continue
        A, _ = mode_potential_matrices(pan, l, t)
        phi = A @ sig[l]
        if l == 0:
            A0, _ = mode_potential_matrices(pan, 0, np.array([0.0]))
            phi = phi - float(A0[0] @ sig[0])
            u_term = (np.atleast_1d(star.u0_of(t)) - star.a) * np.sqrt(4.0 * np.pi)
            phi = phi - u_term * M_kk / star.mass
        rhs = -(kappa ** 2 / 2.0) * phi
        xi[l] = linop_solve(ops[l], rhs)
    return ops, xi


# ---------------------------------------------------------------------------
# nonlinear rotation problem


def _model_fields_vp(geo, star, ansatz, kappa):
    cache = getattr(geo, "_vp", None)
    if cache is not None and cache["kappa"] == kappa:
        return cache
    u_z = np.zeros_like(geo.T2)
    u_z[geo.inside] = star.u0_of(geo.z0[geo.inside])
    r_cyl_y = geo.T2 * np.sqrt(1.0 - geo.disc.mu[None, :] ** 2)
    W = np.where(geo.inside, ansatz.w(kappa, r_cyl_y, u_z), 0.0)
    Mcal = geo.volume_integral_src(W)
    sigma = geo.project_modes(W)
    V, Vp, V0 = geo.potential_at_targets(sigma, deriv=True)
    geo._vp = {"kappa": kappa, "u_z": u_z, "r_cyl_y": r_cyl_y, "w_src": W,
               "Mcal": Mcal, "mfac": star.mass / Mcal, "V": V, "Vp": Vp,
               "V0": V0}
    return geo._vp


def _evaluate_F_vp(zeta, kappa, star, ansatz, disc, geo=None):
    if geo is None:
        geo = Geometry(zeta, star, disc)
    vp = _model_fields_vp(geo, star, ansatz, kappa)
    u_c = np.atleast_1d(star.u0_of(geo.rc))
    F = (star.a - u_c)[:, None] + vp["mfac"] * (vp["V"] - vp["V0"])
    return F, geo


def _frechet_vp(zeta, kappa, xi, star, ansatz, disc, geo=None):
    if geo is None:
        geo = Geometry(zeta, star, disc)
    vp = _model_fields_vp(geo, star, ansatz, kappa)
    R = star.R
    zz = np.where(geo.inside, geo.z0, R)
    dw = np.where(geo.inside,
                  ansatz.dw_du(kappa, vp["r_cyl_y"], vp["u_z"]), 0.0)
    u0p_z = np.atleast_1d(star.u0p_of(zz))
    q_src = dw * u0p_z * np.where(geo.inside, xi.value(zz, geo.TH2), 0.0) \
        / np.maximum(zz, 1e-6 * R) / geo.g1_src
    sig_q = geo.project_modes(q_src)
    Vq, Vq0 = geo.potential_at_targets(sig_q)
    xi_t = xi.value(geo.RC, geo.THC)
    mfac = vp["mfac"]
    Mcal_p = -geo.volume_integral_src(q_src)
    out = -mfac * (Vq - Vq0)
    out += mfac * vp["Vp"] * (xi_t / geo.RC)
    out += -(mfac * Mcal_p / vp["Mcal"]) * (vp["V"] - vp["V0"])
    return out


def evaluate_F_vp(zeta, kappa, star, ansatz, disc=None, geo=None):
    """Vlasov-Poisson residual field at the collocation targets."""
    if disc is None:
        disc = Discretization(star.R)
    return _evaluate_F_vp(zeta, kappa, star, ansatz, disc, geo=geo)


def frechet_apply_vp(zeta, kappa, xi, star, ansatz, disc=None, geo=None):
    """Directional derivative of the Vlasov-Poisson residual."""
    if disc is None:
        disc = Discretization(star.R)
    return _frechet_vp(zeta, kappa, xi, star, ansatz, disc, geo=geo)


class _ZeroShape:
    """Warm-start stand-in: the Vlasov response is quadratic in kappa, so the
    linear slope is zero."""
    ells = ()


def vp_newton(star, ansatz, kappas, disc=None, tol=1e-8, max_iter=8,
              max_halvings=6, on_solution=None):
    """Newton continuation of the rotating Vlasov-Poisson problem."""
    if disc is None:
        disc = Discretization(star.R)

    def evaluator(field, kappa, d):
        return _evaluate_F_vp(field, kappa, star, ansatz, d)

    def frechet(field, kappa, basis, d, geo):
        return _frechet_vp(field, kappa, basis, star, ansatz, d, geo=geo)

    return rotating.newton_continue(star, None, kappas, disc=disc, tol=tol,
                                    max_iter=max_iter,
                                    max_halvings=max_halvings,
                                    evaluator=evaluator, frechet=frechet,
                                    shape=_ZeroShape(), on_solution=on_solution)
