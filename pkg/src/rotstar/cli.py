"""Command-line front end.

Subcommands map one-to-one onto the library computations; configuration is a
flat key = value text file so that regression baselines are reproducible.
All output files are written atomically (temp + rename) and deterministically,
so reruns with an identical config are bit-identical.

Exit codes: 0 success, 2 config error, 3 solver error, 4 degenerate operator.
"""

import argparse
import csv
import json
import os
import sys

import numpy as np

from . import linop, radial, rotating, vlasov
from .axisym import Discretization
from .eos import (check_mass_condition_b, constant_rotation, power_law,
                  power_sum, validate_assumptions)
from .errors import ConfigError, DegenerateOperatorError, RotstarError


def _atomic_write(path, writer):
    tmp = path + ".tmp"
    with open(tmp, "w", newline="") as f:
        writer(f)
    os.replace(tmp, path)


def write_csv(path, header, rows):
    def w(f):
        cw = csv.writer(f)
        cw.writerow(header)
        for row in rows:
            cw.writerow([x if isinstance(x, (str, int)) else repr(float(x))
                         for x in row])
    _atomic_write(path, w)


def write_json(path, obj):
    _atomic_write(path, lambda f: json.dump(obj, f, indent=1, sort_keys=True))


# ---------------------------------------------------------------------------
# configuration


def parse_config(path):
    """Flat key = value file; '#' starts a comment."""
    data = {}
    try:
        with open(path) as f:
            for lineno, line in enumerate(f, 1):
                line = line.split("#", 1)[0].strip()
                if not line:
                    continue
                if "=" not in line:
                    raise ConfigError(f"{path}:{lineno}: expected key = value")
                key, val = line.split("=", 1)
                data[key.strip()] = val.strip()
    except OSError as e:
        raise ConfigError(f"cannot read config {path}: {e}") from e
    return data


class RunConfig:
    """Validated run parameters shared by the subcommands."""

    def __init__(self, data, out_dir=None, threads=None):
        self.raw = dict(data)
        self.model = self._str("model", "ep")
        if self.model not in ("ep", "vp"):
            raise ConfigError(f"model must be ep or vp, got {self.model!r}")
        self.a = self._float("a", 1.0)
        self.omega = self._float("omega", 1.0)
        self.tol = self._float("tol", 1e-8)
        self.ode_tol = self._float("ode_tol", 1e-12)
        if self.tol <= 0 or self.ode_tol <= 0:
            raise ConfigError("tolerances must be positive")
        self.n = self._int("n", 256)
        self.kappas = self._floats("kappas", [0.0, 1e-3])
        if self.kappas[0] != 0.0:
            raise ConfigError("kappa schedule must start at 0")
        if any(k2 < k1 for k1, k2 in zip(self.kappas, self.kappas[1:])):
            raise ConfigError("kappa schedule must be nondecreasing")
        self.ells = [int(x) for x in self._floats("ells", [0, 1, 2, 3, 4])]
        self.ns = [int(x) for x in self._floats("ns", [128, 256, 512])]
        self.a_min = self._float("a_min", 0.5)
        self.a_max = self._float("a_max", 2.0)
        self.n_samples = self._int("n_samples", 9)
        self.mu = self._float("mu", 0.25)
        self.psi2 = self._float("psi2", 0.0)
        psi0 = self.raw.get("psi0")
        self.psi0 = float(psi0) if psi0 is not None else None
        self.gamma = self._float("gamma", 1.5)
        self.eos_kind = self._str("eos", "power_law")
        self.terms = self._pairs("terms", [(1.0, 1.5), (1.0, 1.8)])
        self.out_dir = out_dir or self._str("out", ".")
        env = os.environ.get("ROTSTAR_THREADS")
        self.threads = threads or self._int("threads",
                                            int(env) if env else 1)

    def _str(self, key, default):
        return self.raw.get(key, default)

    def _float(self, key, default):
        try:
            return float(self.raw.get(key, default))
        except ValueError as e:
            raise ConfigError(f"bad float for {key}: {self.raw[key]!r}") from e

    def _int(self, key, default):
        try:
            return int(self.raw.get(key, default))
        except ValueError as e:
            raise ConfigError(f"bad int for {key}: {self.raw[key]!r}") from e

    def _floats(self, key, default):
        if key not in self.raw:
            return list(default)
        try:
            return [float(x) for x in self.raw[key].split(",") if x.strip()]
        except ValueError as e:
            raise ConfigError(f"bad list for {key}: {self.raw[key]!r}") from e

    def _pairs(self, key, default):
        if key not in self.raw:
            return list(default)
        try:
            out = []
            for item in self.raw[key].split(","):
                c, g = item.split(":")
                out.append((float(c), float(g)))
            return out
        except ValueError as e:
            raise ConfigError(f"bad term list for {key}: {self.raw[key]!r}") from e

    def make_eos(self):
        if self.eos_kind == "power_law":
            return power_law(self.gamma)
        if self.eos_kind == "power_sum":
            return power_sum(self.terms)
        raise ConfigError(f"unknown eos {self.eos_kind!r}")

    def make_ansatz(self):
        if self.psi0 is None:
            return vlasov.VlasovAnsatz.matched_to_power_law(self.mu,
                                                            psi2=self.psi2)
        return vlasov.VlasovAnsatz(self.mu, psi0=self.psi0, psi2=self.psi2)

    def path(self, name):
        os.makedirs(self.out_dir, exist_ok=True)
        return os.path.join(self.out_dir, name)


# ---------------------------------------------------------------------------
# subcommands


def cmd_radial(cfg):
    if cfg.model == "vp":
        return cmd_vp_radial(cfg)
    eos = cfg.make_eos()
    star = radial.solve_radial(eos, cfg.a, tol=cfg.ode_tol)
    mp, _ = radial.mass_derivative(eos, star, tol=cfg.ode_tol)
    write_json(cfg.path("star.json"), star.to_json_dict())
    flag = ""
    if abs(mp) < 1e-6 * star.mass / star.a:
        gtxt = f" (gamma={eos.gamma:g})" if eos.gamma else ""
        flag = f"  mass condition FAILED{gtxt}"
    print(f"radial ep: a={cfg.a:g} R={star.R:.9f} M={star.mass:.9f} "
          f"Mprime={mp:.9f}{flag}")
    return 0


def cmd_vp_radial(cfg):
    ans = cfg.make_ansatz()
    star = vlasov.solve_vp_radial(ans, cfg.a, tol=cfg.ode_tol)
    write_json(cfg.path("star.json"), star.to_json_dict())
    # flux identity: R^2 u0'(R) = -M by the divergence theorem
    flux = abs(star.R ** 2 * float(star.u0p_of(star.R)[0]) + star.mass) \
        / star.mass
    print(f"radial vp: mu={ans.mu:g} a={cfg.a:g} R={star.R:.9f} "
          f"M={star.mass:.9f} flux-identity residual={flux:.3e}")
    return 0


def cmd_mass_curve(cfg):
    eos = cfg.make_eos()
    curve = radial.mass_curve(eos, (cfg.a_min, cfg.a_max), cfg.n_samples,
                              tol=cfg.ode_tol, threads=cfg.threads)
    write_csv(cfg.path("mass_curve.csv"),
              ["a_enthalpy", "R_length", "M_mass", "Mprime_mass_per_enthalpy"],
              curve.samples)
    a, _, M, mp = curve.arrays()
    print(f"mass-curve: {len(curve)} samples, min |M'| a/M = "
          f"{np.min(np.abs(mp) * a / M):.6e}")
    return 0


def cmd_kernel_margin(cfg):
    if cfg.model == "vp":
        star = vlasov.solve_vp_radial(cfg.make_ansatz(), cfg.a,
                                      tol=cfg.ode_tol)
        rank_one = "vp"
    else:
        star = radial.solve_radial(cfg.make_eos(), cfg.a, tol=cfg.ode_tol)
        rank_one = "ep"
    rows = linop.kernel_margin_ladder(star, ells=cfg.ells, ns=cfg.ns,
                                      rank_one=rank_one)
    write_csv(cfg.path("kernel_margin.csv"),
              ["l_mode", "n_nodes", "sigma_min_dimensionless"], rows)
    print(f"kernel-margin: {len(rows)} rows written")
    return 0


def _write_shape_files(cfg, star, report, kappa):
    thetas = np.linspace(0.0, np.pi / 2, 91)
    disp = report.boundary_shift(thetas) * (kappa if kappa > 0 else 1.0)
    write_csv(cfg.path("shape.csv"),
              ["theta_rad", "boundary_displacement_length"],
              list(zip(thetas, disp)))
    write_csv(cfg.path("modes.csv"), ["l_mode", "xi_R_length_sq"],
              [(l, report.xi_R[l]) for l in report.ells])


def cmd_perturb(cfg):
    if cfg.model == "vp":
        return cmd_vp_perturb(cfg)
    star = radial.solve_radial(cfg.make_eos(), cfg.a, tol=cfg.ode_tol)
    prof = constant_rotation(cfg.omega)
    report = rotating.first_order_shape(star, prof, n=cfg.n)
    kappa = cfg.kappas[-1]
    _write_shape_files(cfg, star, report, kappa)
    print(f"perturb: xi_2(R)={report.xi_R[2]:.6e} "
          f"oblateness slope={report.oblateness_slope():.6e}")
    return 0


def cmd_vp_perturb(cfg):
    ans = cfg.make_ansatz()
    star = vlasov.solve_vp_radial(ans, cfg.a, tol=cfg.ode_tol)
    kappa = cfg.kappas[-1] if cfg.kappas[-1] > 0 else 1e-2
    ops, xi = vlasov.vp_rotation_response(star, ans, kappa, n=cfg.n)
    thetas = np.linspace(0.0, np.pi / 2, 91)
    xi_R = {l: float(ops[l].panels.interp(xi[l], np.array([star.R]))[0])
            for l in ops}
    from .numerics import Ytilde
    disp = sum(xi_R[l] * Ytilde(l, np.cos(thetas)) for l in ops) / star.R
    write_csv(cfg.path("shape.csv"),
              ["theta_rad", "boundary_displacement_length"],
              list(zip(thetas, disp)))
    write_csv(cfg.path("modes.csv"), ["l_mode", "xi_R_length_sq"],
              sorted(xi_R.items()))
    print(f"vp-perturb: kappa={kappa:g} xi_2(R)={xi_R[2]:.6e}")
    return 0


def _run_continuation(cfg, runner):
    """Shared continue driver: per-kappa CSV rows flushed as they arrive, so
    a partial curve survives solver failure."""
    rows = []
    header = ["kappa_intensity", "R_eq_length", "R_pole_length", "M_mass",
              "residual_sup", "newton_iters"]
    path = cfg.path("continue.csv")
    write_csv(path, header, rows)

    def record(sol):
        rows.append(sol.to_row())
        write_csv(path, header, rows)
        sol.dump(cfg.path(f"solution_k{sol.kappa:.6e}.json"),
                 cfg.path(f"solution_k{sol.kappa:.6e}.csv"))

    runner(record)
    print(f"continue: {len(rows)} kappa values written to {path}")
    return 0


def cmd_continue(cfg):
    if cfg.model == "vp":
        return cmd_vp_continue(cfg)
    star = radial.solve_radial(cfg.make_eos(), cfg.a, tol=cfg.ode_tol)
    prof = constant_rotation(cfg.omega)
    disc = Discretization(star.R)

    def runner(record):
        rotating.newton_continue(star, prof, list(cfg.kappas), disc=disc,
                                 tol=cfg.tol, on_solution=record)
    return _run_continuation(cfg, runner)


def cmd_vp_continue(cfg):
    ans = cfg.make_ansatz()
    star = vlasov.solve_vp_radial(ans, cfg.a, tol=cfg.ode_tol)
    disc = Discretization(star.R)

    def runner(record):
        vlasov.vp_newton(star, ans, list(cfg.kappas), disc=disc,
                         tol=cfg.tol, on_solution=record)
    return _run_continuation(cfg, runner)


def cmd_eos_check(cfg):
    eos = cfg.make_eos()
    assum = validate_assumptions(eos)
    cond = check_mass_condition_b(eos)
    out = {"assumptions": assum.as_dict(), "mass_condition_b": cond.as_dict()}
    write_json(cfg.path("eos_check.json"), out)
    print(f"eos-check: assumptions {'pass' if assum.passed else 'FAIL'}, "
          f"condition (b) {'pass' if cond.passed else 'FAIL'}")
    return 0


COMMANDS = {
    "radial": cmd_radial,
    "mass-curve": cmd_mass_curve,
    "kernel-margin": cmd_kernel_margin,
    "perturb": cmd_perturb,
    "continue": cmd_continue,
    "eos-check": cmd_eos_check,
    "vp-radial": cmd_vp_radial,
    "vp-perturb": cmd_vp_perturb,
    "vp-continue": cmd_vp_continue,
}


def main(argv=None):
    ap = argparse.ArgumentParser(prog="rotstar",
                                 description="rotating self-gravitating "
                                             "steady states")
    ap.add_argument("command", choices=sorted(COMMANDS))
    ap.add_argument("--config", required=True, help="flat key=value file")
    ap.add_argument("--out", default=None, help="output directory")
    ap.add_argument("--threads", type=int, default=None)
    args = ap.parse_args(argv)
    try:
        cfg = RunConfig(parse_config(args.config), out_dir=args.out,
                        threads=args.threads)
        return COMMANDS[args.command](cfg)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return 2
    except DegenerateOperatorError as e:
        print(f"degenerate operator: {e}", file=sys.stderr)
        return 4
    except RotstarError as e:
        print(f"solver error: {e}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
