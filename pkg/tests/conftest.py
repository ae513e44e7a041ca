import numpy as np
import pytest

from rotstar.eos import power_law, power_sum, constant_rotation
from rotstar.radial import solve_radial
from rotstar.vlasov import VlasovAnsatz, solve_vp_radial


@pytest.fixture(scope="session")
def star15():
    return solve_radial(power_law(1.5), 1.0)


@pytest.fixture(scope="session")
def star2():
    with pytest.warns(UserWarning):
        eos = power_law(2.0)
    return solve_radial(eos, 1.0)


@pytest.fixture(scope="session")
def star43():
    return solve_radial(power_law(4.0 / 3.0), 1.0)


@pytest.fixture(scope="session")
def star_sum():
    return solve_radial(power_sum([(1.0, 1.5), (1.0, 1.8)]), 1.0)


@pytest.fixture(scope="session")
def rot_profile():
    return constant_rotation()


@pytest.fixture(scope="session")
def vp_ansatz():
    return VlasovAnsatz.matched_to_power_law(0.25, psi2=0.1)


@pytest.fixture(scope="session")
def vp_star(vp_ansatz):
    return solve_vp_radial(vp_ansatz, 1.0)


@pytest.fixture(scope="session")
def ep_shape(star15, rot_profile):
    from rotstar.rotating import first_order_shape
    return first_order_shape(star15, rot_profile)


@pytest.fixture(scope="session")
def ep_solutions(star15, rot_profile, ep_shape):
    from rotstar.axisym import Discretization
    from rotstar.rotating import newton_continue
    disc = Discretization(star15.R)
    # kappa = 2e-3 already pushes ||zeta||_X past the injectivity cap 0.1
    # for gamma = 1.5, so the schedule stops at 1e-3
    return newton_continue(star15, rot_profile, [5e-4, 1e-3], disc=disc,
                           shape=ep_shape)


@pytest.fixture(scope="session")
def vp_solutions(vp_star, vp_ansatz):
    from rotstar.axisym import Discretization
    from rotstar.vlasov import vp_newton
    disc = Discretization(vp_star.R)
    return vp_newton(vp_star, vp_ansatz, [1e-2, 2e-2], disc=disc)


def rand_deformation(rng, R, cap=0.04):
    """A smooth random axisymmetric even deformation with X-norm below cap."""
    from rotstar.dilation import DeformationField
    c = rng.standard_normal(6) * 0.01

    def f(r, th):
        x = r / R
        m = np.cos(th)
        return (c[0] * x ** 2 + c[1] * x ** 3 + c[2] * x ** 2 * m ** 2
                + c[3] * x ** 4 * m ** 2 + c[4] * x ** 3 * (1 - m ** 2)
                + c[5] * x ** 4 * m ** 4) * R ** 2 * np.ones_like(r * th)

    z = DeformationField.from_callable(f, R)
    xn = z.xnorm()
    if xn > cap:
        z = z.scaled(cap / xn)
    return z
