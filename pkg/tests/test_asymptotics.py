import numpy as np
import pytest

import oracle
from stratawave.model import FluidParams, WaveProfile
from stratawave import asymptotics, dispersion


# Frozen expansion data for rho=1, rho_bar=0.9, g=9.8, sigma=0,
# omega=1, omega_bar=0.5, k=1 (the finite-difference Hessian of the
# interface operator pins the density-weighted bracket).
FROZEN = {
    ("rho_bar_weighted", 1): dict(Lambda=-1.1207441833126341,
                                  A_k=1.5707644682322983,
                                  alpha_k=-0.45611250365943495,
                                  trans=-4.3976759713474305),
    ("rho_bar_weighted", 2): dict(Lambda=0.7399471053347516,
                                  A_k=2.846146918556783,
                                  alpha_k=-1.8959630094163384,
                                  trans=4.3976759713474305),
    ("as_printed", 1): dict(Lambda=-1.1207441833126341,
                            A_k=1.8564049647025538,
                            alpha_k=-0.5390556849106578,
                            trans=-4.3976759713474305),
    ("as_printed", 2): dict(Lambda=0.7399471053347516,
                            A_k=3.273496576174203,
                            alpha_k=-2.1806423201176357,
                            trans=4.3976759713474305),
}


def test_default_variant_is_density_weighted():
    assert asymptotics.DEFAULT_VARIANT == "rho_bar_weighted"
    assert set(asymptotics.A_K_VARIANTS) == {"as_printed", "rho_bar_weighted"}


def test_second_order_coefficients_frozen(p_default):
    for (variant, i), want in FROZEN.items():
        c = asymptotics.second_order_coefficients(1, i, p_default, variant=variant)
        assert c.Lambda == pytest.approx(want["Lambda"], rel=1e-13)
        assert c.A_k == pytest.approx(want["A_k"], rel=1e-13)
        assert c.alpha_k == pytest.approx(want["alpha_k"], rel=1e-13)
        assert c.transversality == pytest.approx(want["trans"], rel=1e-13)
        assert c.variant == variant
        assert set(c.to_dict()) == {"k", "i", "Lambda", "A_k", "alpha_k",
                                    "transversality", "variant"}


def test_second_order_validation(p_default):
    with pytest.raises(ValueError, match="variant"):
        asymptotics.second_order_coefficients(1, 1, p_default, variant="other")
    with pytest.raises(ValueError, match="branch index"):
        asymptotics.second_order_coefficients(1, 3, p_default)


def test_alpha_closes_the_quadratic_equation(param_grid):
    # alpha_k is defined by 2 mu_{2k}(Lambda) alpha_k + A_k = 0; the
    # identity must hold to round-off, not merely to solver tolerance.
    checked = 0
    for p in param_grid:
        for k in (1, 2):
            for i in (1, 2):
                try:
                    c = asymptotics.second_order_coefficients(k, i, p)
                except asymptotics.DegenerateBranchError:
                    continue
                resid = 2.0 * dispersion.mu(2 * k, c.Lambda, p) * c.alpha_k + c.A_k
                assert abs(resid) <= 1e-12 * abs(c.A_k)
                checked += 1
    assert checked >= 10


def test_transversality_sign_and_magnitude(param_grid):
    for p in param_grid:
        c1 = asymptotics.second_order_coefficients(1, 1, p)
        c2 = asymptotics.second_order_coefficients(1, 2, p)
        assert c1.transversality < 0.0 < c2.transversality
        assert c1.transversality == pytest.approx(-c2.transversality, rel=1e-13)


def test_degenerate_branch_raises():
    # 1:2 resonant surface tension for omega_bar=0 (bisected against the
    # root oracle): mu_2(Lambda_1^1) vanishes and alpha_1 is undefined.
    sigma_star = 0.23488891408622858
    p = FluidParams(rho=1.0, rho_bar=0.9, g=9.8, sigma=sigma_star, omega_bar=0.0)
    with pytest.raises(asymptotics.DegenerateBranchError):
        asymptotics.second_order_coefficients(1, 1, p)


def test_branch_expansion_contract(p_default):
    zero = asymptotics.branch_expansion(1, 1, p_default, 0.0)
    assert set(zero) == {"lambda", "profile"}
    assert zero["lambda"] == pytest.approx(FROZEN[("rho_bar_weighted", 1)]["Lambda"])
    assert zero["profile"].coeffs == ()

    s = 0.03
    out = asymptotics.branch_expansion(1, 1, p_default, s)
    alpha = FROZEN[("rho_bar_weighted", 1)]["alpha_k"]
    assert out["profile"].coeffs == pytest.approx((-s, alpha * s**2))
    with pytest.raises(ValueError):
        asymptotics.branch_expansion(1, 3, p_default, 0.0)


def test_beta_profile_shape():
    with pytest.raises(ValueError):
        asymptotics.beta_profile(0)
    for k in (1, 2, 4):
        beta = asymptotics.beta_profile(k)
        lo, hi = beta.endpoint_values()
        assert lo == pytest.approx(0.0, abs=1e-15)
        assert hi == pytest.approx(0.0, abs=1e-15)
        # beta'' - 4 k^2 beta = 1 - 2 k^2 (1+y)^2, stencil in extended
        # precision as for the vertical profile test
        y = np.linspace(-1.0, 0.0, 2048, dtype=np.longdouble)
        kf = np.longdouble(k)
        b = -0.5 * (np.sinh(2 * kf * (1 + y)) / np.sinh(2 * kf) - (1 + y) ** 2)
        h = y[1] - y[0]
        bpp = (-b[:-4] + 16 * b[1:-3] - 30 * b[2:-2] + 16 * b[3:-1] - b[4:]) / (12 * h * h)
        yi, bi = y[2:-2], b[2:-2]
        resid = bpp - (4 * kf**2 * bi + 1 - 2 * kf**2 * (1 + yi) ** 2)
        assert float(np.max(np.abs(resid))) < 1e-8
        np.testing.assert_allclose(beta(np.asarray(y[::128], dtype=float)),
                                   np.asarray(b[::128], dtype=float), atol=1e-14)


def test_x_derivative_profile_endpoints():
    for k in (1, 3):
        f = asymptotics.x_derivative_profile(k)
        bed, iface = f.endpoint_values()
        assert bed == pytest.approx(0.0, abs=1e-15)
        assert iface == pytest.approx(k / 2.0)


def test_upper_vertical_derivatives_match_green_quadrature():
    for k, lam, ob in [(1, -1.1207441833126341, 0.5), (2, 0.7, 0.3),
                       (3, -0.4, 0.0)]:
        closed = asymptotics.upper_vertical_derivatives(k, lam, ob)
        assert closed["c_prime0"] == pytest.approx(
            oracle.green_c_prime0(k, lam, ob), abs=1e-12)
        assert closed["d_prime0"] == pytest.approx(
            oracle.green_d_prime0(k, lam, ob), abs=1e-12)


def test_upper_second_order_profiles(p_default):
    lam = FROZEN[("rho_bar_weighted", 1)]["Lambda"]
    u = asymptotics.upper_second_order_profiles(1, lam, 0.5)
    assert u.c_prime0 == pytest.approx(0.8707441833126341, abs=1e-8)
    assert u.d_prime0 == pytest.approx(-0.4419980591289181, abs=1e-8)
    assert u.endpoint_mismatch < 1e-7
    assert u.c.endpoint_values() == (0.0, 0.0)
    assert u.d.endpoint_values() == (0.0, 0.0)
    assert u.c_prime0_closed == pytest.approx(u.c_prime0, rel=1e-5)
    with pytest.raises(ValueError):
        asymptotics.upper_second_order_profiles(1, lam, 0.5, n=32)


def test_lower_field_expansion_boundaries(p_default):
    grid = asymptotics.lower_field_expansion(1, 1, p_default, 0.02, nx=32, ny=17)
    assert grid.layer == "lower"
    # cos evaluation is not bit-symmetric across the grid, only near it
    assert grid.evenness_defect() < 1e-15
    assert grid.boundary_defect(p_default) == 0.0
    assert grid.profile is not None


def test_upper_field_expansion_boundaries_and_lam_shift(p_default):
    s = 0.02
    base = asymptotics.upper_field_expansion(1, 1, p_default, s, nx=32, ny=17)
    lam0 = FROZEN[("rho_bar_weighted", 1)]["Lambda"]
    assert base.boundary_defect(p_default, lam=lam0) == 0.0
    assert base.evenness_defect() < 1e-15

    shifted = asymptotics.upper_field_expansion(1, 1, p_default, s, nx=32, ny=17,
                                                lam=lam0 + 0.01)
    diff = shifted.values - base.values
    y = base.y_nodes()
    # the shift enters the boundary rows exactly and the first-order
    # vertical profile linearly, so the interior departs from the laminar
    # 0.01 y by O(s * 0.01) only
    np.testing.assert_allclose(diff[:, 0], 0.0, atol=1e-15)
    np.testing.assert_allclose(diff[:, -1], 0.01, atol=1e-15)
    assert float(np.max(np.abs(diff - 0.01 * y))) < 0.01 * s

    flat0 = asymptotics.upper_field_expansion(1, 1, p_default, 0.0, nx=32, ny=17,
                                              lam=lam0)
    flat1 = asymptotics.upper_field_expansion(1, 1, p_default, 0.0, nx=32, ny=17,
                                              lam=lam0 + 0.01)
    np.testing.assert_allclose(flat1.values - flat0.values,
                               np.tile(0.01 * y, (32, 1)), atol=1e-13)


def test_lower_x_derivative_expansion(p_default):
    s = 0.05
    grid = asymptotics.lower_field_x_derivative_expansion(1, 1, p_default, s,
                                                          nx=16, ny=9)
    assert grid.pushforward
    x, y = grid.x_nodes(), grid.y_nodes()
    f = asymptotics.x_derivative_profile(1)(y)
    expected = p_default.omega * s**2 * np.sin(2 * x)[:, None] * f[None, :]
    np.testing.assert_allclose(grid.values, expected, atol=1e-15)
