import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from stratawave.model import (
    BranchPoint,
    FieldGrid,
    FluidParams,
    VerticalProfile,
    WaveProfile,
    cosine_coefficients,
    cosine_series_ops,
    curvature_term,
    project_mean_zero,
    spectral_x_derivative,
)


# -- FluidParams -------------------------------------------------------------


def test_params_reject_unstable_stratification():
    with pytest.raises(ValueError, match="stratification"):
        FluidParams(rho=0.9, rho_bar=1.0)
    with pytest.raises(ValueError, match="stratification"):
        FluidParams(rho=1.0, rho_bar=1.0)


@pytest.mark.parametrize("kwargs", [
    {"rho": -1.0, "rho_bar": 0.5},
    {"rho": 1.0, "rho_bar": 0.5, "g": 0.0},
    {"rho": 1.0, "rho_bar": 0.5, "sigma": -0.1},
    {"rho": 1.0, "rho_bar": 0.5, "wave_speed": 0.0},
])
def test_params_validation(kwargs):
    with pytest.raises(ValueError):
        FluidParams(**kwargs)


def test_params_json_roundtrip(p_default):
    text = p_default.to_json()
    back = FluidParams.from_json(text)
    assert back == p_default
    assert json.loads(text)["omega_bar"] == 0.5


# -- WaveProfile -------------------------------------------------------------


def test_profile_rejects_bad_wavenumber():
    with pytest.raises(ValueError, match="wavenumber"):
        WaveProfile(0, (0.1,))
    with pytest.raises(ValueError, match="wavenumber"):
        WaveProfile(1.5, (0.1,))


def test_profile_strip_invariant():
    with pytest.raises(ValueError, match="strip"):
        WaveProfile(1, (1.0,))
    with pytest.raises(ValueError, match="strip"):
        WaveProfile(2, (0.6, 0.45))  # sup at x=0 is 1.05
    WaveProfile(1, (0.999,))  # just inside


def test_profile_evaluate_matches_series():
    prof = WaveProfile(2, (0.1, -0.05, 0.02))
    x = np.linspace(0.0, 4.0, 17)
    expected = 0.1 * np.cos(2 * x) - 0.05 * np.cos(4 * x) + 0.02 * np.cos(6 * x)
    np.testing.assert_allclose(prof.evaluate(x), expected, atol=1e-15)


@given(st.lists(st.floats(-0.05, 0.05), min_size=1, max_size=6),
       st.integers(1, 4), st.floats(0.0, 7.0))
def test_profile_derivatives_consistent(coeffs, k, x):
    prof = WaveProfile(k, tuple(coeffs))
    h = 1e-6
    fd1 = (prof.evaluate(x + h) - prof.evaluate(x - h)) / (2 * h)
    fd2 = (prof.evaluate(x + h) - 2 * prof.evaluate(x) + prof.evaluate(x - h)) / h**2
    assert abs(prof.derivative(x) - fd1) < 1e-6
    assert abs(prof.second_derivative(x) - fd2) < 2e-3


def test_profile_padding_and_algebra():
    prof = WaveProfile(1, (0.1, 0.02))
    assert prof.padded(4) == (0.1, 0.02, 0.0, 0.0)
    assert prof.padded(1) == (0.1,)
    combined = prof.add_scaled(WaveProfile(1, (0.0, 0.01, 0.005)), 2.0)
    assert combined.coeffs == (0.1, 0.04, 0.01)
    with pytest.raises(ValueError, match="wavenumber"):
        prof.add_scaled(WaveProfile(2, (0.01,)), 1.0)
    assert WaveProfile.zero(3).sup_norm() == 0.0
    assert WaveProfile.from_dict(prof.to_dict()) == prof


def test_profile_period_and_nodes():
    prof = WaveProfile(4, (0.01,))
    assert prof.period == pytest.approx(np.pi / 2)
    nodes = prof.nodes(8)
    assert nodes.shape == (8,)
    assert nodes[0] == 0.0
    assert nodes[-1] == pytest.approx(prof.period * 7 / 8)


# -- series utilities --------------------------------------------------------


def test_cosine_coefficients_recover_planted_series():
    k = 3
    prof = WaveProfile(k, (0.2, -0.07, 0.013, 0.004))
    x = prof.nodes(64)
    mean, coeffs = cosine_coefficients(prof.evaluate(x) + 0.5, 6)
    assert mean == pytest.approx(0.5, abs=1e-14)
    np.testing.assert_allclose(coeffs[:4], prof.coeffs, atol=1e-14)
    np.testing.assert_allclose(coeffs[4:], 0.0, atol=1e-14)


def test_cosine_coefficients_validation():
    with pytest.raises(ValueError):
        cosine_coefficients([1.0, 2.0])


@given(st.lists(st.floats(-1.0, 1.0), min_size=1, max_size=5), st.integers(1, 3))
def test_cosine_roundtrip(coeffs, k):
    coeffs = [c / (10 * (j + 1) ** 2 + 10) for j, c in enumerate(coeffs)]
    prof = WaveProfile(k, tuple(coeffs))
    _, back = cosine_coefficients(prof.evaluate(prof.nodes(32)), len(coeffs))
    np.testing.assert_allclose(back, coeffs, atol=1e-14)


def test_spectral_derivative_exact_on_harmonics():
    k = 2
    n = 32
    x = np.arange(n) * (2 * np.pi / k / n)
    for j in (1, 3, 7):
        d = spectral_x_derivative(np.cos(j * k * x), k)
        np.testing.assert_allclose(d, -j * k * np.sin(j * k * x), atol=1e-12)


def test_spectral_derivative_zero_mean_and_nyquist():
    k, n = 1, 16
    x = np.arange(n) * (2 * np.pi / n)
    nyq = np.cos((n // 2) * x)
    assert np.max(np.abs(spectral_x_derivative(nyq, k))) == 0.0
    rng = np.random.default_rng(0)
    vals = rng.standard_normal(n)
    assert abs(spectral_x_derivative(vals, k).mean()) < 1e-15


def test_spectral_derivative_axis():
    k, n = 1, 16
    x = np.arange(n) * (2 * np.pi / n)
    two_d = np.cos(x)[:, None] * np.array([1.0, 2.0])[None, :]
    d = spectral_x_derivative(two_d, k, axis=0)
    np.testing.assert_allclose(d[:, 1], -2.0 * np.sin(x), atol=1e-12)


def test_project_mean_zero():
    out = project_mean_zero([1.0, 2.0, 3.0])
    assert out.mean() == pytest.approx(0.0, abs=1e-16)
    with pytest.raises(ValueError):
        project_mean_zero([])


def test_curvature_term_matches_divergence_form():
    # 2 sigma (eta' / sqrt(1+eta'^2))' equals the closed pointwise form
    prof = WaveProfile(1, (0.3, 0.05))
    sigma = 0.7
    x = np.linspace(0.1, 6.0, 11)
    h = 1e-6

    def flux(xv):
        slope = prof.derivative(xv)
        return 2.0 * sigma * slope / np.sqrt(1.0 + slope**2)

    fd = (flux(x + h) - flux(x - h)) / (2 * h)
    np.testing.assert_allclose(curvature_term(prof, x, sigma), fd, atol=1e-7)


def test_cosine_series_ops_contents():
    prof = WaveProfile(2, (0.1, -0.02))
    ops = cosine_series_ops(prof, nx=64, sigma=0.5)
    np.testing.assert_allclose(ops["derivative"], [-0.1 * 2, 0.02 * 4])
    np.testing.assert_allclose(ops["second_derivative"], [-0.1 * 4, 0.02 * 16])
    assert ops["curvature_term"].shape == (64,)


# -- VerticalProfile ---------------------------------------------------------


def test_vertical_profile_from_samples_and_callable():
    y = np.linspace(0.0, 1.0, 9)
    spline = VerticalProfile.from_samples(y, y**2, label="sq")
    assert spline(0.5) == pytest.approx(0.25, abs=1e-12)
    assert spline.endpoint_values() == (pytest.approx(0.0), pytest.approx(1.0))
    ys, vals = spline.sample(5)
    assert ys.shape == vals.shape == (5,)

    direct = VerticalProfile.from_callable((-1.0, 0.0), lambda t: np.sin(t))
    assert direct(-0.3) == pytest.approx(np.sin(-0.3))
    with pytest.raises(ValueError):
        VerticalProfile.from_samples(y[:3], y[:3] ** 2)
    with pytest.raises(ValueError):
        VerticalProfile((1.0, 0.0), np.sin)


# -- FieldGrid ---------------------------------------------------------------


def _laminar_lower(nx=8, ny=7, omega=1.0):
    y = np.linspace(-1.0, 0.0, ny)
    vals = np.tile(omega * y**2 / 2.0, (nx, 1))
    return FieldGrid("lower", 1, vals)


def test_field_grid_validation():
    with pytest.raises(ValueError, match="layer"):
        FieldGrid("middle", 1, np.zeros((8, 8)))
    with pytest.raises(ValueError, match="2-d"):
        FieldGrid("lower", 1, np.zeros(8))
    with pytest.raises(ValueError, match="even"):
        FieldGrid("lower", 1, np.zeros((7, 8)))
    with pytest.raises(ValueError, match="profile"):
        FieldGrid("lower", 1, np.zeros((8, 8)), pushforward=True)


def test_field_grid_nodes_and_defects(p_default):
    grid = _laminar_lower()
    assert grid.nx == 8 and grid.ny == 7
    assert grid.period == pytest.approx(2 * np.pi)
    assert grid.x_nodes()[1] == pytest.approx(2 * np.pi / 8)
    assert grid.y_nodes()[0] == -1.0 and grid.y_nodes()[-1] == 0.0
    assert grid.evenness_defect() == 0.0
    assert grid.boundary_defect(p_default) == pytest.approx(0.0, abs=1e-15)

    odd = FieldGrid("lower", 1, np.sin(grid.x_nodes())[:, None] * np.ones((1, 7)))
    assert odd.evenness_defect() > 1.0


def test_field_grid_physical_y():
    prof = WaveProfile(1, (0.1,))
    nx, ny = 8, 5
    vals = np.zeros((nx, ny))
    lower = FieldGrid("lower", 1, vals, profile=prof)
    upper = FieldGrid("upper", 1, vals, profile=prof)
    eta0 = prof.evaluate(0.0)
    # interface row follows eta, far wall stays put
    assert lower.physical_y()[0, -1] == pytest.approx(eta0)
    assert lower.physical_y()[0, 0] == pytest.approx(-1.0)
    assert upper.physical_y()[0, 0] == pytest.approx(eta0)
    assert upper.physical_y()[0, -1] == pytest.approx(1.0)
    with pytest.raises(ValueError, match="profile"):
        FieldGrid("lower", 1, vals).physical_y()


def test_upper_boundary_defect_needs_lambda(p_default):
    y = np.linspace(0.0, 1.0, 7)
    lam = -1.1
    vals = np.tile(p_default.omega_bar * y**2 / 2.0 + lam * y, (8, 1))
    grid = FieldGrid("upper", 1, vals)
    assert grid.boundary_defect(p_default, lam=lam) == pytest.approx(0.0, abs=1e-15)
    with pytest.raises(ValueError, match="lambda"):
        grid.boundary_defect(p_default)


# -- BranchPoint -------------------------------------------------------------


def test_branch_point_roundtrip():
    pt = BranchPoint(s=0.02, lam=-1.12, profile=WaveProfile(1, (-0.02,)),
                     residual=1e-12, branch_id=(1, 1))
    d = pt.to_dict()
    assert d["lambda"] == -1.12
    assert d["branch_id"] == [1, 1]
    assert BranchPoint.from_dict(d) == pt
