"""Transformed elliptic operators on the reference rectangles, Dirichlet
solvers for both layers, interface trace operators, and the nonlocal
interface operator Psi with finite-difference derivatives.

Straightening either layer onto its reference rectangle turns the
Laplacian into a variable-coefficient operator

    A(eta) = dxx + cxy(x,y) dxy + cyy(x,y) dyy + cy(x,y) dy,

whose coefficients depend on the interface elevation and its first two
derivatives.  The discretization is Fourier collocation in x and
finite differences in y (4th order by default, 2nd available); the
resulting non-mode-diagonal system is solved by GMRES preconditioned
with the exact flat-interface inverse, which is diagonal in Fourier
modes and factorized once per grid shape.

A wave solution is a pair (lambda, eta) with Psi(lambda, eta) = 0,
where Psi collects the difference of the squared interface speeds of
the two layers, the gravitational restoring term, the curvature
forcing, and the mean normalization:

    Psi = rho_bar*Bbar - rho*B + 2 g (rho_bar - rho) eta
          + 2 sigma eta'' / (1 + eta'^2)^(3/2) - Q,

with Q the average of the non-curvature part (the curvature term has
zero mean on its own).
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.sparse.linalg import LinearOperator, gmres

from . import fd
from .model import (
    FieldGrid,
    FluidParams,
    WaveProfile,
    cosine_coefficients,
    spectral_x_derivative,
)

DEFAULT_TOL = 1e-11
DEFAULT_ORDER = 4


class NumericalFailure(RuntimeError):
    """Linear solver breakdown, with a rough conditioning diagnostic."""


@dataclass(frozen=True)
class TransformedOperator:
    """Variable coefficients of the straightened Laplacian on one layer.

    The xx-coefficient is identically 1 and is not stored.
    """

    layer: str
    profile: WaveProfile
    k: int
    cxy: np.ndarray
    cyy: np.ndarray
    cy: np.ndarray

    @property
    def nx(self) -> int:
        return self.cxy.shape[0]

    @property
    def ny(self) -> int:
        return self.cxy.shape[1]


def _grid_nodes(layer: str, k: int, nx: int, ny: int):
    x = np.arange(nx) * (2.0 * np.pi / k / nx)
    y = np.linspace(-1.0, 0.0, ny) if layer == "lower" else np.linspace(0.0, 1.0, ny)
    return x, y


def build_operator(layer: str, profile: WaveProfile, nx: int, ny: int) -> TransformedOperator:
    """Assemble the coefficient grids of the straightened operator."""
    if layer not in ("lower", "upper"):
        raise ValueError("layer must be 'lower' or 'upper'")
    x, y = _grid_nodes(layer, profile.k, nx, ny)
    eta = profile.evaluate(x)[:, None]
    etap = profile.derivative(x)[:, None]
    etapp = profile.second_derivative(x)[:, None]
    if np.max(np.abs(eta)) >= 1.0:
        raise ValueError("invalid profile: |eta| >= 1 collapses a layer")
    yy = y[None, :]
    if layer == "lower":
        den = 1.0 + eta
        depth = 1.0 + yy
        drift_num = den * etapp - 2.0 * etap**2
    else:
        den = 1.0 - eta
        depth = 1.0 - yy
        drift_num = den * etapp + 2.0 * etap**2
    cxy = -2.0 * depth * etap / den
    cyy = (depth**2 * etap**2 + 1.0) / den**2
    cy = -depth * drift_num / den**2
    return TransformedOperator(layer, profile, profile.k, cxy, cyy, cy)


def apply_operator(op: TransformedOperator, values: np.ndarray,
                   order: int = DEFAULT_ORDER) -> np.ndarray:
    """Apply the transformed operator to full-grid samples (no BC assumptions)."""
    values = np.asarray(values, dtype=float)
    ny = values.shape[1]
    h = 1.0 / (ny - 1)
    d1 = fd.diff_matrix(ny, h, 1, order)
    d2 = fd.diff_matrix(ny, h, 2, order)
    wx = spectral_x_derivative(values, op.k, axis=0)
    wxx = spectral_x_derivative(wx, op.k, axis=0)
    wy = values @ d1.T
    wyy = values @ d2.T
    wxy = wx @ d1.T
    return wxx + op.cxy * wxy + op.cyy * wyy + op.cy * wy


@lru_cache(maxsize=6)
def _flat_inverse(nx: int, ny: int, k: int, order: int) -> np.ndarray:
    """Per-mode inverses of the flat-interface operator (D2 - (m k)^2 I).

    Shared between layers: the interior finite-difference structure is
    identical on both reference rectangles.
    """
    h = 1.0 / (ny - 1)
    d2i = fd.diff_matrix(ny, h, 2, order)[1:-1, 1:-1]
    modes = np.arange(nx // 2 + 1) * k
    eye = np.eye(ny - 2)
    inv = np.empty((modes.size, ny - 2, ny - 2))
    for idx, m in enumerate(modes):
        inv[idx] = np.linalg.inv(d2i - float(m) ** 2 * eye)
    return inv


def _solve_layer(layer: str, profile: WaveProfile, rhs_const: float,
                 lift_slope: float, params: FluidParams, nx: int, ny: int,
                 tol: float, order: int) -> FieldGrid:
    """Solve A(eta) w = rhs_const with Dirichlet rows given by the linear lift."""
    if nx & (nx - 1) or nx < 8:
        raise ValueError("nx must be a power of two, at least 8")
    if ny < 8:
        raise ValueError("ny must be at least 8")
    op = build_operator(layer, profile, nx, ny)
    h = 1.0 / (ny - 1)
    d1 = fd.diff_matrix(ny, h, 1, order)
    d2 = fd.diff_matrix(ny, h, 2, order)
    d1i = d1[1:-1, :]
    d2i = d2[1:-1, :]
    cxy_i = op.cxy[:, 1:-1]
    cyy_i = op.cyy[:, 1:-1]
    cy_i = op.cy[:, 1:-1]
    nyi = ny - 2

    # Lift is linear in y: only the drift term sees it.
    b = rhs_const - cy_i * lift_slope

    def matvec(flat):
        v = flat.reshape(nx, nyi)
        full = np.zeros((nx, ny))
        full[:, 1:-1] = v
        vx = spectral_x_derivative(v, op.k, axis=0)
        vxx = spectral_x_derivative(vx, op.k, axis=0)
        vy = full @ d1i.T
        vyy = full @ d2i.T
        fullx = np.zeros((nx, ny))
        fullx[:, 1:-1] = vx
        vxy = fullx @ d1i.T
        return (vxx + cxy_i * vxy + cyy_i * vyy + cy_i * vy).ravel()

    inv = _flat_inverse(nx, ny, op.k, order)

    def precond(flat):
        r = flat.reshape(nx, nyi)
        spec = np.fft.rfft(r, axis=0)
        sol = np.einsum("mij,mj->mi", inv, spec)
        return np.fft.irfft(sol, n=nx, axis=0).ravel()

    n = nx * nyi
    b_flat = b.ravel()
    scale = max(float(np.max(np.abs(b_flat))), 1e-300)
    operator = LinearOperator((n, n), matvec=matvec)
    preconditioner = LinearOperator((n, n), matvec=precond)
    x0 = precond(b_flat)
    v, info = gmres(operator, b_flat, x0=x0, M=preconditioner,
                    rtol=tol, atol=tol * scale, restart=60, maxiter=20)
    resid = float(np.max(np.abs(matvec(v) - b_flat)))
    # GMRES converges in the 2-norm, whose sup-norm image grows with the
    # grid; the bar here only has to catch stagnation outright.
    if info != 0 or resid > 100.0 * tol * max(1.0, scale) * np.sqrt(n / 1000.0 + 1.0):
        modes = np.arange(nx // 2 + 1) * op.k
        cond_est = (1.0 + modes[-1] ** 2) * (ny - 1) ** 2
        raise NumericalFailure(
            f"GMRES failed on the {layer} layer (info={info}, "
            f"residual={resid:.3e}, flat-operator condition ~{cond_est:.1e})"
        )
    w = np.zeros((nx, ny))
    w[:, 1:-1] = v.reshape(nx, nyi)
    y = _grid_nodes(layer, op.k, nx, ny)[1]
    w += lift_slope * y[None, :]
    return FieldGrid(layer, op.k, w, profile=profile)


def solve_lower(profile: WaveProfile, params: FluidParams, nx: int = 64,
                ny: int = 65, tol: float = DEFAULT_TOL,
                order: int = DEFAULT_ORDER) -> FieldGrid:
    """Lower-layer Dirichlet solve: A(eta) w = omega, w(x,0)=0, w(x,-1)=omega/2."""
    return _solve_layer("lower", profile, params.omega, -params.omega / 2.0,
                        params, nx, ny, tol, order)


def solve_upper(lam: float, profile: WaveProfile, params: FluidParams,
                nx: int = 64, ny: int = 65, tol: float = DEFAULT_TOL,
                order: int = DEFAULT_ORDER) -> FieldGrid:
    """Upper-layer Dirichlet solve: Abar(eta) w = omega_bar, w(x,0)=0,
    w(x,1) = lambda + omega_bar/2."""
    return _solve_layer("upper", profile, params.omega_bar,
                        float(lam) + params.omega_bar / 2.0,
                        params, nx, ny, tol, order)


# -- interface trace operators ----------------------------------------------


def _trace_derivatives(field: FieldGrid, order: int):
    w = field.values
    ny = field.ny
    h = 1.0 / (ny - 1)
    d1 = fd.diff_matrix(ny, h, 1, order)
    row = -1 if field.layer == "lower" else 0
    trace = w[:, row]
    wx = spectral_x_derivative(trace, field.k)
    wy = w @ d1.T[:, row]
    return wx, wy


def boundary_B(profile: WaveProfile, field: FieldGrid,
               order: int = DEFAULT_ORDER) -> np.ndarray:
    """Squared relative interface speed of the lower layer (trace operator)."""
    if field.layer != "lower":
        raise ValueError("boundary_B needs a lower-layer field")
    wx, wy = _trace_derivatives(field, order)
    x = field.x_nodes()
    eta = profile.evaluate(x)
    etap = profile.derivative(x)
    return wx**2 - 2.0 * etap / (1.0 + eta) * wx * wy \
        + (1.0 + etap**2) / (1.0 + eta) ** 2 * wy**2


def boundary_Bbar(profile: WaveProfile, field: FieldGrid,
                  order: int = DEFAULT_ORDER) -> np.ndarray:
    """Squared relative interface speed of the upper layer (trace operator)."""
    if field.layer != "upper":
        raise ValueError("boundary_Bbar needs an upper-layer field")
    wx, wy = _trace_derivatives(field, order)
    x = field.x_nodes()
    eta = profile.evaluate(x)
    etap = profile.derivative(x)
    return wx**2 - 2.0 * etap / (1.0 - eta) * wx * wy \
        + (1.0 + etap**2) / (1.0 - eta) ** 2 * wy**2


# -- the interface operator ---------------------------------------------------


def Psi(lam: float, profile: WaveProfile, params: FluidParams, nx: int = 64,
        ny: int = 65, tol: float = DEFAULT_TOL, order: int = DEFAULT_ORDER,
        with_diagnostics: bool = False):
    """Samples of the interface operator on the profile's x-grid.

    The curvature forcing is evaluated in conservative form as the
    spectral x-derivative of 2*sigma*eta'/(1+eta'^2)^(1/2), whose
    discrete mean is exactly zero; the subtracted normalization Q is
    therefore the plain average of the remaining terms.
    """
    lower = solve_lower(profile, params, nx, ny, tol, order)
    upper = solve_upper(lam, profile, params, nx, ny, tol, order)
    b_low = boundary_B(profile, lower, order)
    b_up = boundary_Bbar(profile, upper, order)
    x = lower.x_nodes()
    eta = profile.evaluate(x)
    core = params.rho_bar * b_up - params.rho * b_low \
        + 2.0 * params.g * (params.rho_bar - params.rho) * eta
    q = float(core.mean())
    out = core - q
    if params.sigma != 0.0:
        slope = profile.derivative(x)
        out = out + spectral_x_derivative(
            2.0 * params.sigma * slope / np.sqrt(1.0 + slope**2), profile.k)
    if with_diagnostics:
        return out, {"Q": q, "lower": lower, "upper": upper}
    return out


def frechet_dPsi(lam: float, profile: WaveProfile, params: FluidParams,
                 direction, nx: int = 64, ny: int = 65,
                 step: float | None = None, tol: float = DEFAULT_TOL,
                 order: int = DEFAULT_ORDER) -> np.ndarray:
    """Central-difference directional derivative of Psi in the profile slot.

    ``direction`` is a tangent cosine series: either a WaveProfile on the
    same wavenumber or a plain coefficient sequence (which may have any
    magnitude; only profile + step * direction must stay in the strip).
    """
    if isinstance(direction, WaveProfile):
        if direction.k != profile.k:
            raise ValueError("direction must share the profile's fundamental wavenumber")
        d_coeffs = np.asarray(direction.coeffs, dtype=float)
    else:
        d_coeffs = np.atleast_1d(np.asarray(direction, dtype=float))
    if step is None:
        step = 1e-5 * max(1.0, profile.sup_norm())
    n = max(profile.n_harmonics, d_coeffs.size)
    base = np.array(profile.padded(n))
    d_pad = np.zeros(n)
    d_pad[: d_coeffs.size] = d_coeffs
    plus = WaveProfile(profile.k, tuple(base + step * d_pad))
    minus = WaveProfile(profile.k, tuple(base - step * d_pad))
    p = Psi(lam, plus, params, nx, ny, tol, order)
    m = Psi(lam, minus, params, nx, ny, tol, order)
    return (p - m) / (2.0 * step)


def directional_hessian(lam: float, params: FluidParams, k: int, nx: int = 128,
                        ny: int = 129, step: float = 5e-3,
                        n_harmonics: int = 8, tol: float = DEFAULT_TOL,
                        order: int = DEFAULT_ORDER,
                        extrapolate: bool = True) -> np.ndarray:
    """Cosine coefficients of the second derivative of Psi at (lam, 0)
    along cos(k x).

    Second central differences at steps h and h/2 are Richardson-combined
    to cancel the O(h^2) term.  Index j-1 of the result multiplies
    cos(j k x); the cos(2 k x) entry estimates the quadratic branch
    coefficient, while the cos(k x) entry must be numerically zero.
    """
    zero = WaveProfile.zero(k)
    base = Psi(lam, zero, params, nx, ny, tol, order)

    def second_diff(h):
        p = Psi(lam, WaveProfile(k, (h,)), params, nx, ny, tol, order)
        m = Psi(lam, WaveProfile(k, (-h,)), params, nx, ny, tol, order)
        return (p + m - 2.0 * base) / h**2

    d = second_diff(step)
    if extrapolate:
        d_half = second_diff(step / 2.0)
        d = (4.0 * d_half - d) / 3.0
    return cosine_coefficients(d, n_harmonics)[1]
