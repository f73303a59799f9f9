"""Dispersion symbol of the linearized interface problem and the
bifurcation values of the upper-layer slip parameter.

The linearization of the interface operator at a flat interface acts on
cos(k x) by multiplication with

    mu_k(lam) = 2 * [ g (rho_bar - rho) - sigma k^2
                      + omega_bar rho_bar lam
                      + rho_bar (k / tanh k) lam^2 ],

an upward parabola in lam whose two real roots Lambda_k^1 < Lambda_k^2
are the laminar slip values from which nontrivial wave branches can
bifurcate.  A branch direction cos(k x) gives a one-dimensional kernel
iff no other harmonic j*k shares the root.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import FluidParams, VerticalProfile

# -- numerically safe hyperbolic ratios -----------------------------------


def k_over_tanh(x):
    """x / tanh(x), valid for x > 0; tanh saturates so large x is exact."""
    x = np.asarray(x, dtype=float)
    return np.where(x < 20.0, x / np.tanh(np.where(x < 20.0, x, 1.0)), x)


def sinh_ratio(a, b):
    """sinh(a) / sinh(b) for b > 0 without overflow for large arguments."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    aa = np.abs(a)
    num = -np.expm1(-2.0 * aa)
    den = -np.expm1(-2.0 * b)
    return np.sign(a) * np.exp(aa - b) * num / den


def cosh_sinh_ratio(a, b):
    """cosh(a) / sinh(b) for b > 0 without overflow for large arguments."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    aa = np.abs(a)
    num = 1.0 + np.exp(-2.0 * aa)
    den = -np.expm1(-2.0 * b)
    return np.exp(aa - b) * num / den


# -- the symbol ------------------------------------------------------------


def _mu_array(wavenumbers, lam: float, params: FluidParams) -> np.ndarray:
    m = np.asarray(wavenumbers, dtype=float)
    return 2.0 * (
        params.g * (params.rho_bar - params.rho)
        - params.sigma * m**2
        + params.omega_bar * params.rho_bar * lam
        + params.rho_bar * k_over_tanh(m) * lam**2
    )


def _mu_scale(k: float, lam: float, params: FluidParams) -> float:
    """Magnitude of the largest term of mu_k, used for relative tests."""
    terms = (
        abs(2.0 * params.g * (params.rho_bar - params.rho)),
        2.0 * params.sigma * k**2,
        abs(2.0 * params.omega_bar * params.rho_bar * lam),
        2.0 * params.rho_bar * float(k_over_tanh(k)) * lam**2,
    )
    return max(terms)


def mu(k: int, lam: float, params: FluidParams) -> float:
    """Dispersion symbol mu_k(lam) for integer harmonic k >= 1."""
    if not (isinstance(k, (int, np.integer)) and k >= 1):
        raise ValueError("harmonic index k must be an integer >= 1")
    return float(_mu_array(float(k), float(lam), params))


@dataclass(frozen=True)
class SymbolFamily:
    """The whole multiplier sequence lam -> (mu_k(lam))_k for fixed params."""

    params: FluidParams

    def __call__(self, lam: float, k_max: int) -> np.ndarray:
        if k_max < 1:
            raise ValueError("k_max must be >= 1")
        return _mu_array(np.arange(1, k_max + 1), float(lam), self.params)

    def at(self, k: int, lam: float) -> float:
        return mu(k, lam, self.params)


def bifurcation_points(k: int, params: FluidParams) -> tuple[float, float]:
    """Both roots (Lambda_k^1 < Lambda_k^2) of lam -> mu_k(lam).

    Closed form of the quadratic; real and distinct whenever
    rho > rho_bar, which FluidParams already guarantees.
    """
    if not (isinstance(k, (int, np.integer)) and k >= 1):
        raise ValueError("harmonic index k must be an integer >= 1")
    t = float(np.tanh(k) / k)
    disc = (params.g * (params.rho - params.rho_bar) + params.sigma * k**2) \
        / params.rho_bar * t + (params.omega_bar**2 / 4.0) * t**2
    root = float(np.sqrt(disc))
    base = -(params.omega_bar / 2.0) * t
    return base - root, base + root


def kernel_is_simple(k: int, i: int, params: FluidParams, j_max: int = 16) -> bool:
    """Whether cos(k x) spans the kernel of the linearization at Lambda_k^i.

    Checks |mu_{j k}(Lambda)| for j = 2..j_max against a relative floor of
    1e-10, then extends the sweep up to the harmonic beyond which a
    closed-form bound (m <= m/tanh m <= m + 1) pins the sign of the
    dominant term, so no root can hide past the sweep.
    """
    if j_max < 2:
        raise ValueError("j_max must be >= 2")
    if i not in (1, 2):
        raise ValueError("branch index i must be 1 or 2")
    lam = bifurcation_points(k, params)[i - 1]
    head = abs(params.g * (params.rho_bar - params.rho)) \
        + abs(params.omega_bar * params.rho_bar * lam)
    if params.sigma > 0.0:
        # sigma m^2 - rho_bar lam^2 (m+1) - head > 0 => mu < 0 for sure
        a, b, c = params.sigma, -params.rho_bar * lam**2, \
            -(head + params.rho_bar * lam**2)
        m_star = (-b + np.sqrt(b * b - 4.0 * a * c)) / (2.0 * a)
    else:
        # lam != 0 at any root since mu_k(0) < 0; linear growth wins
        m_star = head / (params.rho_bar * lam**2)
    j_star = max(j_max, int(np.ceil(m_star / k)) + 1)
    if j_star > 10**6:
        raise ValueError("dominance horizon too far; parameters out of scope")
    j = np.arange(2, j_star + 1)
    vals = _mu_array(j * k, lam, params)
    scales = np.array([_mu_scale(jj * k, lam, params) for jj in j])
    return bool(np.all(np.abs(vals) > 1e-10 * scales))


def kernel_margin(k: int, i: int, params: FluidParams, j_max: int = 16):
    """Smallest relative |mu_{j k}(Lambda_k^i)| over j = 2..j_max and its j."""
    if j_max < 2:
        raise ValueError("j_max must be >= 2")
    lam = bifurcation_points(k, params)[i - 1]
    j = np.arange(2, j_max + 1)
    vals = np.abs(_mu_array(j * k, lam, params))
    scales = np.array([_mu_scale(jj * k, lam, params) for jj in j])
    rel = vals / scales
    idx = int(np.argmin(rel))
    return float(rel[idx]), int(j[idx])


# -- monotonicity of the bifurcation values --------------------------------


def _strictly_monotone(seq: np.ndarray) -> bool:
    d = np.diff(seq)
    return bool(np.all(d > 0.0) or np.all(d < 0.0))


def _both_branches_monotone(params: FluidParams, sigma: float, k_max: int) -> bool:
    p = FluidParams(params.rho, params.rho_bar, params.g, sigma,
                    params.omega, params.omega_bar, params.wave_speed)
    pts = np.array([bifurcation_points(k, p) for k in range(1, k_max + 1)])
    return _strictly_monotone(pts[:, 0]) and _strictly_monotone(pts[:, 1])


def monotonicity_directions(params: FluidParams, k_max: int) -> dict:
    """Observed direction of k -> Lambda_k^i for the given surface tension."""
    pts = np.array([bifurcation_points(k, params) for k in range(1, k_max + 1)])
    out = {}
    for i in (1, 2):
        d = np.diff(pts[:, i - 1])
        if np.all(d > 0.0):
            out[f"branch_{i}"] = "increasing"
        elif np.all(d < 0.0):
            out[f"branch_{i}"] = "decreasing"
        else:
            out[f"branch_{i}"] = "not monotone"
    return out


def sigma_threshold(params: FluidParams, k_max: int, tol: float = 1e-6) -> float:
    """Smallest sigma_0 with both sequences (Lambda_k^i)_{k<=k_max} strictly
    monotone for every sigma > sigma_0.

    At sigma = 0 both sequences are monotone; an intermediate band of
    surface tensions can break monotonicity because the sigma k^2 term
    overtakes the decreasing tanh(k)/k factor partway through the range.
    The band's upper edge is located by a coarse logarithmic scan and
    polished by bisection to the requested tolerance.  Returns 0.0 when
    no non-monotone sigma exists for this truncation.
    """
    if k_max < 2:
        raise ValueError("k_max must be >= 2")
    sigma_hi = 1.0
    while not _both_branches_monotone(params, sigma_hi, k_max):
        sigma_hi *= 2.0
        if sigma_hi > 1e9:
            raise RuntimeError("no monotone regime found below sigma = 1e9")
    grid = np.geomspace(1e-8, sigma_hi, 200)
    bad = [s for s in grid if not _both_branches_monotone(params, s, k_max)]
    if not bad:
        return 0.0
    lo = max(bad)
    hi = min(s for s in grid if s > lo and _both_branches_monotone(params, s, k_max))
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if _both_branches_monotone(params, mid, k_max):
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


# -- linear vertical structure ---------------------------------------------


def linear_vertical_profile(k: int, lam: float, omega_bar: float) -> VerticalProfile:
    """Vertical shape of the upper-layer response to a cos(k x) bump.

    Solves w'' - k^2 w = -2 omega_bar - (1 - y)(omega_bar y + lam) k^2
    with w(0) = w(1) = 0; returned in the overflow-safe closed form
    w(y) = -lam sinh(k (1 - y)) / sinh(k) + omega_bar y (1 - y) + lam (1 - y).
    """
    if not (isinstance(k, (int, np.integer)) and k >= 1):
        raise ValueError("harmonic index k must be an integer >= 1")
    kf, lamf, ob = float(k), float(lam), float(omega_bar)

    def w(y):
        y = np.asarray(y, dtype=float)
        return -lamf * sinh_ratio(kf * (1.0 - y), kf) \
            + ob * y * (1.0 - y) + lamf * (1.0 - y)

    return VerticalProfile.from_callable((0.0, 1.0), w, label=f"w_{k}")


def multiplier_bound_estimate(symbol_values, r: float, s: float) -> dict:
    """Finite Marcinkiewicz-style sups of a multiplier sequence.

    Given M_p for p = 1..P, returns
    sup_p p^(r-s) |M_p|, sup_p p^(r-s+1) |M_{p+1} - M_p| and
    sup_p p^(r-s+2) |M_{p+2} - 2 M_{p+1} + M_p|.  The exponents r and s
    must be positive non-integers (the regularity pair being compared).
    """
    M = np.asarray(symbol_values, dtype=float)
    if M.ndim != 1 or M.size < 3:
        raise ValueError("need at least three symbol values")
    for name, val in (("r", r), ("s", s)):
        if not (val > 0.0) or float(val).is_integer():
            raise ValueError(f"{name} must be a positive non-integer")
    p = np.arange(1, M.size + 1, dtype=float)
    d1 = np.diff(M)
    d2 = np.diff(M, n=2)
    return {
        "sup0": float(np.max(p ** (r - s) * np.abs(M))),
        "sup1": float(np.max(p[:-1] ** (r - s + 1) * np.abs(d1))),
        "sup2": float(np.max(p[:-2] ** (r - s + 2) * np.abs(d2))),
    }
