"""Core value types and periodic cosine-series utilities.

The toolkit works with even, mean-zero interface elevations stored as
cosine series, vertical coefficient profiles on [-1, 0] or [0, 1], and
stream-function samples on the fixed reference rectangles of the two
fluid layers.  Everything here is an immutable value; operations are
pure functions of their inputs.

Conventions
-----------
* The interface elevation is ``eta(x) = sum_j a_j cos(j*k*x)`` with
  integer fundamental wavenumber ``k >= 1``; it must stay inside the
  strip ``|eta| < 1`` so that neither layer degenerates.
* The lower layer occupies ``-1 < y < eta(x)``, the upper layer
  ``eta(x) < y < 1``; the reference rectangles are ``(-1, 0)`` and
  ``(0, 1)`` in straightened coordinates.
* Periodic integrals are grid averages.  ``numpy`` reductions use
  pairwise summation with a fixed traversal order, so repeated runs
  give bit-identical results.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.interpolate import CubicSpline

# Default number of retained cosine harmonics for series built from samples.
DEFAULT_HARMONICS = 32

# Nodes used when estimating the sup-norm of a profile.
_SUP_NODES = 2048


@dataclass(frozen=True)
class FluidParams:
    """Physical constants of the two-layer flow.

    Attributes
    ----------
    rho, rho_bar : float
        Densities of the lower and upper fluid.  Stable stratification
        (``rho > rho_bar > 0``) is required.
    g : float
        Gravitational acceleration, positive.
    sigma : float
        Coefficient of surface tension at the interface, nonnegative.
    omega, omega_bar : float
        Constant vorticities of the lower and upper layer.
    wave_speed : float
        Propagation speed ``c`` of the steady frame, positive.  It only
        labels the frame; all computations happen in moving coordinates.
    """

    rho: float
    rho_bar: float
    g: float = 9.8
    sigma: float = 0.0
    omega: float = 0.0
    omega_bar: float = 0.0
    wave_speed: float = 1.0

    def __post_init__(self) -> None:
        if not (self.rho > 0.0 and self.rho_bar > 0.0):
            raise ValueError("densities must be positive")
        if not (self.rho > self.rho_bar):
            raise ValueError(
                "unstable or neutral stratification (rho <= rho_bar) is not supported"
            )
        if not (self.g > 0.0):
            raise ValueError("g must be positive")
        if self.sigma < 0.0:
            raise ValueError("sigma must be nonnegative")
        if not (self.wave_speed > 0.0):
            raise ValueError("wave_speed must be positive")

    def to_dict(self) -> dict:
        return {
            "rho": self.rho,
            "rho_bar": self.rho_bar,
            "g": self.g,
            "sigma": self.sigma,
            "omega": self.omega,
            "omega_bar": self.omega_bar,
            "wave_speed": self.wave_speed,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "FluidParams":
        return cls(**{k: float(v) for k, v in d.items()})

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text: str) -> "FluidParams":
        return cls.from_dict(json.loads(text))


@dataclass(frozen=True)
class WaveProfile:
    """Even, mean-zero interface elevation stored as a cosine series.

    ``eta(x) = sum_{j>=1} coeffs[j-1] * cos(j * k * x)``.
    """

    k: int
    coeffs: tuple[float, ...] = ()

    def __post_init__(self) -> None:
        if not (isinstance(self.k, (int, np.integer)) and self.k >= 1):
            raise ValueError("fundamental wavenumber k must be an integer >= 1")
        object.__setattr__(self, "k", int(self.k))
        object.__setattr__(self, "coeffs", tuple(float(c) for c in self.coeffs))
        if self.coeffs and max(abs(c) for c in self.coeffs) > 0.0:
            sup = float(np.max(np.abs(self.evaluate(self.nodes(_SUP_NODES)))))
            if sup >= 1.0:
                raise ValueError(
                    f"amplitude too large: sup|eta| = {sup:.6g} leaves the strip |eta| < 1"
                )

    # -- geometry ------------------------------------------------------

    @property
    def period(self) -> float:
        return 2.0 * np.pi / self.k

    @property
    def n_harmonics(self) -> int:
        return len(self.coeffs)

    def nodes(self, n: int) -> np.ndarray:
        """Uniform grid of n points over one period, starting at x = 0."""
        return np.arange(n) * (self.period / n)

    # -- evaluation ----------------------------------------------------

    def _harmonic_matrix(self, x: np.ndarray) -> np.ndarray:
        j = np.arange(1, len(self.coeffs) + 1)
        return np.asarray(x)[..., None] * (j * self.k)

    def evaluate(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if not self.coeffs:
            return np.zeros_like(x)
        return np.cos(self._harmonic_matrix(x)) @ np.asarray(self.coeffs)

    def derivative(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if not self.coeffs:
            return np.zeros_like(x)
        j = np.arange(1, len(self.coeffs) + 1)
        a = np.asarray(self.coeffs) * j * self.k
        return -np.sin(self._harmonic_matrix(x)) @ a

    def second_derivative(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if not self.coeffs:
            return np.zeros_like(x)
        j = np.arange(1, len(self.coeffs) + 1)
        a = np.asarray(self.coeffs) * (j * self.k) ** 2
        return -np.cos(self._harmonic_matrix(x)) @ a

    def sup_norm(self) -> float:
        if not self.coeffs:
            return 0.0
        return float(np.max(np.abs(self.evaluate(self.nodes(_SUP_NODES)))))

    # -- algebra -------------------------------------------------------

    def with_coeffs(self, coeffs) -> "WaveProfile":
        return WaveProfile(self.k, tuple(coeffs))

    def padded(self, n: int) -> tuple[float, ...]:
        c = list(self.coeffs) + [0.0] * max(0, n - len(self.coeffs))
        return tuple(c[:n])

    def add_scaled(self, other: "WaveProfile", factor: float) -> "WaveProfile":
        if other.k != self.k:
            raise ValueError("profiles must share the fundamental wavenumber")
        n = max(len(self.coeffs), len(other.coeffs))
        a = np.array(self.padded(n))
        b = np.array(other.padded(n))
        return WaveProfile(self.k, tuple(a + factor * b))

    @classmethod
    def zero(cls, k: int) -> "WaveProfile":
        return cls(k, ())

    # -- serialization ---------------------------------------------------

    def to_dict(self) -> dict:
        return {"k": self.k, "coeffs": list(self.coeffs)}

    @classmethod
    def from_dict(cls, d: dict) -> "WaveProfile":
        return cls(int(d["k"]), tuple(float(c) for c in d["coeffs"]))


class VerticalProfile:
    """Function of the vertical coordinate on [0, 1] or [-1, 0].

    Holds either a closed-form callable or samples on a uniform grid
    (interpolated with a cubic spline).  Calling the object evaluates it.
    """

    def __init__(self, domain: tuple[float, float], fn: Callable, label: str = ""):
        lo, hi = float(domain[0]), float(domain[1])
        if not lo < hi:
            raise ValueError("empty vertical domain")
        self.domain = (lo, hi)
        self.label = label
        self._fn = fn

    @classmethod
    def from_callable(cls, domain, fn, label: str = "") -> "VerticalProfile":
        return cls(domain, lambda y: np.asarray(fn(np.asarray(y, dtype=float))), label)

    @classmethod
    def from_samples(cls, y, values, label: str = "") -> "VerticalProfile":
        y = np.asarray(y, dtype=float)
        values = np.asarray(values, dtype=float)
        if y.ndim != 1 or y.shape != values.shape or y.size < 4:
            raise ValueError("need matching 1-d sample arrays with >= 4 nodes")
        spline = CubicSpline(y, values)
        obj = cls((y[0], y[-1]), spline, label)
        obj.y = y
        obj.values = values
        return obj

    def __call__(self, y):
        return self._fn(np.asarray(y, dtype=float))

    def sample(self, n: int) -> tuple[np.ndarray, np.ndarray]:
        y = np.linspace(self.domain[0], self.domain[1], n)
        return y, np.asarray(self(y), dtype=float)

    def endpoint_values(self) -> tuple[float, float]:
        lo, hi = self.domain
        return float(self(lo)), float(self(hi))


@dataclass(frozen=True)
class FieldGrid:
    """Stream-function samples on a layer's reference rectangle.

    ``values[i, j]`` is the sample at ``(x_i, y_j)`` with ``x_i`` uniform
    over one period (endpoint excluded) and ``y_j`` uniform including
    both vertical boundaries.  With ``pushforward=True`` the same numbers
    are interpreted at the physically mapped points
    ``(x_i, y_j + (1 -+ y_j) * eta(x_i))`` (sign by layer), i.e. the grid
    follows the interface.
    """

    layer: str
    k: int
    values: np.ndarray
    pushforward: bool = False
    profile: WaveProfile | None = None

    def __post_init__(self) -> None:
        if self.layer not in ("lower", "upper"):
            raise ValueError("layer must be 'lower' or 'upper'")
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 2 or v.shape[0] < 4 or v.shape[1] < 4:
            raise ValueError("values must be a 2-d array with at least 4x4 samples")
        if v.shape[0] % 2:
            raise ValueError("nx must be even")
        object.__setattr__(self, "values", v)
        if self.pushforward and self.profile is None:
            raise ValueError("pushforward samples need the interface profile")

    @property
    def nx(self) -> int:
        return self.values.shape[0]

    @property
    def ny(self) -> int:
        return self.values.shape[1]

    @property
    def period(self) -> float:
        return 2.0 * np.pi / self.k

    def x_nodes(self) -> np.ndarray:
        return np.arange(self.nx) * (self.period / self.nx)

    def y_nodes(self) -> np.ndarray:
        if self.layer == "lower":
            return np.linspace(-1.0, 0.0, self.ny)
        return np.linspace(0.0, 1.0, self.ny)

    def physical_y(self) -> np.ndarray:
        """Vertical positions of the samples under the layer's straightening map."""
        if self.profile is None:
            raise ValueError("no interface profile attached")
        eta = self.profile.evaluate(self.x_nodes())[:, None]
        y = self.y_nodes()[None, :]
        if self.layer == "lower":
            return y + (1.0 + y) * eta
        return y + (1.0 - y) * eta

    def evenness_defect(self) -> float:
        """max |w(x, y) - w(-x, y)| over the grid; zero for even fields."""
        idx = (-np.arange(self.nx)) % self.nx
        return float(np.max(np.abs(self.values - self.values[idx, :])))

    def boundary_defect(self, params: FluidParams, lam: float | None = None) -> float:
        """Sup distance of the boundary rows from their Dirichlet data."""
        if self.layer == "lower":
            bed = np.abs(self.values[:, 0] - params.omega / 2.0)
            top = np.abs(self.values[:, -1])
            return float(max(bed.max(), top.max()))
        if lam is None:
            raise ValueError("upper-layer boundary check needs lambda")
        bottom = np.abs(self.values[:, 0])
        lid = np.abs(self.values[:, -1] - (lam + params.omega_bar / 2.0))
        return float(max(bottom.max(), lid.max()))


@dataclass(frozen=True)
class BranchPoint:
    """One corrected point on a bifurcation branch."""

    s: float
    lam: float
    profile: WaveProfile
    residual: float
    branch_id: tuple[int, int]

    def to_dict(self) -> dict:
        return {
            "s": self.s,
            "lambda": self.lam,
            "profile": self.profile.to_dict(),
            "residual": self.residual,
            "branch_id": list(self.branch_id),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "BranchPoint":
        return cls(
            s=float(d["s"]),
            lam=float(d["lambda"]),
            profile=WaveProfile.from_dict(d["profile"]),
            residual=float(d["residual"]),
            branch_id=tuple(int(v) for v in d["branch_id"]),
        )


# -- series / sample operations ------------------------------------------


def project_mean_zero(samples) -> np.ndarray:
    """Remove the average from periodic samples over one period."""
    samples = np.asarray(samples, dtype=float)
    if samples.size == 0:
        raise ValueError("cannot project an empty sample array")
    return samples - samples.mean()


def cosine_coefficients(samples, n_harmonics: int | None = None):
    """Mean and cosine coefficients of even periodic samples.

    ``samples[i] = f(i * T / n)`` for one period ``T``.  Returns
    ``(mean, coeffs)`` where ``coeffs[j-1]`` multiplies ``cos(j * 2 pi x / T)``.
    Harmonics at or above the Nyquist bin are discarded.
    """
    samples = np.asarray(samples, dtype=float)
    n = samples.size
    if n < 4:
        raise ValueError("need at least 4 samples")
    spec = np.fft.rfft(samples)
    mean = float(spec[0].real) / n
    cap = n // 2 - 1
    m = cap if n_harmonics is None else min(int(n_harmonics), cap)
    coeffs = 2.0 * spec[1 : m + 1].real / n
    return mean, coeffs


def spectral_x_derivative(samples, k: int, axis: int = 0) -> np.ndarray:
    """Derivative of periodic samples over one period of length 2 pi / k.

    The Nyquist bin is zeroed, which is the standard convention for odd
    derivatives on an even number of nodes.  The zero bin stays zero, so
    the output has exactly zero discrete mean.
    """
    samples = np.asarray(samples, dtype=float)
    n = samples.shape[axis]
    spec = np.fft.rfft(samples, axis=axis)
    m = np.arange(spec.shape[axis]) * k
    shape = [1] * spec.ndim
    shape[axis] = -1
    mult = (1j * m).reshape(shape)
    spec = spec * mult
    if n % 2 == 0:
        idx = [slice(None)] * spec.ndim
        idx[axis] = -1
        spec[tuple(idx)] = 0.0
    return np.fft.irfft(spec, n=n, axis=axis)


def curvature_term(profile: WaveProfile, x, sigma: float = 1.0) -> np.ndarray:
    """Pointwise interface curvature forcing 2*sigma*eta'' / (1 + eta'^2)^(3/2)."""
    slope = profile.derivative(x)
    return 2.0 * sigma * profile.second_derivative(x) / (1.0 + slope**2) ** 1.5


def cosine_series_ops(profile: WaveProfile, nx: int = 256, sigma: float = 1.0) -> dict:
    """Termwise derivative series and curvature samples of a profile.

    Returns a dict with the sine coefficients of ``eta'``, the cosine
    coefficients of ``eta''`` (index j-1 for harmonic j of the
    fundamental), and samples of the curvature forcing on ``nx`` uniform
    nodes over one period.
    """
    j = np.arange(1, profile.n_harmonics + 1)
    a = np.asarray(profile.coeffs)
    return {
        "derivative": -a * j * profile.k,
        "second_derivative": -a * (j * profile.k) ** 2,
        "curvature_term": curvature_term(profile, profile.nodes(nx), sigma),
    }
