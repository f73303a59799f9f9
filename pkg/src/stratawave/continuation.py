"""Newton correction and pseudo-arclength-free branch tracing.

A branch point is parametrized by the amplitude s of the fundamental
cosine mode: the profile is constrained to

    eta(x) = -s cos(k x) + sum_{j>=2} a_j cos(j k x),

and the unknowns are (lambda, a_2, ..., a_N).  The residual is the
vector of cosine coefficients 1..N of the interface operator, so a
root is a traveling wave up to the retained harmonics.  Coefficients
beyond N are monitored and N doubles when the tail stops being
negligible relative to the fundamental.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import asymptotics, elliptic
from .model import BranchPoint, FluidParams, WaveProfile, cosine_coefficients

MAX_HARMONICS = 64
TAIL_RATIO = 1e-10
MAX_LAMBDA_STEP = 0.5


class NoConvergence(RuntimeError):
    """Newton iteration left its basin or stalled above tolerance."""


@dataclass
class Branch:
    """An amplitude-ordered run of corrected points on one bifurcation branch."""

    k: int
    i: int
    params: FluidParams
    points: list = field(default_factory=list)

    @property
    def amplitudes(self) -> np.ndarray:
        return np.array([p.s for p in self.points])

    @property
    def lambdas(self) -> np.ndarray:
        return np.array([p.lam for p in self.points])

    def __len__(self) -> int:
        return len(self.points)

    def __iter__(self):
        return iter(self.points)

    def point_at(self, s: float) -> BranchPoint:
        """The stored point whose amplitude is closest to s."""
        if not self.points:
            raise ValueError("empty branch")
        idx = int(np.argmin(np.abs(self.amplitudes - s)))
        return self.points[idx]

    def to_dict(self) -> dict:
        return {
            "k": self.k,
            "i": self.i,
            "params": self.params.to_dict(),
            "points": [p.to_dict() for p in self.points],
        }


def _assemble_profile(k: int, s: float, tail: np.ndarray) -> WaveProfile:
    return WaveProfile(k, (-s, *tail))


def _residual(lam: float, k: int, s: float, tail: np.ndarray,
              params: FluidParams, nx: int, ny: int, n_harmonics: int):
    profile = _assemble_profile(k, s, tail)
    samples = elliptic.Psi(lam, profile, params, nx, ny)
    coeffs = cosine_coefficients(samples, n_harmonics)[1]
    return coeffs, samples


def newton_correct(lambda_guess: float, profile_guess: WaveProfile, s: float,
                   params: FluidParams, tol: float = 1e-10, nx: int = 64,
                   ny: int = 97, max_iter: int = 12,
                   max_lambda_step: float = MAX_LAMBDA_STEP,
                   branch_id: tuple[int, int] | None = None) -> BranchPoint:
    """Newton-correct (lambda, eta) at fixed fundamental amplitude s.

    The first Newton update is a basin guard: a lambda correction larger
    than max_lambda_step means the guess is nowhere near the branch and
    the iteration aborts rather than wandering to a different solution.
    """
    if s < 0:
        raise ValueError("amplitude s must be nonnegative")
    k = profile_guess.k
    if branch_id is None:
        branch_id = (k, 0)
    n = max(len(profile_guess.coeffs), 8)
    tail = np.zeros(n - 1)
    tail[: len(profile_guess.coeffs) - 1] = profile_guess.coeffs[1:]
    lam = float(lambda_guess)

    h_lam = 1e-4
    h_coef = 2e-6
    first_update = True
    while True:
        sup = None
        for it in range(max_iter):
            r, samples = _residual(lam, k, s, tail, params, nx, ny, n)
            sup = float(np.max(np.abs(samples)))
            if float(np.max(np.abs(r))) < 0.1 * tol:
                break
            jac = np.empty((n, n))
            rp, _ = _residual(lam + h_lam, k, s, tail, params, nx, ny, n)
            rm, _ = _residual(lam - h_lam, k, s, tail, params, nx, ny, n)
            jac[:, 0] = (rp - rm) / (2.0 * h_lam)
            for j in range(n - 1):
                bump = np.zeros_like(tail)
                bump[j] = h_coef
                rp, _ = _residual(lam, k, s, tail + bump, params, nx, ny, n)
                rm, _ = _residual(lam, k, s, tail - bump, params, nx, ny, n)
                jac[:, j + 1] = (rp - rm) / (2.0 * h_coef)
            try:
                delta = np.linalg.solve(jac, -r)
            except np.linalg.LinAlgError as exc:
                raise NoConvergence(f"singular Newton system at s={s:g}") from exc
            if first_update and abs(delta[0]) > max_lambda_step:
                raise NoConvergence(
                    f"first lambda correction {delta[0]:+.3g} exceeds the basin "
                    f"guard {max_lambda_step:g}; the guess is not near this branch"
                )
            first_update = False
            lam += delta[0]
            tail += delta[1:]
        else:
            raise NoConvergence(
                f"no convergence in {max_iter} iterations at s={s:g} "
                f"(projected residual {float(np.max(np.abs(r))):.3e})"
            )
        # The projected system is solved; the sample residual is now pure
        # tail content.  Retain more harmonics until it clears the bar.
        if sup < tol or n >= MAX_HARMONICS:
            break
        n = min(2 * n, MAX_HARMONICS)
        grown = np.zeros(n - 1)
        grown[: tail.size] = tail
        tail = grown
    if sup > tol:
        raise NoConvergence(
            f"tail residual {sup:.3e} still above tol={tol:g} with "
            f"{MAX_HARMONICS} harmonics at s={s:g}"
        )
    profile = _assemble_profile(k, s, tail)
    return BranchPoint(s=s, lam=lam, profile=profile, residual=sup,
                       branch_id=branch_id)


def trace_branch(k: int, i: int, params: FluidParams, s_max: float,
                 ds: float, tol: float = 1e-10, nx: int = 64, ny: int = 97,
                 n_harmonics: int = 8,
                 variant: str = asymptotics.DEFAULT_VARIANT) -> Branch:
    """March the branch (k, i) from the bifurcation point out to s_max.

    Predictors: the quadratic expansion for the first step, secant
    continuation in (lambda, tail) afterwards.  When the last retained
    harmonic grows past TAIL_RATIO of the fundamental the harmonic count
    doubles (up to MAX_HARMONICS) and the march continues.
    """
    if s_max <= 0 or ds <= 0:
        raise ValueError("s_max and ds must be positive")
    coeffs = asymptotics.second_order_coefficients(k, i, params, variant=variant)
    branch_id = (int(k), int(i))
    branch = Branch(k=k, i=i, params=params)
    zero = asymptotics.branch_expansion(k, i, params, 0.0)
    branch.points.append(BranchPoint(s=0.0, lam=coeffs.Lambda,
                                     profile=zero["profile"], residual=0.0,
                                     branch_id=branch_id))

    n = n_harmonics
    amplitudes = np.arange(1, int(np.floor(s_max / ds + 1e-9)) + 1) * ds
    if amplitudes.size == 0 or amplitudes[-1] < s_max - 1e-12:
        amplitudes = np.append(amplitudes, s_max)
    for s in amplitudes:
        if len(branch.points) >= 3:
            p2, p1 = branch.points[-2], branch.points[-1]
            w = (s - p1.s) / (p1.s - p2.s)
            lam_guess = p1.lam + w * (p1.lam - p2.lam)
            c1 = np.array(p1.profile.padded(n))
            c2 = np.array(p2.profile.padded(n))
            guess_coeffs = c1 + w * (c1 - c2)
            guess_coeffs[0] = -s
            guess = WaveProfile(k, tuple(guess_coeffs))
        else:
            expansion = asymptotics.branch_expansion(k, i, params, s,
                                                     variant=variant)
            lam_guess = expansion["lambda"]
            guess = WaveProfile(k, expansion["profile"].padded(n))
        point = newton_correct(lam_guess, guess, s, params, tol=tol, nx=nx,
                               ny=ny, branch_id=branch_id)
        branch.points.append(point)

        n = max(n, len(point.profile.coeffs))
        tail_mag = abs(point.profile.coeffs[-1])
        fund = max(abs(point.profile.coeffs[0]), 1e-300)
        if tail_mag / fund > TAIL_RATIO and n < MAX_HARMONICS:
            n = min(2 * n, MAX_HARMONICS)
    return branch
