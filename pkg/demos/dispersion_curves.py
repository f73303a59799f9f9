"""Where do small waves bifurcate from the flat interface?

For each wavenumber k the interface operator linearizes to a multiplier
mu_k(lam), quadratic in the wave speed lam.  Its two roots are the only
speeds at which a k-periodic wave family can branch off.  This script
tabulates the roots, plots both families against k, and locates the
surface-tension threshold beyond which each family orders the same way
in k everywhere.
"""
import dataclasses

import numpy as np
import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from stratawave.dispersion import (bifurcation_points, monotonicity_directions,
                                   mu, sigma_threshold)
from stratawave.model import FluidParams

K_MAX = 12
PARAMS = FluidParams(rho=1.0, rho_bar=0.9, g=9.8, sigma=0.0, omega=1.0,
                     omega_bar=0.5)

# --------  root table  ------------------------------------------------------
print(f"parameters: {PARAMS.to_dict()}")
print(f"{'k':>3}  {'Lambda_k^1':>14}  {'Lambda_k^2':>14}  {'residual':>10}")
ks = np.arange(1, K_MAX + 1)
lo, hi = [], []
for k in ks:
    l1, l2 = bifurcation_points(int(k), PARAMS)
    lo.append(l1)
    hi.append(l2)
    resid = max(abs(mu(int(k), l1, PARAMS)), abs(mu(int(k), l2, PARAMS)))
    print(f"{k:>3}  {l1:>14.8f}  {l2:>14.8f}  {resid:>10.2e}")

# --------  ordering in k  ---------------------------------------------------
sig_star = sigma_threshold(PARAMS, k_max=K_MAX)
print(f"\nwithout surface tension: {monotonicity_directions(PARAMS, K_MAX)}")
print(f"monotonicity threshold for this configuration: sigma = {sig_star:.6f}")
strong = dataclasses.replace(PARAMS, sigma=2.0 * sig_star)
print(f"at sigma = {strong.sigma:.6f}: {monotonicity_directions(strong, K_MAX)}")

# --------  picture  ---------------------------------------------------------
fig, ax = plt.subplots(figsize=(6, 4))
ax.plot(ks, lo, "o-", label="slow family  $\\Lambda_k^1$")
ax.plot(ks, hi, "s-", label="fast family  $\\Lambda_k^2$")
for k, l1, l2 in zip(ks, lo, hi):
    ax.vlines(k, l1, l2, color="0.8", zorder=0)
ax.set_xlabel("wavenumber k")
ax.set_ylabel("bifurcating wave speed")
ax.legend()
ax.set_title("speeds at which k-periodic waves branch off")
fig.tight_layout()
fig.savefig("dispersion_curves.png", dpi=150)
print("\nwrote dispersion_curves.png")
