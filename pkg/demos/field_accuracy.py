"""How accurate are the second-order field expansions?

Each layer's relative stream function is computed two ways: by the
collocation solver on the Newton-corrected wave, and by the explicit
second-order expansion in the amplitude s.  The sup difference is the
O(s^3) remainder, so halving s should shrink it by about 8.
"""
import numpy as np

from stratawave import asymptotics, continuation, elliptic
from stratawave.model import FluidParams

PARAMS = FluidParams(rho=1.0, rho_bar=0.9, g=9.8, sigma=0.0, omega=1.0,
                     omega_bar=0.5)
NX, NY = 64, 97
AMPLITUDES = (0.04, 0.02, 0.01)

sup = {"lower": {}, "upper": {}}
for s in AMPLITUDES:
    guess = asymptotics.branch_expansion(1, 1, PARAMS, s)
    pt = continuation.newton_correct(guess["lambda"], guess["profile"], s,
                                     PARAMS, nx=NX, ny=NY)
    low = elliptic.solve_lower(pt.profile, PARAMS, nx=NX, ny=NY)
    low_exp = asymptotics.lower_field_expansion(1, 1, PARAMS, s, nx=NX, ny=NY)
    up = elliptic.solve_upper(pt.lam, pt.profile, PARAMS, nx=NX, ny=NY)
    up_exp = asymptotics.upper_field_expansion(1, 1, PARAMS, s, nx=NX, ny=NY,
                                               lam=pt.lam)
    sup["lower"][s] = float(np.max(np.abs(low.values - low_exp.values)))
    sup["upper"][s] = float(np.max(np.abs(up.values - up_exp.values)))
    print(f"s = {s}: lambda = {pt.lam:.10f}, "
          f"sup|solved - expanded| lower = {sup['lower'][s]:.3e}, "
          f"upper = {sup['upper'][s]:.3e}")

print("\nremainder decay when s halves (8 means clean third order):")
for layer in ("lower", "upper"):
    r1 = sup[layer][0.04] / sup[layer][0.02]
    r2 = sup[layer][0.02] / sup[layer][0.01]
    print(f"  {layer}: {r1:.2f}, {r2:.2f}")
