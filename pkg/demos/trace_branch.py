"""Follow a wave family away from its bifurcation point.

Starting from the flat interface, the slow k = 1 family is continued in
the amplitude s with a secant predictor and a Newton corrector on the
projected interface equation.  Two quadratic signatures are checked
along the way: the speed departs from the bifurcation value like s^2
(slope 2 on a log-log plot), and the second harmonic of the corrected
profile settles onto alpha_k s^2.
"""
import numpy as np
import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from stratawave import asymptotics, continuation
from stratawave.model import FluidParams

PARAMS = FluidParams(rho=2.0, rho_bar=1.0, g=9.8, sigma=0.0, omega=1.0,
                     omega_bar=0.0)
S_MAX, DS = 0.05, 2.5e-3
NX, NY = 64, 97

# --------  continuation  ----------------------------------------------------
coeff = asymptotics.second_order_coefficients(1, 1, PARAMS)
print(f"bifurcation point Lambda = {coeff.Lambda:.12f}, "
      f"alpha_k = {coeff.alpha_k:.12f}")
branch = continuation.trace_branch(1, 1, PARAMS, S_MAX, DS, nx=NX, ny=NY)
print(f"traced {len(branch)} points up to s = {S_MAX}")

print(f"\n{'s':>7}  {'lambda':>16}  {'(lam-Lambda)/s^2':>16}  "
      f"{'a_2/s^2':>12}  {'residual':>10}")
for pt in branch.points[1:]:
    lam2 = (pt.lam - coeff.Lambda) / pt.s**2
    a2 = pt.profile.coeffs[1] / pt.s**2
    print(f"{pt.s:>7.4f}  {pt.lam:>16.12f}  {lam2:>16.8f}  "
          f"{a2:>12.8f}  {pt.residual:>10.2e}")

# --------  convergence order  ------------------------------------------------
s = branch.amplitudes[1:]
gap = np.abs(branch.lambdas[1:] - coeff.Lambda)
slope = np.polyfit(np.log(s), np.log(gap), 1)[0]
lam2_limit = (branch.lambdas[1] - coeff.Lambda) / s[0] ** 2
print(f"\nlog-log slope of |lambda(s) - Lambda|: {slope:.4f}  (expect 2)")
print(f"a_2/s^2 at the smallest amplitude: {branch.points[1].profile.coeffs[1] / s[0]**2:.8f}"
      f"  vs alpha_k = {coeff.alpha_k:.8f}")

fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(10, 4))
ax1.plot(branch.amplitudes, branch.lambdas, "o-", ms=3, label="corrected")
ss = np.linspace(0.0, S_MAX, 200)
ax1.plot(ss, coeff.Lambda + lam2_limit * ss**2, "--",
         label="fitted quadratic")
ax1.set_xlabel("amplitude s")
ax1.set_ylabel("wave speed lambda")
ax1.legend()
ax2.loglog(s, gap, "o-", ms=3)
ax2.set_xlabel("amplitude s")
ax2.set_ylabel("|lambda(s) - Lambda|")
ax2.set_title(f"slope {slope:.3f}")
fig.tight_layout()
fig.savefig("trace_branch.png", dpi=150)
print("wrote trace_branch.png")
